#pragma once

#include "fhn/lobatto.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <utility>

namespace fhn {

/// Periodic partition of [-L, L) into E equal elements carrying Lobatto nodes.
/// Nodal data is stored element by element (index e*(p+1) + i); continuous
/// fields simply repeat the shared interface value.
struct ElementMesh {
    double L = 0.0;
    int E = 0;
    LobattoRule rule;

    ElementMesh() = default;
    ElementMesh(double half_length, int elements, int degree);

    int p() const { return rule.p; }
    int npe() const { return rule.p + 1; }
    int size() const { return E * npe(); }
    double H() const { return 2.0 * L / E; }
    double J() const { return L / E; }
    double left(int e) const { return -L + e * H(); }
    double node(int e, int i) const { return left(e) + (rule.x(i) + 1.0) * J(); }
    int index(int e, int i) const { return e * npe() + i; }
    int wrap(int e) const { return ((e % E) + E) % E; }

    Eigen::VectorXd nodes() const;
    Eigen::VectorXd weights() const; // quadrature weight J*w_i at every node

    // Element and reference coordinate of xi (periodically wrapped). A point on
    // an interface belongs to the element on its right.
    std::pair<int, double> locate(double xi) const;

    template <class Vec>
    typename Vec::Scalar eval(const Vec& v, double xi) const
    {
        auto [e, s] = locate(xi);
        return rule.interpolate(v.segment(index(e, 0), npe()), s);
    }

    // Elementwise derivative of nodal data (no interface coupling).
    template <class Vec>
    Vec derivative(const Vec& v) const
    {
        Vec out(v.size());
        for (int e = 0; e < E; ++e)
            out.segment(index(e, 0), npe()) = (rule.D * v.segment(index(e, 0), npe())) / J();
        return out;
    }

    template <class F>
    Eigen::VectorXd sample(F&& f) const
    {
        Eigen::VectorXd v(size());
        for (int e = 0; e < E; ++e)
            for (int i = 0; i < npe(); ++i) v(index(e, i)) = f(node(e, i));
        return v;
    }
};

inline ElementMesh::ElementMesh(double half_length, int elements, int degree)
    : L(half_length), E(elements), rule(make_lobatto(degree))
{
}

inline Eigen::VectorXd ElementMesh::nodes() const
{
    return sample([](double x) { return x; });
}

inline Eigen::VectorXd ElementMesh::weights() const
{
    Eigen::VectorXd w(size());
    for (int e = 0; e < E; ++e) w.segment(index(e, 0), npe()) = rule.w * J();
    return w;
}

inline std::pair<int, double> ElementMesh::locate(double xi) const
{
    double t = (xi + L) / H();
    double ft = std::floor(t);
    double frac = t - ft;
    if (1.0 - frac < 1e-11) { // snap onto the interface, right-limit convention
        ft += 1.0;
        frac = 0.0;
    }
    long e = static_cast<long>(ft);
    int ew = static_cast<int>(((e % E) + E) % E);
    return {ew, 2.0 * frac - 1.0};
}

} // namespace fhn

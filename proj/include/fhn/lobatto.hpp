#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fhn {

/// Gauss-Lobatto-Legendre rule of degree p on [-1, 1] with its collocation derivative.
struct LobattoRule {
    int p = 0;
    Eigen::VectorXd x;   // p+1 nodes, ascending, x(0) = -1, x(p) = 1
    Eigen::VectorXd w;   // quadrature weights, exact to degree 2p-1
    Eigen::MatrixXd D;   // D(i, j) = l_j'(x_i)
    Eigen::VectorXd bary; // barycentric weights

    int size() const { return p + 1; }

    // Lagrange interpolation of nodal values v at s in [-1, 1].
    template <class Vec>
    auto interpolate(const Vec& v, double s) const -> typename Vec::Scalar;
};

LobattoRule make_lobatto(int p);

template <class Vec>
auto LobattoRule::interpolate(const Vec& v, double s) const -> typename Vec::Scalar
{
    using T = typename Vec::Scalar;
    T num(0);
    double den = 0.0;
    for (int j = 0; j <= p; ++j) {
        double d = s - x(j);
        if (d == 0.0) return v(j);
        double t = bary(j) / d;
        num += t * v(j);
        den += t;
    }
    return num / den;
}

} // namespace fhn

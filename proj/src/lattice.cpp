#include "fhn/lattice.hpp"

#include "fhn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fhn {

int default_degree(double h) { return std::clamp(static_cast<int>(std::ceil(h / 0.04 - 1e-9)), 4, 16); }

LatticeSystem::LatticeSystem(const CouplingKernel& kernel, double L, double h_, int degree, BoundaryMode m)
    : h(h_), mode(m)
{
    double cells = 2.0 * L / h;
    long E = std::lround(cells);
    require(E >= 2 && std::abs(cells - E) < 1e-9 * cells, "2L/h must be an integer");
    require(std::abs(L / h - std::round(L / h)) < 1e-9 * (L / h), "lattice sites must hit -L: L/h must be an integer");
    mesh = ElementMesh(L, static_cast<int>(E), degree);
    const int keff = std::min(kernel.effective_range(), static_cast<int>(E) - 1);
    for (int k = 1; k <= keff; ++k) a.push_back(kernel.alpha(k) / (h * h));
}

SpMat LatticeSystem::derivative(bool left_upwind) const
{
    const int np = mesh.npe(), p = mesh.p(), E = mesh.E;
    const double J = mesh.J();
    const auto& r = mesh.rule;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(n()) * (np + 2));
    for (int e = 0; e < E; ++e) {
        for (int i = 0; i < np; ++i)
            for (int j = 0; j < np; ++j) t.emplace_back(mesh.index(e, i), mesh.index(e, j), r.D(i, j) / J);
        if (left_upwind) {
            const double s = 1.0 / (J * r.w(0));
            t.emplace_back(mesh.index(e, 0), mesh.index(e, 0), s);
            if (e > 0 || mode == BoundaryMode::periodic)
                t.emplace_back(mesh.index(e, 0), mesh.index(mesh.wrap(e - 1), p), -s);
        } else {
            const double s = 1.0 / (J * r.w(p));
            t.emplace_back(mesh.index(e, p), mesh.index(e, p), -s);
            if (e < E - 1 || mode == BoundaryMode::periodic)
                t.emplace_back(mesh.index(e, p), mesh.index(mesh.wrap(e + 1), 0), s);
        }
    }
    SpMat D(n(), n());
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

SpMat LatticeSystem::delta() const
{
    const int np = mesh.npe(), E = mesh.E;
    std::vector<Eigen::Triplet<double>> t;
    double diag = 0.0;
    for (double ak : a) diag -= 2.0 * ak;
    for (int e = 0; e < E; ++e)
        for (int i = 0; i < np; ++i) {
            int row = mesh.index(e, i);
            t.emplace_back(row, row, diag);
            for (std::size_t k = 1; k <= a.size(); ++k) {
                for (int sgn : {-1, 1}) {
                    int f = e + sgn * static_cast<int>(k);
                    if (mode == BoundaryMode::zero_extended && (f < 0 || f >= E)) continue;
                    t.emplace_back(row, mesh.index(mesh.wrap(f), i), a[k - 1]);
                }
            }
        }
    SpMat D(n(), n());
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

int LatticeSystem::cell_of_site(long j) const
{
    long e = j + site_offset();
    return mesh.wrap(static_cast<int>(((e % mesh.E) + mesh.E) % mesh.E));
}

} // namespace fhn

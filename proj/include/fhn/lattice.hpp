#pragma once

#include "fhn/kernel.hpp"
#include "fhn/linalg.hpp"
#include "fhn/mesh.hpp"

namespace fhn {

/// Discretisation of functions of xi on [-L, L) by polynomials on each lattice
/// cell [hj, h(j+1)). Lattice shifts xi -> xi + kh map cell e to cell e + k at
/// the same local node, so Delta_h is exact. Derivatives use the upwind DG
/// flux: inflow from the left neighbour when `left_upwind`, from the right otherwise.
struct LatticeSystem {
    ElementMesh mesh;
    double h = 0.0;
    BoundaryMode mode = BoundaryMode::periodic;
    std::vector<double> a; // a[k-1] = alpha_k / h^2, negligible tail dropped

    LatticeSystem(const CouplingKernel& kernel, double L, double h, int degree,
                  BoundaryMode mode = BoundaryMode::periodic);

    int n() const { return mesh.size(); }
    Eigen::VectorXd weights() const { return mesh.weights(); }
    SpMat derivative(bool left_upwind) const;
    SpMat delta() const;
    // Lattice site j sits at xi = h j; j = e - L/h is the left end of cell e.
    int cell_of_site(long j) const;
    long site_offset() const { return std::lround(mesh.L / h); }
};

// Polynomial degree per lattice cell used by default for spacing h.
int default_degree(double h);

} // namespace fhn

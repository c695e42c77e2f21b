#pragma once

#include "fhn/linalg.hpp"
#include "fhn/mesh.hpp"
#include "fhn/model.hpp"

#include <string>

namespace fhn {

enum class Which { L_h, L_h_adjoint, L_h_infty, L_0, L_0_adjoint };

std::string to_string(Which w);

/// Sparse discretisation of a 2x2 block operator acting on (u, w) nodal
/// values. Unknowns are blocked: all u nodes first, then all w nodes.
/// `weights` is the quadrature weight of each unknown, so that the L2 inner
/// product is sum_i weights_i conj(x_i) y_i.
struct OperatorMatrix {
    Which which = Which::L_h;
    SpMat A;
    Eigen::VectorXd weights;
    ElementMesh mesh;
    bool continuous = false; // CG (shared interface nodes) vs one-element-per-cell DG
    double h = 0.0;
    double c = 0.0;
    ModelParams params;

    long dim() const { return A.rows(); }
    long nodes() const { return A.rows() / 2; }

    template <class V1, class V2>
    auto inner(const V1& x, const V2& y) const
    {
        return (x.conjugate().array() * y.array() * weights.array()).sum();
    }

    // W^-1 A^T W: the exact adjoint in the weighted inner product.
    OperatorMatrix adjoint() const;
};

SpMat diag_matrix(const Eigen::VectorXd& d);

} // namespace fhn

#include "fhn/operator.hpp"

namespace fhn {

std::string to_string(Which w)
{
    switch (w) {
    case Which::L_h: return "L_h";
    case Which::L_h_adjoint: return "L_h_adjoint";
    case Which::L_h_infty: return "L_h_infty";
    case Which::L_0: return "L_0";
    case Which::L_0_adjoint: return "L_0_adjoint";
    }
    return "?";
}

SpMat diag_matrix(const Eigen::VectorXd& d)
{
    SpMat D(d.size(), d.size());
    D.reserve(Eigen::VectorXi::Constant(d.size(), 1));
    for (long i = 0; i < d.size(); ++i) D.insert(i, i) = d(i);
    D.makeCompressed();
    return D;
}

OperatorMatrix OperatorMatrix::adjoint() const
{
    OperatorMatrix out = *this;
    SpMat At = A.transpose();
    out.A = diag_matrix(weights.cwiseInverse()) * At * diag_matrix(weights);
    out.A.makeCompressed();
    switch (which) {
    case Which::L_h: out.which = Which::L_h_adjoint; break;
    case Which::L_h_adjoint: out.which = Which::L_h; break;
    case Which::L_0: out.which = Which::L_0_adjoint; break;
    case Which::L_0_adjoint: out.which = Which::L_0; break;
    default: break;
    }
    return out;
}

} // namespace fhn

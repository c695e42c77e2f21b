#include "fhn/linalg.hpp"

#include "fhn/errors.hpp"

#include <Eigen/UmfPackSupport>
#include <algorithm>
#include <random>

namespace fhn {

template <class Scalar>
struct SparseFactor<Scalar>::Impl {
    Sparse A; // UmfPackLU keeps a view of the factored matrix
    mutable Sparse Ah;
    Eigen::UmfPackLU<Sparse> lu;
    mutable std::unique_ptr<Eigen::UmfPackLU<Sparse>> lu_h;
};

template <class Scalar>
SparseFactor<Scalar>::SparseFactor(const Sparse& A) : impl_(std::make_unique<Impl>())
{
    impl_->A = A;
    impl_->A.makeCompressed();
    impl_->lu.umfpackControl()(UMFPACK_IRSTEP) = 0;
    impl_->lu.compute(impl_->A);
}

template <class Scalar>
SparseFactor<Scalar>::~SparseFactor() = default;
template <class Scalar>
SparseFactor<Scalar>::SparseFactor(SparseFactor&&) noexcept = default;

template <class Scalar>
bool SparseFactor<Scalar>::ok() const
{
    return impl_->lu.info() == Eigen::Success;
}

template <class Scalar>
auto SparseFactor<Scalar>::solve(const Matrix& B) const -> Matrix
{
    Matrix X = impl_->lu.solve(B);
    return X;
}

template <class Scalar>
auto SparseFactor<Scalar>::solve_adjoint(const Matrix& B) const -> Matrix
{
    if (!impl_->lu_h) {
        impl_->Ah = impl_->A.adjoint();
        impl_->Ah.makeCompressed();
        impl_->lu_h = std::make_unique<Eigen::UmfPackLU<Sparse>>();
        impl_->lu_h->umfpackControl()(UMFPACK_IRSTEP) = 0;
        impl_->lu_h->compute(impl_->Ah);
        if (impl_->lu_h->info() != Eigen::Success) throw NumericalFailure("adjoint factorisation failed");
    }
    Matrix X = impl_->lu_h->solve(B);
    return X;
}

template class SparseFactor<double>;
template class SparseFactor<cd>;

SpMatC shifted(const SpMat& A, cd lambda)
{
    SpMatC B = A.cast<cd>();
    SpMatC I(A.rows(), A.cols());
    I.setIdentity();
    B += lambda * I;
    B.makeCompressed();
    return B;
}

namespace {

Eigen::MatrixXcd start_block(long n, int k, unsigned seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd X(n, k);
    for (long i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) X(i, j) = cd(nd(gen), nd(gen));
    return X;
}

Eigen::MatrixXcd orthonormal(const Eigen::MatrixXcd& X)
{
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(X);
    return qr.householderQ() * Eigen::MatrixXcd::Identity(X.rows(), X.cols());
}

} // namespace

SigmaResult smallest_singular(const SpMatC& A, const Eigen::VectorXd& W, int k, int max_iter, double tol)
{
    const long n = A.rows();
    ComplexFactor lu(A);
    if (!lu.ok()) {
        // exactly singular to working precision
        SigmaResult r;
        r.sigma.assign(k, 0.0);
        r.right = Eigen::MatrixXcd::Zero(n, k);
        return r;
    }
    const Eigen::VectorXd s = W.cwiseSqrt();
    const Eigen::VectorXd si = s.cwiseInverse();
    // Ahat = S A S^-1, Ahat^-1 = S A^-1 S^-1, Ahat^-H = S^-1 A^-H S
    auto apply_inv = [&](const Eigen::MatrixXcd& X) {
        Eigen::MatrixXcd Y = si.asDiagonal() * X;
        Eigen::MatrixXcd Z = lu.solve(Y);
        return Eigen::MatrixXcd(s.asDiagonal() * Z);
    };
    auto apply_inv_h = [&](const Eigen::MatrixXcd& X) {
        Eigen::MatrixXcd Y = s.asDiagonal() * X;
        Eigen::MatrixXcd Z = lu.solve_adjoint(Y);
        return Eigen::MatrixXcd(si.asDiagonal() * Z);
    };
    const int b = static_cast<int>(std::min<long>(k + 2, n));
    Eigen::MatrixXcd V = orthonormal(start_block(n, b, 12345));
    SigmaResult r;
    Eigen::VectorXd prev = Eigen::VectorXd::Constant(b, -1.0);
    for (int it = 1; it <= max_iter; ++it) {
        // Rayleigh-Ritz: Ahat^-H V has singular values 1/sigma for right singular vectors V of Ahat
        Eigen::MatrixXcd Y = apply_inv_h(V);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Y, Eigen::ComputeThinV);
        Eigen::VectorXd sv = svd.singularValues().cwiseInverse();
        V = V * svd.matrixV();
        Y = Y * svd.matrixV();
        r.iterations = it;
        // relative change, with an absolute floor for values at roundoff level
        const bool done = ((sv - prev).cwiseAbs().array() <= (tol * sv.array()).max(1e-12)).head(k).all();
        prev = sv;
        if (done) break;
        V = orthonormal(apply_inv(Y));
    }
    r.sigma.assign(prev.data(), prev.data() + k);
    r.right = si.asDiagonal() * V.leftCols(k);
    return r;
}

std::vector<cd> eigs_near(const SpMatC& A, cd sigma, int nev, int ncv)
{
    const long n = A.rows();
    ncv = static_cast<int>(std::min<long>(ncv, n));
    nev = std::min(nev, ncv - 1);
    SpMatC B = A;
    SpMatC I(n, n);
    I.setIdentity();
    B -= sigma * I;
    ComplexFactor lu(B);
    if (!lu.ok()) throw NumericalFailure("eigs_near: shift is an eigenvalue");

    Eigen::MatrixXcd Q(n, ncv + 1);
    Eigen::MatrixXcd Hm = Eigen::MatrixXcd::Zero(ncv + 1, ncv);
    Eigen::VectorXcd q = start_block(n, 1, 777).col(0);
    Q.col(0) = q / q.norm();
    int m = ncv;
    for (int j = 0; j < ncv; ++j) {
        Eigen::VectorXcd v = lu.solve(Q.col(j)).col(0);
        for (int pass = 0; pass < 2; ++pass) { // classical Gram-Schmidt, twice
            Eigen::VectorXcd hcol = Q.leftCols(j + 1).adjoint() * v;
            v -= Q.leftCols(j + 1) * hcol;
            Hm.block(0, j, j + 1, 1) += hcol;
        }
        double beta = v.norm();
        Hm(j + 1, j) = beta;
        if (beta < 1e-14) {
            m = j + 1;
            break;
        }
        Q.col(j + 1) = v / beta;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Hm.topLeftCorner(m, m));
    std::vector<cd> theta(es.eigenvalues().data(), es.eigenvalues().data() + m);
    std::sort(theta.begin(), theta.end(), [](cd a, cd b) { return std::abs(a) > std::abs(b); });
    std::vector<cd> out;
    for (int i = 0; i < std::min(nev, m); ++i) out.push_back(sigma + 1.0 / theta[i]);
    return out;
}

} // namespace fhn

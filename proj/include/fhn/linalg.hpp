#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <memory>
#include <vector>

namespace fhn {

using cd = std::complex<double>;
using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<cd>;

/// Sparse LU (UMFPACK). Solves with A^H factor A^H on first use.
template <class Scalar>
class SparseFactor {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Sparse = Eigen::SparseMatrix<Scalar>;

    explicit SparseFactor(const Sparse& A);
    ~SparseFactor();
    SparseFactor(SparseFactor&&) noexcept;

    bool ok() const;
    Matrix solve(const Matrix& B) const;
    Matrix solve_adjoint(const Matrix& B) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

using RealFactor = SparseFactor<double>;
using ComplexFactor = SparseFactor<cd>;

// A + lambda I as a complex matrix.
SpMatC shifted(const SpMat& A, cd lambda);

struct SigmaResult {
    std::vector<double> sigma;  // ascending
    Eigen::MatrixXcd right;      // matching right singular vectors, W-unit norm
    int iterations = 0;
};

/// k smallest singular values of W^{1/2} A W^{-1/2}, i.e. of A measured in the
/// W-weighted norm, by block inverse iteration on (A^H A)^{-1} with one sparse LU.
SigmaResult smallest_singular(const SpMatC& A, const Eigen::VectorXd& W, int k = 1, int max_iter = 200,
                              double tol = 1e-12);

/// Eigenvalues of A closest to sigma by shift-invert Arnoldi (ncv Krylov vectors,
/// deterministic start). Returned sorted by distance to sigma, nev of them.
std::vector<cd> eigs_near(const SpMatC& A, cd sigma, int nev, int ncv = 60);

} // namespace fhn

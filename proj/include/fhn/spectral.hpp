#pragma once

#include "fhn/lattice.hpp"
#include "fhn/operator.hpp"
#include "fhn/profile.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace fhn {

/// L_h = [[c D - Delta_h - g_u(u_h), 1], [-rho, c D + gamma rho]] on the lattice
/// cells of `profile` (which must be a lattice pulse at spacing profile.h).
OperatorMatrix assemble_Lh(const WaveProfile& profile, const CouplingKernel& kernel, const ModelParams& params,
                           BoundaryMode mode = BoundaryMode::periodic);
OperatorMatrix assemble_Lh_adjoint(const WaveProfile& profile, const CouplingKernel& kernel,
                                   const ModelParams& params, BoundaryMode mode = BoundaryMode::periodic);
/// Constant-coefficient operator (profile replaced by the rest state, g_u(0) = -r0).
OperatorMatrix assemble_Lh_infty(const ElementMesh& mesh, double h, double c, const CouplingKernel& kernel,
                                 const ModelParams& params, BoundaryMode mode = BoundaryMode::periodic);

struct KernelElements {
    Eigen::VectorXd phi_plus, phi_minus; // blocked (u, w), unit W-norm
    double omega = 0.0;                  // <Phi-, Phi+>
    double sigma1 = 0.0, sigma2 = 0.0;   // two smallest singular values of L_h
    double sigma1_adjoint = 0.0;
};

/// Kernel vectors of L_h and L_h*. `align`, if given, fixes the sign of Phi+
/// (positive overlap); otherwise the largest entry of Phi+ is made positive.
KernelElements kernel_elements(const OperatorMatrix& Lh, const OperatorMatrix& Lh_adj, double tol = 1e-6,
                               const Eigen::VectorXd* align = nullptr);

struct SymbolEvaluation {
    cd lambda, z;
    Eigen::Matrix2cd matrix;
    cd det;
};

SymbolEvaluation symbol(const CouplingKernel& kernel, const ModelParams& params, double h, double c, cd lambda,
                        cd z);

// y grid covering one symbol period plus the drift scale |Im lambda|/|c|.
std::vector<double> default_y_grid(double h, double c, cd lambda, int n = 4001);

double hyperbolicity_margin(const CouplingKernel& kernel, const ModelParams& params, double h, double c,
                            cd lambda, const std::vector<double>& y_grid);

/// Roots lambda of det Delta(iy) = 0 (essential spectrum of L_h + lambda);
/// returns sup Re lambda over a fine y grid.
double essential_spectrum_edge(const CouplingKernel& kernel, const ModelParams& params, double h, double c,
                               int ny = 20001);

/// Spectral constants with explicit formulas.
double lambda_tilde(const ModelParams& params); // min(gamma rho, r0) / 4
double g_star(const WaveProfile& profile);      // max |g_u(u)| over the profile
double lambda_one(const WaveProfile& profile);  // 1 + g* + (1 - rho)/2

struct ScanOptions {
    double eig_tol = 1e-6;
    double candidate_tol = 1e-2;
    int refine_iter = 30;
    bool arnoldi = true;
    int arnoldi_nev = 20;
};

struct SpectralScanReport {
    std::string region;
    std::vector<cd> lambda_grid;
    std::vector<double> sigma_min;
    std::vector<cd> eigenvalues_located;   // lambda with L_h + lambda singular
    std::vector<cd> arnoldi_eigenvalues;   // nearest the origin
    double essential_edge = 0.0;           // sup Re of the essential spectrum
    double empirical_lambda3 = 0.0;
};

double sigma_min_at(const OperatorMatrix& Lh, cd lambda, int k = 1, std::vector<double>* all = nullptr);

SpectralScanReport scan_strip(const OperatorMatrix& Lh, const CouplingKernel& kernel,
                              const std::vector<cd>& lambda_grid, const std::string& region = "full_strip",
                              const ScanOptions& opt = {});

// Rectangular grid Re in [re0, re1] x Im in [-pi c / h, pi c / h] (endpoints excluded on Im).
std::vector<cd> strip_grid(double re0, double re1, int nre, int nim, double h, double c);

struct PeriodicityReport {
    double sigma_lambda = 0.0;
    double sigma_shifted = 0.0;      // sigma_min(L_h + lambda + 2 pi i c / h)
    double conjugation_gap = 0.0;    // relative W-norm gap of the conjugated action on a smooth bump
    bool delta_block_identical = false;
    double relative_gap = 0.0;       // |sigma_lambda - sigma_shifted| / max(sigma)
};

PeriodicityReport check_periodicity(const OperatorMatrix& Lh, const CouplingKernel& kernel, cd lambda);

} // namespace fhn

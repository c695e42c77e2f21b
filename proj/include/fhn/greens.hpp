#pragma once

#include "fhn/fit.hpp"
#include "fhn/spectral.hpp"

#include <Eigen/Dense>
#include <vector>

namespace fhn {

enum class InftyMethod { alias_sum, window_split };

/// G_{inf;lambda}(xi) = (1/2pi) int e^{i eta xi} Delta(i eta)^-1 d eta for the
/// constant-coefficient lattice operator; right limit at xi in hZ.
/// alias_sum folds the integral onto one period 2pi/h of the nonlocal symbol and
/// sums the aliases in closed form; window_split integrates |eta| <= window/h after
/// subtracting the 1/(i eta - alpha) and (B - alpha)/(i eta - alpha)^2 terms,
/// whose transforms are added back exactly.
Eigen::Matrix2cd greens_infty(const CouplingKernel& kernel, const ModelParams& params, double h, double c, cd lambda,
                              double xi, InftyMethod method = InftyMethod::alias_sum, int nodes = 0,
                              double window = 40.0);

/// Resolvent Green's function column pair G_lambda(., xi0) on the lattice cells.
/// cols(l*n + node, m) = G_lambda(node, xi0)_{l m}; xi0 = h j0 is a cell interface.
struct ResolventGreen {
    cd lambda;
    long j0 = 0;
    double xi0 = 0.0;
    ElementMesh mesh;
    Eigen::MatrixXcd cols;

    Eigen::Matrix2cd at(double xi) const;
};

// Nodal right-hand side of a Dirac source at the lattice site j0 (one column per component).
Eigen::MatrixXcd dirac_source(const OperatorMatrix& op, const std::vector<long>& j0s);

/// G_lambda = G_inf - (lambda + L_h)^-1 [(L_h - L_inf) G_inf], G_inf solved on the
/// same cells with the constant-coefficient operator.
ResolventGreen greens_resolvent(const OperatorMatrix& Lh, const CouplingKernel& kernel, cd lambda, long j0,
                                double eig_tol = 1e-9);
// The same object from one solve with lambda + L_h (what the contour uses).
std::vector<ResolventGreen> resolvent_direct(const OperatorMatrix& Lh, cd lambda, const std::vector<long>& j0s);
ResolventGreen greens_infty_discrete(const OperatorMatrix& Lh, const CouplingKernel& kernel, cd lambda, long j0);

/// Temporal Green's function G_j^{j0}(t, t0) on the periodic lattice ring of 2L/h sites.
struct TemporalGreen {
    long j0 = 0;
    double t0 = 0.0, t = 0.0;
    std::vector<long> sites;            // j values
    std::vector<Eigen::Matrix2d> G;     // per site
    double max_imag = 0.0;              // contour only: size of the discarded imaginary part
    std::vector<Eigen::Matrix2d> E, Gtilde; // filled by decompose_temporal

    const Eigen::Matrix2d& at(long j) const;
};

struct OdeOptions {
    double dt = 0.002;
};

/// RK4 for dV/dt = A(t) V with A(t) V_j = [[Delta_h + g_u(u(hj + ct)), -1], [rho, -rho gamma]] V_j.
/// V holds 2 rows per site (u, w), sites ordered j = -L/h .. L/h - 1, any number of columns.
Eigen::MatrixXd propagate_lattice(const WaveProfile& profile, const CouplingKernel& kernel,
                                  const ModelParams& params, const Eigen::MatrixXd& V0, double t0, double t,
                                  const OdeOptions& opt = {});

TemporalGreen temporal_green_direct(const CouplingKernel& kernel, const ModelParams& params,
                                    const WaveProfile& profile, long j0, double t0, double t,
                                    const OdeOptions& opt = {});

struct ContourOptions {
    int n_nodes = 64;
    bool trapezoid = false;
    double sigma_floor = 1e-8;
};

/// (h / 2 pi i) int_{chi - i pi c/h}^{chi + i pi c/h} e^{lambda (t - t0)} G_lambda(hj + ct, hj0 + ct0) d lambda
/// for every (j0, t) pair, sharing the resolvent solves.
std::vector<TemporalGreen> temporal_green_contour(const CouplingKernel& kernel, const ModelParams& params,
                                                  const WaveProfile& profile, const std::vector<long>& j0s,
                                                  double t0, const std::vector<double>& ts, double chi,
                                                  const ContourOptions& opt = {}, double im_shift = 0.0);

// Phi+ and Phi- as functions of xi (interpolated from the lattice cells).
struct KernelFields {
    ElementMesh mesh;
    Eigen::VectorXd phi_plus, phi_minus;
    double omega = 0.0;
    Eigen::Vector2d plus(double xi) const;
    Eigen::Vector2d minus(double xi) const;
};
KernelFields make_kernel_fields(const OperatorMatrix& Lh, const KernelElements& ke);

struct DecompositionReport {
    double beta_tilde = 0.0;
    double K = 0.0;
    double envelope_K = 0.0;     // smallest K making the fitted bound hold on all samples
    int samples = 0;
    double rank1_residual = 0.0; // max second singular value of E blocks
};

// E_j^{j0}(t, t0) = (h / Omega) Phi+(hj + ct) Phi-(hj0 + ct0)^T; Gtilde = G - E.
void decompose_temporal(TemporalGreen& rec, const KernelFields& kf, double h, double c);
DecompositionReport fit_gtilde(const std::vector<TemporalGreen>& recs, double h, double c, double floor = 1e-12);

struct ProjectionReport {
    double idempotency_error = 0.0;       // max |Pi^c * Pi^c - Pi^c|
    double complement_error = 0.0;        // max |Pi^s * Pi^c|
    double sum_identity_combined = 0.0;   // |h sum Phi-.Phi+ - Omega|
    double sum_identity_phi = 0.0;        // |h sum phi- phi+ - int phi- phi+|
    double sum_identity_psi = 0.0;        // same for the w components
    int window_sites = 0;
};

ProjectionReport projections(const KernelFields& kf, double h, double c, double t, double tail = 1e-13);

struct ResidueReport {
    double max_error = 0.0;         // Richardson limit vs +(1/Omega) Phi+(xi) Phi-(xi0)^T
    double max_error_literal = 0.0; // same against the opposite sign
    double max_error_raw = 0.0;     // lambda G at the smallest lambda, no extrapolation
    double max_target = 0.0;        // largest entry of the rank-1 limit on the sample
    std::vector<double> point_errors;
    int points = 0;
};

ResidueReport residue_check(const OperatorMatrix& Lh, const KernelFields& kf,
                            const std::vector<std::pair<double, long>>& points,
                            const std::vector<double>& lambdas = {1e-2, 1e-3});

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w);

} // namespace fhn

#pragma once

#include "fhn/kernel.hpp"
#include "fhn/operator.hpp"
#include "fhn/profile.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace fhn {

/// Continuous-Galerkin Lobatto discretisation on a periodic mesh: lumped mass M,
/// first derivative D1 = M^-1 C (C skew) and second derivative D2 = -M^-1 K (K symmetric).
struct CGSystem {
    ElementMesh mesh;
    int n = 0;
    Eigen::VectorXd M;
    SpMat D1, D2;

    explicit CGSystem(const ElementMesh& m);
    int global(int e, int i) const { return (e * mesh.p() + i) % n; }
    Eigen::VectorXd to_nodes(const Eigen::VectorXd& g) const;  // global -> element layout
    Eigen::VectorXd to_global(const Eigen::VectorXd& v) const; // element layout -> global
    Eigen::VectorXd coords() const;
};

struct PulseSeed {
    GridField<double> u, w;
};

// u = 1 on a window of `width` around `center`, plus a refractory block w = w_level
// of length `refractory` just to the right, so that only a left-moving pulse forms.
PulseSeed make_standard_bump(double L, double d, double center, double width = 5.0, double refractory = 17.0,
                             double w_level = 0.15);

struct SeedResult {
    WaveProfile candidate;        // frozen frame (PDE mesh), shifted to put the peak at target
    std::optional<double> speed;  // front-tracking estimate, absent if no pulse formed
    bool pulse_formed = false;
    std::string diagnostic;
};

struct SeedOptions {
    double dt = 0.05;
    double peak_target = -20.0;
};

SeedResult evolve_pde_seed(const ModelParams& params, const ElementMesh& mesh, const PulseSeed& bump, double T,
                           const SeedOptions& opt = {});

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 30;
};

/// Bordered Newton for c u' = u'' + g(u) - w, c w' = rho (u - gamma w) with the phase
/// condition <seed', U - seed> = 0. Works on seed.mesh.
WaveProfile solve_pde_pulse(const ModelParams& params, const WaveProfile& seed, const NewtonOptions& opt = {},
                            int* iterations = nullptr);

OperatorMatrix assemble_L0(const WaveProfile& profile, bool plus = true);

struct PdeKernelReport {
    std::vector<cd> eigenvalues;     // eigenvalues lambda of -L0 (L0 + lambda singular) nearest the origin
    double lambda_min_abs = 0.0;     // |lambda| of the one closest to 0
    bool zero_eigenvalue_present = false;
    bool zero_simple = false;
    double sigma1 = 0.0, sigma2 = 0.0; // two smallest singular values of L0
    double omega0 = 0.0;             // <Phi0-, Phi0+> after sign normalisation
    double lambda_star = 0.0;        // min distance of the remaining eigenvalues to Re = 0
    Eigen::VectorXd phi_plus, phi_minus; // unit kernel vectors, blocked (u, w) on the global CG nodes
};

PdeKernelReport check_pde_kernel(const WaveProfile& profile, double tol_zero = 1e-6, int nev = 24);

// Decay rates of |u|, |w| ahead of and behind the peak, fitted on |xi - peak| in [a, b].
struct TailRates {
    double ahead_u, ahead_w, behind_u, behind_w;
};
TailRates tail_decay_rates(const WaveProfile& p, double a, double b);

} // namespace fhn

#pragma once

#include "fhn/kernel.hpp"
#include "fhn/profile.hpp"

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace fhn {

/// Lattice state on the sites j_min .. j_max (inclusive); outside the window the
/// state is zero (zero_extended) or the window is a ring (periodic).
struct LatticeState {
    long j_min = 0, j_max = -1;
    Eigen::VectorXd u, w;
    double time = 0.0;
    BoundaryMode mode = BoundaryMode::zero_extended;

    long size() const { return j_max - j_min + 1; }
    static LatticeState zeros(long j_min, long j_max, BoundaryMode mode = BoundaryMode::zero_extended);
};

// u' = Delta_h u + g(u) - w, w' = rho (u - gamma w).
std::pair<Eigen::VectorXd, Eigen::VectorXd> rhs(const LatticeState& s, const CouplingKernel& kernel,
                                                const ModelParams& params, double h);

struct EvolveOptions {
    double dt = 0.0;             // 0: largest stable step capped at 0.02
    double stride = 1.0;         // sampling interval of the trajectory
    double stability_factor = 2.5;
    double blowup = 1e6;
    double spill = 1e-6;         // max |u|, |w| allowed on the 10 outermost sites
};

double max_stable_dt(const CouplingKernel& kernel, double h, double stability_factor);

// Classical RK4; returns the states at t0, t0 + stride, ..., t0 + T.
std::vector<LatticeState> evolve(const LatticeState& s0, const CouplingKernel& kernel, const ModelParams& params,
                                 double h, double T, const EvolveOptions& opt = {});

// (sum_j max(|du_j|, |dw_j|)^p)^(1/p); p = infinity for the sup norm.
double lp_norm(const Eigen::VectorXd& du, const Eigen::VectorXd& dw, double p);

// Pulse samples (u, w)(h j + c (t + theta)); zero outside the profile's domain [-L, L).
LatticeState pulse_state(const WaveProfile& profile, long j_min, long j_max, double t, double theta = 0.0);

// Window [j_min, j_max] keeping the pulse and its tails inside for 0 <= t <= T.
std::pair<long, long> pulse_window(const WaveProfile& profile, double T);

struct Perturbation {
    Eigen::VectorXd du, dw;
};

Perturbation gaussian_bump(const LatticeState& window, double h, double amplitude, double center, double width);
// U0_j = pulse_{j - shift} minus the pulse.
Perturbation lattice_translate(const WaveProfile& profile, long j_min, long j_max, long shift);

struct StabilityOptions {
    double T = 200.0;
    double dt = 0.0;
    double sample = 1.0;
    double theta_tol = 1e-3;
    double delta = 5.0;          // admissible size of the perturbation (a lattice translate is ~2 in l^1)
    EvolveOptions evolve;
};

struct StabilityFit {
    double p = 2.0;
    std::vector<std::pair<double, double>> residual_series, theta_series;
    double fitted_beta = 0.0, fitted_C = 0.0, theta_infinity = 0.0;
    double initial_norm = 0.0;
    bool theta_converged = false;
    std::string diagnostic;
};

/// Evolve pulse + perturbation and fit the relaxation toward the translated pulse,
/// one fit per norm exponent (the trajectory is shared).
std::vector<StabilityFit> stability_experiment(const WaveProfile& profile, const CouplingKernel& kernel,
                                               const ModelParams& params, const Perturbation& pert,
                                               const std::vector<double>& ps, const StabilityOptions& opt = {});

// Phase theta minimising ||U - pulse(t + theta)||_p by golden section on [lo, hi].
double best_phase(const WaveProfile& profile, const LatticeState& U, double p, double lo, double hi,
                  double tol = 1e-10);

void write_stability_csv(const StabilityFit& f, const std::string& path);

} // namespace fhn

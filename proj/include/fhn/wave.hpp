#pragma once

#include "fhn/lattice.hpp"
#include "fhn/model.hpp"
#include "fhn/profile.hpp"

#include <optional>
#include <vector>

namespace fhn {

struct MfdeResidual {
    ElementMesh mesh;
    Eigen::VectorXd ru, rw; // c u' - Delta_h u - g(u) + w  and  c w' - rho (u - gamma w)
    double sup_norm = 0.0;
};

/// Residual of the lattice travelling-wave equation for `profile` at spacing h.
/// The profile is re-represented on the lattice cells (degree `degree`, or the
/// profile's own mesh if it already is a lattice profile at this h).
MfdeResidual mfde_residual(const WaveProfile& profile, const CouplingKernel& kernel, const ModelParams& params,
                           double h, int degree = 0);

struct LatticeSolveOptions {
    int degree = 0;        // 0: default_degree(h)
    double tol = 1e-10;
    int max_iter = 30;
    const WaveProfile* phase_ref = nullptr; // defaults to the seed
};

/// Bordered Newton for (u_h, w_h, c_h) with phase condition
/// <ref_u', u - ref_u> + <ref_w', w - ref_w> = 0.
WaveProfile solve_lattice_pulse(const CouplingKernel& kernel, const ModelParams& params, double h,
                                const WaveProfile& seed, const LatticeSolveOptions& opt = {},
                                int* iterations = nullptr);

struct ContinuationRun {
    std::vector<double> h_values;
    std::vector<WaveProfile> profiles;
    std::vector<double> distances;  // discrete H1 distance to the PDE pulse
    std::vector<double> speed_gaps; // |c_h - c_0|
    std::vector<int> iterations;
    bool complete = false;
    std::string failure;
};

struct ContinuationOptions {
    double d = 0.05;      // uniform grid for the H1 distance
    double tol = 1e-10;
    int max_iter = 30;
    int degree = 0;       // 0: default_degree per h
};

ContinuationRun continuation_in_h(const CouplingKernel& kernel, const ModelParams& params, const WaveProfile& pde,
                                  const std::vector<double>& h_list, const ContinuationOptions& opt = {});

// Normalised (u_h', w_h') on the lattice nodes, blocked (u, w), unit W-norm.
Eigen::VectorXd derivative_mode(const WaveProfile& p);

} // namespace fhn

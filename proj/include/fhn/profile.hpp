#pragma once

#include "fhn/mesh.hpp"
#include "fhn/model.hpp"

#include <Eigen/Dense>
#include <string>
#include <utility>

namespace fhn {

/// Pulse profile (u, w)(xi) with speed c. Values live on the element nodes of
/// `mesh`; h == 0 marks the PDE pulse, h > 0 a lattice pulse whose elements are
/// the lattice cells.
struct WaveProfile {
    ElementMesh mesh;
    Eigen::VectorXd u, w;
    double c = 0.0;
    double residual_norm = 0.0;
    double h = 0.0;
    ModelParams params;

    double L() const { return mesh.L; }
    std::pair<double, double> eval(double xi) const { return {mesh.eval(u, xi), mesh.eval(w, xi)}; }
    std::pair<double, double> eval_derivative(double xi) const;

    // Profile xi -> (u, w)(xi + shift), resampled on the same mesh.
    WaveProfile shifted(double shift) const;
    // Same profile re-represented on another mesh by interpolation.
    WaveProfile resampled(const ElementMesh& target) const;
    double peak_position() const;
};

struct UniformSamples {
    Eigen::VectorXd xi, u, w;
};

// Samples at xi_i = -L + i d, i = 0 .. 2L/d - 1 (periodic grid).
UniformSamples sample_uniform(const WaveProfile& p, double d);

// Discrete H1 distance on the uniform d-grid: sum of L2 norms of the
// differences and of their forward difference quotients.
double h1_distance(const WaveProfile& a, const WaveProfile& b, double d);

// CSV: header rows (params, L, d, c, residual_norm, h) then xi,u,w.
void write_profile_csv(const WaveProfile& p, double d, const std::string& path);
// Full nodal dump that round-trips exactly (used for resuming a run).
void write_profile_nodes(const WaveProfile& p, const std::string& path);
WaveProfile read_profile_nodes(const std::string& path);

} // namespace fhn

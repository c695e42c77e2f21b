#pragma once

#include "fhn/kernel.hpp"
#include "fhn/model.hpp"

#include <json.hpp>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fhn {

struct PdeConfig {
    int elements = 600;
    int degree = 10;
    double seed_center = 40.0;
    double seed_width = 5.0;
    double refractory = 17.0;
    double w_level = 0.15;
    double T = 150.0;
    double dt = 0.05;
    double peak = -20.0;
    double tol = 1e-10;
    int max_iter = 30;
};

struct ContinuationConfig {
    std::vector<double> h_list{0.5, 0.25, 0.1, 0.05};
    double tol = 1e-10;
    int max_iter = 30;
    int degree = 0; // 0: chosen per h
};

struct SpectrumConfig {
    double h = 0.25;
    int degree = 12;
    int n_re = 4;        // strip probe grid Re in [-lambda~, lambda1]
    int n_im = 6;
    double eig_tol = 1e-6;
    double periodic_tol = 1e-5;
    double invertible_tol = 1e-3;
};

struct GreenConfig {
    double h = 0.25;
    int degree = 20;
    int n_nodes = 64;
    std::optional<double> chi;                 // default lambda1 + 1
    std::vector<double> t_list{0.5, 1.0, 2.0};
    std::vector<long> source_offsets{-16, 0, 12, 80}; // sites relative to the pulse peak
    std::vector<long> site_offsets{-2, -1, 0, 1, 2};
    double ode_dt = 0.002;
    double rel_tol = 1e-4;
    std::vector<double> fit_times{1.0, 2.0, 5.0, 10.0, 20.0, 40.0};
    std::vector<double> projection_times{0.0, 0.3, 1.7};
    std::vector<double> residue_lambdas{1e-2, 1e-3};
    double residue_tol = 1e-3;
};

struct DynamicsConfig {
    double h = 0.25;
    int degree = 12;
    double T = 200.0;
    double dt = 0.0;
    double sample = 1.0;
    double bump_amplitude = 0.01;
    double bump_width = 2.0;
    std::vector<double> p{1.0, 2.0, std::numeric_limits<double>::infinity()};
    double theta_tol = 1e-3;
    double delta = 5.0;
    double band = 2.0; // accepted ratio between decay rates
};

/// Complete run configuration. JSON documents are merged over the defaults;
/// unknown keys and wrong types are rejected.
struct RunConfig {
    std::string kernel_type = "gaussian";
    int K = 20;
    std::vector<double> coeffs; // custom kernel only
    ModelParams model;
    double L = 120.0;
    double d = 0.05;
    PdeConfig pde;
    ContinuationConfig continuation;
    SpectrumConfig spectrum;
    GreenConfig green;
    DynamicsConfig dynamics;
    std::string pde_profile; // nodal dump to resume from (skips the PDE stage)
    int threads = 1;

    CouplingKernel kernel() const;
    // Parameter ranges, h = m d for every spacing in use, lattice alignment with L.
    void validate() const;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& user);
    static RunConfig load(const std::string& path);
    // FNV-1a of the canonical JSON dump.
    std::string hash() const;
};

// Apply "a.b.c=value" (value parsed as JSON, else taken as a string).
void apply_override(nlohmann::json& doc, const std::string& assignment);

} // namespace fhn

#pragma once

#include "fhn/pipeline.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fhn {

/// Outcome of one acceptance criterion. `metrics` holds every measured value
/// next to its threshold; `summary` is a one-line digest of the margins.
struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string summary;
    nlohmann::json metrics;
    double seconds = 0.0;
};

CheckResult check_kernel_identities(Pipeline& pl);
CheckResult check_continuation(Pipeline& pl);
CheckResult check_spectrum(Pipeline& pl);
// contour_out, if given, receives the contour records.
CheckResult check_green_oracle(Pipeline& pl, std::vector<TemporalGreen>* contour_out = nullptr);
CheckResult check_decomposition(Pipeline& pl);
CheckResult check_stability(Pipeline& pl);
CheckResult check_residue(Pipeline& pl);

// Runs the selected criteria (1..7, empty = all) in order; `on_result` sees each
// result as soon as it is available. Exceptions inside a check become a FAIL.
std::vector<CheckResult> run_acceptance(Pipeline& pl, const std::vector<int>& which = {},
                                        const std::function<void(const CheckResult&)>& on_result = {});

nlohmann::json to_json(const CheckResult& r);
std::string status_line(const CheckResult& r);

// Pieces of criterion 1, exposed for the unit tests.
struct DeltaIdentityReport {
    double symmetry_error = 0.0; // max |A - A^T|
    double max_eigenvalue = 0.0; // largest eigenvalue of the symmetric part
    double scale = 0.0;          // max |A_ij|
};
DeltaIdentityReport delta_identities(const CouplingKernel& kernel, int nodes, double d, double h);
// max |Delta_h phi - phi''| for phi = exp(-x^2 / (2 sigma^2)) on a periodic grid.
double delta_consistency_error(const CouplingKernel& kernel, int nodes, double d, double h, double sigma);

} // namespace fhn

#pragma once

#include <vector>

namespace fhn {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    int n = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Fit |v| ~ K exp(-beta s) on samples with |v| > floor; returns {beta, K, n}.
struct DecayFit {
    double beta = 0.0;
    double K = 0.0;
    int n = 0;
};
DecayFit fit_decay(const std::vector<double>& s, const std::vector<double>& v, double floor = 1e-12);

} // namespace fhn

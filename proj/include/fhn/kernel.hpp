#pragma once

#include "fhn/errors.hpp"

#include <json.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace fhn {

/// Truncated coupling sequence alpha_1..alpha_K, normalised so sum alpha_k k^2 = 1.
struct CouplingKernel {
    std::string type;            // "gaussian", "quartic" or "custom"
    std::vector<double> coeffs;  // coeffs[k-1] = alpha_k
    std::optional<double> nu;    // exponential decay rate, if the coefficients decay exponentially
    double tail_bound = 0.0;     // sum_{k>K} alpha_k k^2 of the untruncated sequence

    int K() const { return static_cast<int>(coeffs.size()); }
    double alpha(int k) const { return coeffs[k - 1]; }

    // Largest k whose coefficient is not negligible against alpha_1 (for banded assembly).
    int effective_range(double rel = 1e-18) const;
};

CouplingKernel build_gaussian_kernel(int K);
CouplingKernel build_quartic_kernel(int K);
CouplingKernel build_custom_kernel(std::vector<double> coeffs, bool normalize = true);

double dispersion_A(const CouplingKernel& kernel, double z);

struct KernelReport {
    bool sum_k2_normalized = false;
    bool A_positive_on_grid = false;
    bool exponential_decay_holds = false;
    double sum_k2_error = 0.0;
    double min_A_ratio = 0.0;       // min over the grid of A(z) / (1 - cos z)
    double decay_sum = 0.0;         // sum |alpha_k| e^{k nu}, 0 if nu absent
    double tail_bound = 0.0;
    bool all() const { return sum_k2_normalized && A_positive_on_grid && exponential_decay_holds; }
};

KernelReport verify_assumptions(const CouplingKernel& kernel, int grid_points = 4096);

nlohmann::json to_json(const CouplingKernel& kernel);
CouplingKernel kernel_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KernelReport& r);

enum class BoundaryMode { periodic, zero_extended };

/// Samples f(xi_i) on a uniform grid with spacing d.
template <class T>
struct GridField {
    double spacing = 1.0;
    Eigen::Matrix<T, Eigen::Dynamic, 1> values;
    BoundaryMode mode = BoundaryMode::periodic;
};

// Integer m with h = m * d, or a PreconditionError.
int commensurate_ratio(double h, double d);

/// (1/h^2) sum_k alpha_k [f(xi + hk) + f(xi - hk) - 2 f(xi)], shifts as exact index offsets.
template <class T>
GridField<T> apply_delta_h(const CouplingKernel& kernel, const GridField<T>& f, double h)
{
    const int m = commensurate_ratio(h, f.spacing);
    const long n = f.values.size();
    GridField<T> out{f.spacing, Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(n), f.mode};
    const double s = 1.0 / (h * h);
    auto at = [&](long i) -> T {
        if (f.mode == BoundaryMode::periodic) return f.values(((i % n) + n) % n);
        return (i < 0 || i >= n) ? T(0) : f.values(i);
    };
    for (long i = 0; i < n; ++i) {
        T acc(0);
        for (int k = 1; k <= kernel.K(); ++k) {
            long off = static_cast<long>(m) * k;
            acc += kernel.alpha(k) * (at(i + off) + at(i - off) - 2.0 * f.values(i));
        }
        out.values(i) = s * acc;
    }
    return out;
}

} // namespace fhn

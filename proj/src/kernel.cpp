#include "fhn/kernel.hpp"

#include <boost/math/special_functions/trigamma.hpp>

#include <numbers>

namespace fhn {

int CouplingKernel::effective_range(double rel) const
{
    int kmax = 1;
    double a1 = std::abs(coeffs.front());
    for (int k = 1; k <= K(); ++k)
        if (std::abs(alpha(k)) * k * k > rel * a1) kmax = k;
    return kmax;
}

CouplingKernel build_gaussian_kernel(int K)
{
    require(K >= 3, "gaussian kernel needs K >= 3");
    CouplingKernel ker;
    ker.type = "gaussian";
    double s = 0.0;
    for (int k = 1; k <= K; ++k) s += std::exp(-double(k) * k) * k * k;
    const double kappa = 1.0 / s;
    for (int k = 1; k <= K; ++k) ker.coeffs.push_back(kappa * std::exp(-double(k) * k));
    ker.nu = 1.0;
    // terms beyond K + 30 underflow long before they matter
    for (int k = K + 1; k <= K + 30; ++k) ker.tail_bound += kappa * std::exp(-double(k) * k) * k * k;
    return ker;
}

CouplingKernel build_quartic_kernel(int K)
{
    require(K >= 3, "quartic kernel needs K >= 3");
    CouplingKernel ker;
    ker.type = "quartic";
    const double kappa = 6.0 / (std::numbers::pi * std::numbers::pi);
    double s = 0.0;
    for (int k = 1; k <= K; ++k) s += kappa / (double(k) * k);
    for (int k = 1; k <= K; ++k) ker.coeffs.push_back(kappa / (s * std::pow(double(k), 4)));
    // sum_{k>K} k^-2 = trigamma(K+1)
    ker.tail_bound = kappa / s * boost::math::trigamma(double(K) + 1.0);
    return ker;
}

CouplingKernel build_custom_kernel(std::vector<double> coeffs, bool normalize)
{
    require(!coeffs.empty(), "custom kernel needs at least one coefficient");
    CouplingKernel ker;
    ker.type = "custom";
    if (normalize) {
        double s = 0.0;
        for (std::size_t k = 1; k <= coeffs.size(); ++k) s += coeffs[k - 1] * double(k * k);
        require(s > 0.0, "custom kernel has nonpositive second moment");
        for (double& a : coeffs) a /= s;
    }
    ker.coeffs = std::move(coeffs);
    ker.nu = 1.0; // finite support: every nu works
    return ker;
}

double dispersion_A(const CouplingKernel& kernel, double z)
{
    double s = 0.0;
    for (int k = 1; k <= kernel.K(); ++k) s += kernel.alpha(k) * (1.0 - std::cos(k * z));
    return s;
}

KernelReport verify_assumptions(const CouplingKernel& kernel, int grid_points)
{
    KernelReport r;
    double s = 0.0;
    for (int k = 1; k <= kernel.K(); ++k) s += kernel.alpha(k) * double(k) * k;
    r.sum_k2_error = std::abs(s - 1.0);
    r.sum_k2_normalized = r.sum_k2_error < 1e-12;

    // A(z) ~ z^2/2 near 0 and 2 pi, so compare against 1 - cos z to get a scale-free margin
    r.min_A_ratio = std::numeric_limits<double>::infinity();
    for (int i = 1; i < grid_points; ++i) {
        double z = 2.0 * std::numbers::pi * i / grid_points;
        r.min_A_ratio = std::min(r.min_A_ratio, dispersion_A(kernel, z) / (1.0 - std::cos(z)));
    }
    r.A_positive_on_grid = r.min_A_ratio > 0.0;

    if (kernel.nu) {
        for (int k = 1; k <= kernel.K(); ++k) r.decay_sum += std::abs(kernel.alpha(k)) * std::exp(k * *kernel.nu);
        r.exponential_decay_holds = std::isfinite(r.decay_sum);
    }
    r.tail_bound = kernel.tail_bound;
    return r;
}

nlohmann::json to_json(const CouplingKernel& k)
{
    nlohmann::json j;
    j["type"] = k.type;
    j["K"] = k.K();
    j["nu"] = k.nu ? nlohmann::json(*k.nu) : nlohmann::json(nullptr);
    j["coeffs"] = k.coeffs;
    j["tail_bound"] = k.tail_bound;
    return j;
}

CouplingKernel kernel_from_json(const nlohmann::json& j)
{
    CouplingKernel k;
    k.type = j.at("type").get<std::string>();
    k.coeffs = j.at("coeffs").get<std::vector<double>>();
    if (j.contains("nu") && !j["nu"].is_null()) k.nu = j["nu"].get<double>();
    k.tail_bound = j.value("tail_bound", 0.0);
    require(int(k.coeffs.size()) == j.at("K").get<int>(), "kernel JSON: K does not match coeffs");
    return k;
}

nlohmann::json to_json(const KernelReport& r)
{
    return {{"sum_k2_normalized", r.sum_k2_normalized},
            {"A_positive_on_grid", r.A_positive_on_grid},
            {"exponential_decay_holds", r.exponential_decay_holds},
            {"sum_k2_error", r.sum_k2_error},
            {"min_A_ratio", r.min_A_ratio},
            {"decay_sum", r.decay_sum},
            {"tail_bound", r.tail_bound}};
}

int commensurate_ratio(double h, double d)
{
    require(h > 0.0 && d > 0.0, "spacing and h must be positive");
    double m = h / d;
    long mr = std::lround(m);
    require(mr >= 1 && std::abs(m - mr) < 1e-9 * std::max(1.0, m),
            "h = " + std::to_string(h) + " is not an integer multiple of d = " + std::to_string(d));
    return static_cast<int>(mr);
}

} // namespace fhn

#pragma once

#include "fhn/errors.hpp"

#include <json.hpp>

namespace fhn {

struct ModelParams {
    double r0 = 0.1;
    double rho = 0.01;
    double gamma = 4.0;

    // Admissible range: 0 < r0 < 1, 0 < rho < 1, 0 < gamma < 4 (1 - r0)^-2.
    void validate() const;
};

inline double cubic_g(double u, double r0) { return u * (1.0 - u) * (u - r0); }

inline double cubic_g_prime(double u, double r0)
{
    return -3.0 * u * u + 2.0 * (1.0 + r0) * u - r0;
}

nlohmann::json to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

} // namespace fhn

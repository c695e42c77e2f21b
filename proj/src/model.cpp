#include "fhn/model.hpp"

#include <string>

namespace fhn {

void ModelParams::validate() const
{
    require(r0 > 0.0 && r0 < 1.0, "r0 must lie in (0, 1)");
    require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
    const double gmax = 4.0 / ((1.0 - r0) * (1.0 - r0));
    require(gamma > 0.0 && gamma < gmax, "gamma must lie in (0, " + std::to_string(gmax) + ")");
}

nlohmann::json to_json(const ModelParams& p)
{
    return {{"r0", p.r0}, {"rho", p.rho}, {"gamma", p.gamma}};
}

ModelParams params_from_json(const nlohmann::json& j)
{
    ModelParams p;
    p.r0 = j.value("r0", p.r0);
    p.rho = j.value("rho", p.rho);
    p.gamma = j.value("gamma", p.gamma);
    return p;
}

} // namespace fhn

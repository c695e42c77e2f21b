#include "fhn/config.hpp"

#include "fhn/errors.hpp"

#include <cmath>
#include <cstdint>
#include <fmt/format.h>
#include <fstream>
#include <limits>

namespace fhn {

using nlohmann::json;

namespace {

json p_list(const std::vector<double>& ps)
{
    json a = json::array();
    for (double p : ps) a.push_back(std::isinf(p) ? json("inf") : json(p));
    return a;
}

std::vector<double> p_from(const json& a)
{
    require(a.is_array(), "dynamics.p must be an array");
    std::vector<double> ps;
    for (const auto& v : a) {
        if (v.is_string()) {
            require(v.get<std::string>() == "inf", "dynamics.p: only \"inf\" is accepted as a string");
            ps.push_back(std::numeric_limits<double>::infinity());
        } else {
            ps.push_back(v.get<double>());
        }
    }
    return ps;
}

// Every key of `user` must exist in `ref`; objects are checked recursively.
void reject_unknown(const json& user, const json& ref, const std::string& path)
{
    require(user.is_object(), fmt::format("config: '{}' must be an object", path.empty() ? "<root>" : path));
    for (auto it = user.begin(); it != user.end(); ++it) {
        std::string key = path.empty() ? it.key() : path + "." + it.key();
        require(ref.contains(it.key()), fmt::format("config: unknown key '{}'", key));
        const json& r = ref[it.key()];
        if (r.is_object()) reject_unknown(it.value(), r, key);
    }
}

template <class T>
void read(const json& j, const char* key, T& out)
{
    out = j.at(key).get<T>();
}

} // namespace

CouplingKernel RunConfig::kernel() const
{
    if (kernel_type == "gaussian") return build_gaussian_kernel(K);
    if (kernel_type == "quartic") return build_quartic_kernel(K);
    if (kernel_type == "custom") return build_custom_kernel(coeffs);
    throw PreconditionError("config: kernel.type must be gaussian, quartic or custom");
}

void RunConfig::validate() const
{
    model.validate();
    require(kernel_type == "custom" || K >= 3, "config: kernel.K >= 3 required");
    require(kernel_type != "custom" || !coeffs.empty(), "config: custom kernel needs coeffs");
    require(L > 0.0 && d > 0.0, "config: grid.L and grid.d must be positive");
    auto check_h = [&](double h, const std::string& what) {
        require(h > 0.0, fmt::format("config: {} must be positive", what));
        commensurate_ratio(h, d);
        double cells = L / h;
        require(std::abs(cells - std::round(cells)) < 1e-9 * cells,
                fmt::format("config: {} = {} does not divide L = {}", what, h, L));
    };
    require(!continuation.h_list.empty(), "config: continuation.h_list is empty");
    for (double h : continuation.h_list) check_h(h, "continuation.h_list entry");
    check_h(spectrum.h, "spectrum.h");
    check_h(green.h, "green.h");
    check_h(dynamics.h, "dynamics.h");
    require(pde.elements >= 2 && pde.degree >= 2, "config: pde mesh too small");
    require(pde.dt > 0.0 && pde.T >= 0.0, "config: pde.dt > 0, pde.T >= 0 required");
    require(spectrum.degree >= 1 && green.degree >= 1 && dynamics.degree >= 1, "config: degrees must be >= 1");
    require(spectrum.n_re >= 1 && spectrum.n_im >= 1, "config: spectrum probe grid must be nonempty");
    require(green.n_nodes >= 2, "config: green.n_nodes >= 2 required");
    require(!green.t_list.empty() && !green.fit_times.empty(), "config: green time lists must be nonempty");
    for (double t : green.t_list) require(t > 0.0, "config: green.t_list entries must be positive");
    for (std::size_t i = 0; i < green.fit_times.size(); ++i)
        require(green.fit_times[i] > (i ? green.fit_times[i - 1] : 0.0), "config: green.fit_times must increase");
    for (std::size_t i = 1; i < continuation.h_list.size(); ++i)
        require(continuation.h_list[i] < continuation.h_list[i - 1], "config: continuation.h_list must decrease");
    require(green.residue_lambdas.size() == 2 && green.residue_lambdas[0] != green.residue_lambdas[1],
            "config: green.residue_lambdas needs two distinct values");
    require(green.ode_dt > 0.0, "config: green.ode_dt must be positive");
    require(dynamics.T > 0.0 && dynamics.sample > 0.0 && dynamics.dt >= 0.0, "config: dynamics times invalid");
    for (double p : dynamics.p)
        require(p == 1.0 || p == 2.0 || std::isinf(p), "config: dynamics.p entries must be 1, 2 or \"inf\"");
    require(threads >= 1, "config: threads >= 1 required");
}

json RunConfig::to_json() const
{
    json j;
    j["kernel"] = {{"type", kernel_type}, {"K", K}, {"coeffs", coeffs}};
    j["model"] = fhn::to_json(model);
    j["grid"] = {{"L", L}, {"d", d}};
    j["pde"] = {{"elements", pde.elements}, {"degree", pde.degree},   {"seed_center", pde.seed_center},
                {"seed_width", pde.seed_width}, {"refractory", pde.refractory}, {"w_level", pde.w_level},
                {"T", pde.T},                 {"dt", pde.dt},           {"peak", pde.peak},
                {"tol", pde.tol},             {"max_iter", pde.max_iter}};
    j["continuation"] = {{"h_list", continuation.h_list},
                         {"tol", continuation.tol},
                         {"max_iter", continuation.max_iter},
                         {"degree", continuation.degree}};
    j["spectrum"] = {{"h", spectrum.h},
                     {"degree", spectrum.degree},
                     {"n_re", spectrum.n_re},
                     {"n_im", spectrum.n_im},
                     {"eig_tol", spectrum.eig_tol},
                     {"periodic_tol", spectrum.periodic_tol},
                     {"invertible_tol", spectrum.invertible_tol}};
    j["green"] = {{"h", green.h},
                  {"degree", green.degree},
                  {"n_nodes", green.n_nodes},
                  {"chi", green.chi ? json(*green.chi) : json(nullptr)},
                  {"t_list", green.t_list},
                  {"source_offsets", green.source_offsets},
                  {"site_offsets", green.site_offsets},
                  {"ode_dt", green.ode_dt},
                  {"rel_tol", green.rel_tol},
                  {"fit_times", green.fit_times},
                  {"projection_times", green.projection_times},
                  {"residue_lambdas", green.residue_lambdas},
                  {"residue_tol", green.residue_tol}};
    j["dynamics"] = {{"h", dynamics.h},
                     {"degree", dynamics.degree},
                     {"T", dynamics.T},
                     {"dt", dynamics.dt},
                     {"sample", dynamics.sample},
                     {"bump_amplitude", dynamics.bump_amplitude},
                     {"bump_width", dynamics.bump_width},
                     {"p", p_list(dynamics.p)},
                     {"theta_tol", dynamics.theta_tol},
                     {"delta", dynamics.delta},
                     {"band", dynamics.band}};
    j["seeds"] = {{"pde_profile", pde_profile}};
    j["threads"] = threads;
    return j;
}

RunConfig RunConfig::from_json(const json& user)
{
    const json defaults = RunConfig{}.to_json();
    reject_unknown(user, defaults, "");
    json j = defaults;
    j.merge_patch(user);

    RunConfig c;
    try {
        const json& k = j.at("kernel");
        read(k, "type", c.kernel_type);
        read(k, "K", c.K);
        read(k, "coeffs", c.coeffs);
        const json& m = j.at("model");
        read(m, "r0", c.model.r0);
        read(m, "rho", c.model.rho);
        read(m, "gamma", c.model.gamma);
        read(j.at("grid"), "L", c.L);
        read(j.at("grid"), "d", c.d);

        const json& p = j.at("pde");
        read(p, "elements", c.pde.elements);
        read(p, "degree", c.pde.degree);
        read(p, "seed_center", c.pde.seed_center);
        read(p, "seed_width", c.pde.seed_width);
        read(p, "refractory", c.pde.refractory);
        read(p, "w_level", c.pde.w_level);
        read(p, "T", c.pde.T);
        read(p, "dt", c.pde.dt);
        read(p, "peak", c.pde.peak);
        read(p, "tol", c.pde.tol);
        read(p, "max_iter", c.pde.max_iter);

        const json& ct = j.at("continuation");
        read(ct, "h_list", c.continuation.h_list);
        read(ct, "tol", c.continuation.tol);
        read(ct, "max_iter", c.continuation.max_iter);
        read(ct, "degree", c.continuation.degree);

        const json& s = j.at("spectrum");
        read(s, "h", c.spectrum.h);
        read(s, "degree", c.spectrum.degree);
        read(s, "n_re", c.spectrum.n_re);
        read(s, "n_im", c.spectrum.n_im);
        read(s, "eig_tol", c.spectrum.eig_tol);
        read(s, "periodic_tol", c.spectrum.periodic_tol);
        read(s, "invertible_tol", c.spectrum.invertible_tol);

        const json& g = j.at("green");
        read(g, "h", c.green.h);
        read(g, "degree", c.green.degree);
        read(g, "n_nodes", c.green.n_nodes);
        if (g.contains("chi") && !g["chi"].is_null()) c.green.chi = g["chi"].get<double>();
        read(g, "t_list", c.green.t_list);
        read(g, "source_offsets", c.green.source_offsets);
        read(g, "site_offsets", c.green.site_offsets);
        read(g, "ode_dt", c.green.ode_dt);
        read(g, "rel_tol", c.green.rel_tol);
        read(g, "fit_times", c.green.fit_times);
        read(g, "projection_times", c.green.projection_times);
        read(g, "residue_lambdas", c.green.residue_lambdas);
        read(g, "residue_tol", c.green.residue_tol);

        const json& dy = j.at("dynamics");
        read(dy, "h", c.dynamics.h);
        read(dy, "degree", c.dynamics.degree);
        read(dy, "T", c.dynamics.T);
        read(dy, "dt", c.dynamics.dt);
        read(dy, "sample", c.dynamics.sample);
        read(dy, "bump_amplitude", c.dynamics.bump_amplitude);
        read(dy, "bump_width", c.dynamics.bump_width);
        c.dynamics.p = p_from(dy.at("p"));
        read(dy, "theta_tol", c.dynamics.theta_tol);
        read(dy, "delta", c.dynamics.delta);
        read(dy, "band", c.dynamics.band);

        read(j.at("seeds"), "pde_profile", c.pde_profile);
        read(j, "threads", c.threads);
    } catch (const json::exception& e) {
        throw PreconditionError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream in(path);
    require(in.good(), "config: cannot open " + path);
    json user;
    try {
        user = json::parse(in);
    } catch (const json::parse_error& e) {
        throw PreconditionError(fmt::format("config: {}: {}", path, e.what()));
    }
    return from_json(user);
}

std::string RunConfig::hash() const
{
    std::uint64_t hv = 1469598103934665603ULL;
    for (unsigned char ch : to_json().dump()) {
        hv ^= ch;
        hv *= 1099511628211ULL;
    }
    return fmt::format("{:016x}", hv);
}

void apply_override(json& doc, const std::string& assignment)
{
    auto eq = assignment.find('=');
    require(eq != std::string::npos && eq > 0, "override must look like key.path=value: " + assignment);
    std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        auto dot = path.find('.', start);
        std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        require(!key.empty(), "override has an empty key: " + assignment);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

} // namespace fhn

// Batch driver: every pipeline stage as a subcommand, JSON config in, CSV/JSON out.

#include "fhn/acceptance.hpp"
#include "fhn/config.hpp"
#include "fhn/pipeline.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fmt/format.h>
#include <fmt/os.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fhn;

namespace {

const std::map<std::string, std::string> stage_versions{
    {"kernel", "1"}, {"pde", "1"}, {"continuation", "1"}, {"spectrum", "1"},
    {"green", "1"},  {"dynamics", "1"}, {"acceptance", "1"}};

struct Run {
    std::string command;
    fs::path out;
    RunConfig cfg;
    json timings = json::object();

    void write_json(const std::string& name, const json& j) const
    {
        std::ofstream f(out / name);
        f << j.dump(2) << "\n";
    }

    void manifest(const json& extra = json::object()) const
    {
        json m{{"command", command},
               {"config_hash", cfg.hash()},
               {"config", cfg.to_json()},
               {"stage_versions", stage_versions},
               {"timings_seconds", timings}};
        m.update(extra);
        write_json("manifest.json", m);
    }
};

class Stopwatch {
public:
    explicit Stopwatch(json& t, std::string name) : t_(t), name_(std::move(name)) {}
    ~Stopwatch() { t_[name_] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    json& t_;
    std::string name_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void log_line(const std::string& s) { fmt::print(stderr, "{}\n", s); }

std::string num(double v) { return fmt::format("{:.17g}", v); }

int kernel_verify(Run& run)
{
    CouplingKernel k = run.cfg.kernel();
    KernelReport rep;
    {
        Stopwatch sw(run.timings, "kernel");
        rep = verify_assumptions(k);
    }
    json warnings = json::array();
    if (!rep.exponential_decay_holds) warnings.push_back("exponential decay assumption does not hold for this kernel");
    run.write_json("kernel.json", {{"kernel", to_json(k)}, {"report", to_json(rep)}, {"warnings", warnings}});
    run.manifest();
    for (const auto& w : warnings) log_line("warning: " + w.get<std::string>());
    bool ok = rep.sum_k2_normalized && rep.A_positive_on_grid;
    log_line(ok ? "kernel assumptions hold" : "kernel assumption violated");
    return ok ? 0 : 1;
}

int pulse(Run& run)
{
    Pipeline pl(run.cfg, log_line);
    {
        Stopwatch sw(run.timings, "pde");
        pl.pde_pulse();
    }
    const WaveProfile& pde = pl.pde_pulse();
    write_profile_csv(pde, run.cfg.d, (run.out / "pde_profile.csv").string());
    write_profile_nodes(pde, (run.out / "pde_nodes.csv").string());
    const ContinuationRun* cr;
    {
        Stopwatch sw(run.timings, "continuation");
        cr = &pl.continuation();
    }
    auto out = fmt::output_file((run.out / "continuation_summary.csv").string());
    out.print("h,c_h,distance,speed_gap\n");
    json profiles = json::array();
    for (std::size_t i = 0; i < cr->h_values.size(); ++i) {
        const double h = cr->h_values[i];
        out.print("{},{},{},{}\n", num(h), num(cr->profiles[i].c), num(cr->distances[i]), num(cr->speed_gaps[i]));
        std::string name = fmt::format("profile_h{}.csv", h);
        write_profile_csv(cr->profiles[i], run.cfg.d, (run.out / name).string());
        profiles.push_back({{"h", h},
                            {"file", name},
                            {"c_h", cr->profiles[i].c},
                            {"residual", cr->profiles[i].residual_norm},
                            {"iterations", cr->iterations[i]},
                            {"distance", cr->distances[i]},
                            {"speed_gap", cr->speed_gaps[i]}});
    }
    out.close();
    json summary{{"c0", pde.c},
                 {"pde_residual", pde.residual_norm},
                 {"pde_resumed", pl.pde_resumed()},
                 {"complete", cr->complete},
                 {"failure", cr->failure},
                 {"profiles", profiles}};
    run.write_json("continuation.json", summary);
    run.manifest({{"pde_resumed", pl.pde_resumed()}});
    if (!cr->complete) {
        log_line("continuation failed: " + cr->failure);
        return 1;
    }
    return 0;
}

int spectrum(Run& run)
{
    Pipeline pl(run.cfg, log_line);
    const auto& sc = run.cfg.spectrum;
    const SpectralScanReport* rep;
    PeriodicityReport per;
    {
        Stopwatch sw(run.timings, "spectrum");
        rep = &pl.spectral_scan();
        per = check_periodicity(pl.linearization(sc.h, sc.degree).Lh, pl.kernel(), 0.0);
    }
    const auto& lin = pl.linearization(sc.h, sc.degree);
    auto out = fmt::output_file((run.out / "spectrum_scan.csv").string());
    out.print("re,im,sigma_min\n");
    for (std::size_t i = 0; i < rep->lambda_grid.size(); ++i)
        out.print("{},{},{}\n", num(rep->lambda_grid[i].real()), num(rep->lambda_grid[i].imag()), num(rep->sigma_min[i]));
    out.close();
    auto cl = [](const std::vector<cd>& v) {
        json a = json::array();
        for (cd z : v) a.push_back({z.real(), z.imag()});
        return a;
    };
    const WaveProfile& q = pl.lattice_pulse(sc.h, sc.degree);
    run.write_json("spectrum.json", {{"h", sc.h},
                                     {"degree", sc.degree},
                                     {"c_h", q.c},
                                     {"region", rep->region},
                                     {"eigenvalues_located", cl(rep->eigenvalues_located)},
                                     {"arnoldi_eigenvalues", cl(rep->arnoldi_eigenvalues)},
                                     {"essential_edge", rep->essential_edge},
                                     {"empirical_lambda3", rep->empirical_lambda3},
                                     {"lambda_one", lambda_one(q)},
                                     {"lambda_tilde", lambda_tilde(run.cfg.model)},
                                     {"omega", lin.ke.omega},
                                     {"sigma1", lin.ke.sigma1},
                                     {"sigma2", lin.ke.sigma2},
                                     {"periodicity",
                                      {{"sigma_lambda", per.sigma_lambda},
                                       {"sigma_shifted", per.sigma_shifted},
                                       {"relative_gap", per.relative_gap},
                                       {"conjugation_gap", per.conjugation_gap}}}});
    run.manifest();
    return 0;
}

void write_green_csv(const std::vector<TemporalGreen>& recs, const fs::path& path, bool split)
{
    auto out = fmt::output_file(path.string());
    out.print("{}\n", split ? "j0,t,j,l,m,G,E,Gtilde" : "j0,t,j,l,m,G");
    for (const auto& r : recs)
        for (std::size_t s = 0; s < r.sites.size(); ++s)
            for (int l = 0; l < 2; ++l)
                for (int m = 0; m < 2; ++m) {
                    out.print("{},{},{},{},{},{}", r.j0, num(r.t), r.sites[s], l, m, num(r.G[s](l, m)));
                    if (split) out.print(",{},{}", num(r.E[s](l, m)), num(r.Gtilde[s](l, m)));
                    out.print("\n");
                }
}

int green(Run& run)
{
    Pipeline pl(run.cfg, log_line);
    const auto& gc = run.cfg.green;
    CheckResult oracle, deco;
    std::vector<TemporalGreen> contour;
    {
        Stopwatch sw(run.timings, "green_contour");
        oracle = check_green_oracle(pl, &contour);
    }
    {
        Stopwatch sw(run.timings, "green_decomposition");
        deco = check_decomposition(pl);
    }
    const WaveProfile& q = pl.lattice_pulse(gc.h, gc.degree);
    const double chi = gc.chi ? *gc.chi : lambda_one(q) + 1.0;
    write_green_csv(contour, run.out / "green_contour.csv", false);
    write_green_csv(pl.green_records(), run.out / "green_direct.csv", true);
    const auto& lin = pl.linearization(gc.h, gc.degree);
    run.write_json("green.json", {{"omega", lin.ke.omega},
                                  {"beta_tilde", pl.gtilde_fit().beta_tilde},
                                  {"K", pl.gtilde_fit().K},
                                  {"chi", chi},
                                  {"cross_check", oracle.metrics},
                                  {"decomposition", deco.metrics}});
    run.manifest();
    log_line(status_line(oracle));
    log_line(status_line(deco));
    return 0;
}

int evolve_cmd(Run& run)
{
    Pipeline pl(run.cfg, log_line);
    const auto& dc = run.cfg.dynamics;
    const WaveProfile& q = pl.lattice_pulse(dc.h, dc.degree);
    StabilityOptions so;
    so.T = dc.T;
    so.dt = dc.dt;
    so.sample = dc.sample;
    so.theta_tol = dc.theta_tol;
    so.delta = dc.delta;
    auto [jl, jr] = pulse_window(q, dc.T);
    json summary = json::array();
    bool ok = true;
    auto record = [&](const std::string& name, const std::vector<StabilityFit>& fits) {
        for (const auto& f : fits) {
            std::string p = std::isinf(f.p) ? "inf" : fmt::format("{}", f.p);
            std::string file = fmt::format("stability_{}_p{}.csv", name, p);
            write_stability_csv(f, (run.out / file).string());
            summary.push_back({{"perturbation", name},
                               {"p", p},
                               {"delta", so.delta},
                               {"initial_norm", f.initial_norm},
                               {"fitted_beta", f.fitted_beta},
                               {"fitted_C", f.fitted_C},
                               {"theta_infinity", f.theta_infinity},
                               {"theta_converged", f.theta_converged},
                               {"diagnostic", f.diagnostic},
                               {"file", file}});
            if (!f.diagnostic.empty()) log_line(name + " p = " + p + ": " + f.diagnostic);
        }
    };
    {
        Stopwatch sw(run.timings, "dynamics");
        record("translate", stability_experiment(q, pl.kernel(), pl.params(), lattice_translate(q, jl, jr, 1), dc.p, so));
        auto bump = gaussian_bump(LatticeState::zeros(jl, jr), q.h, dc.bump_amplitude, q.peak_position(), dc.bump_width);
        auto bf = stability_experiment(q, pl.kernel(), pl.params(), bump, dc.p, so);
        for (const auto& f : bf) ok = ok && f.fitted_beta > 0.0 && f.theta_converged;
        record("bump", bf);
    }
    run.write_json("evolve.json", {{"h", dc.h}, {"c_h", q.c}, {"window", {jl, jr}}, {"theta_translate_target", -q.h / q.c}, {"experiments", summary}});
    run.manifest();
    return ok ? 0 : 1;
}

int verify_all(Run& run, const std::vector<int>& which)
{
    Pipeline pl(run.cfg, log_line);
    std::vector<CheckResult> res;
    {
        Stopwatch sw(run.timings, "acceptance");
        res = run_acceptance(pl, which, [](const CheckResult& r) { fmt::print("{}\n", status_line(r)); std::fflush(stdout); });
    }
    json checks = json::array();
    bool all = true;
    for (const auto& r : res) {
        json j = to_json(r);
        j.erase("seconds"); // wall-clock stays in the manifest
        checks.push_back(j);
        run.timings[fmt::format("criterion_{}", r.id)] = r.seconds;
        all = all && r.pass;
    }
    run.write_json("verify.json", {{"all_pass", all}, {"checks", checks}});
    run.manifest({{"all_pass", all}});
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Travelling pulses of the infinite-range discrete FitzHugh-Nagumo lattice"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "out";
    int threads = 0;
    std::vector<std::string> overrides;
    std::vector<int> which;
    auto common = [&](CLI::App* sc) {
        sc->add_option("--config", config_path, "JSON config merged over the defaults")->check(CLI::ExistingFile);
        sc->add_option("--out", out_dir, "output directory");
        sc->add_option("--threads", threads, "worker threads for dense/sparse kernels")->check(CLI::PositiveNumber);
        sc->add_option("--set", overrides, "override, e.g. --set dynamics.T=100 (repeatable)");
    };
    std::map<std::string, CLI::App*> subs;
    for (const char* name : {"kernel-verify", "pulse", "spectrum", "green", "evolve", "verify-all"}) {
        subs[name] = app.add_subcommand(name);
        common(subs[name]);
    }
    subs["kernel-verify"]->description("check the coupling-kernel assumptions");
    subs["pulse"]->description("PDE pulse and continuation in h");
    subs["spectrum"]->description("resolvent scan of the linearisation");
    subs["green"]->description("temporal Green's functions, decomposition and projections");
    subs["evolve"]->description("nonlinear stability experiments");
    subs["verify-all"]->description("run the acceptance criteria and write a pass/fail manifest");
    subs["verify-all"]->add_option("--only", which, "criteria to run (1-7)")->check(CLI::Range(1, 7));
    auto* pd = app.add_subcommand("print-defaults", "print the default configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (pd->parsed()) {
            fmt::print("{}\n", RunConfig{}.to_json().dump(2));
            return 0;
        }
        json doc = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            doc = json::parse(in, nullptr, false);
            require(!doc.is_discarded(), "config: " + config_path + " is not valid JSON");
        }
        for (const auto& o : overrides) apply_override(doc, o);
        if (threads > 0) doc["threads"] = threads;
        Run run{app.get_subcommands().front()->get_name(), out_dir, RunConfig::from_json(doc)};
        Eigen::setNbThreads(run.cfg.threads);
        fs::create_directories(run.out);

        const std::string& cmd = run.command;
        if (cmd == "kernel-verify") return kernel_verify(run);
        if (cmd == "pulse") return pulse(run);
        if (cmd == "spectrum") return spectrum(run);
        if (cmd == "green") return green(run);
        if (cmd == "evolve") return evolve_cmd(run);
        if (cmd == "verify-all") return verify_all(run, which);
    } catch (const PreconditionError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const NumericalFailure& e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 2;
}

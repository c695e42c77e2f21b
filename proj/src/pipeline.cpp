#include "fhn/pipeline.hpp"

#include <cmath>
#include <fmt/format.h>

namespace fhn {

Pipeline::Pipeline(RunConfig cfg, Logger log) : cfg_(std::move(cfg)), log_(std::move(log))
{
    cfg_.validate();
    kernel_ = cfg_.kernel();
}

const WaveProfile& Pipeline::pde_pulse()
{
    if (pde_) return *pde_;
    if (!cfg_.pde_profile.empty()) {
        WaveProfile p = read_profile_nodes(cfg_.pde_profile);
        require(p.h == 0.0, "seeds.pde_profile is not a PDE profile");
        require(std::abs(p.L() - cfg_.L) < 1e-12, "seeds.pde_profile: domain does not match grid.L");
        require(std::abs(p.params.r0 - cfg_.model.r0) < 1e-15 && std::abs(p.params.rho - cfg_.model.rho) < 1e-15 &&
                    std::abs(p.params.gamma - cfg_.model.gamma) < 1e-15,
                "seeds.pde_profile: model parameters do not match the config");
        log(fmt::format("pde: resumed from {} (c = {:.10f})", cfg_.pde_profile, p.c));
        pde_resumed_ = true;
        pde_ = std::move(p);
        return *pde_;
    }
    const auto& pc = cfg_.pde;
    ElementMesh mesh(cfg_.L, pc.elements, pc.degree);
    PulseSeed bump = make_standard_bump(cfg_.L, cfg_.d, pc.seed_center, pc.seed_width, pc.refractory, pc.w_level);
    SeedOptions so;
    so.dt = pc.dt;
    so.peak_target = pc.peak;
    seed_ = evolve_pde_seed(cfg_.model, mesh, bump, pc.T, so);
    log("pde: seed evolution: " + seed_->diagnostic);
    if (!seed_->pulse_formed) throw NumericalFailure("pde seed: " + seed_->diagnostic);
    NewtonOptions no;
    no.tol = pc.tol;
    no.max_iter = pc.max_iter;
    int its = 0;
    pde_ = solve_pde_pulse(cfg_.model, seed_->candidate, no, &its);
    log(fmt::format("pde: Newton converged in {} iterations, c0 = {:.10f}, residual {:.2e}", its, pde_->c,
                    pde_->residual_norm));
    return *pde_;
}

const ContinuationRun& Pipeline::continuation()
{
    if (cont_) return *cont_;
    const WaveProfile& pde = pde_pulse();
    ContinuationOptions co;
    co.d = cfg_.d;
    co.tol = cfg_.continuation.tol;
    co.max_iter = cfg_.continuation.max_iter;
    co.degree = cfg_.continuation.degree;
    cont_ = continuation_in_h(kernel_, cfg_.model, pde, cfg_.continuation.h_list, co);
    for (std::size_t i = 0; i < cont_->h_values.size(); ++i)
        log(fmt::format("continuation: h = {} c_h = {:.10f} distance {:.3e} speed gap {:.3e}", cont_->h_values[i],
                        cont_->profiles[i].c, cont_->distances[i], cont_->speed_gaps[i]));
    if (!cont_->complete) log("continuation: failed: " + cont_->failure);
    return *cont_;
}

const WaveProfile& Pipeline::lattice_pulse(double h, int degree)
{
    auto k = key(h, degree);
    auto it = lattice_.find(k);
    if (it != lattice_.end()) return it->second;
    const WaveProfile& pde = pde_pulse();
    LatticeSolveOptions lo;
    lo.degree = degree;
    lo.tol = cfg_.continuation.tol;
    lo.max_iter = cfg_.continuation.max_iter;
    lo.phase_ref = &pde;
    int its = 0;
    WaveProfile q = solve_lattice_pulse(kernel_, cfg_.model, h, pde, lo, &its);
    log(fmt::format("lattice pulse h = {} degree {}: c_h = {:.10f}, {} iterations", h, degree, q.c, its));
    return lattice_.emplace(k, std::move(q)).first->second;
}

const Pipeline::Linearization& Pipeline::linearization(double h, int degree)
{
    auto k = key(h, degree);
    auto it = lin_.find(k);
    if (it != lin_.end()) return *it->second;
    const WaveProfile& q = lattice_pulse(h, degree);
    auto lin = std::make_unique<Linearization>();
    lin->Lh = assemble_Lh(q, kernel_, cfg_.model);
    OperatorMatrix La = lin->Lh.adjoint();
    Eigen::VectorXd dm = derivative_mode(q);
    lin->ke = kernel_elements(lin->Lh, La, cfg_.spectrum.eig_tol, &dm);
    lin->kf = make_kernel_fields(lin->Lh, lin->ke);
    log(fmt::format("kernel elements h = {} degree {}: Omega = {:.6e}, sigma1 = {:.2e}, sigma2 = {:.2e}", h, degree,
                    lin->ke.omega, lin->ke.sigma1, lin->ke.sigma2));
    return *lin_.emplace(k, std::move(lin)).first->second;
}

std::vector<cd> spectrum_probe_grid(const RunConfig& cfg, const WaveProfile& q)
{
    std::vector<cd> grid{cd(0.0)};
    auto strip = strip_grid(-lambda_tilde(cfg.model), lambda_one(q), cfg.spectrum.n_re, cfg.spectrum.n_im, q.h, q.c);
    grid.insert(grid.end(), strip.begin(), strip.end());
    return grid;
}

const SpectralScanReport& Pipeline::spectral_scan()
{
    if (scan_) return *scan_;
    const auto& sc = cfg_.spectrum;
    const auto& lin = linearization(sc.h, sc.degree);
    ScanOptions so;
    so.eig_tol = sc.eig_tol;
    scan_ = scan_strip(lin.Lh, kernel_, spectrum_probe_grid(cfg_, lattice_pulse(sc.h, sc.degree)), "full_strip", so);
    log(fmt::format("spectral scan: {} probes, {} eigenvalues located, essential edge {:.6f}, lambda3 {:.6f}",
                    scan_->lambda_grid.size(), scan_->eigenvalues_located.size(), scan_->essential_edge,
                    scan_->empirical_lambda3));
    return *scan_;
}

std::vector<long> Pipeline::green_sources()
{
    const WaveProfile& q = lattice_pulse(cfg_.green.h, cfg_.green.degree);
    const long J = std::lround(cfg_.L / q.h);
    std::vector<long> s;
    for (long o : cfg_.green.source_offsets) {
        long j = peak_site(q) + o;
        require(j >= -J && j < J, fmt::format("green.source_offsets: site {} outside the lattice ring", j));
        s.push_back(j);
    }
    return s;
}

const std::vector<TemporalGreen>& Pipeline::green_records()
{
    if (records_) return *records_;
    const auto& gc = cfg_.green;
    const WaveProfile& q = lattice_pulse(gc.h, gc.degree);
    const auto& lin = linearization(gc.h, gc.degree);
    OdeOptions oo;
    oo.dt = gc.ode_dt;
    std::vector<TemporalGreen> recs;
    const long J = std::lround(2.0 * q.L() / q.h), off = std::lround(q.L() / q.h);
    for (long j0 : green_sources()) {
        // one propagation per source; the fit times are checkpoints along it
        Eigen::MatrixXd V = Eigen::MatrixXd::Zero(2 * J, 2);
        V(2 * (j0 + off), 0) = V(2 * (j0 + off) + 1, 1) = 1.0;
        double t_prev = 0.0;
        for (double t : gc.fit_times) {
            V = propagate_lattice(q, kernel_, cfg_.model, V, t_prev, t, oo);
            t_prev = t;
            TemporalGreen r;
            r.j0 = j0;
            r.t = t;
            for (long s = 0; s < J; ++s) {
                r.sites.push_back(s - off);
                r.G.push_back(V.middleRows(2 * s, 2));
            }
            decompose_temporal(r, lin.kf, q.h, q.c);
            recs.push_back(std::move(r));
        }
    }
    records_ = std::move(recs);
    return *records_;
}

const DecompositionReport& Pipeline::gtilde_fit()
{
    if (gfit_) return *gfit_;
    const WaveProfile& q = lattice_pulse(cfg_.green.h, cfg_.green.degree);
    gfit_ = fit_gtilde(green_records(), q.h, q.c);
    log(fmt::format("Gtilde fit: beta~ = {:.6f}, K = {:.4f}, {} samples", gfit_->beta_tilde, gfit_->K,
                    gfit_->samples));
    return *gfit_;
}

long peak_site(const WaveProfile& p) { return std::lround(p.peak_position() / p.h); }

} // namespace fhn

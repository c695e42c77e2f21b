#include "fhn/dynamics.hpp"

#include "fhn/errors.hpp"
#include "fhn/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/os.h>

namespace fhn {

namespace {

struct Stencil {
    std::vector<double> a;
    double diag = 0.0;
};

Stencil make_stencil(const CouplingKernel& kernel, double h)
{
    Stencil s;
    for (int k = 1; k <= kernel.effective_range(); ++k) {
        s.a.push_back(kernel.alpha(k) / (h * h));
        s.diag -= 2.0 * s.a.back();
    }
    return s;
}

Eigen::VectorXd apply_delta(const Stencil& st, const Eigen::VectorXd& u, BoundaryMode mode)
{
    const long n = u.size();
    Eigen::VectorXd out = st.diag * u;
    for (std::size_t k = 1; k <= st.a.size(); ++k) {
        const long kk = static_cast<long>(k);
        const double ak = st.a[k - 1];
        if (mode == BoundaryMode::periodic) {
            for (long i = 0; i < n; ++i) out(i) += ak * (u((i + kk) % n) + u(((i - kk) % n + n) % n));
        } else if (kk < n) {
            out.head(n - kk) += ak * u.tail(n - kk);
            out.tail(n - kk) += ak * u.head(n - kk);
        }
    }
    return out;
}

} // namespace

LatticeState LatticeState::zeros(long j_min, long j_max, BoundaryMode mode)
{
    LatticeState s;
    s.j_min = j_min;
    s.j_max = j_max;
    s.u = Eigen::VectorXd::Zero(s.size());
    s.w = Eigen::VectorXd::Zero(s.size());
    s.mode = mode;
    return s;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> rhs(const LatticeState& s, const CouplingKernel& kernel,
                                                const ModelParams& params, double h)
{
    Stencil st = make_stencil(kernel, h);
    Eigen::VectorXd du = apply_delta(st, s.u, s.mode) + s.u.unaryExpr([&](double v) { return cubic_g(v, params.r0); }) - s.w;
    Eigen::VectorXd dw = params.rho * (s.u - params.gamma * s.w);
    return {du, dw};
}

double max_stable_dt(const CouplingKernel& kernel, double h, double stability_factor)
{
    double sum = 0.0;
    for (int k = 1; k <= kernel.effective_range(); ++k) sum += std::abs(kernel.alpha(k));
    return stability_factor * h * h / (4.0 * sum);
}

std::vector<LatticeState> evolve(const LatticeState& s0, const CouplingKernel& kernel, const ModelParams& params,
                                 double h, double T, const EvolveOptions& opt)
{
    require(T >= 0.0 && opt.stride > 0.0, "evolve: T >= 0 and stride > 0 required");
    const double dmax = max_stable_dt(kernel, h, opt.stability_factor);
    double dt = opt.dt > 0.0 ? opt.dt : std::min(0.02, dmax);
    require(dt <= dmax * (1.0 + 1e-12), fmt::format("evolve: dt = {} exceeds the stability cap {}", dt, dmax));
    const long samples = std::lround(T / opt.stride);
    const long sub = std::max<long>(1, std::lround(std::ceil(opt.stride / dt - 1e-9)));
    dt = opt.stride / sub;

    const Stencil st = make_stencil(kernel, h);
    auto f = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& w, Eigen::VectorXd& du, Eigen::VectorXd& dw) {
        du = apply_delta(st, u, s0.mode) + u.unaryExpr([&](double v) { return cubic_g(v, params.r0); }) - w;
        dw = params.rho * (u - params.gamma * w);
    };
    std::vector<LatticeState> traj{s0};
    LatticeState s = s0;
    Eigen::VectorXd k1u, k1w, k2u, k2w, k3u, k3w, k4u, k4w;
    const long edge = std::min<long>(10, s.size());
    for (long i = 1; i <= samples; ++i) {
        for (long k = 0; k < sub; ++k) {
            f(s.u, s.w, k1u, k1w);
            f(s.u + 0.5 * dt * k1u, s.w + 0.5 * dt * k1w, k2u, k2w);
            f(s.u + 0.5 * dt * k2u, s.w + 0.5 * dt * k2w, k3u, k3w);
            f(s.u + dt * k3u, s.w + dt * k3w, k4u, k4w);
            s.u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            s.w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        }
        s.time = s0.time + i * opt.stride;
        const double big = std::max(s.u.cwiseAbs().maxCoeff(), s.w.cwiseAbs().maxCoeff());
        if (!std::isfinite(big) || big > opt.blowup)
            throw NumericalFailure(fmt::format("evolve: divergence at t = {}", s.time));
        if (s.mode == BoundaryMode::zero_extended) {
            double b = 0.0;
            for (const auto* v : {&s.u, &s.w})
                b = std::max({b, v->head(edge).cwiseAbs().maxCoeff(), v->tail(edge).cwiseAbs().maxCoeff()});
            if (b > opt.spill) throw NumericalFailure(fmt::format("evolve: pulse reached the window edge at t = {}", s.time));
        }
        traj.push_back(s);
    }
    return traj;
}

double lp_norm(const Eigen::VectorXd& du, const Eigen::VectorXd& dw, double p)
{
    require(p == 1.0 || p == 2.0 || std::isinf(p), "lp_norm: p must be 1, 2 or infinity");
    Eigen::ArrayXd m = du.cwiseAbs().array().max(dw.cwiseAbs().array());
    if (std::isinf(p)) return m.size() ? m.maxCoeff() : 0.0;
    if (p == 1.0) return m.sum();
    return std::sqrt(m.square().sum());
}

LatticeState pulse_state(const WaveProfile& profile, long j_min, long j_max, double t, double theta)
{
    LatticeState s = LatticeState::zeros(j_min, j_max);
    s.time = t;
    const double L = profile.L();
    for (long i = 0; i < s.size(); ++i) {
        const double xi = profile.h * (j_min + i) + profile.c * (t + theta);
        if (xi < -L || xi >= L) continue;
        auto [u, w] = profile.eval(xi);
        s.u(i) = u;
        s.w(i) = w;
    }
    return s;
}

std::pair<long, long> pulse_window(const WaveProfile& profile, double T)
{
    const double h = profile.h, L = profile.L(), drift = profile.c * T;
    const long lo = static_cast<long>(std::floor((-L - std::max(drift, 0.0)) / h));
    const long hi = static_cast<long>(std::ceil((L - std::min(drift, 0.0)) / h)) - 1;
    return {lo, hi};
}

Perturbation gaussian_bump(const LatticeState& window, double h, double amplitude, double center, double width)
{
    Perturbation p{Eigen::VectorXd::Zero(window.size()), Eigen::VectorXd::Zero(window.size())};
    for (long i = 0; i < window.size(); ++i) {
        const double x = (h * (window.j_min + i) - center) / width;
        p.du(i) = amplitude * std::exp(-x * x);
    }
    return p;
}

Perturbation lattice_translate(const WaveProfile& profile, long j_min, long j_max, long shift)
{
    LatticeState base = pulse_state(profile, j_min, j_max, 0.0);
    LatticeState moved = pulse_state(profile, j_min - shift, j_max - shift, 0.0);
    return {moved.u - base.u, moved.w - base.w};
}

double best_phase(const WaveProfile& profile, const LatticeState& U, double p, double lo, double hi, double tol)
{
    auto obj = [&](double th) {
        LatticeState P = pulse_state(profile, U.j_min, U.j_max, U.time, th);
        return lp_norm(U.u - P.u, U.w - P.w, p);
    };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = obj(x1), f2 = obj(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = obj(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = obj(x2);
        }
    }
    return 0.5 * (a + b);
}

std::vector<StabilityFit> stability_experiment(const WaveProfile& profile, const CouplingKernel& kernel,
                                               const ModelParams& params, const Perturbation& pert,
                                               const std::vector<double>& ps, const StabilityOptions& opt)
{
    require(profile.h > 0.0, "stability_experiment: lattice profile required");
    auto [jl, jr] = pulse_window(profile, opt.T);
    LatticeState U0 = pulse_state(profile, jl, jr, 0.0);
    require(pert.du.size() == U0.size() && pert.dw.size() == U0.size(), "perturbation does not match the window");
    U0.u += pert.du;
    U0.w += pert.dw;
    for (double p : ps)
        require(lp_norm(pert.du, pert.dw, p) <= opt.delta,
                fmt::format("perturbation exceeds delta = {} in the l^{} norm", opt.delta, p));

    EvolveOptions eo = opt.evolve;
    eo.dt = opt.dt;
    eo.stride = opt.sample;
    auto traj = evolve(U0, kernel, params, profile.h, opt.T, eo);

    const double h = profile.h, c = std::abs(profile.c);
    std::vector<StabilityFit> fits;
    for (double p : ps) {
        StabilityFit f;
        f.p = p;
        f.initial_norm = lp_norm(pert.du, pert.dw, p);
        // coarse scan for the initial phase, then track it
        double th = 0.0, best = std::numeric_limits<double>::infinity();
        const double span = 4.0 * h / c, step = 0.05 * h / c;
        for (double s = -span; s <= span; s += step) {
            LatticeState P = pulse_state(profile, jl, jr, 0.0, s);
            double r = lp_norm(traj[0].u - P.u, traj[0].w - P.w, p);
            if (r < best) {
                best = r;
                th = s;
            }
        }
        double window = step;
        for (const auto& U : traj) {
            double lo = th - window, hi = th + window;
            th = best_phase(profile, U, p, lo, hi);
            while (th - lo < 1e-6 || hi - th < 1e-6) { // minimiser at the bracket edge: widen
                lo = th - 2.0 * window;
                hi = th + 2.0 * window;
                th = best_phase(profile, U, p, lo, hi);
                window *= 2.0;
                if (window > span) break;
            }
            window = 0.25 * h / c;
            LatticeState P = pulse_state(profile, jl, jr, U.time, th);
            f.residual_series.emplace_back(U.time, lp_norm(U.u - P.u, U.w - P.w, p));
            f.theta_series.emplace_back(U.time, th);
        }
        std::vector<double> ts, rs;
        for (auto [t, r] : f.residual_series)
            if (t >= 0.5 * opt.T) {
                ts.push_back(t);
                rs.push_back(r);
            }
        DecayFit d = fit_decay(ts, rs, 1e-14);
        f.fitted_beta = d.beta;
        f.fitted_C = f.initial_norm > 0.0 ? d.K / f.initial_norm : 0.0;
        f.theta_infinity = f.theta_series.back().second;
        double th_half = f.theta_series.front().second;
        for (auto [t, v] : f.theta_series)
            if (t <= 0.5 * opt.T) th_half = v;
        f.theta_converged = std::abs(f.theta_infinity - th_half) < opt.theta_tol;
        if (!f.theta_converged)
            f.diagnostic = fmt::format("no asymptotic phase: |theta(T) - theta(T/2)| = {:.3e}",
                                       std::abs(f.theta_infinity - th_half));
        fits.push_back(std::move(f));
    }
    return fits;
}

void write_stability_csv(const StabilityFit& f, const std::string& path)
{
    auto out = fmt::output_file(path);
    out.print("# p,{}\n# fitted_beta,{:.17g}\n# fitted_C,{:.17g}\n# theta_infinity,{:.17g}\nt,r,theta\n",
              std::isinf(f.p) ? std::string("inf") : fmt::format("{}", f.p), f.fitted_beta, f.fitted_C,
              f.theta_infinity);
    for (std::size_t i = 0; i < f.residual_series.size(); ++i)
        out.print("{:.17g},{:.17g},{:.17g}\n", f.residual_series[i].first, f.residual_series[i].second,
                  f.theta_series[i].second);
}

} // namespace fhn

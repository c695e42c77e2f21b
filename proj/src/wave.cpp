#include "fhn/wave.hpp"

#include <cmath>

namespace fhn {

namespace {

bool same_lattice_mesh(const WaveProfile& p, double h, int degree)
{
    return p.h > 0.0 && std::abs(p.h - h) < 1e-12 && (degree == 0 || degree == p.mesh.p());
}

WaveProfile on_lattice(const WaveProfile& p, const LatticeSystem& sys)
{
    WaveProfile out = p.resampled(sys.mesh);
    out.h = sys.h;
    return out;
}

} // namespace

MfdeResidual mfde_residual(const WaveProfile& profile, const CouplingKernel& kernel, const ModelParams& params,
                           double h, int degree)
{
    int deg = same_lattice_mesh(profile, h, degree) ? profile.mesh.p() : (degree ? degree : default_degree(h));
    LatticeSystem sys(kernel, profile.L(), h, deg);
    WaveProfile p = same_lattice_mesh(profile, h, degree) ? profile : on_lattice(profile, sys);
    SpMat D = sys.derivative(p.c >= 0.0), Dl = sys.delta();
    MfdeResidual r;
    r.mesh = sys.mesh;
    Eigen::VectorXd gu = p.u.unaryExpr([&](double v) { return cubic_g(v, params.r0); });
    r.ru = p.c * (D * p.u) - Dl * p.u - gu + p.w;
    r.rw = p.c * (D * p.w) - params.rho * (p.u - params.gamma * p.w);
    r.sup_norm = std::max(r.ru.cwiseAbs().maxCoeff(), r.rw.cwiseAbs().maxCoeff());
    return r;
}

WaveProfile solve_lattice_pulse(const CouplingKernel& kernel, const ModelParams& params, double h,
                                const WaveProfile& seed, const LatticeSolveOptions& opt, int* iterations)
{
    params.validate();
    int deg = opt.degree ? opt.degree : (same_lattice_mesh(seed, h, 0) ? seed.mesh.p() : default_degree(h));
    LatticeSystem sys(kernel, seed.L(), h, deg);
    const int n = sys.n();
    const WaveProfile& ref = opt.phase_ref ? *opt.phase_ref : seed;
    WaveProfile s = on_lattice(seed, sys);
    Eigen::VectorXd x = sys.mesh.nodes(), W = sys.weights();
    Eigen::VectorXd ru(n), rw(n), dru(n), drw(n);
    for (int i = 0; i < n; ++i) {
        std::tie(ru(i), rw(i)) = ref.eval(x(i));
        std::tie(dru(i), drw(i)) = ref.eval_derivative(x(i));
    }
    if (dru.cwiseAbs().maxCoeff() < 1e-12) throw NumericalFailure("converged to trivial branch: flat phase reference");
    const bool left = s.c >= 0.0;
    SpMat D = sys.derivative(left), Dl = sys.delta();
    Eigen::VectorXd u = s.u, w = s.w;
    double c = s.c;
    const double rho = params.rho, gam = params.gamma;

    auto residual = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& w, double c, Eigen::VectorXd& F) {
        F.resize(2 * n + 1);
        Eigen::VectorXd gu = u.unaryExpr([&](double v) { return cubic_g(v, params.r0); });
        F.head(n) = c * (D * u) - Dl * u - gu + w;
        F.segment(n, n) = c * (D * w) - rho * (u - gam * w);
        F(2 * n) = (W.array() * (dru.array() * (u - ru).array() + drw.array() * (w - rw).array())).sum();
        return F.head(2 * n).cwiseAbs().maxCoeff();
    };

    // constant part of the Jacobian
    std::vector<Eigen::Triplet<double>> base;
    auto add = [&](std::vector<Eigen::Triplet<double>>& t, const SpMat& B, int r0, int c0, double sc) {
        for (int k = 0; k < B.outerSize(); ++k)
            for (SpMat::InnerIterator i(B, k); i; ++i) t.emplace_back(r0 + i.row(), c0 + i.col(), sc * i.value());
    };
    add(base, Dl, 0, 0, -1.0);
    for (int i = 0; i < n; ++i) {
        base.emplace_back(i, n + i, 1.0);
        base.emplace_back(n + i, i, -rho);
        base.emplace_back(n + i, n + i, rho * gam);
        base.emplace_back(2 * n, i, W(i) * dru(i));
        base.emplace_back(2 * n, n + i, W(i) * drw(i));
    }

    Eigen::VectorXd F;
    double res = residual(u, w, c, F);
    int it = 0;
    for (; it < opt.max_iter && res >= opt.tol; ++it) {
        if ((c >= 0.0) != left) throw NumericalFailure("solve_lattice_pulse: wave speed changed sign");
        auto t = base;
        add(t, D, 0, 0, c);
        add(t, D, n, n, c);
        Eigen::VectorXd Du = D * u, Dw = D * w;
        for (int i = 0; i < n; ++i) {
            t.emplace_back(i, i, -cubic_g_prime(u(i), params.r0));
            t.emplace_back(i, 2 * n, Du(i));
            t.emplace_back(n + i, 2 * n, Dw(i));
        }
        SpMat Jm(2 * n + 1, 2 * n + 1);
        Jm.setFromTriplets(t.begin(), t.end());
        RealFactor lu(Jm);
        if (!lu.ok()) throw NumericalFailure("solve_lattice_pulse: singular bordered Jacobian");
        Eigen::VectorXd dx = lu.solve(F);
        double step = 1.0;
        Eigen::VectorXd Fn;
        for (int ls = 0; ls < 12; ++ls, step *= 0.5) {
            double rn = residual(u - step * dx.head(n), w - step * dx.segment(n, n), c - step * dx(2 * n), Fn);
            if (rn < res || res < 1e-8) break;
        }
        u -= step * dx.head(n);
        w -= step * dx.segment(n, n);
        c -= step * dx(2 * n);
        res = residual(u, w, c, F);
    }
    if (iterations) *iterations = it;
    if (!(res < opt.tol))
        throw NumericalFailure("solve_lattice_pulse: no convergence at h = " + std::to_string(h) + " after " +
                               std::to_string(it) + " iterations, residual " + std::to_string(res));
    if (u.cwiseAbs().maxCoeff() < 1e-6) throw NumericalFailure("converged to trivial branch");
    WaveProfile out = s;
    out.u = u;
    out.w = w;
    out.c = c;
    out.residual_norm = res;
    out.h = h;
    out.params = params;
    return out;
}

ContinuationRun continuation_in_h(const CouplingKernel& kernel, const ModelParams& params, const WaveProfile& pde,
                                  const std::vector<double>& h_list, const ContinuationOptions& opt)
{
    for (std::size_t i = 1; i < h_list.size(); ++i) require(h_list[i] < h_list[i - 1], "h_list must be decreasing");
    for (double h : h_list) commensurate_ratio(h, opt.d);
    ContinuationRun run;
    run.profiles.reserve(h_list.size());
    const WaveProfile* seed = &pde;
    for (double h : h_list) {
        LatticeSolveOptions lo;
        lo.degree = opt.degree;
        lo.tol = opt.tol;
        lo.max_iter = opt.max_iter;
        lo.phase_ref = &pde;
        int its = 0;
        try {
            run.profiles.push_back(solve_lattice_pulse(kernel, params, h, *seed, lo, &its));
        } catch (const NumericalFailure& e) {
            run.failure = e.what();
            return run;
        }
        run.h_values.push_back(h);
        run.iterations.push_back(its);
        run.distances.push_back(h1_distance(run.profiles.back(), pde, opt.d));
        run.speed_gaps.push_back(std::abs(run.profiles.back().c - pde.c));
        seed = &run.profiles.back();
    }
    run.complete = true;
    return run;
}

Eigen::VectorXd derivative_mode(const WaveProfile& p)
{
    Eigen::VectorXd v(2 * p.mesh.size());
    Eigen::VectorXd x = p.mesh.nodes();
    for (long i = 0; i < x.size(); ++i) std::tie(v(i), v(x.size() + i)) = p.eval_derivative(x(i));
    Eigen::VectorXd W = p.mesh.weights();
    double nrm = std::sqrt((v.head(x.size()).array().square() * W.array()).sum() +
                           (v.tail(x.size()).array().square() * W.array()).sum());
    return v / nrm;
}

} // namespace fhn

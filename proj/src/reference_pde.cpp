#include "fhn/reference_pde.hpp"

#include "fhn/fit.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>

namespace fhn {

CGSystem::CGSystem(const ElementMesh& m) : mesh(m), n(m.E * m.p())
{
    const auto& r = mesh.rule;
    const int np = mesh.npe();
    const double J = mesh.J();
    M = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> tc, tk;
    for (int e = 0; e < mesh.E; ++e)
        for (int i = 0; i < np; ++i) {
            M(global(e, i)) += J * r.w(i);
            for (int j = 0; j < np; ++j) {
                tc.emplace_back(global(e, i), global(e, j), r.w(i) * r.D(i, j));
                double k = 0.0;
                for (int q = 0; q < np; ++q) k += r.w(q) * r.D(q, i) * r.D(q, j);
                tk.emplace_back(global(e, i), global(e, j), k / J);
            }
        }
    SpMat C(n, n), K(n, n);
    C.setFromTriplets(tc.begin(), tc.end());
    K.setFromTriplets(tk.begin(), tk.end());
    SpMat Minv = diag_matrix(M.cwiseInverse());
    D1 = Minv * C;
    D2 = -(Minv * K);
    D1.prune(0.0);
    D2.prune(0.0);
}

Eigen::VectorXd CGSystem::to_nodes(const Eigen::VectorXd& g) const
{
    Eigen::VectorXd v(mesh.size());
    for (int e = 0; e < mesh.E; ++e)
        for (int i = 0; i < mesh.npe(); ++i) v(mesh.index(e, i)) = g(global(e, i));
    return v;
}

Eigen::VectorXd CGSystem::to_global(const Eigen::VectorXd& v) const
{
    Eigen::VectorXd g(n);
    for (int e = 0; e < mesh.E; ++e)
        for (int i = 0; i < mesh.p(); ++i) g(global(e, i)) = v(mesh.index(e, i));
    return g;
}

Eigen::VectorXd CGSystem::coords() const { return to_global(mesh.nodes()); }

PulseSeed make_standard_bump(double L, double d, double center, double width, double refractory, double w_level)
{
    long n = std::lround(2.0 * L / d);
    PulseSeed s{{d, Eigen::VectorXd::Zero(n), BoundaryMode::periodic}, {d, Eigen::VectorXd::Zero(n), BoundaryMode::periodic}};
    for (long i = 0; i < n; ++i) {
        double x = -L + i * d;
        if (std::abs(x - center) <= 0.5 * width) s.u.values(i) = 1.0;
        if (x > center + 0.5 * width && x <= center + 0.5 * width + refractory) s.w.values(i) = w_level;
    }
    return s;
}

namespace {

// Periodic linear interpolation of a uniform-grid field starting at -L.
double grid_value(const GridField<double>& f, double L, double x)
{
    const long n = f.values.size();
    double t = (x + L) / f.spacing;
    double ft = std::floor(t);
    long i = static_cast<long>(ft);
    double a = t - ft;
    auto at = [&](long k) { return f.values(((k % n) + n) % n); };
    return (1.0 - a) * at(i) + a * at(i + 1);
}

WaveProfile make_profile(const CGSystem& cg, const ModelParams& params, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& w, double c)
{
    WaveProfile p;
    p.mesh = cg.mesh;
    p.u = cg.to_nodes(u);
    p.w = cg.to_nodes(w);
    p.c = c;
    p.h = 0.0;
    p.params = params;
    return p;
}

} // namespace

SeedResult evolve_pde_seed(const ModelParams& params, const ElementMesh& mesh, const PulseSeed& bump, double T,
                           const SeedOptions& opt)
{
    params.validate();
    require(T >= 0.0, "evolve_pde_seed: T must be nonnegative");
    CGSystem cg(mesh);
    const double L = mesh.L;
    Eigen::VectorXd x = cg.coords();
    Eigen::VectorXd u(cg.n), w(cg.n);
    for (int i = 0; i < cg.n; ++i) {
        u(i) = grid_value(bump.u, L, x(i));
        w(i) = grid_value(bump.w, L, x(i));
    }
    SeedResult res;
    if (T == 0.0) {
        res.candidate = make_profile(cg, params, u, w, 0.0);
        res.diagnostic = "T = 0: bump returned unchanged";
        return res;
    }

    // semi-implicit Euler: diffusion implicit, reaction explicit
    const double dt = opt.dt;
    SpMat I(cg.n, cg.n);
    I.setIdentity();
    SpMat A = I - dt * cg.D2;
    Eigen::SparseLU<SpMat> lu(A);
    const long steps = std::lround(T / dt);
    std::vector<double> ts, xs;
    double prev_peak = 0.0, unwrap = 0.0;
    for (long s = 1; s <= steps; ++s) {
        Eigen::VectorXd gu = u.unaryExpr([&](double v) { return cubic_g(v, params.r0); });
        Eigen::VectorXd rhs = u + dt * (gu - w);
        u = lu.solve(rhs);
        w = (w + dt * params.rho * u) / (1.0 + dt * params.rho * params.gamma);
        double t = s * dt;
        if (t >= 0.5 * T && s % std::max(1L, std::lround(1.0 / dt)) == 0 && u.maxCoeff() > 0.5) {
            Eigen::Index k;
            u.maxCoeff(&k);
            double pk = x(k);
            if (!xs.empty()) {
                double jump = pk - prev_peak;
                if (jump > L) unwrap -= 2 * L;
                if (jump < -L) unwrap += 2 * L;
            }
            prev_peak = pk;
            ts.push_back(t);
            xs.push_back(pk + unwrap);
        }
    }
    WaveProfile cand = make_profile(cg, params, u, w, 0.0);
    if (u.maxCoeff() < params.r0 || ts.size() < 6) {
        res.candidate = cand;
        res.diagnostic = "no pulse formed: max u = " + std::to_string(u.maxCoeff());
        return res;
    }
    auto half = ts.size() / 2;
    auto f1 = linear_fit({ts.begin(), ts.begin() + half}, {xs.begin(), xs.begin() + half});
    auto f2 = linear_fit({ts.begin() + half, ts.end()}, {xs.begin() + half, xs.end()});
    auto fa = linear_fit(ts, xs);
    double speed = -fa.slope;
    cand.c = speed;
    if (std::abs(f1.slope - f2.slope) > 0.05 * std::abs(fa.slope) || std::abs(speed) < 1e-3) {
        res.candidate = cand;
        res.diagnostic = "no coherent pulse: speed estimates " + std::to_string(-f1.slope) + " vs " +
                         std::to_string(-f2.slope);
        return res;
    }
    double pk = cand.peak_position();
    res.candidate = cand.shifted(pk - opt.peak_target);
    res.candidate.c = speed;
    res.speed = speed;
    res.pulse_formed = true;
    res.diagnostic = "pulse formed";
    return res;
}

WaveProfile solve_pde_pulse(const ModelParams& params, const WaveProfile& seed, const NewtonOptions& opt,
                            int* iterations)
{
    params.validate();
    require(seed.h == 0.0, "solve_pde_pulse needs a continuum (h = 0) seed");
    CGSystem cg(seed.mesh);
    const int n = cg.n;
    Eigen::VectorXd su = cg.to_global(seed.u), sw = cg.to_global(seed.w);
    if (su.cwiseAbs().maxCoeff() < 1e-12 && sw.cwiseAbs().maxCoeff() < 1e-12)
        throw NumericalFailure("converged to trivial branch: seed is the rest state");
    Eigen::VectorXd dsu = cg.D1 * su, dsw = cg.D1 * sw;
    Eigen::VectorXd u = su, w = sw;
    double c = seed.c;
    const double rho = params.rho, gam = params.gamma;

    auto residual = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& w, double c, Eigen::VectorXd& F) {
        F.resize(2 * n + 1);
        Eigen::VectorXd gu = u.unaryExpr([&](double v) { return cubic_g(v, params.r0); });
        F.head(n) = c * (cg.D1 * u) - cg.D2 * u - gu + w;
        F.segment(n, n) = c * (cg.D1 * w) - rho * (u - gam * w);
        F(2 * n) = (cg.M.array() * (dsu.array() * (u - su).array() + dsw.array() * (w - sw).array())).sum();
        return F.head(2 * n).cwiseAbs().maxCoeff();
    };

    Eigen::VectorXd F;
    double res = residual(u, w, c, F);
    int it = 0;
    for (; it < opt.max_iter && res >= opt.tol; ++it) {
        std::vector<Eigen::Triplet<double>> t;
        auto add = [&](const SpMat& B, int r0, int c0, double s) {
            for (int k = 0; k < B.outerSize(); ++k)
                for (SpMat::InnerIterator i(B, k); i; ++i) t.emplace_back(r0 + i.row(), c0 + i.col(), s * i.value());
        };
        add(cg.D1, 0, 0, c);
        add(cg.D2, 0, 0, -1.0);
        add(cg.D1, n, n, c);
        Eigen::VectorXd D1u = cg.D1 * u, D1w = cg.D1 * w;
        for (int i = 0; i < n; ++i) {
            t.emplace_back(i, i, -cubic_g_prime(u(i), params.r0));
            t.emplace_back(i, n + i, 1.0);
            t.emplace_back(n + i, i, -rho);
            t.emplace_back(n + i, n + i, rho * gam);
            t.emplace_back(i, 2 * n, D1u(i));
            t.emplace_back(n + i, 2 * n, D1w(i));
            t.emplace_back(2 * n, i, cg.M(i) * dsu(i));
            t.emplace_back(2 * n, n + i, cg.M(i) * dsw(i));
        }
        SpMat Jm(2 * n + 1, 2 * n + 1);
        Jm.setFromTriplets(t.begin(), t.end());
        RealFactor lu(Jm);
        if (!lu.ok()) throw NumericalFailure("solve_pde_pulse: singular bordered Jacobian");
        Eigen::VectorXd dx = lu.solve(F);
        double step = 1.0;
        Eigen::VectorXd Fn;
        double rn = 0.0;
        for (int ls = 0; ls < 12; ++ls, step *= 0.5) {
            rn = residual(u - step * dx.head(n), w - step * dx.segment(n, n), c - step * dx(2 * n), Fn);
            if (rn < res || res < 1e-8) break;
        }
        u -= step * dx.head(n);
        w -= step * dx.segment(n, n);
        c -= step * dx(2 * n);
        res = residual(u, w, c, F);
    }
    if (iterations) *iterations = it;
    if (!(res < opt.tol))
        throw NumericalFailure("solve_pde_pulse: Newton did not converge after " + std::to_string(it) +
                               " iterations, residual " + std::to_string(res));
    if (u.cwiseAbs().maxCoeff() < 1e-6) throw NumericalFailure("converged to trivial branch");
    if (std::abs(c) < 1e-6) throw NumericalFailure("wave speed c ~ 0: the pulse must move");
    WaveProfile out = make_profile(cg, params, u, w, c);
    out.residual_norm = res;
    return out;
}

OperatorMatrix assemble_L0(const WaveProfile& profile, bool plus)
{
    require(profile.h == 0.0, "assemble_L0 needs the PDE profile");
    CGSystem cg(profile.mesh);
    const int n = cg.n;
    const auto& prm = profile.params;
    Eigen::VectorXd u = cg.to_global(profile.u);
    std::vector<Eigen::Triplet<double>> t;
    auto add = [&](const SpMat& B, int r0, int c0, double s) {
        for (int k = 0; k < B.outerSize(); ++k)
            for (SpMat::InnerIterator i(B, k); i; ++i) t.emplace_back(r0 + i.row(), c0 + i.col(), s * i.value());
    };
    const double c = profile.c;
    // L0+ = [[c D - D2 - g_u, 1], [-rho, c D + gamma rho]]; L0- = [[-c D - D2 - g_u, -rho], [1, -c D + gamma rho]]
    const double sc = plus ? c : -c;
    add(cg.D1, 0, 0, sc);
    add(cg.D2, 0, 0, -1.0);
    add(cg.D1, n, n, sc);
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, -cubic_g_prime(u(i), prm.r0));
        t.emplace_back(i, n + i, plus ? 1.0 : -prm.rho);
        t.emplace_back(n + i, i, plus ? -prm.rho : 1.0);
        t.emplace_back(n + i, n + i, prm.gamma * prm.rho);
    }
    OperatorMatrix op;
    op.which = plus ? Which::L_0 : Which::L_0_adjoint;
    op.A.resize(2 * n, 2 * n);
    op.A.setFromTriplets(t.begin(), t.end());
    op.A.makeCompressed();
    op.weights.resize(2 * n);
    op.weights << cg.M, cg.M;
    op.mesh = profile.mesh;
    op.continuous = true;
    op.c = c;
    op.params = prm;
    return op;
}

PdeKernelReport check_pde_kernel(const WaveProfile& profile, double tol_zero, int nev)
{
    PdeKernelReport r;
    OperatorMatrix Lp = assemble_L0(profile, true);
    OperatorMatrix Lm = assemble_L0(profile, false);
    // eigenvalues lambda with L0 + lambda singular, i.e. eigenvalues of -L0
    SpMatC negA = (-Lp.A).cast<cd>();
    r.eigenvalues = eigs_near(negA, cd(0.01, 0.0), nev, std::max(3 * nev, 60));
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end(),
              [](cd a, cd b) { return std::abs(a) < std::abs(b); });
    r.lambda_min_abs = std::abs(r.eigenvalues.front());
    r.zero_eigenvalue_present = r.lambda_min_abs < tol_zero;
    r.zero_simple = r.zero_eigenvalue_present && (r.eigenvalues.size() < 2 || std::abs(r.eigenvalues[1]) >= tol_zero);
    double maxre = -std::numeric_limits<double>::infinity();
    for (std::size_t i = r.zero_eigenvalue_present ? 1 : 0; i < r.eigenvalues.size(); ++i)
        maxre = std::max(maxre, r.eigenvalues[i].real());
    r.lambda_star = -maxre;

    auto sp = smallest_singular(Lp.A.cast<cd>(), Lp.weights, 2);
    auto sm = smallest_singular(Lm.A.cast<cd>(), Lm.weights, 1);
    r.sigma1 = sp.sigma[0];
    r.sigma2 = sp.sigma[1];
    // fix phases: Phi+ aligned with the profile derivative, Phi- with Phi+
    CGSystem cg(profile.mesh);
    Eigen::VectorXd d(2 * cg.n);
    d << cg.D1 * cg.to_global(profile.u), cg.D1 * cg.to_global(profile.w);
    Eigen::VectorXcd pp = sp.right.col(0), pm = sm.right.col(0);
    cd a = Lp.inner(pp, d.cast<cd>());
    pp *= a / std::abs(a);
    cd b = Lp.inner(pm, pp);
    pm *= b / std::abs(b);
    r.phi_plus = pp.real();
    r.phi_minus = pm.real();
    r.phi_plus /= std::sqrt(Lp.inner(r.phi_plus, r.phi_plus));
    r.phi_minus /= std::sqrt(Lp.inner(r.phi_minus, r.phi_minus));
    r.omega0 = Lp.inner(r.phi_minus, r.phi_plus);
    return r;
}

TailRates tail_decay_rates(const WaveProfile& p, double a, double b)
{
    double pk = p.peak_position();
    std::vector<double> s, u1, w1, u2, w2;
    for (double r = a; r <= b; r += 0.25) {
        s.push_back(r);
        auto [ua, wa] = p.eval(pk - r);
        auto [ub, wb] = p.eval(pk + r);
        u1.push_back(ua);
        w1.push_back(wa);
        u2.push_back(ub);
        w2.push_back(wb);
    }
    return {fit_decay(s, u1).beta, fit_decay(s, w1).beta, fit_decay(s, u2).beta, fit_decay(s, w2).beta};
}

} // namespace fhn

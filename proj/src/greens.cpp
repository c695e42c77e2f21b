#include "fhn/greens.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <fmt/format.h>

namespace fhn {

namespace {

constexpr double pi = std::numbers::pi;

Eigen::Matrix2cd symbol_matrix(const std::vector<double>& alpha, const ModelParams& prm, double h, double c,
                               cd lambda, double eta)
{
    double A = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) A += alpha[k] * (1.0 - std::cos((k + 1.0) * h * eta));
    Eigen::Matrix2cd P;
    P << cd(2.0 * A / (h * h) + prm.r0) + lambda + cd(0.0, c * eta), 1.0, -prm.rho,
        prm.gamma * prm.rho + lambda + cd(0.0, c * eta);
    return P;
}

std::vector<double> kernel_alphas(const CouplingKernel& kernel)
{
    std::vector<double> a;
    for (int k = 1; k <= kernel.effective_range(); ++k) a.push_back(kernel.alpha(k));
    return a;
}

// sum_m e^{i m 2pi xi/h} / (mu + i c (2pi/h) m) for xi mod h = r in [0, h)
cd alias_sum(cd mu, double r, double h, double c)
{
    if (mu.real() >= 0.0) return (h / c) * std::exp(-mu * r / c) / (1.0 - std::exp(-mu * h / c));
    return (h / c) * std::exp(mu * (h - r) / c) / (std::exp(mu * h / c) - 1.0);
}

cd alias_sum_derivative(cd mu, double r, double h, double c)
{
    const double d = 1e-6 * std::max(1.0, std::abs(mu));
    return (alias_sum(mu + d, r, h, c) - alias_sum(mu - d, r, h, c)) / (2.0 * d);
}

// f(Q) for a 2x2 matrix by Lagrange-Sylvester interpolation on its eigenvalues.
template <class F, class DF>
Eigen::Matrix2cd matrix_function(const Eigen::Matrix2cd& Q, F f, DF df)
{
    const cd tr = Q.trace(), det = Q.determinant();
    const cd disc = std::sqrt(tr * tr / 4.0 - det);
    const cd m1 = tr / 2.0 + disc, m2 = tr / 2.0 - disc;
    const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    if (std::abs(m1 - m2) > 1e-5 * (1.0 + std::abs(m1))) return (f(m1) * (Q - m2 * I) - f(m2) * (Q - m1 * I)) / (m1 - m2);
    const cd m = tr / 2.0;
    return f(m) * I + df(m) * (Q - m * I);
}

Eigen::Matrix2cd infty_alias(const std::vector<double>& alpha, const ModelParams& prm, double h, double c,
                             cd lambda, double xi, int nodes)
{
    const double period = 2.0 * pi / h;
    double r = xi - h * std::floor(xi / h);
    if (r >= h) r = 0.0;
    if (nodes <= 0) nodes = 512 + 8 * static_cast<int>(std::ceil(std::abs(xi) / h));
    Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
    for (int q = 0; q < nodes; ++q) {
        const double eta = period * q / nodes;
        Eigen::Matrix2cd Q = symbol_matrix(alpha, prm, h, c, lambda, eta);
        auto f = [&](cd mu) { return alias_sum(mu, r, h, c); };
        auto df = [&](cd mu) { return alias_sum_derivative(mu, r, h, c); };
        acc += std::exp(cd(0.0, eta * xi)) * matrix_function(Q, f, df);
    }
    return acc * (period / nodes) / (2.0 * pi);
}

Eigen::Matrix2cd infty_window(const std::vector<double>& alpha, const ModelParams& prm, double h, double c,
                              cd lambda, double xi, double window)
{
    const double a = 1.0; // split point, Re a > 0
    const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    // B(eta) = -P(eta)/c with P the symbol minus c i eta
    auto Bhat = [&](double eta) {
        return Eigen::Matrix2cd(-(symbol_matrix(alpha, prm, h, c, lambda, eta) - cd(0.0, c * eta) * I) / c);
    };
    auto Rhat = [&](double eta) {
        const cd z(0.0, eta);
        Eigen::Matrix2cd B = Bhat(eta);
        Eigen::Matrix2cd inv = (z * I - B).inverse();
        return Eigen::Matrix2cd(inv - I / (z - a) - (B - a * I) / ((z - a) * (z - a)));
    };
    // remainder: composite Gauss-Legendre on |eta| <= window / h
    const double Lam = window / h;
    Eigen::VectorXd gx, gw;
    gauss_legendre(16, gx, gw);
    const double width = std::min(0.5, 0.5 / std::max(1.0, std::abs(xi)));
    const int panels = static_cast<int>(std::ceil(2.0 * Lam / width));
    const double pw = 2.0 * Lam / panels;
    Eigen::Matrix2cd R = Eigen::Matrix2cd::Zero();
    for (int p = 0; p < panels; ++p) {
        const double mid = -Lam + (p + 0.5) * pw;
        for (int q = 0; q < gx.size(); ++q) {
            const double eta = mid + 0.5 * pw * gx(q);
            R += 0.5 * pw * gw(q) * std::exp(cd(0.0, eta * xi)) * Rhat(eta);
        }
    }
    R /= 2.0 * pi;

    // closed forms: 1/(z - a) <-> -e^{a xi} H(-xi), 1/(z - a)^2 <-> -xi e^{a xi} H(-xi)
    auto m1 = [&](double x) { return x < 0.0 ? -x * std::exp(a * x) : 0.0; };
    Eigen::Matrix2cd M = (xi < 0.0 ? -std::exp(a * xi) : 0.0) * I;
    // (B - a) applied to m1; B carries -(1/c)(-Delta_h + r0 + lambda) in the (1,1) slot
    double dm = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        const double s = (k + 1.0) * h;
        dm += alpha[k] * (m1(xi + s) + m1(xi - s) - 2.0 * m1(xi));
    }
    dm /= h * h;
    const double v = m1(xi);
    Eigen::Matrix2cd Bm;
    Bm << (dm - (prm.r0 + lambda) * v) / c - a * v, -v / c, prm.rho * v / c, -(prm.gamma * prm.rho + lambda) * v / c - a * v;
    M += Bm;
    return (M + R) / c;
}

void interpolation_weights(const ElementMesh& m, double xi, int& e, Eigen::VectorXd& lw)
{
    auto [el, s] = m.locate(xi);
    e = el;
    lw.setZero(m.npe());
    const auto& r = m.rule;
    for (int j = 0; j <= r.p; ++j)
        if (s == r.x(j)) {
            lw(j) = 1.0;
            return;
        }
    double den = 0.0;
    for (int j = 0; j <= r.p; ++j) {
        lw(j) = r.bary(j) / (s - r.x(j));
        den += lw(j);
    }
    lw /= den;
}

} // namespace

void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w)
{
    require(n >= 1, "gauss_legendre: n >= 1");
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) T(k, k - 1) = T(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    x = es.eigenvalues();
    w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
}

Eigen::Matrix2cd greens_infty(const CouplingKernel& kernel, const ModelParams& params, double h, double c, cd lambda,
                              double xi, InftyMethod method, int nodes, double window)
{
    require(c > 0.0, "greens_infty: c > 0 expected");
    const double margin = hyperbolicity_margin(kernel, params, h, c, lambda, default_y_grid(h, c, lambda, 2001));
    require(margin > 1e-10, "greens_infty: lambda outside the hyperbolic region");
    auto alpha = kernel_alphas(kernel);
    if (method == InftyMethod::alias_sum) return infty_alias(alpha, params, h, c, lambda, xi, nodes);
    return infty_window(alpha, params, h, c, lambda, xi, window);
}

Eigen::Matrix2cd ResolventGreen::at(double xi) const
{
    const long n = mesh.size();
    Eigen::Matrix2cd G;
    for (int l = 0; l < 2; ++l)
        for (int m = 0; m < 2; ++m) {
            Eigen::VectorXcd v = cols.col(m).segment(l * n, n);
            G(l, m) = mesh.eval(v, xi);
        }
    return G;
}

Eigen::MatrixXcd dirac_source(const OperatorMatrix& op, const std::vector<long>& j0s)
{
    const auto& m = op.mesh;
    const long n = op.nodes();
    const long off = std::lround(m.L / op.h);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(2 * n, 2 * static_cast<long>(j0s.size()));
    for (std::size_t s = 0; s < j0s.size(); ++s) {
        const int e = m.wrap(static_cast<int>(j0s[s] + off));
        // the jump 1/c at h j0 enters through the upwind penalty on the inflow node
        const int idx = op.c >= 0.0 ? m.index(e, 0) : m.index(m.wrap(e - 1), m.p());
        const double wt = op.c >= 0.0 ? m.rule.w(0) : m.rule.w(m.p());
        for (int comp = 0; comp < 2; ++comp) B(comp * n + idx, 2 * s + comp) = 1.0 / (m.J() * wt);
    }
    return B;
}

namespace {

std::vector<ResolventGreen> split_columns(const OperatorMatrix& op, cd lambda, const std::vector<long>& j0s,
                                          const Eigen::MatrixXcd& X)
{
    std::vector<ResolventGreen> out;
    for (std::size_t s = 0; s < j0s.size(); ++s) {
        ResolventGreen g;
        g.lambda = lambda;
        g.j0 = j0s[s];
        g.xi0 = op.h * j0s[s];
        g.mesh = op.mesh;
        g.cols = X.middleCols(2 * s, 2);
        out.push_back(std::move(g));
    }
    return out;
}

Eigen::MatrixXcd solve_shifted(const SpMat& A, cd lambda, const Eigen::MatrixXcd& B)
{
    ComplexFactor lu(shifted(A, lambda));
    if (!lu.ok()) throw NumericalFailure("resolvent: singular factorisation");
    return lu.solve(B);
}

} // namespace

std::vector<ResolventGreen> resolvent_direct(const OperatorMatrix& Lh, cd lambda, const std::vector<long>& j0s)
{
    return split_columns(Lh, lambda, j0s, solve_shifted(Lh.A, lambda, dirac_source(Lh, j0s)));
}

ResolventGreen greens_infty_discrete(const OperatorMatrix& Lh, const CouplingKernel& kernel, cd lambda, long j0)
{
    OperatorMatrix Li = assemble_Lh_infty(Lh.mesh, Lh.h, Lh.c, kernel, Lh.params);
    return split_columns(Li, lambda, {j0}, solve_shifted(Li.A, lambda, dirac_source(Li, {j0}))).front();
}

ResolventGreen greens_resolvent(const OperatorMatrix& Lh, const CouplingKernel& kernel, cd lambda, long j0,
                                double eig_tol)
{
    const double s = sigma_min_at(Lh, lambda);
    if (s < eig_tol)
        throw PreconditionError(fmt::format("lambda too close to spectrum: lambda = {}{:+}i, sigma_min = {:.3e}",
                                            lambda.real(), lambda.imag(), s));
    OperatorMatrix Li = assemble_Lh_infty(Lh.mesh, Lh.h, Lh.c, kernel, Lh.params);
    Eigen::MatrixXcd Ginf = solve_shifted(Li.A, lambda, dirac_source(Li, {j0}));
    SpMat diff = Lh.A - Li.A; // only the (1,1) block diagonal -g_u(u) + r0 survives
    Eigen::MatrixXcd rhs = diff.cast<cd>() * Ginf;
    Eigen::MatrixXcd corr = solve_shifted(Lh.A, lambda, rhs);
    Eigen::MatrixXcd G = Ginf - corr;
    return split_columns(Lh, lambda, {j0}, G).front();
}

const Eigen::Matrix2d& TemporalGreen::at(long j) const
{
    auto it = std::lower_bound(sites.begin(), sites.end(), j);
    require(it != sites.end() && *it == j, "TemporalGreen: site outside the record");
    return G[it - sites.begin()];
}

Eigen::MatrixXd propagate_lattice(const WaveProfile& profile, const CouplingKernel& kernel,
                                  const ModelParams& params, const Eigen::MatrixXd& V0, double t0, double t,
                                  const OdeOptions& opt)
{
    require(t >= t0, "propagate: t >= t0 required");
    require(profile.h > 0.0, "propagate: lattice profile required");
    const double h = profile.h, c = profile.c;
    const long J = std::lround(2.0 * profile.L() / h), off = std::lround(profile.L() / h);
    require(V0.rows() == 2 * J, "propagate: V0 needs two rows per lattice site");
    const int keff = std::min<int>(kernel.effective_range(), J - 1);
    std::vector<double> a(keff);
    double diag = 0.0;
    for (int k = 1; k <= keff; ++k) {
        a[k - 1] = kernel.alpha(k) / (h * h);
        diag -= 2.0 * a[k - 1];
    }
    const long nc = V0.cols();
    auto gu_at = [&](double time) {
        Eigen::VectorXd g(J);
        for (long s = 0; s < J; ++s) g(s) = cubic_g_prime(profile.mesh.eval(profile.u, h * (s - off) + c * time), params.r0);
        return g;
    };
    auto rhs = [&](const Eigen::MatrixXd& V, const Eigen::VectorXd& gu) {
        Eigen::MatrixXd F(2 * J, nc);
        for (long s = 0; s < J; ++s) {
            Eigen::RowVectorXd lap = diag * V.row(2 * s);
            for (int k = 1; k <= keff; ++k) {
                long sp = (s + k) % J, sm = ((s - k) % J + J) % J;
                lap += a[k - 1] * (V.row(2 * sp) + V.row(2 * sm));
            }
            F.row(2 * s) = lap + gu(s) * V.row(2 * s) - V.row(2 * s + 1);
            F.row(2 * s + 1) = params.rho * (V.row(2 * s) - params.gamma * V.row(2 * s + 1));
        }
        return F;
    };
    Eigen::MatrixXd V = V0;
    if (t == t0) return V;
    const long steps = std::max<long>(1, std::lround(std::ceil((t - t0) / opt.dt - 1e-9)));
    const double dt = (t - t0) / steps;
    Eigen::VectorXd g0 = gu_at(t0);
    for (long i = 0; i < steps; ++i) {
        const double ti = t0 + i * dt;
        Eigen::VectorXd gm = gu_at(ti + 0.5 * dt), g1 = gu_at(ti + dt);
        Eigen::MatrixXd k1 = rhs(V, g0);
        Eigen::MatrixXd k2 = rhs(V + 0.5 * dt * k1, gm);
        Eigen::MatrixXd k3 = rhs(V + 0.5 * dt * k2, gm);
        Eigen::MatrixXd k4 = rhs(V + dt * k3, g1);
        V += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        g0 = g1;
    }
    return V;
}

TemporalGreen temporal_green_direct(const CouplingKernel& kernel, const ModelParams& params,
                                    const WaveProfile& profile, long j0, double t0, double t, const OdeOptions& opt)
{
    const long J = std::lround(2.0 * profile.L() / profile.h), off = std::lround(profile.L() / profile.h);
    const long s0 = ((j0 + off) % J + J) % J;
    Eigen::MatrixXd V0 = Eigen::MatrixXd::Zero(2 * J, 2);
    V0(2 * s0, 0) = V0(2 * s0 + 1, 1) = 1.0;
    Eigen::MatrixXd V = propagate_lattice(profile, kernel, params, V0, t0, t, opt);
    TemporalGreen rec;
    rec.j0 = j0;
    rec.t0 = t0;
    rec.t = t;
    for (long s = 0; s < J; ++s) {
        rec.sites.push_back(s - off);
        rec.G.push_back(V.middleRows(2 * s, 2));
    }
    return rec;
}

std::vector<TemporalGreen> temporal_green_contour(const CouplingKernel& kernel, const ModelParams& params,
                                                  const WaveProfile& profile, const std::vector<long>& j0s,
                                                  double t0, const std::vector<double>& ts, double chi,
                                                  const ContourOptions& opt, double im_shift)
{
    for (double t : ts) require(t >= t0, "contour: t >= t0 required");
    const double h = profile.h, c = profile.c;
    // G(t, t0) for the pulse equals G(t - t0, 0) for the pulse translated by c t0
    WaveProfile prof = t0 == 0.0 ? profile : profile.shifted(c * t0);
    OperatorMatrix Lh = assemble_Lh(prof, kernel, params);
    const auto& m = Lh.mesh;
    const long n = Lh.nodes();
    const long J = std::lround(2.0 * m.L / h), off = std::lround(m.L / h);
    const double half = pi * c / h;

    Eigen::VectorXd y, wq;
    if (opt.trapezoid) {
        y.resize(opt.n_nodes);
        wq = Eigen::VectorXd::Constant(opt.n_nodes, 2.0 * half / opt.n_nodes);
        for (int q = 0; q < opt.n_nodes; ++q) y(q) = -half + 2.0 * half * q / opt.n_nodes;
    } else {
        gauss_legendre(opt.n_nodes, y, wq);
        y *= half;
        wq *= half;
    }

    // interpolation data for every (t, site)
    const std::size_t nt = ts.size();
    std::vector<int> cell(nt * J);
    std::vector<Eigen::VectorXd> lw(nt * J);
    for (std::size_t it = 0; it < nt; ++it)
        for (long s = 0; s < J; ++s)
            interpolation_weights(m, h * (s - off) + c * (ts[it] - t0), cell[it * J + s], lw[it * J + s]);

    const long ns = static_cast<long>(j0s.size());
    std::vector<Eigen::MatrixXcd> acc(nt * ns, Eigen::MatrixXcd::Zero(2 * J, 2));
    Eigen::MatrixXcd B = dirac_source(Lh, j0s);
    const Eigen::VectorXd sw = Lh.weights.cwiseSqrt();

    for (int q = 0; q < y.size(); ++q) {
        const cd lambda(chi, y(q) + im_shift);
        ComplexFactor lu(shifted(Lh.A, lambda));
        if (!lu.ok())
            throw PreconditionError(fmt::format("contour node lambda = {}{:+}i is singular", lambda.real(), lambda.imag()));
        // node guard: a few inverse power steps estimate the distance to the nearest eigenvalue
        Eigen::VectorXcd x = Eigen::VectorXcd::Ones(2 * n);
        double est = 0.0;
        for (int k = 0; k < 4; ++k) {
            x /= (sw.asDiagonal() * x).norm();
            Eigen::VectorXcd nx = lu.solve(x);
            est = 1.0 / (sw.asDiagonal() * nx).norm();
            x = nx;
        }
        if (est < opt.sigma_floor)
            throw PreconditionError(fmt::format("contour node lambda = {}{:+}i too close to the spectrum (sigma ~ {:.3e})",
                                                lambda.real(), lambda.imag(), est));
        Eigen::MatrixXcd X = lu.solve(B);
        for (std::size_t it = 0; it < nt; ++it) {
            const cd fac = wq(q) * h / (2.0 * pi) * std::exp(lambda * (ts[it] - t0));
            for (long sidx = 0; sidx < ns; ++sidx) {
                Eigen::MatrixXcd& out = acc[it * ns + sidx];
                for (long s = 0; s < J; ++s) {
                    const int e = cell[it * J + s];
                    const Eigen::VectorXd& w = lw[it * J + s];
                    for (int l = 0; l < 2; ++l)
                        for (int mm = 0; mm < 2; ++mm) {
                            cd v(0.0);
                            const long base = l * n + m.index(e, 0);
                            for (int i = 0; i < m.npe(); ++i) v += w(i) * X(base + i, 2 * sidx + mm);
                            out(2 * s + l, mm) += fac * v;
                        }
                }
            }
        }
    }

    std::vector<TemporalGreen> recs;
    for (long sidx = 0; sidx < ns; ++sidx)
        for (std::size_t it = 0; it < nt; ++it) {
            TemporalGreen rec;
            rec.j0 = j0s[sidx];
            rec.t0 = t0;
            rec.t = ts[it];
            const auto& A = acc[it * ns + sidx];
            rec.max_imag = A.imag().cwiseAbs().maxCoeff();
            for (long s = 0; s < J; ++s) {
                rec.sites.push_back(s - off);
                rec.G.push_back(A.middleRows(2 * s, 2).real());
            }
            recs.push_back(std::move(rec));
        }
    return recs;
}

Eigen::Vector2d KernelFields::plus(double xi) const
{
    const long n = mesh.size();
    return {mesh.eval(phi_plus.head(n), xi), mesh.eval(phi_plus.tail(n), xi)};
}

Eigen::Vector2d KernelFields::minus(double xi) const
{
    const long n = mesh.size();
    return {mesh.eval(phi_minus.head(n), xi), mesh.eval(phi_minus.tail(n), xi)};
}

KernelFields make_kernel_fields(const OperatorMatrix& Lh, const KernelElements& ke)
{
    return KernelFields{Lh.mesh, ke.phi_plus, ke.phi_minus, ke.omega};
}

void decompose_temporal(TemporalGreen& rec, const KernelFields& kf, double h, double c)
{
    require(kf.omega > 0.0, "decompose: Omega must be positive");
    const Eigen::Vector2d pm = kf.minus(h * rec.j0 + c * rec.t0);
    rec.E.clear();
    rec.Gtilde.clear();
    for (std::size_t i = 0; i < rec.sites.size(); ++i) {
        Eigen::Matrix2d E = (h / kf.omega) * kf.plus(h * rec.sites[i] + c * rec.t) * pm.transpose();
        rec.E.push_back(E);
        rec.Gtilde.push_back(rec.G[i] - E);
    }
}

DecompositionReport fit_gtilde(const std::vector<TemporalGreen>& recs, double h, double c, double floor)
{
    DecompositionReport rep;
    std::map<long, double> env; // unit bins of s = (t - t0) + |xi - xi0|
    std::vector<double> s_all, v_all;
    for (const auto& r : recs) {
        require(r.Gtilde.size() == r.G.size(), "fit_gtilde: decompose first");
        const double period = h * static_cast<double>(r.sites.size());
        for (std::size_t i = 0; i < r.sites.size(); ++i) {
            double d = h * (r.sites[i] - r.j0) + c * (r.t - r.t0);
            d = std::abs(d - period * std::round(d / period));
            const double s = (r.t - r.t0) + d;
            const double v = r.Gtilde[i].cwiseAbs().maxCoeff();
            Eigen::JacobiSVD<Eigen::Matrix2d> svd(r.E[i]);
            rep.rank1_residual = std::max(rep.rank1_residual, svd.singularValues()(1));
            if (v <= floor) continue;
            s_all.push_back(s);
            v_all.push_back(v);
            auto& b = env[static_cast<long>(std::floor(s))];
            b = std::max(b, v);
        }
    }
    std::vector<double> bs, bv;
    for (auto [k, v] : env) {
        bs.push_back(k + 0.5);
        bv.push_back(v);
    }
    DecayFit f = fit_decay(bs, bv, floor);
    rep.beta_tilde = f.beta;
    rep.K = f.K;
    rep.samples = static_cast<int>(s_all.size());
    for (std::size_t i = 0; i < s_all.size(); ++i)
        rep.envelope_K = std::max(rep.envelope_K, v_all[i] * std::exp(rep.beta_tilde * s_all[i]));
    return rep;
}

ProjectionReport projections(const KernelFields& kf, double h, double c, double t, double tail)
{
    ProjectionReport rep;
    const double L = kf.mesh.L;
    const long J = std::lround(2.0 * L / h), off = std::lround(L / h);
    std::vector<Eigen::Vector2d> P(J), M(J);
    double sum_phi = 0.0, sum_psi = 0.0;
    std::vector<long> win;
    for (long s = 0; s < J; ++s) {
        const double xi = h * (s - off) + c * t;
        P[s] = kf.plus(xi);
        M[s] = kf.minus(xi);
        sum_phi += h * M[s](0) * P[s](0);
        sum_psi += h * M[s](1) * P[s](1);
        if (std::max(P[s].cwiseAbs().maxCoeff(), M[s].cwiseAbs().maxCoeff()) > tail) win.push_back(s);
    }
    const long n = kf.mesh.size();
    const Eigen::VectorXd W = kf.mesh.weights();
    const double int_phi = (W.array() * kf.phi_minus.head(n).array() * kf.phi_plus.head(n).array()).sum();
    const double int_psi = (W.array() * kf.phi_minus.tail(n).array() * kf.phi_plus.tail(n).array()).sum();
    rep.sum_identity_phi = std::abs(sum_phi - int_phi);
    rep.sum_identity_psi = std::abs(sum_psi - int_psi);
    rep.sum_identity_combined = std::abs(sum_phi + sum_psi - kf.omega);

    // Pi^c(t)_j^{j0} = E_j^{j0}(t, t) as a dense block matrix on the window
    const long nw = static_cast<long>(win.size());
    rep.window_sites = static_cast<int>(nw);
    Eigen::MatrixXd Pc(2 * nw, 2 * nw);
    for (long a = 0; a < nw; ++a)
        for (long b = 0; b < nw; ++b)
            Pc.block<2, 2>(2 * a, 2 * b) = (h / kf.omega) * P[win[a]] * M[win[b]].transpose();
    Eigen::MatrixXd PP = Pc * Pc;
    rep.idempotency_error = (PP - Pc).cwiseAbs().maxCoeff();
    Eigen::MatrixXd Ps = Eigen::MatrixXd::Identity(2 * nw, 2 * nw) - Pc;
    rep.complement_error = (Ps * Pc).cwiseAbs().maxCoeff();
    return rep;
}

ResidueReport residue_check(const OperatorMatrix& Lh, const KernelFields& kf,
                            const std::vector<std::pair<double, long>>& points, const std::vector<double>& lambdas)
{
    require(lambdas.size() == 2, "residue_check: two lambda values expected");
    std::vector<long> j0s;
    for (auto& pt : points)
        if (std::find(j0s.begin(), j0s.end(), pt.second) == j0s.end()) j0s.push_back(pt.second);
    std::vector<std::vector<ResolventGreen>> G;
    for (double l : lambdas) G.push_back(resolvent_direct(Lh, cd(l, 0.0), j0s));
    ResidueReport rep;
    const double l1 = lambdas[0], l2 = lambdas[1];
    for (auto& [xi, j0] : points) {
        const std::size_t s = std::find(j0s.begin(), j0s.end(), j0) - j0s.begin();
        Eigen::Matrix2d f1 = (l1 * G[0][s].at(xi)).real(), f2 = (l2 * G[1][s].at(xi)).real();
        Eigen::Matrix2d R = (l1 * f2 - l2 * f1) / (l1 - l2);
        Eigen::Matrix2d target = kf.plus(xi) * kf.minus(Lh.h * j0).transpose() / kf.omega;
        const double err = (R - target).cwiseAbs().maxCoeff();
        rep.point_errors.push_back(err);
        rep.max_error = std::max(rep.max_error, err);
        rep.max_target = std::max(rep.max_target, target.cwiseAbs().maxCoeff());
        rep.max_error_literal = std::max(rep.max_error_literal, (R + target).cwiseAbs().maxCoeff());
        rep.max_error_raw = std::max(rep.max_error_raw, (f2 - target).cwiseAbs().maxCoeff());
        ++rep.points;
    }
    return rep;
}

} // namespace fhn

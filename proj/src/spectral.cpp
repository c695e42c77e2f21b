#include "fhn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fhn {

namespace {

constexpr double pi = std::numbers::pi;

OperatorMatrix assemble(const LatticeSystem& sys, double c, const Eigen::VectorXd& gu, const ModelParams& params,
                        Which which)
{
    const int n = sys.n();
    SpMat D = sys.derivative(c >= 0.0), Dl = sys.delta();
    std::vector<Eigen::Triplet<double>> t;
    auto add = [&](const SpMat& B, int r0, int c0, double s) {
        for (int k = 0; k < B.outerSize(); ++k)
            for (SpMat::InnerIterator i(B, k); i; ++i) t.emplace_back(r0 + i.row(), c0 + i.col(), s * i.value());
    };
    add(D, 0, 0, c);
    add(Dl, 0, 0, -1.0);
    add(D, n, n, c);
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, -gu(i));
        t.emplace_back(i, n + i, 1.0);
        t.emplace_back(n + i, i, -params.rho);
        t.emplace_back(n + i, n + i, params.gamma * params.rho);
    }
    OperatorMatrix op;
    op.which = which;
    op.A.resize(2 * n, 2 * n);
    op.A.setFromTriplets(t.begin(), t.end());
    op.A.makeCompressed();
    Eigen::VectorXd W = sys.weights();
    op.weights.resize(2 * n);
    op.weights << W, W;
    op.mesh = sys.mesh;
    op.continuous = false;
    op.h = sys.h;
    op.c = c;
    op.params = params;
    return op;
}

} // namespace

OperatorMatrix assemble_Lh(const WaveProfile& profile, const CouplingKernel& kernel, const ModelParams& params,
                           BoundaryMode mode)
{
    require(profile.h > 0.0, "assemble_Lh needs a lattice profile");
    LatticeSystem sys(kernel, profile.L(), profile.h, profile.mesh.p(), mode);
    require(sys.mesh.E == profile.mesh.E, "profile mesh does not match the lattice cells");
    Eigen::VectorXd gu = profile.u.unaryExpr([&](double v) { return cubic_g_prime(v, params.r0); });
    return assemble(sys, profile.c, gu, params, Which::L_h);
}

OperatorMatrix assemble_Lh_adjoint(const WaveProfile& profile, const CouplingKernel& kernel,
                                   const ModelParams& params, BoundaryMode mode)
{
    return assemble_Lh(profile, kernel, params, mode).adjoint();
}

OperatorMatrix assemble_Lh_infty(const ElementMesh& mesh, double h, double c, const CouplingKernel& kernel,
                                 const ModelParams& params, BoundaryMode mode)
{
    LatticeSystem sys(kernel, mesh.L, h, mesh.p(), mode);
    Eigen::VectorXd gu = Eigen::VectorXd::Constant(sys.n(), -params.r0);
    return assemble(sys, c, gu, params, Which::L_h_infty);
}

KernelElements kernel_elements(const OperatorMatrix& Lh, const OperatorMatrix& Lh_adj, double tol,
                               const Eigen::VectorXd* align)
{
    KernelElements k;
    auto sp = smallest_singular(Lh.A.cast<cd>(), Lh.weights, 2);
    auto sm = smallest_singular(Lh_adj.A.cast<cd>(), Lh_adj.weights, 1);
    k.sigma1 = sp.sigma[0];
    k.sigma2 = sp.sigma[1];
    k.sigma1_adjoint = sm.sigma[0];
    if (k.sigma2 < tol) throw NumericalFailure("kernel not numerically one-dimensional");
    Eigen::VectorXcd pp = sp.right.col(0), pm = sm.right.col(0);
    cd a;
    if (align) {
        a = Lh.inner(pp, align->cast<cd>());
    } else {
        Eigen::Index i;
        pp.cwiseAbs().maxCoeff(&i);
        a = std::conj(pp(i));
    }
    pp *= a / std::abs(a);
    cd b = Lh.inner(pm, pp);
    pm *= b / std::abs(b);
    k.phi_plus = pp.real();
    k.phi_minus = pm.real();
    k.phi_plus /= std::sqrt(Lh.inner(k.phi_plus, k.phi_plus));
    k.phi_minus /= std::sqrt(Lh.inner(k.phi_minus, k.phi_minus));
    k.omega = Lh.inner(k.phi_minus, k.phi_plus);
    return k;
}

SymbolEvaluation symbol(const CouplingKernel& kernel, const ModelParams& params, double h, double c, cd lambda,
                        cd z)
{
    const double radius = kernel.nu ? *kernel.nu : 0.0;
    require(std::abs(z.real()) * h < radius || std::abs(z.real()) <= 1e-14,
            "symbol: Re z outside the decay radius of the kernel");
    cd nonlocal(0.0);
    for (int k = 1; k <= kernel.K(); ++k)
        nonlocal += kernel.alpha(k) * (std::exp(double(k) * h * z) + std::exp(-double(k) * h * z) - 2.0);
    nonlocal /= h * h;
    SymbolEvaluation s;
    s.lambda = lambda;
    s.z = z;
    s.matrix << c * z - nonlocal + params.r0 + lambda, 1.0, -params.rho, c * z + params.gamma * params.rho + lambda;
    s.det = s.matrix(0, 0) * s.matrix(1, 1) - s.matrix(0, 1) * s.matrix(1, 0);
    return s;
}

std::vector<double> default_y_grid(double h, double c, cd lambda, int n)
{
    double ymax = 2.0 * pi / h + std::abs(lambda.imag()) / std::abs(c) + 1.0;
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = -ymax + 2.0 * ymax * i / (n - 1);
    y.push_back(-lambda.imag() / c); // the drift point where Im of both diagonal entries vanishes
    return y;
}

double hyperbolicity_margin(const CouplingKernel& kernel, const ModelParams& params, double h, double c,
                            cd lambda, const std::vector<double>& y_grid)
{
    double m = std::numeric_limits<double>::infinity();
    for (double y : y_grid) m = std::min(m, std::abs(symbol(kernel, params, h, c, lambda, cd(0.0, y)).det));
    return m;
}

double essential_spectrum_edge(const CouplingKernel& kernel, const ModelParams& params, double h, double, int ny)
{
    // det Delta(iy) = (a + lambda)(b + lambda) + rho with a - b real, so Re lambda only depends on A(hy)
    double edge = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= ny; ++i) {
        double z = 2.0 * pi * i / ny;
        double ap = 2.0 / (h * h) * dispersion_A(kernel, z) + params.r0;
        double bp = params.gamma * params.rho;
        cd disc = std::sqrt(cd((ap - bp) * (ap - bp) / 4.0 - params.rho, 0.0));
        edge = std::max(edge, (-(ap + bp) / 2.0 + disc).real());
    }
    return edge;
}

double lambda_tilde(const ModelParams& p) { return 0.25 * std::min(p.gamma * p.rho, p.r0); }

double g_star(const WaveProfile& profile)
{
    double g = 0.0;
    for (long i = 0; i < profile.u.size(); ++i)
        g = std::max(g, std::abs(cubic_g_prime(profile.u(i), profile.params.r0)));
    return g;
}

double lambda_one(const WaveProfile& profile) { return 1.0 + g_star(profile) + 0.5 * (1.0 - profile.params.rho); }

double sigma_min_at(const OperatorMatrix& Lh, cd lambda, int k, std::vector<double>* all)
{
    auto r = smallest_singular(shifted(Lh.A, lambda), Lh.weights, k);
    if (all) *all = r.sigma;
    return r.sigma.front();
}

std::vector<cd> strip_grid(double re0, double re1, int nre, int nim, double h, double c)
{
    std::vector<cd> g;
    const double ib = pi * std::abs(c) / h;
    for (int a = 0; a < nre; ++a)
        for (int b = 0; b < nim; ++b) {
            double re = nre == 1 ? re0 : re0 + (re1 - re0) * a / (nre - 1);
            double im = -ib + 2.0 * ib * (b + 0.5) / nim;
            g.emplace_back(re, im);
        }
    return g;
}

SpectralScanReport scan_strip(const OperatorMatrix& Lh, const CouplingKernel& kernel,
                              const std::vector<cd>& lambda_grid, const std::string& region, const ScanOptions& opt)
{
    SpectralScanReport r;
    r.region = region;
    r.lambda_grid = lambda_grid;
    for (cd l : lambda_grid) r.sigma_min.push_back(sigma_min_at(Lh, l));

    const double period = 2.0 * pi * Lh.c / Lh.h;
    auto zero_family = [&](cd l) {
        double k = std::round(l.imag() / period);
        return std::abs(l - cd(0.0, k * period)) < 1e-4;
    };
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (r.sigma_min[i] > opt.candidate_tol) continue;
        // eigenvalue alpha of A nearest -lambda0 gives lambda = -alpha
        auto ev = eigs_near(Lh.A.cast<cd>(), -lambda_grid[i] + cd(1e-7, 1e-7), 1, opt.refine_iter);
        cd lam = -ev.front();
        if (sigma_min_at(Lh, lam) >= opt.eig_tol) continue;
        bool dup = false;
        for (cd e : r.eigenvalues_located) dup = dup || std::abs(e - lam) < 1e-6;
        if (!dup) r.eigenvalues_located.push_back(lam);
    }
    if (opt.arnoldi) {
        auto ev = eigs_near(Lh.A.cast<cd>(), cd(-0.01, 0.0), opt.arnoldi_nev, std::max(60, 3 * opt.arnoldi_nev));
        for (cd a : ev) r.arnoldi_eigenvalues.push_back(-a);
    }
    r.essential_edge = essential_spectrum_edge(kernel, Lh.params, Lh.h, Lh.c);
    r.empirical_lambda3 = -r.essential_edge;
    for (const auto* list : {&r.eigenvalues_located, &r.arnoldi_eigenvalues})
        for (cd l : *list)
            if (!zero_family(l)) r.empirical_lambda3 = std::min(r.empirical_lambda3, -l.real());
    return r;
}

PeriodicityReport check_periodicity(const OperatorMatrix& Lh, const CouplingKernel& kernel, cd lambda)
{
    PeriodicityReport rep;
    const cd shift(0.0, 2.0 * pi * Lh.c / Lh.h);
    rep.sigma_lambda = sigma_min_at(Lh, lambda);
    rep.sigma_shifted = sigma_min_at(Lh, lambda + shift);
    rep.relative_gap = std::abs(rep.sigma_lambda - rep.sigma_shifted) /
                       std::max({rep.sigma_lambda, rep.sigma_shifted, 1e-300});

    // E (L_h + lambda + shift) E^-1 with E = diag(e^{2 pi i xi / h}). Its entry factors
    // e^{2 pi i (xi_i - xi_j)/h} reduce to local-node offsets since cells are h apart.
    // Compare the action with L_h + lambda on a smooth bump.
    const auto& m = Lh.mesh;
    const long n = Lh.nodes();
    auto local = [&](long idx) { return m.rule.x((idx % n) % m.npe()); };
    SpMatC B = shifted(Lh.A, lambda + shift);
    for (int k = 0; k < B.outerSize(); ++k)
        for (SpMatC::InnerIterator it(B, k); it; ++it) it.valueRef() *= std::polar(1.0, pi * (local(it.row()) - local(it.col())));
    Eigen::VectorXd x = m.nodes();
    Eigen::VectorXcd v(2 * n);
    for (long i = 0; i < n; ++i) v(i) = v(n + i) = std::exp(-0.25 * x(i) * x(i));
    Eigen::VectorXcd ref = shifted(Lh.A, lambda) * v;
    Eigen::VectorXcd diff = B * v - ref;
    rep.conjugation_gap = std::sqrt(Lh.inner(diff, diff).real() / Lh.inner(ref, ref).real());

    LatticeSystem sys(kernel, m.L, Lh.h, m.p());
    SpMat Dl = sys.delta();
    bool same = true;
    for (int k = 0; k < Dl.outerSize(); ++k)
        for (SpMat::InnerIterator it(Dl, k); it; ++it) {
            cd f = std::polar(1.0, pi * (m.rule.x(it.row() % m.npe()) - m.rule.x(it.col() % m.npe())));
            cd v = f * it.value();
            same = same && v.real() == it.value() && v.imag() == 0.0;
        }
    rep.delta_block_identical = same;
    return rep;
}

} // namespace fhn

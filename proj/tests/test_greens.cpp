#include "fhn/greens.hpp"
#include "pulse_fixture.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fhn;
using fhn::testing::shared_pipeline;
using fhn::testing::synthetic_profile;

namespace {

constexpr double pi = std::numbers::pi;

double block_max(const TemporalGreen& r)
{
    double m = 0.0;
    for (const auto& g : r.G) m = std::max(m, g.cwiseAbs().maxCoeff());
    return m;
}

double max_diff(const TemporalGreen& a, const TemporalGreen& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.G.size(); ++i) m = std::max(m, (a.G[i] - b.G[i]).cwiseAbs().maxCoeff());
    return m;
}

// Left limit of the cell polynomial ending at xi.
Eigen::Matrix2cd left_limit(const ResolventGreen& g, double xi)
{
    const auto& m = g.mesh;
    auto [e, s] = m.locate(xi);
    const int el = m.wrap(e - 1);
    const long n = m.size();
    Eigen::Matrix2cd G;
    for (int l = 0; l < 2; ++l)
        for (int k = 0; k < 2; ++k) G(l, k) = g.cols(l * n + m.index(el, m.p()), k);
    return G;
}

// Degree 16 per cell: the resolvent converges spectrally in the degree (about 1e-3 at degree 8).
struct Small : ::testing::Test {
    CouplingKernel ker = build_gaussian_kernel(20);
    WaveProfile p = synthetic_profile(20.0, 0.5, 16, 0.4);
    OperatorMatrix Lh = assemble_Lh(p, ker, p.params);
};

} // namespace

TEST(Quadrature, GaussLegendreIsExactToDegree2nMinus1)
{
    Eigen::VectorXd x, w;
    gauss_legendre(8, x, w);
    EXPECT_NEAR(w.sum(), 2.0, 1e-14);
    for (int k = 0; k <= 15; ++k) {
        double q = (w.array() * x.array().pow(k)).sum();
        double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
        EXPECT_NEAR(q, exact, 1e-14) << "k = " << k;
    }
    EXPECT_THROW(gauss_legendre(0, x, w), PreconditionError);
}

TEST(GreensInfty, AliasAndWindowAgree)
{
    auto ker = build_gaussian_kernel(20);
    ModelParams prm;
    // the alias sum is exact up to its quadrature; the window split converges algebraically in the window
    for (double xi : {-2.3, -0.25, 0.0, 0.4, 3.1}) {
        auto a = greens_infty(ker, prm, 0.5, 0.46, cd(0.3, 0.2), xi, InftyMethod::alias_sum);
        auto a2 = greens_infty(ker, prm, 0.5, 0.46, cd(0.3, 0.2), xi, InftyMethod::alias_sum, 4096);
        EXPECT_LT((a - a2).cwiseAbs().maxCoeff(), 1e-12) << "xi = " << xi;
        double e40 = (a - greens_infty(ker, prm, 0.5, 0.46, cd(0.3, 0.2), xi, InftyMethod::window_split, 0, 40.0))
                         .cwiseAbs().maxCoeff();
        double e320 = (a - greens_infty(ker, prm, 0.5, 0.46, cd(0.3, 0.2), xi, InftyMethod::window_split, 0, 320.0))
                          .cwiseAbs().maxCoeff();
        EXPECT_LT(e320, 1e-4) << "xi = " << xi;
        EXPECT_LT(e320, 0.2 * e40) << "xi = " << xi;
    }
    // on the essential spectrum there is no bounded Green's function
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(symbol(ker, prm, 0.5, 0.46, 0.0, cd(0.0, 0.0)).matrix);
    EXPECT_THROW(greens_infty(ker, prm, 0.5, 0.46, -es.eigenvalues()(0), 0.0), PreconditionError);
}

TEST(GreensInfty, JumpAtTheSourceIsInverseSpeed)
{
    auto ker = build_gaussian_kernel(20);
    ModelParams prm;
    const double c = 0.46;
    auto right = greens_infty(ker, prm, 0.5, c, cd(0.3, 0.0), 0.0);
    auto left = greens_infty(ker, prm, 0.5, c, cd(0.3, 0.0), -1e-9);
    EXPECT_LT((right - left - Eigen::Matrix2cd::Identity() / c).cwiseAbs().maxCoeff(), 1e-6);
}

TEST_F(Small, DiscreteInftyMatchesTheFourierIntegral)
{
    const cd lam(0.3, 0.2);
    const long j0 = 3;
    auto g = greens_infty_discrete(Lh, ker, lam, j0);
    for (double dx : {-2.3, -0.25, 0.0, 0.4, 3.1}) {
        auto a = greens_infty(ker, p.params, Lh.h, p.c, lam, dx);
        EXPECT_LT((g.at(Lh.h * j0 + dx) - a).cwiseAbs().maxCoeff(), 1e-6) << "dx = " << dx;
    }
}

TEST_F(Small, ResolventJumpAndDecay)
{
    const cd lam(0.4, -0.3);
    auto g = resolvent_direct(Lh, lam, {-4}).front();
    const double xi0 = g.xi0;
    Eigen::Matrix2cd jump = g.at(xi0) - left_limit(g, xi0);
    EXPECT_LT((jump - Eigen::Matrix2cd::Identity() / p.c).cwiseAbs().maxCoeff(), 1e-6);
    // away from the source the Green's function decays exponentially
    EXPECT_LT(g.at(xi0 + 15.0).cwiseAbs().maxCoeff(), 1e-3 * g.at(xi0).cwiseAbs().maxCoeff());
    EXPECT_LT(g.at(xi0 - 15.0).cwiseAbs().maxCoeff(), 1e-3 * g.at(xi0).cwiseAbs().maxCoeff());
}

TEST_F(Small, ResolventAgreesWithTheSplitForm)
{
    const cd lam(0.4, -0.3);
    auto a = greens_resolvent(Lh, ker, lam, 2);
    auto b = resolvent_direct(Lh, lam, {2}).front();
    EXPECT_LT((a.cols - b.cols).cwiseAbs().maxCoeff(), 1e-9 * b.cols.cwiseAbs().maxCoeff());
}

TEST_F(Small, RestStateProfileGivesTheConstantCoefficientFunction)
{
    WaveProfile z = p;
    z.u.setZero();
    z.w.setZero();
    auto Lz = assemble_Lh(z, ker, z.params);
    const cd lam(0.25, 0.1);
    auto a = greens_resolvent(Lz, ker, lam, 0);
    auto b = greens_infty_discrete(Lz, ker, lam, 0);
    EXPECT_LT((a.cols - b.cols).cwiseAbs().maxCoeff(), 1e-13 * b.cols.cwiseAbs().maxCoeff());
}

TEST_F(Small, DistributionalIdentityAgainstTheAdjoint)
{
    // <(L_h + lambda) G, psi> = <G, (L_h* + conj lambda) psi> = psi(xi0)^H: pair the DG solution
    // with a smooth test function through the adjoint operator
    const cd lam(0.35, 0.15);
    auto g = resolvent_direct(Lh, lam, {1}).front();
    OperatorMatrix La = Lh.adjoint();
    Eigen::VectorXd x = Lh.mesh.nodes();
    const long n = x.size();
    Eigen::VectorXcd psi(2 * n);
    for (long i = 0; i < n; ++i) {
        psi(i) = std::exp(-0.2 * (x(i) - 0.5) * (x(i) - 0.5));
        psi(n + i) = 0.5 * std::exp(-0.1 * (x(i) + 1.0) * (x(i) + 1.0));
    }
    Eigen::VectorXcd Lpsi = La.A.cast<cd>() * psi + std::conj(lam) * psi;
    for (int k = 0; k < 2; ++k) {
        cd lhs = Lh.inner(Lpsi, Eigen::VectorXcd(g.cols.col(k)));
        cd expect = std::conj(k == 0 ? std::exp(-0.2 * 0.0) : 0.5 * std::exp(-0.1 * 2.25));
        EXPECT_LT(std::abs(lhs - expect), 1e-8) << "column " << k;
    }
}

TEST_F(Small, SingularProbeIsRejected)
{
    EXPECT_THROW(greens_resolvent(Lh, ker, cd(0.3), 0, 1e6), PreconditionError);
}

TEST_F(Small, TemporalIdentityAtEqualTimes)
{
    auto r = temporal_green_direct(ker, p.params, p, 5, 0.7, 0.7);
    for (std::size_t i = 0; i < r.sites.size(); ++i) {
        Eigen::Matrix2d expect = (r.sites[i] == 5 ? 1.0 : 0.0) * Eigen::Matrix2d::Identity();
        EXPECT_EQ(r.G[i], expect);
    }
    EXPECT_THROW(temporal_green_direct(ker, p.params, p, 5, 1.0, 0.5), PreconditionError);
}

TEST_F(Small, RungeKuttaIsFourthOrder)
{
    auto ref = temporal_green_direct(ker, p.params, p, 0, 0.0, 1.0, {0.0025});
    auto a = temporal_green_direct(ker, p.params, p, 0, 0.0, 1.0, {0.04});
    auto b = temporal_green_direct(ker, p.params, p, 0, 0.0, 1.0, {0.02});
    EXPECT_NEAR(max_diff(a, ref) / max_diff(b, ref), 16.0, 2.0);
}

TEST_F(Small, ContourMatchesDirectIntegration)
{
    const double chi = lambda_one(p);
    ContourOptions gl;
    gl.n_nodes = 96;
    ContourOptions tr = gl;
    tr.trapezoid = true;
    auto cg = temporal_green_contour(ker, p.params, p, {-3, 4}, 0.0, {0.5, 1.5}, chi, gl);
    auto ct = temporal_green_contour(ker, p.params, p, {-3, 4}, 0.0, {0.5, 1.5}, chi, tr);
    ASSERT_EQ(cg.size(), 4u);
    for (std::size_t k = 0; k < cg.size(); ++k) {
        auto d = temporal_green_direct(ker, p.params, p, cg[k].j0, 0.0, cg[k].t, {0.001});
        const double scale = block_max(d);
        EXPECT_LT(max_diff(cg[k], d) / scale, 1e-4) << "GL j0 " << cg[k].j0 << " t " << cg[k].t;
        EXPECT_LT(max_diff(ct[k], d) / scale, 1e-4) << "trapezoid j0 " << ct[k].j0 << " t " << ct[k].t;
        EXPECT_LT(cg[k].max_imag / scale, 1e-6);
    }
}

TEST_F(Small, ShiftedTrapezoidNodesGiveTheSameIntegral)
{
    // the integrand is 2 pi i c / h periodic, so moving every node by a fraction of the spacing changes nothing
    ContourOptions tr;
    tr.trapezoid = true;
    tr.n_nodes = 64;
    const double chi = lambda_one(p), step = 2.0 * pi * p.c / p.h / tr.n_nodes;
    auto a = temporal_green_contour(ker, p.params, p, {2}, 0.0, {1.0}, chi, tr);
    auto b = temporal_green_contour(ker, p.params, p, {2}, 0.0, {1.0}, chi, tr, 0.37 * step);
    EXPECT_LT(max_diff(a[0], b[0]) / block_max(a[0]), 1e-8);
}

TEST_F(Small, StartTimeShiftsTheFrame)
{
    // G(t, t0) depends on t0 through the pulse position only
    auto a = temporal_green_direct(ker, p.params, p, 0, 0.5, 1.5, {0.005});
    auto b = temporal_green_direct(ker, p.params, p.shifted(p.c * 0.5), 0, 0.0, 1.0, {0.005});
    EXPECT_LT(max_diff(a, b) / block_max(a), 1e-6);
}

TEST(GreensPulse, DerivativeModeIsTransported)
{
    // Phi+(hj + ct) solves the linearised lattice equation along the pulse
    auto& pl = shared_pipeline();
    const auto& q = pl.lattice_pulse(0.5, 6);
    const auto& kf = pl.linearization(0.5, 6).kf;
    const long J = std::lround(2.0 * q.L() / q.h), off = std::lround(q.L() / q.h);
    Eigen::MatrixXd V0(2 * J, 1), V1(2 * J, 1);
    const double t = 2.0;
    for (long s = 0; s < J; ++s) {
        V0.block<2, 1>(2 * s, 0) = kf.plus(q.h * (s - off));
        V1.block<2, 1>(2 * s, 0) = kf.plus(q.h * (s - off) + q.c * t);
    }
    Eigen::MatrixXd V = propagate_lattice(q, pl.kernel(), q.params, V0, 0.0, t, {0.005});
    EXPECT_LT((V - V1).cwiseAbs().maxCoeff(), 1e-6 * V1.cwiseAbs().maxCoeff());
}

TEST(GreensPulse, DecompositionAndProjections)
{
    auto& pl = shared_pipeline();
    const auto& q = pl.lattice_pulse(0.5, 6);
    const auto& kf = pl.linearization(0.5, 6).kf;
    auto r = temporal_green_direct(pl.kernel(), q.params, q, peak_site(q) + 3, 0.0, 1.0, {0.005});
    decompose_temporal(r, kf, q.h, q.c);
    ASSERT_EQ(r.E.size(), r.G.size());
    for (std::size_t i = 0; i < r.G.size(); ++i) {
        const double scale = std::max(r.G[i].cwiseAbs().maxCoeff(), r.E[i].cwiseAbs().maxCoeff());
        EXPECT_LE((r.G[i] - r.E[i] - r.Gtilde[i]).cwiseAbs().maxCoeff(), 1e-15 * scale);
    }
    auto fit = fit_gtilde({r}, q.h, q.c);
    EXPECT_LT(fit.rank1_residual, 1e-14);
    for (double t : {0.0, 0.3}) {
        auto pr = projections(kf, q.h, q.c, t);
        EXPECT_LT(pr.idempotency_error, 1e-6) << "t = " << t;
        EXPECT_LT(pr.complement_error, 1e-6);
        EXPECT_LT(pr.sum_identity_combined, 1e-6);
        EXPECT_GT(pr.window_sites, 0);
    }
}

TEST(GreensPulse, ResidueAtTheTranslationEigenvalue)
{
    // Richardson limit of lambda G_lambda at small lambda is +(1/Omega) Phi+ Phi-^T
    auto& pl = shared_pipeline();
    const auto& q = pl.lattice_pulse(0.5, 6);
    const auto& lin = pl.linearization(0.5, 6);
    const long j = peak_site(q);
    const double pk = q.peak_position();
    std::vector<std::pair<double, long>> pts{{pk - 4.0, j}, {pk, j + 10}, {pk + 1.5, j - 10}, {pk + 8.0, j}};
    auto rep = residue_check(lin.Lh, lin.kf, pts, {1e-3, 1e-4});
    EXPECT_LT(rep.max_error, 1e-3);
    EXPECT_GT(rep.max_error_literal, 0.5 * rep.max_target);
    EXPECT_EQ(rep.points, 4);
    EXPECT_THROW(residue_check(lin.Lh, lin.kf, pts, {1e-3}), PreconditionError);
}

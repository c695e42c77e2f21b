#include "fhn/dynamics.hpp"
#include "pulse_fixture.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace fhn;
using fhn::testing::shared_pipeline;

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

TEST(Norms, SiteMaximumThenLp)
{
    Eigen::VectorXd du(3), dw(3);
    du << 3.0, -1.0, 0.0;
    dw << 1.0, 2.0, -4.0;
    EXPECT_DOUBLE_EQ(lp_norm(du, dw, 1.0), 9.0);
    EXPECT_DOUBLE_EQ(lp_norm(du, dw, 2.0), std::sqrt(29.0));
    EXPECT_DOUBLE_EQ(lp_norm(du, dw, inf), 4.0);
    EXPECT_DOUBLE_EQ(lp_norm(Eigen::VectorXd(), Eigen::VectorXd(), inf), 0.0);
    EXPECT_THROW(lp_norm(du, dw, 3.0), PreconditionError);
}

TEST(LatticeRhs, RestStateIsAnEquilibrium)
{
    auto ker = build_gaussian_kernel(20);
    auto s = LatticeState::zeros(-30, 29);
    auto [du, dw] = rhs(s, ker, ModelParams{}, 0.5);
    EXPECT_EQ(du.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(dw.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LatticeRhs, UniformStatesFollowTheKineticOde)
{
    // on a ring the coupling annihilates constants; the only uniform equilibrium is the rest
    // state because (1 - u)(u - r0) = 1 / gamma has no real root when gamma < 4 / (1 - r0)^2
    ModelParams prm;
    const double disc = (1.0 + prm.r0) * (1.0 + prm.r0) - 4.0 * (prm.r0 + 1.0 / prm.gamma);
    EXPECT_LT(disc, 0.0);
    auto ker = build_gaussian_kernel(20);
    for (double u0 : {0.05, 0.5, 0.9}) {
        auto s = LatticeState::zeros(0, 79, BoundaryMode::periodic);
        s.u.setConstant(u0);
        s.w.setConstant(u0 / prm.gamma);
        auto [du, dw] = rhs(s, ker, prm, 0.5);
        const double expect = cubic_g(u0, prm.r0) - u0 / prm.gamma;
        EXPECT_LT((du.array() - expect).abs().maxCoeff(), 1e-12);
        EXPECT_LT(dw.cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LT(expect, 0.0);
    }
}

TEST(LatticeRhs, PulseMovesWithItsSpeed)
{
    // U_j(t) = (u, w)(hj + ct) so dU/dt = c (u', w') at the sites
    auto& pl = shared_pipeline();
    const auto& q = pl.lattice_pulse(0.5, 6);
    const long off = std::lround(q.L() / q.h);
    LatticeState s = pulse_state(q, -off, off - 1, 0.0);
    s.mode = BoundaryMode::periodic;
    auto [du, dw] = rhs(s, pl.kernel(), q.params, q.h);
    double err = 0.0, scale = 0.0;
    for (long i = 0; i < s.size(); ++i) {
        auto [dpu, dpw] = q.eval_derivative(q.h * (s.j_min + i));
        err = std::max({err, std::abs(du(i) - q.c * dpu), std::abs(dw(i) - q.c * dpw)});
        scale = std::max(scale, std::abs(q.c * dpu));
    }
    EXPECT_LT(err, 1e-6 * scale);
}

TEST(Evolve, ZeroStaysZero)
{
    auto ker = build_gaussian_kernel(20);
    auto traj = evolve(LatticeState::zeros(-20, 19), ker, ModelParams{}, 0.5, 3.0);
    ASSERT_EQ(traj.size(), 4u);
    for (const auto& s : traj) EXPECT_EQ(s.u.cwiseAbs().maxCoeff() + s.w.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(traj.back().time, 3.0);
}

TEST(Evolve, StepControl)
{
    auto ker = build_gaussian_kernel(20);
    double sum = 0.0;
    for (int k = 1; k <= ker.effective_range(); ++k) sum += ker.alpha(k);
    EXPECT_NEAR(max_stable_dt(ker, 0.5, 2.5), 2.5 * 0.25 / (4.0 * sum), 1e-15);
    EvolveOptions o;
    o.dt = 1.0;
    EXPECT_THROW(evolve(LatticeState::zeros(0, 9), ker, ModelParams{}, 0.5, 1.0, o), PreconditionError);
    EXPECT_THROW(evolve(LatticeState::zeros(0, 9), ker, ModelParams{}, 0.5, -1.0), PreconditionError);
}

TEST(Evolve, FourthOrderInTime)
{
    auto ker = build_gaussian_kernel(20);
    ModelParams prm;
    auto s0 = LatticeState::zeros(-40, 39, BoundaryMode::periodic);
    for (long i = 0; i < s0.size(); ++i) s0.u(i) = 0.8 * std::exp(-0.02 * double((i - 40) * (i - 40)));
    auto run = [&](double dt) {
        EvolveOptions o;
        o.dt = dt;
        o.stride = 2.0;
        return evolve(s0, ker, prm, 0.5, 2.0, o).back();
    };
    auto ref = run(0.0025), a = run(0.04), b = run(0.02);
    const double ea = lp_norm(a.u - ref.u, a.w - ref.w, inf), eb = lp_norm(b.u - ref.u, b.w - ref.w, inf);
    EXPECT_NEAR(ea / eb, 16.0, 2.0);
}

TEST(Evolve, DivergenceAndSpillAreReported)
{
    auto ker = build_gaussian_kernel(20);
    ModelParams prm;
    auto big = LatticeState::zeros(-10, 9);
    big.u.setConstant(50.0);
    EXPECT_THROW(evolve(big, ker, prm, 0.5, 5.0), NumericalFailure);
    auto edge = LatticeState::zeros(-10, 9);
    edge.u(0) = 0.9;
    EXPECT_THROW(evolve(edge, ker, prm, 0.5, 1.0), NumericalFailure);
}

TEST(Perturbations, BumpAndTranslate)
{
    auto& pl = shared_pipeline();
    const auto& q = pl.lattice_pulse(0.5, 6);
    auto win = LatticeState::zeros(-20, 20);
    auto b = gaussian_bump(win, 0.5, 0.01, 1.0, 2.0);
    EXPECT_DOUBLE_EQ(b.du(22), 0.01);
    EXPECT_EQ(b.dw.cwiseAbs().maxCoeff(), 0.0);
    auto t = lattice_translate(q, -40, 40, 0);
    EXPECT_EQ(t.du.cwiseAbs().maxCoeff(), 0.0);
    auto t1 = lattice_translate(q, -60, 20, 1);
    auto base = pulse_state(q, -60, 20, 0.0);
    EXPECT_NEAR(t1.du(41) + base.u(41), base.u(40), 1e-15);
}

TEST(Phase, TranslateIsRecoveredExactly)
{
    auto& pl = shared_pipeline();
    const auto& q = pl.lattice_pulse(0.5, 6);
    // (u, w)(h(j - 1)) is the pulse at phase theta = -h / c
    auto U = pulse_state(q, -80, 40, 0.0, -q.h / q.c);
    EXPECT_NEAR(best_phase(q, U, 2.0, -2.0, 1.0), -q.h / q.c, 1e-7);
    EXPECT_NEAR(best_phase(q, U, inf, -2.0, 1.0), -q.h / q.c, 1e-6);
}

TEST(Stability, TranslatedPulseHasConstantPhase)
{
    auto& pl = shared_pipeline();
    const auto& q = pl.lattice_pulse(0.5, 6);
    StabilityOptions so;
    so.T = 10.0;
    auto [jl, jr] = pulse_window(q, so.T);
    EXPECT_LE(jl, -std::lround(q.L() / q.h));
    auto fits = stability_experiment(q, pl.kernel(), q.params, lattice_translate(q, jl, jr, 1), {2.0, inf}, so);
    ASSERT_EQ(fits.size(), 2u);
    for (const auto& f : fits) {
        EXPECT_TRUE(f.theta_converged) << f.diagnostic;
        EXPECT_NEAR(f.theta_infinity, -q.h / q.c, 1e-5);
        for (auto [t, r] : f.residual_series) EXPECT_LT(r, 1e-5) << "t = " << t;
    }
}

TEST(Stability, OversizedPerturbationRejected)
{
    auto& pl = shared_pipeline();
    const auto& q = pl.lattice_pulse(0.5, 6);
    StabilityOptions so;
    so.T = 2.0;
    so.delta = 1e-3;
    auto [jl, jr] = pulse_window(q, so.T);
    auto win = LatticeState::zeros(jl, jr);
    EXPECT_THROW(stability_experiment(q, pl.kernel(), q.params, gaussian_bump(win, q.h, 0.01, 0.0, 2.0), {1.0}, so),
                 PreconditionError);
    EXPECT_THROW(stability_experiment(q, pl.kernel(), q.params, Perturbation{}, {1.0}, so), PreconditionError);
}

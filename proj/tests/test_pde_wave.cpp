#include "fhn/reference_pde.hpp"
#include "fhn/wave.hpp"
#include "pulse_fixture.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace fhn;
using fhn::testing::shared_pipeline;

TEST(Cubic, ValuesAndDerivative)
{
    const double r0 = 0.1;
    EXPECT_DOUBLE_EQ(cubic_g(0.0, r0), 0.0);
    EXPECT_DOUBLE_EQ(cubic_g(1.0, r0), 0.0);
    EXPECT_DOUBLE_EQ(cubic_g(r0, r0), 0.0);
    EXPECT_NEAR(cubic_g(0.5, r0), 0.5 * 0.5 * 0.4, 1e-15);
    EXPECT_DOUBLE_EQ(cubic_g_prime(0.0, r0), -r0);
    for (double u : {-0.3, 0.2, 0.7, 1.4}) {
        double fd = (cubic_g(u + 1e-6, r0) - cubic_g(u - 1e-6, r0)) / 2e-6;
        EXPECT_NEAR(cubic_g_prime(u, r0), fd, 1e-8);
    }
}

TEST(Model, HypothesisRanges)
{
    EXPECT_NO_THROW((ModelParams{0.1, 0.01, 4.0}.validate()));
    EXPECT_THROW((ModelParams{0.0, 0.01, 4.0}.validate()), PreconditionError);
    EXPECT_THROW((ModelParams{0.1, 1.0, 4.0}.validate()), PreconditionError);
    EXPECT_THROW((ModelParams{0.1, 0.01, 4.0 / 0.81 + 1e-9}.validate()), PreconditionError);
    EXPECT_THROW((ModelParams{0.1, 0.01, 0.0}.validate()), PreconditionError);
}

TEST(CG, DerivativesAreSpectrallyAccurate)
{
    CGSystem cg(ElementMesh(10.0, 40, 8));
    Eigen::VectorXd x = cg.coords();
    const double k = 2.0 * M_PI * 3.0 / 20.0;
    Eigen::VectorXd f = (k * x).array().sin(), d1 = k * (k * x).array().cos(), d2 = -k * k * f;
    EXPECT_LT((cg.D1 * f - d1).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((cg.D2 * f - d2).cwiseAbs().maxCoeff(), 1e-6);
    // M D1 skew and M D2 symmetric
    Eigen::MatrixXd C = cg.M.asDiagonal() * Eigen::MatrixXd(cg.D1);
    Eigen::MatrixXd K = cg.M.asDiagonal() * Eigen::MatrixXd(cg.D2);
    EXPECT_LT((C + C.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PdeSeed, ZeroTimeReturnsTheBump)
{
    ModelParams prm;
    ElementMesh mesh(40.0, 80, 4);
    auto bump = make_standard_bump(40.0, 0.05, 0.0);
    auto r = evolve_pde_seed(prm, mesh, bump, 0.0);
    EXPECT_FALSE(r.pulse_formed);
    EXPECT_NEAR(r.candidate.eval(0.0).first, 1.0, 1e-12);
    EXPECT_NEAR(r.candidate.eval(10.0).first, 0.0, 1e-12);
}

TEST(PdeSeed, SubthresholdBumpDecays)
{
    ModelParams prm;
    ElementMesh mesh(40.0, 80, 4);
    PulseSeed b = make_standard_bump(40.0, 0.05, 0.0, 5.0, 0.0, 0.0);
    b.u.values *= 0.05; // below the threshold r0
    auto r = evolve_pde_seed(prm, mesh, b, 40.0);
    EXPECT_FALSE(r.pulse_formed);
    EXPECT_FALSE(r.speed.has_value());
}

TEST(PdeSolve, RestStateSeedIsRejected)
{
    WaveProfile z;
    z.mesh = ElementMesh(20.0, 40, 4);
    z.u = Eigen::VectorXd::Zero(z.mesh.size());
    z.w = z.u;
    z.c = 0.4;
    EXPECT_THROW(solve_pde_pulse(ModelParams{}, z), NumericalFailure);
}

class PulseTest : public ::testing::Test {
protected:
    Pipeline& pl = shared_pipeline();
};

TEST_F(PulseTest, PdePulseSolves)
{
    const auto& p = pl.pde_pulse();
    EXPECT_LT(p.residual_norm, 1e-10);
    EXPECT_GT(p.c, 0.3);
    EXPECT_NEAR(p.peak_position(), pl.config().pde.peak, 0.5);
    auto [ua, wa] = p.eval(-p.L());
    EXPECT_LT(std::abs(ua) + std::abs(wa), 1e-7);
    // a re-solve from the converged state stays put
    int its = -1;
    auto again = solve_pde_pulse(p.params, p, {}, &its);
    EXPECT_EQ(its, 0);
    EXPECT_DOUBLE_EQ(again.c, p.c);
}

TEST_F(PulseTest, PdePulseKernelIsSimple)
{
    auto r = check_pde_kernel(pl.pde_pulse());
    EXPECT_TRUE(r.zero_eigenvalue_present);
    EXPECT_TRUE(r.zero_simple);
    EXPECT_LT(r.sigma1, 1e-6);
    EXPECT_GT(r.sigma2, 1e-4);
    EXPECT_GT(r.omega0, 0.0);
    EXPECT_GT(r.lambda_star, 0.0);
}

TEST_F(PulseTest, TailRatesMatchTheRestStateEigenvalues)
{
    // (mu^2 - c mu - r0)(c mu + rho gamma) - rho = 0 gives the spatial rates at the rest state
    const auto& p = pl.pde_pulse();
    const auto& m = p.params;
    const double c = p.c;
    Eigen::Matrix3d comp;
    // monic cubic mu^3 + a2 mu^2 + a1 mu + a0
    const double a2 = (m.rho * m.gamma - c * c) / c, a1 = (-c * m.rho * m.gamma - c * m.r0) / c,
                 a0 = (-m.r0 * m.rho * m.gamma - m.rho) / c;
    comp << 0, 0, -a0, 1, 0, -a1, 0, 1, -a2;
    Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
    double pos = 0.0;
    for (int i = 0; i < 3; ++i)
        if (es.eigenvalues()(i).real() > 0.0) pos = std::max(pos, es.eigenvalues()(i).real());
    ASSERT_GT(pos, 0.0);
    auto t = tail_decay_rates(p, 8.0, 25.0);
    // ahead of the peak (smaller xi) the profile grows like e^{mu xi}, mu > 0 the unstable rate
    EXPECT_NEAR(t.ahead_u, pos, 0.02 * pos);
}

TEST_F(PulseTest, ProfileNodesRoundTrip)
{
    const auto& p = pl.pde_pulse();
    const std::string f = ::testing::TempDir() + "pde_nodes_rt.csv";
    write_profile_nodes(p, f);
    auto q = read_profile_nodes(f);
    EXPECT_EQ(q.u, p.u);
    EXPECT_EQ(q.w, p.w);
    EXPECT_EQ(q.c, p.c);
    EXPECT_EQ(q.mesh.E, p.mesh.E);
    std::filesystem::remove(f);
}

TEST_F(PulseTest, LatticePulseAndResidual)
{
    const auto& q = pl.lattice_pulse(0.5, 6);
    EXPECT_LT(q.residual_norm, 1e-10);
    EXPECT_LT(mfde_residual(q, pl.kernel(), q.params, 0.5).sup_norm, 1e-9);
    EXPECT_NEAR(q.c, pl.pde_pulse().c, 5e-3);
    // the PDE pulse is only an O(h^2) approximate solution of the lattice equation
    double r1 = mfde_residual(pl.pde_pulse(), pl.kernel(), q.params, 0.5, 8).sup_norm;
    double r2 = mfde_residual(pl.pde_pulse(), pl.kernel(), q.params, 0.25, 8).sup_norm;
    EXPECT_GT(r1, 1e-4);
    EXPECT_NEAR(r1 / r2, 4.0, 0.6);
}

TEST_F(PulseTest, DerivativeModeIsUnitAndInKernel)
{
    const auto& q = pl.lattice_pulse(0.5, 6);
    Eigen::VectorXd d = derivative_mode(q);
    Eigen::VectorXd W = q.mesh.weights();
    const long n = W.size();
    double nrm = (d.head(n).array().square() * W.array()).sum() + (d.tail(n).array().square() * W.array()).sum();
    EXPECT_NEAR(nrm, 1.0, 1e-12);
}

TEST_F(PulseTest, ContinuationConvergesToThePdePulse)
{
    const auto& run = pl.continuation();
    ASSERT_TRUE(run.complete) << run.failure;
    ASSERT_EQ(run.distances.size(), 4u);
    for (std::size_t i = 1; i < run.distances.size(); ++i) {
        EXPECT_LT(run.distances[i], run.distances[i - 1]);
        EXPECT_LT(run.speed_gaps[i], run.speed_gaps[i - 1]);
        // second order in h
        double ratio = run.h_values[i - 1] / run.h_values[i];
        EXPECT_NEAR(std::log(run.speed_gaps[i - 1] / run.speed_gaps[i]) / std::log(ratio), 2.0, 0.1);
    }
    for (const auto& p : run.profiles) EXPECT_LT(p.residual_norm, 1e-10);
}

TEST_F(PulseTest, ContinuationRejectsBadLists)
{
    EXPECT_THROW(continuation_in_h(pl.kernel(), pl.params(), pl.pde_pulse(), {0.25, 0.5}), PreconditionError);
    EXPECT_THROW(continuation_in_h(pl.kernel(), pl.params(), pl.pde_pulse(), {0.5, 0.13}), PreconditionError);
}

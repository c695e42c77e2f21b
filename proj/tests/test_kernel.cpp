#include "fhn/acceptance.hpp"
#include "fhn/kernel.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fhn;
using mp = boost::multiprecision::cpp_dec_float_50;

TEST(Kernel, GaussianNormalisationMatchesHighPrecisionSum)
{
    mp s = 0;
    for (int k = 1; k <= 20; ++k) s += boost::multiprecision::exp(mp(-k * k)) * k * k;
    const double kappa = static_cast<double>(1 / s);
    auto ker = build_gaussian_kernel(20);
    ASSERT_EQ(ker.K(), 20);
    for (int k = 1; k <= 20; ++k) EXPECT_NEAR(ker.alpha(k), kappa * std::exp(-double(k * k)), 1e-16 * kappa);
    double m2 = 0.0;
    for (int k = 1; k <= 20; ++k) m2 += ker.alpha(k) * k * k;
    EXPECT_NEAR(m2, 1.0, 1e-14);
    ASSERT_TRUE(ker.nu.has_value());
    EXPECT_DOUBLE_EQ(*ker.nu, 1.0);
}

TEST(Kernel, DispersionAtPiIsTwiceOddSum)
{
    auto ker = build_gaussian_kernel(20);
    double odd = 0.0;
    for (int k = 1; k <= 20; k += 2) odd += ker.alpha(k);
    EXPECT_NEAR(dispersion_A(ker, std::numbers::pi), 2.0 * odd, 1e-15);
    EXPECT_GT(dispersion_A(ker, std::numbers::pi), 0.0);
}

TEST(Kernel, DispersionSmallZ)
{
    // sum alpha_k k^2 = 1 gives A(z) = z^2 / 2 + O(z^4)
    auto ker = build_gaussian_kernel(20);
    const double z = 1e-3;
    EXPECT_NEAR(dispersion_A(ker, z) / (0.5 * z * z), 1.0, 1e-5);
}

TEST(Kernel, QuarticRenormalisation)
{
    double partial = 0.0;
    for (int k = 1; k <= 100; ++k) partial += 1.0 / (double(k) * k);
    const double factor = 1.0 / ((6.0 / (std::numbers::pi * std::numbers::pi)) * partial);
    auto ker = build_quartic_kernel(100);
    EXPECT_NEAR(ker.alpha(1), 6.0 / (std::numbers::pi * std::numbers::pi) * factor, 1e-15);
    EXPECT_NEAR(ker.alpha(7), ker.alpha(1) / std::pow(7.0, 4), 1e-18);
    double m2 = 0.0;
    for (int k = 1; k <= 100; ++k) m2 += ker.alpha(k) * k * k;
    EXPECT_NEAR(m2, 1.0, 1e-13);
}

TEST(Kernel, QuarticFailsExponentialDecayOnly)
{
    for (int K : {3, 20, 100}) {
        auto rep = verify_assumptions(build_quartic_kernel(K));
        EXPECT_FALSE(rep.exponential_decay_holds);
        EXPECT_TRUE(rep.sum_k2_normalized);
        EXPECT_TRUE(rep.A_positive_on_grid);
        EXPECT_GT(rep.tail_bound, 0.0);
    }
    EXPECT_TRUE(verify_assumptions(build_gaussian_kernel(20)).all());
}

TEST(Kernel, QuarticTailBoundIsTheDroppedSecondMoment)
{
    // the tail sum_{k > K} alpha_k k^2 against a long explicit partial sum
    auto ker = build_quartic_kernel(10);
    const double scale = ker.alpha(1);
    double tail = 0.0;
    for (long k = 11; k <= 2000000; ++k) tail += scale / (double(k) * k);
    tail += scale / 2000000.5; // integral remainder
    EXPECT_NEAR(ker.tail_bound, tail, 1e-12);
}

TEST(Kernel, SmallKRejected)
{
    EXPECT_THROW(build_gaussian_kernel(2), PreconditionError);
    EXPECT_THROW(build_quartic_kernel(1), PreconditionError);
}

TEST(Kernel, NonPositiveDispersionDetected)
{
    // positive second moment, but A(pi) = 2 (alpha_1 + alpha_3) < 0
    auto ker = build_custom_kernel({0.1, 1.0, -0.3});
    EXPECT_LT(dispersion_A(ker, std::numbers::pi), 0.0);
    auto rep = verify_assumptions(ker);
    EXPECT_TRUE(rep.sum_k2_normalized);
    EXPECT_FALSE(rep.A_positive_on_grid);
    EXPECT_THROW(build_custom_kernel({1.0, -0.5}), PreconditionError);
}

TEST(Kernel, JsonRoundTrip)
{
    auto ker = build_gaussian_kernel(20);
    auto back = kernel_from_json(to_json(ker));
    EXPECT_EQ(back.coeffs, ker.coeffs);
    EXPECT_EQ(back.type, "gaussian");
    ASSERT_TRUE(back.nu.has_value());
    auto j = to_json(ker);
    j["K"] = 19;
    EXPECT_THROW(kernel_from_json(j), PreconditionError);
}

TEST(DeltaH, Commensurability)
{
    EXPECT_EQ(commensurate_ratio(0.25, 0.05), 5);
    EXPECT_EQ(commensurate_ratio(0.1, 0.05), 2);
    EXPECT_THROW(commensurate_ratio(0.25, 0.02), PreconditionError);
    auto ker = build_gaussian_kernel(5);
    GridField<double> f{0.02, Eigen::VectorXd::Ones(100), BoundaryMode::periodic};
    EXPECT_THROW(apply_delta_h(ker, f, 0.25), PreconditionError);
}

TEST(DeltaH, ConstantsAreAnnihilatedOnPeriodicGrid)
{
    auto ker = build_gaussian_kernel(20);
    GridField<double> f{0.05, Eigen::VectorXd::Constant(400, 3.0), BoundaryMode::periodic};
    EXPECT_LT(apply_delta_h(ker, f, 0.25).values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DeltaH, ZeroExtensionSeesTheBoundary)
{
    auto ker = build_gaussian_kernel(3);
    GridField<double> f{0.5, Eigen::VectorXd::Ones(10), BoundaryMode::zero_extended};
    auto g = apply_delta_h(ker, f, 0.5);
    // first site misses its left neighbours: -(1/h^2) sum alpha_k
    double s = 0.0;
    for (int k = 1; k <= 3; ++k) s += ker.alpha(k);
    EXPECT_NEAR(g.values(0), -s / 0.25, 1e-14);
    EXPECT_NEAR(g.values(5), 0.0, 1e-14);
    EXPECT_NEAR(g.values(8), -(ker.alpha(2) + ker.alpha(3)) / 0.25, 1e-14);
}

TEST(DeltaH, ExactOnFourierModes)
{
    // Delta_h e^{i eta x} = -(2/h^2) A(h eta) e^{i eta x}
    auto ker = build_gaussian_kernel(20);
    const int n = 256;
    const double d = 0.05, h = 0.25, eta = 2.0 * std::numbers::pi * 3.0 / (n * d);
    GridField<std::complex<double>> f{d, Eigen::VectorXcd(n), BoundaryMode::periodic};
    for (int i = 0; i < n; ++i) f.values(i) = std::polar(1.0, eta * i * d);
    auto g = apply_delta_h(ker, f, h);
    const double sym = -2.0 / (h * h) * dispersion_A(ker, h * eta);
    EXPECT_LT((g.values - sym * f.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DeltaH, SelfAdjointAndNegativeSemidefinite)
{
    auto ker = build_gaussian_kernel(20);
    for (double h : {0.4, 0.2, 0.1}) {
        auto r = delta_identities(ker, 512, 0.1, h);
        EXPECT_LT(r.symmetry_error, 1e-12);
        EXPECT_LT(r.max_eigenvalue / r.scale, 1e-12);
    }
}

TEST(DeltaH, SecondOrderConsistency)
{
    auto ker = build_gaussian_kernel(20);
    double e1 = delta_consistency_error(ker, 512, 0.1, 0.4, 2.0);
    double e2 = delta_consistency_error(ker, 512, 0.1, 0.2, 2.0);
    double e3 = delta_consistency_error(ker, 512, 0.1, 0.1, 2.0);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.05);
    EXPECT_NEAR(std::log2(e2 / e3), 2.0, 0.01);
    // leading term: (h^2 / 12) sum alpha_k k^4 phi''''(0), phi''''(0) = 3 / sigma^4
    double m4 = 0.0;
    for (int k = 1; k <= 20; ++k) m4 += ker.alpha(k) * std::pow(k, 4);
    EXPECT_NEAR(e3, 0.01 / 12.0 * m4 * 3.0 / 16.0, 0.02 * e3);
}

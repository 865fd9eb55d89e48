#include <wpt/energy.hpp>
#include <wpt/numerics.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "oracles/special_values.hpp"

using namespace wpt;
using namespace wpt::numerics;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Poisson tail sum for integer N, the form Q(N,x) replaces
double poisson_tail(int n, double x)
{
    double term = std::exp(-x), sum = 0.0;
    for (int k = 0; k < n; ++k) {
        sum += term;
        term *= x / (k + 1);
    }
    return sum;
}

} // namespace

TEST(ExpIntegral, OrderOneAtOne)
{
    EXPECT_NEAR(exp_integral_en(1.0, 1.0).value, 0.21938393439552027, 1e-15);
}

TEST(ExpIntegral, OrderZeroIsExp)
{
    EXPECT_NEAR(exp_integral_en(0.0, 1.0).value, std::exp(-1.0), 1e-16);
}

TEST(ExpIntegral, RealOrderSmallArgument)
{
    // defining integral at tol 1e-14 (mpmath): order 1.3 at z = 0.0031416
    EXPECT_LT(rel(exp_integral_en(1.3, 0.0031416).value, 2.5698962420094101), 1e-10);
}

TEST(ExpIntegral, DomainErrors)
{
    EXPECT_THROW(exp_integral_en(1.0, 0.0), std::domain_error);
    EXPECT_THROW(exp_integral_en(1.0, -1.0), std::domain_error);
    EXPECT_THROW(exp_integral_en(-0.5, 1.0), std::domain_error);
    EXPECT_THROW(exp_integral_en(std::nan(""), 1.0), std::domain_error);
    EXPECT_THROW(exp_integral_en(1.0, inf), std::domain_error);
}

TEST(ExpIntegral, OracleGrid)
{
    for (const auto& r : oracle::en_table) {
        const auto v = exp_integral_en(r.a, r.b);
        EXPECT_LT(rel(v.value, r.value), 1e-10) << "nu=" << r.a << " z=" << r.b;
        EXPECT_GE(v.est_error, 0.0);
    }
}

TEST(ExpIntegral, MatchesNegativeEi)
{
    for (int i = 0; i < 60; ++i) {
        const double z = 1e-4 * std::pow(50.0 / 1e-4, i / 59.0);
        EXPECT_LT(rel(exp_integral_en(1.0, z).value, -exp_integral_ei(-z).value), 1e-10) << z;
    }
}

TEST(ExpIntegral, ScaledStaysFiniteForLargeArgument)
{
    const double s = exp_integral_en_scaled(2.6, 800.0).value;
    EXPECT_TRUE(std::isfinite(s));
    // e^z E_nu(z) ~ 1/(z + nu) for large z
    EXPECT_NEAR(s * (800.0 + 2.6), 1.0, 1e-5);
}

TEST(Ei, NegativeOne)
{
    EXPECT_NEAR(exp_integral_ei(-1.0).value, -0.21938393439552027, 1e-15);
}

TEST(Ei, MinusPi)
{
    // mpmath quadrature of the defining integral: -0.010906300899273954
    EXPECT_LT(rel(exp_integral_ei(-std::numbers::pi).value, -0.010906300899273954), 1e-12);
    EXPECT_LT(rel(exp_integral_ei(-std::numbers::pi).value, -exp_integral_en(1.0, std::numbers::pi).value), 1e-12);
}

TEST(Ei, FarTailVanishes)
{
    const double v = exp_integral_ei(-50.0).value;
    EXPECT_LT(v, 0.0);
    EXPECT_LT(std::abs(v), 1e-20);
}

TEST(Ei, DomainError)
{
    EXPECT_THROW(exp_integral_ei(0.0), std::domain_error);
    EXPECT_THROW(exp_integral_ei(2.0), std::domain_error);
}

TEST(Ei, OracleGrid)
{
    for (const auto& r : oracle::ei_table) EXPECT_LT(rel(exp_integral_ei(r.x).value, r.value), 1e-10) << r.x;
}

TEST(IncompleteGamma, Examples)
{
    EXPECT_EQ(upper_incomplete_gamma_reg(32.0, 0.0), 1.0);
    EXPECT_NEAR(upper_incomplete_gamma_reg(1.0, 2.0), std::exp(-2.0), 1e-16);
    EXPECT_LT(rel(upper_incomplete_gamma_reg(32.0, 32.0), poisson_tail(32, 32.0)), 1e-12);
}

TEST(IncompleteGamma, IntegerShapeIsPoissonTail)
{
    for (int n : {1, 2, 5, 16, 32, 64})
        for (double x : {0.01, 0.5, 3.0, 20.0, 60.0}) EXPECT_LT(rel(upper_incomplete_gamma_reg(n, x), poisson_tail(n, x)), 1e-12);
}

TEST(IncompleteGamma, DomainErrors)
{
    EXPECT_THROW(upper_incomplete_gamma_reg(0.0, 1.0), std::domain_error);
    EXPECT_THROW(upper_incomplete_gamma_reg(-1.0, 1.0), std::domain_error);
    EXPECT_THROW(upper_incomplete_gamma_reg(2.0, -0.1), std::domain_error);
}

TEST(IncompleteGamma, MonotoneAndStartsAtOne)
{
    for (double s : {0.3, 1.0, 2.7, 16.0, 32.0, 100.0}) {
        EXPECT_EQ(upper_incomplete_gamma_reg(s, 0.0), 1.0);
        double prev = 1.0;
        for (int i = 1; i <= 200; ++i) {
            const double q = upper_incomplete_gamma_reg(s, 0.01 * i * i);
            EXPECT_LE(q, prev);
            prev = q;
        }
    }
}

TEST(IncompleteGamma, OracleGrid)
{
    for (const auto& r : oracle::q_table) EXPECT_LT(rel(upper_incomplete_gamma_reg(r.a, r.b), r.value), 1e-10) << r.a << " " << r.b;
}

TEST(Integrate, ExponentialTail)
{
    EXPECT_NEAR(integrate([](double t) { return std::exp(-t); }, 0.0, inf).value, 1.0, 1e-10);
}

TEST(Integrate, NearestDistancePdf)
{
    const double lam = 0.002;
    auto f = [lam](double r) { return 2.0 * std::numbers::pi * lam * r * std::exp(-std::numbers::pi * lam * r * r); };
    EXPECT_NEAR(integrate(f, 0.0, inf).value, 1.0, 1e-10);
}

TEST(Integrate, ReversedLimitsNegate)
{
    auto f = [](double t) { return t * t; };
    EXPECT_NEAR(integrate(f, 2.0, 0.0).value, -8.0 / 3.0, 1e-12);
}

TEST(Integrate, Additive)
{
    auto f = [](double t) { return std::sin(3.0 * t) * std::exp(-0.2 * t) + 1.0 / (1.0 + t * t); };
    const QuadratureSpec q{1e-10, 0.0, 2000};
    const auto ab = integrate(f, 0.0, 1.7, q), bc = integrate(f, 1.7, 9.0, q), ac = integrate(f, 0.0, 9.0, q);
    EXPECT_NEAR(ab.value + bc.value, ac.value, 1e-10 * std::abs(ac.value) + ab.est_error + bc.est_error + ac.est_error);
}

TEST(Integrate, EndpointSingularity)
{
    const auto v = integrate([](double t) { return 1.0 / std::sqrt(t); }, 0.0, 1.0, QuadratureSpec{1e-12, 0.0, 2000});
    EXPECT_NEAR(v.value, 2.0, 1e-10);
}

TEST(Integrate, NonConvergenceCarriesBestEstimate)
{
    auto f = [](double t) { return std::sin(1.0 / t); };
    try {
        integrate(f, 1e-4, 1.0, QuadratureSpec{1e-12, 0.0, 3});
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        EXPECT_TRUE(std::isfinite(e.best().value));
        EXPECT_GT(e.best().est_error, 0.0);
    }
}

TEST(Integrate, RejectsBadSpec)
{
    auto f = [](double t) { return t; };
    EXPECT_THROW(integrate(f, 0.0, 1.0, QuadratureSpec{0.0, 0.0, 10}), std::invalid_argument);
    EXPECT_THROW(integrate(f, 0.0, 1.0, QuadratureSpec{1e-8, -1.0, 10}), std::invalid_argument);
    EXPECT_THROW(integrate(f, 0.0, 1.0, QuadratureSpec{1e-8, 0.0, 0}), std::invalid_argument);
}

// Directed sub-6 coverage integrand at the energy-coverage defaults against composite
// Simpson on 1e6 intervals.
TEST(Integrate, Sub6CoverageMatchesSimpson)
{
    const NetworkConfig cfg;
    const auto& s = cfg.sub6;
    const double lam = s.bs_density;
    for (double dbm : {-25.0, -10.0}) {
        const double p = dbm_to_watts(dbm);
        auto f = [&](double r) {
            const double x = p * std::pow(r, s.pathloss.alpha) / (s.conversion_eff * s.bs_power * s.pathloss.beta);
            return poisson_tail(s.antennas, x) * 2.0 * std::numbers::pi * lam * r * std::exp(-std::numbers::pi * lam * r * r);
        };
        const int n = 1000000;
        const double hi = 150.0;
        const double h = hi / n;
        double sum = f(0.0) + f(hi);
        for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
        const double simpson = sum * h / 3.0;
        EXPECT_LT(rel(energy::directed_coverage_sub6(cfg, p).value, simpson), 1e-6) << dbm;
    }
}

TEST(Bisect, FindsRoot)
{
    const double r = bisect([](double x) { return x * x * x - 2.0; }, 0.0, 2.0, 1e-14);
    EXPECT_NEAR(r, std::cbrt(2.0), 1e-13);
}

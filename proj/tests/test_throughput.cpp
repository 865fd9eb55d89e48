#include <wpt/mcsim.hpp>
#include <wpt/numerics.hpp>
#include <wpt/throughput.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace wpt;
using namespace wpt::throughput;

namespace {

NetworkConfig fig4(int n, double kappa)
{
    NetworkConfig c = throughput_defaults();
    c.sub6.antennas = n;
    c.sub6.active_ue_density = 0.001;
    c.sub6.bs_density = kappa * 0.001;
    return c;
}

NetworkConfig fig5(double lam_mm)
{
    NetworkConfig c = throughput_defaults();
    c.mmwave.active_ue_density = 0.01;
    c.mmwave.bs_density = lam_mm;
    return c;
}

std::vector<double> logspace(double a, double b, int n)
{
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
    return v;
}

mc::McOptions opts(std::size_t n, std::uint64_t seed)
{
    mc::McOptions o;
    o.trials = n;
    o.seed = seed;
    o.hardened_array_gain = true;
    return o;
}

double sub6_bw(const NetworkConfig& c) { return (1.0 - c.harvest_fraction) * c.sub6.bandwidth; }

} // namespace

TEST(Sub6Exact, TrivialLimits)
{
    NetworkConfig c = fig4(16, 10.0);
    c.harvest_fraction = 1.0 - 1e-12;
    EXPECT_LT(throughput_sub6_exact(c).bits_per_second, 1.0);
    c = fig4(16, 10.0);
    c.sub6.bandwidth = 0.0;
    EXPECT_EQ(throughput_sub6_exact(c).bits_per_second, 0.0);
}

TEST(Sub6Exact, MatchesMonteCarloOnFig4)
{
    for (int n : {8, 16})
        for (double k : {1.0, 10.0, 100.0, 1000.0}) {
            const NetworkConfig c = fig4(n, k);
            const double a = throughput_sub6_exact(c).bits_per_second;
            const auto e = mc::mc_uplink_throughput(c, mc::Tier::sub6, opts(10000, 41), true);
            EXPECT_TRUE(e.contains(a)) << "N=" << n << " kappa=" << k << " exact " << a << " mc " << e.mean << " +- " << e.half_width();
        }
}

TEST(Sub6Exact, LaplaceTableProperties)
{
    const auto tab = build_sub6_cache(fig4(16, 10.0));
    EXPECT_EQ(tab(0.0), 1.0);
    double prev = 1.0;
    for (double v : tab.interference_laplace) {
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(Sub6Lower, ZeroKappaLimit)
{
    EXPECT_LT(throughput_sub6_lower(fig4(16, 1e-12)).bits_per_second, 1e-3);
}

TEST(Sub6Lower, DoublingAntennasAddsOneBit)
{
    const double a = throughput_sub6_lower(fig4(8, 1e4)).bits_per_second;
    const double b = throughput_sub6_lower(fig4(16, 1e4)).bits_per_second;
    const double unit = sub6_bw(fig4(8, 1e4));
    EXPECT_LT(std::abs((b - a) - unit), 1e-3 * unit);
}

TEST(Sub6Lower, AsymptoticKappaSlope)
{
    const NetworkConfig c = fig4(16, 1.0);
    for (double k : {1e3, 1e4, 1e5}) {
        const double d = throughput_sub6_lower(fig4(16, 2.0 * k)).bits_per_second - throughput_sub6_lower(fig4(16, k)).bits_per_second;
        const double want = sub6_bw(c) * c.sub6.pathloss.alpha / 2.0;
        EXPECT_LT(std::abs(d - want), 0.01 * want) << k;
    }
}

TEST(Sub6Lower, StrictlyIncreasing)
{
    for (int n : {4, 8, 16, 32}) {
        double prev = 0.0;
        for (double k : logspace(0.1, 1e4, 30)) {
            const double v = throughput_sub6_lower(fig4(n, k)).bits_per_second;
            EXPECT_GT(v, prev);
            prev = v;
        }
        EXPECT_GT(throughput_sub6_lower(fig4(2 * n, 10.0)).bits_per_second, throughput_sub6_lower(fig4(n, 10.0)).bits_per_second);
    }
}

// Closed form against the exact rate on the Fig. 4 sweep. The closed form has no
// noise term, so this fails at small kappa; kept as stated.
TEST(Sub6Lower, BelowExactOnFig4Sweep)
{
    for (int n : {8, 16})
        for (double k : logspace(1.0, 1000.0, 10)) {
            const NetworkConfig c = fig4(n, k);
            const double lo = throughput_sub6_lower(c).bits_per_second;
            const double ex = throughput_sub6_exact(c).bits_per_second;
            EXPECT_LE(lo, ex) << "N=" << n << " kappa=" << k;
            if (k >= 10.0) {
                EXPECT_LT(std::abs(lo - ex) / ex, 0.10) << "N=" << n << " kappa=" << k;
            }
        }
}

TEST(Sub6Lower, BelowExactWithoutNoise)
{
    for (int n : {8, 16})
        for (double k : logspace(1.0, 1000.0, 5)) {
            NetworkConfig c = fig4(n, k);
            c.noise_figure_db = -300.0;
            EXPECT_LE(throughput_sub6_lower(c).bits_per_second, throughput_sub6_exact(c).bits_per_second) << n << " " << k;
        }
}

TEST(Corollary4, RoundTrip)
{
    const NetworkConfig c = fig4(16, 1.0);
    for (double target : {1e3, 1e6, 5e7, 2e8}) {
        NetworkConfig d = c;
        d.sub6.bs_density = kappa_threshold_sub6(c, target) * d.sub6.active_ue_density;
        EXPECT_NEAR(throughput_sub6_lower(d).bits_per_second / target, 1.0, 1e-9) << target;
    }
    EXPECT_LT(kappa_threshold_sub6(c, 1e-9), 1e-6);
    EXPECT_THROW(kappa_threshold_sub6(c, 0.0), std::domain_error);
}

TEST(Corollary4, MatchesBisection)
{
    const double target = 50e6;
    const double k = kappa_threshold_sub6(fig4(16, 1.0), target);
    const double root = numerics::bisect([&](double x) { return throughput_sub6_lower(fig4(16, x)).bits_per_second - target; }, 1e-3, 1e6, 1e-14);
    EXPECT_NEAR(k / root, 1.0, 1e-9);
}

TEST(MmExact, TrivialLimits)
{
    NetworkConfig c = fig5(0.01);
    c.harvest_fraction = 1.0 - 1e-12;
    EXPECT_LT(throughput_mm_exact(c).bits_per_second, 10.0);
    c = fig5(0.01);
    c.mmwave.blockage = BlockageModel::exponential(0.01);
    EXPECT_THROW(throughput_mm_exact(c), std::domain_error);
}

TEST(MmExact, SparseInterferersApproachNoiseLimited)
{
    NetworkConfig c = fig5(0.01);
    c.mmwave.active_ue_density = 1e-9;
    const double a = throughput_mm_exact(c).bits_per_second;
    const double b = throughput_mm_noise_limited(c).bits_per_second;
    EXPECT_LT(std::abs(a - b) / b, 1e-3);
}

TEST(MmExact, MatchesSinrMonteCarlo)
{
    for (double lam : {1e-3, 1e-2, 1e-1}) {
        const NetworkConfig c = fig5(lam);
        const double a = throughput_mm_exact(c).bits_per_second;
        const auto e = mc::mc_uplink_throughput(c, mc::Tier::mmwave, opts(10000, 42), true);
        EXPECT_TRUE(e.contains(a)) << lam << " exact " << a << " mc " << e.mean;
    }
}

TEST(MmExact, LaplaceTableProperties)
{
    const auto tab = build_mm_cache(fig5(0.01));
    EXPECT_EQ(tab(0.0), 1.0);
    double prev = 1.0;
    for (double v : tab.interference_laplace) {
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(MmNoiseLimited, Limits)
{
    NetworkConfig c = fig5(0.01);
    c.noise_figure_db = 300.0;
    EXPECT_LT(throughput_mm_noise_limited(c).bits_per_second, 1e-3);
}

TEST(MmNoiseLimited, MatchesSnrMonteCarlo)
{
    for (double lam : logspace(1e-3, 0.1, 5)) {
        const NetworkConfig c = fig5(lam);
        const double a = throughput_mm_noise_limited(c).bits_per_second;
        const auto e = mc::mc_uplink_throughput(c, mc::Tier::mmwave, opts(10000, 43), false);
        EXPECT_TRUE(e.contains(a)) << lam << " analytic " << a << " mc " << e.mean;
    }
}

TEST(MmBounds, Ordering)
{
    for (double lam : logspace(1e-3, 0.1, 6))
        for (double ue : {1e-3, 1e-2}) {
            NetworkConfig c = fig5(lam);
            c.mmwave.active_ue_density = ue;
            const double nl = throughput_mm_noise_limited(c).bits_per_second;
            EXPECT_LE(throughput_mm_lower(c).bits_per_second, nl) << lam;
            EXPECT_LE(throughput_mm_exact(c).bits_per_second, nl * (1.0 + 1e-9)) << lam;
        }
}

TEST(MmLower, CloseToNoiseLimitedAtModerateDensity)
{
    for (double lam : logspace(0.01, 0.1, 4)) {
        const NetworkConfig c = fig5(lam);
        const double lo = throughput_mm_lower(c).bits_per_second;
        const double nl = throughput_mm_noise_limited(c).bits_per_second;
        EXPECT_LT((nl - lo) / nl, 0.15) << lam;
    }
}

TEST(MmLower, PhiTildeStrictlyIncreasing)
{
    double prev = -1e300;
    for (double lam = 1e-5; lam <= 10.0; lam *= 2.0) {
        const double v = phi_tilde_mm(fig5(lam)).phi_tilde;
        EXPECT_GT(v, prev) << lam;
        prev = v;
    }
}

TEST(Corollary5, RoundTripAndBisection)
{
    const NetworkConfig c = fig5(0.01);
    for (double target : {1e8, 1e9, 1.5e9}) {
        const double lam = mm_density_threshold(c, target);
        EXPECT_NEAR(throughput_mm_lower(fig5(lam)).bits_per_second / target, 1.0, 1e-6) << target;
    }
    const double lam = mm_density_threshold(c, 1e9);
    const double root = numerics::bisect([&](double x) { return throughput_mm_lower(fig5(x)).bits_per_second - 1e9; }, 1e-8, 10.0, 1e-15);
    EXPECT_NEAR(lam, root, 1e-10);
    EXPECT_EQ(mm_density_threshold(c, 1.0), mm_density_bracket_lo);
    EXPECT_THROW(mm_density_threshold(c, 1e12), OutOfRange);
}

TEST(Bandwidth, LinearScaling)
{
    NetworkConfig a = fig4(16, 30.0);
    NetworkConfig b = a;
    b.sub6.bandwidth *= 2.0;
    b.mmwave.bandwidth *= 2.0;
    // noise power held fixed
    b.noise_figure_db -= 10.0 * std::log10(2.0);
    EXPECT_DOUBLE_EQ(throughput_sub6_lower(b).bits_per_second, 2.0 * throughput_sub6_lower(a).bits_per_second);
    EXPECT_NEAR(throughput_sub6_exact(b).bits_per_second / throughput_sub6_exact(a).bits_per_second, 2.0, 1e-6);
    EXPECT_NEAR(throughput_mm_lower(b).bits_per_second / throughput_mm_lower(a).bits_per_second, 2.0, 1e-12);
    EXPECT_NEAR(throughput_mm_noise_limited(b).bits_per_second / throughput_mm_noise_limited(a).bits_per_second, 2.0, 1e-6);
    EXPECT_NEAR(throughput_mm_exact(b).bits_per_second / throughput_mm_exact(a).bits_per_second, 2.0, 1e-6);
}

TEST(CrossTier, Fig6MmWaveWins)
{
    NetworkConfig c = throughput_defaults();
    c.sub6.active_ue_density = 0.01;
    c.sub6.bs_density = 0.01;
    c.mmwave.active_ue_density = 0.01;
    c.mmwave.bs_density = 0.01;
    const auto v = cross_tier_verdict(c);
    EXPECT_EQ(v.winner_at_cfg, Winner::mmwave);
    // thresholds reproduce the opposing tier's rate through the lower bounds
    NetworkConfig s = c;
    s.sub6.bs_density = v.sub6_needs_kappa * s.sub6.active_ue_density;
    EXPECT_NEAR(throughput_sub6_lower(s).bits_per_second / v.c_mm, 1.0, 1e-9);
    NetworkConfig m = c;
    m.mmwave.bs_density = v.mm_needs_density;
    EXPECT_NEAR(throughput_mm_lower(m).bits_per_second / v.c_sub6, 1.0, 1e-6);
}

TEST(CrossTier, Tie)
{
    EXPECT_EQ(compare_rates(1e9, 1e9 * (1.0 + 5e-4)), Winner::tie);
    EXPECT_EQ(compare_rates(1e9, 2e9), Winner::mmwave);
    EXPECT_EQ(compare_rates(2e9, 1e9), Winner::sub6);
}

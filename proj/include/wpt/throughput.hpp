#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/interpolators/pchip.hpp>

#include "netmodel.hpp"
#include "numerics.hpp"

namespace wpt::throughput {

using numerics::QuadratureSpec;
using numerics::SpecialValue;

class OutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

enum class Method { exact, lower_bound, noise_limited };

inline const char* to_string(Method m)
{
    switch (m) {
    case Method::exact: return "exact";
    case Method::lower_bound: return "lower_bound";
    case Method::noise_limited: return "noise_limited";
    }
    return "?";
}

struct ThroughputResult {
    double bits_per_second = 0.0;
    Method method = Method::exact;
    double quadrature_error = 0.0;
};

/// -ln of an interference Laplace transform, tabulated on log-spaced t and
/// interpolated monotonically in (ln t, ln X).
class LaplaceTable {
public:
    LaplaceTable() = default;

    template <class X>
    LaplaceTable(X&& neg_log, double t_lo, double t_hi, int nodes)
    {
        if (!(t_lo > 0.0) || !(t_hi > t_lo) || nodes < 4) throw std::invalid_argument("LaplaceTable: bad range");
        std::vector<double> lt, lx;
        const double a = std::log(t_lo), b = std::log(t_hi);
        for (int i = 0; i < nodes; ++i) {
            const double u = a + (b - a) * i / (nodes - 1);
            const double t = std::exp(u);
            const double x = std::max(neg_log(t), std::numeric_limits<double>::min());
            t_grid.push_back(t);
            interference_laplace.push_back(std::exp(-x));
            lt.push_back(u);
            lx.push_back(std::log(x));
        }
        lo_x_ = std::exp(lx.front());
        hi_lx_ = lx.back();
        hi_slope_ = (lx[nodes - 1] - lx[nodes - 2]) / (lt[nodes - 1] - lt[nodes - 2]);
        spline_ = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(lt), std::move(lx));
    }

    /// -ln of the transform at t.
    double neg_log(double t) const
    {
        if (t <= 0.0) return 0.0;
        if (t <= t_grid.front()) return lo_x_ * (t / t_grid.front());
        const double u = std::log(t);
        if (t >= t_grid.back()) return std::exp(hi_lx_ + hi_slope_ * (u - std::log(t_grid.back())));
        return std::exp((*spline_)(u));
    }

    double operator()(double t) const { return std::exp(-neg_log(t)); }

    std::vector<double> t_grid;
    std::vector<double> interference_laplace;

private:
    double lo_x_ = 0.0;
    double hi_lx_ = 0.0;
    double hi_slope_ = 1.0;
    std::shared_ptr<boost::math::interpolators::pchip<std::vector<double>>> spline_;
};

/// Cached interference Laplace transform of the sub-6 uplink.
using Sub6IntegrandCache = LaplaceTable;

struct MmThroughputTerms {
    double phi_tilde = 0.0;
    double a1 = 0.0;
    double b1 = 0.0;
};

namespace detail {

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// Finds [t_lo, t_hi] with X(t_lo) ~ x_small and X(t_hi) >= x_big (or t_hi = t_cap).
template <class X>
std::pair<double, double> laplace_range(X&& x, double t_guess, double t_cap, double x_small = 1e-10, double x_big = 45.0)
{
    double lo = t_guess;
    for (int i = 0; i < 200 && x(lo) > x_small; ++i) lo /= 10.0;
    for (int i = 0; i < 200 && x(lo * 10.0) < x_small; ++i) lo *= 10.0;
    double hi = std::max(lo * 10.0, std::min(t_guess, t_cap));
    for (int i = 0; i < 200 && hi < t_cap && x(hi) < x_big; ++i) hi *= 10.0;
    return {lo, std::min(hi, std::max(t_cap, lo * 100.0))};
}

/// Outer Hamdi-form integral int_0^inf h(t)/t dt with t = e^u, truncated where h
/// falls below 1e-12 of its peak.
template <class H>
SpecialValue log_t_integral(H&& h, double t_lo, double t_hi, const QuadratureSpec& q)
{
    const double a = std::log(t_lo) - 5.0, b = std::log(t_hi) + 2.0;
    const int n = std::max(16, static_cast<int>((b - a) / 0.25));
    std::vector<double> us(n + 1), hs(n + 1);
    double peak = 0.0;
    for (int i = 0; i <= n; ++i) {
        us[i] = a + (b - a) * i / n;
        hs[i] = h(std::exp(us[i]));
        peak = std::max(peak, hs[i]);
    }
    if (peak <= 0.0) return {0.0, 0.0};
    int first = 0, last = n;
    while (first < n && hs[first] < 1e-12 * peak) ++first;
    while (last > 0 && hs[last] < 1e-12 * peak) --last;
    const double lo = us[std::max(0, first - 1)];
    const double hi = us[std::min(n, last + 1)];
    auto g = [&](double u) { return h(std::exp(u)); };
    // interior breakpoints every few e-folds keep the panels well resolved
    std::vector<double> pts{lo};
    for (double u = lo + 4.0; u < hi; u += 4.0) pts.push_back(u);
    pts.push_back(hi);
    return numerics::integrate_pieces(g, pts, q);
}

struct Sub6Terms {
    double alpha, beta, ro, a, hbar, k_sig, noise, n;
};

inline Sub6Terms sub6_terms(const NetworkConfig& cfg)
{
    const auto& s = cfg.sub6;
    if (!(s.bs_density > 0.0) || !(s.active_ue_density > 0.0)) throw std::domain_error("sub-6 throughput needs positive densities");
    if (!(s.pathloss.alpha > 2.0)) throw std::domain_error("sub-6 throughput needs alpha > 2");
    const auto d = derive(cfg);
    Sub6Terms t{};
    t.alpha = s.pathloss.alpha;
    t.beta = s.pathloss.beta;
    t.ro = s.pathloss.r_ref;
    t.a = std::numbers::pi * t.ro * t.ro;
    t.hbar = d.hbar_sub6;
    t.n = s.antennas;
    t.k_sig = std::pow(d.kappa_sub6, t.alpha / 2.0) * s.antennas * d.hbar_sub6;
    t.noise = std::pow(s.active_ue_density, -t.alpha / 2.0) * d.noise_power_sub6;
    return t;
}

// int_{r_o}^inf x / (1 + x^alpha / c) dx
inline double shot_kernel(double c, double ro, double alpha)
{
    if (c <= 0.0) return 0.0;
    const double x_split = std::max(ro, std::pow(2.0 * c, 1.0 / alpha));
    double tail = 0.0;
    // series in c x^{-alpha} <= 1/2 beyond the split
    const double ratio = c * std::pow(x_split, -alpha);
    double term = c * std::pow(x_split, 2.0 - alpha);
    for (int k = 0; k < 200; ++k) {
        const double add = term / (alpha * (k + 1) - 2.0);
        tail += (k % 2 == 0) ? add : -add;
        term *= ratio;
        if (std::abs(add) < 1e-17 * std::abs(tail)) break;
    }
    if (x_split <= ro) return tail;
    auto f = [c, alpha](double x) { return x / (1.0 + std::pow(x, alpha) / c); };
    QuadratureSpec q{1e-10, 0.0, 2000};
    return numerics::integrate(f, ro, x_split, q).value + tail;
}

} // namespace detail

/// -ln of the sub-6 interference Laplace transform at t (mapped unit-density picture).
inline double sub6_interference_neg_log(const NetworkConfig& cfg, double t, const QuadratureSpec& q = {1e-8, 0.0, 2000})
{
    const auto s = detail::sub6_terms(cfg);
    if (t <= 0.0) return 0.0;
    auto f = [&](double v) {
        const double ly = s.beta * std::pow((s.a + v) / std::numbers::pi, -s.alpha / 2.0);
        return detail::shot_kernel(t * s.hbar * ly * s.beta, s.ro, s.alpha) * std::exp(-v);
    };
    return 2.0 * std::numbers::pi * numerics::integrate(f, 0.0, detail::inf, q).value;
}

/// Tabulates the sub-6 interference transform over the range the throughput integral needs.
inline Sub6IntegrandCache build_sub6_cache(const NetworkConfig& cfg, int nodes = 64)
{
    const auto s = detail::sub6_terms(cfg);
    auto x = [&](double t) { return sub6_interference_neg_log(cfg, t); };
    // small-t slope: 2 pi hbar beta^2 E[y^-alpha] r_o^{2-alpha}/(alpha-2), with E[y^-alpha] <= r_o^-alpha
    const double slope = 2.0 * std::numbers::pi * s.hbar * s.beta * s.beta * std::pow(s.ro, 2.0 - 2.0 * s.alpha) / (s.alpha - 2.0);
    const double cap = s.noise > 0.0 ? 60.0 / s.noise : 1e300;
    const auto [lo, hi] = detail::laplace_range(x, 1.0 / slope, cap);
    return Sub6IntegrandCache(x, lo, hi, nodes);
}

namespace detail {

inline double sub6_signal_term(const Sub6Terms& s, double t, const QuadratureSpec& q)
{
    // 1 - E[exp(-t K L(r)^2)] over the truncated serving-distance law
    auto f = [&](double v) {
        const double l = s.beta * std::pow((s.a + v) / std::numbers::pi, -s.alpha / 2.0);
        return -std::expm1(-t * s.k_sig * l * l) * std::exp(-v);
    };
    return numerics::integrate(f, 0.0, inf, q).value;
}

} // namespace detail

/// Exact sub-6 uplink throughput (Hamdi form), with an optional prebuilt cache.
inline ThroughputResult throughput_sub6_exact(const NetworkConfig& cfg, const Sub6IntegrandCache* cache = nullptr,
                                              const QuadratureSpec& q = {})
{
    const double tau = cfg.harvest_fraction;
    const double bw = cfg.sub6.bandwidth;
    if (bw == 0.0) return {0.0, Method::exact, 0.0};
    const auto s = detail::sub6_terms(cfg);
    Sub6IntegrandCache local;
    if (!cache) {
        local = build_sub6_cache(cfg);
        cache = &local;
    }
    QuadratureSpec inner{1e-9, 0.0, 2000};
    auto h = [&](double t) {
        const double a = detail::sub6_signal_term(s, t, inner);
        return a * (*cache)(t) * std::exp(-s.noise * t);
    };
    const double l_max = s.beta * std::pow(s.ro, -s.alpha);
    const double t_lo = std::min(cache->t_grid.front(), 1e-3 / (s.k_sig * l_max * l_max));
    const double t_hi = std::min(cache->t_grid.back(), s.noise > 0.0 ? 60.0 / s.noise : detail::inf);
    const SpecialValue v = detail::log_t_integral(h, t_lo, std::max(t_hi, t_lo * 10.0), q);
    const double k = (1.0 - tau) / std::numbers::ln2 * bw;
    return {k * v.value, Method::exact, k * v.est_error};
}

namespace detail {

// argument of log2(1 + .) in the sub-6 closed-form lower bound, without kappa^{alpha/2}
inline double sub6_lower_core(const NetworkConfig& cfg)
{
    const auto& s = cfg.sub6;
    const double alpha = s.pathloss.alpha;
    const double ro = s.pathloss.r_ref;
    if (!(alpha > 2.0)) throw std::domain_error("lower bound needs alpha > 2");
    if (!(ro > 0.0)) throw std::domain_error("lower bound needs r_o > 0");
    const double a = std::numbers::pi * ro * ro;
    // e^{a} zeta_o = e^{a} Ei(-a) - 2 ln r_o, with e^{a}Ei(-a) = -e^{a}E_1(a)
    const double ea_zo = -numerics::exp_integral_en_scaled(1.0, a).value - 2.0 * std::log(ro);
    const double zeta1 = std::pow(ro, 2.0 - alpha) / (alpha - 2.0);
    // e^{a} E_{alpha/2}(a)
    const double ea_en = numerics::exp_integral_en_scaled(alpha / 2.0, a).value;
    return s.antennas * std::exp(alpha * ea_zo) / (2.0 * std::numbers::pi * std::numbers::pi * zeta1 * std::pow(ro, 2.0 - alpha) * ea_en);
}

} // namespace detail

/// Jensen lower bound on the sub-6 throughput (closed form).
inline ThroughputResult throughput_sub6_lower(const NetworkConfig& cfg)
{
    const auto& s = cfg.sub6;
    const double tau = cfg.harvest_fraction;
    const double kappa = kappa_of(s.bs_density, s.active_ue_density);
    const double x = std::pow(kappa, s.pathloss.alpha / 2.0) * detail::sub6_lower_core(cfg);
    return {(1.0 - tau) * s.bandwidth * std::log2(1.0 + x), Method::lower_bound, 0.0};
}

/// Density ratio kappa at which the sub-6 lower bound reaches c_target.
inline double kappa_threshold_sub6(const NetworkConfig& cfg, double c_target)
{
    if (!(c_target > 0.0)) throw std::domain_error("c_target must be > 0");
    const auto& s = cfg.sub6;
    const double bw = (1.0 - cfg.harvest_fraction) * s.bandwidth;
    const double x = std::expm1(c_target / bw * std::numbers::ln2);
    return std::pow(x / detail::sub6_lower_core(cfg), 2.0 / s.pathloss.alpha);
}

namespace detail {

struct MmTerms {
    double lam, lue, alpha, beta, ro, R, a1, b1, q, hbar, gamma, noise, bw;
    std::array<GainAtom, 4> atoms;
};

inline MmTerms mm_terms(const NetworkConfig& cfg)
{
    const auto& m = cfg.mmwave;
    if (!m.blockage.is_los_ball()) throw std::domain_error("mmWave throughput uses the LoS-ball blockage model");
    MmTerms t{};
    t.lam = m.bs_density;
    t.lue = m.active_ue_density;
    t.alpha = m.los.alpha;
    t.beta = m.los.beta;
    t.ro = m.los.r_ref;
    t.R = m.blockage.r_los();
    if (!(t.ro < t.R)) throw std::domain_error("mmWave throughput needs r_o < R_LoS");
    if (!(t.lam > 0.0)) throw std::domain_error("mmWave throughput needs a positive BS density");
    t.a1 = std::numbers::pi * t.lam * t.ro * t.ro;
    t.b1 = std::numbers::pi * t.lam * t.R * t.R;
    t.q = -std::expm1(-(t.b1 - t.a1));
    const auto d = derive(cfg);
    t.hbar = d.hbar_mm;
    t.gamma = d.hbar_mm * m.bs_pattern.main_gain * m.ue_pattern.main_gain * t.beta * t.beta;
    t.noise = d.noise_power_mm;
    t.bw = m.bandwidth;
    t.atoms = gain_distribution(m.bs_pattern, m.ue_pattern);
    return t;
}

// E over the truncated serving law of g(u), u = pi lambda r^2 in [a1, b1], unnormalised (mass q)
template <class G>
double mm_serving_expect(const MmTerms& m, G&& g, const QuadratureSpec& q)
{
    auto f = [&](double u) { return g(u) * std::exp(-(u - m.a1)); };
    return numerics::integrate(f, m.a1, m.b1, q).value;
}

} // namespace detail

/// -ln of the mmWave interference Laplace transform at t.
inline double mm_interference_neg_log(const NetworkConfig& cfg, double t, const QuadratureSpec& q = {1e-8, 0.0, 2000})
{
    const auto m = detail::mm_terms(cfg);
    if (t <= 0.0 || m.lue <= 0.0) return 0.0;
    QuadratureSpec qi{1e-9, 0.0, 2000};
    auto one_minus_psi = [&](double y) {
        const double ly = m.beta * std::pow(y, -m.alpha);
        double acc = 0.0;
        for (const auto& g : m.atoms) {
            if (g.prob == 0.0) continue;
            auto h = [&](double u) {
                const double lz = m.beta * std::pow(u / (std::numbers::pi * m.lam), -m.alpha / 2.0);
                return -std::expm1(-t * m.hbar * lz * g.gain * ly);
            };
            acc += g.prob * detail::mm_serving_expect(m, h, qi);
        }
        return acc * y;
    };
    return 2.0 * std::numbers::pi * m.lue * numerics::integrate(one_minus_psi, m.ro, m.R, q).value;
}

inline LaplaceTable build_mm_cache(const NetworkConfig& cfg, int nodes = 64)
{
    const auto m = detail::mm_terms(cfg);
    auto x = [&](double t) { return mm_interference_neg_log(cfg, t); };
    const double gmax = m.atoms[0].gain;
    const double lmax = m.beta * std::pow(m.ro, -m.alpha);
    const double guess = 1.0 / (m.hbar * gmax * lmax * lmax);
    const auto [lo, hi] = detail::laplace_range(x, guess, 60.0 / m.noise, 1e-10, 1e300);
    return LaplaceTable(x, lo, hi, nodes);
}

/// Exact mmWave uplink throughput (Hamdi form).
inline ThroughputResult throughput_mm_exact(const NetworkConfig& cfg, const LaplaceTable* cache = nullptr,
                                            const QuadratureSpec& q = {})
{
    const double tau = cfg.harvest_fraction;
    if (cfg.mmwave.bandwidth == 0.0) return {0.0, Method::exact, 0.0};
    const auto m = detail::mm_terms(cfg);
    LaplaceTable local;
    const bool interference = m.lue > 0.0;
    if (interference && !cache) {
        local = build_mm_cache(cfg);
        cache = &local;
    }
    QuadratureSpec inner{1e-9, 0.0, 2000};
    auto h = [&](double t) {
        auto g = [&](double u) { return -std::expm1(-t * m.gamma * std::pow(u / (std::numbers::pi * m.lam), -m.alpha)); };
        const double a = detail::mm_serving_expect(m, g, inner);
        const double lap = interference ? (*cache)(t) : 1.0;
        return a * lap * std::exp(-m.noise * t);
    };
    const double s_max = m.gamma * std::pow(m.ro, -2.0 * m.alpha);
    const double t_lo = 1e-3 / s_max;
    const double t_hi = 60.0 / m.noise;
    const SpecialValue v = detail::log_t_integral(h, t_lo, std::max(t_hi, 10.0 * t_lo), q);
    const double k = (1.0 - tau) / std::numbers::ln2 * m.bw;
    return {k * v.value, Method::exact, k * v.est_error};
}

/// Interference-free mmWave throughput.
inline ThroughputResult throughput_mm_noise_limited(const NetworkConfig& cfg, const QuadratureSpec& q = {})
{
    const double tau = cfg.harvest_fraction;
    if (cfg.mmwave.bandwidth == 0.0) return {0.0, Method::noise_limited, 0.0};
    const auto m = detail::mm_terms(cfg);
    auto f = [&](double u) {
        const double snr = m.gamma * std::pow(u / (std::numbers::pi * m.lam), -m.alpha) / m.noise;
        return std::log2(1.0 + snr) * std::exp(-(u - m.a1));
    };
    const SpecialValue v = numerics::integrate(f, m.a1, m.b1, q);
    const double k = (1.0 - tau) * m.bw;
    return {k * v.value, Method::noise_limited, k * v.est_error};
}

/// E[ln S] conditioned on a serving BS inside the LoS ball, plus a1 and b1.
inline MmThroughputTerms phi_tilde_mm(const NetworkConfig& cfg)
{
    const auto m = detail::mm_terms(cfg);
    const double d = m.b1 - m.a1;
    const double w = std::exp(-d);
    // e^{a1} int_{a1}^{b1} ln u e^{-u} du, from scaled E_1
    const double e1a = numerics::exp_integral_en_scaled(1.0, m.a1).value;
    const double e1b = numerics::exp_integral_en_scaled(1.0, m.b1).value;
    const double num = std::log(m.a1) - w * std::log(m.b1) + e1a - w * e1b;
    const double mean_log_u = num / m.q;
    MmThroughputTerms out;
    out.a1 = m.a1;
    out.b1 = m.b1;
    out.phi_tilde = std::log(m.gamma) + m.alpha * std::log(std::numbers::pi * m.lam) - m.alpha * mean_log_u;
    return out;
}

/// Jensen lower bound on the noise-limited mmWave throughput.
inline ThroughputResult throughput_mm_lower(const NetworkConfig& cfg)
{
    const double tau = cfg.harvest_fraction;
    if (cfg.mmwave.bandwidth == 0.0) return {0.0, Method::lower_bound, 0.0};
    const auto m = detail::mm_terms(cfg);
    const auto p = phi_tilde_mm(cfg);
    const double c = (1.0 - tau) * m.bw * m.q * std::log2(1.0 + std::exp(p.phi_tilde) / m.noise);
    return {c, Method::lower_bound, 0.0};
}

inline constexpr double mm_density_bracket_lo = 1e-8;
inline constexpr double mm_density_bracket_hi = 10.0;

/// mmWave BS density at which the lower bound reaches c_target.
inline double mm_density_threshold(const NetworkConfig& cfg, double c_target)
{
    if (!(c_target > 0.0)) throw std::domain_error("c_target must be > 0");
    auto at = [&](double lam) {
        NetworkConfig c = cfg;
        c.mmwave.bs_density = lam;
        return throughput_mm_lower(c).bits_per_second;
    };
    const double lo = mm_density_bracket_lo, hi = mm_density_bracket_hi;
    if (at(lo) >= c_target) return lo;
    if (at(hi) < c_target) throw OutOfRange("target throughput not reachable below 10 BS/m^2");
    return numerics::bisect([&](double lam) { return at(lam) - c_target; }, lo, hi, 1e-12);
}

enum class Winner { sub6, mmwave, tie };

inline const char* to_string(Winner w)
{
    switch (w) {
    case Winner::sub6: return "sub6";
    case Winner::mmwave: return "mmwave";
    case Winner::tie: return "tie";
    }
    return "?";
}

struct CrossTierVerdict {
    double sub6_needs_kappa = 0.0;
    double mm_needs_density = 0.0;
    Winner winner_at_cfg = Winner::tie;
    double c_sub6 = 0.0;
    double c_mm = 0.0;
};

inline Winner compare_rates(double c_sub6, double c_mm)
{
    if (std::abs(c_sub6 - c_mm) <= 1e-3 * std::max(c_sub6, c_mm)) return Winner::tie;
    return c_sub6 > c_mm ? Winner::sub6 : Winner::mmwave;
}

inline CrossTierVerdict cross_tier_verdict(const NetworkConfig& cfg)
{
    CrossTierVerdict v;
    v.c_sub6 = throughput_sub6_exact(cfg).bits_per_second;
    v.c_mm = throughput_mm_exact(cfg).bits_per_second;
    v.sub6_needs_kappa = kappa_threshold_sub6(cfg, v.c_mm);
    try {
        v.mm_needs_density = mm_density_threshold(cfg, v.c_sub6);
    } catch (const OutOfRange&) {
        v.mm_needs_density = std::numeric_limits<double>::infinity();
    }
    v.winner_at_cfg = compare_rates(v.c_sub6, v.c_mm);
    return v;
}

} // namespace wpt::throughput

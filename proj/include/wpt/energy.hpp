#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "mcsim.hpp"
#include "netmodel.hpp"
#include "numerics.hpp"

namespace wpt::energy {

using numerics::QuadratureSpec;
using numerics::SpecialValue;

struct CoverageCurve {
    std::vector<double> thresholds;
    std::vector<double> probabilities;
    std::vector<double> quadrature_error;
};

struct AssociationProbs {
    double p_sub6 = 0.0;
    double p_mm_los = 0.0;
    double p_mm_nlos = 0.0;
};

struct AmbientMoments {
    double mean = 0.0;
    double variance = 0.0;
    /// Var of the conditional mean given the serving distance; the closed-form
    /// variance leaves this out.
    double variance_exclusion_term = 0.0;
};

struct DensityBound {
    double value = 0.0;
    bool unbounded = false;
};

struct VarthetaEstimate {
    double value = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error(std::string(what) + " must be > 0");
}

inline constexpr double inf = std::numeric_limits<double>::infinity();

// NLoS mmWave links carry power except under the LoS ball.
inline bool nlos_active(const MmWaveTier& m) { return !m.blockage.is_los_ball(); }

inline double nlos_moment(const MmWaveTier& m, double y)
{
    return nlos_active(m) ? nlos_second_moment(m.blockage, y) : 0.0;
}

// Smallest y on a doubling grid beyond which g is negligible, assuming g eventually decays.
template <class G>
double decay_point(G&& g, double y0, double y_cap)
{
    double peak = 0.0;
    double y = y0;
    for (int i = 0; i < 200 && y < y_cap; ++i, y *= 1.5) {
        const double v = g(y);
        peak = std::max(peak, v);
        if (peak > 0.0 && v < 1e-16 * peak && i > 4) return y;
    }
    return std::min(y, y_cap);
}

} // namespace detail

/// Pr(directed sub-6 harvested power > p_th) with N-antenna MRT and nearest-BS association.
inline SpecialValue directed_coverage_sub6(const NetworkConfig& cfg, double p_th, const QuadratureSpec& q = {})
{
    detail::require_positive(p_th, "p_th");
    const auto& s = cfg.sub6;
    if (s.antennas < 1) throw std::domain_error("antennas must be >= 1");
    if (s.bs_density <= 0.0) return {0.0, 0.0};
    const double pl = std::numbers::pi * s.bs_density;
    const double c = p_th / (s.conversion_eff * s.bs_power * s.pathloss.beta);
    const double n = s.antennas;
    const double half = s.pathloss.alpha / 2.0;
    // u = pi*lambda*r^2 so the serving-distance density becomes e^{-u}
    auto f = [&](double u) { return numerics::upper_incomplete_gamma_reg(n, std::pow(u / pl, half) * c) * std::exp(-u); };
    const double u_mid = pl * std::pow(n / c, 1.0 / half);
    std::vector<double> pts{0.0};
    if (u_mid > 0.0 && u_mid < 700.0) pts.push_back(u_mid);
    pts.push_back(detail::inf);
    return numerics::integrate_pieces(f, pts, q);
}

/// Large-N closed form 1 - exp(-pi*lambda*(eta P beta N / p_th)^{2/alpha}).
inline double directed_coverage_sub6_large_n(const NetworkConfig& cfg, double p_th)
{
    detail::require_positive(p_th, "p_th");
    const auto& s = cfg.sub6;
    const double x = s.conversion_eff * s.bs_power * s.pathloss.beta * s.antennas / p_th;
    return -std::expm1(-std::numbers::pi * s.bs_density * std::pow(x, 2.0 / s.pathloss.alpha));
}

/// Sub-6 density above which the large-N coverage exceeds epsilon.
inline double required_sub6_density(const NetworkConfig& cfg, double p_th, double epsilon)
{
    detail::require_positive(p_th, "p_th");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("epsilon must lie in (0, 1)");
    const auto& s = cfg.sub6;
    const double omega = -std::log1p(-epsilon) / std::numbers::pi;
    const double x = s.conversion_eff * s.bs_power * s.pathloss.beta * s.antennas / p_th;
    return omega * std::pow(x, -2.0 / s.pathloss.alpha);
}

/// Pr(directed mmWave harvested power > p_th) under min-pathloss association.
inline SpecialValue directed_coverage_mm(const NetworkConfig& cfg, double p_th, const QuadratureSpec& q = {})
{
    detail::require_positive(p_th, "p_th");
    const auto& m = cfg.mmwave;
    const double lam = m.bs_density;
    if (lam <= 0.0) return {0.0, 0.0};
    const auto& b = m.blockage;
    const double gain = m.conversion_eff * m.bs_power * m.bs_pattern.main_gain * m.ue_pattern.main_gain;
    const double aL = m.los.alpha, aN = m.nlos.alpha, bL = m.los.beta, bN = m.nlos.beta;
    const double sL = std::pow(gain * bL / p_th, 1.0 / aL);
    const double sN = std::pow(gain * bN / p_th, 1.0 / aN);
    const double k = 2.0 * std::numbers::pi * lam;
    const bool nl = detail::nlos_active(m);

    auto los_term = [&](double y) {
        const double equiv = std::pow(bN / bL, 1.0 / aN) * std::pow(y, aL / aN);
        const double e = los_second_moment(b, y) + detail::nlos_moment(m, equiv);
        return k * y * los_probability(b, y) * std::exp(-k * e);
    };
    auto nlos_term = [&](double y) {
        const double equiv = std::pow(bL / bN, 1.0 / aL) * std::pow(y, aN / aL);
        const double e = los_second_moment(b, equiv) + nlos_second_moment(b, y);
        return k * y * (1.0 - los_probability(b, y)) * std::exp(-k * e);
    };

    const double y0 = 0.5 / std::sqrt(std::numbers::pi * lam);
    SpecialValue total{0.0, 0.0};
    {
        double top = sL;
        if (b.is_los_ball()) top = std::min(top, b.r_los());
        else top = std::min(top, detail::decay_point(los_term, y0, 1e12));
        std::vector<double> pts{0.0, std::min(top, y0), top};
        auto r = numerics::integrate_pieces(los_term, pts, q);
        total.value += r.value;
        total.est_error += r.est_error;
    }
    if (nl) {
        const double top = std::min(sN, detail::decay_point(nlos_term, y0, 1e12));
        std::vector<double> pts{0.0, std::min(top, y0), top};
        auto r = numerics::integrate_pieces(nlos_term, pts, q);
        total.value += r.value;
        total.est_error += r.est_error;
    }
    return total;
}

/// LoS-ball closed form 1 - exp(-pi*lambda*xi^2), xi = min(R_LoS, LoS reach).
inline double directed_coverage_mm_los_ball(const NetworkConfig& cfg, double p_th)
{
    detail::require_positive(p_th, "p_th");
    const auto& m = cfg.mmwave;
    if (!m.blockage.is_los_ball()) throw std::domain_error("closed form needs LoS-ball blockage");
    const double gain = m.conversion_eff * m.bs_power * m.bs_pattern.main_gain * m.ue_pattern.main_gain;
    const double xi = std::min(m.blockage.r_los(), std::pow(gain * m.los.beta / p_th, 1.0 / m.los.alpha));
    return -std::expm1(-std::numbers::pi * m.bs_density * xi * xi);
}

/// Largest sub-6 density for which mmWave directed coverage still wins.
inline DensityBound sub6_density_for_mm_dominance(const NetworkConfig& cfg, double p_th, const QuadratureSpec& q = {})
{
    detail::require_positive(p_th, "p_th");
    const auto& s = cfg.sub6;
    const double x = std::pow(s.conversion_eff * s.bs_power * s.pathloss.beta * s.antennas / p_th, 2.0 / s.pathloss.alpha);
    const auto& m = cfg.mmwave;
    if (m.blockage.is_los_ball()) {
        const double gain = m.conversion_eff * m.bs_power * m.bs_pattern.main_gain * m.ue_pattern.main_gain;
        const double xi = std::min(m.blockage.r_los(), std::pow(gain * m.los.beta / p_th, 1.0 / m.los.alpha));
        return {m.bs_density * xi * xi / x, false};
    }
    const double psi = directed_coverage_mm(cfg, p_th, q).value;
    // the LoS and NLoS integrals are summed, so "exactly 1" is only reachable to a few ulps
    if (psi >= 1.0 - 64.0 * std::numeric_limits<double>::epsilon()) return {detail::inf, true};
    return {-std::log1p(-psi) / (std::numbers::pi * x), false};
}

/// Closed-form mean and variance of the sub-6 ambient sum (per unit eta*P).
inline AmbientMoments ambient_moments_sub6(const NetworkConfig& cfg)
{
    const auto& s = cfg.sub6;
    const double a = s.pathloss.alpha;
    const double lam = s.bs_density;
    const double ro = s.pathloss.r_ref;
    const double beta = s.pathloss.beta;
    if (!(a > 2.0)) throw std::domain_error("ambient moments need alpha > 2");
    detail::require_positive(lam, "sub6 density");
    detail::require_positive(ro, "r_o");
    if (beta == 0.0) return {0.0, 0.0, 0.0};
    const double pl = std::numbers::pi * lam;
    const double z = pl * ro * ro;
    const double near = ro * ro + std::expm1(-z) / pl;  // r_o^2 - (1 - e^{-z})/(pi lambda)
    const double e_half = numerics::exp_integral_en(a / 2.0, z).value;
    const double e_full = numerics::exp_integral_en(a, z).value;
    AmbientMoments out;
    out.mean = beta * 2.0 * pl * (std::pow(ro, -a) / 2.0 * near + std::pow(ro, 2.0 - a) / (a - 2.0) - std::pow(ro, 2.0 - a) / 2.0 * e_half);
    out.variance = beta * beta * 4.0 * pl
                   * (std::pow(ro, -2.0 * a) / 2.0 * near + std::pow(ro, 2.0 - 2.0 * a) / (2.0 * a - 2.0)
                      - std::pow(ro, 2.0 - 2.0 * a) / 2.0 * e_full);

    // conditional mean m(b) of the sum given the serving BS at distance b
    auto inner = [&](double bdist) {
        // int_0^b g(t) (1 - e^{-pi lam t^2}) 2 pi lam t dt with g = beta max(r_o, t)^{-alpha}
        const double c = std::min(bdist, ro);
        double v = std::pow(ro, -a) * (pl * c * c + std::expm1(-pl * c * c));
        if (bdist > ro) {
            const double eb = numerics::exp_integral_en(a / 2.0, pl * bdist * bdist).value;
            v += 2.0 * pl * ((std::pow(ro, 2.0 - a) - std::pow(bdist, 2.0 - a)) / (a - 2.0)
                             - 0.5 * (std::pow(ro, 2.0 - a) * e_half - std::pow(bdist, 2.0 - a) * eb));
        }
        return beta * v;
    };
    auto outer = [&](double u) {
        const double bdist = std::sqrt(u / pl);
        return beta * std::pow(std::max(ro, bdist), -a) * inner(bdist) * std::exp(-u);
    };
    QuadratureSpec q{1e-9, 0.0, 2000};
    const double d = 2.0 * numerics::integrate_pieces(outer, {0.0, z, detail::inf}, q).value;
    out.variance_exclusion_term = std::max(0.0, d);
    return out;
}

/// Chebyshev upper bound on the sub-6 ambient coverage probability.
inline double ambient_coverage_bound_sub6(const NetworkConfig& cfg, double p_th)
{
    detail::require_positive(p_th, "p_th");
    const auto mom = ambient_moments_sub6(cfg);
    const double x = p_th / (cfg.sub6.conversion_eff * cfg.sub6.bs_power);
    if (x <= mom.mean) return 1.0;
    const double gap = x - mom.mean;
    return std::min(mom.variance / (gap * gap), 1.0);
}

namespace detail {

struct VarthetaCache {
    std::shared_mutex mutex;
    std::map<std::string, VarthetaEstimate> entries;
};

inline VarthetaCache& vartheta_cache()
{
    static VarthetaCache cache;
    return cache;
}

inline std::string vartheta_key(const NetworkConfig& cfg, double eps, std::size_t trials, std::uint64_t seed)
{
    const auto& m = cfg.mmwave;
    std::ostringstream os;
    os.precision(17);
    os << eps << '|' << trials << '|' << seed << '|' << m.los.alpha << '|' << m.los.beta << '|' << m.los.r_ref << '|'
       << m.nlos.alpha << '|' << m.nlos.beta << '|' << m.bs_pattern.main_gain << '|' << m.bs_pattern.side_gain << '|'
       << m.bs_pattern.beamwidth << '|' << m.ue_pattern.main_gain << '|' << m.ue_pattern.side_gain << '|'
       << m.ue_pattern.beamwidth << '|' << (m.blockage.is_los_ball() ? 'B' : 'E') << '|'
       << (m.blockage.is_los_ball() ? m.blockage.r_los() : m.blockage.rho());
    return os.str();
}

} // namespace detail

/// Quantile constant: value exceeded with probability epsilon by the unit-density LoS
/// ambient sum. Cached per (config, epsilon, trials, seed).
inline VarthetaEstimate estimate_vartheta_mm(const NetworkConfig& cfg, double epsilon, std::size_t trials, std::uint64_t seed)
{
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::domain_error("epsilon must lie in (0, 1]");
    mc::check_trials(trials, 10000);
    if (epsilon == 1.0) return {0.0, 0.0, 0.0, trials, seed};
    auto& cache = detail::vartheta_cache();
    const std::string key = detail::vartheta_key(cfg, epsilon, trials, seed);
    {
        std::shared_lock lock(cache.mutex);
        auto it = cache.entries.find(key);
        if (it != cache.entries.end()) return it->second;
    }
    mc::McOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    auto sample = mc::mc_unit_density_los_ambient(cfg, opt).samples();
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(trials);
    const double centre = (1.0 - epsilon) * n;
    const double spread = mc::z99 * std::sqrt(n * epsilon * (1.0 - epsilon));
    auto at = [&](double pos) {
        const long i = std::clamp(static_cast<long>(std::ceil(pos)) - 1, 0L, static_cast<long>(trials) - 1);
        return sample[static_cast<std::size_t>(i)];
    };
    VarthetaEstimate est{at(centre), at(centre - spread), at(centre + spread), trials, seed};
    if (!(est.value > 0.0) || (est.ci_hi - est.ci_lo) / est.value > 0.10)
        throw mc::InsufficientTrials("vartheta quantile CI wider than 10% of the estimate; raise trials");
    {
        std::unique_lock lock(cache.mutex);
        cache.entries[key] = est;
    }
    return est;
}

/// mmWave density above which the LoS ambient coverage exceeds the epsilon behind vartheta.
inline double required_mm_density_ambient(const NetworkConfig& cfg, double p_th, double vartheta)
{
    detail::require_positive(p_th, "p_th");
    if (!(vartheta >= 0.0)) throw std::domain_error("vartheta must be >= 0");
    if (vartheta == 0.0) return 0.0;
    const auto& m = cfg.mmwave;
    return std::pow(p_th / (vartheta * m.conversion_eff * m.bs_power), 2.0 / m.los.alpha);
}

struct AmbientDominance {
    double epsilon = 0.0;
    VarthetaEstimate vartheta;
    double mm_density = 0.0;
};

/// Corollary-3 path: epsilon from the sub-6 Chebyshev bound, then the mmWave density.
inline AmbientDominance required_mm_density_vs_sub6_ambient(const NetworkConfig& cfg, double p_th, std::size_t trials,
                                                            std::uint64_t seed)
{
    AmbientDominance out;
    out.epsilon = ambient_coverage_bound_sub6(cfg, p_th);
    out.vartheta = estimate_vartheta_mm(cfg, out.epsilon, trials, seed);
    out.mm_density = out.vartheta.value > 0.0 ? required_mm_density_ambient(cfg, p_th, out.vartheta.value) : detail::inf;
    return out;
}

namespace detail {

struct AssocTerms {
    double varpi, bmu, amu, bL, aL, bN, aN, lmu, lmm;
};

inline AssocTerms assoc_terms(const NetworkConfig& cfg)
{
    const auto& s = cfg.sub6;
    const auto& m = cfg.mmwave;
    const double varpi = m.conversion_eff * m.bs_power * m.bs_pattern.main_gain * m.ue_pattern.main_gain
                         / (s.conversion_eff * s.bs_power * s.antennas);
    return {varpi, s.pathloss.beta, s.pathloss.alpha, m.los.beta, m.los.alpha, m.nlos.beta, m.nlos.alpha, s.bs_density, m.bs_density};
}

} // namespace detail

/// Propositions in their general form, valid for either blockage law.
inline AssociationProbs association_probabilities_general(const NetworkConfig& cfg, const QuadratureSpec& q = {})
{
    const auto t = detail::assoc_terms(cfg);
    const auto& m = cfg.mmwave;
    const auto& b = m.blockage;
    if (t.lmm <= 0.0) return {1.0, 0.0, 0.0};
    const double kmm = 2.0 * std::numbers::pi * t.lmm;
    AssociationProbs out;
    if (t.lmu > 0.0) {
        const double plmu = std::numbers::pi * t.lmu;
        const double cL = std::pow(t.varpi * t.bL / t.bmu, 1.0 / t.aL);
        const double cN = std::pow(t.varpi * t.bN / t.bmu, 1.0 / t.aN);
        auto f = [&](double u) {
            const double r = std::sqrt(u / plmu);
            const double rl = cL * std::pow(r, t.amu / t.aL);
            const double rn = cN * std::pow(r, t.amu / t.aN);
            return std::exp(-kmm * (los_second_moment(b, rl) + detail::nlos_moment(m, rn)) - u);
        };
        std::vector<double> pts{0.0};
        if (b.is_los_ball()) {
            // u at which the LoS reach hits R_LoS
            const double r_hit = std::pow(b.r_los() / cL, t.aL / t.amu);
            pts.push_back(plmu * r_hit * r_hit);
        }
        pts.push_back(detail::inf);
        std::sort(pts.begin(), pts.end());
        out.p_sub6 = numerics::integrate_pieces(f, pts, q).value;
    }
    {
        const double plmm = std::numbers::pi * t.lmm;
        const double cN = std::pow(t.bN / t.bL, 1.0 / t.aN);
        const double cA = t.lmu > 0.0 ? std::numbers::pi * std::pow(t.bmu / (t.varpi * t.bL), 2.0 / t.amu) : 0.0;
        auto f = [&](double v) {
            const double r = std::sqrt(v / plmm);
            const double rn = cN * std::pow(r, t.aL / t.aN);
            const double area = cA > 0.0 ? t.lmu * cA * std::pow(r, 2.0 * t.aL / t.amu) : 0.0;
            return los_probability(b, r) * std::exp(-kmm * (los_second_moment(b, r) + detail::nlos_moment(m, rn)) - area);
        };
        if (b.is_los_ball()) {
            const double v_top = plmm * b.r_los() * b.r_los();
            out.p_mm_los = numerics::integrate(f, 0.0, v_top, q).value;
        } else {
            out.p_mm_los = numerics::integrate(f, 0.0, detail::inf, q).value;
        }
    }
    out.p_mm_nlos = std::max(0.0, 1.0 - out.p_sub6 - out.p_mm_los);
    if (!detail::nlos_active(m)) out.p_mm_nlos = 0.0;
    return out;
}

/// NLoS association probability by its own integral (the public result uses the complement).
inline double association_nlos_direct(const NetworkConfig& cfg, const QuadratureSpec& q = {})
{
    const auto t = detail::assoc_terms(cfg);
    const auto& m = cfg.mmwave;
    const auto& b = m.blockage;
    if (t.lmm <= 0.0 || !detail::nlos_active(m)) return 0.0;
    const double kmm = 2.0 * std::numbers::pi * t.lmm;
    const double plmm = std::numbers::pi * t.lmm;
    const double cL = std::pow(t.bL / t.bN, 1.0 / t.aL);
    const double cA = t.lmu > 0.0 ? std::numbers::pi * std::pow(t.bmu / (t.varpi * t.bN), 2.0 / t.amu) : 0.0;
    auto f = [&](double v) {
        const double r = std::sqrt(v / plmm);
        const double rl = cL * std::pow(r, t.aN / t.aL);
        const double area = cA > 0.0 ? t.lmu * cA * std::pow(r, 2.0 * t.aN / t.amu) : 0.0;
        return (1.0 - los_probability(b, r)) * std::exp(-kmm * (los_second_moment(b, rl) + nlos_second_moment(b, r)) - area);
    };
    return numerics::integrate(f, 0.0, detail::inf, q).value;
}

/// Simplified LoS-ball form: only LoS links inside R_LoS carry mmWave power.
inline AssociationProbs association_probabilities_los_ball(const NetworkConfig& cfg, const QuadratureSpec& q = {})
{
    const auto t = detail::assoc_terms(cfg);
    const auto& b = cfg.mmwave.blockage;
    if (!b.is_los_ball()) throw std::domain_error("simplified association needs LoS-ball blockage");
    if (t.lmm <= 0.0) return {1.0, 0.0, 0.0};
    if (t.lmu <= 0.0) return {0.0, -std::expm1(-std::numbers::pi * t.lmm * b.r_los() * b.r_los()), 0.0};
    const double plmu = std::numbers::pi * t.lmu;
    const double cL = std::pow(t.varpi * t.bL / t.bmu, 1.0 / t.aL);
    const double R = b.r_los();
    auto f = [&](double u) {
        const double r = std::sqrt(u / plmu);
        const double reach = std::min(cL * std::pow(r, t.amu / t.aL), R);
        return std::exp(-std::numbers::pi * t.lmm * reach * reach - u);
    };
    const double r_hit = std::pow(R / cL, t.aL / t.amu);
    std::vector<double> pts{0.0, plmu * r_hit * r_hit, detail::inf};
    std::sort(pts.begin(), pts.end());
    AssociationProbs out;
    out.p_sub6 = numerics::integrate_pieces(f, pts, q).value;
    out.p_mm_los = 1.0 - out.p_sub6;
    out.p_mm_nlos = 0.0;
    return out;
}

inline AssociationProbs association_probabilities(const NetworkConfig& cfg, const QuadratureSpec& q = {})
{
    if (cfg.sub6.bs_density <= 0.0 && cfg.mmwave.bs_density <= 0.0)
        throw std::domain_error("association needs a positive density in at least one tier");
    if (cfg.mmwave.blockage.is_los_ball()) return association_probabilities_los_ball(cfg, q);
    return association_probabilities_general(cfg, q);
}

/// Evaluates a coverage function on a threshold grid.
template <class F>
CoverageCurve coverage_curve(F&& coverage, const std::vector<double>& thresholds)
{
    CoverageCurve c;
    c.thresholds = thresholds;
    for (double p : thresholds) {
        const SpecialValue v = coverage(p);
        c.probabilities.push_back(std::clamp(v.value, 0.0, 1.0));
        c.quadrature_error.push_back(v.est_error);
    }
    return c;
}

} // namespace wpt::energy

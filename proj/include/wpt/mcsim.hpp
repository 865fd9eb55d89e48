#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "netmodel.hpp"
#include "numerics.hpp"
#include "random.hpp"

namespace wpt::mc {

class InsufficientTrials : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double z99 = 2.5758293035489004;
inline constexpr std::size_t min_trials = 1000;

struct Point {
    double x;
    double y;
};

struct Deployment {
    std::vector<Point> bs_points;
    std::vector<Point> ue_points;
    double window_radius = 0.0;
    std::uint64_t seed = 0;
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t seed = 0;

    bool contains(double v) const { return v >= ci_lo && v <= ci_hi; }
    double half_width() const { return 0.5 * (ci_hi - ci_lo); }
};

inline MCEstimate make_estimate(double mean, double se, std::size_t n, std::uint64_t seed)
{
    se = std::max(0.0, se);
    return {mean, se, n, mean - z99 * se, mean + z99 * se, seed};
}

/// 99% Wilson score interval for a binomial proportion. Unlike the normal interval it
/// keeps its coverage when hits are rare or absent.
inline MCEstimate proportion_estimate(double hits, std::size_t n, std::uint64_t seed)
{
    const double nn = static_cast<double>(std::max<std::size_t>(1, n));
    const double ph = hits / nn;
    const double z2 = z99 * z99;
    const double centre = (ph + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
    const double half = z99 * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
    MCEstimate e = make_estimate(ph, std::sqrt(ph * (1.0 - ph) / nn), n, seed);
    e.ci_lo = std::max(0.0, centre - half);
    e.ci_hi = std::min(1.0, centre + half);
    return e;
}

struct FadingDraw {
    double serving_gain = 0.0;
    std::vector<double> interferer_gains;
};

enum class Tier { sub6, mmwave };

struct McOptions {
    std::size_t trials = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    double window_scale = 1.0;
    /// use ||h||^2 = N instead of a Gamma(N,1) draw on the sub-6 serving link
    bool hardened_array_gain = false;
    /// count NLoS BSs in the mmWave ambient sum
    bool include_nlos_ambient = true;
};

inline void check_trials(std::size_t trials, std::size_t minimum = min_trials)
{
    if (trials < minimum)
        throw InsufficientTrials("need at least " + std::to_string(minimum) + " trials, got " + std::to_string(trials));
}

/// HPPP of the given density on a disc centred at the origin.
template <class Rng>
Deployment sample_hppp(double density, double window_radius, Rng& rng)
{
    if (!(density >= 0.0) || !(window_radius > 0.0)) throw std::domain_error("sample_hppp: bad density or radius");
    Deployment d;
    d.window_radius = window_radius;
    if (density == 0.0) return d;
    std::poisson_distribution<long> count(density * std::numbers::pi * window_radius * window_radius);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const long n = count(rng);
    d.bs_points.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double r = window_radius * std::sqrt(u(rng));
        const double phi = 2.0 * std::numbers::pi * u(rng);
        d.bs_points.push_back({r * std::cos(phi), r * std::sin(phi)});
    }
    return d;
}

template <class Rng>
FadingDraw draw_fading(int antennas, std::size_t interferers, Rng& rng)
{
    std::gamma_distribution<double> gam(static_cast<double>(antennas), 1.0);
    std::exponential_distribution<double> ex(1.0);
    FadingDraw f;
    f.serving_gain = gam(rng);
    f.interferer_gains.resize(interferers);
    for (auto& g : f.interferer_gains) g = ex(rng);
    return f;
}

/// Sample with optional stratification. Every sample carries a stratum id;
/// estimates are weighted by stratum probabilities.
class EmpiricalCcdf {
public:
    EmpiricalCcdf() = default;

    explicit EmpiricalCcdf(std::vector<double> samples, std::uint64_t seed = 0)
        : samples_(std::move(samples)), stratum_(samples_.size(), 0), prob_{1.0}, seed_(seed)
    {
        finish();
    }

    EmpiricalCcdf(std::vector<double> samples, std::vector<int> stratum, std::vector<double> stratum_prob,
                  std::uint64_t seed = 0)
        : samples_(std::move(samples)), stratum_(std::move(stratum)), prob_(std::move(stratum_prob)), seed_(seed)
    {
        if (stratum_.size() != samples_.size()) throw std::invalid_argument("EmpiricalCcdf: stratum size mismatch");
        finish();
    }

    std::size_t size() const { return samples_.size(); }
    /// Samples in trial order.
    const std::vector<double>& samples() const { return samples_; }
    std::uint64_t seed() const { return seed_; }

    /// Stratified estimate of E[h(X)] with its standard error.
    template <class H>
    MCEstimate estimate(H&& h) const
    {
        const std::size_t k = prob_.size();
        std::vector<double> s1(k, 0.0), s2(k, 0.0);
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            const double v = h(samples_[i]);
            s1[stratum_[i]] += v;
            s2[stratum_[i]] += v * v;
        }
        double mean = 0.0, var = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (count_[j] == 0) continue;
            const double n = static_cast<double>(count_[j]);
            const double m = s1[j] / n;
            mean += prob_[j] * m;
            if (count_[j] > 1) {
                const double sv = std::max(0.0, (s2[j] - n * m * m) / (n - 1.0));
                var += prob_[j] * prob_[j] * sv / n;
            }
        }
        return make_estimate(mean, std::sqrt(var), samples_.size(), seed_);
    }

    MCEstimate ccdf(double threshold) const
    {
        auto hit = [threshold](double x) { return x > threshold ? 1.0 : 0.0; };
        if (prob_.size() == 1) {
            double hits = 0.0;
            for (double x : samples_) hits += hit(x);
            return proportion_estimate(hits, samples_.size(), seed_);
        }
        auto e = estimate(hit);
        // no hits (or no misses) at all: the normal interval collapses, use the rule of three at 99%
        const double edge = -std::log(0.01) / static_cast<double>(std::max<std::size_t>(1, e.trials));
        if (e.mean <= 0.0) e.ci_hi = std::max(e.ci_hi, edge);
        if (e.mean >= 1.0) e.ci_lo = std::min(e.ci_lo, 1.0 - edge);
        return e;
    }

    MCEstimate mean() const
    {
        return estimate([](double x) { return x; });
    }

    /// Variance of X with a delta-method standard error.
    MCEstimate variance() const
    {
        const std::size_t k = prob_.size();
        // per-stratum sums of x, x^2, x^3, x^4 about a shift for stability
        const double c = mean().mean;
        std::vector<std::array<double, 4>> s(k, {0.0, 0.0, 0.0, 0.0});
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            const double d = samples_[i] - c;
            auto& a = s[stratum_[i]];
            a[0] += d;
            a[1] += d * d;
            a[2] += d * d * d;
            a[3] += d * d * d * d;
        }
        double m1 = 0.0, m2 = 0.0, v11 = 0.0, v22 = 0.0, v12 = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (count_[j] == 0) continue;
            const double n = static_cast<double>(count_[j]);
            const double e1 = s[j][0] / n, e2 = s[j][1] / n, e3 = s[j][2] / n, e4 = s[j][3] / n;
            m1 += prob_[j] * e1;
            m2 += prob_[j] * e2;
            if (count_[j] > 1) {
                const double w = prob_[j] * prob_[j] / (n - 1.0);
                v11 += w * (e2 - e1 * e1);
                v22 += w * (e4 - e2 * e2);
                v12 += w * (e3 - e1 * e2);
            }
        }
        const double var = m2 - m1 * m1;
        // gradient of (m2 - m1^2) is (-2 m1, 1)
        const double se2 = 4.0 * m1 * m1 * v11 + v22 - 4.0 * m1 * v12;
        return make_estimate(var, std::sqrt(std::max(0.0, se2)), samples_.size(), seed_);
    }

    /// Weighted (1-eps)-quantile, i.e. the value exceeded with probability eps.
    double upper_quantile(double eps) const
    {
        std::vector<std::pair<double, double>> vw;
        vw.reserve(samples_.size());
        for (std::size_t i = 0; i < samples_.size(); ++i)
            vw.push_back({samples_[i], prob_[stratum_[i]] / static_cast<double>(count_[stratum_[i]])});
        std::sort(vw.begin(), vw.end());
        double acc = 0.0;
        for (const auto& [v, w] : vw) {
            acc += w;
            if (acc >= 1.0 - eps) return v;
        }
        return vw.empty() ? 0.0 : vw.back().first;
    }

private:
    void finish()
    {
        count_.assign(prob_.size(), 0);
        for (int s : stratum_) {
            if (s < 0 || static_cast<std::size_t>(s) >= prob_.size()) throw std::invalid_argument("EmpiricalCcdf: bad stratum");
            ++count_[s];
        }
    }

    std::vector<double> samples_;
    std::vector<int> stratum_;
    std::vector<double> prob_;
    std::vector<std::size_t> count_;
    std::uint64_t seed_ = 0;
};

/// Raw sample dump with header `trial,value`.
inline void write_samples_csv(std::ostream& os, const std::vector<double>& samples)
{
    os << "trial,value\n";
    char buf[64];
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, samples[i]);
        os << buf;
    }
}

inline void write_samples_csv(const std::string& path, const std::vector<double>& samples)
{
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    write_samples_csv(f, samples);
}

/// Default simulation window for a process of density lambda.
inline double window_radius(double density, double scale = 1.0, double r_los = 0.0)
{
    const double w = std::max({std::sqrt(500.0 / (std::numbers::pi * density)), 20.0 / std::sqrt(density), 3.0 * r_los});
    return w * scale;
}

namespace detail {

/// Radii of an HPPP on the annulus r_in <= r < r_out (angles are not needed).
template <class Rng>
void annulus_radii(double density, double r_in, double r_out, Rng& rng, std::vector<double>& out)
{
    out.clear();
    if (density <= 0.0 || r_out <= r_in) return;
    const double a2 = r_in * r_in;
    const double span = r_out * r_out - a2;
    std::poisson_distribution<long> count(density * std::numbers::pi * span);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const long n = count(rng);
    out.resize(static_cast<std::size_t>(n));
    for (auto& r : out) r = std::sqrt(a2 + u(rng) * span);
}

/// Distance to the nearest point of an HPPP conditioned on none inside r_min.
template <class Rng>
double nearest_distance(double density, double r_min, Rng& rng)
{
    std::exponential_distribution<double> ex(1.0);
    return std::sqrt(r_min * r_min + ex(rng) / (std::numbers::pi * density));
}

/// Walks HPPP points outward in distance order; each call returns the next radius.
template <class Rng>
class RadialWalk {
public:
    RadialWalk(double density, Rng& rng) : scale_(1.0 / (std::numbers::pi * density)), rng_(rng) {}
    double next()
    {
        area_ += ex_(rng_);
        return std::sqrt(area_ * scale_);
    }

private:
    double scale_;
    double area_ = 0.0;
    Rng& rng_;
    std::exponential_distribution<double> ex_{1.0};
};

inline double mean_gain(const MmWaveTier& m)
{
    double g = 0.0;
    for (const auto& a : gain_distribution(m.bs_pattern, m.ue_pattern)) g += a.gain * a.prob;
    return g;
}

template <class Rng>
double draw_gain(const std::array<GainAtom, 4>& atoms, Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = u(rng);
    for (int i = 0; i < 3; ++i) {
        if (x < atoms[i].prob) return atoms[i].gain;
        x -= atoms[i].prob;
    }
    return atoms[3].gain;
}

struct MmServing {
    double best_los = std::numeric_limits<double>::infinity();
    double best_nlos = std::numeric_limits<double>::infinity();
};

/// First LoS and first NLoS distance of the mmWave process, stopping once no farther
/// BS can beat `floor_gain` (a pathloss value already achieved elsewhere).
template <class Rng>
MmServing mm_candidates(const MmWaveTier& m, double floor_gain, Rng& rng, double max_radius)
{
    MmServing s;
    if (m.bs_density <= 0.0) return s;
    const bool ball = m.blockage.is_los_ball();
    RadialWalk<Rng> walk(m.bs_density, rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double best = floor_gain;
    for (;;) {
        const double d = walk.next();
        if (d > max_radius) break;
        if (ball && d > m.blockage.r_los()) break;
        const double reach_los = m.los.beta * std::pow(d, -m.los.alpha);
        const double reach_nlos = ball ? 0.0 : m.nlos.beta * std::pow(d, -m.nlos.alpha);
        if (std::max(reach_los, reach_nlos) < best) break;
        const bool los = u(rng) < los_probability(m.blockage, d);
        if (los && !std::isfinite(s.best_los)) {
            s.best_los = d;
            best = std::max(best, reach_los);
        } else if (!los && !ball && !std::isfinite(s.best_nlos)) {
            s.best_nlos = d;
            best = std::max(best, reach_nlos);
        }
        if (std::isfinite(s.best_los) && (ball || std::isfinite(s.best_nlos))) break;
    }
    return s;
}

/// Mean ambient power (per unit transmit power) from mmWave BSs beyond radius w.
inline double mm_ambient_tail(const MmWaveTier& m, double density, double w, bool include_nlos)
{
    if (density <= 0.0) return 0.0;
    const double g = mean_gain(m);
    const auto& b = m.blockage;
    auto f = [&](double t) {
        const double pl = los_probability(b, t);
        double v = pl * m.los.beta * std::pow(std::max(m.los.r_ref, t), -m.los.alpha);
        if (include_nlos && !b.is_los_ball()) v += (1.0 - pl) * m.nlos.beta * std::pow(std::max(m.nlos.r_ref, t), -m.nlos.alpha);
        return v * 2.0 * std::numbers::pi * density * t;
    };
    if (b.is_los_ball() && w >= b.r_los()) return 0.0;
    const double upper = b.is_los_ball() && !include_nlos ? b.r_los() : std::numeric_limits<double>::infinity();
    numerics::QuadratureSpec q{1e-10, 0.0, 4000};
    return g * numerics::integrate(f, w, upper, q, w).value;
}

/// One realisation of the mmWave ambient sum at the origin with the serving BS removed,
/// per unit transmit power and conversion efficiency. Points inside w come from rng,
/// the ring w..w_outer from outer_rng, so widening the window keeps the inner draw.
template <class Rng>
double mm_ambient_trial(const MmWaveTier& m, double density, double w, double w_outer, double tail, bool include_nlos,
                        Rng& rng, Rng& outer_rng, std::vector<double>& radii)
{
    const auto atoms = gain_distribution(m.bs_pattern, m.ue_pattern);
    const bool ball = m.blockage.is_los_ball();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // serving BS: largest unconstrained pathloss gain among links that can carry power
    double best = 0.0;
    double best_term = 0.0;
    bool found = false;
    double sum = 0.0;
    auto ring = [&](double r_in, double r_out, Rng& g) {
        annulus_radii(density, r_in, r_out, g, radii);
        for (const double d : radii) {
            const bool los = u(g) < los_probability(m.blockage, d);
            const double gain = draw_gain(atoms, g);
            if (!los && ball) continue;
            const auto& pl = los ? m.los : m.nlos;
            const double reach = pl.beta * std::pow(d, -pl.alpha);
            double term = 0.0;
            if (los || include_nlos) term = gain * pathloss(pl, d, true);
            sum += term;
            if (reach > best) {
                best = reach;
                best_term = term;
                found = true;
            }
        }
    };
    ring(0.0, w, rng);
    if (w_outer > w) ring(w, w_outer, outer_rng);
    if (found) sum -= best_term;
    return std::max(0.0, sum) + tail;
}

/// Stream for the part of a trial that lies beyond the base window.
inline std::mt19937_64 outer_engine(std::uint64_t seed, std::uint64_t trial)
{
    return random::trial_engine(seed ^ 0x6a09e667f3bcc909ULL, trial);
}

} // namespace detail

/// Directed (serving-link) harvested power per trial.
inline EmpiricalCcdf mc_directed_power(const NetworkConfig& cfg, Tier tier, const McOptions& opt)
{
    check_trials(opt.trials);
    std::vector<double> out(opt.trials, 0.0);
    if (tier == Tier::sub6) {
        const auto& s = cfg.sub6;
        if (s.bs_density > 0.0) {
            random::parallel_for(opt.trials, [&](std::size_t i) {
                auto rng = random::trial_engine(opt.seed, i);
                const double r = detail::nearest_distance(s.bs_density, 0.0, rng);
                std::gamma_distribution<double> gam(static_cast<double>(s.antennas), 1.0);
                const double h = opt.hardened_array_gain ? s.antennas : gam(rng);
                out[i] = s.conversion_eff * s.bs_power * h * pathloss(s.pathloss, r, false);
            }, opt.threads);
        }
    } else {
        const auto& m = cfg.mmwave;
        const double g = m.bs_pattern.main_gain * m.ue_pattern.main_gain;
        const double wmax = m.bs_density > 0.0 ? window_radius(m.bs_density, opt.window_scale * 50.0) : 0.0;
        if (m.bs_density > 0.0) {
            random::parallel_for(opt.trials, [&](std::size_t i) {
                auto rng = random::trial_engine(opt.seed, i);
                const auto c = detail::mm_candidates(m, 0.0, rng, wmax);
                double best = 0.0;
                if (std::isfinite(c.best_los)) best = std::max(best, pathloss(m.los, c.best_los, false));
                if (std::isfinite(c.best_nlos)) best = std::max(best, pathloss(m.nlos, c.best_nlos, false));
                out[i] = m.conversion_eff * m.bs_power * g * best;
            }, opt.threads);
        }
    }
    return EmpiricalCcdf(std::move(out), opt.seed);
}

/// Ambient harvested power per trial. The sub-6 estimate is stratified on the number
/// of BSs close to the UE, which is where the sum gets its heavy tail.
inline EmpiricalCcdf mc_ambient_power(const NetworkConfig& cfg, Tier tier, const McOptions& opt)
{
    check_trials(opt.trials);
    std::vector<double> out(opt.trials, 0.0);
    if (tier == Tier::mmwave) {
        const auto& m = cfg.mmwave;
        if (m.bs_density <= 0.0) return EmpiricalCcdf(std::move(out), opt.seed);
        const double r_los = m.blockage.is_los_ball() ? m.blockage.r_los() : 0.0;
        const double w = window_radius(m.bs_density, opt.window_scale, r_los);
        const double w_base = window_radius(m.bs_density, std::min(1.0, opt.window_scale), r_los);
        const double tail = detail::mm_ambient_tail(m, m.bs_density, w, opt.include_nlos_ambient);
        const double scale = m.conversion_eff * m.bs_power;
        random::parallel_for(opt.trials, [&](std::size_t i) {
            auto rng = random::trial_engine(opt.seed, i);
            auto orng = detail::outer_engine(opt.seed, i);
            std::vector<double> radii;
            out[i] = scale * detail::mm_ambient_trial(m, m.bs_density, w_base, w, tail, opt.include_nlos_ambient, rng, orng,
                                                      radii);
        }, opt.threads);
        return EmpiricalCcdf(std::move(out), opt.seed);
    }

    const auto& s = cfg.sub6;
    const double lam = s.bs_density;
    if (lam <= 0.0) return EmpiricalCcdf(std::move(out), opt.seed);
    const double w = window_radius(lam, opt.window_scale);
    const double w_base = window_radius(lam, std::min(1.0, opt.window_scale));
    const double alpha = s.pathloss.alpha;
    // Campbell mean of everything beyond the window
    const double tail = alpha > 2.0 ? s.pathloss.beta * 2.0 * std::numbers::pi * lam * std::pow(w, 2.0 - alpha) / (alpha - 2.0)
                                    : std::numeric_limits<double>::infinity();
    const double rho = std::min(std::sqrt(0.1 / (std::numbers::pi * lam)), 0.5 * w_base);
    const double mu = lam * std::numbers::pi * rho * rho;
    // strata: k = 0..3 BSs inside rho, and k >= 4
    constexpr int ns = 5;
    std::array<double, ns> p{};
    double pk = std::exp(-mu);
    double cum = 0.0;
    for (int k = 0; k < ns - 1; ++k) {
        p[k] = pk;
        cum += pk;
        pk *= mu / (k + 1);
    }
    p[ns - 1] = std::max(0.0, -std::expm1(-mu) - (cum - std::exp(-mu)));
    const std::array<double, ns> share{0.4, 0.3, 0.2, 0.07, 0.03};
    std::array<std::size_t, ns + 1> edge{};
    for (int k = 0; k < ns; ++k) edge[k + 1] = edge[k] + static_cast<std::size_t>(std::floor(share[k] * opt.trials));
    edge[ns] = opt.trials;
    std::vector<int> stratum(opt.trials, 0);
    for (int k = 0; k < ns; ++k)
        for (std::size_t i = edge[k]; i < edge[k + 1]; ++i) stratum[i] = k;
    const double scale = s.conversion_eff * s.bs_power;

    random::parallel_for(opt.trials, [&](std::size_t i) {
        auto rng = random::trial_engine(opt.seed, i);
        const int k = stratum[i];
        std::uniform_real_distribution<double> u(0.0, 1.0);
        long inner = k;
        if (k == ns - 1) {
            // Poisson(mu) conditioned on >= ns-1, by inversion
            double q = std::exp(-mu);
            double c = 0.0;
            for (int j = 0; j < ns - 1; ++j) {
                c += q;
                q *= mu / (j + 1);
            }
            const double tail_mass = std::max(p[ns - 1], 1e-300);
            double target = u(rng) * tail_mass;
            long j = ns - 1;
            while (target > q && q > 0.0) {
                target -= q;
                ++j;
                q *= mu / j;
            }
            inner = j;
        }
        std::vector<double> radii, ring;
        detail::annulus_radii(lam, rho, w_base, rng, radii);
        for (long j = 0; j < inner; ++j) radii.push_back(rho * std::sqrt(u(rng)));
        std::exponential_distribution<double> ex(1.0);
        std::vector<double> fade(radii.size());
        for (auto& h : fade) h = ex(rng);
        if (w > w_base) {
            auto orng = detail::outer_engine(opt.seed, i);
            detail::annulus_radii(lam, w_base, w, orng, ring);
            for (const double r : ring) {
                radii.push_back(r);
                fade.push_back(ex(orng));
            }
        }
        if (radii.empty()) {
            out[i] = scale * tail;
            return;
        }
        double sum = 0.0;
        std::size_t nearest = 0;
        for (std::size_t j = 0; j < radii.size(); ++j)
            if (radii[j] < radii[nearest]) nearest = j;
        for (std::size_t j = 0; j < radii.size(); ++j)
            if (j != nearest) sum += fade[j] * pathloss(s.pathloss, radii[j], true);
        out[i] = scale * (sum + tail);
    }, opt.threads);
    std::vector<double> probs(p.begin(), p.end());
    return EmpiricalCcdf(std::move(out), std::move(stratum), std::move(probs), opt.seed);
}

/// LoS-only ambient sum on a unit-density mmWave process (serving BS removed), per
/// unit eta*P. Used to estimate the quantile constant of the mmWave ambient threshold.
inline EmpiricalCcdf mc_unit_density_los_ambient(const NetworkConfig& cfg, const McOptions& opt)
{
    check_trials(opt.trials);
    const auto& m = cfg.mmwave;
    const double r_los = m.blockage.is_los_ball() ? m.blockage.r_los() : 0.0;
    const double w = window_radius(1.0, opt.window_scale, r_los);
    const double w_base = window_radius(1.0, std::min(1.0, opt.window_scale), r_los);
    const double tail = detail::mm_ambient_tail(m, 1.0, w, false);
    std::vector<double> out(opt.trials, 0.0);
    random::parallel_for(opt.trials, [&](std::size_t i) {
        auto rng = random::trial_engine(opt.seed, i);
        auto orng = detail::outer_engine(opt.seed, i);
        std::vector<double> radii;
        out[i] = detail::mm_ambient_trial(m, 1.0, w_base, w, tail, false, rng, orng, radii);
    }, opt.threads);
    return EmpiricalCcdf(std::move(out), opt.seed);
}

struct AssociationEstimate {
    MCEstimate sub6;
    MCEstimate mm_los;
    MCEstimate mm_nlos;
};

/// Max-directed-power association frequencies.
inline AssociationEstimate mc_association(const NetworkConfig& cfg, const McOptions& opt)
{
    check_trials(opt.trials);
    const auto& s = cfg.sub6;
    const auto& m = cfg.mmwave;
    std::vector<unsigned char> choice(opt.trials, 0);
    const double p_sub6 = s.conversion_eff * s.bs_power * s.antennas;
    const double p_mm = m.conversion_eff * m.bs_power * m.bs_pattern.main_gain * m.ue_pattern.main_gain;
    const double wmax = m.bs_density > 0.0 ? window_radius(m.bs_density, opt.window_scale * 50.0) : 0.0;
    random::parallel_for(opt.trials, [&](std::size_t i) {
        auto rng = random::trial_engine(opt.seed, i);
        double best = 0.0;
        unsigned char who = 0;
        if (s.bs_density > 0.0) best = p_sub6 * pathloss(s.pathloss, detail::nearest_distance(s.bs_density, 0.0, rng), false);
        if (m.bs_density > 0.0) {
            const auto c = detail::mm_candidates(m, best / p_mm, rng, wmax);
            if (std::isfinite(c.best_los)) {
                const double v = p_mm * pathloss(m.los, c.best_los, false);
                if (v > best) {
                    best = v;
                    who = 1;
                }
            }
            if (std::isfinite(c.best_nlos)) {
                const double v = p_mm * pathloss(m.nlos, c.best_nlos, false);
                if (v > best) {
                    best = v;
                    who = 2;
                }
            }
        }
        if (best == 0.0) who = 0;
        choice[i] = who;
    }, opt.threads);
    std::array<std::size_t, 3> cnt{0, 0, 0};
    for (auto c : choice) ++cnt[c];
    auto est = [&](std::size_t c) { return proportion_estimate(static_cast<double>(c), opt.trials, opt.seed); };
    return {est(cnt[0]), est(cnt[1]), est(cnt[2])};
}

/// Per-trial uplink rate samples in bits/s.
inline std::vector<double> mc_uplink_rate_samples(const NetworkConfig& cfg, Tier tier, const McOptions& opt, bool interference)
{
    check_trials(opt.trials);
    const double tau = cfg.harvest_fraction;
    const double ratio = tau / (1.0 - tau);
    std::vector<double> out(opt.trials, 0.0);
    if (tier == Tier::sub6) {
        const auto& s = cfg.sub6;
        const double lam = s.bs_density;
        const double lue = s.active_ue_density;
        if (lam <= 0.0) return out;
        const double alpha = s.pathloss.alpha;
        const double beta = s.pathloss.beta;
        const double r_o = s.pathloss.r_ref;
        // r_o applies in the unit-density picture of each process
        const double d_min = r_o / std::sqrt(lam);
        const double x_min = lue > 0.0 ? r_o / std::sqrt(lue) : 0.0;
        const double w = lue > 0.0 ? std::max(window_radius(lue, opt.window_scale), 2.0 * x_min) : 0.0;
        const double sigma2 = noise_power(s.bandwidth, cfg.noise_figure_db);
        const double bw = (1.0 - tau) * s.bandwidth;
        const double base = ratio * s.conversion_eff * s.bs_power;
        random::parallel_for(opt.trials, [&](std::size_t i) {
            auto rng = random::trial_engine(opt.seed, i);
            std::gamma_distribution<double> gam(static_cast<double>(s.antennas), 1.0);
            std::exponential_distribution<double> ex(1.0);
            auto array_gain = [&] { return opt.hardened_array_gain ? static_cast<double>(s.antennas) : gam(rng); };
            const double d = detail::nearest_distance(lam, d_min, rng);
            const double l_d = beta * std::pow(d, -alpha);
            const double p_ue = base * array_gain() * l_d;
            const double signal = p_ue * array_gain() * l_d;
            double interf = 0.0;
            if (interference && lue > 0.0) {
                std::vector<double> radii;
                detail::annulus_radii(lue, x_min, w, rng, radii);
                double psum = 0.0;
                for (double y : radii) {
                    const double z = detail::nearest_distance(lam, d_min, rng);
                    const double p_j = base * array_gain() * beta * std::pow(z, -alpha);
                    psum += p_j;
                    interf += p_j * ex(rng) * beta * std::pow(y, -alpha);
                }
                // interferers beyond the window at their sampled mean power
                if (!radii.empty() && alpha > 2.0) {
                    const double pbar = psum / static_cast<double>(radii.size());
                    interf += pbar * beta * 2.0 * std::numbers::pi * lue * std::pow(w, 2.0 - alpha) / (alpha - 2.0);
                }
            }
            out[i] = bw * std::log2(1.0 + signal / (interf + sigma2));
        }, opt.threads);
        return out;
    }

    const auto& m = cfg.mmwave;
    if (!m.blockage.is_los_ball()) throw std::domain_error("mmWave uplink simulation needs LoS-ball blockage");
    const double lam = m.bs_density;
    const double lue = m.active_ue_density;
    const double r_o = m.los.r_ref;
    const double R = m.blockage.r_los();
    if (!(r_o < R)) throw std::domain_error("mmWave uplink simulation needs r_o < R_LoS");
    if (lam <= 0.0) return out;
    const double alpha = m.los.alpha;
    const double beta = m.los.beta;
    const double mbmd = m.bs_pattern.main_gain * m.ue_pattern.main_gain;
    const double hbar = ratio * m.conversion_eff * m.bs_power * mbmd;
    const double sigma2 = noise_power(m.bandwidth, cfg.noise_figure_db);
    const double bw = (1.0 - tau) * m.bandwidth;
    const auto atoms = gain_distribution(m.bs_pattern, m.ue_pattern);
    random::parallel_for(opt.trials, [&](std::size_t i) {
        auto rng = random::trial_engine(opt.seed, i);
        const double d = detail::nearest_distance(lam, r_o, rng);
        if (d > R) return;
        const double l_d = beta * std::pow(d, -alpha);
        const double signal = hbar * l_d * mbmd * l_d;
        double interf = 0.0;
        if (interference && lue > 0.0) {
            std::vector<double> radii;
            detail::annulus_radii(lue, r_o, R, rng, radii);
            for (double y : radii) {
                const double z = detail::nearest_distance(lam, r_o, rng);
                const double g = detail::draw_gain(atoms, rng);
                if (z > R) continue;
                interf += hbar * beta * std::pow(z, -alpha) * g * beta * std::pow(y, -alpha);
            }
        }
        out[i] = bw * std::log2(1.0 + signal / (interf + sigma2));
    }, opt.threads);
    return out;
}

inline MCEstimate summarize(const std::vector<double>& v, std::uint64_t seed)
{
    double s1 = 0.0;
    for (double x : v) s1 += x;
    const double n = static_cast<double>(v.size());
    const double mean = s1 / n;
    double s2 = 0.0;
    for (double x : v) s2 += (x - mean) * (x - mean);
    const double se = v.size() > 1 ? std::sqrt(s2 / (n - 1.0) / n) : 0.0;
    return make_estimate(mean, se, v.size(), seed);
}

inline MCEstimate mc_uplink_throughput(const NetworkConfig& cfg, Tier tier, const McOptions& opt, bool interference)
{
    return summarize(mc_uplink_rate_samples(cfg, tier, opt, interference), opt.seed);
}

} // namespace wpt::mc

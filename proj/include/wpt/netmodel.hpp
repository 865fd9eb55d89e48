#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>

namespace wpt {

inline constexpr double speed_of_light = 3e8;

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }
inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// beta * d^{-alpha}; r_ref is the reference distance r_o of the constrained form.
struct PathlossModel {
    double beta = 1.0;
    double alpha = 2.0;
    double r_ref = 1.0;

    void validate(const std::string& name = "pathloss") const
    {
        if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError(name + ".beta must be > 0");
        if (!(alpha >= 2.0) || !std::isfinite(alpha)) throw ValidationError(name + ".alpha must be >= 2");
        if (!(r_ref > 0.0) || !std::isfinite(r_ref)) throw ValidationError(name + ".r_ref must be > 0");
    }
};

inline double pathloss(const PathlossModel& m, double distance, bool constrained)
{
    if (!(distance > 0.0)) throw std::domain_error("pathloss: distance must be > 0");
    const double d = constrained ? std::max(m.r_ref, distance) : distance;
    return m.beta * std::pow(d, -m.alpha);
}

inline double freq_constant_beta(double carrier_hz)
{
    if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz)) throw std::domain_error("freq_constant_beta: carrier must be > 0");
    const double x = speed_of_light / (4.0 * std::numbers::pi * carrier_hz);
    return x * x;
}

/// Thermal noise -174 dBm/Hz plus noise figure, in watts.
inline double noise_power(double bandwidth, double noise_figure_db)
{
    if (!(bandwidth > 0.0)) throw std::domain_error("noise_power: bandwidth must be > 0");
    return dbm_to_watts(-174.0 + 10.0 * std::log10(bandwidth) + noise_figure_db);
}

struct ExponentialLoS {
    double rho = 1.0 / 141.4;
};

struct LoSBall {
    double r_los = 20.0;
};

struct BlockageModel {
    std::variant<ExponentialLoS, LoSBall> law = ExponentialLoS{};

    static BlockageModel exponential(double rho) { return {ExponentialLoS{rho}}; }
    static BlockageModel los_ball(double r_los) { return {LoSBall{r_los}}; }

    bool is_los_ball() const { return std::holds_alternative<LoSBall>(law); }
    double r_los() const { return std::get<LoSBall>(law).r_los; }
    double rho() const { return std::get<ExponentialLoS>(law).rho; }

    void validate() const
    {
        if (is_los_ball()) {
            if (!(r_los() > 0.0) || !std::isfinite(r_los())) throw ValidationError("blockage.r_los must be > 0");
        } else if (!(rho() > 0.0) || !std::isfinite(rho())) {
            throw ValidationError("blockage.rho must be > 0");
        }
    }
};

inline double los_probability(const BlockageModel& b, double distance)
{
    if (distance < 0.0) throw std::domain_error("los_probability: distance must be >= 0");
    if (b.is_los_ball()) return distance <= b.r_los() ? 1.0 : 0.0;
    return std::exp(-b.rho() * distance);
}

namespace detail {

// 1 - e^{-x}(1 + x), accurate for small x
inline double one_minus_exp_poly1(double x)
{
    if (x > 0.1) return -std::expm1(-x) - x * std::exp(-x);
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
        term *= -x / k;
        if (k >= 2) sum += (k - 1) * term;
    }
    return sum;
}

} // namespace detail

/// int_0^y t f(t) dt for the LoS probability f.
inline double los_second_moment(const BlockageModel& b, double y)
{
    if (y <= 0.0) return 0.0;
    if (b.is_los_ball()) {
        const double m = std::min(y, b.r_los());
        return 0.5 * m * m;
    }
    const double rho = b.rho();
    return detail::one_minus_exp_poly1(rho * y) / (rho * rho);
}

/// int_0^y t (1 - f(t)) dt.
inline double nlos_second_moment(const BlockageModel& b, double y)
{
    if (y <= 0.0) return 0.0;
    if (b.is_los_ball()) {
        const double m = std::max(0.0, y - b.r_los());
        return m > 0.0 ? 0.5 * (y * y - b.r_los() * b.r_los()) : 0.0;
    }
    return std::max(0.0, 0.5 * y * y - los_second_moment(b, y));
}

struct SectoredPattern {
    double main_gain = 1.0;
    double side_gain = 1.0;
    double beamwidth = 2.0 * std::numbers::pi;

    void validate(const std::string& name = "pattern") const
    {
        if (!(side_gain > 0.0) || !(main_gain >= side_gain)) throw ValidationError(name + ": need main_gain >= side_gain > 0");
        if (!(beamwidth > 0.0) || beamwidth > 2.0 * std::numbers::pi)
            throw ValidationError(name + ": beamwidth must lie in (0, 2pi]");
    }
};

struct GainAtom {
    double gain;
    double prob;
};

/// Four-point gain law of a BS/UE sectored pattern pair.
inline std::array<GainAtom, 4> gain_distribution(const SectoredPattern& bs, const SectoredPattern& ue)
{
    const double two_pi = 2.0 * std::numbers::pi;
    const double pb = bs.beamwidth / two_pi;
    const double pd = ue.beamwidth / two_pi;
    return {{
        {bs.main_gain * ue.main_gain, pb * pd},
        {bs.main_gain * ue.side_gain, pb * (1.0 - pd)},
        {bs.side_gain * ue.main_gain, (1.0 - pb) * pd},
        {bs.side_gain * ue.side_gain, (1.0 - pb) * (1.0 - pd)},
    }};
}

struct Sub6Tier {
    double bs_density = 0.002;
    double active_ue_density = 0.001;
    double bs_power = 1.0;
    double conversion_eff = 0.6;
    double bandwidth = 20e6;
    int antennas = 32;
    PathlossModel pathloss{freq_constant_beta(1.5e9), 2.7, 1.0};
};

struct MmWaveTier {
    double bs_density = 0.02;
    double active_ue_density = 0.01;
    double bs_power = 1.0;
    double conversion_eff = 0.6;
    double bandwidth = 1e9;
    SectoredPattern bs_pattern{db_to_linear(18.0), db_to_linear(-2.0), deg_to_rad(10.0)};
    SectoredPattern ue_pattern{db_to_linear(10.0), db_to_linear(-10.0), deg_to_rad(45.0)};
    PathlossModel los{freq_constant_beta(28e9), 2.0, 1.0};
    PathlossModel nlos{freq_constant_beta(28e9), 2.9, 1.0};
    BlockageModel blockage = BlockageModel::exponential(1.0 / 141.4);
};

/// Both tiers plus the harvest-then-transmit split. Defaults are the
/// energy-coverage setting (Table I values, 1.5 GHz sub-6 carrier).
struct NetworkConfig {
    Sub6Tier sub6;
    MmWaveTier mmwave;
    double harvest_fraction = 0.7;
    double noise_figure_db = 7.0;

    void validate() const
    {
        auto density = [](double v, const char* n) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(std::string(n) + " must be >= 0");
        };
        density(sub6.bs_density, "sub6.bs_density");
        density(sub6.active_ue_density, "sub6.ue_density");
        density(mmwave.bs_density, "mmwave.bs_density");
        density(mmwave.active_ue_density, "mmwave.ue_density");
        auto power = [](double v, const char* n) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(n) + " must be > 0");
        };
        power(sub6.bs_power, "sub6.power");
        power(mmwave.bs_power, "mmwave.power");
        power(sub6.bandwidth, "sub6.bandwidth");
        power(mmwave.bandwidth, "mmwave.bandwidth");
        auto eff = [](double v, const char* n) {
            if (!(v > 0.0 && v <= 1.0)) throw ValidationError(std::string(n) + " must lie in (0, 1]");
        };
        eff(sub6.conversion_eff, "sub6.eta");
        eff(mmwave.conversion_eff, "mmwave.eta");
        if (sub6.antennas < 1) throw ValidationError("sub6.antennas must be >= 1");
        sub6.pathloss.validate("sub6");
        mmwave.los.validate("mmwave.los");
        mmwave.nlos.validate("mmwave.nlos");
        mmwave.bs_pattern.validate("mmwave.bs_pattern");
        mmwave.ue_pattern.validate("mmwave.ue_pattern");
        mmwave.blockage.validate();
        if (!(harvest_fraction > 0.0 && harvest_fraction < 1.0)) throw ValidationError("tau must lie in (0, 1)");
        if (!std::isfinite(noise_figure_db)) throw ValidationError("noise_figure must be finite");
    }
};

struct DerivedConstants {
    double hbar_sub6;
    double hbar_mm;
    double varpi;
    double kappa_sub6;
    double kappa_mm;
    double noise_power_sub6;
    double noise_power_mm;
};

inline double kappa_of(double bs_density, double ue_density)
{
    if (ue_density == 0.0) return std::numeric_limits<double>::infinity();
    return bs_density / ue_density;
}

inline DerivedConstants derive(const NetworkConfig& cfg)
{
    const double tau = cfg.harvest_fraction;
    const double ratio = tau / (1.0 - tau);
    const auto& s = cfg.sub6;
    const auto& m = cfg.mmwave;
    const double mb_md = m.bs_pattern.main_gain * m.ue_pattern.main_gain;
    DerivedConstants d{};
    d.hbar_sub6 = ratio * s.conversion_eff * s.bs_power * s.antennas * std::pow(s.bs_density, s.pathloss.alpha / 2.0);
    d.hbar_mm = ratio * m.conversion_eff * m.bs_power * mb_md;
    d.varpi = m.conversion_eff * m.bs_power * mb_md / (s.conversion_eff * s.bs_power * s.antennas);
    d.kappa_sub6 = kappa_of(s.bs_density, s.active_ue_density);
    d.kappa_mm = kappa_of(m.bs_density, m.active_ue_density);
    d.noise_power_sub6 = noise_power(s.bandwidth, cfg.noise_figure_db);
    d.noise_power_mm = noise_power(m.bandwidth, cfg.noise_figure_db);
    return d;
}

/// Set a common reference distance on every pathloss model.
inline void set_reference_distance(NetworkConfig& cfg, double r_o)
{
    cfg.sub6.pathloss.r_ref = r_o;
    cfg.mmwave.los.r_ref = r_o;
    cfg.mmwave.nlos.r_ref = r_o;
}

/// Throughput setting: 1 GHz sub-6 carrier, alpha 2.6, 3/-3 dB UE pattern, 20 m LoS ball.
inline NetworkConfig throughput_defaults()
{
    NetworkConfig c;
    c.sub6.pathloss = {freq_constant_beta(1e9), 2.6, 1.0};
    c.sub6.antennas = 16;
    c.mmwave.ue_pattern = {db_to_linear(3.0), db_to_linear(-3.0), deg_to_rad(45.0)};
    c.mmwave.blockage = BlockageModel::los_ball(20.0);
    return c;
}

} // namespace wpt

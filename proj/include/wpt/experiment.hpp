#pragma once

#include <wpt/config.hpp>
#include <wpt/energy.hpp>
#include <wpt/mcsim.hpp>
#include <wpt/numerics.hpp>
#include <wpt/random.hpp>
#include <wpt/throughput.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wpt::experiment {

enum class Kind { energy_coverage, ambient, association, throughput, density_solver, figure };

inline const char* to_string(Kind k)
{
    switch (k) {
    case Kind::energy_coverage: return "energy_coverage";
    case Kind::ambient: return "ambient";
    case Kind::association: return "association";
    case Kind::throughput: return "throughput";
    case Kind::density_solver: return "density_solver";
    case Kind::figure: return "figure";
    }
    return "?";
}

inline const char* to_string(mc::Tier t) { return t == mc::Tier::sub6 ? "sub6" : "mmwave"; }

/// Sweep parameters accepted for each kind.
inline std::vector<std::string> sweep_parameters(Kind k)
{
    switch (k) {
    case Kind::energy_coverage:
    case Kind::ambient: return {"p_th_dbm"};
    case Kind::association: return {"sub6.bs_density", "mmwave.bs_density", "sub6.antennas"};
    case Kind::throughput:
        return {"sub6.kappa", "sub6.bs_density", "sub6.antennas", "mmwave.kappa", "mmwave.bs_density"};
    case Kind::density_solver: return {"p_th_dbm", "c_target"};
    case Kind::figure: return {};
    }
    return {};
}

struct Sweep {
    std::string parameter;
    std::vector<double> grid;
};

struct ExperimentSpec {
    Kind kind = Kind::energy_coverage;
    NetworkConfig config;
    Sweep sweep;
    std::size_t mc_trials = 0; // 0 picks the per-kind default
    std::uint64_t seed = 1;
    std::string output_path;
    bool run_mc = true;
    mc::Tier tier = mc::Tier::sub6;
    double epsilon = 0.9; // coverage target of the density solver

    std::size_t trials() const
    {
        if (mc_trials) return mc_trials;
        return kind == Kind::throughput ? 10000 : 100000;
    }

    void validate() const
    {
        if (kind == Kind::figure) throw ValidationError("figure experiments go through reproduce_figure");
        config.validate();
        const auto allowed = sweep_parameters(kind);
        if (std::find(allowed.begin(), allowed.end(), sweep.parameter) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            throw ValidationError("sweep parameter '" + sweep.parameter + "' not allowed for " + to_string(kind) + " (use " + list + ")");
        }
        if (sweep.grid.empty()) throw ValidationError("sweep grid is empty");
        for (std::size_t i = 0; i < sweep.grid.size(); ++i) {
            if (!std::isfinite(sweep.grid[i])) throw ValidationError("sweep grid has a non-finite value");
            if (i && !(sweep.grid[i] > sweep.grid[i - 1])) throw ValidationError("sweep grid must be strictly increasing");
        }
        if (sweep.parameter == "sub6.antennas")
            for (double x : sweep.grid)
                if (x < 1 || x != std::floor(x)) throw ValidationError("sub6.antennas grid must hold positive integers");
        if (run_mc && trials() < mc::min_trials) throw ValidationError("mc_trials must be >= 1000");
        if (kind == Kind::density_solver && !(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
    }
};

inline std::vector<double> linspace(double a, double b, std::size_t n)
{
    if (n == 1) return {a};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

inline std::vector<double> logspace(double a, double b, std::size_t n)
{
    if (!(a > 0.0 && b > 0.0)) throw std::domain_error("logspace needs positive ends");
    auto e = linspace(std::log10(a), std::log10(b), n);
    for (auto& x : e) x = std::pow(10.0, x);
    if (n > 1) {
        e.front() = a;
        e.back() = b;
    }
    return e;
}

inline std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

/// Named columns of equal length plus a metadata block.
struct ResultTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> errors;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }

    bool has(const std::string& name) const { return std::find(names.begin(), names.end(), name) != names.end(); }

    std::vector<double>& column(const std::string& name)
    {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) {
            names.push_back(name);
            columns.emplace_back();
            return columns.back();
        }
        return columns[static_cast<std::size_t>(it - names.begin())];
    }

    const std::vector<double>& column(const std::string& name) const
    {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw std::out_of_range("no column '" + name + "'");
        return columns[static_cast<std::size_t>(it - names.begin())];
    }

    std::string meta(const std::string& key) const
    {
        for (const auto& [k, v] : metadata)
            if (k == key) return v;
        return {};
    }

    void validate() const
    {
        for (const auto& c : columns)
            if (c.size() != rows()) throw std::logic_error("ResultTable columns differ in length");
        if (!errors.empty() && errors.size() != rows()) throw std::logic_error("ResultTable error column length");
    }

    bool failed() const
    {
        return std::any_of(errors.begin(), errors.end(), [](const std::string& e) { return !e.empty(); });
    }

    void write_csv(std::ostream& os) const
    {
        validate();
        for (const auto& [k, v] : metadata) os << "# " << k << " = " << v << "\n";
        for (std::size_t j = 0; j < names.size(); ++j) os << (j ? "," : "") << names[j];
        if (!errors.empty()) os << ",error";
        os << "\n";
        for (std::size_t i = 0; i < rows(); ++i) {
            for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << format_number(columns[j][i]);
            if (!errors.empty()) {
                std::string e = errors[i];
                std::replace(e.begin(), e.end(), ',', ';');
                std::replace(e.begin(), e.end(), '\n', ' ');
                os << "," << e;
            }
            os << "\n";
        }
    }

    void write_csv(const std::string& path) const
    {
        const std::filesystem::path p(path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + path + "'");
        write_csv(f);
    }
};

/// Data rows of a CSV (everything after the metadata block and header).
inline std::vector<std::string> data_rows(std::istream& in)
{
    std::vector<std::string> rows;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        rows.push_back(line);
    }
    return rows;
}

namespace detail {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

inline std::uint64_t point_seed(std::uint64_t seed, std::size_t i)
{
    return random::splitmix64(seed ^ random::splitmix64(0x5eed0000ULL + i));
}

inline NetworkConfig apply_sweep(NetworkConfig cfg, const std::string& p, double x)
{
    if (p == "sub6.bs_density") cfg.sub6.bs_density = x;
    else if (p == "mmwave.bs_density") cfg.mmwave.bs_density = x;
    else if (p == "sub6.kappa") cfg.sub6.bs_density = x * cfg.sub6.active_ue_density;
    else if (p == "mmwave.kappa") cfg.mmwave.bs_density = x * cfg.mmwave.active_ue_density;
    else if (p == "sub6.antennas") cfg.sub6.antennas = static_cast<int>(x);
    return cfg;
}

inline void put_mc(ResultTable& t, const std::string& prefix, const mc::MCEstimate& e)
{
    t.column(prefix + "mean").push_back(e.mean);
    t.column(prefix + "ci_lo").push_back(e.ci_lo);
    t.column(prefix + "ci_hi").push_back(e.ci_hi);
}

inline void put_mc_nan(ResultTable& t, const std::string& prefix)
{
    put_mc(t, prefix, mc::MCEstimate{nan, nan, 0, nan, nan, 0});
}

inline std::vector<std::pair<std::string, std::string>> base_metadata(const ExperimentSpec& s)
{
    std::vector<std::pair<std::string, std::string>> m;
    m.push_back({"tool", version_string});
    m.push_back({"kind", to_string(s.kind)});
    if (s.kind != Kind::association && s.kind != Kind::density_solver) m.push_back({"tier", to_string(s.tier)});
    m.push_back({"x", s.sweep.parameter});
    m.push_back({"seed", std::to_string(s.seed)});
    m.push_back({"mc_trials", s.run_mc ? std::to_string(s.trials()) : "0"});
    if (s.kind == Kind::density_solver) m.push_back({"epsilon", format_number(s.epsilon)});
    m.push_back({"config_hash", config_hash(s.config)});
    std::istringstream in(emit_config(s.config));
    std::string line;
    while (std::getline(in, line)) m.push_back({"config", line});
    return m;
}

// Fills one row; columns are created on the first call.
inline void energy_row(ResultTable& t, const ExperimentSpec& s, const mc::EmpiricalCcdf* sim, double x)
{
    const double p = dbm_to_watts(x);
    const auto& cfg = s.config;
    t.column("x").push_back(x);
    if (s.tier == mc::Tier::sub6) {
        t.column("analytic").push_back(energy::directed_coverage_sub6(cfg, p).value);
        t.column("analytic_large_n").push_back(energy::directed_coverage_sub6_large_n(cfg, p));
    } else {
        t.column("analytic").push_back(std::clamp(energy::directed_coverage_mm(cfg, p).value, 0.0, 1.0));
    }
    if (sim) put_mc(t, "mc_", sim->ccdf(p));
}

inline void ambient_row(ResultTable& t, const ExperimentSpec& s, const mc::EmpiricalCcdf* sim, double x)
{
    const double p = dbm_to_watts(x);
    t.column("x").push_back(x);
    if (s.tier == mc::Tier::sub6) t.column("analytic_upper").push_back(energy::ambient_coverage_bound_sub6(s.config, p));
    if (sim) put_mc(t, "mc_", sim->ccdf(p));
}

inline void association_row(ResultTable& t, const ExperimentSpec& s, std::size_t i, double x)
{
    const auto cfg = apply_sweep(s.config, s.sweep.parameter, x);
    const auto a = energy::association_probabilities(cfg);
    t.column("x").push_back(x);
    t.column("sub6_analytic").push_back(a.p_sub6);
    t.column("mm_los_analytic").push_back(a.p_mm_los);
    t.column("mm_nlos_analytic").push_back(a.p_mm_nlos);
    if (s.run_mc) {
        mc::McOptions o;
        o.trials = s.trials();
        o.seed = point_seed(s.seed, i);
        const auto e = mc::mc_association(cfg, o);
        put_mc(t, "sub6_mc_", e.sub6);
        put_mc(t, "mm_los_mc_", e.mm_los);
        put_mc(t, "mm_nlos_mc_", e.mm_nlos);
    }
}

inline void throughput_row(ResultTable& t, const ExperimentSpec& s, std::size_t i, double x)
{
    const auto cfg = apply_sweep(s.config, s.sweep.parameter, x);
    t.column("x").push_back(x);
    mc::McOptions o;
    o.trials = s.trials();
    o.seed = point_seed(s.seed, i);
    if (s.tier == mc::Tier::sub6) {
        t.column("analytic").push_back(throughput::throughput_sub6_exact(cfg).bits_per_second);
        t.column("analytic_lower").push_back(throughput::throughput_sub6_lower(cfg).bits_per_second);
        if (s.run_mc) {
            o.hardened_array_gain = true;
            put_mc(t, "mc_", mc::mc_uplink_throughput(cfg, mc::Tier::sub6, o, true));
        }
    } else {
        t.column("analytic").push_back(throughput::throughput_mm_exact(cfg).bits_per_second);
        t.column("analytic_noise_limited").push_back(throughput::throughput_mm_noise_limited(cfg).bits_per_second);
        t.column("analytic_lower").push_back(throughput::throughput_mm_lower(cfg).bits_per_second);
        if (s.run_mc) {
            put_mc(t, "mc_", mc::mc_uplink_throughput(cfg, mc::Tier::mmwave, o, true));
            put_mc(t, "mc_snr_", mc::mc_uplink_throughput(cfg, mc::Tier::mmwave, o, false));
        }
    }
}

inline void density_row(ResultTable& t, const ExperimentSpec& s, std::size_t i, double x)
{
    const auto& cfg = s.config;
    t.column("x").push_back(x);
    if (s.sweep.parameter == "p_th_dbm") {
        const double p = dbm_to_watts(x);
        t.column("sub6_density_for_coverage").push_back(energy::required_sub6_density(cfg, p, s.epsilon));
        const auto d = energy::sub6_density_for_mm_dominance(cfg, p);
        t.column("sub6_density_mm_dominates").push_back(d.unbounded ? std::numeric_limits<double>::infinity() : d.value);
        if (s.run_mc) {
            const auto a = energy::required_mm_density_vs_sub6_ambient(cfg, p, s.trials(), point_seed(s.seed, i));
            t.column("ambient_epsilon").push_back(a.epsilon);
            t.column("vartheta_mm").push_back(a.vartheta.value);
            t.column("mm_density_ambient").push_back(a.mm_density);
        }
    } else {
        t.column("sub6_kappa").push_back(throughput::kappa_threshold_sub6(cfg, x));
        double lam = std::numeric_limits<double>::infinity();
        try {
            lam = throughput::mm_density_threshold(cfg, x);
        } catch (const throughput::OutOfRange&) {
        }
        t.column("mm_density").push_back(lam);
    }
}

} // namespace detail

/// Runs one sweep. A failing point stops the sweep; rows so far are kept and the
/// failing row carries the message in an `error` column.
inline ResultTable run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    ResultTable t;
    t.metadata = detail::base_metadata(spec);
    const auto& grid = spec.sweep.grid;

    mc::EmpiricalCcdf sim;
    const bool shared_sim = spec.run_mc && (spec.kind == Kind::energy_coverage || spec.kind == Kind::ambient);
    std::vector<std::string> errors;
    std::size_t done = 0;
    try {
        if (spec.kind == Kind::ambient && spec.tier == mc::Tier::sub6) {
            const auto m = energy::ambient_moments_sub6(spec.config);
            const double k = spec.config.sub6.conversion_eff * spec.config.sub6.bs_power;
            t.metadata.push_back({"ambient_mean_w", format_number(k * m.mean)});
            t.metadata.push_back({"ambient_variance_w2", format_number(k * k * m.variance)});
        }
        if (shared_sim) {
            mc::McOptions o;
            o.trials = spec.trials();
            o.seed = spec.seed;
            sim = spec.kind == Kind::energy_coverage ? mc::mc_directed_power(spec.config, spec.tier, o)
                                                     : mc::mc_ambient_power(spec.config, spec.tier, o);
        }
        for (; done < grid.size(); ++done) {
            const double x = grid[done];
            switch (spec.kind) {
            case Kind::energy_coverage: detail::energy_row(t, spec, shared_sim ? &sim : nullptr, x); break;
            case Kind::ambient: detail::ambient_row(t, spec, shared_sim ? &sim : nullptr, x); break;
            case Kind::association: detail::association_row(t, spec, done, x); break;
            case Kind::throughput: detail::throughput_row(t, spec, done, x); break;
            case Kind::density_solver: detail::density_row(t, spec, done, x); break;
            case Kind::figure: break;
            }
            errors.emplace_back();
        }
    } catch (const std::exception& e) {
        // pad the partial row, or add one when the failure came before any column existed
        if (t.names.empty()) t.column("x");
        std::size_t n = 0;
        for (const auto& c : t.columns) n = std::max(n, c.size());
        if (n == done) {
            n = done + 1;
            t.column("x").push_back(done < grid.size() ? grid[done] : detail::nan);
        }
        for (auto& c : t.columns) c.resize(n, detail::nan);
        errors.resize(n);
        errors.back() = e.what();
        t.errors = std::move(errors);
    }
    if (!spec.output_path.empty()) t.write_csv(spec.output_path);
    return t;
}

/// Copies x plus the `prefix*` columns of a multi-curve table, with the prefix removed.
inline ResultTable select_curve(const ResultTable& src, const std::string& prefix, const std::string& curve)
{
    ResultTable t;
    t.metadata = src.metadata;
    t.metadata.push_back({"curve", curve});
    t.column("x") = src.column("x");
    for (std::size_t j = 0; j < src.names.size(); ++j)
        if (src.names[j].rfind(prefix, 0) == 0) t.column(src.names[j].substr(prefix.size())) = src.columns[j];
    t.errors = src.errors;
    return t;
}

struct FigureOptions {
    std::uint64_t seed = 1;
    std::size_t trials = 0; // 0 keeps the per-kind defaults
    bool run_mc = true;
};

inline const std::vector<std::string>& figure_ids()
{
    static const std::vector<std::string> ids = {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"};
    return ids;
}

struct FigureOutput {
    std::vector<std::string> paths;
    bool failed = false;
};

namespace detail {

inline ExperimentSpec figure_spec(Kind kind, const NetworkConfig& cfg, const std::string& param, std::vector<double> grid,
                                  mc::Tier tier, const FigureOptions& o)
{
    ExperimentSpec s;
    s.kind = kind;
    s.config = cfg;
    s.sweep = {param, std::move(grid)};
    s.mc_trials = o.trials;
    s.seed = o.seed;
    s.run_mc = o.run_mc;
    s.tier = tier;
    return s;
}

inline void emit(FigureOutput& out, const std::string& dir, const std::string& name, const std::string& fig, ResultTable t)
{
    t.metadata.insert(t.metadata.begin() + 1, {"figure", fig});
    const std::string path = (std::filesystem::path(dir) / name).string();
    t.write_csv(path);
    out.paths.push_back(path);
    out.failed = out.failed || t.failed();
}

inline std::vector<double> density_grid() { return logspace(1e-3, 1e-1, 10); }

} // namespace detail

/// Writes the CSVs of one figure into out_dir.
inline FigureOutput reproduce_figure(const std::string& id, const std::string& out_dir, const FigureOptions& o = {})
{
    using detail::emit;
    using detail::figure_spec;
    FigureOutput out;
    if (id == "fig1") {
        const NetworkConfig cfg; // N=32, alpha 2.7, lambda_mu 0.002, lambda_mm 0.02
        const auto grid = linspace(-38.0, -5.0, 20);
        for (auto tier : {mc::Tier::sub6, mc::Tier::mmwave})
            emit(out, out_dir, std::string("fig1_") + to_string(tier) + ".csv", id,
                 run_experiment(figure_spec(Kind::energy_coverage, cfg, "p_th_dbm", grid, tier, o)));
    } else if (id == "fig2") {
        NetworkConfig cfg;
        cfg.sub6.pathloss.alpha = 2.6;
        cfg.sub6.bs_density = 0.002;
        cfg.mmwave.bs_density = 0.5;
        const auto grid = linspace(-40.0, -5.0, 20);
        for (auto tier : {mc::Tier::sub6, mc::Tier::mmwave})
            emit(out, out_dir, std::string("fig2_") + to_string(tier) + ".csv", id,
                 run_experiment(figure_spec(Kind::ambient, cfg, "p_th_dbm", grid, tier, o)));
    } else if (id == "fig3") {
        for (int n : {16, 32}) {
            NetworkConfig cfg;
            cfg.sub6.antennas = n;
            cfg.mmwave.bs_density = 0.01;
            const auto t = run_experiment(figure_spec(Kind::association, cfg, "sub6.bs_density", logspace(1e-4, 1e-1, 10), mc::Tier::sub6, o));
            const std::string tag = "fig3_n" + std::to_string(n) + "_";
            emit(out, out_dir, tag + "sub6.csv", id, select_curve(t, "sub6_", "sub6"));
            emit(out, out_dir, tag + "mm_los.csv", id, select_curve(t, "mm_los_", "mm_los"));
            emit(out, out_dir, tag + "mm_nlos.csv", id, select_curve(t, "mm_nlos_", "mm_nlos"));
        }
    } else if (id == "fig4") {
        for (int n : {8, 16}) {
            auto cfg = throughput_defaults();
            cfg.sub6.antennas = n;
            cfg.sub6.active_ue_density = 0.001;
            emit(out, out_dir, "fig4_n" + std::to_string(n) + ".csv", id,
                 run_experiment(figure_spec(Kind::throughput, cfg, "sub6.kappa", logspace(1.0, 1000.0, 10), mc::Tier::sub6, o)));
        }
    } else if (id == "fig5") {
        auto cfg = throughput_defaults();
        cfg.mmwave.active_ue_density = 0.01;
        const auto t = run_experiment(figure_spec(Kind::throughput, cfg, "mmwave.bs_density", detail::density_grid(), mc::Tier::mmwave, o));
        auto sinr = t;
        for (const char* drop : {"analytic_noise_limited", "analytic_lower", "mc_snr_mean", "mc_snr_ci_lo", "mc_snr_ci_hi"}) {
            auto it = std::find(sinr.names.begin(), sinr.names.end(), drop);
            if (it == sinr.names.end()) continue;
            sinr.columns.erase(sinr.columns.begin() + (it - sinr.names.begin()));
            sinr.names.erase(it);
        }
        sinr.metadata.push_back({"curve", "sinr"});
        emit(out, out_dir, "fig5_sinr.csv", id, sinr);
        ResultTable snr;
        snr.metadata = t.metadata;
        snr.metadata.push_back({"curve", "snr"});
        snr.column("x") = t.column("x");
        snr.column("analytic") = t.column("analytic_noise_limited");
        snr.column("analytic_lower") = t.column("analytic_lower");
        if (t.has("mc_snr_mean")) {
            snr.column("mc_mean") = t.column("mc_snr_mean");
            snr.column("mc_ci_lo") = t.column("mc_snr_ci_lo");
            snr.column("mc_ci_hi") = t.column("mc_snr_ci_hi");
        }
        snr.errors = t.errors;
        emit(out, out_dir, "fig5_snr.csv", id, snr);
    } else if (id == "fig6") {
        auto cfg = throughput_defaults();
        cfg.sub6.antennas = 16;
        cfg.sub6.active_ue_density = 0.01;
        cfg.mmwave.active_ue_density = 0.01;
        emit(out, out_dir, "fig6_mmwave.csv", id,
             run_experiment(figure_spec(Kind::throughput, cfg, "mmwave.bs_density", detail::density_grid(), mc::Tier::mmwave, o)));
        emit(out, out_dir, "fig6_sub6.csv", id,
             run_experiment(figure_spec(Kind::throughput, cfg, "sub6.bs_density", detail::density_grid(), mc::Tier::sub6, o)));
    } else if (id == "fig7") {
        struct Carrier {
            const char* name;
            double hz;
            double alpha;
        };
        for (const Carrier c : {Carrier{"28ghz", 28e9, 2.0}, Carrier{"38ghz", 38e9, 2.0}, Carrier{"60ghz", 60e9, 2.25},
                                Carrier{"73ghz", 73e9, 2.0}}) {
            auto cfg = throughput_defaults();
            cfg.mmwave.active_ue_density = 0.01;
            cfg.mmwave.los = {freq_constant_beta(c.hz), c.alpha, 1.0};
            cfg.mmwave.nlos.beta = freq_constant_beta(c.hz);
            emit(out, out_dir, std::string("fig7_") + c.name + ".csv", id,
                 run_experiment(figure_spec(Kind::throughput, cfg, "mmwave.bs_density", detail::density_grid(), mc::Tier::mmwave, o)));
        }
    } else {
        throw ValidationError("unknown figure id '" + id + "' (use fig1..fig7)");
    }
    return out;
}

} // namespace wpt::experiment

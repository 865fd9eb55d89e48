// Command-line front end: analyze, solve, simulate and figure subcommands.
// Exit codes: 0 success, 1 numeric failure, 2 usage or config error.

#include <wpt/wpt.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace wpt;
namespace ex = wpt::experiment;

constexpr int exit_numeric = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config_path;
    std::uint64_t seed = 1;
    std::size_t trials = 0;
    std::string out;
    bool no_mc = false;
};

struct SweepFlags {
    std::string parameter;
    std::vector<double> grid;
    double from = 0.0, to = 0.0;
    std::size_t points = 10;
    bool log = false;
    bool range_given() const { return from != 0.0 || to != 0.0; }
};

void add_sweep_flags(CLI::App* sub, SweepFlags& s, const std::string& default_param)
{
    s.parameter = default_param;
    sub->add_option("--sweep", s.parameter, "sweep parameter")->capture_default_str();
    sub->add_option("--grid", s.grid, "explicit grid values")->delimiter(',');
    sub->add_option("--from", s.from, "first grid value");
    sub->add_option("--to", s.to, "last grid value");
    sub->add_option("--points", s.points, "grid size")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--log", s.log, "log-spaced grid");
}

std::vector<double> make_grid(const SweepFlags& s, std::vector<double> fallback)
{
    if (!s.grid.empty() && s.range_given()) throw UsageError("give either --grid or --from/--to, not both");
    if (!s.grid.empty()) return s.grid;
    if (!s.range_given()) return fallback;
    if (s.log) {
        if (!(s.from > 0.0 && s.to > 0.0)) throw UsageError("--log needs positive --from/--to");
        return ex::logspace(s.from, s.to, s.points);
    }
    return ex::linspace(s.from, s.to, s.points);
}

mc::Tier parse_tier(const std::string& t) { return t == "mmwave" ? mc::Tier::mmwave : mc::Tier::sub6; }

NetworkConfig load_config(const Globals& g, bool throughput_setting)
{
    NetworkConfig base = throughput_setting ? throughput_defaults() : NetworkConfig{};
    if (g.config_path.empty()) return base;
    return parse_config(g.config_path, base);
}

int finish(const ex::ResultTable& t, const Globals& g, const std::string& name)
{
    if (g.out.empty()) {
        t.write_csv(std::cout);
    } else {
        const std::string path = (std::filesystem::path(g.out) / name).string();
        t.write_csv(path);
        std::cerr << "wrote " << path << "\n";
    }
    if (t.failed()) {
        std::cerr << "error: " << t.errors.back() << "\n";
        return exit_numeric;
    }
    return 0;
}

ex::ExperimentSpec base_spec(ex::Kind kind, const Globals& g, const NetworkConfig& cfg)
{
    ex::ExperimentSpec s;
    s.kind = kind;
    s.config = cfg;
    s.seed = g.seed;
    s.mc_trials = g.trials;
    s.run_mc = !g.no_mc;
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wireless power transfer analysis for two-tier sub-6 GHz / mmWave networks"};
    app.set_version_flag("--version", std::string(version_string));
    app.fallthrough();
    app.require_subcommand(1);

    Globals g;
    app.add_option("--config", g.config_path, "config file (section.key = value)");
    app.add_option("--seed", g.seed, "Monte Carlo seed")->capture_default_str();
    app.add_option("--trials", g.trials, "Monte Carlo trials (default per experiment)");
    app.add_option("--out", g.out, "output directory");
    app.add_flag("--no-mc", g.no_mc, "analytic columns only");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "analytic sweep with optional Monte Carlo columns");
    analyze->require_subcommand(1);
    std::string tier = "sub6";
    SweepFlags sw_energy, sw_ambient, sw_assoc, sw_tput;
    auto* a_energy = analyze->add_subcommand("energy", "directed energy coverage vs threshold (dBm)");
    a_energy->add_option("--tier", tier)->check(CLI::IsMember({"sub6", "mmwave"}))->capture_default_str();
    add_sweep_flags(a_energy, sw_energy, "p_th_dbm");
    auto* a_ambient = analyze->add_subcommand("ambient", "ambient energy coverage vs threshold (dBm)");
    a_ambient->add_option("--tier", tier)->check(CLI::IsMember({"sub6", "mmwave"}))->capture_default_str();
    add_sweep_flags(a_ambient, sw_ambient, "p_th_dbm");
    auto* a_assoc = analyze->add_subcommand("association", "association probabilities");
    add_sweep_flags(a_assoc, sw_assoc, "sub6.bs_density");
    auto* a_tput = analyze->add_subcommand("throughput", "uplink throughput");
    a_tput->add_option("--tier", tier)->check(CLI::IsMember({"sub6", "mmwave"}))->capture_default_str();
    add_sweep_flags(a_tput, sw_tput, "");

    // solve density
    auto* solve = app.add_subcommand("solve", "density threshold solvers");
    solve->require_subcommand(1);
    auto* s_density = solve->add_subcommand("density", "densities for an energy threshold (dBm) or a throughput target (bits/s)");
    SweepFlags sw_solve;
    double epsilon = 0.9;
    add_sweep_flags(s_density, sw_solve, "p_th_dbm");
    s_density->add_option("--epsilon", epsilon, "coverage target for the sub-6 density")->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "single Monte Carlo estimate, optional raw samples");
    std::string quantity = "directed";
    bool snr_only = false;
    std::string samples_path;
    simulate->add_option("--quantity", quantity)->check(CLI::IsMember({"directed", "ambient", "uplink", "association"}))->capture_default_str();
    simulate->add_option("--tier", tier)->check(CLI::IsMember({"sub6", "mmwave"}))->capture_default_str();
    simulate->add_flag("--snr-only", snr_only, "uplink without interference");
    simulate->add_option("--samples", samples_path, "write per-trial values as CSV (trial,value)");

    // figure
    auto* figure = app.add_subcommand("figure", "reproduce a figure's data (fig1..fig7)");
    std::string fig_id;
    figure->add_option("id", fig_id, "figure id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    // stage 1: everything that can fail on bad input
    ex::ExperimentSpec spec;
    std::string csv_name;
    try {
        if (*figure) {
            const auto& ids = ex::figure_ids();
            if (std::find(ids.begin(), ids.end(), fig_id) == ids.end())
                throw UsageError("unknown figure id '" + fig_id + "' (use fig1..fig7)");
        } else if (*analyze) {
            const bool tput = a_tput->parsed();
            const auto cfg = load_config(g, tput);
            if (a_energy->parsed()) {
                spec = base_spec(ex::Kind::energy_coverage, g, cfg);
                spec.tier = parse_tier(tier);
                spec.sweep = {sw_energy.parameter, make_grid(sw_energy, ex::linspace(-38.0, -5.0, 20))};
            } else if (a_ambient->parsed()) {
                spec = base_spec(ex::Kind::ambient, g, cfg);
                spec.tier = parse_tier(tier);
                spec.sweep = {sw_ambient.parameter, make_grid(sw_ambient, ex::linspace(-40.0, -5.0, 20))};
            } else if (a_assoc->parsed()) {
                spec = base_spec(ex::Kind::association, g, cfg);
                spec.sweep = {sw_assoc.parameter, make_grid(sw_assoc, ex::logspace(1e-4, 1e-1, 10))};
            } else {
                spec = base_spec(ex::Kind::throughput, g, cfg);
                spec.tier = parse_tier(tier);
                if (sw_tput.parameter.empty()) sw_tput.parameter = spec.tier == mc::Tier::sub6 ? "sub6.kappa" : "mmwave.bs_density";
                const auto fallback = spec.tier == mc::Tier::sub6 ? ex::logspace(1.0, 1000.0, 10) : ex::logspace(1e-3, 1e-1, 10);
                spec.sweep = {sw_tput.parameter, make_grid(sw_tput, fallback)};
            }
            spec.validate();
            csv_name = std::string(ex::to_string(spec.kind)) +
                       (spec.kind == ex::Kind::association ? "" : std::string("_") + ex::to_string(spec.tier)) + ".csv";
        } else if (*solve) {
            const bool by_rate = sw_solve.parameter == "c_target";
            spec = base_spec(ex::Kind::density_solver, g, load_config(g, by_rate));
            spec.epsilon = epsilon;
            const auto fallback = by_rate ? ex::logspace(1e6, 1e8, 10) : ex::linspace(-30.0, -10.0, 5);
            spec.sweep = {sw_solve.parameter, make_grid(sw_solve, fallback)};
            spec.validate();
            csv_name = "density_solver.csv";
        } else if (*simulate) {
            const auto cfg = load_config(g, quantity == "uplink");
            spec = base_spec(ex::Kind::energy_coverage, g, cfg);
            spec.tier = parse_tier(tier);
            if (g.trials && g.trials < mc::min_trials) throw ValidationError("--trials must be >= 1000");
        }
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_usage;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return exit_usage;
    } catch (const UsageError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }

    // stage 2: computation
    try {
        if (*figure) {
            ex::FigureOptions o;
            o.seed = g.seed;
            o.trials = g.trials;
            o.run_mc = !g.no_mc;
            const auto out = ex::reproduce_figure(fig_id, g.out.empty() ? std::string("figures") : g.out, o);
            for (const auto& p : out.paths) std::cerr << "wrote " << p << "\n";
            return out.failed ? exit_numeric : 0;
        }
        if (*analyze || *solve) return finish(ex::run_experiment(spec), g, csv_name);

        // simulate
        mc::McOptions o;
        o.seed = g.seed;
        o.trials = g.trials ? g.trials : (quantity == "uplink" ? 10000 : 100000);
        const auto& cfg = spec.config;
        std::vector<double> samples;
        std::ostringstream report;
        report.precision(10);
        if (quantity == "association") {
            const auto a = mc::mc_association(cfg, o);
            report << "sub6 " << a.sub6.mean << " +- " << a.sub6.half_width() << "\n"
                   << "mm_los " << a.mm_los.mean << " +- " << a.mm_los.half_width() << "\n"
                   << "mm_nlos " << a.mm_nlos.mean << " +- " << a.mm_nlos.half_width() << "\n";
        } else if (quantity == "uplink") {
            o.hardened_array_gain = spec.tier == mc::Tier::sub6;
            samples = mc::mc_uplink_rate_samples(cfg, spec.tier, o, !snr_only);
            const auto e = mc::summarize(samples, o.seed);
            report << "mean_bps " << e.mean << "\nci99 " << e.ci_lo << " " << e.ci_hi << "\n";
        } else {
            const auto sim = quantity == "directed" ? mc::mc_directed_power(cfg, spec.tier, o) : mc::mc_ambient_power(cfg, spec.tier, o);
            const auto e = sim.mean();
            report << "mean_w " << e.mean << "\nci99 " << e.ci_lo << " " << e.ci_hi << "\n";
            samples = sim.samples();
        }
        report << "trials " << o.trials << "\nseed " << o.seed << "\n";
        std::cout << report.str();
        if (!samples_path.empty()) {
            if (samples.empty()) throw UsageError("--samples is not available for association");
            mc::write_samples_csv(samples_path, samples);
            std::cerr << "wrote " << samples_path << "\n";
        }
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return exit_usage;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return exit_numeric;
    }
}

#pragma once

#include <wpt/netmodel.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpt {

inline constexpr const char* version_string = "wpt 0.1.0";

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg)
        , line_(line)
        , column_(column)
    {
    }
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

namespace config_detail {

enum class Kind { real, count, gain, angle, power, frequency, length, blockage };

struct Value {
    double number = 0.0;
    std::string word;
};

inline std::string trim(const std::string& s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// Splits "12.5 GHz" into number and unit; unit may be empty.
inline bool split_number(const std::string& text, double& number, std::string& unit)
{
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, number);
    if (ec != std::errc() || ptr == first) return false;
    unit = trim(std::string(ptr, last));
    return std::isfinite(number);
}

// Normalises value text of the given kind to SI; returns an error message or empty.
inline std::string convert(Kind kind, const std::string& text, Value& out)
{
    if (kind == Kind::blockage) {
        if (text != "exponential" && text != "los_ball") return "blockage must be 'exponential' or 'los_ball'";
        out.word = text;
        return {};
    }
    double x = 0.0;
    std::string unit;
    if (!split_number(text, x, unit)) return "expected a number";
    auto bad_unit = [&] { return "unit '" + unit + "' not allowed here"; };
    switch (kind) {
    case Kind::real:
        if (!unit.empty()) return bad_unit();
        break;
    case Kind::count:
        if (!unit.empty()) return bad_unit();
        if (x != std::floor(x)) return "expected an integer";
        break;
    case Kind::gain:
        if (unit == "dB") x = db_to_linear(x);
        else if (!unit.empty()) return bad_unit();
        break;
    case Kind::angle:
        if (unit == "deg") x = deg_to_rad(x);
        else if (!unit.empty() && unit != "rad") return bad_unit();
        break;
    case Kind::power:
        if (unit == "dBm") x = dbm_to_watts(x);
        else if (!unit.empty() && unit != "W") return bad_unit();
        break;
    case Kind::frequency:
        if (unit == "GHz") x *= 1e9;
        else if (unit == "MHz") x *= 1e6;
        else if (!unit.empty() && unit != "Hz") return bad_unit();
        break;
    case Kind::length:
        if (!unit.empty() && unit != "m") return bad_unit();
        break;
    case Kind::blockage: break;
    }
    out.number = x;
    return {};
}

struct Key {
    Kind kind;
    // carrier keys run first so an explicit beta in the same file wins
    int pass;
    std::function<void(NetworkConfig&, const Value&)> apply;
    std::function<std::string(const NetworkConfig&)> emit;
};

inline std::string num(double x)
{
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline const std::map<std::string, Key>& keys()
{
    using C = NetworkConfig;
    static const std::map<std::string, Key> table = [] {
        std::map<std::string, Key> k;
        auto real = [&](const std::string& name, Kind kind, auto getter) {
            k[name] = Key{kind, 1,
                          [getter](C& c, const Value& v) { getter(c) = v.number; },
                          [getter](const C& c) {
                              C copy = c;
                              return num(getter(copy));
                          }};
        };
        real("tau", Kind::real, [](C& c) -> double& { return c.harvest_fraction; });
        real("noise_figure", Kind::real, [](C& c) -> double& { return c.noise_figure_db; });

        real("sub6.bs_density", Kind::real, [](C& c) -> double& { return c.sub6.bs_density; });
        real("sub6.ue_density", Kind::real, [](C& c) -> double& { return c.sub6.active_ue_density; });
        real("sub6.power", Kind::power, [](C& c) -> double& { return c.sub6.bs_power; });
        real("sub6.eta", Kind::real, [](C& c) -> double& { return c.sub6.conversion_eff; });
        real("sub6.bandwidth", Kind::frequency, [](C& c) -> double& { return c.sub6.bandwidth; });
        real("sub6.beta", Kind::real, [](C& c) -> double& { return c.sub6.pathloss.beta; });
        real("sub6.alpha", Kind::real, [](C& c) -> double& { return c.sub6.pathloss.alpha; });
        real("sub6.r_ref", Kind::length, [](C& c) -> double& { return c.sub6.pathloss.r_ref; });
        k["sub6.antennas"] = Key{Kind::count, 1,
                                 [](C& c, const Value& v) {
                                     if (v.number < 1 || v.number > 1e6) throw ValidationError("sub6.antennas must be in [1, 1e6]");
                                     c.sub6.antennas = static_cast<int>(v.number);
                                 },
                                 [](const C& c) { return std::to_string(c.sub6.antennas); }};

        real("mmwave.bs_density", Kind::real, [](C& c) -> double& { return c.mmwave.bs_density; });
        real("mmwave.ue_density", Kind::real, [](C& c) -> double& { return c.mmwave.active_ue_density; });
        real("mmwave.power", Kind::power, [](C& c) -> double& { return c.mmwave.bs_power; });
        real("mmwave.eta", Kind::real, [](C& c) -> double& { return c.mmwave.conversion_eff; });
        real("mmwave.bandwidth", Kind::frequency, [](C& c) -> double& { return c.mmwave.bandwidth; });
        real("mmwave.los_beta", Kind::real, [](C& c) -> double& { return c.mmwave.los.beta; });
        real("mmwave.los_alpha", Kind::real, [](C& c) -> double& { return c.mmwave.los.alpha; });
        real("mmwave.nlos_beta", Kind::real, [](C& c) -> double& { return c.mmwave.nlos.beta; });
        real("mmwave.nlos_alpha", Kind::real, [](C& c) -> double& { return c.mmwave.nlos.alpha; });
        real("mmwave.r_ref", Kind::length, [](C& c) -> double& { return c.mmwave.los.r_ref; });
        real("mmwave.bs_main_gain", Kind::gain, [](C& c) -> double& { return c.mmwave.bs_pattern.main_gain; });
        real("mmwave.bs_side_gain", Kind::gain, [](C& c) -> double& { return c.mmwave.bs_pattern.side_gain; });
        real("mmwave.bs_beamwidth", Kind::angle, [](C& c) -> double& { return c.mmwave.bs_pattern.beamwidth; });
        real("mmwave.ue_main_gain", Kind::gain, [](C& c) -> double& { return c.mmwave.ue_pattern.main_gain; });
        real("mmwave.ue_side_gain", Kind::gain, [](C& c) -> double& { return c.mmwave.ue_pattern.side_gain; });
        real("mmwave.ue_beamwidth", Kind::angle, [](C& c) -> double& { return c.mmwave.ue_pattern.beamwidth; });

        // mmwave.r_ref covers both link classes
        k["mmwave.r_ref"].apply = [](C& c, const Value& v) {
            c.mmwave.los.r_ref = v.number;
            c.mmwave.nlos.r_ref = v.number;
        };

        k["sub6.carrier"] = Key{Kind::frequency, 0,
                                [](C& c, const Value& v) {
                                    if (!(v.number > 0.0)) throw ValidationError("sub6.carrier must be > 0");
                                    c.sub6.pathloss.beta = freq_constant_beta(v.number);
                                },
                                {}};
        k["mmwave.carrier"] = Key{Kind::frequency, 0,
                                  [](C& c, const Value& v) {
                                      if (!(v.number > 0.0)) throw ValidationError("mmwave.carrier must be > 0");
                                      c.mmwave.los.beta = freq_constant_beta(v.number);
                                      c.mmwave.nlos.beta = freq_constant_beta(v.number);
                                  },
                                  {}};
        k["mmwave.blockage"] = Key{Kind::blockage, 1,
                                   [](C& c, const Value& v) {
                                       if (v.word == "los_ball") {
                                           if (!c.mmwave.blockage.is_los_ball()) c.mmwave.blockage = BlockageModel::los_ball(20.0);
                                       } else if (c.mmwave.blockage.is_los_ball()) {
                                           c.mmwave.blockage = BlockageModel::exponential(1.0 / 141.4);
                                       }
                                   },
                                   [](const C& c) { return std::string(c.mmwave.blockage.is_los_ball() ? "los_ball" : "exponential"); }};
        // blockage parameters run after the law is chosen
        k["mmwave.rho"] = Key{Kind::real, 2,
                              [](C& c, const Value& v) {
                                  if (c.mmwave.blockage.is_los_ball()) throw ValidationError("mmwave.rho needs blockage = exponential");
                                  c.mmwave.blockage = BlockageModel::exponential(v.number);
                              },
                              [](const C& c) { return c.mmwave.blockage.is_los_ball() ? std::string() : num(c.mmwave.blockage.rho()); }};
        k["mmwave.r_los"] = Key{Kind::length, 2,
                                [](C& c, const Value& v) {
                                    if (!c.mmwave.blockage.is_los_ball()) throw ValidationError("mmwave.r_los needs blockage = los_ball");
                                    c.mmwave.blockage = BlockageModel::los_ball(v.number);
                                },
                                [](const C& c) { return c.mmwave.blockage.is_los_ball() ? num(c.mmwave.blockage.r_los()) : std::string(); }};
        return k;
    }();
    return table;
}

// emission order
inline const std::vector<std::string>& key_order()
{
    static const std::vector<std::string> order = {
        "tau", "noise_figure",
        "sub6.bs_density", "sub6.ue_density", "sub6.power", "sub6.eta", "sub6.bandwidth", "sub6.antennas",
        "sub6.beta", "sub6.alpha", "sub6.r_ref",
        "mmwave.bs_density", "mmwave.ue_density", "mmwave.power", "mmwave.eta", "mmwave.bandwidth",
        "mmwave.bs_main_gain", "mmwave.bs_side_gain", "mmwave.bs_beamwidth",
        "mmwave.ue_main_gain", "mmwave.ue_side_gain", "mmwave.ue_beamwidth",
        "mmwave.los_beta", "mmwave.los_alpha", "mmwave.nlos_beta", "mmwave.nlos_alpha", "mmwave.r_ref",
        "mmwave.blockage", "mmwave.rho", "mmwave.r_los",
    };
    return order;
}

} // namespace config_detail

/// Parses `section.key = value` text on top of `base`. Throws ParseError or ValidationError.
inline NetworkConfig parse_config_text(const std::string& text, NetworkConfig base = {})
{
    using namespace config_detail;
    struct Item {
        const Key* key;
        Value value;
        int line;
    };
    std::vector<Item> items;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string line = raw.substr(0, raw.find('#'));
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        const int key_col = static_cast<int>(line.find_first_not_of(" \t")) + 1;
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no, key_col);
        const std::string name = trim(line.substr(0, eq));
        if (name.empty()) throw ParseError("missing key", line_no, key_col);
        const auto it = keys().find(name);
        if (it == keys().end()) throw ParseError("unknown key '" + name + "'", line_no, key_col);
        if (seen.count(name)) throw ParseError("duplicate key '" + name + "' (first on line " + std::to_string(seen[name]) + ")", line_no, key_col);
        seen[name] = line_no;
        const std::string rhs = line.substr(eq + 1);
        const int value_col = static_cast<int>(eq + 1 + rhs.find_first_not_of(" \t")) + 1;
        const std::string value_text = trim(rhs);
        if (value_text.empty()) throw ParseError("missing value", line_no, static_cast<int>(eq) + 2);
        Value v;
        const std::string err = convert(it->second.kind, value_text, v);
        if (!err.empty()) throw ParseError(err, line_no, value_col);
        items.push_back({&it->second, v, line_no});
    }
    for (int pass = 0; pass <= 2; ++pass)
        for (const auto& item : items)
            if (item.key->pass == pass) item.key->apply(base, item.value);
    base.validate();
    return base;
}

/// Reads and parses a config file; unset keys keep the defaults of NetworkConfig.
inline NetworkConfig parse_config(const std::string& path, NetworkConfig base = {})
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), std::move(base));
}

/// Canonical text form; parse_config_text(emit_config(c)) reproduces c exactly.
inline std::string emit_config(const NetworkConfig& cfg)
{
    using namespace config_detail;
    std::string out;
    for (const auto& name : key_order()) {
        const std::string v = keys().at(name).emit(cfg);
        if (v.empty()) continue;
        out += name + " = " + v + "\n";
    }
    return out;
}

/// 64-bit FNV-1a of the canonical config text, as 16 hex digits.
inline std::string config_hash(const NetworkConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : emit_config(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace wpt

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggdiff/entropies.hpp"
#include "aggdiff/io.hpp"
#include "aggdiff/kernels.hpp"

namespace aggdiff {

/// Configuration or validation failure; maps to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::string const& msg) : std::runtime_error(msg) {}
};

/// Flat dotted-key configuration: `key = value` lines, `#` comments.
class Config {
  public:
    static Config parse(std::string const& text)
    {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#')
                continue;
            auto const eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": expected `key = value`, got: " + s);
            std::string const key = strip(s.substr(0, eq));
            std::string const value = strip(s.substr(eq + 1));
            if (key.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty key");
            if (cfg.values_.count(key))
                throw ConfigError("line " + std::to_string(lineno) + ": duplicate key `" + key +
                                  "`");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static Config load(std::string const& path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    void set(std::string const& key, std::string const& value) { values_[key] = value; }

    bool has(std::string const& key) const { return values_.count(key) != 0; }

    std::string get(std::string const& key) const
    {
        auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("missing required key `" + key + "`");
        return it->second;
    }

    std::string get_or(std::string const& key, std::string const& fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(std::string const& key) const { return to_double(key, get(key)); }

    double get_double_or(std::string const& key, double fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_double(key, it->second);
    }

    long get_int(std::string const& key) const { return to_int(key, get(key)); }

    long get_int_or(std::string const& key, long fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_int(key, it->second);
    }

    /// Canonical text form: sorted keys, one per line.
    std::string serialize() const
    {
        std::string out;
        for (auto const& [k, v] : values_) {
            out += k;
            out += " = ";
            out += v;
            out += "\n";
        }
        return out;
    }

    std::uint64_t hash() const { return fnv1a64(serialize()); }

    std::map<std::string, std::string> const& entries() const { return values_; }

    /// Rejects keys outside the accepted vocabulary.
    void reject_unknown(std::vector<std::string> const& known) const
    {
        for (auto const& [k, v] : values_) {
            if (std::find(known.begin(), known.end(), k) == known.end())
                throw ConfigError("unknown key `" + k + "`");
        }
    }

  private:
    static std::string strip(std::string const& s)
    {
        auto b = s.begin(), e = s.end();
        while (b != e && std::isspace(static_cast<unsigned char>(*b)))
            ++b;
        while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1))))
            --e;
        return std::string(b, e);
    }

    static double to_double(std::string const& key, std::string const& v)
    {
        try {
            std::size_t pos = 0;
            double const x = std::stod(v, &pos);
            if (pos != v.size())
                throw std::invalid_argument(v);
            return x;
        } catch (std::exception const&) {
            throw ConfigError("key `" + key + "`: cannot parse number from `" + v + "`");
        }
    }

    static long to_int(std::string const& key, std::string const& v)
    {
        try {
            std::size_t pos = 0;
            long const x = std::stol(v, &pos);
            if (pos != v.size())
                throw std::invalid_argument(v);
            return x;
        } catch (std::exception const&) {
            throw ConfigError("key `" + key + "`: cannot parse integer from `" + v + "`");
        }
    }

    std::map<std::string, std::string> values_;
};

/// Validated run description for the command-line front end.
struct RunConfig {
    std::string command;
    int d = 1;
    double epsilon = 1.0;
    std::optional<KernelSpec> kernel;
    std::optional<EntropySpec> entropy;
    long grid_M = 1024;
    double grid_R = 1.0;
    std::string density_path;        // energy input, optional
    double ball_radius = 1.0;        // energy/particles default initial data
    double scan_rmin = 1e-3, scan_rmax = 1e3;
    long scan_points = 200;
    double steady_theta = 0.5;
    long steady_max_iter = 2000;
    long particles_N = 200;
    double particles_dt = 1e-2, particles_T = 10.0;
    long particles_stride = 100;
    long particles_bins = 0;
    double ce_gamma = 1.5, ce_bound = 1e3;
    long ce_K_max = 4096;
    std::uint64_t seed = 0;
    std::string output = "out";
    long threads = 0;
    Config raw;
};

inline std::vector<std::string> const& known_keys()
{
    static std::vector<std::string> const keys = {
        "command",          "d",
        "epsilon",          "kernel.variant",
        "kernel.beta",      "kernel.path",
        "entropy.variant",  "entropy.m",
        "grid.M",           "grid.R",
        "density.path",     "density.ball_radius",
        "scan.rmin",        "scan.rmax",
        "scan.points",      "steady.theta",
        "steady.max_iter",  "particles.N",
        "particles.dt",     "particles.T",
        "particles.stride", "particles.bins",
        "counterexample.gamma", "counterexample.bound",
        "counterexample.K_max", "seed",
        "output",           "threads"};
    return keys;
}

inline KernelSpec kernel_from_config(Config const& cfg, int d)
{
    std::string const variant = cfg.get("kernel.variant");
    if (variant == "power") {
        double const beta = cfg.get_double("kernel.beta");
        if (!(beta > -d))
            throw ConfigError("kernel.beta must exceed -d (local integrability)");
        if (beta == 0)
            throw ConfigError("kernel.beta must be nonzero; use kernel.variant = log");
        return KernelSpec::power_law(beta);
    }
    if (variant == "log")
        return KernelSpec::logarithmic();
    if (variant == "tabulated") {
        std::string const path = cfg.get("kernel.path");
        std::ifstream probe(path);
        if (!probe)
            throw ConfigError("kernel.path does not exist: " + path);
        return KernelSpec::load_tabulated(path);
    }
    throw ConfigError("kernel.variant must be one of power|log|tabulated, got `" + variant + "`");
}

inline EntropySpec entropy_from_config(Config const& cfg)
{
    std::string const variant = cfg.get("entropy.variant");
    if (variant == "power") {
        double const m = cfg.get_double("entropy.m");
        if (!(m > 0) || m == 1.0)
            throw ConfigError("entropy.m must be positive and different from 1");
        return EntropySpec::power(m);
    }
    if (variant == "linear")
        return EntropySpec::linear();
    throw ConfigError("entropy.variant must be power|linear, got `" + variant + "`");
}

inline RunConfig validate_config(Config const& cfg)
{
    cfg.reject_unknown(known_keys());
    RunConfig rc;
    rc.raw = cfg;
    rc.command = cfg.get("command");
    static std::vector<std::string> const commands = {
        "energy", "scan", "classify", "steady", "particles", "counterexample", "properties"};
    if (std::find(commands.begin(), commands.end(), rc.command) == commands.end())
        throw ConfigError("unknown command `" + rc.command + "`");

    rc.seed = static_cast<std::uint64_t>(cfg.get_int_or("seed", 0));
    rc.output = cfg.get_or("output", "out");
    rc.threads = cfg.get_int_or("threads", 0);
    if (rc.threads < 0)
        throw ConfigError("threads must be nonnegative");

    if (rc.command == "properties")
        return rc;

    rc.d = static_cast<int>(cfg.get_int("d"));
    if (rc.d < 1)
        throw ConfigError("d must be a positive integer");

    if (rc.command == "counterexample") {
        rc.epsilon = cfg.get_double("epsilon");
        if (!(rc.epsilon > 0))
            throw ConfigError("epsilon must be positive for the ring construction");
        double const beta = cfg.get_double("kernel.beta");
        if (!(beta > 0))
            throw ConfigError("kernel.beta must be positive for the ring construction");
        double const m = cfg.get_double("entropy.m");
        if (!(m > 0) || !(m < 1))
            throw ConfigError("entropy.m must lie in (0, 1) for the ring construction");
        rc.kernel = KernelSpec::power_law(beta);
        rc.entropy = EntropySpec::power(m);
        rc.ce_gamma = cfg.get_double("counterexample.gamma");
        if (!(rc.ce_gamma > 0))
            throw ConfigError("counterexample.gamma must be positive");
        rc.ce_bound = cfg.get_double_or("counterexample.bound", 1e3);
        rc.ce_K_max = cfg.get_int_or("counterexample.K_max", 4096);
        return rc;
    }

    rc.epsilon = cfg.get_double("epsilon");
    if (!(rc.epsilon >= 0))
        throw ConfigError("epsilon must be nonnegative");
    rc.kernel = kernel_from_config(cfg, rc.d);
    if (rc.command == "scan" || rc.command == "classify" || rc.command == "energy")
        rc.entropy = entropy_from_config(cfg);

    rc.grid_M = cfg.get_int_or("grid.M", 1024);
    if (rc.grid_M < 8)
        throw ConfigError("grid.M must be at least 8");
    rc.grid_R = cfg.get_double_or("grid.R", 1.0);
    if (!(rc.grid_R > 0))
        throw ConfigError("grid.R must be positive");

    if (rc.command == "energy") {
        rc.density_path = cfg.get_or("density.path", "");
        if (!rc.density_path.empty()) {
            std::ifstream probe(rc.density_path);
            if (!probe)
                throw ConfigError("density.path does not exist: " + rc.density_path);
        }
        rc.ball_radius = cfg.get_double_or("density.ball_radius", 1.0);
        if (!(rc.ball_radius > 0))
            throw ConfigError("density.ball_radius must be positive");
    } else if (rc.command == "scan") {
        rc.scan_rmin = cfg.get_double_or("scan.rmin", 1e-3);
        rc.scan_rmax = cfg.get_double_or("scan.rmax", 1e3);
        rc.scan_points = cfg.get_int_or("scan.points", 200);
        if (!(rc.scan_rmin > 0) || !(rc.scan_rmax > rc.scan_rmin))
            throw ConfigError("scan radii must satisfy 0 < scan.rmin < scan.rmax");
        if (rc.scan_points < 2)
            throw ConfigError("scan.points must be at least 2");
    } else if (rc.command == "steady") {
        rc.steady_theta = cfg.get_double_or("steady.theta", 0.5);
        if (!(rc.steady_theta > 0) || rc.steady_theta > 1)
            throw ConfigError("steady.theta must lie in (0, 1]");
        rc.steady_max_iter = cfg.get_int_or("steady.max_iter", 2000);
        if (rc.steady_max_iter < 1)
            throw ConfigError("steady.max_iter must be positive");
        if (!(rc.epsilon > 0))
            throw ConfigError("epsilon must be positive for the steady solver");
    } else if (rc.command == "particles") {
        rc.particles_N = cfg.get_int_or("particles.N", 200);
        if (rc.particles_N < 2)
            throw ConfigError("particles.N must be at least 2");
        rc.particles_dt = cfg.get_double_or("particles.dt", 1e-2);
        rc.particles_T = cfg.get_double_or("particles.T", 10.0);
        if (!(rc.particles_dt > 0) || !(rc.particles_T >= rc.particles_dt))
            throw ConfigError("particles time grid needs 0 < particles.dt <= particles.T");
        rc.particles_stride = cfg.get_int_or("particles.stride", 100);
        if (rc.particles_stride < 1)
            throw ConfigError("particles.stride must be positive");
        rc.particles_bins = cfg.get_int_or("particles.bins", 0);
        rc.ball_radius = cfg.get_double_or("density.ball_radius", 1.0);
        if (!(rc.ball_radius > 0))
            throw ConfigError("density.ball_radius must be positive");
    }
    return rc;
}

}  // namespace aggdiff

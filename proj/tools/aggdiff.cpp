// SPDX-License-Identifier: Apache-2.0
//
// Batch front end: one command per process, flat dotted-key configuration
// loaded from --config <file> with --key=value overrides.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "aggdiff/config.hpp"
#include "aggdiff/dyadic.hpp"
#include "aggdiff/energy.hpp"
#include "aggdiff/io.hpp"
#include "aggdiff/measures.hpp"
#include "aggdiff/particles.hpp"
#include "aggdiff/properties.hpp"
#include "aggdiff/scaling.hpp"
#include "aggdiff/steady.hpp"
#include "aggdiff/threads.hpp"
#include "aggdiff/version.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

void usage()
{
    std::cout <<
        "aggdiff " << aggdiff::version_string << " - free-energy toolkit for "
        "aggregation-diffusion models\n"
        "\n"
        "usage: aggdiff [--config <file>] [--key=value ...]\n"
        "\n"
        "commands (key `command`):\n"
        "  energy          free energy of a density (density.path or density.ball_radius)\n"
        "  scan            dilation-ray energy scan -> CSV r,energy,derivative\n"
        "  classify        existence/nonexistence verdict -> text report\n"
        "  steady          fixed-point steady state -> density CSV + report\n"
        "  particles       interacting-particle run -> snapshot + summary CSV\n"
        "  counterexample  dyadic-ring divergence certificate -> CSV\n"
        "  properties      invariant suite -> pass/fail table\n"
        "\n"
        "common keys: d, epsilon, kernel.variant=power|log|tabulated, kernel.beta,\n"
        "  kernel.path, entropy.variant=power|linear, entropy.m, grid.M, grid.R,\n"
        "  seed, output, threads\n";
}

int dispatch(aggdiff::RunConfig const& rc)
{
    using namespace aggdiff;
    std::uint64_t const hash = rc.raw.hash();

    if (rc.command == "properties") {
        auto const table = run_property_suite();
        CsvWriter csv(rc.output + "_properties.csv", "name,pass,detail", hash);
        bool all = true;
        for (auto const& row : table) {
            csv.raw_row(row.name + "," + (row.pass ? "1" : "0") + "," + row.detail);
            std::cout << (row.pass ? "[PASS] " : "[FAIL] ") << row.name << " (" << row.detail
                      << ")\n";
            all = all && row.pass;
        }
        if (!all) {
            std::cerr << "property_failure,invariant suite reported failures\n";
            return exit_numeric;
        }
        return exit_ok;
    }

    if (rc.command == "energy") {
        RadialDensity const rho =
            rc.density_path.empty()
                ? uniform_ball(rc.ball_radius, rc.d, static_cast<std::size_t>(rc.grid_M))
                : RadialDensity::load_csv(rc.density_path);
        auto const breakdown = free_energy(rho, *rc.kernel, *rc.entropy, rc.epsilon);
        CsvWriter csv(rc.output + "_energy.csv", "interaction,entropy,epsilon,total,err_est",
                      hash);
        csv.row({breakdown.interaction, breakdown.entropy, breakdown.epsilon, breakdown.total,
                 breakdown.quadrature_error_estimate});
        std::cout << "total = " << format_value(breakdown.total) << "\n";
        return exit_ok;
    }

    if (rc.command == "scan") {
        auto const grid = log_grid(rc.scan_rmin, rc.scan_rmax,
                                   static_cast<std::size_t>(rc.scan_points));
        auto const pts = dilation_energy_scan(*rc.kernel, *rc.entropy, rc.epsilon, rc.d, grid,
                                              static_cast<std::size_t>(rc.grid_M));
        CsvWriter csv(rc.output + "_scan.csv", "r,energy,derivative", hash);
        for (auto const& p : pts)
            csv.row({p.r, p.energy, p.derivative});
        return exit_ok;
    }

    if (rc.command == "classify") {
        auto const verdict = classify_regime(*rc.kernel, *rc.entropy, rc.epsilon, rc.d);
        std::string line = verdict.name();
        if (verdict.kind == RegimeVerdict::Kind::Critical)
            line += "(eps_c = " + format_value(verdict.epsilon_critical) + ")";
        std::ofstream report(rc.output + "_classify.txt");
        report << line << "\n" << verdict.trace << "\n";
        std::cout << line << "\n";
        return exit_ok;
    }

    if (rc.command == "steady") {
        auto const rep = solve_fixed_point(*rc.kernel, rc.epsilon, rc.d, rc.grid_R,
                                           static_cast<std::size_t>(rc.grid_M), rc.steady_theta,
                                           static_cast<int>(rc.steady_max_iter));
        rep.density.save_csv(rc.output + "_steady_density.csv");
        CsvWriter csv(rc.output + "_steady_report.csv",
                      "C,residual,iters,converged,flatness_bound", hash);
        csv.row({rep.multiplier, rep.el_residual_sup, static_cast<double>(rep.iterations),
                 rep.converged ? 1.0 : 0.0, rep.flatness});
        if (!rep.converged) {
            std::cerr << "no_convergence,fixed point iteration hit max_iter\n";
            return exit_numeric;
        }
        return exit_ok;
    }

    if (rc.command == "particles") {
        SimConfig sim;
        sim.N = static_cast<std::size_t>(rc.particles_N);
        sim.d = rc.d;
        sim.kernel = *rc.kernel;
        sim.eps = rc.epsilon;
        sim.dt = rc.particles_dt;
        sim.T = rc.particles_T;
        sim.seed = rc.seed;
        sim.snapshot_stride = static_cast<std::size_t>(rc.particles_stride);
        auto const init = sample_particles(
            uniform_ball(rc.ball_radius, rc.d, static_cast<std::size_t>(rc.grid_M)), sim.N,
            sim.seed);
        auto const traj = run(sim, init);

        std::string header = "t,particle_id";
        for (int k = 1; k <= rc.d; ++k)
            header += ",x_" + std::to_string(k);
        CsvWriter snap(rc.output + "_particles.csv", header, hash);
        for (auto const& [t, pos] : traj.snapshots)
            for (std::size_t i = 0; i < sim.N; ++i) {
                std::vector<double> row = {t, static_cast<double>(i)};
                for (int k = 0; k < rc.d; ++k)
                    row.push_back(pos[i * static_cast<std::size_t>(rc.d) + k]);
                snap.row(row);
            }
        CsvWriter summary(rc.output + "_summary.csv", "t,interaction,variance_about_com", hash);
        for (auto const& s : traj.summary)
            summary.row({s.t, s.interaction, s.variance_about_com});
        return exit_ok;
    }

    if (rc.command == "counterexample") {
        auto const res = certify_unbounded(rc.ce_gamma, rc.kernel->beta(), rc.entropy->m(),
                                           rc.d, rc.epsilon, rc.ce_bound,
                                           static_cast<int>(rc.ce_K_max));
        CsvWriter csv(rc.output + "_counterexample.csv", "K,moment_sum,entropy_sum,energy",
                      hash);
        for (auto const& row : res.trail)
            csv.row({static_cast<double>(row.K), row.moment_sum, row.entropy_sum, row.energy});
        std::cout << (res.found ? "certified at K = " + std::to_string(res.K)
                                : std::string("not-found"))
                  << ": " << res.note << "\n";
        return exit_ok;
    }

    std::cerr << "bad_command,unknown command\n";
    return exit_config;
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace aggdiff;
    Config cfg;
    try {
        for (int i = 1; i < argc; ++i) {
            std::string const arg = argv[i];
            if (arg == "-h" || arg == "--help") {
                usage();
                return exit_ok;
            }
            if (arg == "--config") {
                if (i + 1 >= argc)
                    throw ConfigError("--config needs a path");
                auto const file = Config::load(argv[++i]);
                for (auto const& [k, v] : file.entries())
                    if (!cfg.has(k))
                        cfg.set(k, v);
                continue;
            }
            if (arg.rfind("--", 0) == 0) {
                auto const eq = arg.find('=');
                if (eq == std::string::npos)
                    throw ConfigError("flags take the form --key=value: " + arg);
                cfg.set(arg.substr(2, eq - 2), arg.substr(eq + 1));
                continue;
            }
            throw ConfigError("unrecognized argument: " + arg);
        }
        if (cfg.entries().empty()) {
            usage();
            return exit_config;
        }
        RunConfig const rc = validate_config(cfg);
        thread_cap().store(static_cast<int>(rc.threads));
        return dispatch(rc);
    } catch (ConfigError const& e) {
        std::cerr << "config_error," << e.what() << "\n";
        return exit_config;
    } catch (std::invalid_argument const& e) {
        std::cerr << "config_error," << e.what() << "\n";
        return exit_config;
    } catch (std::exception const& e) {
        std::cerr << "numeric_error," << e.what() << "\n";
        return exit_numeric;
    }
}

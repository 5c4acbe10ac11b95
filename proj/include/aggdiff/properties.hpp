// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "aggdiff/dyadic.hpp"
#include "aggdiff/energy.hpp"
#include "aggdiff/measures.hpp"
#include "aggdiff/particles.hpp"
#include "aggdiff/rng.hpp"
#include "aggdiff/scaling.hpp"
#include "aggdiff/steady.hpp"

namespace aggdiff {

struct PropertyResult {
    std::string name;
    bool pass;
    std::string detail;
};

inline RadialDensity random_density(int d, std::size_t M, Rng& rng, bool allow_zero = true)
{
    std::vector<double> v(M);
    for (auto& x : v) {
        x = rng.uniform();
        if (allow_zero && rng.uniform() < 0.2)
            x = 0;
    }
    if (std::count(v.begin(), v.end(), 0.0) == static_cast<long>(M))
        v[M / 2] = 1.0;
    return RadialDensity::normalized(d, 0.5 + rng.uniform(), std::move(v));
}

/// Deterministic invariant suite mirroring the library's contracts; each row
/// is a named check with a pass flag and a short numeric detail.
inline std::vector<PropertyResult> run_property_suite()
{
    std::vector<PropertyResult> table;
    auto check = [&](std::string const& name, bool pass, double worst) {
        std::ostringstream ss;
        ss.precision(6);
        ss << "worst = " << worst;
        table.push_back({name, pass, ss.str()});
    };
    Rng rng(20260810);

    {  // mass conservation across constructors and transforms
        double worst = 0;
        for (double r : {0.5, 1.0, 3.0})
            for (int d : {1, 2, 3}) {
                auto const ball = uniform_ball(r, d, 128);
                worst = std::max(worst, std::abs(ball.mass() - 1.0));
                worst = std::max(worst, std::abs(dilate(ball, 1.7).mass() - 1.0));
            }
        for (int i = 0; i < 10; ++i) {
            auto const rho = random_density(1 + i % 3, 64, rng);
            worst = std::max(worst, std::abs(rho.mass() - 1.0));
            if (rho.atom_mass() == 0)
                worst = std::max(worst, std::abs(rearrange_decreasing(rho).mass() - 1.0));
        }
        check("mass-conservation", worst <= mass_tol, worst);
    }
    {  // dilation group law
        double worst = 0;
        for (int i = 0; i < 6; ++i) {
            auto const rho = random_density(1 + i % 3, 64, rng);
            auto const one = dilate(dilate(rho, 0.7), 2.9);
            auto const two = dilate(rho, 0.7 * 2.9);
            for (std::size_t k = 0; k < one.cells(); ++k)
                worst = std::max(worst, std::abs(one.value(k) - two.value(k)));
            worst = std::max(worst, std::abs(one.spacing() - two.spacing()));
        }
        check("dilation-group-law", worst <= 1e-12, worst);
    }
    {  // rearrangement idempotence (bitwise) and fixed point on sorted data
        bool pass = true;
        for (int i = 0; i < 8; ++i) {
            auto const rho = random_density(1 + i % 3, 64, rng);
            auto const once = rearrange_decreasing(rho);
            auto const twice = rearrange_decreasing(once);
            for (std::size_t k = 0; k < once.cells(); ++k)
                if (once.value(k) != twice.value(k))
                    pass = false;
        }
        check("rearrangement-idempotence", pass, pass ? 0.0 : 1.0);
    }
    {  // equimeasurability of the rearrangement in one dimension
        double worst = 0;
        for (int i = 0; i < 10; ++i) {
            auto const rho = random_density(1, 128, rng);
            auto const star = rearrange_decreasing(rho);
            for (double m : {0.5, 2.0, 3.0}) {
                auto const U = EntropySpec::power(m);
                worst = std::max(worst,
                                 std::abs(entropy_energy(rho, U) - entropy_energy(star, U)));
            }
            auto const lin = EntropySpec::linear();
            worst = std::max(worst,
                             std::abs(entropy_energy(rho, lin) - entropy_energy(star, lin)));
        }
        check("rearrangement-equimeasurability-1d", worst <= 1e-8, worst);
    }
    {  // v(r) = -r u'(r) against central differences
        double worst = 0;
        for (auto const& U : {EntropySpec::power(2.0), EntropySpec::power(0.5),
                              EntropySpec::power(1.5), EntropySpec::linear()})
            for (int d : {1, 2, 3})
                for (double r : {0.5, 1.0, 2.0}) {
                    double const step = 1e-5 * r;
                    double const du =
                        (U.mccann_u(d, r + step) - U.mccann_u(d, r - step)) / (2 * step);
                    worst = std::max(worst, std::abs(U.scaling_v(d, r) + r * du));
                }
        check("scaling-v-derivative", worst <= 1e-6, worst);
    }
    {  // pressure nonnegative and nondecreasing for m >= 1
        double worst = 0;
        for (auto const& U : {EntropySpec::power(1.5), EntropySpec::power(3.0),
                              EntropySpec::linear()}) {
            double prev = 0;
            for (double lr = -3; lr <= 3.0001; lr += 0.1) {
                double const p = U.P(std::pow(10.0, lr));
                worst = std::max(worst, prev - p);
                worst = std::max(worst, -p);
                prev = p;
            }
        }
        check("pressure-monotone", worst <= 0, worst);
    }
    {  // u nonincreasing and convex on sampled grids
        double worst = 0;
        for (auto const& U : {EntropySpec::power(2.0), EntropySpec::power(0.5),
                              EntropySpec::linear()})
            for (int d : {1, 2}) {
                double prev = U.mccann_u(d, 0.1);
                double prev_diff = 0;
                bool first = true;
                for (double r = 0.2; r <= 5.0; r += 0.1) {
                    double const u = U.mccann_u(d, r);
                    worst = std::max(worst, u - prev);  // nonincreasing
                    if (!first)
                        worst = std::max(worst, prev_diff - (u - prev) - 1e-12);  // convex
                    prev_diff = u - prev;
                    prev = u;
                    first = false;
                }
            }
        check("mccann-u-shape", worst <= 1e-9, worst);
    }
    {  // kernel homogeneity
        double worst = 0;
        for (double beta : {2.0, -0.5, 1.0, -1.5})
            for (double s : {0.3, 1.0, 4.0}) {
                auto const W = KernelSpec::power_law(beta);
                double const lhs = W.value(2.5 * s);
                double const rhs = std::pow(2.5, beta) * W.value(s);
                worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
            }
        check("kernel-homogeneity", worst <= 1e-12, worst);
    }
    {  // rearrangement lowers the free energy for attractive singular kernels
        double worst = -1e300;
        for (int i = 0; i < 25; ++i) {
            auto const rho = random_density(1, 96, rng);
            auto const star = rearrange_decreasing(rho);
            for (auto const& W : {KernelSpec::power_law(-0.5), KernelSpec::logarithmic()})
                for (double eps_v : {0.0, 0.5}) {
                    double const before =
                        interaction_energy(rho, W) +
                        eps_v * entropy_energy(rho, EntropySpec::power(2.0));
                    double const after =
                        interaction_energy(star, W) +
                        eps_v * entropy_energy(star, EntropySpec::power(2.0));
                    worst = std::max(worst, after - before);
                }
        }
        check("riesz-rearrangement", worst <= 1e-6, worst);
    }
    {  // homogeneity of the two energy pieces under dilation
        double worst = 0;
        for (int i = 0; i < 5; ++i) {
            auto const rho = random_density(1 + i % 2, 64, rng);
            for (double r : {0.5, 2.0}) {
                auto const scaled = dilate(rho, r);
                for (double beta : {-0.5, 1.0, 2.0}) {
                    auto const W = KernelSpec::power_law(beta);
                    double const base = interaction_energy(rho, W);
                    double const rel = std::abs(interaction_energy(scaled, W) -
                                                std::pow(r, beta) * base) /
                                       std::max(1e-30, std::abs(base));
                    worst = std::max(worst, rel);
                }
                for (double m : {0.5, 2.0}) {
                    auto const U = EntropySpec::power(m);
                    double const base = entropy_energy(rho, U);
                    double const rel =
                        std::abs(entropy_energy(scaled, U) -
                                 std::pow(r, rho.dim() * (1.0 - m)) * base) /
                        std::max(1e-30, std::abs(base));
                    worst = std::max(worst, rel);
                }
            }
        }
        check("dilation-scaling-laws", worst <= 1e-8, worst);
    }
    {  // mass-rescaling identities with c = r0^d
        double worst = 0;
        for (int i = 0; i < 5; ++i) {
            int const d = 1 + i % 2;
            auto const rho = random_density(d, 64, rng, false);
            double const r0 = std::pow(2.0, 1.0 / d);
            double const c = std::pow(r0, d);
            auto const tilde = rescale_mass(dilate(rho, r0), c);
            for (double m : {0.5, 2.0}) {
                auto const U = EntropySpec::power(m);
                double const lhs = entropy_energy(tilde, U);
                double const rhs = std::pow(c, m) * std::pow(r0, (1.0 - m) * d) *
                                   entropy_energy(rho, U);
                worst = std::max(worst, std::abs(lhs - rhs) / std::max(1e-30, std::abs(rhs)));
            }
            for (double beta : {-0.5, 1.0}) {
                auto const W = KernelSpec::power_law(beta);
                double const lhs = interaction_energy(tilde, W);
                double const rhs =
                    c * c * std::pow(r0, beta) * interaction_energy(rho, W);
                worst = std::max(worst, std::abs(lhs - rhs) / std::max(1e-30, std::abs(rhs)));
            }
        }
        check("mass-rescaling-laws", worst <= 1e-8, worst);
    }
    {  // moment sandwich for centered radial densities
        double worst = 0;
        bool positive = true;
        for (int i = 0; i < 8; ++i) {
            auto const rho = random_density(1 + i % 3, 64, rng);
            for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
                double const pair = pair_power_integral(rho, alpha);
                double const cap =
                    2.0 * std::max(1.0, std::pow(2.0, alpha - 1.0)) * moment(rho, alpha);
                worst = std::max(worst, pair - cap);
                if (!(pair > 0))
                    positive = false;
            }
        }
        check("moment-sandwich", positive && worst <= 1e-8, worst);
    }
    {  // pointwise triangle variant
        double worst = 0;
        for (int i = 0; i < 10000; ++i) {
            double const x = 4.0 * (rng.uniform() - 0.5), y = 4.0 * (rng.uniform() - 0.5);
            for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
                double const lhs = std::pow(std::abs(x - y), alpha);
                double const rhs = std::max(1.0, std::pow(2.0, alpha - 1.0)) *
                                   (std::pow(std::abs(x), alpha) + std::pow(std::abs(y), alpha));
                worst = std::max(worst, lhs - rhs);
            }
        }
        check("triangle-variant", worst <= 1e-12, worst);
    }
    {  // dilation derivative vs finite differences of the scan
        double worst = 0;
        struct Case { double beta; double m; double eps; int d; };
        for (auto const& c : std::vector<Case>{{2.0, 0.0, 1.0, 1},
                                               {-0.5, 2.0, 0.7, 2},
                                               {1.0, 1.5, 0.3, 2},
                                               {-0.5, 1.2, 1.0, 3}}) {
            auto const W = KernelSpec::power_law(c.beta);
            auto const U = c.m == 0.0 ? EntropySpec::linear() : EntropySpec::power(c.m);
            for (double r : {0.5, 1.0, 2.0}) {
                double const step = 1e-4 * r;
                auto const pts =
                    dilation_energy_scan(W, U, c.eps, c.d, {r - step, r, r + step}, 256);
                double const fd = (pts[2].energy - pts[0].energy) / (2 * step);
                double const an = pts[1].derivative;
                worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
            }
        }
        check("derivative-consistency", worst <= 1e-5, worst);
    }
    {  // virial identity at the optimal dilation
        double worst = 0;
        for (int i = 0; i < 3; ++i) {
            auto const rho = random_density(2, 64, rng, false);
            auto const opt = optimal_dilation(rho, -0.5, 2.0, 0.5 + 0.5 * i, 2);
            worst = std::max(worst, opt.virial_residual);
        }
        check("virial-at-optimum", worst <= 1e-6, worst);
    }
    {  // ring-series term ratios match the closed forms
        auto const s = dyadic_series(1.5, 1.0, 0.5, 2, 24);
        double worst = 0;
        for (std::size_t k = 3; k + 1 < s.moment_partial_sums.size(); ++k) {
            double const mr = (s.moment_partial_sums[k + 1] - s.moment_partial_sums[k]) /
                              (s.moment_partial_sums[k] - s.moment_partial_sums[k - 1]);
            double const er = (s.entropy_partial_sums[k + 1] - s.entropy_partial_sums[k]) /
                              (s.entropy_partial_sums[k] - s.entropy_partial_sums[k - 1]);
            worst = std::max(worst, std::abs(mr - s.moment_ratio));
            worst = std::max(worst, std::abs(er - s.entropy_ratio));
        }
        check("dyadic-series-ratios", worst <= 1e-12, worst);
    }
    {  // classifier verdicts corroborated by diverging scans
        auto const down_inf = classify_regime(KernelSpec::power_law(1.0),
                                              EntropySpec::power(0.2), 1.0, 2);
        auto const scan_inf = dilation_energy_scan(KernelSpec::power_law(1.0),
                                                   EntropySpec::power(0.2), 1.0, 2,
                                                   log_grid(1.0, 1e6, 60), 128);
        auto const down_zero = classify_regime(KernelSpec::power_law(-0.5),
                                               EntropySpec::power(1.2), 1.0, 2);
        auto const scan_zero = dilation_energy_scan(KernelSpec::power_law(-0.5),
                                                    EntropySpec::power(1.2), 1.0, 2,
                                                    log_grid(1e-8, 1.0, 60), 128);
        bool const pass =
            down_inf.kind == RegimeVerdict::Kind::UnboundedBelowAtInfinity &&
            scan_inf.back().energy < -1e3 &&
            down_zero.kind == RegimeVerdict::Kind::UnboundedBelowAtZero &&
            scan_zero.front().energy < -1e3;
        check("classifier-scan-soundness", pass,
              std::min(scan_inf.back().energy, scan_zero.front().energy));
    }
    {  // critical log-kernel family: energy affine in log r with slope 1/2 - eps d
        double worst = 0;
        for (double eps_v : {0.1, 0.25, 0.7}) {
            auto const pts = dilation_energy_scan(KernelSpec::logarithmic(),
                                                  EntropySpec::linear(), eps_v, 2,
                                                  log_grid(0.01, 100.0, 9), 256);
            double const slope_expect = 0.5 - eps_v * 2;
            for (std::size_t i = 1; i < pts.size(); ++i) {
                double const slope = (pts[i].energy - pts[i - 1].energy) /
                                     (std::log(pts[i].r) - std::log(pts[i - 1].r));
                worst = std::max(worst, std::abs(slope - slope_expect));
            }
        }
        check("log-kernel-critical-slope", worst <= 1e-6, worst);
    }
    {  // steady state: positivity and the flatness bound
        std::vector<double> r(64), w(64);
        for (int i = 0; i < 64; ++i) {
            r[i] = 16.0 * i / 63.0;
            w[i] = std::min(r[i] * r[i], 4.0);
        }
        auto const W = KernelSpec::tabulated(r, w);
        auto const rep = solve_fixed_point(W, 1.0, 1, 4.0, 256);
        double minval = 1e300, supval = 0;
        for (std::size_t i = 0; i < rep.density.cells(); ++i) {
            minval = std::min(minval, rep.density.value(i));
            supval = std::max(supval, rep.density.value(i));
        }
        bool const pass = rep.converged && minval > 0 && supval <= rep.flatness + 1e-10 &&
                          rep.el_residual_sup <= 1e-3;
        check("steady-positivity-flatness", pass, supval - rep.flatness);
    }
    {  // particle determinism and center-of-mass invariance at zero noise
        SimConfig cfg;
        cfg.N = 16;
        cfg.d = 2;
        cfg.kernel = KernelSpec::power_law(2.0);
        cfg.eps = 0.0;
        cfg.dt = 1e-3;
        cfg.T = 0.2;
        cfg.seed = 7;
        cfg.snapshot_stride = 50;
        auto const init = sample_particles(uniform_ball(1.0, 2, 64), cfg.N, cfg.seed);
        auto const a = aggdiff::run(cfg, init);
        auto const b = aggdiff::run(cfg, init);
        bool pass = a.summary.size() == b.summary.size();
        double com_drift = 0;
        if (pass)
            for (std::size_t i = 0; i < a.summary.size(); ++i)
                pass = pass && a.summary[i].interaction == b.summary[i].interaction;
        {
            std::vector<double> c0(2, 0.0), c1(2, 0.0);
            auto const& first = a.snapshots.front().second;
            auto const& last = a.snapshots.back().second;
            for (std::size_t i = 0; i < cfg.N; ++i)
                for (int k = 0; k < 2; ++k) {
                    c0[k] += first[i * 2 + k];
                    c1[k] += last[i * 2 + k];
                }
            for (int k = 0; k < 2; ++k)
                com_drift = std::max(com_drift, std::abs(c1[k] - c0[k]) / cfg.N);
        }
        check("particle-determinism-com", pass && com_drift <= 1e-12, com_drift);
    }
    return table;
}

}  // namespace aggdiff

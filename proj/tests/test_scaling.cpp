// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "aggdiff/scaling.hpp"
#include "oracles.hpp"

using namespace aggdiff;
using Catch::Approx;

namespace {

KernelSpec logish_tabulated(double scale, double top, int n = 3000)
{
    std::vector<double> r{0.0}, w{0.0};
    for (int i = 1; i <= n; ++i) {
        double const x = 1e-4 * std::pow(top / 1e-4, (i - 1.0) / (n - 1.0));
        r.push_back(x);
        w.push_back(scale * std::log1p(x));
    }
    return KernelSpec::tabulated(r, w);
}

}  // namespace

TEST_CASE("dilation scan of the quadratic/log model: E(r) = r^2/6 - log(2r)")
{
    auto const W = KernelSpec::power_law(2.0);
    auto const U = EntropySpec::linear();
    auto const pts = dilation_energy_scan(W, U, 1.0, 1, {0.5, 1.0, std::sqrt(3.0), 2.0}, 512);
    for (auto const& p : pts)
        CHECK(p.energy == Approx(p.r * p.r / 6.0 - std::log(2.0 * p.r)).margin(1e-9));
    // stationary exactly at r* = sqrt(3): dE/dr = r/3 - 1/r
    CHECK(pts[2].derivative == Approx(0.0).margin(1e-6));
    CHECK(pts[1].derivative == Approx(1.0 / 3.0 - 1.0).margin(1e-9));
}

TEST_CASE("scan consistency with the free energy at r = 1")
{
    for (int d : {1, 2}) {
        auto const W = KernelSpec::power_law(-0.5);
        auto const U = EntropySpec::power(2.0);
        auto const pts = dilation_energy_scan(W, U, 0.7, d, {1.0}, 256);
        auto const direct = free_energy(uniform_ball(1.0, d, 256), W, U, 0.7, false);
        CHECK(pts[0].energy == Approx(direct.total).epsilon(1e-12));
    }
}

TEST_CASE("aggregation-dominated scan dives below -1e3 toward r = 0")
{
    auto const pts = dilation_energy_scan(KernelSpec::power_law(-0.5),
                                          EntropySpec::power(1.2), 1.0, 2,
                                          log_grid(1e-8, 1.0, 30), 256);
    CHECK(pts.front().energy < -1e3);
    // eventually monotone toward the divergence end
    for (std::size_t i = 1; i < 6; ++i)
        CHECK(pts[i - 1].energy < pts[i].energy);
}

TEST_CASE("dilation derivative matches finite differences on random configurations")
{
    Rng rng(31);
    int checked = 0;
    while (checked < 20) {
        int const d = 1 + static_cast<int>(rng.uniform() * 3);
        double beta = -0.8 + 2.8 * rng.uniform();
        if (std::abs(beta) < 0.05)
            beta = 0.5;
        double const m = (rng.uniform() < 0.4) ? 1.0 : (0.5 + rng.uniform());
        double const eps = 0.1 + rng.uniform();
        auto const W = KernelSpec::power_law(beta);
        auto const U = m == 1.0 ? EntropySpec::linear()
                                : EntropySpec::power(m == 1.0 ? 2.0 : m);
        double const r = 0.3 + 2.0 * rng.uniform();
        double const step = 1e-4 * r;
        auto const pts = dilation_energy_scan(W, U, eps, d, {r - step, r, r + step}, 256);
        double const fd = (pts[2].energy - pts[0].energy) / (2.0 * step);
        CHECK(std::abs(pts[1].derivative - fd) <=
              1e-5 * std::max(1.0, std::abs(pts[1].derivative)));
        ++checked;
    }
}

TEST_CASE("log-kernel derivative is (1/2 - eps d)/r for linear diffusion")
{
    for (int d : {1, 2, 3})
        for (double eps : {0.1, 0.25, 1.0})
            for (double r : {0.2, 1.0, 5.0})
                CHECK(dilation_derivative(KernelSpec::logarithmic(), EntropySpec::linear(),
                                          eps, d, r) ==
                      Approx((0.5 - eps * d) / r).margin(1e-12));
}

TEST_CASE("homogeneous regime classification")
{
    // critical log kernel with linear diffusion
    auto const ks2 = classify_regime(KernelSpec::logarithmic(), EntropySpec::linear(), 0.25, 2);
    REQUIRE(ks2.kind == RegimeVerdict::Kind::Critical);
    CHECK(ks2.epsilon_critical == 0.25);
    auto const ks3 =
        classify_regime(KernelSpec::logarithmic(), EntropySpec::linear(), 1.0 / 6.0, 3);
    REQUIRE(ks3.kind == RegimeVerdict::Kind::Critical);
    CHECK(ks3.epsilon_critical == Approx(1.0 / 6.0).margin(1e-12));

    // off-critical log kernel diverges on one side of the ray
    CHECK(classify_regime(KernelSpec::logarithmic(), EntropySpec::linear(), 0.1, 2).kind ==
          RegimeVerdict::Kind::UnboundedBelowAtZero);
    CHECK(classify_regime(KernelSpec::logarithmic(), EntropySpec::linear(), 0.4, 2).kind ==
          RegimeVerdict::Kind::UnboundedBelowAtInfinity);

    // slow-diffusion window: minimizer exists for every eps
    for (double eps : {0.01, 1.0, 100.0})
        CHECK(classify_regime(KernelSpec::power_law(-0.5), EntropySpec::power(2.0), eps, 2)
                  .kind == RegimeVerdict::Kind::MinimizerExists);

    // aggregation-dominated fast diffusion collapses at zero
    CHECK(classify_regime(KernelSpec::power_law(-0.5), EntropySpec::power(1.2), 1.0, 2).kind ==
          RegimeVerdict::Kind::UnboundedBelowAtZero);

    // growing virial with linear diffusion confines for every eps
    CHECK(classify_regime(KernelSpec::power_law(2.0), EntropySpec::linear(), 5.0, 2).kind ==
          RegimeVerdict::Kind::MinimizerExists);

    // balanced homogeneity, slow diffusion: threshold in eps
    {
        int const d = 2;
        double const m = 1.5, beta = d * (1.0 - m);
        double const cstar =
            std::pow(2.0, beta - 1.0) / (d * std::pow(ball_volume(d), 1.0 - m));
        auto const low =
            classify_regime(KernelSpec::power_law(beta), EntropySpec::power(m), 0.5 * cstar, d);
        CHECK(low.kind == RegimeVerdict::Kind::UnboundedBelowAtZero);
        auto const high =
            classify_regime(KernelSpec::power_law(beta), EntropySpec::power(m), 2.0 * cstar, d);
        CHECK(high.kind == RegimeVerdict::Kind::Inconclusive);
    }
    // balanced homogeneity, fast diffusion: strong noise spreads
    {
        int const d = 2;
        double const m = 0.5, beta = d * (1.0 - m);
        double const cstar =
            std::pow(2.0, beta - 1.0) / (d * std::pow(ball_volume(d), 1.0 - m));
        auto const high =
            classify_regime(KernelSpec::power_law(beta), EntropySpec::power(m), 2.0 * cstar, d);
        CHECK(high.kind == RegimeVerdict::Kind::UnboundedBelowAtInfinity);
    }
    // every verdict carries a trace
    CHECK_FALSE(classify_regime(KernelSpec::power_law(1.0), EntropySpec::power(2.0), 1.0, 2)
                    .trace.empty());
}

TEST_CASE("tabulated kernel classification via the asymptotic virial")
{
    auto const W = logish_tabulated(3.0, 1e6);
    auto const low = classify_regime(W, EntropySpec::linear(), 0.4, 2);
    CHECK(low.kind == RegimeVerdict::Kind::MinimizerExists);
    auto const high = classify_regime(W, EntropySpec::linear(), 1.0, 2);
    CHECK(high.kind == RegimeVerdict::Kind::UnboundedBelowAtInfinity);
    // the equality verdict demands eps at the extrapolated critical value
    double const eps_c = W.asymptotic_slope().value / 4.0;
    auto const crit = classify_regime(W, EntropySpec::linear(), eps_c, 2);
    CHECK(crit.kind == RegimeVerdict::Kind::Critical);
    CHECK(crit.epsilon_critical == Approx(0.75).margin(1e-3));
}

TEST_CASE("optimal dilation and the first-order balance identity")
{
    auto const ball = uniform_ball(1.0, 2, 256);
    auto const opt = optimal_dilation(ball, -0.5, 2.0, 1.0, 2);
    CHECK(opt.virial_residual < 1e-6);
    CHECK(opt.energy < 0);

    // scan minimizer sits at r0 within one grid step
    {
        auto const W = KernelSpec::power_law(-0.5);
        auto const U = EntropySpec::power(2.0);
        double const w0 = interaction_energy(ball, W);
        double const e0 = entropy_energy(ball, U);
        auto const grid = log_grid(opt.r0 / 2.0, opt.r0 * 2.0, 200);
        double best_r = 0, best_e = 1e300;
        for (double r : grid) {
            double const e = std::pow(r, -0.5) * w0 + std::pow(r, -2.0) * e0;
            if (e < best_e) {
                best_e = e;
                best_r = r;
            }
        }
        CHECK(std::abs(std::log(best_r / opt.r0)) <
              1.5 * std::log(grid[1] / grid[0]));
    }

    // closed-form homogeneity in eps: r0(2 eps) = 2^{1/(beta - d(1-m))} r0(eps)
    auto const opt2 = optimal_dilation(ball, -0.5, 2.0, 2.0, 2);
    CHECK(opt2.r0 / opt.r0 == Approx(std::pow(2.0, 1.0 / (-0.5 + 2.0))).epsilon(1e-8));

    CHECK_THROWS_AS(optimal_dilation(ball, 0.5, 2.0, 1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(optimal_dilation(ball, -0.5, 0.5, 1.0, 2), std::invalid_argument);

    // ten-case random suite
    Rng rng(32);
    for (int rep = 0; rep < 10; ++rep) {
        int const d = 1 + static_cast<int>(rng.uniform() * 2);
        double const m = 1.3 + rng.uniform();
        double const lo = std::max(-0.95 * d, d * (1.0 - m));
        double const beta = lo + (0.0 - lo) * (0.2 + 0.6 * rng.uniform());
        double const eps = 0.2 + 2.0 * rng.uniform();
        auto const rho = oracle::random_density(d, 48, rng, false);
        auto const o = optimal_dilation(rho, beta, m, eps, d);
        CHECK(o.virial_residual < 1e-6);
        CHECK(o.energy < 0);
    }
}

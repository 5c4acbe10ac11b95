// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "aggdiff/steady.hpp"
#include "oracles.hpp"

using namespace aggdiff;
using Catch::Approx;

namespace {

KernelSpec capped_quadratic(double cap, double top, int n = 512)
{
    std::vector<double> r(n), w(n);
    for (int i = 0; i < n; ++i) {
        r[i] = top * i / (n - 1.0);
        w[i] = std::min(r[i] * r[i], cap);
    }
    return KernelSpec::tabulated(r, w);
}

KernelSpec constant_kernel(double value, double top)
{
    std::vector<double> r(64), w(64, value);
    for (int i = 0; i < 64; ++i)
        r[i] = top * i / 63.0;
    return KernelSpec::tabulated(r, w);
}

}  // namespace

TEST_CASE("constant kernel relaxes to the uniform state")
{
    auto const rep = solve_fixed_point(constant_kernel(3.0, 20.0), 1.0, 1, 4.0, 128);
    REQUIRE(rep.converged);
    double const expect = 1.0 / 8.0;  // (omega_1 R)^{-1}
    for (std::size_t i = 0; i < rep.density.cells(); ++i)
        CHECK(rep.density.value(i) == Approx(expect).epsilon(1e-10));
    // flatness bound is attained exactly for constant kernels
    CHECK(rep.flatness == Approx(expect).epsilon(1e-12));
    auto const res = el_residual(rep.density, constant_kernel(3.0, 20.0),
                                 EntropySpec::linear(), 1.0);
    CHECK(res.first < 1e-12);

    // the zero kernel is the same exp-of-constant mechanism
    auto const zero = solve_fixed_point(constant_kernel(0.0, 20.0), 0.7, 2, 2.0, 64);
    REQUIRE(zero.converged);
    for (std::size_t i = 0; i < zero.density.cells(); ++i)
        CHECK(zero.density.value(i) == Approx(1.0 / (4.0 * M_PI)).epsilon(1e-10));
}

TEST_CASE("quadratic attraction in one dimension relaxes to the Gaussian")
{
    double const eps = 0.5;
    auto const rep = solve_fixed_point(KernelSpec::power_law(2.0), eps, 1, 8.0, 1024);
    REQUIRE(rep.converged);
    double sup_err = 0;
    for (std::size_t i = 0; i < rep.density.cells(); ++i) {
        double const x = rep.density.midpoint(i);
        double const ref = std::exp(-x * x / (2.0 * eps)) / std::sqrt(2.0 * M_PI * eps);
        sup_err = std::max(sup_err, std::abs(rep.density.value(i) - ref));
    }
    CHECK(sup_err < 1e-3);
    CHECK(rep.density.value(0) == Approx(0.564190).margin(1e-3));
    CHECK(rep.el_residual_sup < 1e-3);

    // a perturbed profile is far from critical: residual grows by 10x or more
    std::vector<double> bent(rep.density.cells());
    for (std::size_t i = 0; i < bent.size(); ++i)
        bent[i] = rep.density.value(i) *
                  (1.0 + 0.1 * std::cos(3.0 * rep.density.midpoint(i)));
    auto const perturbed = RadialDensity::normalized(1, rep.density.spacing(), bent);
    auto const res = el_residual(perturbed, KernelSpec::power_law(2.0),
                                 EntropySpec::linear(), eps);
    CHECK(res.first > 10.0 * std::max(rep.el_residual_sup, 1e-6));
}

TEST_CASE("flatness bound arithmetic and monotonicity in the domain size")
{
    // w = min(r^2, 4), eps = 1, d = 1, R = 3: (1/6) e^4
    auto const W = capped_quadratic(4.0, 40.0);
    CHECK(flatness_bound(W, 1.0, 1, 3.0) == Approx(std::exp(4.0) / 6.0).epsilon(1e-6));
    // unbounded kernels give an infinite bound
    CHECK(std::isinf(flatness_bound(KernelSpec::logarithmic(), 1.0, 1, 3.0)));
    CHECK(std::isinf(flatness_bound(KernelSpec::power_law(-0.5), 1.0, 2, 3.0)));

    double prev = 1e300;
    for (double R : {2.0, 4.0, 8.0}) {
        double const b = flatness_bound(W, 1.0, 1, R);
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("solver respects the flatness bound and stays positive")
{
    auto const W = capped_quadratic(4.0, 40.0);
    double prev_sup = 1e300;
    for (double R : {2.0, 4.0, 8.0}) {
        auto const rep = solve_fixed_point(W, 1.0, 1, R, 256);
        REQUIRE(rep.converged);
        double sup = 0, min = 1e300;
        for (std::size_t i = 0; i < rep.density.cells(); ++i) {
            sup = std::max(sup, rep.density.value(i));
            min = std::min(min, rep.density.value(i));
        }
        CHECK(min > 0);
        CHECK(sup <= rep.flatness + 1e-10);
        CHECK(sup < prev_sup);
        prev_sup = sup;
        CHECK(rep.el_residual_sup <= 1e-3);
        CHECK(std::abs(rep.density.mass() - 1.0) <= 1e-10);
    }
}

TEST_CASE("solver guards")
{
    CHECK_THROWS_AS(solve_fixed_point(KernelSpec::power_law(2.0), 0.0, 1, 4.0, 64),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve_fixed_point(KernelSpec::power_law(2.0), 1.0, 1, 4.0, 64, 1.5),
                    std::invalid_argument);
    // tabulated kernel must cover [0, 2R]
    CHECK_THROWS_AS(solve_fixed_point(capped_quadratic(4.0, 6.0), 1.0, 1, 4.0, 64),
                    std::invalid_argument);
}

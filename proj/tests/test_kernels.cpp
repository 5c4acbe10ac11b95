// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "aggdiff/entropies.hpp"
#include "aggdiff/kernels.hpp"

using namespace aggdiff;
using Catch::Approx;

namespace {

KernelSpec logish_tabulated(double scale, double top, int n = 4000)
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

TEST_CASE("power-law and logarithmic kernel values")
{
    CHECK(KernelSpec::power_law(2.0).value(3.0) == Approx(4.5));
    CHECK(KernelSpec::logarithmic().value(1.0) == Approx(0.0).margin(1e-15));
    // w(s) = s^beta / beta
    CHECK(KernelSpec::power_law(-0.5).value(4.0) == Approx(std::pow(4.0, -0.5) / -0.5));
    CHECK(KernelSpec::power_law(-0.5).value(0.25) == Approx(-4.0));

    // extended arithmetic at the origin
    CHECK(KernelSpec::power_law(2.0).value(0.0) == 0.0);
    CHECK(std::isinf(KernelSpec::power_law(-0.5).value(0.0)));
    CHECK(KernelSpec::power_law(-0.5).value(0.0) < 0);
    CHECK(std::isinf(KernelSpec::logarithmic().value(0.0)));

    CHECK_THROWS_AS(KernelSpec::power_law(2.0).value(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::power_law(0.0), std::invalid_argument);
}

TEST_CASE("radial virial w'(s) s")
{
    CHECK(KernelSpec::power_law(2.0).virial(3.0) == Approx(9.0));
    for (double s : {0.1, 1.0, 17.0})
        CHECK(KernelSpec::logarithmic().virial(s) == Approx(1.0));
    CHECK(KernelSpec::power_law(-0.5).virial(4.0) == Approx(0.5));
    CHECK_THROWS_AS(KernelSpec::power_law(2.0).virial(0.0), std::invalid_argument);
}

TEST_CASE("kernel homogeneity")
{
    for (double beta : {2.0, 0.5, -0.5, -1.5}) {
        auto const W = KernelSpec::power_law(beta);
        for (double s : {0.2, 1.0, 5.0}) {
            double const lhs = W.value(3.0 * s);
            double const rhs = std::pow(3.0, beta) * W.value(s);
            CHECK(lhs == Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("asymptotic slope of the virial")
{
    CHECK(KernelSpec::logarithmic().asymptotic_slope().kind == AsymptoticSlope::Kind::Finite);
    CHECK(KernelSpec::logarithmic().asymptotic_slope().value == Approx(1.0));
    CHECK(KernelSpec::power_law(2.0).asymptotic_slope().kind ==
          AsymptoticSlope::Kind::Infinite);
    CHECK(KernelSpec::power_law(-0.5).asymptotic_slope().value == Approx(0.0).margin(1e-15));

    // tabulated 3 log(1+r): w'(r) r = 3r/(1+r) -> 3
    auto const W = logish_tabulated(3.0, 1e6);
    auto const slope = W.asymptotic_slope();
    REQUIRE(slope.kind == AsymptoticSlope::Kind::Finite);
    CHECK(slope.value == Approx(3.0).margin(1e-3));

    // a tail that keeps growing cannot settle
    std::vector<double> r{0.0}, w{0.0};
    for (int i = 1; i <= 512; ++i) {
        double const x = 1e-2 * std::pow(1e6, (i - 1.0) / 511.0);
        r.push_back(x);
        w.push_back(std::sqrt(x));
    }
    CHECK(KernelSpec::tabulated(r, w).asymptotic_slope().kind ==
          AsymptoticSlope::Kind::Undetermined);
}

TEST_CASE("tabulated kernel loads from two-column CSV")
{
    auto const path = std::string("/tmp/aggdiff_kernel_test.csv");
    {
        std::ofstream out(path);
        out << "r,w\n";
        for (int i = 0; i < 64; ++i) {
            double const r = 10.0 * i / 63.0;
            out << r << "," << std::min(r * r, 4.0) << "\n";
        }
    }
    auto const W = KernelSpec::load_tabulated(path);
    CHECK(W.value(1.0) == Approx(1.0).margin(2e-2));  // linear interpolation
    CHECK(W.value(5.0) == Approx(4.0).margin(1e-12));
    CHECK(W.r_max() == Approx(10.0));
    std::remove(path.c_str());
}

TEST_CASE("tabulated derivative is consistent with the profile")
{
    auto const W = logish_tabulated(3.0, 1e4, 2000);
    // central differences of w against the stored derivative, interior points
    auto const& grid = W.grid();
    for (std::size_t i = 5; i < grid.size() - 5; i += 97) {
        double const s = grid[i];
        double const h = 0.5 * (grid[i + 1] - grid[i - 1]);
        double const fd = (3.0 * std::log1p(s + h) - 3.0 * std::log1p(s - h)) / (2 * h);
        double const stored = W.virial(s) / s;
        CHECK(stored == Approx(fd).epsilon(1e-4));
    }
    CHECK_THROWS_AS(W.value(2e4), std::domain_error);
}

TEST_CASE("entropy densities, pressure and scaling functions")
{
    auto const p2 = EntropySpec::power(2.0);
    auto const lin = EntropySpec::linear();

    CHECK(p2.U(0.0) == 0.0);
    CHECK(lin.U(0.0) == 0.0);
    CHECK(p2.U(3.0) == Approx(9.0));
    CHECK(lin.U(std::exp(1.0)) == Approx(std::exp(1.0)));
    CHECK(p2.P(2.0) == Approx(4.0));
    CHECK(lin.P(2.0) == Approx(2.0));

    // u(2) = 2^{(1-m)d}/(m-1), v(2) = d 2^{(1-m)d} for m = 2, d = 1
    CHECK(p2.mccann_u(1, 2.0) == Approx(0.5));
    CHECK(p2.scaling_v(1, 2.0) == Approx(0.5));
    // linear diffusion: v = d for every radius
    for (double r : {0.1, 1.0, 7.0})
        CHECK(lin.scaling_v(3, r) == Approx(3.0));

    // v = -r u'(r) by central differences
    for (auto const& U : {EntropySpec::power(0.5), EntropySpec::power(1.3), p2, lin})
        for (int d : {1, 2, 3})
            for (double r : {0.5, 1.0, 2.0}) {
                double const step = 1e-5 * r;
                double const du = (U.mccann_u(d, r + step) - U.mccann_u(d, r - step)) / (2 * step);
                CHECK(U.scaling_v(d, r) == Approx(-r * du).margin(1e-6));
            }

    // recession constants weighting the singular part
    CHECK(std::isinf(p2.recession()));
    CHECK(std::isinf(lin.recession()));
    CHECK(EntropySpec::power(0.5).recession() == 0.0);

    CHECK_THROWS_AS(EntropySpec::power(1.0), std::invalid_argument);
    CHECK_THROWS_AS(EntropySpec::power(-2.0), std::invalid_argument);
}

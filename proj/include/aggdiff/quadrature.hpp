// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace aggdiff {

/// Volume of the unit ball in R^d.
inline double ball_volume(int d)
{
    return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

/// Surface area of the unit sphere S^{d-1} in R^d.
inline double sphere_area(int d)
{
    return d * ball_volume(d);
}

namespace quad {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights by Newton iteration on P_n.
inline GaussRule const& gauss_legendre(int n)
{
    static std::mutex mtx;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double deriv = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double const p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            deriv = n * (x * p1 - p0) / (x * x - 1.0);
            double const dx = p1 / deriv;
            x -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double const w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

template<class F>
double gauss(F&& f, double a, double b, int n = 16)
{
    GaussRule const& rule = gauss_legendre(n);
    double const mid = 0.5 * (a + b);
    double const half = 0.5 * (b - a);
    double sum = 0;
    for (int i = 0; i < n; ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

/// Composite Gauss over uniform panels.
template<class F>
double panels(F&& f, double a, double b, int npanels, int n = 16)
{
    double sum = 0;
    double const width = (b - a) / npanels;
    for (int p = 0; p < npanels; ++p)
        sum += gauss(f, a + p * width, a + (p + 1) * width, n);
    return sum;
}

/// Integral over [a, b] of an integrand with an integrable singularity at a:
/// geometric panels graded toward the left endpoint.
template<class F>
double graded_left(F&& f, double a, double b, int levels = 48, int n = 16)
{
    double sum = 0;
    double right = b;
    double const len = b - a;
    for (int k = 1; k <= levels; ++k) {
        double const left = a + len * std::pow(0.5, k);
        sum += gauss(f, left, right, n);
        right = left;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Exact interval primitives for one-dimensional integrals of power-law and
// logarithmic kernels against piecewise-constant data.  F1 is an
// antiderivative of the kernel profile, F2 a second antiderivative; both
// vanish at 0 and are odd/even as required for double differences.
// ---------------------------------------------------------------------------

/// Antiderivative of sign-free profile t -> |t|^beta / beta (valid beta > -1).
inline double pow_F1(double t, double beta)
{
    double const a = std::abs(t);
    if (a == 0)
        return 0;
    double const v = std::pow(a, beta + 1.0) / (beta * (beta + 1.0));
    return t > 0 ? v : -v;
}

/// Second antiderivative of |t|^beta / beta.
inline double pow_F2(double t, double beta)
{
    double const a = std::abs(t);
    if (a == 0)
        return 0;
    return std::pow(a, beta + 2.0) / (beta * (beta + 1.0) * (beta + 2.0));
}

/// Antiderivative of t -> log|t|.
inline double log_F1(double t)
{
    if (t == 0)
        return 0;
    return t * std::log(std::abs(t)) - t;
}

/// Second antiderivative of log|t|.
inline double log_F2(double t)
{
    if (t == 0)
        return 0;
    return t * t * (2.0 * std::log(std::abs(t)) - 3.0) / 4.0;
}

/// Exact iint_{[a,b] x [c,d]} f(u - v) du dv given the second antiderivative.
template<class F2Fn>
double cell_pair(F2Fn&& F2, double a, double b, double c, double d)
{
    return F2(b - c) - F2(a - c) - F2(b - d) + F2(a - d);
}

// ---------------------------------------------------------------------------
// Pair-distance reduction over balls: for X, Y ranging over balls of radii
// R1 and R2 in R^d, iint f(|x - y|) dx dy = int_0^{R1+R2} f(t) * sigma_{d-1}
// t^{d-1} * lens_d(t; R1, R2) dt, with lens_d the two-ball intersection
// volume at center distance t.
// ---------------------------------------------------------------------------

/// Intersection volume of balls with radii r1, r2 at center distance t.
inline double lens_volume(int d, double t, double r1, double r2)
{
    if (r1 > r2)
        std::swap(r1, r2);
    if (t >= r1 + r2)
        return 0;
    if (t <= r2 - r1)
        return ball_volume(d) * std::pow(r1, d);  // small ball inside
    switch (d) {
        case 1:
            return r1 + r2 - t;
        case 2: {
            auto cap_area = [](double r, double x) {
                // area of {y in B_r : y_1 > x}, |x| <= r
                double const c = std::clamp(x / r, -1.0, 1.0);
                return r * r * std::acos(c) - x * std::sqrt(std::max(0.0, r * r - x * x));
            };
            double const x1 = (t * t + r1 * r1 - r2 * r2) / (2.0 * t);
            double const x2 = t - x1;
            return std::max(0.0, cap_area(r1, x1) + cap_area(r2, x2));
        }
        case 3: {
            auto cap_vol = [](double r, double x) {
                double const hh = std::clamp(r - x, 0.0, 2.0 * r);  // cap height
                return M_PI * hh * hh * (3.0 * r - hh) / 3.0;
            };
            double const x1 = (t * t + r1 * r1 - r2 * r2) / (2.0 * t);
            double const x2 = t - x1;
            return cap_vol(r1, x1) + cap_vol(r2, x2);
        }
        default: {
            // cross sections are (d-1)-balls; integrate the two caps
            double const x1 = (t * t + r1 * r1 - r2 * r2) / (2.0 * t);
            double const wd1 = ball_volume(d - 1);
            auto cap = [&](double r, double x) {
                return gauss(
                    [&](double s) { return wd1 * std::pow(std::max(0.0, r * r - s * s), 0.5 * (d - 1)); },
                    x, r, 32);
            };
            return cap(r1, x1) + cap(r2, t - x1);
        }
    }
}

/// iint_{B_{r1} x B_{r2}} f(|x-y|) dx dy for a radial profile f that may have
/// an integrable singularity at 0 (f(t) t^{d-1} integrable near 0).
template<class F>
double ball_pair_integral(int d, double r1, double r2, F&& f, bool singular_at_zero)
{
    double const sigma = sphere_area(d);
    auto integrand = [&](double t) {
        return f(t) * sigma * std::pow(t, d - 1) * lens_volume(d, t, r1, r2);
    };
    double const upper = r1 + r2;
    double const gap = std::abs(r1 - r2);
    // the lens volume has kinks at |r1 - r2|; split there
    double total = 0;
    if (gap > 0) {
        if (singular_at_zero)
            total += graded_left(integrand, 0.0, gap);
        else
            total += panels(integrand, 0.0, gap, 8);
        total += panels(integrand, gap, upper, 16);
    } else {
        if (singular_at_zero)
            total += graded_left(integrand, 0.0, upper, 52);
        else
            total += panels(integrand, 0.0, upper, 16);
    }
    return total;
}

/// Pair integral over two spherical shells [a1,b1] x [a2,b2] (annuli) by
/// inclusion-exclusion of ball pair integrals.
template<class F>
double shell_pair_integral(int d, double a1, double b1, double a2, double b2, F&& f,
                           bool singular_at_zero)
{
    double total = ball_pair_integral(d, b1, b2, f, singular_at_zero);
    if (a1 > 0)
        total -= ball_pair_integral(d, a1, b2, f, singular_at_zero);
    if (a2 > 0)
        total -= ball_pair_integral(d, b1, a2, f, singular_at_zero);
    if (a1 > 0 && a2 > 0)
        total += ball_pair_integral(d, a1, a2, f, singular_at_zero);
    return total;
}

}  // namespace quad
}  // namespace aggdiff

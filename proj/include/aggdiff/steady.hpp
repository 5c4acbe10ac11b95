// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggdiff/energy.hpp"
#include "aggdiff/entropies.hpp"
#include "aggdiff/kernels.hpp"
#include "aggdiff/measures.hpp"
#include "aggdiff/quadrature.hpp"
#include "aggdiff/threads.hpp"

namespace aggdiff {

struct SteadyStateReport {
    RadialDensity density;
    double multiplier = 0;       // Lagrange constant C
    double el_residual_sup = 0;  // sup over the support of |eps U'(rho) + W*rho - C|
    double el_margin = 0;        // min over off-support cells of the same expression minus C
    int iterations = 0;
    bool converged = false;
    double flatness = 0;         // L-infinity bound from the kernel oscillation, or +inf
};

namespace detail {

/// Convolution coefficients: row i gives (W*rho)(r_i) = sum_j A_ij rho_j for
/// a density constant on shells.  One-dimensional power/log kernels use the
/// elementary antiderivative; otherwise midpoint angular kernels with
/// shell-averaged entries near the diagonal.
inline std::vector<double> convolution_matrix(KernelSpec const& W, int d, double h,
                                              std::size_t M)
{
    std::vector<double> A(M * M);
    if (d == 1 && W.kind() != KernelKind::TabulatedRadial) {
        bool const is_log = W.kind() == KernelKind::Logarithmic;
        double const beta = W.beta();
        auto F1 = [&](double t) { return is_log ? quad::log_F1(t) : quad::pow_F1(t, beta); };
        parallel_for(M, [&](std::size_t i) {
            double const x = (i + 0.5) * h;
            for (std::size_t j = 0; j < M; ++j) {
                double const a = j * h, b = (j + 1) * h;
                A[i * M + j] =
                    (F1(x - a) - F1(x - b)) + (F1(x + b) - F1(x + a));
            }
        });
        return A;
    }
    bool const rough = W.rough_at_origin();
    auto profile = [&](double t) { return W.value(t); };
    double const wd = ball_volume(d);
    parallel_for(M, [&](std::size_t i) {
        double const ri = (i + 0.5) * h;
        double const vol_i = wd * (std::pow((i + 1) * h, d) - std::pow(i * h, d));
        for (std::size_t j = 0; j < M; ++j) {
            double const vol_j = wd * (std::pow((j + 1) * h, d) - std::pow(j * h, d));
            std::size_t const gap = i > j ? i - j : j - i;
            if (gap <= 1) {
                A[i * M + j] = quad::shell_pair_integral(d, j * h, (j + 1) * h, i * h,
                                                         (i + 1) * h, profile, rough) /
                               vol_i;
            } else {
                A[i * M + j] = angular_kernel(W, d, ri, (j + 0.5) * h) * vol_j;
            }
        }
    });
    return A;
}

}  // namespace detail

/// L-infinity bound (omega_d R^d)^{-1} exp((sup w - inf w)/eps) over the
/// kernel's range on [0, 2R]; +infinity when the kernel is unbounded there.
inline double flatness_bound(KernelSpec const& W, double eps, int d, double R)
{
    auto const [lo, hi] = W.range_on(2.0 * R);
    if (!std::isfinite(lo) || !std::isfinite(hi))
        return std::numeric_limits<double>::infinity();
    double const vol = ball_volume(d) * std::pow(R, d);
    return std::exp((hi - lo) / eps) / vol;
}

/// Euler-Lagrange residual of a candidate steady state for linear diffusion:
/// t_i = eps U'(rho_i) + (W*rho)(r_i), C the rho-weighted mean of t over the
/// support.  Returns {sup |t - C| on the support, min (t - C) off support}.
inline std::pair<double, double> el_residual(RadialDensity const& rho, KernelSpec const& W,
                                             EntropySpec const& U, double eps)
{
    if (rho.atom_mass() != 0)
        throw std::invalid_argument("el_residual: density must be atom-free");
    std::size_t const M = rho.cells();
    auto const A = detail::convolution_matrix(W, rho.dim(), rho.spacing(), M);
    double sup_value = 0;
    for (std::size_t i = 0; i < M; ++i)
        sup_value = std::max(sup_value, rho.value(i));
    if (!(sup_value > 0))
        throw std::invalid_argument("el_residual: empty support");
    double const floor = 1e-12 * sup_value;

    std::vector<double> t(M);
    for (std::size_t i = 0; i < M; ++i) {
        double conv = 0;
        for (std::size_t j = 0; j < M; ++j)
            conv += A[i * M + j] * rho.value(j);
        t[i] = conv + (rho.value(i) > floor
                           ? eps * U.dU(rho.value(i))
                           : -std::numeric_limits<double>::infinity());
    }
    double weighted = 0, wsum = 0;
    for (std::size_t i = 0; i < M; ++i) {
        if (rho.value(i) > floor) {
            weighted += t[i] * rho.shell_mass(i);
            wsum += rho.shell_mass(i);
        }
    }
    double const C = weighted / wsum;
    double sup_eq = 0;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < M; ++i) {
        if (rho.value(i) > floor)
            sup_eq = std::max(sup_eq, std::abs(t[i] - C));
        else
            margin = std::min(margin, t[i] - C);
    }
    return {sup_eq, margin};
}

/// Damped fixed-point iteration rho <- (1-theta) rho + theta Z^{-1}
/// exp(-(W*rho)/eps) on the ball of radius R, for linear diffusion.  The
/// damping is halved when the update direction flips twice in a row.
inline SteadyStateReport solve_fixed_point(KernelSpec const& W, double eps, int d, double R,
                                           std::size_t M = 1024, double theta = 0.5,
                                           int max_iter = 2000)
{
    if (!(eps > 0))
        throw std::invalid_argument("solve_fixed_point: eps must be positive");
    if (!(theta > 0) || theta > 1)
        throw std::invalid_argument("solve_fixed_point: damping must lie in (0, 1]");
    if (2.0 * R > W.r_max())
        throw std::invalid_argument("solve_fixed_point: kernel profile must cover [0, 2R]");
    detail::check_integrable(W, d);

    double const h = R / static_cast<double>(M);
    auto const A = detail::convolution_matrix(W, d, h, M);
    double const wd = ball_volume(d);
    std::vector<double> vol(M);
    for (std::size_t i = 0; i < M; ++i)
        vol[i] = wd * std::pow(h, d) * (std::pow(i + 1.0, d) - std::pow(static_cast<double>(i), d));

    std::vector<double> rho(M, 1.0 / (wd * std::pow(R, d)));  // uniform start
    std::vector<double> conv(M), next(M);
    double log_Z = 0;
    int iter = 0;
    bool converged = false;
    double last_signed_update = 0;
    int flips = 0;

    for (; iter < max_iter; ++iter) {
        parallel_for(M, [&](std::size_t i) {
            double acc = 0;
            double const* row = A.data() + i * M;
            for (std::size_t j = 0; j < M; ++j)
                acc += row[j] * rho[j];
            conv[i] = acc;
        });
        double shift = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < M; ++i)
            shift = std::max(shift, -conv[i] / eps);
        if (!std::isfinite(shift))
            throw std::runtime_error("solve_fixed_point: exponential overflow, sup of W*rho/eps = " +
                                     std::to_string(shift));
        double Z_shifted = 0;
        for (std::size_t i = 0; i < M; ++i) {
            next[i] = std::exp(-conv[i] / eps - shift);
            Z_shifted += next[i] * vol[i];
        }
        if (!(Z_shifted > 0) || !std::isfinite(Z_shifted))
            throw std::runtime_error("solve_fixed_point: normalization failed (underflow)");
        log_Z = shift + std::log(Z_shifted);
        double residual = 0;
        double rel_residual = 0;
        double signed_update = 0;
        double sup_next = 0;
        for (std::size_t i = 0; i < M; ++i) {
            next[i] /= Z_shifted;
            sup_next = std::max(sup_next, next[i]);
        }
        double const floor = 1e-12 * sup_next;
        for (std::size_t i = 0; i < M; ++i) {
            double const delta = next[i] - rho[i];
            if (std::abs(delta) > residual) {
                residual = std::abs(delta);
                signed_update = delta;
            }
            // cells that will remain on the numerical support must also be
            // relatively converged, or the multiplier residual is meaningless
            if (std::max(next[i], rho[i]) > floor)
                rel_residual = std::max(rel_residual,
                                        std::abs(delta) / std::max(next[i], floor));
        }
        if (signed_update * last_signed_update < 0 && ++flips >= 2) {
            theta = std::max(0.5 * theta, 1e-3);
            flips = 0;
        }
        last_signed_update = signed_update;
        for (std::size_t i = 0; i < M; ++i)
            rho[i] = (1.0 - theta) * rho[i] + theta * next[i];
        if (residual < 1e-10 && rel_residual < 1e-8) {
            converged = true;
            ++iter;
            break;
        }
    }

    // renormalize the last iterate exactly before constructing the density
    double mass = 0;
    for (std::size_t i = 0; i < M; ++i)
        mass += rho[i] * vol[i];
    for (auto& v : rho)
        v /= mass;

    SteadyStateReport report{RadialDensity(d, h, std::move(rho)),
                             -eps * log_Z,
                             0,
                             0,
                             iter,
                             converged,
                             flatness_bound(W, eps, d, R)};
    auto const res = el_residual(report.density, W, EntropySpec::linear(), eps);
    report.el_residual_sup = res.first;
    report.el_margin = res.second;
    return report;
}

}  // namespace aggdiff

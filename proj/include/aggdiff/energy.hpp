// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "aggdiff/entropies.hpp"
#include "aggdiff/kernels.hpp"
#include "aggdiff/measures.hpp"
#include "aggdiff/quadrature.hpp"
#include "aggdiff/threads.hpp"

namespace aggdiff {

/// Interaction + entropy split of the free energy at a given noise strength.
struct EnergyBreakdown {
    double interaction = 0;
    double entropy = 0;
    double epsilon = 0;
    double total = 0;
    double quadrature_error_estimate = 0;
};

namespace detail {

inline double angular_norm(int d)
{
    // int_0^pi sin^{d-2} theta dtheta
    return std::sqrt(M_PI) * std::tgamma(0.5 * (d - 1)) / std::tgamma(0.5 * d);
}

inline void check_integrable(KernelSpec const& W, int d)
{
    if (W.kind() == KernelKind::PowerLaw && W.beta() <= -d)
        throw std::invalid_argument("kernel is not locally integrable: beta must exceed -d");
}

}  // namespace detail

/// Spherical average of w(|r e - s eta|) over unit directions eta.
/// d = 1 reduces to the two-point average; d >= 2 integrates over the polar
/// angle with panels graded toward the aligned direction where the kernel
/// profile is singular and r is close to s.
inline double angular_kernel(KernelSpec const& W, int d, double r, double s)
{
    detail::check_integrable(W, d);
    if (r < 0 || s < 0)
        throw std::invalid_argument("angular_kernel: radii must be nonnegative");
    if (r == 0 || s == 0)
        return W.value(r + s);
    if (d == 1)
        return 0.5 * (W.value(std::abs(r - s)) + W.value(r + s));

    auto dist = [&](double theta) {
        double const sn = std::sin(0.5 * theta);
        return std::sqrt((r - s) * (r - s) + 4.0 * r * s * sn * sn);
    };
    auto integrand = [&](double theta) {
        double const w = d == 2 ? 1.0 : std::pow(std::sin(theta), d - 2);
        return W.value(dist(theta)) * w;
    };

    double integral;
    bool const rough = W.rough_at_origin();
    double const gap = std::abs(r - s);
    if (rough && gap < 0.5 * (r + s)) {
        bool const on_diagonal = gap == 0.0;
        if (on_diagonal && W.kind() == KernelKind::PowerLaw && W.beta() <= 1 - d) {
            // angular average diverges on the diagonal for strong singularities
            return -std::numeric_limits<double>::infinity();
        }
        // geometric panels toward theta = 0 plus a closed-form sliver: the
        // integrand is ~ C theta^{beta+d-2} on the diagonal and levels off at
        // w(|r-s|) theta^{d-2} below theta* = |r-s|/sqrt(rs)
        int levels;
        if (W.kind() == KernelKind::Logarithmic) {
            levels = 54;
        } else if (on_diagonal) {
            levels = 24;
        } else {
            double const theta_star = gap / std::sqrt(r * s);
            levels = std::clamp(
                static_cast<int>(std::ceil(std::log2(M_PI / theta_star))) + 6, 12, 54);
        }
        double const theta_min = M_PI * std::pow(0.5, levels);
        integral = quad::graded_left(integrand, 0.0, M_PI, levels);
        if (W.kind() != KernelKind::Logarithmic) {
            double const q = on_diagonal ? W.beta() + d - 2.0 : d - 2.0;
            integral += integrand(theta_min) * theta_min / (q + 1.0);
        }
    } else {
        integral = quad::panels(integrand, 0.0, M_PI, 3, 20);
    }
    return integral / detail::angular_norm(d);
}

namespace detail {

/// Exact one-dimensional assembly: the density is even and piecewise
/// constant, and power/log kernels have elementary second antiderivatives,
/// so every cell pair is integrated in closed form.
inline double interaction_1d_exact(RadialProfile const& p, KernelSpec const& W)
{
    bool const is_log = W.kind() == KernelKind::Logarithmic;
    double const beta = W.beta();
    auto F2 = [&](double t) { return is_log ? quad::log_F2(t) : quad::pow_F2(t, beta); };
    auto cp = [&](double a1, double b1, double a2, double b2) {
        return quad::cell_pair(F2, a1, b1, a2, b2);
    };
    std::size_t const n = p.pieces.size();
    double sum = parallel_sum(n, [&](std::size_t lo, std::size_t hi) {
        double acc = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            auto const& pi = p.pieces[i];
            if (pi.value == 0)
                continue;
            for (std::size_t j = i; j < n; ++j) {
                auto const& pj = p.pieces[j];
                if (pj.value == 0)
                    continue;
                double const same = cp(pi.a, pi.b, pj.a, pj.b);
                double const opp = cp(pi.a, pi.b, -pj.b, -pj.a);
                double const block = 2.0 * pi.value * pj.value * (same + opp);
                acc += (j == i) ? block : 2.0 * block;
            }
        }
        return acc;
    });
    if (p.atom > 0) {
        auto F1 = [&](double t) { return is_log ? quad::log_F1(t) : quad::pow_F1(t, beta); };
        double cross = 0;
        for (auto const& piece : p.pieces)
            cross += piece.value * 2.0 * (F1(piece.b) - F1(piece.a));
        sum += 2.0 * p.atom * cross;  // ordered pairs (atom, x) and (x, atom)
        sum += p.atom * p.atom * W.value(0.0);
    }
    return 0.5 * sum;
}

/// Midpoint double sum with the diagonal and first off-diagonal bands
/// replaced by exact shell-pair integrals (two-ball overlap reduction).
inline double interaction_radial(RadialProfile const& p, KernelSpec const& W)
{
    int const d = p.d;
    std::size_t const n = p.pieces.size();
    bool const rough = W.rough_at_origin();
    auto profile = [&](double t) { return W.value(t); };

    std::vector<double> mid(n), mass(n);
    for (std::size_t i = 0; i < n; ++i) {
        mid[i] = 0.5 * (p.pieces[i].a + p.pieces[i].b);
        mass[i] = p.pieces[i].value * ball_volume(d) *
                  (std::pow(p.pieces[i].b, d) - std::pow(p.pieces[i].a, d));
    }

    double sum = parallel_sum(n, [&](std::size_t lo, std::size_t hi) {
        double acc = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            if (p.pieces[i].value == 0)
                continue;
            for (std::size_t j = i; j < n; ++j) {
                if (p.pieces[j].value == 0)
                    continue;
                double term;
                if (j - i <= 1) {
                    term = p.pieces[i].value * p.pieces[j].value *
                           quad::shell_pair_integral(d, p.pieces[i].a, p.pieces[i].b,
                                                     p.pieces[j].a, p.pieces[j].b, profile,
                                                     rough);
                } else {
                    term = mass[i] * mass[j] * angular_kernel(W, d, mid[i], mid[j]);
                }
                acc += (j == i) ? term : 2.0 * term;
            }
        }
        return acc;
    });

    if (p.atom > 0) {
        double cross = 0;
        for (std::size_t j = 0; j < n; ++j)
            cross += mass[j] * W.value(mid[j]);
        sum += 2.0 * p.atom * cross + p.atom * p.atom * W.value(0.0);
    }
    return 0.5 * sum;
}

inline double interaction_profile(RadialProfile const& p, KernelSpec const& W)
{
    detail::check_integrable(W, p.d);
    if (p.atom > 0 && W.singular_at_origin())
        throw std::invalid_argument(
            "interaction energy is infinite: atom self-interaction with a kernel singular at 0");
    if (p.d == 1 && W.kind() != KernelKind::TabulatedRadial)
        return interaction_1d_exact(p, W);
    return interaction_radial(p, W);
}

inline double entropy_profile(RadialProfile const& p, EntropySpec const& U)
{
    double sum = 0;
    for (auto const& piece : p.pieces)
        sum += U.U(piece.value) * ball_volume(p.d) *
               (std::pow(piece.b, p.d) - std::pow(piece.a, p.d));
    if (p.atom > 0) {
        double const rec = U.recession();
        if (std::isinf(rec))
            return std::numeric_limits<double>::infinity();
        sum += p.atom * rec;
    }
    return sum;
}

}  // namespace detail

/// Interaction energy (1/2) iint W(x - y) drho(x) drho(y).
inline double interaction_energy(RadialDensity const& rho, KernelSpec const& W)
{
    return detail::interaction_profile(rho.profile(), W);
}

/// Entropy E_U(rho) = int U(rho_ac) dx + (atom mass) * limsup_{r->inf} U(r)/r.
/// Exact on piecewise-constant values; +infinity when an atom meets a
/// superlinear entropy.
inline double entropy_energy(RadialDensity const& rho, EntropySpec const& U)
{
    return detail::entropy_profile(rho.profile(), U);
}

/// Free energy E_eps = W(rho) + eps * E_U(rho), with a grid-halving error
/// estimate.
inline EnergyBreakdown free_energy(RadialDensity const& rho, KernelSpec const& W,
                                   EntropySpec const& U, double epsilon,
                                   bool estimate_error = true)
{
    EnergyBreakdown out;
    out.interaction = interaction_energy(rho, W);
    out.entropy = entropy_energy(rho, U);
    out.epsilon = epsilon;
    out.total = out.interaction + epsilon * out.entropy;
    if (estimate_error && rho.cells() >= 16 && std::isfinite(out.total)) {
        auto const coarse = rho.coarsened();
        double const coarse_total =
            interaction_energy(coarse, W) + epsilon * entropy_energy(coarse, U);
        out.quadrature_error_estimate = std::abs(out.total - coarse_total);
    }
    return out;
}

/// iint |x-y|^alpha drho drho for alpha > -d, alpha != 0 (no 1/alpha factor).
inline double pair_power_integral(RadialDensity const& rho, double alpha)
{
    if (alpha == 0)
        throw std::invalid_argument("pair_power_integral: alpha must be nonzero");
    return 2.0 * alpha * interaction_energy(rho, KernelSpec::power_law(alpha));
}

/// iint log|x-y| drho drho.
inline double pair_log_integral(RadialDensity const& rho)
{
    return 2.0 * interaction_energy(rho, KernelSpec::logarithmic());
}

/// Ratio iint |x-y|^lambda drho drho / int rho^{m_c} with m_c = 1 - lambda/d;
/// the quantity whose uniform boundedness the singular-interaction bound
/// asserts.  Invariant under dilations.
inline double hls_ratio(RadialDensity const& rho, double lambda)
{
    int const d = rho.dim();
    if (!(lambda > -d) || !(lambda < 0))
        throw std::invalid_argument("hls_ratio: lambda must lie in (-d, 0)");
    double const mc = 1.0 - lambda / d;
    double const numerator = pair_power_integral(rho, lambda);
    double denominator = 0;
    for (std::size_t i = 0; i < rho.cells(); ++i)
        denominator += std::pow(rho.value(i), mc) * rho.shell_volume(i);
    if (!(denominator > 0))
        throw std::invalid_argument("hls_ratio: degenerate density");
    return numerator / denominator;
}

/// (1/d) * int rho log rho + iint log|x-y| drho drho; bounded below by a
/// dimensional constant and invariant under dilations.
inline double log_hls_gap(RadialDensity const& rho)
{
    if (rho.atom_mass() != 0)
        throw std::invalid_argument("log_hls_gap: density must be atom-free");
    double const ent = entropy_energy(rho, EntropySpec::linear());
    return ent / rho.dim() + pair_log_integral(rho);
}

}  // namespace aggdiff

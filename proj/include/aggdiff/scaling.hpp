// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggdiff/dyadic.hpp"
#include "aggdiff/energy.hpp"
#include "aggdiff/entropies.hpp"
#include "aggdiff/kernels.hpp"
#include "aggdiff/measures.hpp"
#include "aggdiff/quadrature.hpp"

namespace aggdiff {

struct RegimeVerdict {
    enum class Kind {
        UnboundedBelowAtInfinity,
        UnboundedBelowAtZero,
        MinimizerExists,
        Critical,
        Inconclusive
    } kind = Kind::Inconclusive;
    double epsilon_critical = 0;  // set for Critical
    std::string trace;

    std::string name() const
    {
        switch (kind) {
            case Kind::UnboundedBelowAtInfinity: return "UnboundedBelowAtInfinity";
            case Kind::UnboundedBelowAtZero: return "UnboundedBelowAtZero";
            case Kind::MinimizerExists: return "MinimizerExists";
            case Kind::Critical: return "Critical";
            case Kind::Inconclusive: return "Inconclusive";
        }
        return "Inconclusive";
    }
};

struct ScanPoint {
    double r;
    double energy;
    double derivative;
};

namespace detail {

/// Mean of f(|x - y|) over independent uniform points of the unit ball.
template<class F>
double unit_ball_pair_mean(int d, F&& f, bool singular_at_zero)
{
    double const wd = ball_volume(d);
    return quad::ball_pair_integral(d, 1.0, 1.0, f, singular_at_zero) / (wd * wd);
}

/// Interaction energy of the normalized indicator of B_r, by the pair
/// distance reduction (exact up to 1-d quadrature).
inline double ball_interaction(KernelSpec const& W, int d, double r)
{
    if (2.0 * r > W.r_max())
        throw std::domain_error("dilation scan: kernel profile not available up to 2r");
    auto f = [&](double t) { return W.value(t); };
    double const wd = ball_volume(d);
    return 0.5 * quad::ball_pair_integral(d, r, r, f, W.rough_at_origin()) /
           (wd * wd * std::pow(r, 2.0 * d));
}

}  // namespace detail

/// dE(rho_r)/dr along the dilation ray of normalized balls:
/// (1/r) * ( (1/2) <grad W(r(x-y)) . r(x-y)>_{B_1 x B_1} - eps v(r w_d^{1/d}) ).
inline double dilation_derivative(KernelSpec const& W, EntropySpec const& U, double eps, int d,
                                  double r)
{
    if (!(r > 0))
        throw std::invalid_argument("dilation_derivative: r must be positive");
    detail::check_integrable(W, d);
    double pair_mean;
    switch (W.kind()) {
        case KernelKind::PowerLaw: {
            double const beta = W.beta();
            static thread_local std::optional<std::pair<std::pair<double, int>, double>> cache;
            if (!cache || cache->first != std::make_pair(beta, d)) {
                double const g = detail::unit_ball_pair_mean(
                    d, [&](double t) { return std::pow(t, beta); }, beta < 1.0);
                cache = {{beta, d}, g};
            }
            pair_mean = cache->second * std::pow(r, beta);
            break;
        }
        case KernelKind::Logarithmic:
            pair_mean = 1.0;  // the virial of log is identically 1
            break;
        case KernelKind::TabulatedRadial: {
            if (2.0 * r > W.r_max())
                throw std::domain_error(
                    "dilation_derivative: tabulated kernel not available up to 2r");
            pair_mean = detail::unit_ball_pair_mean(
                d, [&](double t) { return t > 0 ? W.virial(r * t) : 0.0; }, false);
            break;
        }
        default:
            pair_mean = 0;
    }
    double const scale = r * std::pow(ball_volume(d), 1.0 / d);
    return (0.5 * pair_mean - eps * U.scaling_v(d, scale)) / r;
}

/// Energy of the dilation ray rho_r (normalized indicators of balls) on a
/// given radius grid.  Power and log kernels scale a single unit-ball
/// constant; tabulated kernels are integrated per radius.
inline std::vector<ScanPoint> dilation_energy_scan(KernelSpec const& W, EntropySpec const& U,
                                                   double eps, int d,
                                                   std::vector<double> const& r_grid,
                                                   std::size_t M_ref = 1024)
{
    detail::check_integrable(W, d);
    for (std::size_t i = 1; i < r_grid.size(); ++i)
        if (!(r_grid[i] > r_grid[i - 1]) || !(r_grid[0] > 0))
            throw std::invalid_argument("dilation scan grid must be positive and sorted");

    double unit_constant = 0;
    if (W.kind() != KernelKind::TabulatedRadial)
        unit_constant = interaction_energy(uniform_ball(1.0, d, M_ref), W);

    double const wd_root = std::pow(ball_volume(d), 1.0 / d);
    std::vector<ScanPoint> out;
    out.reserve(r_grid.size());
    for (double r : r_grid) {
        double inter;
        switch (W.kind()) {
            case KernelKind::PowerLaw:
                inter = unit_constant * std::pow(r, W.beta());
                break;
            case KernelKind::Logarithmic:
                inter = unit_constant + 0.5 * std::log(r);
                break;
            default:
                inter = detail::ball_interaction(W, d, r);
        }
        double const energy = inter + eps * U.mccann_u(d, r * wd_root);
        out.push_back({r, energy, dilation_derivative(W, U, eps, d, r)});
    }
    return out;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n)
{
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo * std::pow(hi / lo, n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
    return g;
}

/// First-order optimum along dilations for power kernel / power entropy in
/// the slow-diffusion window d(1-m) < beta < 0 < m - 1, with the balance
/// identity residual |W_beta(rho_r0) - eps d(m-1)/beta E_m(rho_r0)| /
/// |W_beta(rho_r0)| checked on the dilated grid.
struct DilationOptimum {
    double r0 = 0;
    double virial_residual = 0;
    double energy = 0;  // E_eps at the optimum; negative in the valid window
};

inline DilationOptimum optimal_dilation(RadialDensity const& rho, double beta, double m,
                                        double eps, int d)
{
    if (!(m > 1.0))
        throw std::invalid_argument("optimal_dilation: requires m > 1");
    if (!(beta < 0.0) || !(beta > d * (1.0 - m)))
        throw std::invalid_argument("optimal_dilation: requires d(1-m) < beta < 0");
    KernelSpec const W = KernelSpec::power_law(beta);
    EntropySpec const U = EntropySpec::power(m);
    double const w0 = interaction_energy(rho, W);
    double const e0 = entropy_energy(rho, U);
    if (!(w0 < 0))
        throw std::invalid_argument("optimal_dilation: interaction energy must be negative");
    if (!(e0 > 0))
        throw std::invalid_argument("optimal_dilation: entropy must be positive");

    double const dlm = d * (1.0 - m);
    DilationOptimum out;
    out.r0 = std::pow(-eps * dlm * e0 / (beta * w0), 1.0 / (beta - dlm));

    RadialDensity const dilated = dilate(rho, out.r0);
    double const wd = interaction_energy(dilated, W);
    double const ed = entropy_energy(dilated, U);
    out.virial_residual = std::abs(wd - eps * d * (m - 1.0) / beta * ed) / std::abs(wd);
    out.energy = wd + eps * ed;
    if (!(out.energy < 0))
        throw std::runtime_error("optimal_dilation: energy at the optimum is not negative");
    return out;
}

// ---------------------------------------------------------------------------
// Regime classification
// ---------------------------------------------------------------------------

namespace detail {

inline RegimeVerdict classify_homogeneous(KernelSpec const& W, EntropySpec const& U, double eps,
                                          int d)
{
    double const beta = W.kind() == KernelKind::Logarithmic ? 0.0 : W.beta();
    double const m = U.kind() == EntropyKind::Linear ? 1.0 : U.m();
    double const dlm = d * (1.0 - m);
    double const cstar =
        std::pow(2.0, beta - 1.0) / (d * std::pow(ball_volume(d), 1.0 - m));
    std::ostringstream tr;
    tr.precision(12);
    tr << "homogeneous family: beta = " << beta << ", m = " << m << ", d = " << d
       << ", eps = " << eps << ", d(1-m) = " << dlm << "; ";

    RegimeVerdict v;
    if (beta < dlm) {
        tr << "aggregation-dominated (beta < d(1-m)): dilation ray diverges ";
        if (beta >= 0) {
            v.kind = RegimeVerdict::Kind::UnboundedBelowAtInfinity;
            tr << "at infinity (virial term 2^{beta-1} r^beta is outgrown by eps d w_d^{1-m} "
                  "r^{(1-m)d})";
        } else {
            v.kind = RegimeVerdict::Kind::UnboundedBelowAtZero;
            tr << "at zero (virial term 2^{beta-1} r^beta dominates as r -> 0)";
        }
        v.trace = tr.str();
        return v;
    }
    if (beta == dlm) {
        tr << "balanced homogeneity (beta = d(1-m)), threshold eps* = 2^{beta-1}/(d w_d^{1-m}) = "
           << cstar << "; ";
        if (m == 1.0) {
            double const eps_c = 1.0 / (2.0 * d);
            if (std::abs(eps - eps_c) <= 1e-9) {
                v.kind = RegimeVerdict::Kind::Critical;
                v.epsilon_critical = eps_c;
                tr << "log kernel with linear diffusion at the critical noise eps_c = 1/(2d) = "
                   << eps_c << ": dilation slope 1/2 - eps d vanishes";
            } else if (eps > eps_c) {
                v.kind = RegimeVerdict::Kind::UnboundedBelowAtInfinity;
                tr << "eps > eps_c = " << eps_c
                   << ": slope 1/2 - eps d < 0, energy drops without bound as r -> infinity";
            } else {
                v.kind = RegimeVerdict::Kind::UnboundedBelowAtZero;
                tr << "eps < eps_c = " << eps_c
                   << ": slope 1/2 - eps d > 0, energy drops without bound as r -> 0";
            }
            v.trace = tr.str();
            return v;
        }
        if (m < 1.0) {
            if (eps > cstar) {
                v.kind = RegimeVerdict::Kind::UnboundedBelowAtInfinity;
                tr << "fast diffusion with eps > eps*: diffusion outruns the virial at large "
                      "dilations";
                v.trace = tr.str();
                return v;
            }
            // fall through to the ring construction below
        } else {
            if (eps < cstar) {
                v.kind = RegimeVerdict::Kind::UnboundedBelowAtZero;
                tr << "slow diffusion with eps < eps*: collapse along shrinking dilations";
            } else {
                v.kind = RegimeVerdict::Kind::Inconclusive;
                tr << "slow diffusion with eps >= eps*: boundedness is governed by "
                      "functional-inequality constants not computed here";
            }
            v.trace = tr.str();
            return v;
        }
    }
    // beta > dlm, or the fast-diffusion balanced case with eps <= eps*
    if (m > 1.0 && beta < 0.0) {
        v.kind = RegimeVerdict::Kind::MinimizerExists;
        tr << "slow-diffusion window d(1-m) < beta < 0: global minimizer via dilation-optimized "
              "radially decreasing sequences";
        v.trace = tr.str();
        return v;
    }
    if (m == 1.0 && beta > 0.0) {
        v.kind = RegimeVerdict::Kind::MinimizerExists;
        tr << "linear diffusion with growing virial (s^beta -> infinity): confinement holds for "
              "every eps";
        v.trace = tr.str();
        return v;
    }
    if (m < 1.0 && beta < dlm / m) {
        double const gamma = 0.5 * (beta + dlm / m);
        auto cert = certify_unbounded(gamma, beta, m, d, eps, 1e3);
        if (cert.found) {
            v.kind = RegimeVerdict::Kind::UnboundedBelowAtZero;
            tr << "fast diffusion, beta < d(1-m)/m: ring construction with gamma = " << gamma
               << " certifies E < -1e3 at K = " << cert.K << " (E = " << cert.energy << ")";
        } else {
            v.kind = RegimeVerdict::Kind::Inconclusive;
            tr << "fast diffusion, beta < d(1-m)/m, but the ring construction did not certify "
                  "divergence: "
               << cert.note;
        }
        v.trace = tr.str();
        return v;
    }
    v.kind = RegimeVerdict::Kind::Inconclusive;
    tr << "outside the decided cells (no construction applies)";
    v.trace = tr.str();
    return v;
}

inline RegimeVerdict classify_general(KernelSpec const& W, EntropySpec const& U, double eps,
                                      int d)
{
    std::ostringstream tr;
    tr.precision(12);
    auto const grid = log_grid(1e-6, 1e6, 500);
    double const wd_root = std::pow(ball_volume(d), 1.0 / d);

    auto bracket_hi = [&](double r) {
        return 0.5 * W.virial_sup_on(2.0 * r) - eps * U.scaling_v(d, r * wd_root);
    };
    auto bracket_lo = [&](double r) {
        return 0.5 * W.virial_inf_on(2.0 * r) - eps * U.scaling_v(d, r * wd_root);
    };

    bool fires_infinity = true;
    for (double r : grid)
        if (r >= 1e5 && !(bracket_hi(r) < 0)) {
            fires_infinity = false;
            break;
        }
    bool fires_zero = true;
    for (double r : grid)
        if (r <= 1e-5 && !(bracket_lo(r) > 0)) {
            fires_zero = false;
            break;
        }

    RegimeVerdict v;
    if (fires_infinity) {
        v.kind = RegimeVerdict::Kind::UnboundedBelowAtInfinity;
        tr << "large-dilation test: (1/2) sup_{|z|<=2r} grad W.z - eps v < 0 over the final "
              "decade r in [1e5, 1e6] (value at r = 1e6: "
           << bracket_hi(1e6) << ")";
        v.trace = tr.str();
        return v;
    }
    if (fires_zero) {
        v.kind = RegimeVerdict::Kind::UnboundedBelowAtZero;
        tr << "small-dilation test: (1/2) inf_{|z|<=2r} grad W.z - eps v > 0 over the first "
              "decade r in [1e-6, 1e-5] (value at r = 1e-6: "
           << bracket_lo(1e-6) << ")";
        v.trace = tr.str();
        return v;
    }
    if (U.kind() == EntropyKind::Linear) {
        auto const slope = W.asymptotic_slope();
        if (slope.kind == AsymptoticSlope::Kind::Undetermined) {
            v.kind = RegimeVerdict::Kind::Inconclusive;
            tr << "asymptotic slope of grad W.x undetermined from the tabulated tail; no "
                  "classification";
            v.trace = tr.str();
            return v;
        }
        if (slope.kind == AsymptoticSlope::Kind::Infinite) {
            v.kind = RegimeVerdict::Kind::MinimizerExists;
            tr << "linear diffusion, grad W.x -> infinity: confinement for every eps";
            v.trace = tr.str();
            return v;
        }
        double const eps_c = slope.value / (2.0 * d);
        tr << "linear diffusion with asymptotic slope L = " << slope.value
           << ", critical noise eps_c = L/(2d) = " << eps_c << "; ";
        if (std::abs(eps - eps_c) <= 1e-9) {
            v.kind = RegimeVerdict::Kind::Critical;
            v.epsilon_critical = eps_c;
            tr << "eps equals eps_c";
        } else if (eps < eps_c) {
            v.kind = RegimeVerdict::Kind::MinimizerExists;
            tr << "eps < eps_c and the profile is bounded below: minimizer exists";
        } else {
            v.kind = RegimeVerdict::Kind::Inconclusive;
            tr << "eps > eps_c but the large-dilation test did not fire on the final decade";
        }
        v.trace = tr.str();
        return v;
    }
    v.kind = RegimeVerdict::Kind::Inconclusive;
    tr << "neither dilation test fires for the tabulated profile; no classification";
    v.trace = tr.str();
    return v;
}

}  // namespace detail

/// Existence / nonexistence classification.  Power and log kernels with
/// power or linear entropies use the closed-form homogeneous table; tabulated
/// kernels evaluate the dilation tests numerically on a log grid.
inline RegimeVerdict classify_regime(KernelSpec const& W, EntropySpec const& U, double eps,
                                     int d)
{
    if (!(eps > 0))
        throw std::invalid_argument("classify_regime: eps must be positive");
    detail::check_integrable(W, d);
    if (W.kind() == KernelKind::TabulatedRadial)
        return detail::classify_general(W, U, eps, d);
    return detail::classify_homogeneous(W, U, eps, d);
}

}  // namespace aggdiff

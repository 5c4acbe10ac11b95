// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggdiff/energy.hpp"
#include "aggdiff/measures.hpp"

namespace aggdiff {

/// Probability measure spread over dyadic rings B_{2^{k+1}} \ B_{2^k} with
/// geometrically decaying ring masses 2^{-k gamma} / sum_l 2^{-l gamma},
/// truncated at ring K and renormalized.
struct DyadicDensity {
    double gamma = 1.5;
    int d = 2;
    int K = 8;

    double ring_mass(int k) const
    {
        double const s = (1.0 - std::pow(2.0, -gamma * (K + 1))) / (1.0 - std::pow(2.0, -gamma));
        return std::pow(2.0, -gamma * k) / s;
    }

    double log_ring_volume(int k) const
    {
        return std::log(ball_volume(d)) + k * d * M_LN2 + std::log(std::pow(2.0, d) - 1.0);
    }

    /// Piecewise-constant realization, >= cells_per_ring cells per ring so the
    /// profile is represented exactly.
    RadialProfile profile(int cells_per_ring = 32) const
    {
        RadialProfile p;
        p.d = d;
        p.pieces.reserve(static_cast<std::size_t>(K + 1) * cells_per_ring);
        for (int k = 0; k <= K; ++k) {
            double const lo = std::pow(2.0, k);
            double const hi = std::pow(2.0, k + 1);
            double const log_value = std::log(ring_mass(k)) - log_ring_volume(k);
            double const value = std::exp(log_value);  // underflows to 0 for deep rings
            double const width = (hi - lo) / cells_per_ring;
            for (int j = 0; j < cells_per_ring; ++j)
                p.pieces.push_back({lo + j * width, lo + (j + 1) * width, value});
        }
        return p;
    }

    /// int rho^m dx, exact ring sums evaluated in log space.
    double lp_integral(double m) const
    {
        double sum = 0;
        for (int k = 0; k <= K; ++k)
            sum += std::exp(m * std::log(ring_mass(k)) + (1.0 - m) * log_ring_volume(k));
        return sum;
    }

    /// int |x|^beta drho, exact ring sums.
    double beta_moment(double beta) const
    {
        double const c1 = d * (std::pow(2.0, beta + d) - 1.0) /
                          ((beta + d) * (std::pow(2.0, d) - 1.0));
        double sum = 0;
        for (int k = 0; k <= K; ++k)
            sum += ring_mass(k) * c1 * std::pow(2.0, k * beta);
        return sum;
    }
};

/// Exact partial sums of the ring series for the beta-moment and int rho^m of
/// the untruncated construction, plus the admissibility of (gamma, beta, m).
struct DyadicSeries {
    std::vector<double> moment_partial_sums;
    std::vector<double> entropy_partial_sums;  // partial sums of int rho^m
    bool admissible = false;
    double moment_ratio = 0;   // asymptotic term ratio 2^{-(gamma-beta)}
    double entropy_ratio = 0;  // asymptotic term ratio 2^{-(m gamma - d(1-m))}
};

inline DyadicSeries dyadic_series(double gamma, double beta, double m, int d, int K)
{
    if (!(m < 1.0) || !(m > 0.0))
        throw std::invalid_argument("dyadic construction requires 0 < m < 1");
    if (!(beta > 0.0))
        throw std::invalid_argument("dyadic construction requires beta > 0");
    if (!(gamma > 0.0) || K < 1)
        throw std::invalid_argument("dyadic series needs gamma > 0 and K >= 1");

    double const log_s_inf = -std::log(1.0 - std::pow(2.0, -gamma));
    double const c1 =
        d * (std::pow(2.0, beta + d) - 1.0) / ((beta + d) * (std::pow(2.0, d) - 1.0));
    double const log_c2 = (1.0 - m) * std::log(ball_volume(d) * (std::pow(2.0, d) - 1.0));

    DyadicSeries out;
    out.admissible = (gamma > beta) && (m * gamma < d * (1.0 - m));
    out.moment_ratio = std::pow(2.0, -(gamma - beta));
    out.entropy_ratio = std::pow(2.0, -(m * gamma - d * (1.0 - m)));
    out.moment_partial_sums.reserve(K + 1);
    out.entropy_partial_sums.reserve(K + 1);
    double moment = 0, entropy = 0;
    for (int k = 0; k <= K; ++k) {
        moment += c1 * std::exp(-k * (gamma - beta) * M_LN2 - log_s_inf);
        entropy += std::exp(log_c2 - k * (m * gamma - d * (1.0 - m)) * M_LN2 - m * log_s_inf);
        out.moment_partial_sums.push_back(moment);
        out.entropy_partial_sums.push_back(entropy);
    }
    return out;
}

struct CertifyRow {
    int K;
    double moment_sum;   // beta-moment of the truncated, renormalized density
    double entropy_sum;  // int rho^m of the truncated, renormalized density
    double energy;       // E_eps via the energy quadrature
};

struct CertifyResult {
    bool found = false;
    int K = 0;
    double energy = 0;        // certified energy when found
    double achieved_min = 0;  // best energy seen
    bool moment_cauchy = false;
    std::vector<CertifyRow> trail;
    std::string note;
};

/// Searches for the smallest truncation K at which the renormalized dyadic
/// density has free energy below -B while the beta-moment series is Cauchy
/// (tail below 1e-6).  Divergent moment sums (gamma <= beta) can never
/// certify: the limiting measure has infinite interaction energy.
inline CertifyResult certify_unbounded(double gamma, double beta, double m, int d, double eps,
                                       double bound, int K_max = 4096)
{
    if (!(eps > 0) || !(bound > 0))
        throw std::invalid_argument("certify_unbounded: need eps > 0 and bound > 0");
    auto series = dyadic_series(gamma, beta, m, d, std::min(K_max, 512));

    KernelSpec const W = KernelSpec::power_law(beta);
    EntropySpec const U = EntropySpec::power(m);
    double const log_s_inf = -std::log(1.0 - std::pow(2.0, -gamma));
    double const c1 =
        d * (std::pow(2.0, beta + d) - 1.0) / ((beta + d) * (std::pow(2.0, d) - 1.0));

    CertifyResult out;
    out.achieved_min = std::numeric_limits<double>::infinity();
    double const moment_tol = 1e-6;

    bool const moment_divergent = !(gamma > beta);
    double const entropy_decay = m * gamma - d * (1.0 - m);  // > 0: int rho^m converges
    int const K_eval_cap = moment_divergent ? 32 : K_max;

    for (int K = 8; K <= K_eval_cap; K *= 2) {
        DyadicDensity dy{gamma, d, K};
        double const interaction = detail::interaction_profile(dy.profile(), W);
        double const entropy_int = dy.lp_integral(m);
        double const energy = interaction + eps * entropy_int / (m - 1.0);
        out.trail.push_back({K, dy.beta_moment(beta), entropy_int, energy});
        out.achieved_min = std::min(out.achieved_min, energy);

        bool cauchy = false;
        if (!moment_divergent) {
            double const tail = c1 *
                                std::exp(-(K + 1) * (gamma - beta) * M_LN2 - log_s_inf) /
                                (1.0 - std::pow(2.0, -(gamma - beta)));
            cauchy = tail < moment_tol;
        }
        if (cauchy && energy < -bound) {
            out.found = true;
            out.K = K;
            out.energy = energy;
            out.moment_cauchy = true;
            std::ostringstream note;
            note << "certified: E = " << energy << " < " << -bound << " at K = " << K
                 << " with beta-moment tail below " << moment_tol;
            out.note = note.str();
            return out;
        }
        // convergent entropy: a closed geometric tail bounds every deeper
        // truncation, so the threshold is provably out of reach
        if (entropy_decay > 0 && !moment_divergent) {
            double const log_s_K = std::log((1.0 - std::pow(2.0, -gamma * (K + 1))) /
                                            (1.0 - std::pow(2.0, -gamma)));
            double const log_c2 =
                (1.0 - m) * std::log(ball_volume(d) * (std::pow(2.0, d) - 1.0));
            double const next_term =
                std::exp(log_c2 - (K + 1) * entropy_decay * M_LN2 - m * log_s_K);
            double const entropy_sup =
                entropy_int + next_term / (1.0 - std::pow(2.0, -entropy_decay));
            // E(K') >= -eps * entropy_sup / (1 - m) for every K' >= K
            if (-eps * entropy_sup / (1.0 - m) > -bound) {
                std::ostringstream note;
                note << "not certified: both ring series converge, and the energy of every "
                        "deeper truncation stays above "
                     << -eps * entropy_sup / (1.0 - m) << " > " << -bound;
                out.note = note.str();
                out.moment_cauchy = cauchy;
                return out;
            }
        }
    }
    out.moment_cauchy = !moment_divergent;
    out.note = moment_divergent
                   ? "not certified: beta-moment partial sums diverge geometrically "
                     "(interaction energy of the limit is infinite)"
                   : "not certified: threshold not reached before K_max";
    return out;
}

}  // namespace aggdiff

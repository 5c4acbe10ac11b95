// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggdiff/energy.hpp"
#include "aggdiff/entropies.hpp"
#include "aggdiff/kernels.hpp"
#include "aggdiff/measures.hpp"
#include "aggdiff/threads.hpp"

namespace aggdiff {

/// Pairwise-interacting diffusion: dX_i = -(1/N) sum_{j != i} grad W(X_i - X_j) dt
/// + sqrt(2 eps) dB_i, integrated by Euler-Maruyama.
struct SimConfig {
    std::size_t N = 200;
    int d = 1;
    KernelSpec kernel = KernelSpec::power_law(2.0);
    double eps = 0.5;
    double dt = 1e-2;
    double T = 10.0;
    std::uint64_t seed = 0;
    std::size_t snapshot_stride = 100;

    void validate() const
    {
        if (N < 2)
            throw std::invalid_argument("particles: need N >= 2");
        if (!(dt > 0))
            throw std::invalid_argument("particles: dt must be positive");
        if (!(T >= dt))
            throw std::invalid_argument("particles: horizon must be at least one step");
        if (!(eps >= 0))
            throw std::invalid_argument("particles: eps must be nonnegative");
    }
};

struct StepStats {
    std::size_t singular_pairs_skipped = 0;
};

/// grad W(z) = w'(s) z / s along |z| = s; returned as the scalar multiplying z.
inline double ens_force_factor(KernelSpec const& kernel, double s)
{
    return kernel.virial(s) / (s * s);
}

/// One Euler-Maruyama step.  Noise is pre-generated in particle-major order
/// before the force loop, so the random stream is independent of the force
/// evaluation order; coincident pairs under a singular force contribute
/// nothing for the step and are counted.
inline StepStats step(ParticleEnsemble& ens, SimConfig const& cfg)
{
    if (ens.d > 8)
        throw std::invalid_argument("particles: dimensions above 8 are not supported");
    std::size_t const N = ens.count();
    int const d = ens.d;
    double const noise_scale = std::sqrt(2.0 * cfg.eps * cfg.dt);
    std::vector<double> noise(N * static_cast<std::size_t>(d));
    if (cfg.eps > 0)
        for (auto& x : noise)
            x = ens.rng.normal();

    // grad W(z) = factor(|z|^2) z; the power-law factor is a pure power of
    // the squared distance, which keeps the hot loop free of square roots
    bool const power = cfg.kernel.kind() == KernelKind::PowerLaw;
    double const half_exponent = power ? 0.5 * (cfg.kernel.beta() - 2.0) : 0.0;
    bool const linear_force = power && cfg.kernel.beta() == 2.0;
    auto factor_of_s2 = [&](double s2) {
        if (power)
            return std::pow(s2, half_exponent);
        if (cfg.kernel.kind() == KernelKind::Logarithmic)
            return 1.0 / s2;
        return cfg.kernel.virial(std::sqrt(s2)) / s2;
    };

    std::vector<double> force(N * static_cast<std::size_t>(d), 0.0);
    std::vector<std::size_t> skipped(N, 0);
    parallel_for(N, [&](std::size_t i) {
        double const* xi = ens.at(i);
        double* fi = force.data() + i * static_cast<std::size_t>(d);
        double diff[8];
        for (std::size_t j = 0; j < N; ++j) {
            if (j == i)
                continue;
            double const* xj = ens.at(j);
            double s2 = 0;
            for (int k = 0; k < d; ++k) {
                diff[k] = xi[k] - xj[k];
                s2 += diff[k] * diff[k];
            }
            if (s2 == 0) {
                ++skipped[i];
                continue;  // coincident pair: no defined direction
            }
            double const factor = linear_force ? 1.0 : factor_of_s2(s2);
            for (int k = 0; k < d; ++k)
                fi[k] += factor * diff[k];
        }
    });

    StepStats stats;
    for (auto c : skipped)
        stats.singular_pairs_skipped += c;
    stats.singular_pairs_skipped /= 2;  // each coincident pair counted from both ends

    double const dt_over_N = cfg.dt / static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) {
        for (int k = 0; k < d; ++k) {
            double& x = ens.at(i)[k];
            x += -dt_over_N * force[i * static_cast<std::size_t>(d) + k];
            if (cfg.eps > 0)
                x += noise_scale * noise[i * static_cast<std::size_t>(d) + k];
            if (!std::isfinite(x))
                throw std::runtime_error("particle position became non-finite at t = " +
                                         std::to_string(ens.time));
        }
    }
    ens.time += cfg.dt;
    return stats;
}

/// Pairwise interaction (1/(2N^2)) sum_{i != j} W(X_i - X_j); pairs at which
/// a singular kernel is infinite are excluded and counted.
inline double empirical_interaction(ParticleEnsemble const& ens, KernelSpec const& kernel,
                                    std::size_t* excluded = nullptr)
{
    std::size_t const N = ens.count();
    int const d = ens.d;
    std::size_t bad = 0;
    double sum = parallel_sum(N, [&](std::size_t lo, std::size_t hi) {
        double acc = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t j = i + 1; j < N; ++j) {
                double s2 = 0;
                for (int k = 0; k < d; ++k) {
                    double const dk = ens.at(i)[k] - ens.at(j)[k];
                    s2 += dk * dk;
                }
                double const w = kernel.value(std::sqrt(s2));
                if (std::isfinite(w))
                    acc += w;
            }
        }
        return acc;
    });
    if (excluded) {
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = i + 1; j < N; ++j) {
                double s2 = 0;
                for (int k = 0; k < d; ++k) {
                    double const dk = ens.at(i)[k] - ens.at(j)[k];
                    s2 += dk * dk;
                }
                if (!std::isfinite(kernel.value(std::sqrt(s2))))
                    ++bad;
            }
        *excluded = bad;
    }
    return sum / static_cast<double>(N) / static_cast<double>(N);
}

inline double variance_about_com(ParticleEnsemble const& ens)
{
    std::size_t const N = ens.count();
    int const d = ens.d;
    std::vector<double> com(d, 0.0);
    for (std::size_t i = 0; i < N; ++i)
        for (int k = 0; k < d; ++k)
            com[k] += ens.at(i)[k];
    for (auto& c : com)
        c /= static_cast<double>(N);
    double var = 0;
    for (std::size_t i = 0; i < N; ++i)
        for (int k = 0; k < d; ++k) {
            double const dk = ens.at(i)[k] - com[k];
            var += dk * dk;
        }
    return var / static_cast<double>(N);
}

struct SummaryRow {
    double t;
    double interaction;
    double variance_about_com;
};

struct Trajectory {
    std::vector<std::pair<double, std::vector<double>>> snapshots;  // (t, positions)
    std::vector<SummaryRow> summary;
    std::size_t singular_pairs_skipped = 0;
};

/// Integrates the system over [0, T], recording a snapshot and summary row
/// every snapshot_stride steps (plus the initial and final states).
inline Trajectory run(SimConfig const& cfg, ParticleEnsemble ens)
{
    cfg.validate();
    Trajectory traj;
    auto record = [&] {
        traj.snapshots.emplace_back(ens.time, ens.positions);
        traj.summary.push_back(
            {ens.time, empirical_interaction(ens, cfg.kernel), variance_about_com(ens)});
    };
    record();
    std::size_t const steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
    for (std::size_t n = 1; n <= steps; ++n) {
        traj.singular_pairs_skipped += step(ens, cfg).singular_pairs_skipped;
        if (n % cfg.snapshot_stride == 0 || n == steps)
            record();
    }
    return traj;
}

/// Free energy of the empirical measure: pairwise interaction plus a
/// histogram entropy estimate on equal-width bins spanning the bounding box.
/// Pairs at which a singular kernel is infinite are excluded from the
/// interaction and counted through `excluded_pairs`.
inline EnergyBreakdown empirical_energy(ParticleEnsemble const& ens, KernelSpec const& kernel,
                                        double eps, std::size_t bins = 0,
                                        EntropySpec const& U = EntropySpec::linear(),
                                        std::size_t* excluded_pairs = nullptr)
{
    std::size_t const N = ens.count();
    int const d = ens.d;
    if (bins == 0)
        bins = std::max<std::size_t>(
            16, static_cast<std::size_t>(std::ceil(std::pow(double(N), 1.0 / (d + 1)))));
    if (bins < 16)
        throw std::invalid_argument("empirical_energy: need at least 16 bins per dimension");

    EnergyBreakdown out;
    std::size_t excluded = 0;
    out.interaction = empirical_interaction(ens, kernel, &excluded);
    if (excluded_pairs)
        *excluded_pairs = excluded;
    out.epsilon = eps;

    auto histogram_entropy = [&](std::size_t B) {
        std::vector<double> lo(d, std::numeric_limits<double>::infinity());
        std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < N; ++i)
            for (int k = 0; k < d; ++k) {
                lo[k] = std::min(lo[k], ens.at(i)[k]);
                hi[k] = std::max(hi[k], ens.at(i)[k]);
            }
        double cell_vol = 1.0;
        std::vector<double> width(d);
        for (int k = 0; k < d; ++k) {
            width[k] = (hi[k] - lo[k]) / static_cast<double>(B);
            if (!(width[k] > 0))
                width[k] = 1e-12;
            cell_vol *= width[k];
        }
        std::size_t cells = 1;
        for (int k = 0; k < d; ++k)
            cells *= B;
        std::vector<std::size_t> count(cells, 0);
        for (std::size_t i = 0; i < N; ++i) {
            std::size_t idx = 0;
            for (int k = 0; k < d; ++k) {
                auto b = static_cast<std::size_t>((ens.at(i)[k] - lo[k]) / width[k]);
                if (b >= B)
                    b = B - 1;
                idx = idx * B + b;
            }
            ++count[idx];
        }
        double entropy = 0;
        for (std::size_t c = 0; c < cells; ++c)
            if (count[c] > 0) {
                double const density = static_cast<double>(count[c]) /
                                       (static_cast<double>(N) * cell_vol);
                entropy += U.U(density) * cell_vol;
            }
        return entropy;
    };

    out.entropy = histogram_entropy(bins);
    out.quadrature_error_estimate = std::abs(out.entropy - histogram_entropy(bins / 2));
    out.total = out.interaction + eps * out.entropy;
    return out;
}

}  // namespace aggdiff

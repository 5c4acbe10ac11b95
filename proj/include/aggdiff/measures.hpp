// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggdiff/quadrature.hpp"
#include "aggdiff/rng.hpp"

namespace aggdiff {

inline constexpr double mass_tol = 1e-10;

/// One constant-density piece of a radial profile: value on radii [a, b).
struct RadialPiece {
    double a, b, value;
};

/// Generic piecewise-constant radial profile with an optional atom at the
/// origin.  The uniform-grid density below adapts to this view; ring
/// constructions build it directly.
struct RadialProfile {
    int d = 1;
    std::vector<RadialPiece> pieces;
    double atom = 0;
};

/// Radially symmetric density on a uniform grid 0 = r_0 < ... < r_M with
/// per-cell values at midpoints, plus an optional atom at the origin.
/// Immutable after construction; the nominal mass is 1 unless the object was
/// produced by rescale_mass.
class RadialDensity {
  public:
    RadialDensity(int d, double spacing, std::vector<double> values, double atom = 0.0,
                  double nominal_mass = 1.0)
        : d_(d), h_(spacing), values_(std::move(values)), atom_(atom), nominal_(nominal_mass)
    {
        if (d_ < 1)
            throw std::invalid_argument("dimension must be >= 1");
        if (!(h_ > 0))
            throw std::invalid_argument("grid spacing must be positive");
        if (values_.size() < 8)
            throw std::invalid_argument("grid too coarse: need at least 8 cells");
        if (atom_ < 0 || atom_ > 1)
            throw std::invalid_argument("atom mass must lie in [0, 1]");
        for (double v : values_)
            if (!(v >= 0) || !std::isfinite(v))
                throw std::invalid_argument("density values must be finite and nonnegative");
        double const total = mass();
        if (std::abs(total - nominal_) > mass_tol * std::max(1.0, nominal_))
            throw std::invalid_argument("density mass " + std::to_string(total) +
                                        " violates nominal mass " + std::to_string(nominal_));
    }

    /// Normalizes arbitrary nonnegative samples to a probability density.
    static RadialDensity normalized(int d, double spacing, std::vector<double> values,
                                    double atom = 0.0)
    {
        double total = atom;
        double const unit = ball_volume(d) * std::pow(spacing, d);
        for (std::size_t i = 0; i < values.size(); ++i)
            total += values[i] * unit * (std::pow(i + 1.0, d) - std::pow(static_cast<double>(i), d));
        if (!(total > 0))
            throw std::invalid_argument("cannot normalize: zero total mass");
        for (auto& v : values)
            v /= total;
        return RadialDensity(d, spacing, std::move(values), atom / total);
    }

    int dim() const { return d_; }
    double spacing() const { return h_; }
    std::size_t cells() const { return values_.size(); }
    double radius() const { return h_ * static_cast<double>(values_.size()); }
    double value(std::size_t i) const { return values_[i]; }
    std::vector<double> const& values() const { return values_; }
    double atom_mass() const { return atom_; }
    double nominal_mass() const { return nominal_; }
    double midpoint(std::size_t i) const { return (i + 0.5) * h_; }

    double shell_volume(std::size_t i) const
    {
        return ball_volume(d_) * std::pow(h_, d_) *
               (std::pow(i + 1.0, d_) - std::pow(static_cast<double>(i), d_));
    }

    double shell_mass(std::size_t i) const { return values_[i] * shell_volume(i); }

    double mass() const
    {
        double total = atom_;
        for (std::size_t i = 0; i < values_.size(); ++i)
            total += shell_mass(i);
        return total;
    }

    bool is_probability() const { return std::abs(nominal_ - 1.0) < 1e-14; }

    RadialProfile profile() const
    {
        RadialProfile p;
        p.d = d_;
        p.atom = atom_;
        p.pieces.reserve(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i)
            p.pieces.push_back({i * h_, (i + 1) * h_, values_[i]});
        return p;
    }

    /// Cell-merged density on M/2 cells (used by grid-halving error
    /// estimates).  Merging adjacent cells conserves mass exactly.
    RadialDensity coarsened() const
    {
        if (values_.size() % 2 != 0 || values_.size() < 16)
            throw std::invalid_argument("grid halving needs an even cell count >= 16");
        std::size_t const m = values_.size() / 2;
        std::vector<double> coarse(m);
        for (std::size_t i = 0; i < m; ++i) {
            double const mass2 = shell_mass(2 * i) + shell_mass(2 * i + 1);
            double const vol2 = shell_volume(2 * i) + shell_volume(2 * i + 1);
            coarse[i] = mass2 / vol2;
        }
        return RadialDensity(d_, 2 * h_, std::move(coarse), atom_, nominal_);
    }

    void save_csv(std::string const& path) const;
    static RadialDensity load_csv(std::string const& path);

  private:
    int d_;
    double h_;
    std::vector<double> values_;
    double atom_;
    double nominal_;
};

/// Normalized indicator of the ball of radius r: constant (r^d omega_d)^{-1}.
inline RadialDensity uniform_ball(double r, int d, std::size_t M = 4096)
{
    if (!(r > 0))
        throw std::invalid_argument("uniform_ball: radius must be positive");
    if (M < 8)
        throw std::invalid_argument("uniform_ball: grid too coarse (need M >= 8)");
    double const value = 1.0 / (ball_volume(d) * std::pow(r, d));
    return RadialDensity(d, r / static_cast<double>(M), std::vector<double>(M, value));
}

/// Push-forward under x -> r x: values scale by r^{-d}, the grid by r.
/// Exact on the grid (no interpolation).
inline RadialDensity dilate(RadialDensity const& rho, double r)
{
    if (!(r > 0))
        throw std::invalid_argument("dilate: scale must be positive");
    std::vector<double> scaled(rho.values());
    double const factor = std::pow(r, -rho.dim());
    for (auto& v : scaled)
        v *= factor;
    return RadialDensity(rho.dim(), rho.spacing() * r, std::move(scaled), rho.atom_mass(),
                         rho.nominal_mass());
}

/// Pointwise mass rescaling; the result carries nominal mass c * old mass and
/// is only meant for scaling-identity checks.
inline RadialDensity rescale_mass(RadialDensity const& rho, double c)
{
    if (!(c > 0))
        throw std::invalid_argument("rescale_mass: factor must be positive");
    std::vector<double> scaled(rho.values());
    for (auto& v : scaled)
        v *= c;
    return RadialDensity(rho.dim(), rho.spacing(), std::move(scaled),
                         std::min(1.0, rho.atom_mass() * c), rho.nominal_mass() * c);
}

/// alpha-moment int |x|^alpha drho by midpoint quadrature of
/// d omega_d int r^{alpha+d-1} rho(r) dr; the atom contributes nothing.
inline double moment(RadialDensity const& rho, double alpha)
{
    if (!(alpha > 0))
        throw std::invalid_argument("moment: order must be positive");
    int const d = rho.dim();
    double const coeff = d * ball_volume(d) * rho.spacing();
    double sum = 0;
    for (std::size_t i = 0; i < rho.cells(); ++i)
        sum += std::pow(rho.midpoint(i), alpha + d - 1) * rho.value(i);
    return coeff * sum;
}

/// Radially symmetric decreasing rearrangement: sort (value, shell volume)
/// pairs by value and refill the shells from the origin outward.  Exact (a
/// pure permutation) in one dimension where shells have equal volume; in
/// higher dimension a block that straddles a shell boundary is volume-averaged
/// into it, so level sets are preserved to within one grid cell.
inline RadialDensity rearrange_decreasing(RadialDensity const& rho)
{
    if (rho.atom_mass() != 0.0)
        throw std::invalid_argument("rearrangement of a density with an atom is not supported");
    std::size_t const m = rho.cells();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rho.value(a) > rho.value(b);
    });

    std::vector<double> out(m, 0.0);
    std::size_t src = 0;                 // index into `order`
    double src_left = rho.shell_volume(order[0]);
    for (std::size_t k = 0; k < m; ++k) {
        double const capacity = rho.shell_volume(k);
        double need = capacity;
        double acc = 0;
        int chunks = 0;
        double last_value = 0;
        while (need > 0 && src < m) {
            double const take = std::min(need, src_left);
            last_value = rho.value(order[src]);
            acc += take * last_value;
            ++chunks;
            need -= take;
            src_left -= take;
            if (src_left <= 0) {
                ++src;
                if (src < m)
                    src_left = rho.shell_volume(order[src]);
            }
        }
        // a single chunk that fills the shell carries its value exactly
        out[k] = (chunks == 1 && need == 0) ? last_value : acc / capacity;
        if (k > 0 && out[k] > out[k - 1])
            out[k] = out[k - 1];  // clamp round-off inversions at block seams
    }
    return RadialDensity(rho.dim(), rho.spacing(), std::move(out), 0.0, rho.nominal_mass());
}

/// Positions of N particles in R^d plus the generator state driving them.
struct ParticleEnsemble {
    int d = 1;
    std::vector<double> positions;  // N x d, particle-major
    Rng rng;
    double time = 0;

    std::size_t count() const { return positions.size() / static_cast<std::size_t>(d); }
    double* at(std::size_t i) { return positions.data() + i * static_cast<std::size_t>(d); }
    double const* at(std::size_t i) const
    {
        return positions.data() + i * static_cast<std::size_t>(d);
    }
};

/// i.i.d. draws from a radial density: inverse CDF in radius (linear
/// interpolation of the cumulative mass) and a uniform direction.
inline ParticleEnsemble sample_particles(RadialDensity const& rho, std::size_t N,
                                         std::uint64_t seed)
{
    if (N < 2)
        throw std::invalid_argument("sample_particles: need N >= 2");
    if (!rho.is_probability())
        throw std::invalid_argument("sample_particles: density must have unit mass");
    std::size_t const m = rho.cells();
    std::vector<double> cdf(m + 1);
    cdf[0] = rho.atom_mass();
    for (std::size_t i = 0; i < m; ++i)
        cdf[i + 1] = cdf[i] + rho.shell_mass(i);
    if (!(cdf[m] > rho.atom_mass()) && rho.atom_mass() == 0.0)
        throw std::invalid_argument("sample_particles: degenerate density");

    ParticleEnsemble ens;
    ens.d = rho.dim();
    ens.rng.reseed(seed);
    ens.positions.resize(N * static_cast<std::size_t>(rho.dim()));
    std::vector<double> dir(rho.dim());
    for (std::size_t i = 0; i < N; ++i) {
        double const u = ens.rng.uniform() * cdf[m];
        double radius = 0;
        if (u >= rho.atom_mass()) {
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            std::size_t hi = std::min<std::size_t>(m, static_cast<std::size_t>(it - cdf.begin()));
            if (hi == 0)
                hi = 1;
            std::size_t const lo = hi - 1;
            double const seg = cdf[hi] - cdf[lo];
            double const frac = seg > 0 ? (u - cdf[lo]) / seg : 0.0;
            radius = (static_cast<double>(lo) + frac) * rho.spacing();
        }
        ens.rng.unit_vector(rho.dim(), dir.data());
        for (int k = 0; k < rho.dim(); ++k)
            ens.at(i)[k] = radius * dir[k];
    }
    return ens;
}

// ---------------------------------------------------------------------------
// CSV round trip: `r,value` rows at cell midpoints with a key-value sidecar
// `<path>.meta` carrying the dimension and atom mass.
// ---------------------------------------------------------------------------

inline void RadialDensity::save_csv(std::string const& path) const
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "r,value\n";
    char buf[128];
    for (std::size_t i = 0; i < values_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", midpoint(i), values_[i]);
        out << buf;
    }
    std::ofstream meta(path + ".meta");
    if (!meta)
        throw std::runtime_error("cannot write " + path + ".meta");
    std::snprintf(buf, sizeof buf, "d = %d\natom_mass = %.17g\nmass = %.17g\n", d_, atom_,
                  nominal_);
    meta << buf;
}

inline RadialDensity RadialDensity::load_csv(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::vector<double> r, v;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'r')
            continue;
        auto const comma = line.find(',');
        if (comma == std::string::npos)
            continue;
        r.push_back(std::stod(line.substr(0, comma)));
        v.push_back(std::stod(line.substr(comma + 1)));
    }
    if (r.size() < 8)
        throw std::runtime_error("density file too short: " + path);
    int d = 1;
    double atom = 0, nominal = 1;
    std::ifstream meta(path + ".meta");
    if (meta) {
        while (std::getline(meta, line)) {
            auto const eq = line.find('=');
            if (eq == std::string::npos)
                continue;
            std::string key = line.substr(0, eq);
            key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
            double const val = std::stod(line.substr(eq + 1));
            if (key == "d")
                d = static_cast<int>(val);
            else if (key == "atom_mass")
                atom = val;
            else if (key == "mass")
                nominal = val;
        }
    }
    double const h = 2.0 * r[0];
    for (std::size_t i = 0; i < r.size(); ++i)
        if (std::abs(r[i] - (i + 0.5) * h) > 1e-12 * std::max(1.0, r[i]))
            throw std::runtime_error("density grid in " + path + " is not uniform from 0");
    return RadialDensity(d, h, std::move(v), atom, nominal);
}

}  // namespace aggdiff

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aggdiff {

enum class KernelKind { PowerLaw, Logarithmic, TabulatedRadial };

/// Limit of the radial virial w'(s)*s as s -> infinity.
struct AsymptoticSlope {
    enum class Kind { Finite, Infinite, Undetermined } kind;
    double value = 0;  // meaningful for Finite

    static AsymptoticSlope finite(double v) { return {Kind::Finite, v}; }
    static AsymptoticSlope infinite() { return {Kind::Infinite, 0}; }
    static AsymptoticSlope undetermined() { return {Kind::Undetermined, 0}; }
};

/// Radial interaction potential W(x) = w(|x|).
///
/// Model cases: w(s) = s^beta / beta (beta != 0) and w(s) = log s.  A
/// tabulated variant carries a radial profile with its derivative, computed
/// at load time by fourth-order finite differences.
class KernelSpec {
  public:
    static KernelSpec power_law(double beta)
    {
        if (beta == 0.0)
            throw std::invalid_argument("power-law exponent must be nonzero; use logarithmic()");
        KernelSpec k;
        k.kind_ = KernelKind::PowerLaw;
        k.beta_ = beta;
        return k;
    }

    static KernelSpec logarithmic()
    {
        KernelSpec k;
        k.kind_ = KernelKind::Logarithmic;
        return k;
    }

    /// Tabulated profile on a strictly increasing radial grid starting at 0.
    static KernelSpec tabulated(std::vector<double> radii, std::vector<double> values)
    {
        if (radii.size() != values.size() || radii.size() < 8)
            throw std::invalid_argument("tabulated kernel needs >= 8 (r, w) samples");
        if (radii.front() != 0.0)
            throw std::invalid_argument("tabulated kernel grid must start at r = 0");
        for (std::size_t i = 1; i < radii.size(); ++i)
            if (!(radii[i] > radii[i - 1]))
                throw std::invalid_argument("tabulated kernel grid must be strictly increasing");
        KernelSpec k;
        k.kind_ = KernelKind::TabulatedRadial;
        k.tab_r_ = std::move(radii);
        k.tab_w_ = std::move(values);
        k.tab_dw_ = derivative_table(k.tab_r_, k.tab_w_);
        return k;
    }

    /// Loads a two-column CSV `r,w` (header optional).
    static KernelSpec load_tabulated(std::string const& path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::invalid_argument("cannot open kernel file: " + path);
        std::vector<double> r, w;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#')
                continue;
            auto const comma = line.find(',');
            if (comma == std::string::npos)
                continue;
            try {
                r.push_back(std::stod(line.substr(0, comma)));
                w.push_back(std::stod(line.substr(comma + 1)));
            } catch (std::exception const&) {
                continue;  // header row
            }
        }
        return tabulated(std::move(r), std::move(w));
    }

    KernelKind kind() const { return kind_; }
    double beta() const { return beta_; }
    double r_max() const
    {
        return kind_ == KernelKind::TabulatedRadial ? tab_r_.back()
                                                    : std::numeric_limits<double>::infinity();
    }

    /// w(s).  Extended arithmetic at s = 0: -infinity for beta < 0 and for
    /// the logarithmic kernel, 0 for beta > 0.
    double value(double s) const
    {
        if (s < 0)
            throw std::invalid_argument("kernel_value: radius must be nonnegative");
        switch (kind_) {
            case KernelKind::PowerLaw:
                if (s == 0)
                    return beta_ > 0 ? 0.0 : -std::numeric_limits<double>::infinity();
                return std::pow(s, beta_) / beta_;
            case KernelKind::Logarithmic:
                if (s == 0)
                    return -std::numeric_limits<double>::infinity();
                return std::log(s);
            case KernelKind::TabulatedRadial:
                return interpolate(tab_w_, s);
        }
        return 0;
    }

    /// Radial virial w'(s)*s, equal to grad W(x) . x along |x| = s.
    double virial(double s) const
    {
        if (!(s > 0))
            throw std::invalid_argument("radial_virial: radius must be positive");
        switch (kind_) {
            case KernelKind::PowerLaw:
                return std::pow(s, beta_);
            case KernelKind::Logarithmic:
                return 1.0;
            case KernelKind::TabulatedRadial:
                return interpolate(tab_dw_, s) * s;
        }
        return 0;
    }

    bool singular_at_origin() const
    {
        return kind_ == KernelKind::Logarithmic ||
               (kind_ == KernelKind::PowerLaw && beta_ < 0);
    }

    /// Kernel profile is non-smooth at distance 0 (quadratures refine there).
    bool rough_at_origin() const
    {
        return kind_ == KernelKind::Logarithmic ||
               (kind_ == KernelKind::PowerLaw && beta_ < 1.0);
    }

    /// L = lim_{s->inf} w'(s)*s.  Tabulated profiles are extrapolated from
    /// the last decade of their grid (Richardson in 1/s) and flagged
    /// undetermined when the extrapolation does not settle to 1e-3 relative.
    AsymptoticSlope asymptotic_slope() const
    {
        switch (kind_) {
            case KernelKind::PowerLaw:
                if (beta_ > 0)
                    return AsymptoticSlope::infinite();
                return AsymptoticSlope::finite(0.0);
            case KernelKind::Logarithmic:
                return AsymptoticSlope::finite(1.0);
            case KernelKind::TabulatedRadial:
                break;
        }
        double const top = tab_r_.back();
        int const npts = 5;
        std::vector<double> x(npts), g(npts);
        for (int k = 0; k < npts; ++k) {
            double const s = top * std::pow(10.0, -k / double(npts - 1));  // last decade
            x[k] = 1.0 / s;
            g[k] = virial(s);
        }
        // Neville extrapolation to x = 0
        std::vector<double> tab = g;
        double prev = tab[0];
        double spread = 0;
        for (int level = 1; level < npts; ++level) {
            for (int i = 0; i < npts - level; ++i)
                tab[i] = tab[i + 1] + (tab[i + 1] - tab[i]) * x[i + level] / (x[i] - x[i + level]);
            spread = std::abs(tab[0] - prev);
            prev = tab[0];
        }
        double const limit = tab[0];
        double const scale = std::max(std::abs(limit), 1e-12);
        if (!(spread <= 1e-3 * scale))
            return AsymptoticSlope::undetermined();
        return AsymptoticSlope::finite(limit);
    }

    /// min / max of w over [0, s_hi]; used by flatness bounds and the
    /// numeric regime tests.  Power and log profiles are monotone.
    std::pair<double, double> range_on(double s_hi) const
    {
        switch (kind_) {
            case KernelKind::PowerLaw: {
                double const at_hi = value(s_hi);
                double const at_lo = value(0.0);
                return {std::min(at_lo, at_hi), std::max(at_lo, at_hi)};
            }
            case KernelKind::Logarithmic:
                return {-std::numeric_limits<double>::infinity(), value(s_hi)};
            case KernelKind::TabulatedRadial: {
                if (s_hi > tab_r_.back())
                    throw std::domain_error("tabulated kernel queried beyond its domain cap");
                double lo = tab_w_[0], hi = tab_w_[0];
                for (std::size_t i = 1; i < tab_r_.size() && tab_r_[i - 1] <= s_hi; ++i) {
                    double const v = tab_r_[i] <= s_hi ? tab_w_[i] : value(s_hi);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                return {lo, hi};
            }
        }
        return {0, 0};
    }

    /// max / min of the virial over (0, s_hi]; exact endpoint for the
    /// monotone model profiles, grid scan for tabulated ones.  Values beyond
    /// the tabulated cap fall back to the extrapolated slope.
    double virial_sup_on(double s_hi) const
    {
        switch (kind_) {
            case KernelKind::PowerLaw:
                return beta_ >= 0 ? std::pow(s_hi, beta_)
                                  : std::numeric_limits<double>::infinity();
            case KernelKind::Logarithmic:
                return 1.0;
            case KernelKind::TabulatedRadial:
                break;
        }
        double sup = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < tab_r_.size(); ++i) {
            if (tab_r_[i] > s_hi)
                break;
            sup = std::max(sup, tab_dw_[i] * tab_r_[i]);
        }
        if (s_hi > tab_r_.back()) {
            auto const slope = asymptotic_slope();
            if (slope.kind == AsymptoticSlope::Kind::Finite)
                sup = std::max(sup, slope.value);
            else if (slope.kind == AsymptoticSlope::Kind::Infinite)
                sup = std::numeric_limits<double>::infinity();
        } else if (s_hi >= tab_r_.front()) {
            sup = std::max(sup, virial(std::max(s_hi, tab_r_[1])));
        }
        return sup;
    }

    double virial_inf_on(double s_hi) const
    {
        switch (kind_) {
            case KernelKind::PowerLaw:
                return beta_ <= 0 ? std::pow(s_hi, beta_) : 0.0;
            case KernelKind::Logarithmic:
                return 1.0;
            case KernelKind::TabulatedRadial:
                break;
        }
        // w'(s)s -> 0 as s -> 0 for a differentiable tabulated profile
        double inf = tab_dw_[0] * tab_r_[0];
        for (std::size_t i = 1; i < tab_r_.size(); ++i) {
            if (tab_r_[i] > s_hi)
                break;
            inf = std::min(inf, tab_dw_[i] * tab_r_[i]);
        }
        if (s_hi > tab_r_.back()) {
            auto const slope = asymptotic_slope();
            if (slope.kind == AsymptoticSlope::Kind::Finite)
                inf = std::min(inf, slope.value);
        }
        return inf;
    }

    std::vector<double> const& grid() const { return tab_r_; }

  private:
    KernelSpec() = default;

    double interpolate(std::vector<double> const& col, double s) const
    {
        if (s > tab_r_.back() * (1.0 + 1e-12))
            throw std::domain_error("tabulated kernel queried beyond its domain cap");
        s = std::min(s, tab_r_.back());
        auto it = std::upper_bound(tab_r_.begin(), tab_r_.end(), s);
        std::size_t hi = std::min<std::size_t>(tab_r_.size() - 1,
                                               static_cast<std::size_t>(it - tab_r_.begin()));
        if (hi == 0)
            hi = 1;
        std::size_t const lo = hi - 1;
        double const t = (s - tab_r_[lo]) / (tab_r_[hi] - tab_r_[lo]);
        return col[lo] + t * (col[hi] - col[lo]);
    }

    /// Fourth-order finite differences on a possibly nonuniform grid:
    /// derivative of the local 5-point Lagrange interpolant.
    static std::vector<double> derivative_table(std::vector<double> const& r,
                                                std::vector<double> const& w)
    {
        std::size_t const n = r.size();
        std::vector<double> dw(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t lo = i >= 2 ? i - 2 : 0;
            if (lo + 5 > n)
                lo = n - 5;
            double deriv = 0;
            for (std::size_t j = lo; j < lo + 5; ++j) {
                // derivative of the j-th Lagrange basis at r[i]
                double basis_deriv = 0;
                for (std::size_t k = lo; k < lo + 5; ++k) {
                    if (k == j)
                        continue;
                    double term = 1.0 / (r[j] - r[k]);
                    for (std::size_t l = lo; l < lo + 5; ++l) {
                        if (l == j || l == k)
                            continue;
                        term *= (r[i] - r[l]) / (r[j] - r[l]);
                    }
                    basis_deriv += term;
                }
                deriv += w[j] * basis_deriv;
            }
            dw[i] = deriv;
        }
        return dw;
    }

    KernelKind kind_ = KernelKind::PowerLaw;
    double beta_ = 2.0;
    std::vector<double> tab_r_, tab_w_, tab_dw_;
};

}  // namespace aggdiff

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace aggdiff {

enum class EntropyKind { Power, Linear };

/// Internal-energy density U with its pressure P(r) = r U'(r) - U(r) and the
/// scaling functions u(r) = r^d U(r^{-d}) and v(r) = -r u'(r).
///
/// Power: U(r) = r^m / (m - 1), m > 0, m != 1.  Linear: U(r) = r log r.
class EntropySpec {
  public:
    static EntropySpec power(double m)
    {
        if (!(m > 0) || m == 1.0)
            throw std::invalid_argument("power entropy requires m > 0, m != 1 (m = 1 is linear)");
        EntropySpec e;
        e.kind_ = EntropyKind::Power;
        e.m_ = m;
        return e;
    }

    static EntropySpec linear()
    {
        EntropySpec e;
        e.kind_ = EntropyKind::Linear;
        e.m_ = 1.0;
        return e;
    }

    EntropyKind kind() const { return kind_; }
    double m() const { return m_; }

    double U(double r) const
    {
        if (r < 0)
            throw std::invalid_argument("entropy density evaluated at negative argument");
        if (r == 0)
            return 0.0;
        if (kind_ == EntropyKind::Power)
            return std::pow(r, m_) / (m_ - 1.0);
        return r * std::log(r);
    }

    double dU(double r) const
    {
        if (!(r > 0))
            throw std::invalid_argument("U' evaluated at nonpositive argument");
        if (kind_ == EntropyKind::Power)
            return m_ / (m_ - 1.0) * std::pow(r, m_ - 1.0);
        return std::log(r) + 1.0;
    }

    /// Pressure P(r) = r U'(r) - U(r): r^m for power, r for linear.
    double P(double r) const
    {
        if (r < 0)
            throw std::invalid_argument("pressure evaluated at negative argument");
        if (r == 0)
            return 0.0;
        if (kind_ == EntropyKind::Power)
            return std::pow(r, m_);
        return r;
    }

    /// Scaling function u(r) = r^d U(r^{-d}): the entropy of the normalized
    /// ball family as a function of its radius (up to the volume factor).
    double mccann_u(int d, double r) const
    {
        if (!(r > 0))
            throw std::invalid_argument("mccann_u: radius must be positive");
        if (kind_ == EntropyKind::Power)
            return std::pow(r, (1.0 - m_) * d) / (m_ - 1.0);
        return -d * std::log(r);
    }

    /// Scaling function v(r) = -r u'(r): d r^{(1-m)d} for power, d for linear.
    double scaling_v(int d, double r) const
    {
        if (!(r > 0))
            throw std::invalid_argument("scaling_v: radius must be positive");
        if (kind_ == EntropyKind::Power)
            return d * std::pow(r, (1.0 - m_) * d);
        return static_cast<double>(d);
    }

    /// Recession constant limsup_{r->inf} U(r)/r weighting the singular part:
    /// +infinity for superlinear growth (power m > 1, linear), 0 for m < 1.
    double recession() const
    {
        if (kind_ == EntropyKind::Linear || m_ > 1.0)
            return std::numeric_limits<double>::infinity();
        return 0.0;
    }

  private:
    EntropySpec() = default;
    EntropyKind kind_ = EntropyKind::Linear;
    double m_ = 1.0;
};

}  // namespace aggdiff

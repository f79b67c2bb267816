#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

namespace rklab {

enum class MajorantKind { none, geometric, power };

/// Decay descriptor m_k for a nonnegative sequence indexed by stream
/// position k = 0, 1, 2, ...:
///   geometric: m_k = scale * rate^k
///   power:     m_k = scale * (k + 1)^(-rate)
/// `tail(k)` bounds sum_{j >= k} m_j in closed form.
template <class Real>
struct Majorant {
  MajorantKind kind = MajorantKind::none;
  Real scale = 0;
  Real rate = 0;

  static Majorant none() { return {}; }
  static Majorant geometric(Real scale, Real ratio) { return {MajorantKind::geometric, scale, ratio}; }
  static Majorant power(Real scale, Real exponent) { return {MajorantKind::power, scale, exponent}; }

  bool present() const { return kind != MajorantKind::none; }

  bool summable() const {
    switch (kind) {
      case MajorantKind::geometric: return rate >= 0 && rate < 1;
      case MajorantKind::power: return rate > 1;
      case MajorantKind::none: return false;
    }
    return false;
  }

  Real term(std::size_t k) const {
    using std::pow;
    switch (kind) {
      case MajorantKind::geometric: return scale * pow(rate, static_cast<Real>(k));
      case MajorantKind::power: return scale * pow(static_cast<Real>(k + 1), -rate);
      case MajorantKind::none: break;
    }
    return std::numeric_limits<Real>::infinity();
  }

  Real tail(std::size_t k) const {
    using std::pow;
    if (!summable()) return std::numeric_limits<Real>::infinity();
    if (kind == MajorantKind::geometric) return scale * pow(rate, static_cast<Real>(k)) / (1 - rate);
    // sum_{j>=k} (j+1)^-p <= (k+1)^-p + int_{k+1}^inf x^-p dx
    const Real k1 = static_cast<Real>(k + 1);
    return scale * (pow(k1, -rate) + pow(k1, 1 - rate) / (rate - 1));
  }

  Majorant scaled(Real factor) const { return {kind, scale * factor, rate}; }

  template <class Other>
  Majorant<Other> cast() const {
    return {kind, static_cast<Other>(scale), static_cast<Other>(rate)};
  }
};

}  // namespace rklab

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "rnm/errors.hpp"
#include "rnm/sync_rng.hpp"

namespace rnm {

using ComplexSample = std::complex<double>;

/// M-PSK constellation extended with the zero symbol. Non-zero points all
/// carry |s|^2 = symbol_energy; PSK keeps the envelope constant so RF energy
/// per emitted symbol is exactly Es.
struct Constellation {
  std::uint32_t size = 0;
  double symbol_energy = 1.0;
  std::vector<ComplexSample> points;

  static Constellation psk(std::uint32_t m, double es) {
    if (m < 2) throw ConfigError("Constellation: need M >= 2");
    if (es <= 0.0) throw ConfigError("Constellation: symbol energy must be positive");
    Constellation c;
    c.size = m;
    c.symbol_energy = es;
    c.points.resize(m);
    const double amplitude = std::sqrt(es);
    for (std::uint32_t k = 0; k < m; ++k) {
      // axis-aligned points placed exactly, so BPSK is the real pair +-sqrt(Es)
      if ((4ull * k) % m == 0) {
        switch ((4ull * k) / m) {
          case 0: c.points[k] = {amplitude, 0.0}; break;
          case 1: c.points[k] = {0.0, amplitude}; break;
          case 2: c.points[k] = {-amplitude, 0.0}; break;
          default: c.points[k] = {0.0, -amplitude}; break;
        }
      } else {
        const double angle = 2.0 * std::numbers::pi * k / m;
        c.points[k] = {amplitude * std::cos(angle), amplitude * std::sin(angle)};
      }
    }
    return c;
  }

  const ComplexSample& point(std::uint32_t k) const { return points[k]; }
};

/// One-sided noise spectral density of the complex AWGN channel.
struct ChannelParams {
  double noise_density = 1.0;

  void validate() const {
    if (!(noise_density > 0.0))
      throw ConfigError("ChannelParams: noise density must be positive");
  }
};

namespace detail {
/// 53-bit fraction in [0, 1) from a generator word.
inline double unit_fraction(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}
}  // namespace detail

/// Two independent standard normal deviates via Box-Muller on successive
/// cursor words (u1 clamped away from zero before the log).
template <class Cursor>
std::pair<double, double> gaussian_pair(Cursor& cursor) {
  double u1 = detail::unit_fraction(cursor.next_word());
  const double u2 = detail::unit_fraction(cursor.next_word());
  if (u1 == 0.0) u1 = 0x1.0p-53;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// y = x + n with n circularly symmetric complex Gaussian of total variance
/// N0 (N0/2 per real component).
template <class Cursor>
ComplexSample awgn(ComplexSample x, const ChannelParams& params, Cursor& cursor) {
  params.validate();
  const auto [n_re, n_im] = gaussian_pair(cursor);
  const double scale = std::sqrt(params.noise_density / 2.0);
  return x + ComplexSample{scale * n_re, scale * n_im};
}

}  // namespace rnm

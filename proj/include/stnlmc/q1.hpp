#pragma once

#include "stnlmc/medium.hpp"

#include <array>

namespace stnlmc::q1 {

// Bilinear shape functions on a rectangle, corner c at (c & 1, c >> 1) in local coordinates.
inline double N(int c, double xi, double eta) {
  const double a = (c & 1) ? xi : 1.0 - xi;
  const double b = (c >> 1) ? eta : 1.0 - eta;
  return a * b;
}

inline std::array<double, 2> dN(int c, double xi, double eta, double hx, double hy) {
  const double a = (c & 1) ? xi : 1.0 - xi;
  const double b = (c >> 1) ? eta : 1.0 - eta;
  const double da = (c & 1) ? 1.0 : -1.0;
  const double db = (c >> 1) ? 1.0 : -1.0;
  return {da * b / hx, a * db / hy};
}

inline double gauss_xi(int q) { return kGauss01[q & 1]; }
inline double gauss_eta(int q) { return kGauss01[q >> 1]; }

using Mat4 = std::array<double, 16>;

// Element matrices with two-point Gauss quadrature per axis; weight[q] multiplies the integrand
// at Gauss point q.
inline Mat4 weighted_mass(double hx, double hy, const std::array<double, 4>& weight) {
  Mat4 m{};
  const double w = 0.25 * hx * hy;
  for (int q = 0; q < 4; ++q) {
    const double xi = gauss_xi(q), eta = gauss_eta(q);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) m[a * 4 + b] += w * weight[q] * N(a, xi, eta) * N(b, xi, eta);
  }
  return m;
}

inline Mat4 weighted_stiffness(double hx, double hy, const std::array<double, 4>& weight) {
  Mat4 m{};
  const double w = 0.25 * hx * hy;
  for (int q = 0; q < 4; ++q) {
    const double xi = gauss_xi(q), eta = gauss_eta(q);
    for (int a = 0; a < 4; ++a) {
      const auto ga = dN(a, xi, eta, hx, hy);
      for (int b = 0; b < 4; ++b) {
        const auto gb = dN(b, xi, eta, hx, hy);
        m[a * 4 + b] += w * weight[q] * (ga[0] * gb[0] + ga[1] * gb[1]);
      }
    }
  }
  return m;
}

inline std::array<double, 4> weighted_load(double hx, double hy, const std::array<double, 4>& weight) {
  std::array<double, 4> v{};
  const double w = 0.25 * hx * hy;
  for (int q = 0; q < 4; ++q)
    for (int a = 0; a < 4; ++a) v[a] += w * weight[q] * N(a, gauss_xi(q), gauss_eta(q));
  return v;
}

inline constexpr std::array<double, 4> kOnes = {1.0, 1.0, 1.0, 1.0};

}  // namespace stnlmc::q1

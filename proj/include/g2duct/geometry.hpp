#pragma once

#include <array>
#include <stdexcept>

namespace g2duct {

using Point2 = std::array<double, 2>;

/// Contracting-duct domain: inlet buffer of length b_i and half-height 1,
/// linear contraction of length L down to half-height H, outlet buffer of
/// length b_o.  Optionally the two re-entrant corners at (L, +-H) are
/// replaced by short chamfers.
struct DuctGeometry {
  double b_i = 1.0;
  double b_o = 1.0;
  double L = 1.0;
  double H = 0.5;
  double chamfer = 0.0;  // 0 disables the smoothed-corner variant

  DuctGeometry() = default;
  DuctGeometry(double bi, double bo, double len, double h, double cham = 0.0)
      : b_i(bi), b_o(bo), L(len), H(h), chamfer(cham) {
    if (!(b_i > 0.0) || !(b_o > 0.0) || !(L > 0.0))
      throw std::invalid_argument("duct geometry: buffer and contraction lengths must be positive");
    if (!(H > 0.0) || H > 1.0)
      throw std::invalid_argument("duct geometry: outlet half-height must satisfy 0 < H <= 1");
    if (chamfer < 0.0 || chamfer >= L / 2 || chamfer >= b_o / 2)
      throw std::invalid_argument("duct geometry: chamfer length out of range");
  }

  double x_inlet() const { return -b_i; }
  double x_outlet() const { return L + b_o; }

  /// Channel half-height at abscissa x.  The chamfer replaces the re-entrant
  /// corner at (L, H) by two milder corners at x = L -+ chamfer, with the
  /// wall running straight between them.
  double half_height(double x) const {
    if (chamfer > 0.0 && x > L - chamfer && x < L + chamfer) {
      const double h0 = 1.0 + (H - 1.0) / L * (L - chamfer);
      return h0 + (H - h0) * (x - (L - chamfer)) / (2.0 * chamfer);
    }
    if (x <= 0.0) return 1.0;
    if (x >= L) return H;
    return 1.0 + (H - 1.0) / L * x;
  }

  /// Area of Omega = Omega_i + Omega_e + Omega_o (straight-corner variant).
  double area() const { return 2.0 * b_i + L * (1.0 + H) + 2.0 * H * b_o; }
};

}  // namespace g2duct

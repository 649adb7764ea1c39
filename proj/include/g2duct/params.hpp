#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

namespace g2duct {

/// Fluid parameters: viscosity nu, grade-two coefficients alpha1/alpha2,
/// flow-rate scale U.  The polar pair (alpha, theta) is kept when the
/// parameters were specified that way.
struct FluidParams {
  double nu = 1.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double U = 1.0;
  std::optional<std::pair<double, double>> polar;  // (alpha, theta)

  static FluidParams cartesian(double nu, double a1, double a2, double U) {
    FluidParams p;
    p.nu = nu;
    p.alpha1 = a1;
    p.alpha2 = a2;
    p.U = U;
    if (!(nu > 0.0)) throw std::invalid_argument("fluid params: nu must be positive");
    return p;
  }

  static FluidParams from_polar(double nu, double alpha, double theta, double U) {
    FluidParams p = cartesian(nu, alpha * std::cos(theta), alpha * std::sin(theta), U);
    p.polar = {alpha, theta};
    return p;
  }

  double alpha_magnitude() const {
    return polar ? polar->first : std::hypot(alpha1, alpha2);
  }
  double alpha_argument() const {
    return polar ? polar->second : std::atan2(alpha2, alpha1);
  }
};

}  // namespace g2duct

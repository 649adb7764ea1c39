#include "g2duct/analytic.hpp"

#include <cmath>

#include "g2duct/tensors.hpp"

namespace g2duct {

BoundaryData duct_boundary_data(const DuctGeometry& geom, const FluidParams& params) {
  BoundaryData bd;
  bd.provenance = BoundaryData::Provenance::Duct;
  const double U = params.U, nu = params.nu;
  const double a1 = params.alpha1, a2 = params.alpha2;
  const double H = geom.H;

  bd.g = [U, H](FacetTag tag, const Point2& x, double* out) {
    switch (tag) {
      case FacetTag::Inlet:
        out[0] = U * (1.0 - x[1] * x[1]);
        out[1] = 0.0;
        break;
      case FacetTag::Outlet:
        out[0] = U / H * (1.0 - (x[1] / H) * (x[1] / H));
        out[1] = 0.0;
        break;
      default:
        out[0] = out[1] = 0.0;
    }
  };

  const double cw = 4.0 * U * U / nu * (3.0 * a1 + 2.0 * a2);
  const bool inflow_at_outlet = a1 < 0.0;
  const double H6 = std::pow(H, 6);
  bd.w_b = [cw, inflow_at_outlet, H6](const Point2& x, double* out) {
    out[0] = 0.0;
    out[1] = inflow_at_outlet ? cw * x[1] / H6 : cw * x[1];
  };
  bd.w0 = bd.w_b;

  const double H3 = H * H * H;
  bd.z_b = [U, inflow_at_outlet, H3](const Point2& x) {
    return inflow_at_outlet ? 2.0 * U * x[1] / H3 : 2.0 * U * x[1];
  };
  return bd;
}

// ---------------------------------------------------------------------------
// Appendix B.1 channel

ChannelValues channel_oracle(const FluidParams& params, double L, const Point2& x,
                             bool couette) {
  const double U = params.U, nu = params.nu;
  const double a1 = params.alpha1, a2 = params.alpha2;
  ChannelValues v{};
  if (couette) {
    v.u = {U * x[1], 0.0};
    v.w = {0.0, 0.0};
    v.p = 0.0;
    v.pi = 0.0;
    return v;
  }
  v.u = {U * x[1] * (L - x[1]), 0.0};
  v.w = {0.0, -(2.0 * U * U / nu) * (L - 2.0 * x[1]) * (2.0 * a2 + 3.0 * a1)};
  const double lm = L - 2.0 * x[1];
  v.p = -2.0 * U * nu * x[0] + (2.0 * a1 + a2) * U * U * lm * lm;
  // pi from p = nu pi + alpha1 u . grad pi with the ansatz pi = -2U x1 + h(x2)
  v.pi = -2.0 * U * x[0] +
         ((2.0 * a1 + a2) * U * U * lm * lm + 2.0 * a1 * U * U * x[1] * (L - x[1])) / nu;
  return v;
}

std::array<double, 2> channel_transformed_residual(const FluidParams& params, double L,
                                                   const Point2& x) {
  const double U = params.U, nu = params.nu;
  const double a1 = params.alpha1, a2 = params.alpha2;
  ChannelValues v = channel_oracle(params, L, x);

  std::array<std::array<double, 2>, 2> grad_u{};
  grad_u[0][1] = U * (L - 2.0 * x[1]);
  std::array<std::array<std::array<double, 2>, 2>, 2> hess_u{};
  hess_u[0][1][1] = -2.0 * U;
  std::array<double, 2> grad_pi = {
      -2.0 * U,
      ((2.0 * a1 + a2) * U * U * 2.0 * (L - 2.0 * x[1]) * (-2.0) +
       2.0 * a1 * U * U * (L - 2.0 * x[1])) / nu};

  auto divN = divergence_of_N<2>(v.u, grad_u, hess_u, grad_pi, a1, a2);

  // u . grad w: w depends on x2 only and u2 = 0, so the convective term drops
  std::array<double, 2> res = {nu * v.w[0] - divN[0], nu * v.w[1] - divN[1]};
  return res;
}

// ---------------------------------------------------------------------------
// Appendix B.2 pipe

PipeValues pipe_oracle(const FluidParams& params, const std::array<double, 3>& x) {
  const double U = params.U, nu = params.nu;
  const double a1 = params.alpha1, a2 = params.alpha2;
  const double r2 = x[0] * x[0] + x[1] * x[1];
  PipeValues v{};
  v.u = {0.0, 0.0, U * (1.0 - r2)};
  const double cw = U * U * (16.0 * a1 + 12.0 * a2) / nu;
  v.w = {cw * x[0], cw * x[1], 0.0};
  v.pi = -4.0 * U * x[2] + (U * U * ((8.0 * a1 + 6.0 * a2) * r2 + 4.0 * a1)) / nu;
  v.p = -4.0 * nu * U * x[2] + 6.0 * U * U * (2.0 * a1 + a2) * r2;
  const double cd = U * U * (16.0 * a1 + 12.0 * a2);
  v.divN = {cd * x[0], cd * x[1], 0.0};
  return v;
}

std::array<double, 3> pipe_divN_generic(const FluidParams& params, const std::array<double, 3>& x) {
  const double U = params.U, nu = params.nu;
  const double a1 = params.alpha1, a2 = params.alpha2;
  std::array<double, 3> u = {0.0, 0.0, U * (1.0 - x[0] * x[0] - x[1] * x[1])};
  std::array<std::array<double, 3>, 3> grad_u{};
  grad_u[2][0] = -2.0 * U * x[0];
  grad_u[2][1] = -2.0 * U * x[1];
  std::array<std::array<std::array<double, 3>, 3>, 3> hess_u{};
  hess_u[2][0][0] = -2.0 * U;
  hess_u[2][1][1] = -2.0 * U;
  std::array<double, 3> grad_pi = {U * U * (8.0 * a1 + 6.0 * a2) * 2.0 * x[0] / nu,
                                   U * U * (8.0 * a1 + 6.0 * a2) * 2.0 * x[1] / nu, -4.0 * U};
  return divergence_of_N<3>(u, grad_u, hess_u, grad_pi, a1, a2);
}

}  // namespace g2duct

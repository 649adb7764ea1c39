#pragma once

#include <array>
#include <functional>

#include "g2duct/geometry.hpp"
#include "g2duct/mesh.hpp"
#include "g2duct/params.hpp"

namespace g2duct {

/// Boundary data bundle: velocity trace g per facet tag, transport inflow
/// trace w_b, scalar inflow trace z_b for the simplified solver, and a
/// domain-wide extension used as the initial transport iterate.
struct BoundaryData {
  enum class Provenance { Duct, Channel, Pipe, Custom };
  Provenance provenance = Provenance::Custom;

  std::function<void(FacetTag, const Point2&, double*)> g;
  std::function<void(const Point2&, double*)> w_b;
  std::function<double(const Point2&)> z_b;
  std::function<void(const Point2&, double*)> w0;
};

/// Inlet/outlet Poiseuille traces scaled by U, zero on walls, with the
/// matching inflow data for w.  For alpha1 < 0 the inflow side is the
/// outlet; its w_b uses the same channel identity applied to the outlet
/// parabola (mirroring the inlet derivation).
BoundaryData duct_boundary_data(const DuctGeometry& geom, const FluidParams& params);

struct ChannelValues {
  std::array<double, 2> u;
  std::array<double, 2> w;
  double p;
  double pi;
};

/// Closed-form Poiseuille channel solution on 0 < x2 < 1 with profile
/// U x2 (L - x2); set couette=true for the shear-flow variant (w = 0).
ChannelValues channel_oracle(const FluidParams& params, double L, const Point2& x,
                             bool couette = false);

/// Residual of the transformed system (nu I + alpha1 u.grad) w - div N(u,pi)
/// for the channel closed forms, evaluated through the generic tensor
/// routine.  Zero up to rounding.
std::array<double, 2> channel_transformed_residual(const FluidParams& params, double L,
                                                   const Point2& x);

struct PipeValues {
  std::array<double, 3> u;
  std::array<double, 3> w;
  double pi;
  double p;
  std::array<double, 3> divN;
};

/// Closed-form Poiseuille pipe solution on x1^2 + x2^2 <= 1.
PipeValues pipe_oracle(const FluidParams& params, const std::array<double, 3>& x);

/// div N for the pipe fields evaluated through the generic tensor routine
/// (cross-checks the closed form).
std::array<double, 3> pipe_divN_generic(const FluidParams& params, const std::array<double, 3>& x);

}  // namespace g2duct

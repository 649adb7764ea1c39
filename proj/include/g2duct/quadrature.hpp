#pragma once

#include <vector>

#include "g2duct/geometry.hpp"

namespace g2duct {

struct QuadRule {
  std::vector<Point2> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

/// Rule on the reference triangle {x,y >= 0, x+y <= 1}, exact for total
/// degree <= order.  Order 1 is the one-point centroid rule; higher orders
/// use a conical product of Gauss-Legendre rules.  Weights sum to 1/2.
const QuadRule& triangle_rule(int order);

/// Gauss-Legendre points/weights on [0,1], exact for degree <= order.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};
const EdgeRule& edge_rule(int order);

/// Gauss-Legendre nodes/weights on [0,1] with npts points.
void gauss_legendre_unit(int npts, std::vector<double>& x, std::vector<double>& w);

}  // namespace g2duct

#pragma once

#include <array>
#include <vector>

#include "g2duct/geometry.hpp"

namespace g2duct {

/// Nodal Lagrange basis of degree k on the reference triangle with vertices
/// (0,0), (1,0), (0,1).  Node layout: the 3 vertices, then k-1 nodes per
/// edge in local edge direction (v0->v1, v1->v2, v2->v0), then interior
/// lattice nodes.  Degrees 1..4 are supported.
class LagrangeBasis {
 public:
  explicit LagrangeBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Point2>& nodes() const { return nodes_; }

  int num_vertex_nodes() const { return 3; }
  int nodes_per_edge() const { return degree_ - 1; }
  int num_interior_nodes() const { return size() - 3 - 3 * (degree_ - 1); }

  /// values[i] = phi_i(p)
  void eval(const Point2& p, std::vector<double>& values) const;
  /// grads[i] = (dphi_i/dx, dphi_i/dy)(p)
  void eval_grad(const Point2& p, std::vector<Point2>& grads) const;
  /// hess[i] = (dxx, dxy, dyy)(p)
  void eval_hess(const Point2& p, std::vector<std::array<double, 3>>& hess) const;

  static const LagrangeBasis& get(int degree);

 private:
  int degree_;
  std::vector<Point2> nodes_;
  std::vector<std::array<int, 2>> monomials_;      // exponent pairs (a, b)
  std::vector<std::vector<double>> coeff_;         // coeff_[i][m]: phi_i in monomial basis
};

}  // namespace g2duct

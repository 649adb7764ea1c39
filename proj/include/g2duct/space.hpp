#pragma once

#include <functional>
#include <map>
#include <vector>

#include "g2duct/basis.hpp"
#include "g2duct/mesh.hpp"

namespace g2duct {

/// Continuous Lagrange space of given degree with ncomp interleaved
/// components.  Scalar nodes are numbered vertices first, then edge nodes
/// (k-1 per edge, low-vertex to high-vertex), then cell-interior nodes;
/// dof = node * ncomp + comp.
class FunctionSpace {
 public:
  FunctionSpace(const Mesh& mesh, int degree, int ncomp);

  static FunctionSpace velocity(const Mesh& mesh, int k) { return {mesh, k, 2}; }
  static FunctionSpace pressure(const Mesh& mesh, int k) { return {mesh, k - 1, 1}; }
  static FunctionSpace transport(const Mesh& mesh, int k) { return {mesh, k, 2}; }
  static FunctionSpace scalar(const Mesh& mesh, int k) { return {mesh, k, 1}; }

  const Mesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  int components() const { return ncomp_; }
  int num_nodes() const { return num_nodes_; }
  int num_dofs() const { return num_nodes_ * ncomp_; }
  int nodes_per_cell() const { return basis().size(); }
  const LagrangeBasis& basis() const { return LagrangeBasis::get(degree_); }

  int cell_node(int cell, int local) const { return cell_nodes_[cell * nodes_per_cell() + local]; }
  const Point2& node_position(int node) const { return node_pos_[node]; }

  int dof(int node, int comp) const { return node * ncomp_ + comp; }

  /// Sorted node lists per boundary tag, plus the union over all tags.
  const std::vector<int>& boundary_nodes(FacetTag tag) const;
  const std::vector<int>& all_boundary_nodes() const { return all_boundary_nodes_; }
  /// Nodes on boundary facet f (aligned with mesh().boundary_facets).
  const std::vector<int>& facet_nodes(int f) const { return facet_nodes_[f]; }

  bool same_layout(const FunctionSpace& other) const {
    return mesh_ == other.mesh_ && degree_ == other.degree_ && ncomp_ == other.ncomp_;
  }

 private:
  const Mesh* mesh_;
  int degree_, ncomp_;
  int num_nodes_ = 0;
  std::vector<int> cell_nodes_;
  std::vector<Point2> node_pos_;
  std::map<FacetTag, std::vector<int>> boundary_nodes_;
  std::vector<int> all_boundary_nodes_;
  std::vector<std::vector<int>> facet_nodes_;
  std::vector<int> empty_;
};

/// Coefficient vector over a FunctionSpace.
struct Field {
  const FunctionSpace* space = nullptr;
  std::vector<double> coeffs;

  Field() = default;
  explicit Field(const FunctionSpace& s) : space(&s), coeffs(s.num_dofs(), 0.0) {}

  double& operator[](int i) { return coeffs[i]; }
  double operator[](int i) const { return coeffs[i]; }
  int size() const { return static_cast<int>(coeffs.size()); }
};

/// Nodal interpolant of f (receives node position, returns ncomp values).
Field interpolate(const FunctionSpace& space,
                  const std::function<void(const Point2&, double*)>& f);

}  // namespace g2duct

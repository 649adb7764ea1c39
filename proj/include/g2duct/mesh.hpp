#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "g2duct/geometry.hpp"

namespace g2duct {

enum class FacetTag : std::uint8_t { Inlet, Outlet, WallBuffer, WallContraction };

const char* facet_tag_name(FacetTag t);
FacetTag facet_tag_from_name(const std::string& s);

enum class SplitKind : std::uint8_t { RightTriangle, CrossedTriangle };

/// Conforming triangulation with tagged boundary facets and refinement
/// provenance counters.  Meshes are immutable once built; refinement
/// operations return new meshes.
class Mesh {
 public:
  struct BoundaryFacet {
    int v0, v1;      // endpoints, in owner-cell orientation (outward normal = rot(-90) of v1-v0)
    int cell;        // owning cell
    FacetTag tag;
  };

  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> cells;  // CCW vertex triples
  std::vector<BoundaryFacet> boundary_facets;

  int r_u = 0, r_b = 0, r_p = 0;
  SplitKind split_kind = SplitKind::CrossedTriangle;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }

  double cell_area(int c) const;
  double cell_diameter(int c) const;
  double total_area() const;
  double max_cell_diameter() const;

  /// Edge table shared by dof layout, refinement and conformity checks.
  /// edges[e] = (vmin, vmax); edge_cells[e] holds 1 or 2 incident cells.
  struct Topology {
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 2>> edge_cells;     // -1 when absent
    std::vector<std::array<int, 3>> cell_edges;     // per cell, edge opposite local vertex i
    std::map<std::pair<int, int>, int> edge_index;  // (vmin,vmax) -> edge
  };
  const Topology& topology() const;

  /// Throws std::runtime_error on any conformity violation: an interior
  /// edge not shared by exactly two cells, a non-positive cell area, or a
  /// boundary edge without exactly one tagged facet.
  void check_conforming() const;

 private:
  mutable Topology topo_;
  mutable bool topo_built_ = false;
  friend struct MeshBuilder;
};

/// Structured rectangle [x0,x1] x [y0,y1] with nx-by-ny quads, split into
/// triangles.  Boundary tags: x=x0 inlet, x=x1 outlet, y=y0/y1 wall_buffer.
Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1, int nx, int ny,
                          SplitKind split);

/// Base duct mesh: three structured quad blocks (inlet buffer, contraction,
/// outlet buffer) with n columns per unit length and 2n cells across the
/// height, vertical grading matched at the block interfaces, then split.
Mesh build_base_mesh(const DuctGeometry& geom, int n, SplitKind split);

/// Red refinement of every cell (4 similar children); conformity is automatic.
Mesh refine_uniform(const Mesh& mesh);

/// Red refinement of the cells sharing an edge with the boundary whose
/// vertices all lie within 0.65 of (0.4, +-0.5), with green closure.
Mesh refine_boundary(const Mesh& mesh, const DuctGeometry& geom);

/// Red refinement of the cells whose closure contains a contraction
/// endpoint (0,+-1) or (L,+-H), with green closure.
Mesh refine_points(const Mesh& mesh, const DuctGeometry& geom);

/// Generic entry point: red-refine the marked cells with green closure.
Mesh refine_marked(const Mesh& mesh, const std::vector<char>& marked);

void write_mesh(const Mesh& mesh, std::ostream& os);
void write_mesh_file(const Mesh& mesh, const std::string& path);
Mesh read_mesh(std::istream& is);
Mesh read_mesh_file(const std::string& path);

}  // namespace g2duct

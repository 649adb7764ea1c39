#include "g2duct/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace g2duct {

const char* facet_tag_name(FacetTag t) {
  switch (t) {
    case FacetTag::Inlet: return "inlet";
    case FacetTag::Outlet: return "outlet";
    case FacetTag::WallBuffer: return "wall_buffer";
    case FacetTag::WallContraction: return "wall_contraction";
  }
  return "?";
}

FacetTag facet_tag_from_name(const std::string& s) {
  if (s == "inlet") return FacetTag::Inlet;
  if (s == "outlet") return FacetTag::Outlet;
  if (s == "wall_buffer") return FacetTag::WallBuffer;
  if (s == "wall_contraction") return FacetTag::WallContraction;
  throw std::runtime_error("unknown facet tag '" + s + "'");
}

namespace {

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

double dist(const Point2& a, const Point2& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

std::pair<int, int> ekey(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

/// Rotate the vertex triple (keeping orientation) so that the longest edge
/// comes first; ties broken by smaller vertex-index pair.
std::array<int, 3> longest_edge_first(const std::array<int, 3>& c,
                                      const std::vector<Point2>& verts) {
  std::array<std::array<int, 3>, 3> rots = {{{c[0], c[1], c[2]},
                                             {c[1], c[2], c[0]},
                                             {c[2], c[0], c[1]}}};
  int best = 0;
  double best_len = -1.0;
  for (int r = 0; r < 3; ++r) {
    double len = dist(verts[rots[r][0]], verts[rots[r][1]]);
    auto kb = ekey(rots[r][0], rots[r][1]);
    auto kc = ekey(rots[best][0], rots[best][1]);
    if (len > best_len + 1e-14 || (std::abs(len - best_len) <= 1e-14 && kb < kc)) {
      best = r;
      best_len = std::max(best_len, len);
    }
  }
  return rots[best];
}

}  // namespace

double Mesh::cell_area(int c) const {
  const auto& t = cells[c];
  return signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
}

double Mesh::cell_diameter(int c) const {
  const auto& t = cells[c];
  return std::max({dist(vertices[t[0]], vertices[t[1]]), dist(vertices[t[1]], vertices[t[2]]),
                   dist(vertices[t[2]], vertices[t[0]])});
}

double Mesh::total_area() const {
  double s = 0.0;
  for (int c = 0; c < num_cells(); ++c) s += cell_area(c);
  return s;
}

double Mesh::max_cell_diameter() const {
  double d = 0.0;
  for (int c = 0; c < num_cells(); ++c) d = std::max(d, cell_diameter(c));
  return d;
}

const Mesh::Topology& Mesh::topology() const {
  if (topo_built_) return topo_;
  topo_ = Topology{};
  for (int c = 0; c < num_cells(); ++c) {
    const auto& t = cells[c];
    for (int e = 0; e < 3; ++e) {
      // edge e is opposite local vertex e
      int a = t[(e + 1) % 3], b = t[(e + 2) % 3];
      auto key = ekey(a, b);
      auto it = topo_.edge_index.find(key);
      int idx;
      if (it == topo_.edge_index.end()) {
        idx = static_cast<int>(topo_.edges.size());
        topo_.edge_index.emplace(key, idx);
        topo_.edges.push_back({key.first, key.second});
        topo_.edge_cells.push_back({c, -1});
      } else {
        idx = it->second;
        if (topo_.edge_cells[idx][1] != -1)
          throw std::runtime_error("mesh: edge shared by more than two cells");
        topo_.edge_cells[idx][1] = c;
      }
      if (static_cast<int>(topo_.cell_edges.size()) <= c) topo_.cell_edges.resize(c + 1);
      topo_.cell_edges[c][e] = idx;
    }
  }
  topo_built_ = true;
  return topo_;
}

void Mesh::check_conforming() const {
  for (int c = 0; c < num_cells(); ++c)
    if (!(cell_area(c) > 0.0))
      throw std::runtime_error("mesh: cell " + std::to_string(c) + " has non-positive area");

  const auto& topo = topology();
  std::set<std::pair<int, int>> tagged;
  for (const auto& f : boundary_facets) {
    if (!tagged.insert(ekey(f.v0, f.v1)).second)
      throw std::runtime_error("mesh: boundary edge tagged more than once");
  }
  for (size_t e = 0; e < topo.edges.size(); ++e) {
    bool is_boundary = topo.edge_cells[e][1] == -1;
    bool is_tagged = tagged.count(ekey(topo.edges[e][0], topo.edges[e][1])) > 0;
    if (is_boundary != is_tagged)
      throw std::runtime_error("mesh: boundary facet tags do not partition the boundary");
  }
  if (tagged.size() != boundary_facets.size())
    throw std::runtime_error("mesh: duplicate boundary facets");
}

// ---------------------------------------------------------------------------
// construction

namespace {

struct QuadGrid {
  std::vector<Point2> verts;
  std::vector<std::array<int, 4>> quads;  // CCW corner indices
};

/// Columns of vertices at given x positions, n_y cells across [-h(x), h(x)].
QuadGrid duct_grid(const std::vector<double>& xs, int n_y,
                   const std::function<double(double)>& half_height) {
  QuadGrid g;
  const int rows = n_y + 1;
  for (double x : xs) {
    double h = half_height(x);
    for (int k = 0; k < rows; ++k) {
      double y = -h + 2.0 * h * k / n_y;
      g.verts.push_back({x, y});
    }
  }
  for (int j = 0; j + 1 < static_cast<int>(xs.size()); ++j) {
    for (int k = 0; k < n_y; ++k) {
      int a = j * rows + k;
      int b = (j + 1) * rows + k;
      g.quads.push_back({a, b, b + 1, a + 1});
    }
  }
  return g;
}

Mesh triangulate(QuadGrid&& g, SplitKind split) {
  Mesh mesh;
  mesh.vertices = std::move(g.verts);
  mesh.split_kind = split;
  for (const auto& q : g.quads) {
    if (split == SplitKind::CrossedTriangle) {
      Point2 c = {0.0, 0.0};
      for (int i = 0; i < 4; ++i) {
        c[0] += 0.25 * mesh.vertices[q[i]][0];
        c[1] += 0.25 * mesh.vertices[q[i]][1];
      }
      int cv = mesh.num_vertices();
      mesh.vertices.push_back(c);
      for (int i = 0; i < 4; ++i) mesh.cells.push_back({q[i], q[(i + 1) % 4], cv});
    } else {
      mesh.cells.push_back({q[0], q[1], q[2]});
      mesh.cells.push_back({q[0], q[2], q[3]});
    }
  }
  for (auto& c : mesh.cells) c = longest_edge_first(c, mesh.vertices);
  return mesh;
}

/// Tag boundary edges of a freshly triangulated duct/rectangle and record
/// cell ownership with outward orientation.
void tag_boundary(Mesh& mesh, double x_in, double x_out, double contraction_x0,
                  double contraction_x1, const std::function<double(double)>& half_height) {
  const auto& topo = mesh.topology();
  const double tol = 1e-10;
  mesh.boundary_facets.clear();
  for (size_t e = 0; e < topo.edges.size(); ++e) {
    if (topo.edge_cells[e][1] != -1) continue;
    int cell = topo.edge_cells[e][0];
    const auto& t = mesh.cells[cell];
    // recover the cell-ordered direction of this edge
    int a = -1, b = -1;
    for (int i = 0; i < 3; ++i) {
      int u = t[i], v = t[(i + 1) % 3];
      if (ekey(u, v) == ekey(topo.edges[e][0], topo.edges[e][1])) {
        a = u;
        b = v;
      }
    }
    const Point2& pa = mesh.vertices[a];
    const Point2& pb = mesh.vertices[b];
    FacetTag tag;
    if (std::abs(pa[0] - x_in) < tol && std::abs(pb[0] - x_in) < tol)
      tag = FacetTag::Inlet;
    else if (std::abs(pa[0] - x_out) < tol && std::abs(pb[0] - x_out) < tol)
      tag = FacetTag::Outlet;
    else {
      double xm = 0.5 * (pa[0] + pb[0]);
      bool on_wall = std::abs(std::abs(pa[1]) - half_height(pa[0])) < tol &&
                     std::abs(std::abs(pb[1]) - half_height(pb[0])) < tol;
      if (!on_wall) throw std::runtime_error("mesh: untaggable boundary edge");
      tag = (xm > contraction_x0 + tol && xm < contraction_x1 - tol) ? FacetTag::WallContraction
                                                                     : FacetTag::WallBuffer;
    }
    mesh.boundary_facets.push_back({a, b, cell, tag});
  }
}

std::vector<double> block_columns(double x0, double x1, int ncols) {
  std::vector<double> xs;
  for (int j = 0; j <= ncols; ++j) xs.push_back(x0 + (x1 - x0) * j / ncols);
  return xs;
}

}  // namespace

Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1, int nx, int ny,
                          SplitKind split) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("rectangle mesh: need nx, ny >= 1");
  QuadGrid g;
  for (int j = 0; j <= nx; ++j) {
    for (int k = 0; k <= ny; ++k)
      g.verts.push_back({x0 + (x1 - x0) * j / nx, y0 + (y1 - y0) * k / ny});
  }
  for (int j = 0; j < nx; ++j)
    for (int k = 0; k < ny; ++k) {
      int a = j * (ny + 1) + k;
      int b = (j + 1) * (ny + 1) + k;
      g.quads.push_back({a, b, b + 1, a + 1});
    }
  Mesh mesh = triangulate(std::move(g), split);
  const double tol = 1e-10;
  const auto& topo = mesh.topology();
  for (size_t e = 0; e < topo.edges.size(); ++e) {
    if (topo.edge_cells[e][1] != -1) continue;
    int cell = topo.edge_cells[e][0];
    const auto& t = mesh.cells[cell];
    int a = -1, b = -1;
    for (int i = 0; i < 3; ++i) {
      int u = t[i], v = t[(i + 1) % 3];
      if (ekey(u, v) == ekey(topo.edges[e][0], topo.edges[e][1])) {
        a = u;
        b = v;
      }
    }
    double xa = mesh.vertices[a][0], xb = mesh.vertices[b][0];
    FacetTag tag = FacetTag::WallBuffer;
    if (std::abs(xa - x0) < tol && std::abs(xb - x0) < tol) tag = FacetTag::Inlet;
    else if (std::abs(xa - x1) < tol && std::abs(xb - x1) < tol) tag = FacetTag::Outlet;
    mesh.boundary_facets.push_back({a, b, cell, tag});
  }
  return mesh;
}

Mesh build_base_mesh(const DuctGeometry& geom, int n, SplitKind split) {
  if (n < 1) throw std::invalid_argument("base mesh: need n >= 1");
  if (!(geom.H > 0.0)) throw std::invalid_argument("base mesh: degenerate geometry (H = 0)");

  auto cols_for = [&](double len) { return std::max(1, static_cast<int>(std::lround(len * n))); };
  std::vector<double> xs = block_columns(-geom.b_i, 0.0, cols_for(geom.b_i));
  auto append = [&](std::vector<double> more) {
    for (size_t i = 1; i < more.size(); ++i) xs.push_back(more[i]);
  };
  if (geom.chamfer > 0.0) {
    // wall breakpoints at L -+ chamfer need their own columns
    append(block_columns(0.0, geom.L - geom.chamfer, cols_for(geom.L - geom.chamfer)));
    append(block_columns(geom.L - geom.chamfer, geom.L + geom.chamfer, 2));
    append(block_columns(geom.L + geom.chamfer, geom.L + geom.b_o,
                         cols_for(geom.b_o - geom.chamfer)));
  } else {
    append(block_columns(0.0, geom.L, cols_for(geom.L)));
    append(block_columns(geom.L, geom.L + geom.b_o, cols_for(geom.b_o)));
  }

  auto hh = [&](double x) { return geom.half_height(x); };
  Mesh mesh = triangulate(duct_grid(xs, 2 * n, hh), split);
  tag_boundary(mesh, geom.x_inlet(), geom.x_outlet(), 0.0, geom.L + geom.chamfer, hh);
  mesh.check_conforming();
  return mesh;
}

// ---------------------------------------------------------------------------
// refinement: red subdivision of marked cells, newest-vertex bisection closure.
// Cells are stored with their refinement edge as (v0, v1); bisection children
// inherit the neighbouring old edges as refinement edges, red children restart
// at their longest edge.

Mesh refine_marked(const Mesh& mesh, const std::vector<char>& marked) {
  if (static_cast<int>(marked.size()) != mesh.num_cells())
    throw std::invalid_argument("refine_marked: mark vector size mismatch");

  const auto& topo = mesh.topology();
  const int ne = static_cast<int>(topo.edges.size());

  // edge marking with bisection closure: a cell with any marked edge gets its
  // refinement edge marked; iterate to a fixed point
  std::vector<char> edge_marked(ne, 0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (!marked[c]) continue;
    for (int e = 0; e < 3; ++e) edge_marked[topo.cell_edges[c][e]] = 1;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto& ce = topo.cell_edges[c];
      bool any = edge_marked[ce[0]] || edge_marked[ce[1]] || edge_marked[ce[2]];
      // refinement edge (v0,v1) is opposite local vertex 2
      int ref_edge = ce[2];
      if (any && !edge_marked[ref_edge]) {
        edge_marked[ref_edge] = 1;
        changed = true;
      }
    }
  }

  Mesh out;
  out.vertices = mesh.vertices;
  out.split_kind = mesh.split_kind;
  out.r_u = mesh.r_u;
  out.r_b = mesh.r_b;
  out.r_p = mesh.r_p;

  std::map<std::pair<int, int>, int> midpoint;
  auto mid_of = [&](int a, int b) {
    auto key = ekey(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    int m = out.num_vertices();
    out.vertices.push_back({0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]),
                            0.5 * (mesh.vertices[a][1] + mesh.vertices[b][1])});
    midpoint.emplace(key, m);
    return m;
  };

  auto emit = [&](std::array<int, 3> t) { out.cells.push_back(t); };
  auto emit_longest = [&](std::array<int, 3> t) {
    out.cells.push_back(longest_edge_first(t, out.vertices));
  };

  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    const auto& ce = topo.cell_edges[c];
    bool m01 = edge_marked[ce[2]];  // edge (v0,v1), opposite v2
    bool m12 = edge_marked[ce[0]];
    bool m20 = edge_marked[ce[1]];
    if (marked[c]) {
      // red: 4 similar children, refinement edge reset to longest
      int a = mid_of(t[0], t[1]), b = mid_of(t[1], t[2]), d = mid_of(t[2], t[0]);
      emit_longest({t[0], a, d});
      emit_longest({a, t[1], b});
      emit_longest({d, b, t[2]});
      emit_longest({a, b, d});
      continue;
    }
    if (!m01 && !m12 && !m20) {
      emit(t);
      continue;
    }
    // bisection patterns; closure guarantees the refinement edge is marked
    int m = mid_of(t[0], t[1]);
    std::array<int, 3> c1 = {t[2], t[0], m};  // refinement edge (v2,v0)
    std::array<int, 3> c2 = {t[1], t[2], m};  // refinement edge (v1,v2)
    if (m20) {
      int m2 = mid_of(t[2], t[0]);
      emit({m, t[2], m2});
      emit({t[0], m, m2});
    } else {
      emit(c1);
    }
    if (m12) {
      int m2 = mid_of(t[1], t[2]);
      emit({m, t[1], m2});
      emit({t[2], m, m2});
    } else {
      emit(c2);
    }
  }

  // rebuild boundary facets: each new boundary edge is an old facet or half of one
  std::map<std::pair<int, int>, FacetTag> old_tags;
  for (const auto& f : mesh.boundary_facets) old_tags.emplace(ekey(f.v0, f.v1), f.tag);
  std::map<int, std::pair<int, int>> midpoint_parent;
  for (const auto& [key, m] : midpoint) midpoint_parent.emplace(m, key);

  const auto& ntopo = out.topology();
  for (size_t e = 0; e < ntopo.edges.size(); ++e) {
    if (ntopo.edge_cells[e][1] != -1) continue;
    int cell = ntopo.edge_cells[e][0];
    const auto& t = out.cells[cell];
    int a = -1, b = -1;
    for (int i = 0; i < 3; ++i) {
      int u = t[i], v = t[(i + 1) % 3];
      if (ekey(u, v) == ekey(ntopo.edges[e][0], ntopo.edges[e][1])) {
        a = u;
        b = v;
      }
    }
    FacetTag tag;
    auto it = old_tags.find(ekey(a, b));
    if (it != old_tags.end()) {
      tag = it->second;
    } else {
      auto pa = midpoint_parent.find(a);
      auto pb = midpoint_parent.find(b);
      if (pa != midpoint_parent.end() && old_tags.count(pa->second) &&
          (pa->second.first == b || pa->second.second == b)) {
        tag = old_tags.at(pa->second);
      } else if (pb != midpoint_parent.end() && old_tags.count(pb->second) &&
                 (pb->second.first == a || pb->second.second == a)) {
        tag = old_tags.at(pb->second);
      } else {
        throw std::runtime_error("refine: cannot inherit boundary tag");
      }
    }
    out.boundary_facets.push_back({a, b, cell, tag});
  }
  return out;
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<char> all(mesh.num_cells(), 1);
  Mesh out = refine_marked(mesh, all);
  out.r_u = mesh.r_u + 1;
  return out;
}

namespace {
constexpr double kBoundaryBallRadius = 0.65;
constexpr double kBoundaryBallX = 0.4;
constexpr double kBoundaryBallY = 0.5;
}  // namespace

Mesh refine_boundary(const Mesh& mesh, const DuctGeometry& geom) {
  (void)geom;
  const auto& topo = mesh.topology();
  std::vector<char> on_boundary_edge(mesh.num_cells(), 0);
  for (size_t e = 0; e < topo.edges.size(); ++e)
    if (topo.edge_cells[e][1] == -1) on_boundary_edge[topo.edge_cells[e][0]] = 1;

  const Point2 p_top = {kBoundaryBallX, kBoundaryBallY};
  const Point2 p_bot = {kBoundaryBallX, -kBoundaryBallY};
  std::vector<char> marked(mesh.num_cells(), 0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (!on_boundary_edge[c]) continue;
    double dt = 0.0, db = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Point2& v = mesh.vertices[mesh.cells[c][i]];
      dt = std::max(dt, dist(v, p_top));
      db = std::max(db, dist(v, p_bot));
    }
    if (dt <= kBoundaryBallRadius || db <= kBoundaryBallRadius) marked[c] = 1;
  }
  Mesh out = refine_marked(mesh, marked);
  out.r_b = mesh.r_b + 1;
  return out;
}

Mesh refine_points(const Mesh& mesh, const DuctGeometry& geom) {
  const std::array<Point2, 4> corners = {{{geom.L, geom.H}, {geom.L, -geom.H}, {0.0, 1.0}, {0.0, -1.0}}};
  const double tol = 1e-12;
  std::vector<char> marked(mesh.num_cells(), 0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    const Point2& a = mesh.vertices[t[0]];
    const Point2& b = mesh.vertices[t[1]];
    const Point2& d = mesh.vertices[t[2]];
    double area2 = 2.0 * signed_area(a, b, d);
    for (const Point2& p : corners) {
      // closed-cell containment via barycentric coordinates
      double w0 = ((b[0] - p[0]) * (d[1] - p[1]) - (b[1] - p[1]) * (d[0] - p[0])) / area2;
      double w1 = ((d[0] - p[0]) * (a[1] - p[1]) - (d[1] - p[1]) * (a[0] - p[0])) / area2;
      double w2 = 1.0 - w0 - w1;
      if (w0 >= -tol && w1 >= -tol && w2 >= -tol) {
        marked[c] = 1;
        break;
      }
    }
  }
  Mesh out = refine_marked(mesh, marked);
  out.r_p = mesh.r_p + 1;
  return out;
}

// ---------------------------------------------------------------------------
// plain-text format: g2duct-mesh v1

void write_mesh(const Mesh& mesh, std::ostream& os) {
  os << "g2duct-mesh v1\n";
  os << "vertices " << mesh.num_vertices() << "\n";
  os << std::setprecision(17);
  for (const auto& v : mesh.vertices) os << v[0] << " " << v[1] << "\n";
  os << "cells " << mesh.num_cells() << "\n";
  for (const auto& c : mesh.cells) os << c[0] << " " << c[1] << " " << c[2] << "\n";
  os << "facets " << mesh.boundary_facets.size() << "\n";
  for (const auto& f : mesh.boundary_facets)
    os << f.v0 << " " << f.v1 << " " << facet_tag_name(f.tag) << "\n";
}

void write_mesh_file(const Mesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_mesh(mesh, os);
}

Mesh read_mesh(std::istream& is) {
  std::string word, version;
  is >> word >> version;
  if (word != "g2duct-mesh" || version != "v1")
    throw std::runtime_error("mesh file: bad header");
  Mesh mesh;
  size_t n;
  is >> word >> n;
  if (word != "vertices") throw std::runtime_error("mesh file: expected 'vertices'");
  mesh.vertices.resize(n);
  for (auto& v : mesh.vertices) is >> v[0] >> v[1];
  is >> word >> n;
  if (word != "cells") throw std::runtime_error("mesh file: expected 'cells'");
  mesh.cells.resize(n);
  for (auto& c : mesh.cells) is >> c[0] >> c[1] >> c[2];
  is >> word >> n;
  if (word != "facets") throw std::runtime_error("mesh file: expected 'facets'");
  mesh.boundary_facets.resize(n);
  for (auto& f : mesh.boundary_facets) {
    std::string tag;
    is >> f.v0 >> f.v1 >> tag;
    f.tag = facet_tag_from_name(tag);
    f.cell = -1;
  }
  if (!is) throw std::runtime_error("mesh file: truncated");

  // recover facet ownership and cell-ordered orientation
  const auto& topo = mesh.topology();
  for (auto& f : mesh.boundary_facets) {
    auto it = topo.edge_index.find(ekey(f.v0, f.v1));
    if (it == topo.edge_index.end() || topo.edge_cells[it->second][1] != -1)
      throw std::runtime_error("mesh file: facet is not a boundary edge");
    f.cell = topo.edge_cells[it->second][0];
    const auto& t = mesh.cells[f.cell];
    for (int i = 0; i < 3; ++i) {
      int u = t[i], v = t[(i + 1) % 3];
      if (ekey(u, v) == ekey(f.v0, f.v1)) {
        f.v0 = u;
        f.v1 = v;
      }
    }
  }
  mesh.check_conforming();
  return mesh;
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_mesh(is);
}

}  // namespace g2duct

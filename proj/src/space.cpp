#include "g2duct/space.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace g2duct {

FunctionSpace::FunctionSpace(const Mesh& mesh, int degree, int ncomp)
    : mesh_(&mesh), degree_(degree), ncomp_(ncomp) {
  const auto& topo = mesh.topology();
  const auto& ref = basis();
  const int k = degree;
  const int per_edge = k - 1;
  const int per_cell_interior = ref.num_interior_nodes();
  const int nv = mesh.num_vertices();
  const int ne = static_cast<int>(topo.edges.size());
  const int nc = mesh.num_cells();

  num_nodes_ = nv + per_edge * ne + per_cell_interior * nc;
  node_pos_.assign(num_nodes_, {0.0, 0.0});
  cell_nodes_.assign(static_cast<size_t>(nc) * ref.size(), -1);

  for (int c = 0; c < nc; ++c) {
    const auto& t = mesh.cells[c];
    const Point2& p0 = mesh.vertices[t[0]];
    const Point2& p1 = mesh.vertices[t[1]];
    const Point2& p2 = mesh.vertices[t[2]];
    auto phys = [&](const Point2& xi) -> Point2 {
      return {p0[0] + (p1[0] - p0[0]) * xi[0] + (p2[0] - p0[0]) * xi[1],
              p0[1] + (p1[1] - p0[1]) * xi[0] + (p2[1] - p0[1]) * xi[1]};
    };
    int* map = &cell_nodes_[static_cast<size_t>(c) * ref.size()];
    for (int i = 0; i < 3; ++i) map[i] = t[i];

    // local edges v0->v1, v1->v2, v2->v0; global edge nodes run low->high vertex
    const std::array<std::array<int, 2>, 3> led = {{{t[0], t[1]}, {t[1], t[2]}, {t[2], t[0]}}};
    for (int e = 0; e < 3; ++e) {
      int a = led[e][0], b = led[e][1];
      int eidx = topo.edge_index.at({std::min(a, b), std::max(a, b)});
      for (int j = 0; j < per_edge; ++j) {
        int gj = (a < b) ? j : (per_edge - 1 - j);
        map[3 + e * per_edge + j] = nv + eidx * per_edge + gj;
      }
    }
    for (int j = 0; j < per_cell_interior; ++j)
      map[3 + 3 * per_edge + j] = nv + ne * per_edge + c * per_cell_interior + j;

    for (int i = 0; i < ref.size(); ++i) node_pos_[map[i]] = phys(ref.nodes()[i]);
  }

  // boundary node sets per tag
  std::map<FacetTag, std::set<int>> sets;
  std::set<int> all;
  facet_nodes_.resize(mesh.boundary_facets.size());
  for (size_t f = 0; f < mesh.boundary_facets.size(); ++f) {
    const auto& bf = mesh.boundary_facets[f];
    std::vector<int>& fn = facet_nodes_[f];
    fn.push_back(bf.v0);
    fn.push_back(bf.v1);
    int eidx = topo.edge_index.at({std::min(bf.v0, bf.v1), std::max(bf.v0, bf.v1)});
    for (int j = 0; j < per_edge; ++j) fn.push_back(nv + eidx * per_edge + j);
    for (int n : fn) {
      sets[bf.tag].insert(n);
      all.insert(n);
    }
  }
  for (auto& [tag, s] : sets) boundary_nodes_[tag] = std::vector<int>(s.begin(), s.end());
  all_boundary_nodes_.assign(all.begin(), all.end());
}

const std::vector<int>& FunctionSpace::boundary_nodes(FacetTag tag) const {
  auto it = boundary_nodes_.find(tag);
  return it == boundary_nodes_.end() ? empty_ : it->second;
}

Field interpolate(const FunctionSpace& space,
                  const std::function<void(const Point2&, double*)>& f) {
  Field out(space);
  std::vector<double> vals(space.components());
  for (int n = 0; n < space.num_nodes(); ++n) {
    f(space.node_position(n), vals.data());
    for (int c = 0; c < space.components(); ++c) out.coeffs[space.dof(n, c)] = vals[c];
  }
  return out;
}

}  // namespace g2duct

#include "g2duct/assembly.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

#include "g2duct/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace g2duct {

namespace {
std::atomic<bool> g_parallel{true};
constexpr int kChunk = 256;
}  // namespace

void set_parallel_assembly(bool on) { g_parallel.store(on); }
bool parallel_assembly() { return g_parallel.load(); }

void cellwise_deterministic(int ncells, const std::function<void(int)>& compute,
                            const std::function<void(int)>& merge) {
  if (!parallel_assembly()) {
    for (int c = 0; c < ncells; ++c) {
      compute(c);
      merge(c);
    }
    return;
  }
  for (int base = 0; base < ncells; base += kChunk) {
    const int end = std::min(ncells, base + kChunk);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int c = base; c < end; ++c) compute(c);
    for (int c = base; c < end; ++c) merge(c);
  }
}

// ---------------------------------------------------------------------------

CellMap::CellMap(const Mesh& mesh, int cell) {
  const auto& t = mesh.cells[cell];
  const Point2& a = mesh.vertices[t[0]];
  const Point2& b = mesh.vertices[t[1]];
  const Point2& c = mesh.vertices[t[2]];
  p0 = a;
  J[0][0] = b[0] - a[0];
  J[0][1] = c[0] - a[0];
  J[1][0] = b[1] - a[1];
  J[1][1] = c[1] - a[1];
  det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  double inv = 1.0 / det;
  invJ[0][0] = J[1][1] * inv;
  invJ[0][1] = -J[0][1] * inv;
  invJ[1][0] = -J[1][0] * inv;
  invJ[1][1] = J[0][0] * inv;
}

Point2 CellMap::to_phys(const Point2& r) const {
  return {p0[0] + J[0][0] * r[0] + J[0][1] * r[1], p0[1] + J[1][0] * r[0] + J[1][1] * r[1]};
}

Point2 CellMap::to_ref(const Point2& x) const {
  double dx = x[0] - p0[0], dy = x[1] - p0[1];
  return {invJ[0][0] * dx + invJ[0][1] * dy, invJ[1][0] * dx + invJ[1][1] * dy};
}

Point2 CellMap::grad_to_phys(const Point2& g) const {
  return {invJ[0][0] * g[0] + invJ[1][0] * g[1], invJ[0][1] * g[0] + invJ[1][1] * g[1]};
}

std::array<double, 3> CellMap::hess_to_phys(const std::array<double, 3>& h) const {
  // H_x = invJ^T H_r invJ with H packed (xx, xy, yy)
  const double a = invJ[0][0], b = invJ[0][1], c = invJ[1][0], d = invJ[1][1];
  // rows of invJ^T are columns of invJ: (a, c) and (b, d)
  double h00 = h[0], h01 = h[1], h11 = h[2];
  // M = H_r * invJ
  double m00 = h00 * a + h01 * c, m01 = h00 * b + h01 * d;
  double m10 = h01 * a + h11 * c, m11 = h01 * b + h11 * d;
  return {a * m00 + c * m10, a * m01 + c * m11, b * m01 + d * m11};
}

const BasisTable& BasisTable::get(int degree, int quad_order, bool with_hess) {
  static std::map<std::tuple<int, int, bool>, BasisTable> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_tuple(degree, quad_order, with_hess);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  BasisTable tab;
  const auto& basis = LagrangeBasis::get(degree);
  const auto& rule = triangle_rule(quad_order);
  tab.n = basis.size();
  tab.rule = &rule;
  std::vector<double> v;
  std::vector<Point2> g;
  std::vector<std::array<double, 3>> h;
  for (int q = 0; q < rule.size(); ++q) {
    basis.eval(rule.points[q], v);
    basis.eval_grad(rule.points[q], g);
    tab.val.insert(tab.val.end(), v.begin(), v.end());
    tab.dref.insert(tab.dref.end(), g.begin(), g.end());
    if (with_hess) {
      basis.eval_hess(rule.points[q], h);
      tab.href.insert(tab.href.end(), h.begin(), h.end());
    }
  }
  return cache.emplace(key, std::move(tab)).first->second;
}

// ---------------------------------------------------------------------------
// pattern + scatter helpers

namespace {

SparseMatrix matrix_from_spaces(const FunctionSpace& rows, const FunctionSpace& cols) {
  if (&rows.mesh() != &cols.mesh()) throw SpaceMismatchError("assemble: spaces on different meshes");
  const int nc = rows.mesh().num_cells();
  std::vector<std::vector<int>> row_cols(rows.num_dofs());
  for (int c = 0; c < nc; ++c) {
    for (int i = 0; i < rows.nodes_per_cell(); ++i) {
      for (int ci = 0; ci < rows.components(); ++ci) {
        auto& rc = row_cols[rows.dof(rows.cell_node(c, i), ci)];
        for (int j = 0; j < cols.nodes_per_cell(); ++j)
          for (int cj = 0; cj < cols.components(); ++cj)
            rc.push_back(cols.dof(cols.cell_node(c, j), cj));
      }
    }
  }
  return SparseMatrix::from_pattern(rows.num_dofs(), cols.num_dofs(), row_cols);
}

/// Chunk-parallel local matrices scattered serially in cell order.
template <typename LocalKernel, typename Scatter>
SparseMatrix assemble_matrix(const FunctionSpace& rows, const FunctionSpace& cols,
                             int local_rows, int local_cols, LocalKernel&& kernel,
                             Scatter&& scatter) {
  SparseMatrix A = matrix_from_spaces(rows, cols);
  const int nc = rows.mesh().num_cells();
  const size_t stride = static_cast<size_t>(local_rows) * local_cols;
  std::vector<double> store(static_cast<size_t>(kChunk) * stride);
  cellwise_deterministic(
      nc,
      [&](int c) { kernel(c, &store[(c % kChunk) * stride]); },
      [&](int c) { scatter(c, &store[(c % kChunk) * stride], A); });
  A.finalize();
  return A;
}

}  // namespace

// ---------------------------------------------------------------------------
// bilinear forms

SparseMatrix assemble_operator(const FunctionSpace& V, double grad_coeff, double divdiv_coeff,
                               double mass_coeff, int quad_order) {
  const Mesh& mesh = V.mesh();
  const auto& tab = BasisTable::get(V.degree(), quad_order);
  const int n = tab.n;
  const int ncomp = V.components();
  const int nloc = n * ncomp;
  if (divdiv_coeff != 0.0 && ncomp != 2)
    throw std::invalid_argument("div-div term requires a 2-component space");

  auto kernel = [&](int c, double* local) {
    CellMap map(mesh, c);
    std::fill(local, local + nloc * nloc, 0.0);
    std::vector<Point2> gphys(n);
    for (int q = 0; q < tab.rule->size(); ++q) {
      const double w = tab.rule->weights[q] * map.det;
      for (int i = 0; i < n; ++i) gphys[i] = map.grad_to_phys(tab.dref[q * n + i]);
      const double* val = &tab.val[q * n];
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double gg = gphys[i][0] * gphys[j][0] + gphys[i][1] * gphys[j][1];
          double mm = val[i] * val[j];
          if (ncomp == 1) {
            local[i * nloc + j] += w * (grad_coeff * gg + mass_coeff * mm);
          } else {
            // component-diagonal grad/mass part
            for (int comp = 0; comp < 2; ++comp) {
              int I = i * 2 + comp, Jn = j * 2 + comp;
              local[I * nloc + Jn] += w * (grad_coeff * gg + mass_coeff * mm);
            }
            if (divdiv_coeff != 0.0) {
              // div(phi_j e_cj) = d_cj phi_j
              for (int ci = 0; ci < 2; ++ci)
                for (int cj = 0; cj < 2; ++cj)
                  local[(i * 2 + ci) * nloc + (j * 2 + cj)] +=
                      w * divdiv_coeff * gphys[i][ci] * gphys[j][cj];
            }
          }
        }
      }
    }
  };
  auto scatter = [&](int c, const double* local, SparseMatrix& A) {
    for (int i = 0; i < n; ++i)
      for (int ci = 0; ci < ncomp; ++ci) {
        int gi = V.dof(V.cell_node(c, i), ci);
        for (int j = 0; j < n; ++j)
          for (int cj = 0; cj < ncomp; ++cj)
            A.add(gi, V.dof(V.cell_node(c, j), cj), local[(i * ncomp + ci) * nloc + j * ncomp + cj]);
      }
  };
  return assemble_matrix(V, V, nloc, nloc, kernel, scatter);
}

SparseMatrix assemble_grad_grad(const FunctionSpace& V, int quad_order) {
  return assemble_operator(V, 1.0, 0.0, 0.0, quad_order);
}
SparseMatrix assemble_div_div(const FunctionSpace& V, int quad_order) {
  return assemble_operator(V, 0.0, 1.0, 0.0, quad_order);
}
SparseMatrix assemble_mass(const FunctionSpace& V, int quad_order) {
  return assemble_operator(V, 0.0, 0.0, 1.0, quad_order);
}

SparseMatrix assemble_mixed_divergence(const FunctionSpace& P, const FunctionSpace& V,
                                       int quad_order) {
  if (P.components() != 1 || V.components() != 2)
    throw std::invalid_argument("mixed divergence wants scalar rows, vector columns");
  const Mesh& mesh = V.mesh();
  const auto& tabP = BasisTable::get(P.degree(), quad_order);
  const auto& tabV = BasisTable::get(V.degree(), quad_order);
  const int np = tabP.n, nv = tabV.n;
  const int nloc_r = np, nloc_c = nv * 2;

  auto kernel = [&](int c, double* local) {
    CellMap map(mesh, c);
    std::fill(local, local + nloc_r * nloc_c, 0.0);
    std::vector<Point2> gv(nv);
    for (int q = 0; q < tabP.rule->size(); ++q) {
      const double w = tabP.rule->weights[q] * map.det;
      for (int j = 0; j < nv; ++j) gv[j] = map.grad_to_phys(tabV.dref[q * nv + j]);
      const double* pv = &tabP.val[q * np];
      for (int i = 0; i < np; ++i)
        for (int j = 0; j < nv; ++j)
          for (int cj = 0; cj < 2; ++cj) local[i * nloc_c + j * 2 + cj] += w * pv[i] * gv[j][cj];
    }
  };
  auto scatter = [&](int c, const double* local, SparseMatrix& A) {
    for (int i = 0; i < np; ++i) {
      int gi = P.dof(P.cell_node(c, i), 0);
      for (int j = 0; j < nv; ++j)
        for (int cj = 0; cj < 2; ++cj)
          A.add(gi, V.dof(V.cell_node(c, j), cj), local[i * nloc_c + j * 2 + cj]);
    }
  };
  return assemble_matrix(P, V, nloc_r, nloc_c, kernel, scatter);
}

SparseMatrix assemble_convection(const FunctionSpace& V, const Field& u, int quad_order) {
  const Mesh& mesh = V.mesh();
  if (&u.space->mesh() != &mesh) throw SpaceMismatchError("convection: velocity on another mesh");
  const auto& tab = BasisTable::get(V.degree(), quad_order);
  const auto& tabU = BasisTable::get(u.space->degree(), quad_order);
  const int n = tab.n, nu = tabU.n;
  const int ncomp = V.components();
  const int nloc = n * ncomp;

  auto kernel = [&](int c, double* local) {
    CellMap map(mesh, c);
    std::fill(local, local + nloc * nloc, 0.0);
    std::vector<Point2> gphys(n);
    for (int q = 0; q < tab.rule->size(); ++q) {
      const double w = tab.rule->weights[q] * map.det;
      // velocity value at q
      double ux = 0.0, uy = 0.0;
      for (int j = 0; j < nu; ++j) {
        double v = tabU.val[q * nu + j];
        int node = u.space->cell_node(c, j);
        ux += v * u.coeffs[u.space->dof(node, 0)];
        uy += v * u.coeffs[u.space->dof(node, 1)];
      }
      for (int i = 0; i < n; ++i) gphys[i] = map.grad_to_phys(tab.dref[q * n + i]);
      const double* val = &tab.val[q * n];
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double adv = (ux * gphys[j][0] + uy * gphys[j][1]) * val[i];
          for (int comp = 0; comp < ncomp; ++comp)
            local[(i * ncomp + comp) * nloc + j * ncomp + comp] += w * adv;
        }
      }
    }
  };
  auto scatter = [&](int c, const double* local, SparseMatrix& A) {
    for (int i = 0; i < n; ++i)
      for (int ci = 0; ci < ncomp; ++ci) {
        int gi = V.dof(V.cell_node(c, i), ci);
        for (int j = 0; j < n; ++j)
          for (int cj = 0; cj < ncomp; ++cj)
            A.add(gi, V.dof(V.cell_node(c, j), cj), local[(i * ncomp + ci) * nloc + j * ncomp + cj]);
      }
  };
  return assemble_matrix(V, V, nloc, nloc, kernel, scatter);
}

SparseMatrix assemble_transport_operator(const FunctionSpace& W, const Field& u, double nu,
                                         double alpha1, int quad_order, double upwind) {
  const Mesh& mesh = W.mesh();
  if (&u.space->mesh() != &mesh) throw SpaceMismatchError("transport: velocity on another mesh");
  const auto& tab = BasisTable::get(W.degree(), quad_order);
  const auto& tabU = BasisTable::get(u.space->degree(), quad_order);
  const int n = tab.n, nu_n = tabU.n;
  const int ncomp = W.components();
  const int nloc = n * ncomp;

  auto kernel = [&](int c, double* local) {
    CellMap map(mesh, c);
    const double h = upwind > 0.0 ? mesh.cell_diameter(c) : 0.0;
    std::fill(local, local + nloc * nloc, 0.0);
    std::vector<Point2> gphys(n);
    for (int q = 0; q < tab.rule->size(); ++q) {
      const double w = tab.rule->weights[q] * map.det;
      double ux = 0.0, uy = 0.0;
      for (int j = 0; j < nu_n; ++j) {
        double v = tabU.val[q * nu_n + j];
        int node = u.space->cell_node(c, j);
        ux += v * u.coeffs[u.space->dof(node, 0)];
        uy += v * u.coeffs[u.space->dof(node, 1)];
      }
      for (int i = 0; i < n; ++i) gphys[i] = map.grad_to_phys(tab.dref[q * n + i]);
      const double* val = &tab.val[q * n];
      const double eps = upwind > 0.0 ? upwind * std::abs(alpha1) * std::hypot(ux, uy) * h : 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double entry = nu * val[i] * val[j] +
                         alpha1 * (ux * gphys[j][0] + uy * gphys[j][1]) * val[i] +
                         eps * (gphys[i][0] * gphys[j][0] + gphys[i][1] * gphys[j][1]);
          for (int comp = 0; comp < ncomp; ++comp)
            local[(i * ncomp + comp) * nloc + j * ncomp + comp] += w * entry;
        }
      }
    }
  };
  auto scatter = [&](int c, const double* local, SparseMatrix& A) {
    for (int i = 0; i < n; ++i)
      for (int ci = 0; ci < ncomp; ++ci) {
        int gi = W.dof(W.cell_node(c, i), ci);
        for (int j = 0; j < n; ++j)
          for (int cj = 0; cj < ncomp; ++cj)
            A.add(gi, W.dof(W.cell_node(c, j), cj), local[(i * ncomp + ci) * nloc + j * ncomp + cj]);
      }
  };
  return assemble_matrix(W, W, nloc, nloc, kernel, scatter);
}

// ---------------------------------------------------------------------------
// loads

std::vector<double> assemble_load(
    const FunctionSpace& V, int quad_order,
    const std::function<void(int, const Point2&, const Point2&, double*)>& f) {
  const Mesh& mesh = V.mesh();
  const auto& tab = BasisTable::get(V.degree(), quad_order);
  const int n = tab.n;
  const int ncomp = V.components();
  const int nloc = n * ncomp;
  std::vector<double> b(V.num_dofs(), 0.0);
  std::vector<double> store(static_cast<size_t>(kChunk) * nloc);

  cellwise_deterministic(
      mesh.num_cells(),
      [&](int c) {
        double* local = &store[(c % kChunk) * nloc];
        std::fill(local, local + nloc, 0.0);
        CellMap map(mesh, c);
        double fv[8];
        for (int q = 0; q < tab.rule->size(); ++q) {
          const double w = tab.rule->weights[q] * map.det;
          Point2 ref = tab.rule->points[q];
          Point2 phys = map.to_phys(ref);
          f(c, ref, phys, fv);
          const double* val = &tab.val[q * n];
          for (int i = 0; i < n; ++i)
            for (int comp = 0; comp < ncomp; ++comp)
              local[i * ncomp + comp] += w * val[i] * fv[comp];
        }
      },
      [&](int c) {
        const double* local = &store[(c % kChunk) * nloc];
        for (int i = 0; i < n; ++i)
          for (int comp = 0; comp < ncomp; ++comp)
            b[V.dof(V.cell_node(c, i), comp)] += local[i * ncomp + comp];
      });
  return b;
}

// ---------------------------------------------------------------------------
// evaluation and norms

void evaluate_field(const Field& f, int cell, const Point2& ref, double* value, double* grad,
                    double* hess) {
  const FunctionSpace& V = *f.space;
  const auto& basis = V.basis();
  const int n = basis.size();
  const int ncomp = V.components();
  CellMap map(V.mesh(), cell);

  std::vector<double> val;
  std::vector<Point2> gr;
  std::vector<std::array<double, 3>> hr;
  if (value) basis.eval(ref, val);
  if (grad || hess) basis.eval_grad(ref, gr);
  if (hess) basis.eval_hess(ref, hr);

  if (value)
    for (int c = 0; c < ncomp; ++c) value[c] = 0.0;
  if (grad)
    for (int c = 0; c < 2 * ncomp; ++c) grad[c] = 0.0;
  if (hess)
    for (int c = 0; c < 3 * ncomp; ++c) hess[c] = 0.0;

  for (int i = 0; i < n; ++i) {
    int node = V.cell_node(cell, i);
    Point2 gp = grad ? map.grad_to_phys(gr[i]) : Point2{0, 0};
    std::array<double, 3> hp = hess ? map.hess_to_phys(hr[i]) : std::array<double, 3>{0, 0, 0};
    for (int c = 0; c < ncomp; ++c) {
      double coef = f.coeffs[V.dof(node, c)];
      if (value) value[c] += coef * val[i];
      if (grad) {
        grad[c * 2 + 0] += coef * gp[0];
        grad[c * 2 + 1] += coef * gp[1];
      }
      if (hess)
        for (int d = 0; d < 3; ++d) hess[c * 3 + d] += coef * hp[d];
    }
  }
}

namespace {

double integrate_cells(const FunctionSpace& V,
                       const std::function<double(int)>& cell_value) {
  const int nc = V.mesh().num_cells();
  std::vector<double> parts(nc, 0.0);
  cellwise_deterministic(
      nc, [&](int c) { parts[c] = cell_value(c); }, [](int) {});
  double s = 0.0;
  for (int c = 0; c < nc; ++c) s += parts[c];
  return s;
}

}  // namespace

double norm(const Field& f, NormKind kind) {
  const FunctionSpace& V = *f.space;
  if (kind == NormKind::LinfDof) {
    double m = 0.0;
    for (double c : f.coeffs) m = std::max(m, std::abs(c));
    return m;
  }
  const int order = 2 * V.degree();
  const auto& tab = BasisTable::get(V.degree(), order);
  const int n = tab.n;
  const int ncomp = V.components();
  const bool with_grad = kind == NormKind::H1;

  double total = integrate_cells(V, [&](int c) {
    CellMap map(V.mesh(), c);
    double acc = 0.0;
    for (int q = 0; q < tab.rule->size(); ++q) {
      const double w = tab.rule->weights[q] * map.det;
      for (int comp = 0; comp < ncomp; ++comp) {
        double v = 0.0, gx = 0.0, gy = 0.0;
        for (int i = 0; i < n; ++i) {
          double coef = f.coeffs[V.dof(V.cell_node(c, i), comp)];
          v += coef * tab.val[q * n + i];
          if (with_grad) {
            Point2 g = map.grad_to_phys(tab.dref[q * n + i]);
            gx += coef * g[0];
            gy += coef * g[1];
          }
        }
        acc += w * (v * v + (with_grad ? gx * gx + gy * gy : 0.0));
      }
    }
    return acc;
  });
  return std::sqrt(total);
}

double difference_norm(const Field& a, const Field& b, NormKind kind) {
  if (!a.space->same_layout(*b.space))
    throw SpaceMismatchError("difference_norm: incompatible spaces");
  Field d(*a.space);
  for (int i = 0; i < d.size(); ++i) d.coeffs[i] = a.coeffs[i] - b.coeffs[i];
  return norm(d, kind);
}

double divergence_norm(const Field& u) {
  const FunctionSpace& V = *u.space;
  if (V.components() != 2) throw std::invalid_argument("divergence_norm: vector field required");
  const auto& tab = BasisTable::get(V.degree(), 2 * V.degree());
  const int n = tab.n;
  double total = integrate_cells(V, [&](int c) {
    CellMap map(V.mesh(), c);
    double acc = 0.0;
    for (int q = 0; q < tab.rule->size(); ++q) {
      const double w = tab.rule->weights[q] * map.det;
      double div = 0.0;
      for (int i = 0; i < n; ++i) {
        Point2 g = map.grad_to_phys(tab.dref[q * n + i]);
        int node = V.cell_node(c, i);
        div += u.coeffs[V.dof(node, 0)] * g[0] + u.coeffs[V.dof(node, 1)] * g[1];
      }
      acc += w * div * div;
    }
    return acc;
  });
  return std::sqrt(total);
}

double boundary_flux(const Field& g) {
  const FunctionSpace& V = *g.space;
  if (V.components() != 2) throw std::invalid_argument("boundary_flux: vector field required");
  const Mesh& mesh = V.mesh();
  const auto& er = edge_rule(2 * V.degree());
  double flux = 0.0;
  for (const auto& bf : mesh.boundary_facets) {
    const Point2& a = mesh.vertices[bf.v0];
    const Point2& b = mesh.vertices[bf.v1];
    double tx = b[0] - a[0], ty = b[1] - a[1];
    double len = std::hypot(tx, ty);
    // outward normal for cell-ordered boundary edges
    double nx = ty / len, ny = -tx / len;
    CellMap map(mesh, bf.cell);
    for (int q = 0; q < er.size(); ++q) {
      Point2 phys = {a[0] + tx * er.points[q], a[1] + ty * er.points[q]};
      double val[2];
      evaluate_field(g, bf.cell, map.to_ref(phys), val, nullptr, nullptr);
      flux += er.weights[q] * len * (val[0] * nx + val[1] * ny);
    }
  }
  return flux;
}

double mean_value(const Field& f) {
  const FunctionSpace& V = *f.space;
  if (V.components() != 1) throw std::invalid_argument("mean_value: scalar field required");
  const auto& tab = BasisTable::get(V.degree(), 2 * V.degree());
  const int n = tab.n;
  double integral = integrate_cells(V, [&](int c) {
    CellMap map(V.mesh(), c);
    double acc = 0.0;
    for (int q = 0; q < tab.rule->size(); ++q) {
      double v = 0.0;
      for (int i = 0; i < n; ++i)
        v += f.coeffs[V.dof(V.cell_node(c, i), 0)] * tab.val[q * n + i];
      acc += tab.rule->weights[q] * map.det * v;
    }
    return acc;
  });
  return integral / V.mesh().total_area();
}

}  // namespace g2duct

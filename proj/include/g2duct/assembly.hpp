#pragma once

#include <functional>
#include <vector>

#include "g2duct/quadrature.hpp"
#include "g2duct/sparse.hpp"
#include "g2duct/space.hpp"

namespace g2duct {

/// Cell-parallel execution switch.  The parallel path computes per-cell
/// kernels under OpenMP and merges them serially in ascending cell order,
/// so results are bit-identical to the serial reference path.
void set_parallel_assembly(bool on);
bool parallel_assembly();

/// Run compute(c) for every cell (OpenMP when enabled), then merge(c)
/// serially in ascending cell order.  compute must be thread-safe.
void cellwise_deterministic(int ncells, const std::function<void(int)>& compute,
                            const std::function<void(int)>& merge);

/// Affine map between the reference triangle and cell c.
struct CellMap {
  Point2 p0;
  double J[2][2];
  double invJ[2][2];
  double det;  // positive for CCW cells

  CellMap(const Mesh& mesh, int cell);
  Point2 to_phys(const Point2& ref) const;
  Point2 to_ref(const Point2& phys) const;
  // grad_x = invJ^T grad_ref
  Point2 grad_to_phys(const Point2& gref) const;
  // hess_x = invJ^T H_ref invJ, packed (xx, xy, yy)
  std::array<double, 3> hess_to_phys(const std::array<double, 3>& href) const;
};

/// Reference basis values/derivatives tabulated at a quadrature rule.
struct BasisTable {
  int n = 0;  // basis size
  const QuadRule* rule = nullptr;
  std::vector<double> val;                    // [q*n + i]
  std::vector<Point2> dref;                   // [q*n + i]
  std::vector<std::array<double, 3>> href;    // [q*n + i], filled on demand

  static const BasisTable& get(int degree, int quad_order, bool with_hess = false);
};

// --- bilinear forms -------------------------------------------------------

/// sum_comp (grad u_c, grad v_c), optionally plus rho (div u, div v) and
/// beta (u, v); one pass builds any linear combination on the same space.
SparseMatrix assemble_operator(const FunctionSpace& V, double grad_coeff, double divdiv_coeff,
                               double mass_coeff, int quad_order);

SparseMatrix assemble_grad_grad(const FunctionSpace& V, int quad_order);
SparseMatrix assemble_div_div(const FunctionSpace& V, int quad_order);
SparseMatrix assemble_mass(const FunctionSpace& V, int quad_order);

/// B[i][j] = (q_i, div phi_j): rows over P, columns over the vector space V.
SparseMatrix assemble_mixed_divergence(const FunctionSpace& P, const FunctionSpace& V,
                                       int quad_order);

/// C[i][j] = ((u . grad) phi_j, psi_i) componentwise on V (velocity field u
/// lives on a vector space over the same mesh).
SparseMatrix assemble_convection(const FunctionSpace& V, const Field& u, int quad_order);

/// Transport operator nu (w, v) + alpha1 ((u.grad) w, v) in one pass;
/// upwind > 0 adds isotropic artificial diffusion eps = upwind |alpha1| |u| h.
SparseMatrix assemble_transport_operator(const FunctionSpace& W, const Field& u, double nu,
                                         double alpha1, int quad_order, double upwind = 0.0);

// --- loads ----------------------------------------------------------------

/// Load vector (f, v) for pointwise f(cell, ref point, phys point) with
/// V.components() outputs.  f must be thread-safe.
std::vector<double> assemble_load(
    const FunctionSpace& V, int quad_order,
    const std::function<void(int, const Point2&, const Point2&, double*)>& f);

// --- field evaluation and norms --------------------------------------------

/// Evaluate a field at a reference point of a cell.  Any of the output
/// pointers may be null.  value: ncomp; grad: ncomp x 2 row-major;
/// hess: ncomp x 3 (xx, xy, yy).
void evaluate_field(const Field& f, int cell, const Point2& ref, double* value, double* grad,
                    double* hess);

enum class NormKind { L2, H1, LinfDof };

double norm(const Field& f, NormKind kind);
/// || a - b ||, requiring identical space layouts.
double difference_norm(const Field& a, const Field& b, NormKind kind);
/// sqrt((div u, div u)) for a vector field.
double divergence_norm(const Field& u);

/// Net boundary flux of the boundary trace of g: sum over boundary facets of
/// int g.n ds (g evaluated from its coefficients).
double boundary_flux(const Field& g);

/// Mean of f over the domain (integral / area).
double mean_value(const Field& f);

}  // namespace g2duct

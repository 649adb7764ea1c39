#include "g2duct/observables.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "g2duct/errors.hpp"

namespace g2duct {

namespace {

/// Contour integral over the contraction facets; the two callbacks receive
/// the viscous term n'(grad u + grad u') xhat and the pressure trace.
double contraction_contour(const Field& u, const Field& pressure, double visc_coeff,
                           double pressure_coeff) {
  const FunctionSpace& V = *u.space;
  const Mesh& mesh = V.mesh();
  const auto& er = edge_rule(2 * V.degree());

  bool any = false;
  double total = 0.0;
  for (size_t f = 0; f < mesh.boundary_facets.size(); ++f) {
    const auto& bf = mesh.boundary_facets[f];
    if (bf.tag != FacetTag::WallContraction) continue;
    any = true;
    const Point2& a = mesh.vertices[bf.v0];
    const Point2& b = mesh.vertices[bf.v1];
    double tx = b[0] - a[0], ty = b[1] - a[1];
    double len = std::hypot(tx, ty);
    double nx = ty / len, ny = -tx / len;
    CellMap map(mesh, bf.cell);
    for (int q = 0; q < er.size(); ++q) {
      Point2 phys = {a[0] + tx * er.points[q], a[1] + ty * er.points[q]};
      Point2 ref = map.to_ref(phys);
      double grad[4];
      evaluate_field(u, bf.cell, ref, nullptr, grad, nullptr);
      double pval;
      evaluate_field(pressure, bf.cell, ref, &pval, nullptr, nullptr);
      // (A xhat) with A = grad u + grad u': components (2 du1/dx, du1/dy + du2/dx)
      double A00 = 2.0 * grad[0];
      double A10 = grad[1] + grad[2];
      double viscous = nx * A00 + ny * A10;
      total += er.weights[q] * len * (visc_coeff * viscous - pressure_coeff * pval * nx);
    }
  }
  if (!any)
    throw std::runtime_error("force integral: mesh has no wall_contraction facets");
  return total;
}

}  // namespace

double force_integral(const Field& u, const Field& pi, double nu) {
  return nu * contraction_contour(u, pi, 1.0, 1.0);
}

double force_integral_physical(const Field& u, const Field& p, double nu) {
  return contraction_contour(u, p, nu, 1.0);
}

double force_integral(const FlowState& state, const FluidParams& params) {
  return force_integral(state.u, state.pi, params.nu);
}

double aitken_extrapolate(double a0, double a1, double a2) {
  const double d1 = a1 - a0;
  const double d2 = a2 - a1;
  const double denom = d2 - d1;
  const double scale = std::max({std::abs(a0), std::abs(a1), std::abs(a2), 1.0});
  if (std::abs(denom) < 1e-15 * scale)
    throw DegenerateDifferencesError("aitken: successive differences are degenerate");
  return a2 - d2 * d2 / denom;
}

double pressure_drop(const Field& p) {
  const FunctionSpace& P = *p.space;
  const Mesh& mesh = P.mesh();
  const auto& er = edge_rule(2 * P.degree());
  double sums[2] = {0.0, 0.0};
  double lens[2] = {0.0, 0.0};
  for (size_t f = 0; f < mesh.boundary_facets.size(); ++f) {
    const auto& bf = mesh.boundary_facets[f];
    int side;
    if (bf.tag == FacetTag::Inlet) side = 0;
    else if (bf.tag == FacetTag::Outlet) side = 1;
    else continue;
    const Point2& a = mesh.vertices[bf.v0];
    const Point2& b = mesh.vertices[bf.v1];
    double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    CellMap map(mesh, bf.cell);
    for (int q = 0; q < er.size(); ++q) {
      Point2 phys = {a[0] + (b[0] - a[0]) * er.points[q], a[1] + (b[1] - a[1]) * er.points[q]};
      double pv;
      evaluate_field(p, bf.cell, map.to_ref(phys), &pv, nullptr, nullptr);
      sums[side] += er.weights[q] * len * pv;
    }
    lens[side] += len;
  }
  if (lens[0] == 0.0 || lens[1] == 0.0)
    throw std::runtime_error("pressure drop: missing inlet or outlet facets");
  return sums[0] / lens[0] - sums[1] / lens[1];
}

double field_difference(const Field& a, const Field& b, NormKind kind, const Field* reference) {
  double d = difference_norm(a, b, kind);
  if (!reference) return d;
  return d / norm(*reference, kind);
}

// ---------------------------------------------------------------------------

const char* kForceRecordHeader = "U,nu,alpha1,alpha2,alpha,theta,F,F_over_U,iters,converged,r_u,r_b,r_p";

namespace {
std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}
}  // namespace

void write_force_records(const std::vector<ForceRecord>& records, std::ostream& os) {
  os << kForceRecordHeader << "\n";
  for (const auto& r : records) {
    os << fmt12(r.U) << "," << fmt12(r.nu) << "," << fmt12(r.alpha1) << "," << fmt12(r.alpha2)
       << "," << fmt12(r.alpha) << "," << fmt12(r.theta) << "," << fmt12(r.F) << ","
       << fmt12(r.F_over_U) << "," << r.iters << "," << (r.converged ? 1 : 0) << "," << r.r_u
       << "," << r.r_b << "," << r.r_p << "\n";
  }
}

void write_force_records_file(const std::vector<ForceRecord>& records, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_force_records(records, os);
}

std::vector<ForceRecord> read_force_records(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kForceRecordHeader)
    throw std::runtime_error("force CSV: unexpected header");
  std::vector<ForceRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> toks;
    while (std::getline(ss, tok, ',')) toks.push_back(tok);
    if (toks.size() != 13) throw std::runtime_error("force CSV: bad row '" + line + "'");
    ForceRecord r;
    r.U = std::stod(toks[0]);
    r.nu = std::stod(toks[1]);
    r.alpha1 = std::stod(toks[2]);
    r.alpha2 = std::stod(toks[3]);
    r.alpha = std::stod(toks[4]);
    r.theta = std::stod(toks[5]);
    r.F = std::stod(toks[6]);
    r.F_over_U = std::stod(toks[7]);
    r.iters = std::stoi(toks[8]);
    r.converged = std::stoi(toks[9]) != 0;
    r.r_u = std::stoi(toks[10]);
    r.r_b = std::stoi(toks[11]);
    r.r_p = std::stoi(toks[12]);
    out.push_back(r);
  }
  return out;
}

std::vector<ForceRecord> read_force_records_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_force_records(is);
}

}  // namespace g2duct

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "g2duct/grade2.hpp"

namespace g2duct {

/// Rheometer force over the tagged contraction facets,
///   F = nu ( sum_f int n'(grad u + grad u') xhat ds - int pi n.xhat ds ),
/// with velocity gradients taken from the facet's owning cell.
double force_integral(const Field& u, const Field& pi, double nu);

/// Same contour integral written with a physical pressure field,
///   F = sum_f int nu n'(grad u + grad u') xhat ds - int p n.xhat ds.
double force_integral_physical(const Field& u, const Field& p, double nu);

double force_integral(const FlowState& state, const FluidParams& params);

/// Aitken delta-squared extrapolation of (a0, a1, a2).
double aitken_extrapolate(double a0, double a1, double a2);

/// Mean of p over the inlet facets minus the mean over the outlet facets.
double pressure_drop(const Field& p);

/// || a - b || / || reference || in the given norm (absolute when reference
/// is null); symmetric in a and b.
double field_difference(const Field& a, const Field& b, NormKind kind,
                        const Field* reference = nullptr);

struct ForceRecord {
  double U = 0, nu = 0, alpha1 = 0, alpha2 = 0, alpha = 0, theta = 0;
  double F = 0, F_over_U = 0;
  int iters = 0;
  bool converged = false;
  int r_u = 0, r_b = 0, r_p = 0;
};

extern const char* kForceRecordHeader;

void write_force_records(const std::vector<ForceRecord>& records, std::ostream& os);
void write_force_records_file(const std::vector<ForceRecord>& records, const std::string& path);
std::vector<ForceRecord> read_force_records(std::istream& is);
std::vector<ForceRecord> read_force_records_file(const std::string& path);

}  // namespace g2duct

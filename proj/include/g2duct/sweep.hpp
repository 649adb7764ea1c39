#pragma once

#include <optional>
#include <string>
#include <vector>

#include "g2duct/observables.hpp"

namespace g2duct {

/// Parameter grid for force sweeps; the alpha block is given in polar form
/// theta as multiples of pi (stored as plain radians).
struct SweepGrid {
  std::vector<double> U_values;
  std::vector<double> nu_values{1.0};
  std::vector<double> alpha_values;
  std::vector<double> theta_values;
  bool warm_start = false;  // reuse the nearest-U transport iterate

  bool empty() const {
    return U_values.empty() || nu_values.empty() || alpha_values.empty() || theta_values.empty();
  }
  void validate() const;
};

/// One grade-two solve + force evaluation per grid point, in grid order
/// (nu, alpha, theta, U); non-converged points are flagged, not dropped.
/// Grid points run concurrently up to `workers`.
std::vector<ForceRecord> run_sweep(const SweepGrid& grid, const DuctGeometry& geom,
                                   const SolverConfig& cfg, const AAConfig& aa, const Mesh& mesh,
                                   int workers = 1);

struct FitResult {
  int degree = 0;
  std::vector<double> coefficients;  // ascending powers
  std::vector<double> residuals;     // f_i - fit(U_i)
  double max_abs_residual = 0.0;

  double evaluate(double x) const;
};

/// Least-squares polynomial fit of degree d to (x_i, f_i).
FitResult fit_polynomial(const std::vector<double>& x, const std::vector<double>& f, int degree);

struct CrossingResult {
  double theta_cross = 0.0;
  double f_at_cross = 0.0;
};

/// Intersection of the secant lines through the first/last theta samples of
/// f at two alpha levels; throws ParallelLinesError for equal slopes.
CrossingResult find_crossing(const std::vector<double>& thetas, const std::vector<double>& f_low,
                             const std::vector<double>& f_high);

struct SymmetryResult {
  double theta_S = 0.0;
  double score = 0.0;  // mean squared reflected mismatch at theta_S
};

/// Axis minimizing the reflected-pair mismatch of f(theta) with
/// piecewise-linear interpolation for off-grid reflections.
SymmetryResult find_symmetry_axis(const std::vector<double>& thetas,
                                  const std::vector<double>& f);

struct IdentifiabilityReport {
  std::optional<double> crossing_theta;     // alpha-indistinguishable point
  double crossing_f = 0.0;
  std::optional<double> symmetry_theta;     // fold ambiguity axis
  double symmetry_score = 0.0;
  double theta_lo = 0.0, theta_hi = 0.0;    // implied identifiable interval
  bool alpha_identifiable_anywhere = true;
  std::string text;                          // human-readable summary
};

/// Desk-scale identifiability analysis over records at the smallest U and
/// at least two alpha magnitudes; sensitivity_tol is the relative f
/// difference treated as resolvable.
IdentifiabilityReport identifiable_range_report(const std::vector<ForceRecord>& records,
                                                double sensitivity_tol = 1e-6);

/// Plot-ready (x, y) series files: f vs theta per (alpha, U) and f vs U per
/// (alpha, theta), written under out_dir.
void write_series_files(const std::vector<ForceRecord>& records, const std::string& out_dir);

}  // namespace g2duct

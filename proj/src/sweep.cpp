#include "g2duct/sweep.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "g2duct/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace g2duct {

void SweepGrid::validate() const {
  for (double u : U_values)
    if (!(u > 0.0)) throw std::invalid_argument("sweep grid: U values must be positive");
}

std::vector<ForceRecord> run_sweep(const SweepGrid& grid, const DuctGeometry& geom,
                                   const SolverConfig& cfg, const AAConfig& aa, const Mesh& mesh,
                                   int workers) {
  grid.validate();
  std::vector<std::array<double, 4>> points;  // (nu, alpha, theta, U)
  for (double nu : grid.nu_values)
    for (double alpha : grid.alpha_values)
      for (double theta : grid.theta_values)
        for (double U : grid.U_values) points.push_back({nu, alpha, theta, U});

  std::vector<ForceRecord> records(points.size());
  if (points.empty()) return records;

  mesh.topology();  // build the shared cache before going parallel

  workers = std::max(1, workers);
  auto solve_point = [&](size_t i, const std::vector<double>* w0) -> std::vector<double> {
    const auto& pt = points[i];
    FluidParams params = FluidParams::from_polar(pt[0], pt[1], pt[2], pt[3]);
    ForceRecord rec;
    rec.nu = pt[0];
    rec.alpha = pt[1];
    rec.theta = pt[2];
    rec.U = pt[3];
    rec.alpha1 = params.alpha1;
    rec.alpha2 = params.alpha2;
    rec.r_u = mesh.r_u;
    rec.r_b = mesh.r_b;
    rec.r_p = mesh.r_p;
    std::vector<double> w_out;
    try {
      FlowState st = solve_grade2_with_data(mesh, params, duct_boundary_data(geom, params), cfg,
                                            aa, w0);
      rec.F = force_integral(st, params);
      rec.F_over_U = rec.F / rec.U;
      rec.iters = st.outer_iterations;
      rec.converged = st.converged;
      w_out = st.w.coeffs;
    } catch (const std::runtime_error&) {
      rec.F = std::nan("");
      rec.F_over_U = std::nan("");
      rec.iters = cfg.outer_max;
      rec.converged = false;
    }
    records[i] = rec;
    return w_out;
  };

  if (!grid.warm_start) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
    for (long i = 0; i < static_cast<long>(points.size()); ++i) solve_point(i, nullptr);
    return records;
  }

  // warm start: within each (nu, alpha, theta) line, walk U in ascending
  // order reusing the previous transport iterate
  const long nU = static_cast<long>(grid.U_values.size());
  const long ngroups = static_cast<long>(points.size()) / nU;
  std::vector<size_t> u_order(nU);
  for (long k = 0; k < nU; ++k) u_order[k] = k;
  std::sort(u_order.begin(), u_order.end(),
            [&](size_t a, size_t b) { return grid.U_values[a] < grid.U_values[b]; });

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
  for (long g = 0; g < ngroups; ++g) {
    std::vector<double> w_prev;
    for (long k = 0; k < nU; ++k) {
      size_t i = static_cast<size_t>(g) * nU + u_order[k];
      std::vector<double> w = solve_point(i, w_prev.empty() ? nullptr : &w_prev);
      if (!w.empty()) w_prev = std::move(w);
    }
  }
  return records;
}

// ---------------------------------------------------------------------------

double FitResult::evaluate(double x) const {
  double y = 0.0, p = 1.0;
  for (double c : coefficients) {
    y += c * p;
    p *= x;
  }
  return y;
}

FitResult fit_polynomial(const std::vector<double>& x, const std::vector<double>& f, int degree) {
  const int n = static_cast<int>(x.size());
  if (n != static_cast<int>(f.size())) throw std::invalid_argument("fit: size mismatch");
  if (n <= degree) throw std::invalid_argument("fit: need more samples than the degree");

  Eigen::MatrixXd V(n, degree + 1);
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      V(i, j) = p;
      p *= x[i];
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
  if (qr.rank() < degree + 1)
    throw std::invalid_argument("fit: rank-deficient sample set (duplicate abscissae)");
  Eigen::VectorXd fe = Eigen::Map<const Eigen::VectorXd>(f.data(), n);
  Eigen::VectorXd c = qr.solve(fe);

  FitResult out;
  out.degree = degree;
  out.coefficients.assign(c.data(), c.data() + degree + 1);
  out.residuals.resize(n);
  for (int i = 0; i < n; ++i) {
    out.residuals[i] = f[i] - out.evaluate(x[i]);
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(out.residuals[i]));
  }
  return out;
}

CrossingResult find_crossing(const std::vector<double>& thetas, const std::vector<double>& f_low,
                             const std::vector<double>& f_high) {
  if (thetas.size() < 2 || f_low.size() != thetas.size() || f_high.size() != thetas.size())
    throw std::invalid_argument("crossing: need matching samples at >= 2 thetas");
  const double tL = thetas.front(), tR = thetas.back();
  if (tL == tR) throw std::invalid_argument("crossing: degenerate theta span");
  const double sl = (f_low.back() - f_low.front()) / (tR - tL);
  const double sh = (f_high.back() - f_high.front()) / (tR - tL);
  const double ds = sh - sl;
  const double scale = std::max({std::abs(sl), std::abs(sh), 1e-300});
  if (std::abs(ds) < 1e-14 * scale)
    throw ParallelLinesError("crossing: interpolant slopes are equal");
  CrossingResult out;
  out.theta_cross = tL + (f_low.front() - f_high.front()) / ds;
  out.f_at_cross = f_low.front() + sl * (out.theta_cross - tL);
  return out;
}

namespace {

double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  size_t hi = it - xs.begin();
  size_t lo = hi - 1;
  double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

double reflection_score(const std::vector<double>& xs, const std::vector<double>& ys, double axis) {
  double sum = 0.0;
  int count = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double refl = 2.0 * axis - xs[i];
    if (refl < xs.front() - 1e-12 || refl > xs.back() + 1e-12) continue;
    double d = ys[i] - interp_linear(xs, ys, refl);
    sum += d * d;
    ++count;
  }
  return count >= 2 ? sum / count : std::numeric_limits<double>::infinity();
}

}  // namespace

SymmetryResult find_symmetry_axis(const std::vector<double>& thetas, const std::vector<double>& f) {
  if (thetas.size() < 3 || f.size() != thetas.size())
    throw std::invalid_argument("symmetry: need >= 3 samples");
  std::vector<size_t> order(thetas.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return thetas[a] < thetas[b]; });
  std::vector<double> xs, ys;
  for (size_t i : order) {
    xs.push_back(thetas[i]);
    ys.push_back(f[i]);
  }
  const double span = xs.back() - xs.front();
  if (!(span > 0.0)) throw std::invalid_argument("symmetry: insufficient span");

  const double lo = xs.front() + 0.2 * span;
  const double hi = xs.back() - 0.2 * span;
  const int ncand = 801;
  double best_axis = lo, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ncand; ++i) {
    double axis = lo + (hi - lo) * i / (ncand - 1);
    double s = reflection_score(xs, ys, axis);
    if (s < best) {
      best = s;
      best_axis = axis;
    }
  }
  // local ternary refinement
  double a = best_axis - (hi - lo) / (ncand - 1), b = best_axis + (hi - lo) / (ncand - 1);
  for (int it = 0; it < 120; ++it) {
    double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if (reflection_score(xs, ys, m1) < reflection_score(xs, ys, m2)) b = m2;
    else a = m1;
  }
  SymmetryResult out;
  out.theta_S = 0.5 * (a + b);
  out.score = reflection_score(xs, ys, out.theta_S);
  if (best < out.score) {
    out.theta_S = best_axis;
    out.score = best;
  }
  return out;
}

IdentifiabilityReport identifiable_range_report(const std::vector<ForceRecord>& records,
                                                double sensitivity_tol) {
  IdentifiabilityReport rep;
  if (records.empty()) throw std::invalid_argument("identifiability: no records");

  // restrict to the smallest U and nu present
  double Umin = records.front().U, nu0 = records.front().nu;
  for (const auto& r : records) {
    Umin = std::min(Umin, r.U);
    nu0 = std::min(nu0, r.nu);
  }
  std::map<double, std::map<double, double>> by_theta;  // theta -> alpha -> f
  for (const auto& r : records) {
    if (r.U != Umin || r.nu != nu0 || !r.converged) continue;
    by_theta[r.theta][r.alpha] = r.F_over_U;
  }
  if (by_theta.size() < 2)
    throw std::invalid_argument("identifiability: need a theta grid at the smallest U");

  std::vector<double> thetas, spread, f_lo, f_hi, f_any;
  double fscale = 0.0;
  for (const auto& [theta, m] : by_theta) {
    if (m.size() < 2) continue;
    thetas.push_back(theta);
    f_lo.push_back(m.begin()->second);
    f_hi.push_back(m.rbegin()->second);
    spread.push_back(m.rbegin()->second - m.begin()->second);
    f_any.push_back(m.rbegin()->second);
    fscale = std::max(fscale, std::abs(m.begin()->second));
  }
  if (thetas.size() < 2)
    throw std::invalid_argument("identifiability: need >= 2 alpha magnitudes per theta");

  bool anywhere = false;
  for (double s : spread)
    if (std::abs(s) > sensitivity_tol * fscale) anywhere = true;
  rep.alpha_identifiable_anywhere = anywhere;

  // crossing: sign change of the alpha spread across the theta grid
  for (size_t i = 0; i + 1 < thetas.size(); ++i) {
    if (spread[i] == 0.0 || spread[i] * spread[i + 1] < 0.0) {
      std::vector<double> th = {thetas[i], thetas[i + 1]};
      try {
        auto cr = find_crossing(th, {f_lo[i], f_lo[i + 1]}, {f_hi[i], f_hi[i + 1]});
        rep.crossing_theta = cr.theta_cross;
        rep.crossing_f = cr.f_at_cross;
      } catch (const ParallelLinesError&) {
      }
      break;
    }
  }

  if (thetas.size() >= 3) {
    auto sym = find_symmetry_axis(thetas, f_any);
    rep.symmetry_score = sym.score;
    // only claim an axis when the reflected mismatch is small against f
    if (sym.score < std::pow(10.0 * sensitivity_tol * std::max(fscale, 1.0), 2))
      rep.symmetry_theta = sym.theta_S;
  }

  rep.theta_lo = rep.crossing_theta ? *rep.crossing_theta : thetas.front();
  rep.theta_hi = rep.symmetry_theta ? *rep.symmetry_theta : thetas.back();

  std::ostringstream os;
  os << "identifiability report (U = " << Umin << ", nu = " << nu0 << ")\n";
  if (!anywhere) {
    os << "  alpha magnitude not identifiable anywhere on the sampled grid\n";
  } else {
    if (rep.crossing_theta)
      os << "  crossing (alpha-indistinguishable) at theta = " << *rep.crossing_theta
         << " (theta/(pi/8) = " << *rep.crossing_theta / (M_PI / 8.0) << "), f = " << rep.crossing_f
         << "\n";
    else
      os << "  no crossing detected on the sampled grid\n";
    if (rep.symmetry_theta)
      os << "  symmetry axis at theta = " << *rep.symmetry_theta
         << " (theta/(pi/16) = " << *rep.symmetry_theta / (M_PI / 16.0)
         << "), score = " << rep.symmetry_score << "\n";
    else
      os << "  no symmetry axis detected (best score " << rep.symmetry_score << ")\n";
    os << "  implied identifiable range: theta in (" << rep.theta_lo << ", " << rep.theta_hi
       << "]\n";
  }
  rep.text = os.str();
  return rep;
}

void write_series_files(const std::vector<ForceRecord>& records, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  // f vs theta for each (nu, alpha, U); f vs U for each (nu, alpha, theta)
  std::map<std::tuple<double, double, double>, std::vector<std::pair<double, double>>> vs_theta,
      vs_U;
  for (const auto& r : records) {
    if (!r.converged) continue;
    vs_theta[{r.nu, r.alpha, r.U}].push_back({r.theta, r.F_over_U});
    vs_U[{r.nu, r.alpha, r.theta}].push_back({r.U, r.F_over_U});
  }
  auto dump = [&](const auto& groups, const std::string& prefix, const char* xname) {
    int idx = 0;
    for (const auto& [key, pts] : groups) {
      auto sorted = pts;
      std::sort(sorted.begin(), sorted.end());
      std::ofstream os(fs::path(out_dir) /
                       (prefix + "_" + std::to_string(idx++) + ".dat"));
      os << "# nu=" << std::get<0>(key) << " alpha=" << std::get<1>(key) << " "
         << (prefix == "f_vs_theta" ? "U=" : "theta=") << std::get<2>(key) << "\n";
      os << "# " << xname << " f\n";
      for (auto [x, y] : sorted) os << x << " " << y << "\n";
    }
  };
  dump(vs_theta, "f_vs_theta", "theta");
  dump(vs_U, "f_vs_U", "U");
}

}  // namespace g2duct

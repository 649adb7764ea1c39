// Serial reference vs OpenMP cell-parallel kernels on a refined duct mesh:
// assembly of the penalized Stokes operator, the transport operator, the
// div N load, and the H1 norm.  The two paths must agree bit for bit.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "g2duct/analytic.hpp"
#include "g2duct/assembly.hpp"
#include "g2duct/grade2.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace g2duct;
using Clock = std::chrono::steady_clock;

namespace {

double seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = Clock::now();
    f();
    best = std::min(best, seconds(t0, Clock::now()));
  }
  return best;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  int r_b = argc > 1 ? std::atoi(argv[1]) : 4;
  int reps = argc > 2 ? std::atoi(argv[2]) : 3;

  DuctGeometry geom(1, 1, 1, 0.5);
  Mesh mesh = build_base_mesh(geom, 2, SplitKind::CrossedTriangle);
  for (int i = 0; i < r_b; ++i) mesh = refine_boundary(mesh, geom);
  for (int i = 0; i < r_b; ++i) mesh = refine_points(mesh, geom);
  FunctionSpace V = FunctionSpace::velocity(mesh, 4);
  FunctionSpace P = FunctionSpace::pressure(mesh, 4);
  std::printf("mesh: %d cells, velocity dofs %d", mesh.num_cells(), V.num_dofs());
#ifdef _OPENMP
  std::printf(", omp threads %d\n", omp_get_max_threads());
#else
  std::printf(", no OpenMP\n");
#endif

  FluidParams params = FluidParams::cartesian(1.0, 0.1, 0.1, 0.25);
  Field u = interpolate(V, [&](const Point2& x, double* out) {
    out[0] = params.U * (1.0 - x[1] * x[1]);
    out[1] = 0.1 * x[0] * x[1];
  });
  Field pi = interpolate(P, [&](const Point2& x, double* out) { out[0] = -2.0 * x[0] * x[1]; });

  struct Row {
    const char* name;
    double t_serial, t_parallel;
    bool identical;
  };
  std::vector<Row> rows;

  auto bench = [&](const char* name, auto&& compute) {
    set_parallel_assembly(false);
    auto ref = compute();
    double ts = time_best_of(reps, [&] { compute(); });
    set_parallel_assembly(true);
    auto par = compute();
    double tp = time_best_of(reps, [&] { compute(); });
    rows.push_back({name, ts, tp, bit_equal(ref, par)});
  };

  bench("stokes operator", [&] {
    return assemble_operator(V, 1.0, 1e4, 0.0, 8).values();
  });
  bench("transport operator", [&] {
    return assemble_transport_operator(V, u, 1.0, 0.1, 10).values();
  });
  bench("div N load", [&] { return assemble_N_divergence(u, pi, params, V); });
  bench("H1 norm", [&] { return std::vector<double>{norm(u, NormKind::H1)}; });

  std::printf("%-20s %12s %12s %9s %s\n", "kernel", "serial [s]", "parallel [s]", "speedup",
              "bit-identical");
  bool all_ok = true;
  for (const auto& r : rows) {
    std::printf("%-20s %12.4f %12.4f %8.2fx %s\n", r.name, r.t_serial, r.t_parallel,
                r.t_serial / r.t_parallel, r.identical ? "yes" : "NO");
    all_ok = all_ok && r.identical;
  }
  set_parallel_assembly(true);
  return all_ok ? 0 : 1;
}

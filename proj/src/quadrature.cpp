#include "g2duct/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace g2duct {

void gauss_legendre_unit(int npts, std::vector<double>& x, std::vector<double>& w) {
  if (npts < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  x.resize(npts);
  w.resize(npts);
  // Newton iteration on P_n over [-1,1], then map to [0,1]
  for (int i = 0; i < npts; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (npts + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= npts; ++k) {
        double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = npts * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= npts; ++k) {
      double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = npts * (t * p1 - p0) / (t * t - 1.0);
    x[i] = 0.5 * (1.0 - t);  // reversed so points come out increasing
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

const EdgeRule& edge_rule(int order) {
  static std::map<int, EdgeRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  if (order < 1) throw std::invalid_argument("edge_rule: order must be >= 1");
  int m = (order + 2) / 2;
  EdgeRule r;
  gauss_legendre_unit(m, r.points, r.weights);
  return cache.emplace(order, std::move(r)).first->second;
}

const QuadRule& triangle_rule(int order) {
  static std::map<int, QuadRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  if (order < 1) throw std::invalid_argument("triangle_rule: order must be >= 1");

  QuadRule r;
  if (order == 1) {
    r.points = {{1.0 / 3.0, 1.0 / 3.0}};
    r.weights = {0.5};
  } else {
    // conical product: x = xi, y = eta (1 - xi); the (1 - xi) Jacobian raises
    // the xi-degree by one
    int m = (order + 3) / 2;
    std::vector<double> gx, gw;
    gauss_legendre_unit(m, gx, gw);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        double xi = gx[i], eta = gx[j];
        r.points.push_back({xi, eta * (1.0 - xi)});
        r.weights.push_back(gw[i] * gw[j] * (1.0 - xi));
      }
    }
  }
  return cache.emplace(order, std::move(r)).first->second;
}

}  // namespace g2duct

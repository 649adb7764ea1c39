#include "g2duct/basis.hpp"

#include <Eigen/Dense>
#include <map>
#include <mutex>
#include <stdexcept>

namespace g2duct {

LagrangeBasis::LagrangeBasis(int degree) : degree_(degree) {
  if (degree < 1 || degree > 4)
    throw std::invalid_argument("LagrangeBasis: degree must be in 1..4");
  const int k = degree;
  const double h = 1.0 / k;

  // vertices (0,0), (1,0), (0,1)
  nodes_.push_back({0.0, 0.0});
  nodes_.push_back({1.0, 0.0});
  nodes_.push_back({0.0, 1.0});
  // edges v0->v1, v1->v2, v2->v0
  for (int i = 1; i < k; ++i) nodes_.push_back({i * h, 0.0});
  for (int i = 1; i < k; ++i) nodes_.push_back({1.0 - i * h, i * h});
  for (int i = 1; i < k; ++i) nodes_.push_back({0.0, 1.0 - i * h});
  // interior lattice
  for (int a = 1; a < k; ++a)
    for (int b = 1; a + b < k; ++b) nodes_.push_back({a * h, b * h});

  for (int d = 0; d <= k; ++d)
    for (int a = d; a >= 0; --a) monomials_.push_back({a, d - a});

  const int n = size();
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < n; ++m)
      V(i, m) = std::pow(nodes_[i][0], monomials_[m][0]) * std::pow(nodes_[i][1], monomials_[m][1]);
  Eigen::MatrixXd C = V.fullPivLu().inverse();  // phi_i = sum_m C(m,i) x^a y^b
  coeff_.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < n; ++m) coeff_[i][m] = C(m, i);
}

void LagrangeBasis::eval(const Point2& p, std::vector<double>& values) const {
  const int n = size();
  values.assign(n, 0.0);
  std::vector<double> mono(n);
  for (int m = 0; m < n; ++m)
    mono[m] = std::pow(p[0], monomials_[m][0]) * std::pow(p[1], monomials_[m][1]);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int m = 0; m < n; ++m) s += coeff_[i][m] * mono[m];
    values[i] = s;
  }
}

namespace {
inline double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}
}  // namespace

void LagrangeBasis::eval_grad(const Point2& p, std::vector<Point2>& grads) const {
  const int n = size();
  grads.assign(n, {0.0, 0.0});
  std::vector<Point2> dmono(n);
  for (int m = 0; m < n; ++m) {
    int a = monomials_[m][0], b = monomials_[m][1];
    dmono[m][0] = a > 0 ? a * ipow(p[0], a - 1) * ipow(p[1], b) : 0.0;
    dmono[m][1] = b > 0 ? b * ipow(p[0], a) * ipow(p[1], b - 1) : 0.0;
  }
  for (int i = 0; i < n; ++i) {
    double gx = 0.0, gy = 0.0;
    for (int m = 0; m < n; ++m) {
      gx += coeff_[i][m] * dmono[m][0];
      gy += coeff_[i][m] * dmono[m][1];
    }
    grads[i] = {gx, gy};
  }
}

void LagrangeBasis::eval_hess(const Point2& p, std::vector<std::array<double, 3>>& hess) const {
  const int n = size();
  hess.assign(n, {0.0, 0.0, 0.0});
  std::vector<std::array<double, 3>> d2(n);
  for (int m = 0; m < n; ++m) {
    int a = monomials_[m][0], b = monomials_[m][1];
    d2[m][0] = a > 1 ? a * (a - 1) * ipow(p[0], a - 2) * ipow(p[1], b) : 0.0;
    d2[m][1] = (a > 0 && b > 0) ? a * b * ipow(p[0], a - 1) * ipow(p[1], b - 1) : 0.0;
    d2[m][2] = b > 1 ? b * (b - 1) * ipow(p[0], a) * ipow(p[1], b - 2) : 0.0;
  }
  for (int i = 0; i < n; ++i) {
    double xx = 0.0, xy = 0.0, yy = 0.0;
    for (int m = 0; m < n; ++m) {
      xx += coeff_[i][m] * d2[m][0];
      xy += coeff_[i][m] * d2[m][1];
      yy += coeff_[i][m] * d2[m][2];
    }
    hess[i] = {xx, xy, yy};
  }
}

const LagrangeBasis& LagrangeBasis::get(int degree) {
  static std::map<int, LagrangeBasis> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, LagrangeBasis(degree)).first;
  return it->second;
}

}  // namespace g2duct

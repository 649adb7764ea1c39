#pragma once

#include <array>

namespace g2duct {

/// div N(u, pi) for the transformed system, evaluated pointwise from field
/// derivatives:
///   N(u,pi) = -alpha1 pi (grad u)^T + tau,
///   tau = alpha1 (grad u)^T A + (alpha1+alpha2) A A - u (x) u,  A = grad u + (grad u)^T,
///   div N = -alpha1 (grad u)^T grad pi + div tau   (using div u = 0).
/// Conventions: grad_u[i][j] = du_i/dx_j; hess_u[c][a][b] = d2 u_c / dx_a dx_b.
template <int Dim>
std::array<double, Dim> divergence_of_N(
    const std::array<double, Dim>& u,
    const std::array<std::array<double, Dim>, Dim>& grad_u,
    const std::array<std::array<std::array<double, Dim>, Dim>, Dim>& hess_u,
    const std::array<double, Dim>& grad_pi, double alpha1, double alpha2) {
  std::array<std::array<double, Dim>, Dim> A{};
  for (int i = 0; i < Dim; ++i)
    for (int j = 0; j < Dim; ++j) A[i][j] = grad_u[i][j] + grad_u[j][i];

  // dA[k][j][l] = d A_kj / dx_l
  auto dA = [&](int k, int j, int l) { return hess_u[k][j][l] + hess_u[j][k][l]; };

  double divu = 0.0;
  for (int i = 0; i < Dim; ++i) divu += grad_u[i][i];

  std::array<double, Dim> out{};
  for (int i = 0; i < Dim; ++i) {
    double s = 0.0;
    // -alpha1 ((grad u)^T grad pi)_i = -alpha1 sum_j du_j/dx_i dpi/dx_j
    for (int j = 0; j < Dim; ++j) s -= alpha1 * grad_u[j][i] * grad_pi[j];

    for (int j = 0; j < Dim; ++j) {
      // d_j [ alpha1 sum_k (du_k/dx_i) A_kj ]
      for (int k = 0; k < Dim; ++k)
        s += alpha1 * (hess_u[k][i][j] * A[k][j] + grad_u[k][i] * dA(k, j, j));
      // d_j [ (alpha1+alpha2) sum_k A_ik A_kj ]
      for (int k = 0; k < Dim; ++k)
        s += (alpha1 + alpha2) * (dA(i, k, j) * A[k][j] + A[i][k] * dA(k, j, j));
      // -d_j [ u_i u_j ]
      s -= grad_u[i][j] * u[j];
    }
    s -= u[i] * divu;
    out[i] = s;
  }
  return out;
}

}  // namespace g2duct

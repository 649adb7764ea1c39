#pragma once

#include <Eigen/Dense>
#include <vector>

namespace g2duct {

struct AAConfig {
  int m_max = 5;
  double sigma_min = 0.1;
  double sigma_max = 0.7071067811865476;  // 2^{-1/2}
  double beta = 1.0;                      // damping, 1 = undamped

  void validate() const;
};

/// Direction sines of the columns of F against the span of the columns to
/// their left: sigma_1 = 1 by convention, sigma_i = |r_ii| / ||f_i||.  A zero
/// column reports 0.
std::vector<double> direction_sines(const Eigen::MatrixXd& F);

/// Angle filter: drop every column i >= 2 of F with |r_ii|/||f_i|| below the
/// dynamic threshold sigma = max(min(sigma_max, ||delta_u||^{1/2}), sigma_min),
/// removing the same columns from all four histories, then solve the
/// least-squares problem min ||delta_u - F gamma|| on the survivors.
/// Histories are stored newest column first.
Eigen::VectorXd filter_histories(std::vector<Eigen::VectorXd>& EU, std::vector<Eigen::VectorXd>& FU,
                                 const Eigen::VectorXd& delta_u, std::vector<Eigen::VectorXd>& EZ,
                                 std::vector<Eigen::VectorXd>& FZ, int& m, const AAConfig& cfg);

/// Filtered Anderson acceleration of the paired (U, Z) iterate sequences,
/// with the extrapolation coefficients determined by U alone.
class AndersonAccelerator {
 public:
  AndersonAccelerator(int dim_u, int dim_z, const AAConfig& cfg);

  /// Feed the fixed-point outputs (u_hat, z_hat); returns the next accepted
  /// iterates through the same arguments.
  void step(std::vector<double>& u_hat, std::vector<double>& z_hat);

  int depth() const { return m_; }
  int depth_after_filter() const { return m_after_filter_; }
  double last_sigma() const { return last_sigma_; }
  double last_gamma_norm() const { return last_gamma_norm_; }
  double last_delta_norm() const { return last_delta_norm_; }

 private:
  AAConfig cfg_;
  int dim_u_, dim_z_;
  int n_ = 0;  // completed steps
  int m_ = 0;
  int m_after_filter_ = 0;
  double last_sigma_ = 0.0, last_gamma_norm_ = 0.0, last_delta_norm_ = 0.0;

  Eigen::VectorXd u_acc_, z_acc_;      // X^n
  Eigen::VectorXd u_acc1_, z_acc1_;    // X^{n-1}
  Eigen::VectorXd du_prev_, dz_prev_;  // delta X^n
  std::vector<Eigen::VectorXd> EU_, FU_, EZ_, FZ_;
};

}  // namespace g2duct

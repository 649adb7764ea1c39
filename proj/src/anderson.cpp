#include "g2duct/anderson.hpp"

#include <cmath>
#include <stdexcept>

namespace g2duct {

void AAConfig::validate() const {
  if (m_max < 0) throw std::invalid_argument("aa config: m_max must be >= 0");
  if (!(sigma_min >= 0.0) || !(sigma_min < sigma_max) || !(sigma_max < 1.0))
    throw std::invalid_argument("aa config: need 0 <= sigma_min < sigma_max < 1");
  if (!(beta > 0.0) || beta > 1.0) throw std::invalid_argument("aa config: beta in (0,1]");
}

namespace {

Eigen::MatrixXd to_matrix(const std::vector<Eigen::VectorXd>& cols) {
  if (cols.empty()) return Eigen::MatrixXd();
  Eigen::MatrixXd M(cols[0].size(), cols.size());
  for (size_t j = 0; j < cols.size(); ++j) M.col(j) = cols[j];
  return M;
}

}  // namespace

std::vector<double> direction_sines(const Eigen::MatrixXd& F) {
  const int m = static_cast<int>(F.cols());
  if (m == 0) throw std::invalid_argument("direction_sines: empty F");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(F);
  Eigen::MatrixXd R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  std::vector<double> sines(m);
  sines[0] = F.col(0).norm() > 0.0 ? 1.0 : 0.0;
  for (int i = 1; i < m; ++i) {
    double fn = F.col(i).norm();
    sines[i] = fn > 0.0 ? std::abs(R(i, i)) / fn : 0.0;
  }
  return sines;
}

Eigen::VectorXd filter_histories(std::vector<Eigen::VectorXd>& EU, std::vector<Eigen::VectorXd>& FU,
                                 const Eigen::VectorXd& delta_u, std::vector<Eigen::VectorXd>& EZ,
                                 std::vector<Eigen::VectorXd>& FZ, int& m, const AAConfig& cfg) {
  if (m == 0) return Eigen::VectorXd();
  const double sigma =
      std::max(std::min(cfg.sigma_max, std::sqrt(delta_u.norm())), cfg.sigma_min);

  Eigen::MatrixXd F = to_matrix(FU);
  std::vector<double> sines = direction_sines(F);
  std::vector<int> keep;
  for (int i = 0; i < m; ++i)
    if (i == 0 || sines[i] >= sigma) keep.push_back(i);

  if (static_cast<int>(keep.size()) < m) {
    auto prune = [&](std::vector<Eigen::VectorXd>& H) {
      std::vector<Eigen::VectorXd> out;
      out.reserve(keep.size());
      for (int i : keep) out.push_back(std::move(H[i]));
      H = std::move(out);
    };
    prune(EU);
    prune(FU);
    prune(EZ);
    prune(FZ);
    m = static_cast<int>(keep.size());
    F = to_matrix(FU);
  }

  // gamma from the thin QR of the surviving F
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(F);
  Eigen::MatrixXd R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  Eigen::MatrixXd Qthin = qr.householderQ() * Eigen::MatrixXd::Identity(F.rows(), m);
  Eigen::VectorXd rhs = Qthin.transpose() * delta_u;
  Eigen::VectorXd gamma =
      R.triangularView<Eigen::Upper>().solve(rhs);
  if (!gamma.allFinite()) gamma.setZero();
  return gamma;
}

AndersonAccelerator::AndersonAccelerator(int dim_u, int dim_z, const AAConfig& cfg)
    : cfg_(cfg), dim_u_(dim_u), dim_z_(dim_z) {
  cfg.validate();
  u_acc_ = Eigen::VectorXd::Zero(dim_u);
  z_acc_ = Eigen::VectorXd::Zero(dim_z);
}

void AndersonAccelerator::step(std::vector<double>& u_hat, std::vector<double>& z_hat) {
  if (static_cast<int>(u_hat.size()) != dim_u_ || static_cast<int>(z_hat.size()) != dim_z_)
    throw std::invalid_argument("anderson: iterate dimension mismatch");

  Eigen::Map<Eigen::VectorXd> uh(u_hat.data(), dim_u_);
  Eigen::Map<Eigen::VectorXd> zh(z_hat.data(), dim_z_);

  Eigen::VectorXd du = uh - u_acc_;
  Eigen::VectorXd dz = zh - z_acc_;
  last_delta_norm_ = du.norm();

  if (cfg_.m_max > 0 && n_ >= 1) {
    EU_.insert(EU_.begin(), u_acc_ - u_acc1_);
    FU_.insert(FU_.begin(), du - du_prev_);
    EZ_.insert(EZ_.begin(), z_acc_ - z_acc1_);
    FZ_.insert(FZ_.begin(), dz - dz_prev_);
    m_ = static_cast<int>(FU_.size());
    if (m_ > cfg_.m_max) {
      EU_.pop_back();
      FU_.pop_back();
      EZ_.pop_back();
      FZ_.pop_back();
      m_ = cfg_.m_max;
    }
  }

  Eigen::VectorXd u_next, z_next;
  if (m_ == 0) {
    if (cfg_.beta == 1.0) {
      // depth 0, no damping: exactly the original fixed-point iteration
      u_next = uh;
      z_next = zh;
    } else {
      u_next = u_acc_ + cfg_.beta * du;
      z_next = z_acc_ + cfg_.beta * dz;
    }
    m_after_filter_ = 0;
    last_sigma_ = 0.0;
    last_gamma_norm_ = 0.0;
  } else {
    Eigen::VectorXd gamma = filter_histories(EU_, FU_, du, EZ_, FZ_, m_, cfg_);
    m_after_filter_ = m_;
    last_sigma_ = std::max(std::min(cfg_.sigma_max, std::sqrt(du.norm())), cfg_.sigma_min);
    last_gamma_norm_ = gamma.size() ? gamma.norm() : 0.0;
    u_next = u_acc_ + cfg_.beta * du;
    z_next = z_acc_ + cfg_.beta * dz;
    for (int j = 0; j < m_; ++j) {
      u_next -= (EU_[j] + cfg_.beta * FU_[j]) * gamma(j);
      z_next -= (EZ_[j] + cfg_.beta * FZ_[j]) * gamma(j);
    }
  }

  u_acc1_ = u_acc_;
  z_acc1_ = z_acc_;
  du_prev_ = du;
  dz_prev_ = dz;
  u_acc_ = u_next;
  z_acc_ = z_next;
  ++n_;

  Eigen::Map<Eigen::VectorXd>(u_hat.data(), dim_u_) = u_next;
  Eigen::Map<Eigen::VectorXd>(z_hat.data(), dim_z_) = z_next;
}

}  // namespace g2duct

#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace r2e::detail {

// Weighted least squares via column-pivoted QR on the sqrt(w)-scaled
// system. Returns nullopt when the design matrix is rank deficient.
inline std::optional<Eigen::VectorXd> weighted_least_squares(
    const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
    const Eigen::VectorXd& w) {
  if (design.rows() < design.cols()) return std::nullopt;
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd a = sw.asDiagonal() * design;
  const Eigen::VectorXd b = sw.cwiseProduct(y);
  // Column scaling keeps the rank test meaningful when regressors differ by
  // many orders of magnitude (k_dL ~ 1e-3 next to L ~ 1e2).
  Eigen::VectorXd scale = a.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j)
    if (scale[j] == 0.0) return std::nullopt;
  const Eigen::MatrixXd scaled = a * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) return std::nullopt;
  return Eigen::VectorXd(qr.solve(b).cwiseQuotient(scale));
}

}  // namespace r2e::detail

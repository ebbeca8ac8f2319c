#include <cmath>

#include "offload/error.hpp"
#include "offload/estimators.hpp"

namespace offload {

Scaler Scaler::fit(const Matrix& x) {
  Scaler s;
  const auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().sum().transpose() / n;
  s.scale = Vector::Ones(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean(c)).square().sum() / n;
    const double sd = std::sqrt(var);
    // Constant columns (up to rounding of the mean) pass through unscaled.
    if (sd > 1e-12 * std::max(std::abs(s.mean(c)), 1e-300)) s.scale(c) = sd;
  }
  return s;
}

Matrix Scaler::transform(const Matrix& x) const {
  Matrix z = x.rowwise() - mean.transpose();
  return z.array().rowwise() / scale.transpose().array();
}

Vector Scaler::transform(std::span<const double> x) const {
  Vector z(static_cast<Eigen::Index>(x.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z(i) = (x[static_cast<std::size_t>(i)] - mean(i)) / scale(i);
  }
  return z;
}

void check_training_data(const Matrix& x, const Vector& y) {
  if (x.rows() == 0) throw ConfigError("training data has no rows");
  if (x.cols() == 0) throw ConfigError("training data has no columns");
  if (x.rows() != y.size()) {
    throw DimensionError("design matrix has " + std::to_string(x.rows()) + " rows but " +
                         std::to_string(y.size()) + " targets");
  }
  if (!x.allFinite() || !y.allFinite()) throw ConfigError("training data contains non-finite values");
}

LinearModel fit_mlr(const Matrix& x, const Vector& y, double lambda) {
  check_training_data(x, y);
  if (!std::isfinite(lambda) || lambda < 0.0) throw ConfigError("ridge lambda must be >= 0");

  LinearModel m;
  m.ridge = std::max(lambda, kRidgeFloor);
  m.scaler = Scaler::fit(x);
  const Matrix z = m.scaler.transform(x);
  m.intercept = y.mean();
  const Vector yc = y.array() - m.intercept;

  Matrix gram = z.transpose() * z;
  gram.diagonal().array() += m.ridge;
  m.weights = gram.ldlt().solve(z.transpose() * yc);
  if (!m.weights.allFinite()) throw Error("ridge normal equations could not be solved");
  return m;
}

double LinearModel::predict(std::span<const double> x) const {
  double acc = intercept;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += weights(i) * (x[static_cast<std::size_t>(i)] - scaler.mean(i)) / scaler.scale(i);
  }
  return acc;
}

Vector LinearModel::coefficients() const {
  return weights.array() / scaler.scale.array();
}

double LinearModel::raw_intercept() const {
  return intercept - (weights.array() * scaler.mean.array() / scaler.scale.array()).sum();
}

}  // namespace offload

#include <cmath>
#include <limits>

#include "offload/error.hpp"
#include "offload/estimators.hpp"

namespace offload {

namespace {

constexpr double kTau = 1e-12;

double kernel_value(KernelType kernel, double gamma, const double* a, const double* b,
                    std::size_t d) {
  if (kernel == KernelType::Linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += a[i] * b[i];
    return dot;
  }
  double dist = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    dist += diff * diff;
  }
  return std::exp(-gamma * dist);
}

// Epsilon-SVR dual in the doubled form: variables t < n are alpha (label +1),
// t >= n are alpha* (label -1), minimising 1/2 a'Qa + p'a subject to sum y_t a_t = 0 and
// 0 <= a_t <= C, with Q_ts = y_t y_s K(t mod n, s mod n).
class SmoSolver {
 public:
  SmoSolver(const Matrix& kernel, const Vector& y, const SvrParams& params)
      : k_(kernel), n_(static_cast<std::size_t>(y.size())), c_(params.c), params_(params) {
    const std::size_t l = 2 * n_;
    alpha_.assign(l, 0.0);
    p_.resize(l);
    for (std::size_t i = 0; i < n_; ++i) {
      p_[i] = params.epsilon - y(static_cast<Eigen::Index>(i));
      p_[i + n_] = params.epsilon + y(static_cast<Eigen::Index>(i));
    }
    grad_ = p_;
  }

  SvrFitInfo solve() {
    SvrFitInfo info;
    info.iteration_cap = params_.max_passes * std::max<std::size_t>(n_, 1);
    const std::size_t l = 2 * n_;
    while (true) {
      // Maximal violating pair.
      double gmax = -std::numeric_limits<double>::infinity();
      double gmax2 = -std::numeric_limits<double>::infinity();
      std::size_t i = l, j = l;
      for (std::size_t t = 0; t < l; ++t) {
        const bool upper = alpha_[t] >= c_;
        const bool lower = alpha_[t] <= 0.0;
        if (label(t) > 0) {
          if (!upper && -grad_[t] >= gmax) { gmax = -grad_[t]; i = t; }
          if (!lower && grad_[t] >= gmax2) { gmax2 = grad_[t]; j = t; }
        } else {
          if (!lower && grad_[t] >= gmax) { gmax = grad_[t]; i = t; }
          if (!upper && -grad_[t] >= gmax2) { gmax2 = -grad_[t]; j = t; }
        }
      }
      info.max_violation = (i < l && j < l) ? gmax + gmax2 : 0.0;
      if (i >= l || j >= l || info.max_violation <= params_.tolerance) {
        info.converged = true;
        break;
      }
      if (info.iterations >= info.iteration_cap) break;
      ++info.iterations;
      update_pair(i, j);
      if (params_.record_objective) info.objective_trace.push_back(objective());
    }
    info.dual_objective = objective();
    return info;
  }

  /// Dual coefficient alpha_i - alpha*_i per training row.
  Vector coefficients() const {
    Vector c(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) c(static_cast<Eigen::Index>(i)) = alpha_[i] - alpha_[i + n_];
    return c;
  }

  double bias() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < 2 * n_; ++t) {
      const double yg = label(t) * grad_[t];
      if (alpha_[t] >= c_) {
        if (label(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (alpha_[t] <= 0.0) {
        if (label(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++free_count;
        free_sum += yg;
      }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
    return -rho;
  }

 private:
  double label(std::size_t t) const { return t < n_ ? 1.0 : -1.0; }
  std::size_t row(std::size_t t) const { return t < n_ ? t : t - n_; }
  double q(std::size_t t, std::size_t s) const {
    return label(t) * label(s) *
           k_(static_cast<Eigen::Index>(row(t)), static_cast<Eigen::Index>(row(s)));
  }

  void update_pair(std::size_t i, std::size_t j) {
    const double old_i = alpha_[i];
    const double old_j = alpha_[j];
    const double qii = q(i, i), qjj = q(j, j), qij = q(i, j);
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (label(i) != label(j)) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) { aj = 0.0; ai = diff; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = -diff; }
      }
      if (diff > 0.0) {
        if (ai > c_) { ai = c_; aj = c_ - diff; }
      } else {
        if (aj > c_) { aj = c_; ai = c_ + diff; }
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) { ai = c_; aj = sum - c_; }
      } else {
        if (aj < 0.0) { aj = 0.0; ai = sum; }
      }
      if (sum > c_) {
        if (aj > c_) { aj = c_; ai = sum - c_; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = sum; }
      }
    }
    const double di = ai - old_i;
    const double dj = aj - old_j;
    // Q_ti = y_t y_i K(t, i): the +1 half gains what the -1 half loses.
    const double* ki = k_.col(static_cast<Eigen::Index>(row(i))).data();
    const double* kj = k_.col(static_cast<Eigen::Index>(row(j))).data();
    const double wi = label(i) * di;
    const double wj = label(j) * dj;
    for (std::size_t t = 0; t < n_; ++t) {
      const double step = ki[t] * wi + kj[t] * wj;
      grad_[t] += step;
      grad_[t + n_] -= step;
    }
  }

  double objective() const {
    double v = 0.0;
    for (std::size_t t = 0; t < 2 * n_; ++t) v += alpha_[t] * (grad_[t] + p_[t]);
    return v / 2.0;
  }

  const Matrix& k_;
  std::size_t n_;
  double c_;
  const SvrParams& params_;
  std::vector<double> alpha_;
  std::vector<double> p_;
  std::vector<double> grad_;
};

}  // namespace

SvrModel fit_svr(const Matrix& x, const Vector& y, const SvrParams& params) {
  check_training_data(x, y);
  if (!(params.c > 0.0)) throw ConfigError("SVR box constraint C must be > 0");
  if (!(params.epsilon > 0.0)) throw ConfigError("SVR epsilon must be > 0");
  if (params.gamma && !(*params.gamma > 0.0)) throw ConfigError("SVR gamma must be > 0");
  if (!(params.tolerance > 0.0)) throw ConfigError("SVR tolerance must be > 0");

  SvrModel m;
  m.kernel = params.kernel;
  m.gamma = params.gamma.value_or(1.0 / static_cast<double>(x.cols()));
  m.c = params.c;
  m.epsilon = params.epsilon;
  m.scaler = Scaler::fit(x);
  // Row-major copy so each training row is contiguous for kernel evaluation.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> z =
      m.scaler.transform(x);
  const auto n = static_cast<std::size_t>(z.rows());
  const auto d = static_cast<std::size_t>(z.cols());

  Matrix kernel(z.rows(), z.rows());
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const double v = kernel_value(m.kernel, m.gamma, z.row(static_cast<Eigen::Index>(a)).data(),
                                    z.row(static_cast<Eigen::Index>(b)).data(), d);
      kernel(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      kernel(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  }

  SmoSolver solver(kernel, y, params);
  m.info = solver.solve();
  m.bias = solver.bias();

  const Vector coef = solver.coefficients();
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < coef.size(); ++i) {
    if (coef(i) != 0.0) support.push_back(i);
  }
  m.support_vectors.resize(static_cast<Eigen::Index>(support.size()), z.cols());
  m.coefficients.resize(static_cast<Eigen::Index>(support.size()));
  for (std::size_t s = 0; s < support.size(); ++s) {
    const auto r = static_cast<Eigen::Index>(s);
    m.support_vectors.row(r) = z.row(support[s]);
    m.coefficients(r) = coef(support[s]);
  }
  return m;
}

double SvrModel::predict(std::span<const double> x) const {
  const Vector z = scaler.transform(x);
  const auto d = static_cast<std::size_t>(z.size());
  std::vector<double> sv(d);
  double f = bias;
  for (Eigen::Index s = 0; s < support_vectors.rows(); ++s) {
    for (std::size_t c = 0; c < d; ++c) sv[c] = support_vectors(s, static_cast<Eigen::Index>(c));
    f += coefficients(s) * kernel_value(kernel, gamma, sv.data(), z.data(), d);
  }
  return f;
}

}  // namespace offload

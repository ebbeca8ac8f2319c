#include <cmath>
#include <limits>

#include "offload/error.hpp"
#include "offload/estimators.hpp"

namespace offload {

namespace {

// C(n, k), saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / i;
  if (r >= static_cast<long double>(std::numeric_limits<std::size_t>::max())) {
    return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(std::llround(r));
}

double term_value(const Exponents& e, const double* z) {
  double v = 1.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    for (int p = 0; p < e[j]; ++p) v *= z[j];
  }
  return v;
}

}  // namespace

std::vector<Exponents> monomial_exponents(std::size_t dims, int degree) {
  if (degree < 0) throw ConfigError("polynomial degree must be >= 0");
  std::vector<Exponents> terms;
  terms.emplace_back(dims, 0);
  // Degree-t terms as non-decreasing variable index tuples.
  for (int t = 1; t <= degree; ++t) {
    if (dims == 0) break;
    std::vector<std::size_t> idx(static_cast<std::size_t>(t), 0);
    while (true) {
      Exponents e(dims, 0);
      for (std::size_t i : idx) ++e[i];
      terms.push_back(std::move(e));
      int pos = t - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == dims - 1) --pos;
      if (pos < 0) break;
      const std::size_t next = idx[static_cast<std::size_t>(pos)] + 1;
      for (auto k = static_cast<std::size_t>(pos); k < idx.size(); ++k) idx[k] = next;
    }
  }
  return terms;
}

Matrix expand_monomials(const Matrix& z, std::span<const Exponents> terms) {
  const auto cols = static_cast<Eigen::Index>(terms.size() - 1);
  Matrix out(z.rows(), cols);
  std::vector<double> row(static_cast<std::size_t>(z.cols()));
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) row[static_cast<std::size_t>(c)] = z(r, c);
    for (Eigen::Index t = 0; t < cols; ++t) {
      out(r, t) = term_value(terms[static_cast<std::size_t>(t + 1)], row.data());
    }
  }
  return out;
}

PolyModel fit_pmr(const Matrix& x, const Vector& y, const PolyParams& params) {
  check_training_data(x, y);
  if (params.degree < 1) throw ConfigError("polynomial degree must be >= 1");
  const std::size_t d = static_cast<std::size_t>(x.cols());
  const std::size_t count = binomial(d + static_cast<std::size_t>(params.degree),
                                     static_cast<std::size_t>(params.degree));
  if (count > params.term_budget) {
    throw ConfigError("degree-" + std::to_string(params.degree) + " expansion of " +
                      std::to_string(d) + " inputs has " + std::to_string(count) +
                      " terms, over the budget of " + std::to_string(params.term_budget) +
                      "; use a lower degree");
  }

  PolyModel m;
  m.degree = params.degree;
  m.terms = monomial_exponents(d, params.degree);
  m.input_scaler = Scaler::fit(x);
  const Matrix expanded = expand_monomials(m.input_scaler.transform(x), m.terms);
  m.linear = fit_mlr(expanded, y, params.lambda);
  return m;
}

double PolyModel::predict(std::span<const double> x) const {
  const Vector z = input_scaler.transform(x);
  std::vector<double> e(terms.size() - 1);
  for (std::size_t t = 1; t < terms.size(); ++t) e[t - 1] = term_value(terms[t], z.data());
  return linear.predict(e);
}

std::map<Exponents, double> PolyModel::raw_coefficients() const {
  const std::size_t d = input_dim();
  // Coefficients over monomials of the standardised inputs z.
  std::vector<double> zc(terms.size());
  zc[0] = linear.raw_intercept();
  const Vector slopes = linear.coefficients();
  for (std::size_t t = 1; t < terms.size(); ++t) zc[t] = slopes(static_cast<Eigen::Index>(t - 1));

  // z_j = (x_j - m_j) / s_j; expand each product with the binomial theorem.
  std::map<Exponents, double> raw;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    std::map<Exponents, double> poly = {{Exponents(d, 0), zc[t]}};
    for (std::size_t j = 0; j < d; ++j) {
      const int e = terms[t][j];
      if (e == 0) continue;
      const double m = input_scaler.mean(static_cast<Eigen::Index>(j));
      const double s = input_scaler.scale(static_cast<Eigen::Index>(j));
      std::map<Exponents, double> next;
      for (const auto& [ex, coef] : poly) {
        for (int k = 0; k <= e; ++k) {
          Exponents nx = ex;
          nx[j] += k;
          const double c = coef * static_cast<double>(binomial(static_cast<std::size_t>(e),
                                                               static_cast<std::size_t>(k))) *
                           std::pow(-m, e - k) / std::pow(s, e);
          next[nx] += c;
        }
      }
      poly = std::move(next);
    }
    for (const auto& [ex, coef] : poly) raw[ex] += coef;
  }
  return raw;
}

}  // namespace offload

#pragma once

// Regression families used to predict offload times: ridge linear regression (MLR),
// polynomial regression over all monomials up to a total degree (PMR), random forest
// regression (RFR) and epsilon-insensitive support vector regression trained by SMO (SVR).

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace offload {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kRidgeFloor = 1e-8;

/// Per-column standardisation. Zero-variance columns keep scale 1.
struct Scaler {
  Vector mean;
  Vector scale;

  static Scaler fit(const Matrix& x);
  Matrix transform(const Matrix& x) const;
  Vector transform(std::span<const double> x) const;
  std::size_t dims() const { return static_cast<std::size_t>(mean.size()); }
};

/// Rejects empty, mismatched or non-finite training data.
void check_training_data(const Matrix& x, const Vector& y);

// ---------------------------------------------------------------------------------------------
// MLR

struct LinearModel {
  Scaler scaler;
  /// Weights on standardised columns, plus the intercept in that space (= mean of targets).
  Vector weights;
  double intercept = 0.0;
  double ridge = 0.0;

  double predict(std::span<const double> x) const;
  /// Raw-unit slope per input column.
  Vector coefficients() const;
  /// Raw-unit intercept.
  double raw_intercept() const;
  std::size_t input_dim() const { return scaler.dims(); }
};

/// Minimises |Zb - (y - mean y)|^2 + max(lambda, 1e-8) |b|^2 over standardised columns Z,
/// solved through the normal equations.
LinearModel fit_mlr(const Matrix& x, const Vector& y, double lambda = 1e-6);

// ---------------------------------------------------------------------------------------------
// PMR

using Exponents = std::vector<int>;

/// All exponent vectors over `dims` variables with total degree <= `degree`, graded order,
/// starting with the constant term. Size is C(dims + degree, degree).
std::vector<Exponents> monomial_exponents(std::size_t dims, int degree);

struct PolyModel {
  int degree = 2;
  /// Term table; entry 0 is the constant term handled as the intercept.
  std::vector<Exponents> terms;
  /// Standardisation of raw inputs before expansion.
  Scaler input_scaler;
  /// Ridge fit over the non-constant expanded terms.
  LinearModel linear;

  double predict(std::span<const double> x) const;
  std::size_t input_dim() const { return input_scaler.dims(); }
  std::size_t term_count() const { return terms.size(); }
  /// Coefficients re-expressed over monomials of the raw (unstandardised) inputs.
  std::map<Exponents, double> raw_coefficients() const;
};

struct PolyParams {
  int degree = 2;
  double lambda = 1e-6;
  std::size_t term_budget = 5000;
};

PolyModel fit_pmr(const Matrix& x, const Vector& y, const PolyParams& params = {});

/// Expanded non-constant monomial columns of standardised inputs.
Matrix expand_monomials(const Matrix& z, std::span<const Exponents> terms);

// ---------------------------------------------------------------------------------------------
// RFR

struct ForestParams {
  int trees = 100;
  int max_depth = 12;
  int min_samples_leaf = 2;
  /// Candidate features per split; unset means ceil(d / 3).
  std::optional<int> features_per_split;
  bool bootstrap = true;
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  /// Training rows (bootstrap draws included) that reached this node.
  int samples = 0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double predict(std::span<const double> x) const;
};

struct ForestModel {
  std::vector<RegressionTree> trees;
  ForestParams params;
  std::uint64_t seed = 0;
  std::size_t dims = 0;

  double predict(std::span<const double> x) const;
  std::size_t input_dim() const { return dims; }
};

ForestModel fit_rfr(const Matrix& x, const Vector& y, const ForestParams& params,
                    std::uint64_t seed);

// ---------------------------------------------------------------------------------------------
// SVR

enum class KernelType { Rbf, Linear };

struct SvrParams {
  KernelType kernel = KernelType::Rbf;
  /// RBF width; unset means 1 / d.
  std::optional<double> gamma;
  double c = 10.0;
  double epsilon = 0.1;
  double tolerance = 1e-3;
  /// Iteration cap is max_passes * n pair updates.
  std::size_t max_passes = 10000;
  /// Store the dual objective after every pair update (diagnostics).
  bool record_objective = false;
};

struct SvrFitInfo {
  std::size_t iterations = 0;
  std::size_t iteration_cap = 0;
  bool converged = false;
  double max_violation = 0.0;
  double dual_objective = 0.0;
  std::vector<double> objective_trace;
};

struct SvrModel {
  KernelType kernel = KernelType::Rbf;
  double gamma = 1.0;
  double c = 1.0;
  double epsilon = 0.1;
  Scaler scaler;
  /// Standardised training inputs with a non-zero dual coefficient, one per row.
  Matrix support_vectors;
  /// alpha - alpha* per support vector.
  Vector coefficients;
  double bias = 0.0;
  SvrFitInfo info;

  double predict(std::span<const double> x) const;
  std::size_t input_dim() const { return scaler.dims(); }
};

SvrModel fit_svr(const Matrix& x, const Vector& y, const SvrParams& params = {});

// ---------------------------------------------------------------------------------------------
// Uniform regressor interface

enum class ModelKind { Mlr, Pmr, Rfr, Svr };

inline constexpr std::array<ModelKind, 4> kAllKinds = {ModelKind::Mlr, ModelKind::Pmr,
                                                       ModelKind::Rfr, ModelKind::Svr};

std::string_view kind_name(ModelKind kind);
ModelKind parse_kind(std::string_view name);

/// Hyperparameters for every kind, so one settings object drives a whole comparison.
struct ModelSettings {
  double ridge = 1e-6;
  PolyParams poly;
  ForestParams forest;
  SvrParams svr;
  std::uint64_t seed = 7;
};

class Regressor {
 public:
  using Model = std::variant<LinearModel, PolyModel, ForestModel, SvrModel>;

  Regressor() = default;
  explicit Regressor(Model m) : model_(std::move(m)) {}

  static Regressor fit(ModelKind kind, const Matrix& x, const Vector& y,
                       const ModelSettings& settings);

  ModelKind kind() const;
  std::size_t input_dim() const;
  /// Throws DimensionError when x has the wrong width.
  double predict(std::span<const double> x) const;

  const Model& model() const { return model_; }

  nlohmann::json to_json() const;
  static Regressor from_json(const nlohmann::json& j);

 private:
  Model model_;
};

}  // namespace offload

#pragma once

// Collective (one model for t_offload) and individual (one model per step, summed)
// offload-time estimators, plus the hold-out / k-fold evaluation harness.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "offload/catalog.hpp"
#include "offload/dataset.hpp"
#include "offload/estimators.hpp"

namespace offload {

enum class Method { Collective, Individual };

inline constexpr std::array<Method, 2> kAllMethods = {Method::Collective, Method::Individual};

std::string_view method_name(Method m);  // "cm" / "im"
Method parse_method(std::string_view name);

enum class AccuracyMode { Mape, R2 };

std::string_view accuracy_mode_name(AccuracyMode m);
AccuracyMode parse_accuracy_mode(std::string_view name);

/// Default per-step masks, indexed by StepKind.
std::array<FeatureMask, kStepCount> default_step_masks();

struct EstimatorOptions {
  ModelSettings models;
  std::array<FeatureMask, kStepCount> step_masks = default_step_masks();
  /// Give the transfer-step model the derived input P13 * 8e6 / P20 (seconds to move the
  /// uncompressed image over the link) next to its masked parameters.
  bool linearize_transfer = true;
};

/// A regressor bound to the parameters it reads.
class ComponentModel {
 public:
  ComponentModel(FeatureMask mask, bool transfer_feature, Regressor regressor);

  const FeatureMask& mask() const { return mask_; }
  bool has_transfer_feature() const { return transfer_feature_; }
  const Regressor& regressor() const { return regressor_; }

  /// Number of parameters read, |mask|.
  std::size_t input_dim() const { return mask_.size(); }

  double predict(const ParameterVector& pv) const;
  /// `masked` holds the masked parameters in mask order; throws DimensionError otherwise.
  double predict_masked(std::span<const double> masked) const;

  /// Regressor input row: masked parameters, then the derived transfer feature if enabled.
  std::vector<double> regressor_inputs(std::span<const double> masked) const;

  nlohmann::json to_json() const;
  static ComponentModel from_json(const nlohmann::json& j);

 private:
  FeatureMask mask_;
  bool transfer_feature_ = false;
  Regressor regressor_;
};

struct CollectiveEstimator {
  ModelKind kind = ModelKind::Mlr;
  ComponentModel model;
};

struct IndividualEstimator {
  ModelKind kind = ModelKind::Mlr;
  /// Indexed by StepKind.
  std::vector<ComponentModel> components;
};

using Estimator = std::variant<CollectiveEstimator, IndividualEstimator>;

CollectiveEstimator train_collective(const Dataset& train, ModelKind kind,
                                     const EstimatorOptions& options = {});
IndividualEstimator train_individual(const Dataset& train, ModelKind kind,
                                     const EstimatorOptions& options = {});
/// Each step model trained on its own step-window aggregates (same row order in every set).
IndividualEstimator train_individual(const std::array<Dataset, kStepCount>& step_windows,
                                     ModelKind kind, const EstimatorOptions& options = {});
Estimator train_estimator(const Dataset& train, Method method, ModelKind kind,
                          const EstimatorOptions& options = {});

struct OffloadPrediction {
  double total = 0.0;
  /// Per-step predictions (individual models only); total is their sum.
  std::optional<std::array<double, kStepCount>> steps;
};

OffloadPrediction predict_offload(const CollectiveEstimator& est, const ParameterVector& pv);
OffloadPrediction predict_offload(const IndividualEstimator& est, const ParameterVector& pv);
OffloadPrediction predict_offload(const Estimator& est, const ParameterVector& pv);

Method estimator_method(const Estimator& est);
ModelKind estimator_kind(const Estimator& est);

nlohmann::json estimator_to_json(const Estimator& est);
Estimator estimator_from_json(const nlohmann::json& j);
void save_estimator(const std::filesystem::path& path, const Estimator& est);
Estimator load_estimator(const std::filesystem::path& path);

// ---------------------------------------------------------------------------------------------
// Metrics and splits

double mae(std::span<const double> predictions, std::span<const double> truths);
/// mape: 100 * max(0, 1 - mean |p - t| / t); r2: 100 * max(0, 1 - SSE / SST).
double accuracy(std::span<const double> predictions, std::span<const double> truths,
                AccuracyMode mode);

/// k disjoint shuffled folds covering 0..n-1; the first n % k folds hold one extra index.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct EvalReport {
  Method method = Method::Collective;
  ModelKind kind = ModelKind::Mlr;
  /// "holdout:<train fraction>" or "kfold:<k>".
  std::string split;
  double mae = 0.0;
  double accuracy = 0.0;
  AccuracyMode accuracy_mode = AccuracyMode::Mape;
  std::optional<std::array<double, kStepCount>> step_mae;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};

/// Metrics of one train/test partition.
struct FoldResult {
  double mae = 0.0;
  double accuracy = 0.0;
  std::optional<std::array<double, kStepCount>> step_mae;
};

FoldResult evaluate_partition(const Dataset& ds, std::span<const std::size_t> train_rows,
                              std::span<const std::size_t> test_rows, Method method,
                              ModelKind kind, const EstimatorOptions& options, AccuracyMode mode);

/// Unweighted mean of per-fold metrics. n_test = floor(n / k), n_train = n - n_test.
EvalReport cross_validate(const Dataset& ds, ModelKind kind, Method method, std::size_t k,
                          std::uint64_t seed, const EstimatorOptions& options = {},
                          AccuracyMode mode = AccuracyMode::Mape);

/// One shuffled split with round(train_fraction * n) training rows.
EvalReport holdout_evaluate(const Dataset& ds, ModelKind kind, Method method,
                            double train_fraction, std::uint64_t seed,
                            const EstimatorOptions& options = {},
                            AccuracyMode mode = AccuracyMode::Mape);

/// Training rows of the hold-out split used by holdout_evaluate (the rest are test rows).
std::vector<std::size_t> holdout_train_rows(std::size_t n, double train_fraction, std::uint64_t seed);

struct EvaluationPlan {
  std::vector<Method> methods = {kAllMethods.begin(), kAllMethods.end()};
  std::vector<ModelKind> kinds = {kAllKinds.begin(), kAllKinds.end()};
  std::vector<double> holdout_fractions = {0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::size_t> k_values = {3, 5, 10};
  AccuracyMode accuracy_mode = AccuracyMode::Mape;
};

/// Rows ordered by method, kind, then hold-out fractions followed by k values.
std::vector<EvalReport> run_evaluation_plan(const Dataset& ds, const EvaluationPlan& plan,
                                            const EstimatorOptions& options, std::uint64_t seed);

// Report table: one row per (method, kind, split).
void write_report_csv(std::ostream& os, std::span<const EvalReport> reports);
std::vector<EvalReport> read_report_csv(std::istream& is);
void write_report_summary(std::ostream& os, std::span<const EvalReport> reports);

struct MethodKindScore {
  Method method = Method::Collective;
  ModelKind kind = ModelKind::Mlr;
  double mae = 0.0;       // mean over the report rows for this pair
  double accuracy = 0.0;  // mean over the report rows for this pair
  std::size_t rows = 0;
};

struct Comparison {
  std::vector<MethodKindScore> scores;
  /// Best kind per method present in the report.
  std::vector<MethodKindScore> best_per_method;
  MethodKindScore overall_best;
  /// IM minus CM, for kinds present under both methods.
  struct Delta {
    ModelKind kind;
    double mae;
    double accuracy;
  };
  std::vector<Delta> deltas;
};

/// Lower mean MAE wins; ties go to higher mean accuracy, then kind name, then method name.
Comparison compare_reports(std::span<const EvalReport> reports);
void write_comparison(std::ostream& os, const Comparison& c);

}  // namespace offload

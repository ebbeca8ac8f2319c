#include "offload/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "offload/error.hpp"
#include "offload/rng.hpp"

namespace offload {

namespace {

using nlohmann::json;

constexpr const char* kEstimatorFormat = "offload-estimator";

bool can_linearize(const FeatureMask& mask) { return mask.contains(13) && mask.contains(20); }

std::vector<double> input_row(const FeatureMask& mask, bool transfer_feature,
                              std::span<const double> masked) {
  std::vector<double> row(masked.begin(), masked.end());
  if (transfer_feature) {
    const auto& idx = mask.indices();
    const auto pos = [&](int p) {
      return static_cast<std::size_t>(std::lower_bound(idx.begin(), idx.end(), p) - idx.begin());
    };
    row.push_back(masked[pos(13)] * 8e6 / masked[pos(20)]);
  }
  return row;
}

ModelSettings settings_for(const EstimatorOptions& options, std::size_t rows,
                           std::uint64_t component) {
  ModelSettings s = options.models;
  // A forest cannot require more rows per leaf than the training set holds.
  s.forest.min_samples_leaf =
      std::min<int>(s.forest.min_samples_leaf, static_cast<int>(std::max<std::size_t>(rows, 1)));
  s.seed = derive_seed(options.models.seed, component);
  return s;
}

ComponentModel fit_component(const Dataset& train, const FeatureMask& mask, bool transfer_feature,
                             ModelKind kind, const EstimatorOptions& options,
                             std::uint64_t component,
                             const std::function<double(const OffloadTiming&)>& target) {
  if (train.empty()) throw ConfigError("training set is empty");
  const std::size_t width = mask.size() + (transfer_feature ? 1 : 0);
  Matrix x(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(width));
  Vector y(static_cast<Eigen::Index>(train.size()));
  for (std::size_t r = 0; r < train.size(); ++r) {
    const auto& inst = train.instances[r];
    const auto row = input_row(mask, transfer_feature, mask.select(inst.features));
    for (std::size_t c = 0; c < width; ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
    y(static_cast<Eigen::Index>(r)) = target(inst.targets);
  }
  return ComponentModel(mask, transfer_feature,
                        Regressor::fit(kind, x, y, settings_for(options, train.size(), component)));
}

std::vector<double> column(std::span<const std::array<double, kStepCount>> rows, std::size_t s) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[s]);
  return out;
}

std::string split_label(const char* prefix, double v) {
  std::ostringstream ss;
  ss << prefix << ':' << v;
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "method",   "kind",     "split",        "n_train",  "n_test",
      "mae",      "accuracy", "accuracy_mode", "mae_commit", "mae_save",
      "mae_transfer", "mae_load", "mae_start", "seed"};
  return cols;
}

// Strict ordering for "better": lower MAE, higher accuracy, kind name, method name.
bool better(const MethodKindScore& a, const MethodKindScore& b) {
  if (a.mae != b.mae) return a.mae < b.mae;
  if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
  if (kind_name(a.kind) != kind_name(b.kind)) return kind_name(a.kind) < kind_name(b.kind);
  return method_name(a.method) < method_name(b.method);
}

}  // namespace

std::string_view method_name(Method m) { return m == Method::Collective ? "cm" : "im"; }

Method parse_method(std::string_view name) {
  if (name == "cm") return Method::Collective;
  if (name == "im") return Method::Individual;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected cm or im)");
}

std::string_view accuracy_mode_name(AccuracyMode m) { return m == AccuracyMode::Mape ? "mape" : "r2"; }

AccuracyMode parse_accuracy_mode(std::string_view name) {
  if (name == "mape") return AccuracyMode::Mape;
  if (name == "r2") return AccuracyMode::R2;
  throw ConfigError("unknown accuracy mode '" + std::string(name) + "' (expected mape or r2)");
}

std::array<FeatureMask, kStepCount> default_step_masks() {
  return {make_feature_mask(StepKind::Commit), make_feature_mask(StepKind::Save),
          make_feature_mask(StepKind::Transfer), make_feature_mask(StepKind::Load),
          make_feature_mask(StepKind::Start)};
}

// ---------------------------------------------------------------------------------------------
// ComponentModel

ComponentModel::ComponentModel(FeatureMask mask, bool transfer_feature, Regressor regressor)
    : mask_(std::move(mask)), transfer_feature_(transfer_feature), regressor_(std::move(regressor)) {
  if (transfer_feature_ && !can_linearize(mask_)) {
    throw ConfigError("derived transfer feature needs P13 and P20 in the mask");
  }
}

std::vector<double> ComponentModel::regressor_inputs(std::span<const double> masked) const {
  return input_row(mask_, transfer_feature_, masked);
}

double ComponentModel::predict_masked(std::span<const double> masked) const {
  if (masked.size() != mask_.size()) {
    throw DimensionError("component expects " + std::to_string(mask_.size()) + " inputs, got " +
                         std::to_string(masked.size()));
  }
  return regressor_.predict(regressor_inputs(masked));
}

double ComponentModel::predict(const ParameterVector& pv) const {
  return predict_masked(mask_.select(pv));
}

json ComponentModel::to_json() const {
  return {{"mask", mask_.indices()},
          {"transfer_feature", transfer_feature_},
          {"model", regressor_.to_json()}};
}

ComponentModel ComponentModel::from_json(const json& j) {
  try {
    ComponentModel c(FeatureMask(j.at("mask").get<std::vector<int>>()),
                     j.at("transfer_feature").get<bool>(), Regressor::from_json(j.at("model")));
    if (c.regressor_.input_dim() != c.mask_.size() + (c.transfer_feature_ ? 1 : 0)) {
      throw ParseError("component model width does not match its mask");
    }
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("component: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("component: ") + e.what());
  }
}

// ---------------------------------------------------------------------------------------------
// Training and prediction

CollectiveEstimator train_collective(const Dataset& train, ModelKind kind,
                                     const EstimatorOptions& options) {
  return {kind, fit_component(train, make_collective_mask(), false, kind, options, 0,
                              [](const OffloadTiming& t) { return t.total; })};
}

IndividualEstimator train_individual(const Dataset& train, ModelKind kind,
                                     const EstimatorOptions& options) {
  std::array<Dataset, kStepCount> same;
  same.fill(train);
  return train_individual(same, kind, options);
}

IndividualEstimator train_individual(const std::array<Dataset, kStepCount>& step_windows,
                                     ModelKind kind, const EstimatorOptions& options) {
  IndividualEstimator est;
  est.kind = kind;
  for (std::size_t s = 0; s < kStepCount; ++s) {
    const StepKind step = kAllSteps[s];
    const FeatureMask& mask = options.step_masks[s];
    const bool linearize =
        options.linearize_transfer && step == StepKind::Transfer && can_linearize(mask);
    est.components.push_back(fit_component(step_windows[s], mask, linearize, kind, options, s + 1,
                                           [step](const OffloadTiming& t) { return t.step(step); }));
  }
  return est;
}

Estimator train_estimator(const Dataset& train, Method method, ModelKind kind,
                          const EstimatorOptions& options) {
  if (method == Method::Collective) return train_collective(train, kind, options);
  return train_individual(train, kind, options);
}

OffloadPrediction predict_offload(const CollectiveEstimator& est, const ParameterVector& pv) {
  return {est.model.predict(pv), std::nullopt};
}

OffloadPrediction predict_offload(const IndividualEstimator& est, const ParameterVector& pv) {
  std::array<double, kStepCount> steps{};
  double total = 0.0;
  for (std::size_t s = 0; s < kStepCount; ++s) {
    steps[s] = est.components.at(s).predict(pv);
    total += steps[s];
  }
  return {total, steps};
}

OffloadPrediction predict_offload(const Estimator& est, const ParameterVector& pv) {
  return std::visit([&](const auto& e) { return predict_offload(e, pv); }, est);
}

Method estimator_method(const Estimator& est) {
  return std::holds_alternative<CollectiveEstimator>(est) ? Method::Collective : Method::Individual;
}

ModelKind estimator_kind(const Estimator& est) {
  return std::visit([](const auto& e) { return e.kind; }, est);
}

json estimator_to_json(const Estimator& est) {
  json j = {{"format", kEstimatorFormat},
            {"method", method_name(estimator_method(est))},
            {"kind", kind_name(estimator_kind(est))}};
  json comps = json::array();
  if (const auto* cm = std::get_if<CollectiveEstimator>(&est)) {
    json c = cm->model.to_json();
    c["target"] = "offload";
    comps.push_back(std::move(c));
  } else {
    const auto& im = std::get<IndividualEstimator>(est);
    for (std::size_t s = 0; s < im.components.size(); ++s) {
      json c = im.components[s].to_json();
      c["target"] = step_name(kAllSteps[s]);
      comps.push_back(std::move(c));
    }
  }
  j["components"] = std::move(comps);
  return j;
}

Estimator estimator_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kEstimatorFormat) {
      throw ParseError("not an offload estimator document");
    }
    const Method method = parse_method(j.at("method").get<std::string>());
    const ModelKind kind = parse_kind(j.at("kind").get<std::string>());
    const auto& comps = j.at("components");
    if (method == Method::Collective) {
      if (comps.size() != 1) throw ParseError("collective estimator must have one component");
      auto model = ComponentModel::from_json(comps.at(0));
      if (model.input_dim() != kParameterCount) {
        throw ParseError("collective estimator must read all 21 parameters");
      }
      return CollectiveEstimator{kind, std::move(model)};
    }
    if (comps.size() != kStepCount) throw ParseError("individual estimator must have five components");
    IndividualEstimator im;
    im.kind = kind;
    for (std::size_t s = 0; s < kStepCount; ++s) {
      if (comps.at(s).at("target").get<std::string>() != step_name(kAllSteps[s])) {
        throw ParseError("individual estimator components out of step order");
      }
      im.components.push_back(ComponentModel::from_json(comps.at(s)));
    }
    return im;
  } catch (const json::exception& e) {
    throw ParseError(std::string("estimator document: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("estimator document: ") + e.what());
  }
}

void save_estimator(const std::filesystem::path& path, const Estimator& est) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  os << estimator_to_json(est).dump() << '\n';
  if (!os) throw Error("failed writing '" + path.string() + "'");
}

Estimator load_estimator(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open model '" + path.string() + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ParseError("model '" + path.string() + "': " + e.what());
  }
  return estimator_from_json(j);
}

// ---------------------------------------------------------------------------------------------
// Metrics

double mae(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) throw DimensionError("mae: length mismatch");
  if (predictions.empty()) throw ConfigError("mae: no values");
  double sum = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) sum += std::abs(predictions[i] - truths[i]);
  return sum / static_cast<double>(truths.size());
}

double accuracy(std::span<const double> predictions, std::span<const double> truths,
                AccuracyMode mode) {
  if (predictions.size() != truths.size()) throw DimensionError("accuracy: length mismatch");
  if (predictions.empty()) throw ConfigError("accuracy: no values");
  const auto n = static_cast<double>(truths.size());
  double score = 0.0;
  if (mode == AccuracyMode::Mape) {
    double rel = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      if (!(truths[i] > 0.0)) throw ConfigError("accuracy (mape): truths must be > 0");
      rel += std::abs(predictions[i] - truths[i]) / truths[i];
    }
    score = 100.0 * (1.0 - rel / n);
  } else {
    const double mean = std::accumulate(truths.begin(), truths.end(), 0.0) / n;
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      sse += (predictions[i] - truths[i]) * (predictions[i] - truths[i]);
      sst += (truths[i] - mean) * (truths[i] - mean);
    }
    if (!(sst > 0.0)) throw ConfigError("accuracy (r2): truths have zero variance");
    score = 100.0 * (1.0 - sse / sst);
  }
  return std::clamp(score, 0.0, 100.0);
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw ConfigError("k-fold needs 2 <= k <= n (k=" + std::to_string(k) +
                      ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  shuffle_in_place(perm, rng);

  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

// ---------------------------------------------------------------------------------------------
// Evaluation

FoldResult evaluate_partition(const Dataset& ds, std::span<const std::size_t> train_rows,
                              std::span<const std::size_t> test_rows, Method method,
                              ModelKind kind, const EstimatorOptions& options, AccuracyMode mode) {
  if (train_rows.empty() || test_rows.empty()) throw ConfigError("degenerate train/test split");
  const Dataset train = ds.subset(train_rows);
  const Estimator est = train_estimator(train, method, kind, options);

  std::vector<double> preds, truths;
  std::vector<std::array<double, kStepCount>> step_preds, step_truths;
  for (std::size_t r : test_rows) {
    const auto& inst = ds.instances.at(r);
    const OffloadPrediction p = predict_offload(est, inst.features);
    preds.push_back(p.total);
    truths.push_back(inst.targets.total);
    if (p.steps) {
      step_preds.push_back(*p.steps);
      std::array<double, kStepCount> t{};
      for (std::size_t s = 0; s < kStepCount; ++s) t[s] = inst.targets.step(kAllSteps[s]);
      step_truths.push_back(t);
    }
  }

  FoldResult out;
  out.mae = offload::mae(preds, truths);
  out.accuracy = offload::accuracy(preds, truths, mode);
  if (method == Method::Individual) {
    std::array<double, kStepCount> sm{};
    for (std::size_t s = 0; s < kStepCount; ++s) {
      sm[s] = offload::mae(column(step_preds, s), column(step_truths, s));
    }
    out.step_mae = sm;
  }
  return out;
}

EvalReport cross_validate(const Dataset& ds, ModelKind kind, Method method, std::size_t k,
                          std::uint64_t seed, const EstimatorOptions& options, AccuracyMode mode) {
  const std::size_t n = ds.size();
  const auto folds = kfold_split(n, k, seed);

  EvalReport rep;
  rep.method = method;
  rep.kind = kind;
  rep.split = split_label("kfold", static_cast<double>(k));
  rep.accuracy_mode = mode;
  rep.seed = seed;
  rep.n_test = n / k;
  rep.n_train = n - rep.n_test;

  std::array<double, kStepCount> step_sum{};
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train;
    train.reserve(n - folds[f].size());
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train.begin(), train.end());
    const FoldResult r = evaluate_partition(ds, train, folds[f], method, kind, options, mode);
    rep.mae += r.mae;
    rep.accuracy += r.accuracy;
    if (r.step_mae) {
      for (std::size_t s = 0; s < kStepCount; ++s) step_sum[s] += (*r.step_mae)[s];
    }
  }
  const auto kd = static_cast<double>(k);
  rep.mae /= kd;
  rep.accuracy /= kd;
  if (method == Method::Individual) {
    for (double& v : step_sum) v /= kd;
    rep.step_mae = step_sum;
  }
  return rep;
}

std::vector<std::size_t> holdout_train_rows(std::size_t n, double train_fraction,
                                            std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  if (n < 2) throw ConfigError("hold-out split needs at least two instances");
  const auto wanted = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  const std::size_t n_train = std::clamp<std::size_t>(wanted, 1, n - 1);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  shuffle_in_place(perm, rng);
  perm.resize(n_train);
  std::sort(perm.begin(), perm.end());
  return perm;
}

EvalReport holdout_evaluate(const Dataset& ds, ModelKind kind, Method method,
                            double train_fraction, std::uint64_t seed,
                            const EstimatorOptions& options, AccuracyMode mode) {
  const auto train = holdout_train_rows(ds.size(), train_fraction, seed);
  std::vector<std::size_t> test;
  std::size_t t = 0;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    if (t < train.size() && train[t] == r) {
      ++t;
    } else {
      test.push_back(r);
    }
  }
  const FoldResult r = evaluate_partition(ds, train, test, method, kind, options, mode);
  EvalReport rep;
  rep.method = method;
  rep.kind = kind;
  rep.split = split_label("holdout", train_fraction);
  rep.mae = r.mae;
  rep.accuracy = r.accuracy;
  rep.accuracy_mode = mode;
  rep.step_mae = r.step_mae;
  rep.n_train = train.size();
  rep.n_test = test.size();
  rep.seed = seed;
  return rep;
}

std::vector<EvalReport> run_evaluation_plan(const Dataset& ds, const EvaluationPlan& plan,
                                            const EstimatorOptions& options, std::uint64_t seed) {
  std::vector<EvalReport> out;
  for (Method method : plan.methods) {
    for (ModelKind kind : plan.kinds) {
      for (double f : plan.holdout_fractions) {
        out.push_back(holdout_evaluate(ds, kind, method, f, seed, options, plan.accuracy_mode));
      }
      for (std::size_t k : plan.k_values) {
        out.push_back(cross_validate(ds, kind, method, k, seed, options, plan.accuracy_mode));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Report files

void write_report_csv(std::ostream& os, std::span<const EvalReport> reports) {
  const auto& cols = report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : reports) {
    os << method_name(r.method) << ',' << kind_name(r.kind) << ',' << r.split << ',' << r.n_train
       << ',' << r.n_test << ',' << format_double(r.mae) << ',' << format_double(r.accuracy) << ','
       << accuracy_mode_name(r.accuracy_mode);
    for (std::size_t s = 0; s < kStepCount; ++s) {
      os << ',';
      if (r.step_mae) os << format_double((*r.step_mae)[s]);
    }
    os << ',' << r.seed << '\n';
  }
}

std::vector<EvalReport> read_report_csv(std::istream& is) {
  const auto& cols = report_columns();
  std::string line;
  if (!std::getline(is, line)) throw ParseError("line 1: missing report header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  for (const auto& c : cols) {
    if (std::find(header.begin(), header.end(), c) == header.end()) {
      throw ParseError("line 1: missing column '" + c + "'");
    }
  }
  if (header != cols) throw ParseError("line 1: report header does not match the expected order");

  std::vector<EvalReport> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (cells.size() != cols.size()) {
      throw ParseError(where + "expected " + std::to_string(cols.size()) + " columns, got " +
                       std::to_string(cells.size()));
    }
    try {
      EvalReport r;
      r.method = parse_method(cells[0]);
      r.kind = parse_kind(cells[1]);
      r.split = cells[2];
      r.n_train = static_cast<std::size_t>(parse_double(cells[3]));
      r.n_test = static_cast<std::size_t>(parse_double(cells[4]));
      r.mae = parse_double(cells[5]);
      r.accuracy = parse_double(cells[6]);
      r.accuracy_mode = parse_accuracy_mode(cells[7]);
      bool any_step = false;
      std::array<double, kStepCount> sm{};
      for (std::size_t s = 0; s < kStepCount; ++s) {
        if (!cells[8 + s].empty()) {
          sm[s] = parse_double(cells[8 + s]);
          any_step = true;
        }
      }
      if (any_step) r.step_mae = sm;
      r.seed = std::stoull(cells[13]);
      if (r.mae < 0.0 || r.accuracy < 0.0 || r.accuracy > 100.0) {
        throw ParseError("mae must be >= 0 and accuracy within [0, 100]");
      }
      out.push_back(std::move(r));
    } catch (const Error& e) {
      throw ParseError(where + e.what());
    } catch (const std::exception& e) {
      throw ParseError(where + "malformed value (" + e.what() + ")");
    }
  }
  return out;
}

void write_report_summary(std::ostream& os, std::span<const EvalReport> reports) {
  os << std::left << std::setw(8) << "method" << std::setw(6) << "kind" << std::setw(16) << "split"
     << std::right << std::setw(9) << "n_train" << std::setw(8) << "n_test" << std::setw(12)
     << "mae(s)" << std::setw(12) << "accuracy" << "  mode\n";
  for (const auto& r : reports) {
    os << std::left << std::setw(8) << method_name(r.method) << std::setw(6) << kind_name(r.kind)
       << std::setw(16) << r.split << std::right << std::setw(9) << r.n_train << std::setw(8)
       << r.n_test << std::setw(12) << std::fixed << std::setprecision(4) << r.mae << std::setw(12)
       << std::setprecision(2) << r.accuracy << "  " << accuracy_mode_name(r.accuracy_mode) << '\n';
  }
  os << std::defaultfloat;
  if (!reports.empty()) write_comparison(os, compare_reports(reports));
}

Comparison compare_reports(std::span<const EvalReport> reports) {
  if (reports.empty()) throw ConfigError("report has no rows");
  std::map<std::pair<int, int>, MethodKindScore> acc;
  for (const auto& r : reports) {
    auto& s = acc[{static_cast<int>(r.method), static_cast<int>(r.kind)}];
    s.method = r.method;
    s.kind = r.kind;
    s.mae += r.mae;
    s.accuracy += r.accuracy;
    ++s.rows;
  }
  Comparison c;
  for (auto& [key, s] : acc) {
    s.mae /= static_cast<double>(s.rows);
    s.accuracy /= static_cast<double>(s.rows);
    c.scores.push_back(s);
  }
  for (Method m : kAllMethods) {
    std::optional<MethodKindScore> best;
    for (const auto& s : c.scores) {
      if (s.method == m && (!best || better(s, *best))) best = s;
    }
    if (best) c.best_per_method.push_back(*best);
  }
  c.overall_best = c.best_per_method.front();
  for (const auto& b : c.best_per_method) {
    if (better(b, c.overall_best)) c.overall_best = b;
  }
  for (ModelKind k : kAllKinds) {
    const MethodKindScore* cm = nullptr;
    const MethodKindScore* im = nullptr;
    for (const auto& s : c.scores) {
      if (s.kind != k) continue;
      (s.method == Method::Collective ? cm : im) = &s;
    }
    if (cm && im) c.deltas.push_back({k, im->mae - cm->mae, im->accuracy - cm->accuracy});
  }
  return c;
}

void write_comparison(std::ostream& os, const Comparison& c) {
  auto line = [&](const MethodKindScore& s) {
    os << method_name(s.method) << '-' << kind_name(s.kind) << " mae=" << format_double(s.mae)
       << " accuracy=" << format_double(s.accuracy) << '\n';
  };
  for (const auto& b : c.best_per_method) {
    os << "best[" << method_name(b.method) << "]: ";
    line(b);
  }
  os << "overall best: ";
  line(c.overall_best);
  for (const auto& d : c.deltas) {
    os << "delta[" << kind_name(d.kind) << "] im-cm: mae=" << format_double(d.mae)
       << " accuracy=" << format_double(d.accuracy) << '\n';
  }
}

}  // namespace offload

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "offload/error.hpp"
#include "offload/evaluation.hpp"
#include "support.hpp"

using namespace offload;

namespace {

EstimatorOptions fast_options() {
  EstimatorOptions o;
  o.models.forest.trees = 20;
  return o;
}

EvalReport report(Method m, ModelKind k, double mae_v, double acc, std::string split = "kfold:10") {
  EvalReport r;
  r.method = m;
  r.kind = k;
  r.split = std::move(split);
  r.mae = mae_v;
  r.accuracy = acc;
  r.n_train = 90;
  r.n_test = 10;
  r.seed = 3;
  if (m == Method::Individual) r.step_mae = std::array<double, kStepCount>{0.1, 0.2, 0.3, 0.4, 0.5};
  return r;
}

}  // namespace

TEST_CASE("mae and accuracy on hand examples") {
  const std::vector<double> p = {1, 3}, t = {2, 2};
  CHECK(mae(p, t) == 1.0);
  CHECK(accuracy(p, t, AccuracyMode::Mape) == doctest::Approx(50.0));

  const std::vector<double> truth = {1, 2, 4, 8};
  std::vector<double> high;
  for (double v : truth) high.push_back(1.1 * v);
  CHECK(accuracy(high, truth, AccuracyMode::Mape) == doctest::Approx(90.0).epsilon(1e-12));

  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / 4;
  const std::vector<double> flat(4, mean);
  CHECK(accuracy(flat, truth, AccuracyMode::R2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(accuracy(truth, truth, AccuracyMode::R2) == 100.0);
  CHECK(accuracy(truth, truth, AccuracyMode::Mape) == 100.0);

  // Far-off predictions clamp at zero.
  const std::vector<double> wild = {100, -50, 300, 7};
  CHECK(accuracy(wild, truth, AccuracyMode::Mape) == 0.0);
  CHECK(accuracy(wild, truth, AccuracyMode::R2) == 0.0);

  CHECK_THROWS_AS(mae(p, truth), DimensionError);
  CHECK_THROWS_AS(mae({}, {}), ConfigError);
  CHECK_THROWS_AS(accuracy(p, std::vector<double>{0, 2}, AccuracyMode::Mape), ConfigError);
  CHECK_THROWS_AS(accuracy(p, std::vector<double>{2, 2}, AccuracyMode::R2), ConfigError);
}

TEST_CASE("metric properties on random vectors") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.5, 20.0);
  std::normal_distribution<double> err(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<double> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = u(rng);
      p[i] = trial % 5 == 0 ? t[i] : t[i] + err(rng);
    }
    const double m = mae(p, t);
    CHECK(m >= 0.0);
    for (AccuracyMode mode : {AccuracyMode::Mape, AccuracyMode::R2}) {
      const double a = accuracy(p, t, mode);
      CHECK(a >= 0.0);
      CHECK(a <= 100.0);
      CHECK((m == 0.0) == (a == 100.0));
    }
  }
}

TEST_CASE("k-fold split properties") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    const std::size_t k = 2 + rng() % (n - 1);
    const std::uint64_t seed = rng();
    const auto folds = kfold_split(n, k, seed);
    REQUIRE(folds.size() == k);
    std::vector<int> seen(n, 0);
    std::size_t min_size = n, max_size = 0;
    for (const auto& f : folds) {
      min_size = std::min(min_size, f.size());
      max_size = std::max(max_size, f.size());
      for (std::size_t i : f) {
        REQUIRE(i < n);
        ++seen[i];
      }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    CHECK(max_size - min_size <= 1);
    CHECK(kfold_split(n, k, seed) == folds);
  }
}

TEST_CASE("k-fold sizes") {
  auto sizes = [](std::size_t n, std::size_t k) {
    std::vector<std::size_t> s;
    for (const auto& f : kfold_split(n, k, 5)) s.push_back(f.size());
    return s;
  };
  CHECK(sizes(10, 5) == std::vector<std::size_t>(5, 2));
  std::vector<std::size_t> expect(6, 84);
  expect.insert(expect.end(), 4, 83);
  CHECK(sizes(836, 10) == expect);
  CHECK(kfold_split(10, 5, 1) != kfold_split(10, 5, 2));
  CHECK_THROWS_AS(kfold_split(10, 1, 1), ConfigError);
  CHECK_THROWS_AS(kfold_split(10, 11, 1), ConfigError);
}

TEST_CASE("leave-one-out equals averaged singleton hold-outs") {
  const Dataset ds = testing::random_dataset(24, 4);
  const std::size_t n = ds.size();
  const auto opts = fast_options();
  for (ModelKind kind : {ModelKind::Mlr, ModelKind::Rfr}) {
    for (Method method : kAllMethods) {
      double mae_sum = 0.0, acc_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> train;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) train.push_back(j);
        }
        const std::vector<std::size_t> test = {i};
        const FoldResult r = evaluate_partition(ds, train, test, method, kind, opts, AccuracyMode::Mape);
        mae_sum += r.mae;
        acc_sum += r.accuracy;
      }
      const EvalReport loo = cross_validate(ds, kind, method, n, 99, opts);
      CHECK(loo.mae == doctest::Approx(mae_sum / n).epsilon(1e-12));
      CHECK(loo.accuracy == doctest::Approx(acc_sum / n).epsilon(1e-12));
      CHECK(loo.n_test == 1);
      CHECK(loo.n_train == n - 1);
    }
  }
}

TEST_CASE("individual prediction is the sum of its step predictions") {
  const Dataset train = testing::random_dataset(60, 5);
  const Dataset probe = testing::random_dataset(200, 6);
  const auto opts = fast_options();
  for (ModelKind kind : kAllKinds) {
    const IndividualEstimator est = train_individual(train, kind, opts);
    REQUIRE(est.components.size() == kStepCount);
    for (const auto& inst : probe.instances) {
      const auto pred = predict_offload(est, inst.features);
      REQUIRE(pred.steps.has_value());
      double sum = 0.0;
      for (std::size_t s = 0; s < kStepCount; ++s) {
        CHECK((*pred.steps)[s] == est.components[s].predict(inst.features));
        sum += (*pred.steps)[s];
      }
      CHECK(std::abs(pred.total - sum) <= 1e-9 * std::max(1.0, std::abs(sum)));
    }
  }
}

TEST_CASE("step models only read their own parameters") {
  const Dataset train = testing::random_dataset(50, 7);
  const auto opts = fast_options();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (ModelKind kind : kAllKinds) {
    const IndividualEstimator est = train_individual(train, kind, opts);
    for (StepKind step : kAllSteps) {
      const auto& comp = est.components[static_cast<std::size_t>(step)];
      CHECK(comp.mask() == make_feature_mask(step));
      for (const auto& inst : train.instances) {
        ParameterVector pv = inst.features;
        for (int p = 1; p <= static_cast<int>(kParameterCount); ++p) {
          if (!comp.mask().contains(p)) pv.p(p) = 1e6 * u(rng) + 1.0;
        }
        CHECK(comp.predict(pv) == comp.predict(inst.features));
      }
    }
  }
}

TEST_CASE("transfer model inputs") {
  const Dataset train = testing::random_dataset(40, 9);
  EstimatorOptions opts = fast_options();
  const IndividualEstimator with = train_individual(train, ModelKind::Mlr, opts);
  const auto& comp = with.components[static_cast<std::size_t>(StepKind::Transfer)];
  CHECK(comp.input_dim() == 3);
  CHECK(comp.has_transfer_feature());
  CHECK(comp.regressor().input_dim() == 4);
  const std::vector<double> masked = {100.0, 1e8, 30.0};
  CHECK(comp.regressor_inputs(masked) == std::vector<double>{100.0, 1e8, 30.0, 8.0});
  CHECK_THROWS_AS(comp.predict_masked(std::vector<double>{1.0, 2.0}), DimensionError);

  opts.linearize_transfer = false;
  const IndividualEstimator without = train_individual(train, ModelKind::Mlr, opts);
  const auto& plain = without.components[static_cast<std::size_t>(StepKind::Transfer)];
  CHECK_FALSE(plain.has_transfer_feature());
  CHECK(plain.regressor().input_dim() == 3);
  for (StepKind s : kAllSteps) {
    if (s != StepKind::Transfer) CHECK_FALSE(with.components[static_cast<std::size_t>(s)].has_transfer_feature());
  }
  CHECK_THROWS_AS(ComponentModel(FeatureMask({1, 2}), true, plain.regressor()), ConfigError);
}

TEST_CASE("degenerate training sets") {
  const Dataset ds = testing::random_dataset(5, 10);
  const Dataset one = ds.subset(std::vector<std::size_t>{2});
  for (ModelKind kind : {ModelKind::Mlr, ModelKind::Pmr, ModelKind::Rfr}) {
    for (Method m : kAllMethods) {
      const Estimator est = train_estimator(one, m, kind, fast_options());
      const auto pred = predict_offload(est, ds.instances[0].features);
      CHECK(std::isfinite(pred.total));
      CHECK(predict_offload(est, one.instances[0].features).total ==
            doctest::Approx(one.instances[0].targets.total).epsilon(1e-6));
    }
  }

  // Identical targets everywhere: every kind predicts that constant.
  Dataset flat = testing::random_dataset(30, 11);
  for (auto& inst : flat.instances) inst.targets = OffloadTiming::from_steps(1, 2, 3, 4, 5);
  for (ModelKind kind : kAllKinds) {
    for (Method m : kAllMethods) {
      const Estimator est = train_estimator(flat, m, kind, fast_options());
      for (const auto& inst : flat.instances) {
        CHECK(predict_offload(est, inst.features).total == doctest::Approx(15.0).epsilon(1e-6));
      }
    }
  }
}

namespace {

// The default experiment grid simulated without noise.
const Dataset& noiseless_grid() {
  static const Dataset ds = build_dataset(run_experiment_grid(default_grid(), testing::noiseless(), 42));
  return ds;
}

double training_mae(const CollectiveEstimator& est, const Dataset& ds) {
  double e = 0.0;
  for (const auto& inst : ds.instances) e += std::abs(predict_offload(est, inst.features).total - inst.targets.total);
  return e / static_cast<double>(ds.size());
}

}  // namespace

TEST_CASE("noiseless collective forest fits its training set") {
  const Dataset& ds = noiseless_grid();
  EstimatorOptions opts;
  opts.models.forest.bootstrap = false;
  opts.models.forest.features_per_split = static_cast<int>(kParameterCount);
  const CollectiveEstimator rfr = train_collective(ds, ModelKind::Rfr, opts);
  CHECK(rfr.model.input_dim() == kParameterCount);
  CHECK(training_mae(rfr, ds) <= 0.5);

  // Default hyperparameters (bootstrap, a third of the features per split) fit less tightly
  // but still far better than a linear model.
  const double mae_default = training_mae(train_collective(ds, ModelKind::Rfr), ds);
  const double mae_mlr = training_mae(train_collective(ds, ModelKind::Mlr), ds);
  CHECK(mae_mlr > 0.0);
  CHECK(mae_default < mae_mlr);
}

TEST_CASE("noiseless individual polynomial fits cloud and fog steps") {
  const Dataset& ds = noiseless_grid();
  EstimatorOptions opts;
  opts.linearize_transfer = false;
  const IndividualEstimator est = train_individual(ds, ModelKind::Pmr, opts);
  for (StepKind step : {StepKind::Commit, StepKind::Save, StepKind::Load}) {
    const auto& comp = est.components[static_cast<std::size_t>(step)];
    double err = 0.0;
    for (const auto& inst : ds.instances) err += std::abs(comp.predict(inst.features) - inst.targets.step(step));
    CHECK(err / static_cast<double>(ds.size()) < 0.1);
  }
}

TEST_CASE("hold-out reports") {
  const Dataset ds = testing::random_dataset(40, 14);
  EvaluationPlan plan;
  plan.kinds = {ModelKind::Mlr, ModelKind::Rfr};
  plan.k_values = {};
  const auto reports = run_evaluation_plan(ds, plan, fast_options(), 3);
  REQUIRE(reports.size() == 2 * 2 * 5);
  std::size_t i = 0;
  for (Method m : kAllMethods) {
    for (ModelKind k : plan.kinds) {
      for (double f : plan.holdout_fractions) {
        const auto& r = reports[i++];
        CHECK(r.method == m);
        CHECK(r.kind == k);
        CHECK(r.n_train + r.n_test == ds.size());
        CHECK(r.n_train == static_cast<std::size_t>(std::lround(f * 40)));
        CHECK(r.step_mae.has_value() == (m == Method::Individual));
        CHECK(r.accuracy >= 0.0);
        CHECK(r.accuracy <= 100.0);
      }
    }
  }
  const auto again = run_evaluation_plan(ds, plan, fast_options(), 3);
  for (std::size_t j = 0; j < reports.size(); ++j) {
    CHECK(again[j].mae == reports[j].mae);
    CHECK(again[j].accuracy == reports[j].accuracy);
  }

  const auto rows = holdout_train_rows(40, 0.7, 3);
  CHECK(rows.size() == 28);
  CHECK(std::is_sorted(rows.begin(), rows.end()));
  CHECK(std::set<std::size_t>(rows.begin(), rows.end()).size() == 28);
  CHECK(holdout_train_rows(10, 0.99, 1).size() == 9);
  CHECK(holdout_train_rows(10, 0.01, 1).size() == 1);
}

TEST_CASE("k-fold report bookkeeping") {
  const Dataset ds = testing::random_dataset(23, 15);
  const EvalReport r = cross_validate(ds, ModelKind::Pmr, Method::Individual, 5, 2, fast_options(),
                                      AccuracyMode::R2);
  CHECK(r.split == "kfold:5");
  CHECK(r.n_test == 4);
  CHECK(r.n_train == 19);
  CHECK(r.accuracy_mode == AccuracyMode::R2);
  REQUIRE(r.step_mae.has_value());
  for (double v : *r.step_mae) CHECK(v >= 0.0);
}

TEST_CASE("estimator JSON round-trip") {
  const Dataset ds = testing::random_dataset(50, 16);
  const Dataset probe = testing::random_dataset(30, 17);
  testing::TempDir dir;
  for (ModelKind kind : kAllKinds) {
    for (Method m : kAllMethods) {
      const Estimator est = train_estimator(ds, m, kind, fast_options());
      const auto path = dir / "est.json";
      save_estimator(path, est);
      const Estimator back = load_estimator(path);
      CHECK(estimator_method(back) == m);
      CHECK(estimator_kind(back) == kind);
      for (const auto& inst : probe.instances) {
        const double a = predict_offload(est, inst.features).total;
        const double b = predict_offload(back, inst.features).total;
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
      }
    }
  }
  auto doc = estimator_to_json(train_estimator(ds, Method::Individual, ModelKind::Mlr));
  doc["components"].erase(doc["components"].begin());
  CHECK_THROWS_AS(estimator_from_json(doc), ParseError);
  CHECK_THROWS_AS(load_estimator(dir / "missing.json"), Error);
}

TEST_CASE("comparison of reports") {
  const std::vector<EvalReport> reports = {
      report(Method::Collective, ModelKind::Rfr, 6.76, 88.0),
      report(Method::Individual, ModelKind::Pmr, 1.7, 97.0),
      report(Method::Collective, ModelKind::Mlr, 12.0, 40.0),
      report(Method::Individual, ModelKind::Mlr, 3.0, 93.0),
  };
  const Comparison c = compare_reports(reports);
  CHECK(c.overall_best.method == Method::Individual);
  CHECK(c.overall_best.kind == ModelKind::Pmr);
  REQUIRE(c.best_per_method.size() == 2);
  CHECK(c.best_per_method[0].kind == ModelKind::Rfr);
  CHECK(c.best_per_method[1].kind == ModelKind::Pmr);
  REQUIRE(c.deltas.size() == 1);
  CHECK(c.deltas[0].kind == ModelKind::Mlr);
  CHECK(c.deltas[0].mae == doctest::Approx(-9.0));
  CHECK(c.deltas[0].accuracy == doctest::Approx(53.0));

  const std::vector<EvalReport> single = {report(Method::Collective, ModelKind::Svr, 2.0, 80.0)};
  const Comparison s = compare_reports(single);
  CHECK(s.overall_best.kind == ModelKind::Svr);
  CHECK(s.deltas.empty());

  // Equal MAE: higher accuracy wins, then kind name, then method name.
  const std::vector<EvalReport> tie = {report(Method::Collective, ModelKind::Svr, 2.0, 80.0),
                                       report(Method::Collective, ModelKind::Mlr, 2.0, 85.0)};
  CHECK(compare_reports(tie).overall_best.kind == ModelKind::Mlr);
  const std::vector<EvalReport> tie2 = {report(Method::Collective, ModelKind::Svr, 2.0, 80.0),
                                        report(Method::Collective, ModelKind::Mlr, 2.0, 80.0)};
  CHECK(compare_reports(tie2).overall_best.kind == ModelKind::Mlr);
  const std::vector<EvalReport> tie3 = {report(Method::Individual, ModelKind::Mlr, 2.0, 80.0),
                                        report(Method::Collective, ModelKind::Mlr, 2.0, 80.0)};
  CHECK(compare_reports(tie3).overall_best.method == Method::Collective);

  CHECK_THROWS_AS(compare_reports(std::vector<EvalReport>{}), ConfigError);

  std::ostringstream os;
  write_comparison(os, c);
  CHECK(os.str().find("im") != std::string::npos);
  CHECK(os.str().find("pmr") != std::string::npos);
}

TEST_CASE("report CSV round-trip") {
  const std::vector<EvalReport> reports = {
      report(Method::Collective, ModelKind::Rfr, 6.76, 88.0, "holdout:0.7"),
      report(Method::Individual, ModelKind::Pmr, 1.7, 97.123456789, "kfold:3"),
  };
  std::stringstream ss;
  write_report_csv(ss, reports);
  const std::string text = ss.str();
  CHECK(text.substr(0, text.find('\n')) ==
        "method,kind,split,n_train,n_test,mae,accuracy,accuracy_mode,mae_commit,mae_save,"
        "mae_transfer,mae_load,mae_start,seed");
  std::stringstream in(text);
  const auto back = read_report_csv(in);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].method == reports[i].method);
    CHECK(back[i].kind == reports[i].kind);
    CHECK(back[i].split == reports[i].split);
    CHECK(back[i].mae == reports[i].mae);
    CHECK(back[i].accuracy == reports[i].accuracy);
    CHECK(back[i].step_mae == reports[i].step_mae);
    CHECK(back[i].n_train == reports[i].n_train);
    CHECK(back[i].seed == reports[i].seed);
  }

  std::stringstream bad_header("method,kind\ncm,mlr\n");
  CHECK_THROWS_AS(read_report_csv(bad_header), ParseError);
  std::string broken = text;
  broken.replace(broken.find("rfr"), 3, "knn");
  std::stringstream bad_kind(broken);
  CHECK_THROWS_WITH_AS(read_report_csv(bad_kind), doctest::Contains("line 2"), ParseError);
  std::string neg = text;
  neg.replace(neg.find("6.76"), 4, "-1.0");
  std::stringstream bad_value(neg);
  CHECK_THROWS_AS(read_report_csv(bad_value), ParseError);
}

TEST_CASE("method and mode names") {
  CHECK(parse_method("cm") == Method::Collective);
  CHECK(method_name(Method::Individual) == "im");
  CHECK_THROWS_AS(parse_method("xm"), ConfigError);
  CHECK(parse_accuracy_mode("r2") == AccuracyMode::R2);
  CHECK(accuracy_mode_name(AccuracyMode::Mape) == "mape");
  CHECK_THROWS_AS(parse_accuracy_mode("mse"), ConfigError);
}

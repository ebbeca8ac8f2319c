#include "offload/commands.hpp"

#include <fstream>
#include <ostream>

#include "offload/config.hpp"
#include "offload/dataset.hpp"
#include "offload/error.hpp"
#include "offload/evaluation.hpp"
#include "offload/simulator.hpp"

namespace offload {

namespace {

ExperimentConfig config_or_default(const std::optional<std::filesystem::path>& path) {
  return path ? load_experiment_config(*path) : default_experiment_config();
}

Dataset load_dataset_file(const std::filesystem::path& path) {
  try {
    return read_dataset(path);
  } catch (const ParseError& e) {
    throw ParseError("dataset '" + path.string() + "': " + e.what());
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

void close_output(std::ofstream& os, const std::filesystem::path& path) {
  os.close();
  if (!os) throw Error("failed writing '" + path.string() + "'");
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    body();
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int cmd_generate(const GenerateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = config_or_default(opts.config);
    GridConfig grid = cfg.grid;
    if (opts.quick) {
      grid.stress_stride = cfg.quick_stress_stride;
      grid.image_stride = cfg.quick_image_stride;
    }
    const std::uint64_t seed = opts.seed.value_or(cfg.seed);
    const auto traces = run_experiment_grid(grid, cfg.ground_truth, seed, cfg.threads);
    const Dataset ds = build_dataset(traces);
    write_dataset(opts.out, ds);
    if (opts.traces) {
      auto os = open_output(*opts.traces);
      write_trace_jsonl(os, traces);
      close_output(os, *opts.traces);
    }
    const std::size_t samples = total_samples(traces);
    out << "instances: " << ds.size() << '\n'
        << "runtime samples: " << samples << '\n'
        << "mean samples per instance: "
        << format_double(static_cast<double>(samples) / static_cast<double>(ds.size())) << '\n'
        << "raw data points: " << kParameterCount * samples << '\n'
        << "dataset: " << opts.out.string() << '\n';
  });
}

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ModelKind kind = parse_kind(opts.kind);
    const Method method = parse_method(opts.method);
    ExperimentConfig cfg = config_or_default(opts.config);
    if (opts.seed) cfg.estimators.models.seed = *opts.seed;
    const Dataset ds = load_dataset_file(opts.dataset);
    if (ds.empty()) throw ConfigError("dataset '" + opts.dataset.string() + "' has no rows");
    const Estimator est = train_estimator(ds, method, kind, cfg.estimators);
    save_estimator(opts.out, est);
    out << "trained " << method_name(method) << '-' << kind_name(kind) << " on " << ds.size()
        << " instances -> " << opts.out.string() << '\n';
  });
}

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ExperimentConfig cfg = config_or_default(opts.config);
    EvaluationPlan plan = cfg.plan;
    if (opts.kind) plan.kinds = {parse_kind(*opts.kind)};
    if (opts.method) plan.methods = {parse_method(*opts.method)};
    if (opts.k || opts.train_fraction) {
      plan.k_values.clear();
      plan.holdout_fractions.clear();
      if (opts.k) plan.k_values = {*opts.k};
      if (opts.train_fraction) plan.holdout_fractions = {*opts.train_fraction};
    }
    if (opts.accuracy_mode) plan.accuracy_mode = parse_accuracy_mode(*opts.accuracy_mode);
    const std::uint64_t seed = opts.seed.value_or(cfg.eval_seed);

    const Dataset ds = load_dataset_file(opts.dataset);
    const auto reports = run_evaluation_plan(ds, plan, cfg.estimators, seed);

    auto os = open_output(opts.out);
    write_report_csv(os, reports);
    close_output(os, opts.out);
    if (opts.summary) {
      auto ss = open_output(*opts.summary);
      write_report_summary(ss, reports);
      close_output(ss, *opts.summary);
    }
    out << "report rows: " << reports.size() << " -> " << opts.out.string() << '\n';
  });
}

int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream is(opts.report, std::ios::binary);
    if (!is) throw Error("cannot open report '" + opts.report.string() + "'");
    std::vector<EvalReport> reports;
    try {
      reports = read_report_csv(is);
    } catch (const ParseError& e) {
      throw ParseError("report '" + opts.report.string() + "': " + e.what());
    }
    write_comparison(out, compare_reports(reports));
  });
}

}  // namespace offload

#include <iostream>

#include <CLI11.hpp>

#include "offload/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cloud-to-fog container offload simulator and offload-time estimators"};
  app.require_subcommand(1);

  offload::GenerateOptions gen;
  std::string gen_config, gen_traces;
  std::uint64_t gen_seed = 0;
  auto* generate = app.add_subcommand("generate", "Simulate the experiment grid and write a dataset CSV");
  generate->add_option("--config", gen_config, "Experiment JSON");
  generate->add_option("--out", gen.out, "Dataset CSV to write")->required();
  generate->add_option("--traces", gen_traces, "Also write raw traces as JSON lines");
  generate->add_option("--seed", gen_seed, "Grid seed (overrides the config)");
  generate->add_flag("--quick", gen.quick, "Thinned grid for smoke runs");

  offload::TrainOptions train;
  std::string train_config;
  std::uint64_t train_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Fit one estimator and save it as JSON");
  train_cmd->add_option("--config", train_config, "Experiment JSON (model hyperparameters)");
  train_cmd->add_option("--dataset", train.dataset, "Dataset CSV")->required();
  train_cmd->add_option("--out", train.out, "Model JSON to write")->required();
  train_cmd->add_option("--kind", train.kind, "mlr | pmr | rfr | svr")->capture_default_str();
  train_cmd->add_option("--method", train.method, "cm | im")->capture_default_str();
  train_cmd->add_option("--seed", train_seed, "Model seed (overrides the config)");

  offload::EvaluateOptions eval;
  std::string eval_config, eval_summary, eval_kind, eval_method, eval_mode;
  std::size_t eval_k = 0;
  double eval_fraction = 0.0;
  std::uint64_t eval_seed = 0;
  auto* evaluate = app.add_subcommand("evaluate", "Hold-out and k-fold evaluation of every method and kind");
  evaluate->add_option("--config", eval_config, "Experiment JSON (evaluation plan)");
  evaluate->add_option("--dataset", eval.dataset, "Dataset CSV")->required();
  evaluate->add_option("--out", eval.out, "Report CSV to write")->required();
  evaluate->add_option("--summary", eval_summary, "Text summary to write");
  evaluate->add_option("--kind", eval_kind, "Only this model kind");
  evaluate->add_option("--method", eval_method, "Only this method");
  evaluate->add_option("--k", eval_k, "Only this k-fold split");
  evaluate->add_option("--train-fraction", eval_fraction, "Only this hold-out split");
  evaluate->add_option("--accuracy-mode", eval_mode, "mape | r2");
  evaluate->add_option("--seed", eval_seed, "Split seed (overrides the config)");

  offload::CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "Best kind per method and IM-vs-CM deltas of a report");
  compare->add_option("--report", cmp.report, "Report CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  if (generate->parsed()) {
    if (!gen_config.empty()) gen.config = gen_config;
    if (!gen_traces.empty()) gen.traces = gen_traces;
    if (generate->count("--seed")) gen.seed = gen_seed;
    return offload::cmd_generate(gen, std::cout, std::cerr);
  }
  if (train_cmd->parsed()) {
    if (!train_config.empty()) train.config = train_config;
    if (train_cmd->count("--seed")) train.seed = train_seed;
    return offload::cmd_train(train, std::cout, std::cerr);
  }
  if (evaluate->parsed()) {
    if (!eval_config.empty()) eval.config = eval_config;
    if (!eval_summary.empty()) eval.summary = eval_summary;
    if (!eval_kind.empty()) eval.kind = eval_kind;
    if (!eval_method.empty()) eval.method = eval_method;
    if (evaluate->count("--k")) eval.k = eval_k;
    if (evaluate->count("--train-fraction")) eval.train_fraction = eval_fraction;
    if (!eval_mode.empty()) eval.accuracy_mode = eval_mode;
    if (evaluate->count("--seed")) eval.seed = eval_seed;
    return offload::cmd_evaluate(eval, std::cout, std::cerr);
  }
  return offload::cmd_compare(cmp, std::cout, std::cerr);
}

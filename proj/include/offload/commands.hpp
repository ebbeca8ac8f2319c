#pragma once

// Subcommand bodies behind the `offload` executable. Each returns the process exit code,
// prints results to `out` and diagnostics (prefixed "error:") to `err`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace offload {

struct GenerateOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  /// Optional JSON-lines dump of the raw traces.
  std::optional<std::filesystem::path> traces;
  bool quick = false;
  std::optional<std::uint64_t> seed;
};

struct TrainOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::string kind = "pmr";
  std::string method = "im";
  std::optional<std::uint64_t> seed;
};

struct EvaluateOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::optional<std::filesystem::path> summary;
  /// Restrict the plan; unset keeps the configured lists.
  std::optional<std::string> kind;
  std::optional<std::string> method;
  std::optional<std::size_t> k;
  std::optional<double> train_fraction;
  std::optional<std::string> accuracy_mode;
  std::optional<std::uint64_t> seed;
};

struct CompareOptions {
  std::filesystem::path report;
};

int cmd_generate(const GenerateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace offload

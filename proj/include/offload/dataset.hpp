#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "offload/catalog.hpp"
#include "offload/simulator.hpp"

namespace offload {

/// One aggregate row: runtime parameters averaged over the offload, offline parameters
/// copied from the configuration, and the measured step timings.
struct DatasetInstance {
  std::size_t instance_id = 0;
  int platform_id = 0;
  ParameterVector features;
  OffloadTiming targets;

  friend bool operator==(const DatasetInstance&, const DatasetInstance&) = default;
};

struct Dataset {
  std::vector<DatasetInstance> instances;

  std::size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }

  /// Rows at the given positions, instance ids kept.
  Dataset subset(std::span<const std::size_t> rows) const;
};

/// Column header, in file order.
const std::vector<std::string>& dataset_columns();

/// Offline parameters P13..P21 of a trace's configuration (runtime entries left zero).
ParameterVector offline_parameters(const TraceConfig& config);

/// Means of P1..P12 over all samples; throws ConfigError on a trace without samples.
DatasetInstance aggregate_trace(const OffloadTrace& trace);

/// Means of P1..P12 over the samples taken while `step` was active. Steps shorter than the
/// sampling interval may have no sample; the whole-offload mean is used then.
DatasetInstance aggregate_trace_window(const OffloadTrace& trace, StepKind step);

/// One instance per trace, instance_id = position.
Dataset build_dataset(std::span<const OffloadTrace> traces);

/// Per-step datasets built from step-window aggregates, indexed by StepKind.
std::array<Dataset, kStepCount> build_step_window_datasets(std::span<const OffloadTrace> traces);

/// Total per-second samples across the traces.
std::size_t total_samples(std::span<const OffloadTrace> traces);

// CSV persistence. Floats are written in shortest round-trip form so read(write(ds)) == ds.
void write_dataset(std::ostream& os, const Dataset& ds);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(std::istream& is);
Dataset read_dataset(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
/// Parses a complete decimal number; throws ParseError otherwise.
double parse_double(std::string_view text);

}  // namespace offload

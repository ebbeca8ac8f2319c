#pragma once

// Synthetic Save-and-Load offload traces.
//
// Step durations follow a closed-form ground-truth model:
//
//   D_eff(host) = base_disk_throughput * (1 - beta * disk_load)
//   f_cpu(host) = 1 + alpha * cpu_load (+ memory_coupling * memory_load)
//   commit   = c0  + image / (w_commit * D_eff(cloud)) * f_cpu(cloud)
//   save     = s0  + image / (w_save   * D_eff(cloud)) * f_cpu(cloud)
//   transfer = rho * image * 8e6 / bandwidth_bps + latency_ms / 1000
//   load     = l0  + image / (w_load   * D_eff(fog))   * f_cpu(fog)
//   start    = st0 + kappa * ln(1 + image)
//
// each multiplied by (1 + e), e ~ N(0, eta^2) truncated to e > -1.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "offload/catalog.hpp"
#include "offload/rng.hpp"

namespace offload {

struct GroundTruthModel {
  double commit_overhead_s = 0.5;   // c0
  double save_overhead_s = 0.3;     // s0
  double load_overhead_s = 0.4;     // l0
  double start_overhead_s = 0.8;    // st0
  double commit_work_divisor = 1.0;
  double save_work_divisor = 0.7;
  double load_work_divisor = 0.8;
  double cpu_contention = 1.0;      // alpha
  double disk_contention = 0.5;     // beta, in [0, 1)
  double compression_ratio = 0.4;   // rho, in (0, 1]
  double start_size_slope = 0.05;   // kappa
  double noise = 0.05;              // eta; 0 makes durations exact
  /// Extra CPU slowdown per unit of memory stress. 0 keeps memory out of the durations.
  double memory_coupling = 0.0;
  /// Standard deviation (percentage points) of the per-sample jitter on runtime parameters.
  double sample_jitter = 1.0;

  void validate() const;
};

/// Duration of one step. With `model.noise == 0` no random numbers are drawn.
double step_duration(StepKind step, const GroundTruthModel& model, const PlatformSpec& cloud,
                     const PlatformSpec& fog, const NetworkProfile& net,
                     const StressProfile& stress, double image_mb, Rng& rng);

/// One-second runtime observation taken while an offload is in progress.
struct RuntimeSample {
  double timestamp = 0.0;
  StepKind active_step = StepKind::Commit;
  /// P1..P12.
  std::array<double, 12> runtime{};
};

struct TraceConfig {
  int platform_id = 0;
  PlatformSpec cloud;
  PlatformSpec fog;
  NetworkProfile network;
  StressProfile stress;
  double image_mb = 0.0;
  std::uint64_t seed = 0;
};

struct OffloadTrace {
  TraceConfig config;
  std::vector<RuntimeSample> samples;
  OffloadTiming timing;
};

/// Runs one offload: five step durations, then one sample per elapsed second
/// (ceil(t_offload) samples at t = 0, 1, ...).
OffloadTrace simulate_offload(const GroundTruthModel& model, const TraceConfig& config);

OffloadTrace simulate_offload(const GroundTruthModel& model, const PlatformSpec& cloud,
                              const PlatformSpec& fog, const NetworkProfile& net,
                              const StressProfile& stress, double image_mb, std::uint64_t seed);

/// A cloud/fog host pair and the links it was measured over.
struct PlatformPair {
  int id = 1;
  PlatformSpec cloud;
  PlatformSpec fog;
  std::vector<double> bandwidths_bps;
  double latency_ms = 30.0;
};

/// Stress increments applied one resource at a time, each capped at `cap` of capacity.
struct StressSchedule {
  double cpu_step = 0.10;
  double cloud_memory_step_gb = 1.0;
  double fog_memory_step_gb = 0.5;
  double cloud_disk_step_gb = 4.0;
  double fog_disk_step_gb = 2.0;
  double cap = kMaxStressFraction;

  void validate() const;
};

/// Baseline, then a CPU sweep, a memory sweep and a disk sweep for the pair.
std::vector<StressProfile> stress_levels(const PlatformPair& pair, const StressSchedule& schedule);

struct GridConfig {
  std::vector<PlatformPair> platforms;
  StressSchedule stress;
  std::vector<double> image_sizes_mb;
  /// Keep every n-th stress level / image size (1 = full grid).
  std::size_t stress_stride = 1;
  std::size_t image_stride = 1;

  void validate() const;
};

/// Two testbed platforms with their bandwidth grids and the default stress schedule and images.
GridConfig default_grid();

/// Grid thinned roughly ten-fold for quick runs.
GridConfig quick_grid(GridConfig grid);

/// Every grid cell in the fixed enumeration order platform, bandwidth, stress level, image.
std::vector<TraceConfig> enumerate_cells(const GridConfig& grid, std::uint64_t seed);

/// One trace per cell; cell c uses seed derive_seed(seed, c), so the result does not depend on
/// `threads`.
std::vector<OffloadTrace> run_experiment_grid(const GridConfig& grid,
                                              const GroundTruthModel& model, std::uint64_t seed,
                                              unsigned threads = 1);

// JSON-lines trace files: one trace object per line.
void write_trace_jsonl(std::ostream& os, std::span<const OffloadTrace> traces);
std::vector<OffloadTrace> read_trace_jsonl(std::istream& is);

}  // namespace offload

#pragma once

// Parameter catalogue, step timings and host/network/stress descriptions for
// Cloud-to-Fog container offloading with the Save-and-Load technique.

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace offload {

inline constexpr std::size_t kParameterCount = 21;

/// The five steps of a Save-and-Load offload, in execution order.
enum class StepKind { Commit = 0, Save, Transfer, Load, Start };

inline constexpr std::size_t kStepCount = 5;
inline constexpr std::array<StepKind, kStepCount> kAllSteps = {
    StepKind::Commit, StepKind::Save, StepKind::Transfer, StepKind::Load, StepKind::Start};

std::string_view step_name(StepKind step);
StepKind parse_step(std::string_view name);

/// One offload instance described by parameters P1..P21.
///
/// Runtime parameters (P1..P12) are system and offloading-process utilisation on the
/// cloud (P1..P6) and fog (P7..P12) hosts. Offline parameters are the image size
/// (P13), host sizes (P14..P19) and the link between the hosts (P20, P21).
/// Percentages are stored on a 0..100 scale.
struct ParameterVector {
  std::array<double, kParameterCount> values{};

  /// 1-based access matching the P1..P21 numbering.
  double& p(int index) { return values.at(static_cast<std::size_t>(index - 1)); }
  double p(int index) const { return values.at(static_cast<std::size_t>(index - 1)); }

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;
};

/// Column names p1..p21.
std::string parameter_name(int index);

/// Returns every violated ParameterVector invariant; an empty list means the vector is valid.
std::vector<std::string> validate_parameter_vector(const ParameterVector& pv);

/// Durations of the five steps and their sum.
struct OffloadTiming {
  double commit = 0.0;
  double save = 0.0;
  double transfer = 0.0;
  double load = 0.0;
  double start = 0.0;
  double total = 0.0;

  /// Builds a timing whose total is the sum of the given step durations.
  static OffloadTiming from_steps(double commit, double save, double transfer, double load,
                                  double start);

  double step(StepKind s) const;
  double& step(StepKind s);

  /// True when `total` equals the step sum within `rel_tol` (relative to the larger magnitude).
  bool is_consistent(double rel_tol = 1e-9) const;

  friend bool operator==(const OffloadTiming&, const OffloadTiming&) = default;
};

/// t_offload = t_commit + t_save + t_transfer + t_load + t_start.
/// Throws ConfigError on a negative or non-finite component.
double total_offload_time(double commit, double save, double transfer, double load, double start);

/// Ascending, duplicate-free set of 1-based parameter indices fed to one model.
class FeatureMask {
 public:
  /// Sorts the indices; throws ConfigError if empty, out of 1..21, or duplicated.
  explicit FeatureMask(std::vector<int> indices);
  FeatureMask(std::initializer_list<int> indices) : FeatureMask(std::vector<int>(indices)) {}

  const std::vector<int>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool contains(int index) const;
  bool is_subset_of(const FeatureMask& other) const;

  /// The masked entries of `pv`, in mask order.
  std::vector<double> select(const ParameterVector& pv) const;

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;

 private:
  std::vector<int> indices_;
};

/// Inputs that influence the given step:
/// commit, save -> P1..P6, P13..P19; transfer -> P13, P20, P21; load, start -> P7..P19.
FeatureMask make_feature_mask(StepKind step);

/// All 21 parameters.
FeatureMask make_collective_mask();

enum class HostRole { Cloud, Fog };

std::string_view host_role_name(HostRole role);

struct PlatformSpec {
  double cores = 1.0;
  double memory_gb = 1.0;
  double disk_gb = 1.0;
  /// Sequential disk throughput of an unloaded host, MB/s. Simulation constant.
  double base_disk_throughput_mbps = 100.0;
  HostRole role = HostRole::Cloud;

  void validate() const;

  friend bool operator==(const PlatformSpec&, const PlatformSpec&) = default;
};

/// Default disk throughput (MB/s) for a host of the given role.
double default_disk_throughput(HostRole role);

struct NetworkProfile {
  double bandwidth_bps = 1e8;
  double latency_ms = 0.0;

  void validate() const;

  friend bool operator==(const NetworkProfile&, const NetworkProfile&) = default;
};

/// Background load placed on one host, each as a fraction of capacity.
struct HostStress {
  double cpu_load = 0.0;
  double memory_load = 0.0;
  double disk_load = 0.0;

  friend bool operator==(const HostStress&, const HostStress&) = default;
};

inline constexpr double kMaxStressFraction = 0.75;

struct StressProfile {
  HostStress cloud;
  HostStress fog;

  /// Every fraction must lie in [0, 0.75].
  void validate() const;

  friend bool operator==(const StressProfile&, const StressProfile&) = default;
};

}  // namespace offload

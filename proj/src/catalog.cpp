#include "offload/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "offload/error.hpp"

namespace offload {

namespace {

std::vector<int> index_range(int first, int last) {
  std::vector<int> out(static_cast<std::size_t>(last - first + 1));
  std::iota(out.begin(), out.end(), first);
  return out;
}

std::vector<int> concat(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  for (int v : a) out.push_back(v);
  for (int v : b) out.push_back(v);
  return out;
}

bool is_percent_parameter(int index) {
  return (index >= 1 && index <= 5) || (index >= 7 && index <= 11);
}

}  // namespace

std::string_view step_name(StepKind step) {
  switch (step) {
    case StepKind::Commit: return "commit";
    case StepKind::Save: return "save";
    case StepKind::Transfer: return "transfer";
    case StepKind::Load: return "load";
    case StepKind::Start: return "start";
  }
  return "unknown";
}

StepKind parse_step(std::string_view name) {
  for (StepKind s : kAllSteps) {
    if (step_name(s) == name) return s;
  }
  throw ConfigError("unknown step '" + std::string(name) + "'");
}

std::string parameter_name(int index) { return "p" + std::to_string(index); }

std::vector<std::string> validate_parameter_vector(const ParameterVector& pv) {
  std::vector<std::string> violations;
  for (int i = 1; i <= static_cast<int>(kParameterCount); ++i) {
    const double v = pv.p(i);
    const std::string name = parameter_name(i);
    if (!std::isfinite(v)) {
      violations.push_back(name + " must be finite");
      continue;
    }
    if (is_percent_parameter(i)) {
      if (v < 0.0 || v > 100.0) violations.push_back(name + " out of [0,100]");
    } else if (i == 6 || i == 12 || i == 21) {
      if (v < 0.0) violations.push_back(name + " must be >= 0");
    } else if (i == 14 || i == 17) {
      if (v < 1.0) violations.push_back(name + " must be >= 1");
    } else if (v <= 0.0) {
      violations.push_back(name + " must be > 0");
    }
  }
  return violations;
}

OffloadTiming OffloadTiming::from_steps(double commit, double save, double transfer, double load,
                                        double start) {
  OffloadTiming t;
  t.commit = commit;
  t.save = save;
  t.transfer = transfer;
  t.load = load;
  t.start = start;
  t.total = total_offload_time(commit, save, transfer, load, start);
  return t;
}

double OffloadTiming::step(StepKind s) const {
  switch (s) {
    case StepKind::Commit: return commit;
    case StepKind::Save: return save;
    case StepKind::Transfer: return transfer;
    case StepKind::Load: return load;
    case StepKind::Start: return start;
  }
  return 0.0;
}

double& OffloadTiming::step(StepKind s) {
  switch (s) {
    case StepKind::Commit: return commit;
    case StepKind::Save: return save;
    case StepKind::Transfer: return transfer;
    case StepKind::Load: return load;
    case StepKind::Start: break;
  }
  return start;
}

bool OffloadTiming::is_consistent(double rel_tol) const {
  const double sum = commit + save + transfer + load + start;
  const double scale = std::max({std::abs(sum), std::abs(total), 1e-300});
  return std::abs(sum - total) <= rel_tol * scale;
}

double total_offload_time(double commit, double save, double transfer, double load,
                          double start) {
  const std::array<double, kStepCount> parts = {commit, save, transfer, load, start};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!std::isfinite(parts[i]) || parts[i] < 0.0) {
      throw ConfigError("step duration t_" + std::string(step_name(kAllSteps[i])) +
                        " must be finite and >= 0");
    }
  }
  return commit + save + transfer + load + start;
}

FeatureMask::FeatureMask(std::vector<int> indices) : indices_(std::move(indices)) {
  if (indices_.empty()) throw ConfigError("feature mask must not be empty");
  std::sort(indices_.begin(), indices_.end());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 1 || indices_[i] > static_cast<int>(kParameterCount)) {
      throw ConfigError("feature mask index " + std::to_string(indices_[i]) +
                        " out of range 1..21");
    }
    if (i > 0 && indices_[i] == indices_[i - 1]) {
      throw ConfigError("feature mask index " + std::to_string(indices_[i]) + " repeated");
    }
  }
}

bool FeatureMask::contains(int index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

bool FeatureMask::is_subset_of(const FeatureMask& other) const {
  return std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(),
                       indices_.end());
}

std::vector<double> FeatureMask::select(const ParameterVector& pv) const {
  std::vector<double> out;
  out.reserve(indices_.size());
  for (int i : indices_) out.push_back(pv.p(i));
  return out;
}

FeatureMask make_feature_mask(StepKind step) {
  switch (step) {
    case StepKind::Commit:
    case StepKind::Save:
      return FeatureMask(concat(index_range(1, 6), index_range(13, 19)));
    case StepKind::Transfer:
      return FeatureMask({13, 20, 21});
    case StepKind::Load:
    case StepKind::Start:
      return FeatureMask(index_range(7, 19));
  }
  throw ConfigError("unknown step");
}

FeatureMask make_collective_mask() {
  return FeatureMask(index_range(1, static_cast<int>(kParameterCount)));
}

std::string_view host_role_name(HostRole role) {
  return role == HostRole::Cloud ? "cloud" : "fog";
}

double default_disk_throughput(HostRole role) { return role == HostRole::Cloud ? 200.0 : 100.0; }

void PlatformSpec::validate() const {
  const std::string who(host_role_name(role));
  auto positive = [&](double v, const char* field) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw ConfigError(who + " platform: " + field + " must be > 0");
    }
  };
  positive(cores, "cores");
  positive(memory_gb, "memory_gb");
  positive(disk_gb, "disk_gb");
  positive(base_disk_throughput_mbps, "base_disk_throughput_mbps");
  if (cores < 1.0) throw ConfigError(who + " platform: cores must be >= 1");
}

void NetworkProfile::validate() const {
  if (!std::isfinite(bandwidth_bps) || bandwidth_bps <= 0.0) {
    throw ConfigError("network bandwidth_bps must be > 0");
  }
  if (!std::isfinite(latency_ms) || latency_ms < 0.0) {
    throw ConfigError("network latency_ms must be >= 0");
  }
}

void StressProfile::validate() const {
  auto check = [](const HostStress& h, const char* host) {
    const std::array<std::pair<double, const char*>, 3> fields = {
        std::pair{h.cpu_load, "cpu_load"}, std::pair{h.memory_load, "memory_load"},
        std::pair{h.disk_load, "disk_load"}};
    for (const auto& [v, name] : fields) {
      if (!std::isfinite(v) || v < 0.0 || v > kMaxStressFraction + 1e-12) {
        throw ConfigError(std::string(host) + " stress " + name + " must lie in [0, 0.75]");
      }
    }
  };
  check(cloud, "cloud");
  check(fog, "fog");
}

}  // namespace offload

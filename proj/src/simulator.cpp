#include "offload/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "offload/error.hpp"

namespace offload {

namespace {

using nlohmann::json;

constexpr double kIdleCpuPct = 2.0;
constexpr double kBaseMemoryPct = 8.0;
constexpr double kIdleDiskPct = 1.0;
// Disk utilisation reported per unit of disk stress.
constexpr double kDiskStressUtilPct = 60.0;

// What the offloading process does on one host while a step is active.
struct Activity {
  double cpu_cores = 0.0;
  double memory_pct = 0.0;
  double disk_busy_pct = 0.0;
  double throughput_share = 0.0;  // of the host's effective disk throughput
};

Activity cloud_activity(StepKind step) {
  switch (step) {
    case StepKind::Commit: return {0.8, 2.0, 30.0, 0.8};
    case StepKind::Save: return {1.0, 3.0, 35.0, 0.7};
    case StepKind::Transfer: return {0.1, 1.0, 0.0, 0.0};
    case StepKind::Load:
    case StepKind::Start: break;
  }
  return {};
}

Activity fog_activity(StepKind step) {
  switch (step) {
    case StepKind::Transfer: return {0.1, 1.0, 0.0, 0.0};
    case StepKind::Load: return {0.5, 3.0, 40.0, 0.8};
    case StepKind::Start: return {0.3, 4.0, 10.0, 0.2};
    case StepKind::Commit:
    case StepKind::Save: break;
  }
  return {};
}

double effective_throughput(const GroundTruthModel& model, const PlatformSpec& host,
                            const HostStress& stress) {
  const double d = host.base_disk_throughput_mbps * (1.0 - model.disk_contention * stress.disk_load);
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw ConfigError("effective disk throughput must be > 0");
  }
  return d;
}

double cpu_factor(const GroundTruthModel& model, const HostStress& stress) {
  return 1.0 + model.cpu_contention * stress.cpu_load + model.memory_coupling * stress.memory_load;
}

double clamp_pct(double v) { return std::clamp(v, 0.0, 100.0); }

// Fills P1..P6 (offset 0) or P7..P12 (offset 6) for one host at one instant.
void sample_host(const Activity& act, const PlatformSpec& host, const HostStress& stress,
                 double d_eff_mbps, double jitter_sd, Rng& rng, std::array<double, 12>& out,
                 std::size_t offset) {
  std::normal_distribution<double> jitter(0.0, 1.0);
  auto noisy = [&](double v) { return jitter_sd > 0.0 ? v + jitter_sd * jitter(rng) : v; };

  const bool active = act.cpu_cores > 0.0;
  const double proc_cpu = active ? clamp_pct(noisy(100.0 * act.cpu_cores / host.cores)) : 0.0;
  const double proc_mem = active ? clamp_pct(noisy(act.memory_pct)) : 0.0;
  double throughput = 0.0;
  if (act.throughput_share > 0.0) {
    const double scale = jitter_sd > 0.0 ? 1.0 + 0.01 * jitter_sd * jitter(rng) : 1.0;
    throughput = std::max(0.0, act.throughput_share * d_eff_mbps * 1e6 * scale);
  }

  out[offset + 0] = clamp_pct(noisy(kIdleCpuPct + 100.0 * stress.cpu_load + proc_cpu));
  out[offset + 1] = clamp_pct(noisy(kBaseMemoryPct + 100.0 * stress.memory_load + proc_mem));
  out[offset + 2] =
      clamp_pct(noisy(kIdleDiskPct + kDiskStressUtilPct * stress.disk_load + act.disk_busy_pct));
  out[offset + 3] = proc_cpu;
  out[offset + 4] = proc_mem;
  out[offset + 5] = throughput;
}

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) throw ConfigError(std::string(name) + " must be > 0");
}

void require_non_negative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string(name) + " must be >= 0");
}

template <typename T>
std::vector<T> strided(const std::vector<T>& v, std::size_t stride) {
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
  return out;
}

// Number of whole increments of `step` that stay within `cap` of `capacity`.
int increments_within(double step, double capacity, double cap) {
  return static_cast<int>(std::floor(cap * capacity / step + 1e-9));
}

json platform_to_json(const PlatformSpec& p) {
  return {{"cores", p.cores},
          {"memory_gb", p.memory_gb},
          {"disk_gb", p.disk_gb},
          {"base_disk_throughput_mbps", p.base_disk_throughput_mbps}};
}

PlatformSpec platform_from_json(const json& j, HostRole role) {
  PlatformSpec p;
  p.cores = j.at("cores").get<double>();
  p.memory_gb = j.at("memory_gb").get<double>();
  p.disk_gb = j.at("disk_gb").get<double>();
  p.base_disk_throughput_mbps = j.at("base_disk_throughput_mbps").get<double>();
  p.role = role;
  return p;
}

json host_stress_to_json(const HostStress& h) {
  return {{"cpu_load", h.cpu_load}, {"memory_load", h.memory_load}, {"disk_load", h.disk_load}};
}

HostStress host_stress_from_json(const json& j) {
  return {j.at("cpu_load").get<double>(), j.at("memory_load").get<double>(),
          j.at("disk_load").get<double>()};
}

json trace_to_json(const OffloadTrace& t) {
  json samples = json::array();
  for (const auto& s : t.samples) {
    samples.push_back(
        {{"t", s.timestamp}, {"step", step_name(s.active_step)}, {"p", s.runtime}});
  }
  const auto& c = t.config;
  return {{"platform_id", c.platform_id},
          {"seed", c.seed},
          {"image_mb", c.image_mb},
          {"cloud", platform_to_json(c.cloud)},
          {"fog", platform_to_json(c.fog)},
          {"network", {{"bandwidth_bps", c.network.bandwidth_bps},
                       {"latency_ms", c.network.latency_ms}}},
          {"stress", {{"cloud", host_stress_to_json(c.stress.cloud)},
                      {"fog", host_stress_to_json(c.stress.fog)}}},
          {"timing", {{"t_commit", t.timing.commit},
                      {"t_save", t.timing.save},
                      {"t_transfer", t.timing.transfer},
                      {"t_load", t.timing.load},
                      {"t_start", t.timing.start},
                      {"t_offload", t.timing.total}}},
          {"samples", std::move(samples)}};
}

OffloadTrace trace_from_json(const json& j) {
  OffloadTrace t;
  auto& c = t.config;
  c.platform_id = j.at("platform_id").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.image_mb = j.at("image_mb").get<double>();
  c.cloud = platform_from_json(j.at("cloud"), HostRole::Cloud);
  c.fog = platform_from_json(j.at("fog"), HostRole::Fog);
  c.network.bandwidth_bps = j.at("network").at("bandwidth_bps").get<double>();
  c.network.latency_ms = j.at("network").at("latency_ms").get<double>();
  c.stress.cloud = host_stress_from_json(j.at("stress").at("cloud"));
  c.stress.fog = host_stress_from_json(j.at("stress").at("fog"));
  const auto& tj = j.at("timing");
  t.timing.commit = tj.at("t_commit").get<double>();
  t.timing.save = tj.at("t_save").get<double>();
  t.timing.transfer = tj.at("t_transfer").get<double>();
  t.timing.load = tj.at("t_load").get<double>();
  t.timing.start = tj.at("t_start").get<double>();
  t.timing.total = tj.at("t_offload").get<double>();
  for (const auto& sj : j.at("samples")) {
    RuntimeSample s;
    s.timestamp = sj.at("t").get<double>();
    s.active_step = parse_step(sj.at("step").get<std::string>());
    s.runtime = sj.at("p").get<std::array<double, 12>>();
    t.samples.push_back(s);
  }
  return t;
}

}  // namespace

void GroundTruthModel::validate() const {
  require_non_negative(commit_overhead_s, "commit_overhead_s");
  require_non_negative(save_overhead_s, "save_overhead_s");
  require_non_negative(load_overhead_s, "load_overhead_s");
  require_non_negative(start_overhead_s, "start_overhead_s");
  require_positive(commit_work_divisor, "commit_work_divisor");
  require_positive(save_work_divisor, "save_work_divisor");
  require_positive(load_work_divisor, "load_work_divisor");
  require_non_negative(cpu_contention, "cpu_contention");
  require_non_negative(disk_contention, "disk_contention");
  if (disk_contention >= 1.0) throw ConfigError("disk_contention must be < 1");
  require_positive(compression_ratio, "compression_ratio");
  if (compression_ratio > 1.0) throw ConfigError("compression_ratio must be <= 1");
  require_non_negative(start_size_slope, "start_size_slope");
  require_non_negative(noise, "noise");
  require_non_negative(memory_coupling, "memory_coupling");
  require_non_negative(sample_jitter, "sample_jitter");
}

double step_duration(StepKind step, const GroundTruthModel& model, const PlatformSpec& cloud,
                     const PlatformSpec& fog, const NetworkProfile& net,
                     const StressProfile& stress, double image_mb, Rng& rng) {
  if (!std::isfinite(image_mb) || image_mb < 0.0) throw ConfigError("image_mb must be >= 0");
  double d = 0.0;
  switch (step) {
    case StepKind::Commit:
      d = model.commit_overhead_s +
          image_mb / (model.commit_work_divisor * effective_throughput(model, cloud, stress.cloud)) *
              cpu_factor(model, stress.cloud);
      break;
    case StepKind::Save:
      d = model.save_overhead_s +
          image_mb / (model.save_work_divisor * effective_throughput(model, cloud, stress.cloud)) *
              cpu_factor(model, stress.cloud);
      break;
    case StepKind::Transfer:
      d = model.compression_ratio * image_mb * 8e6 / net.bandwidth_bps + net.latency_ms / 1000.0;
      break;
    case StepKind::Load:
      d = model.load_overhead_s +
          image_mb / (model.load_work_divisor * effective_throughput(model, fog, stress.fog)) *
              cpu_factor(model, stress.fog);
      break;
    case StepKind::Start:
      d = model.start_overhead_s + model.start_size_slope * std::log1p(image_mb);
      break;
  }
  if (model.noise > 0.0) {
    std::normal_distribution<double> noise(0.0, model.noise);
    double e = noise(rng);
    while (e <= -1.0) e = noise(rng);
    d *= 1.0 + e;
  }
  if (!std::isfinite(d) || d < 0.0) throw ConfigError("step duration is not finite");
  return d;
}

OffloadTrace simulate_offload(const GroundTruthModel& model, const TraceConfig& config) {
  model.validate();
  config.cloud.validate();
  config.fog.validate();
  config.network.validate();
  config.stress.validate();
  if (!std::isfinite(config.image_mb) || config.image_mb <= 0.0) {
    throw ConfigError("image_mb must be > 0");
  }

  Rng rng(config.seed);
  std::array<double, kStepCount> durations{};
  for (std::size_t i = 0; i < kStepCount; ++i) {
    durations[i] = step_duration(kAllSteps[i], model, config.cloud, config.fog, config.network,
                                 config.stress, config.image_mb, rng);
  }

  OffloadTrace trace;
  trace.config = config;
  trace.timing = OffloadTiming::from_steps(durations[0], durations[1], durations[2],
                                           durations[3], durations[4]);

  std::array<double, kStepCount> step_end{};
  double elapsed = 0.0;
  for (std::size_t i = 0; i < kStepCount; ++i) {
    elapsed += durations[i];
    step_end[i] = elapsed;
  }

  const double d_cloud = effective_throughput(model, config.cloud, config.stress.cloud);
  const double d_fog = effective_throughput(model, config.fog, config.stress.fog);
  const auto count = static_cast<std::size_t>(std::ceil(trace.timing.total));
  trace.samples.reserve(count);
  std::size_t step = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k);
    while (step + 1 < kStepCount && t >= step_end[step]) ++step;
    RuntimeSample s;
    s.timestamp = t;
    s.active_step = kAllSteps[step];
    sample_host(cloud_activity(s.active_step), config.cloud, config.stress.cloud, d_cloud,
                model.sample_jitter, rng, s.runtime, 0);
    sample_host(fog_activity(s.active_step), config.fog, config.stress.fog, d_fog,
                model.sample_jitter, rng, s.runtime, 6);
    trace.samples.push_back(s);
  }
  return trace;
}

OffloadTrace simulate_offload(const GroundTruthModel& model, const PlatformSpec& cloud,
                              const PlatformSpec& fog, const NetworkProfile& net,
                              const StressProfile& stress, double image_mb, std::uint64_t seed) {
  TraceConfig config;
  config.cloud = cloud;
  config.fog = fog;
  config.network = net;
  config.stress = stress;
  config.image_mb = image_mb;
  config.seed = seed;
  return simulate_offload(model, config);
}

void StressSchedule::validate() const {
  require_positive(cpu_step, "stress cpu_step");
  require_positive(cloud_memory_step_gb, "stress cloud_memory_step_gb");
  require_positive(fog_memory_step_gb, "stress fog_memory_step_gb");
  require_positive(cloud_disk_step_gb, "stress cloud_disk_step_gb");
  require_positive(fog_disk_step_gb, "stress fog_disk_step_gb");
  if (!(cap > 0.0) || cap > kMaxStressFraction) throw ConfigError("stress cap must lie in (0, 0.75]");
}

std::vector<StressProfile> stress_levels(const PlatformPair& pair, const StressSchedule& schedule) {
  std::vector<StressProfile> levels;
  levels.push_back(StressProfile{});

  const int cpu_steps = increments_within(schedule.cpu_step, 1.0, schedule.cap);
  for (int i = 1; i <= cpu_steps; ++i) {
    StressProfile s;
    s.cloud.cpu_load = s.fog.cpu_load = i * schedule.cpu_step;
    levels.push_back(s);
  }

  // Paired sweeps: level i stresses both hosts by i units, each host holding at its last
  // level once its cap is reached.
  auto paired = [&](double cloud_step, double cloud_capacity, double fog_step,
                    double fog_capacity, double HostStress::*field) {
    const int nc = increments_within(cloud_step, cloud_capacity, schedule.cap);
    const int nf = increments_within(fog_step, fog_capacity, schedule.cap);
    for (int i = 1; i <= std::max(nc, nf); ++i) {
      StressProfile s;
      s.cloud.*field = std::min(i, nc) * cloud_step / cloud_capacity;
      s.fog.*field = std::min(i, nf) * fog_step / fog_capacity;
      levels.push_back(s);
    }
  };
  paired(schedule.cloud_memory_step_gb, pair.cloud.memory_gb, schedule.fog_memory_step_gb,
         pair.fog.memory_gb, &HostStress::memory_load);
  paired(schedule.cloud_disk_step_gb, pair.cloud.disk_gb, schedule.fog_disk_step_gb,
         pair.fog.disk_gb, &HostStress::disk_load);
  return levels;
}

void GridConfig::validate() const {
  if (platforms.empty()) throw ConfigError("grid: platform list is empty");
  if (image_sizes_mb.empty()) throw ConfigError("grid: image size list is empty");
  if (stress_stride == 0 || image_stride == 0) throw ConfigError("grid: strides must be >= 1");
  stress.validate();
  for (const auto& p : platforms) {
    p.cloud.validate();
    p.fog.validate();
    if (p.bandwidths_bps.empty()) {
      throw ConfigError("grid: platform " + std::to_string(p.id) + " has an empty bandwidth list");
    }
    for (double bw : p.bandwidths_bps) NetworkProfile{bw, p.latency_ms}.validate();
  }
  for (double s : image_sizes_mb) {
    if (!std::isfinite(s) || s <= 0.0) throw ConfigError("grid: image sizes must be > 0");
  }
}

GridConfig default_grid() {
  GridConfig g;
  PlatformPair p1;
  p1.id = 1;
  p1.cloud = {6, 6, 30, default_disk_throughput(HostRole::Cloud), HostRole::Cloud};
  p1.fog = {2, 2, 20, default_disk_throughput(HostRole::Fog), HostRole::Fog};
  p1.bandwidths_bps = {25e6, 50e6, 100e6, 1000e6};
  p1.latency_ms = 30.0;
  PlatformPair p2;
  p2.id = 2;
  p2.cloud = {4, 8, 80, default_disk_throughput(HostRole::Cloud), HostRole::Cloud};
  p2.fog = {2, 4, 40, default_disk_throughput(HostRole::Fog), HostRole::Fog};
  p2.bandwidths_bps = {3.2e6};
  p2.latency_ms = 30.0;
  g.platforms = {p1, p2};
  g.image_sizes_mb = {25, 50, 100, 150, 200, 250, 300, 350};
  return g;
}

GridConfig quick_grid(GridConfig grid) {
  grid.stress_stride = 5;
  grid.image_stride = 2;
  return grid;
}

std::vector<TraceConfig> enumerate_cells(const GridConfig& grid, std::uint64_t seed) {
  grid.validate();
  const auto images = strided(grid.image_sizes_mb, grid.image_stride);
  std::vector<TraceConfig> cells;
  for (const auto& pair : grid.platforms) {
    const auto levels = strided(stress_levels(pair, grid.stress), grid.stress_stride);
    for (double bw : pair.bandwidths_bps) {
      for (const auto& stress : levels) {
        for (double image : images) {
          TraceConfig c;
          c.platform_id = pair.id;
          c.cloud = pair.cloud;
          c.fog = pair.fog;
          c.network = {bw, pair.latency_ms};
          c.stress = stress;
          c.image_mb = image;
          c.seed = derive_seed(seed, cells.size());
          cells.push_back(c);
        }
      }
    }
  }
  return cells;
}

std::vector<OffloadTrace> run_experiment_grid(const GridConfig& grid,
                                              const GroundTruthModel& model, std::uint64_t seed,
                                              unsigned threads) {
  model.validate();
  const auto cells = enumerate_cells(grid, seed);
  std::vector<OffloadTrace> traces(cells.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, cells.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) traces[i] = simulate_offload(model, cells[i]);
    return traces;
  }
  std::vector<std::exception_ptr> failures(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < cells.size(); i += workers) {
            traces[i] = simulate_offload(model, cells[i]);
          }
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return traces;
}

void write_trace_jsonl(std::ostream& os, std::span<const OffloadTrace> traces) {
  for (const auto& t : traces) os << trace_to_json(t).dump() << '\n';
}

std::vector<OffloadTrace> read_trace_jsonl(std::istream& is) {
  std::vector<OffloadTrace> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(trace_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace offload

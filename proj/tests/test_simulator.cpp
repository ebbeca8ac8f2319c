#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "offload/error.hpp"
#include "offload/simulator.hpp"
#include "support.hpp"

using namespace offload;

namespace {

double closed_form(StepKind step, const GroundTruthModel& m, const TraceConfig& c) {
  auto d_eff = [&](const PlatformSpec& h, const HostStress& s) {
    return h.base_disk_throughput_mbps * (1.0 - m.disk_contention * s.disk_load);
  };
  auto f_cpu = [&](const HostStress& s) {
    return 1.0 + m.cpu_contention * s.cpu_load + m.memory_coupling * s.memory_load;
  };
  const double s = c.image_mb;
  switch (step) {
    case StepKind::Commit:
      return m.commit_overhead_s +
             s / (m.commit_work_divisor * d_eff(c.cloud, c.stress.cloud)) * f_cpu(c.stress.cloud);
    case StepKind::Save:
      return m.save_overhead_s +
             s / (m.save_work_divisor * d_eff(c.cloud, c.stress.cloud)) * f_cpu(c.stress.cloud);
    case StepKind::Transfer:
      return m.compression_ratio * s * 8e6 / c.network.bandwidth_bps + c.network.latency_ms / 1000;
    case StepKind::Load:
      return m.load_overhead_s +
             s / (m.load_work_divisor * d_eff(c.fog, c.stress.fog)) * f_cpu(c.stress.fog);
    case StepKind::Start:
      return m.start_overhead_s + m.start_size_slope * std::log(1.0 + s);
  }
  return 0.0;
}

double duration(StepKind step, const GroundTruthModel& m, const TraceConfig& c) {
  Rng rng(1);
  return step_duration(step, m, c.cloud, c.fog, c.network, c.stress, c.image_mb, rng);
}

TraceConfig base_cell() {
  TraceConfig c;
  c.platform_id = 1;
  c.cloud = testing::cloud_host();
  c.fog = testing::fog_host();
  c.network = {100e6, 30};
  c.image_mb = 100;
  c.seed = 5;
  return c;
}

void check_same(const OffloadTrace& a, const OffloadTrace& b) {
  REQUIRE(a.samples.size() == b.samples.size());
  CHECK(a.timing == b.timing);
  CHECK(a.config.seed == b.config.seed);
  CHECK(a.config.stress == b.config.stress);
  CHECK(a.config.network == b.config.network);
  CHECK(a.config.image_mb == b.config.image_mb);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].timestamp == b.samples[i].timestamp);
    CHECK(a.samples[i].active_step == b.samples[i].active_step);
    CHECK(a.samples[i].runtime == b.samples[i].runtime);
  }
}

}  // namespace

TEST_CASE("worked step durations") {
  const GroundTruthModel m = testing::noiseless();
  TraceConfig c = base_cell();
  // 0.4 * 100 MB * 8e6 bit/MB over 1e8 bit/s, plus 30 ms.
  CHECK(duration(StepKind::Transfer, m, c) == doctest::Approx(3.2 + 0.03).epsilon(1e-12));

  GroundTruthModel flat = m;
  flat.start_size_slope = 0.0;
  c.image_mb = 1e-9;
  CHECK(duration(StepKind::Start, flat, c) == doctest::Approx(0.8).epsilon(1e-12));

  c.image_mb = 300;
  c.stress.cloud = {0.5, 0.0, 0.5};
  // Effective throughput 200 * (1 - 0.25) = 150 MB/s, cpu factor 1.5.
  CHECK(duration(StepKind::Commit, m, c) == doctest::Approx(0.5 + 2.0 * 1.5).epsilon(1e-12));
}

TEST_CASE("noiseless durations equal the closed form") {
  const GroundTruthModel m = testing::noiseless();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const TraceConfig c = testing::random_cell(rng, i);
    for (StepKind s : kAllSteps) {
      CHECK(duration(s, m, c) == doctest::Approx(closed_form(s, m, c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("noiseless step durations draw no random numbers") {
  const GroundTruthModel m = testing::noiseless();
  const TraceConfig c = base_cell();
  Rng used(99), fresh(99);
  for (StepKind s : kAllSteps) {
    step_duration(s, m, c.cloud, c.fog, c.network, c.stress, c.image_mb, used);
  }
  CHECK(used == fresh);
}

TEST_CASE("noisy durations stay positive and finite") {
  GroundTruthModel m;
  m.noise = 3.0;
  const TraceConfig c = base_cell();
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    for (StepKind s : kAllSteps) {
      const double d = step_duration(s, m, c.cloud, c.fog, c.network, c.stress, c.image_mb, rng);
      CHECK(d > 0.0);
      CHECK(std::isfinite(d));
    }
  }
}

TEST_CASE("monotonicity without noise") {
  const GroundTruthModel m = testing::noiseless();
  TraceConfig c = base_cell();

  double prev = INFINITY;
  for (double bw : {1e6, 3.2e6, 25e6, 50e6, 100e6, 1e9}) {
    c.network.bandwidth_bps = bw;
    const double t = duration(StepKind::Transfer, m, c);
    CHECK(t < prev);
    CHECK(t >= c.network.latency_ms / 1000.0);
    prev = t;
  }

  for (StepKind s : {StepKind::Commit, StepKind::Save, StepKind::Load}) {
    const bool fog = s == StepKind::Load;
    for (double HostStress::*field : {&HostStress::cpu_load, &HostStress::disk_load}) {
      TraceConfig cell = base_cell();
      HostStress& host = fog ? cell.stress.fog : cell.stress.cloud;
      double last = -1.0;
      for (double load : {0.0, 0.1, 0.3, 0.5, 0.75}) {
        host.*field = load;
        const double t = duration(s, m, cell);
        CHECK(t > last);
        last = t;
      }
    }
  }

  for (StepKind s : kAllSteps) {
    TraceConfig cell = base_cell();
    double last = -1.0;
    for (double image : {1.0, 25.0, 100.0, 350.0, 1000.0}) {
      cell.image_mb = image;
      const double t = duration(s, m, cell);
      CHECK(t >= last);
      last = t;
    }
  }
}

TEST_CASE("memory stress leaves durations alone unless coupled") {
  GroundTruthModel m = testing::noiseless();
  TraceConfig c = base_cell();
  const double before = duration(StepKind::Commit, m, c);
  c.stress.cloud.memory_load = 0.7;
  CHECK(duration(StepKind::Commit, m, c) == before);
  m.memory_coupling = 0.5;
  CHECK(duration(StepKind::Commit, m, c) > before);
}

TEST_CASE("traces satisfy the timing sum and the one-second sampling grid") {
  GroundTruthModel m;
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const OffloadTrace t = simulate_offload(m, testing::random_cell(rng, i));
    CHECK(t.timing.is_consistent(1e-12));
    const double sum = t.timing.commit + t.timing.save + t.timing.transfer + t.timing.load +
                       t.timing.start;
    CHECK(t.timing.total == doctest::Approx(sum).epsilon(1e-12));
    REQUIRE(t.samples.size() == static_cast<std::size_t>(std::ceil(t.timing.total)));

    // Sample k is taken at t = k while the step covering [k, k+1) is active.
    double boundary[5];
    double acc = 0.0;
    for (std::size_t s = 0; s < kStepCount; ++s) {
      acc += t.timing.step(kAllSteps[s]);
      boundary[s] = acc;
    }
    for (std::size_t k = 0; k < t.samples.size(); ++k) {
      CHECK(t.samples[k].timestamp == static_cast<double>(k));
      std::size_t expect = 0;
      while (expect + 1 < kStepCount && static_cast<double>(k) >= boundary[expect]) ++expect;
      CHECK(t.samples[k].active_step == kAllSteps[expect]);
      for (int p = 0; p < 12; ++p) {
        CHECK(t.samples[k].runtime[static_cast<std::size_t>(p)] >= 0.0);
        if (p % 6 != 5) CHECK(t.samples[k].runtime[static_cast<std::size_t>(p)] <= 100.0);
      }
    }
  }
}

TEST_CASE("eight samples for a 7.6 second offload") {
  // Transfer-only budget: choose the bandwidth so the noiseless total is exactly 7.6 s.
  GroundTruthModel m = testing::noiseless();
  TraceConfig c = base_cell();
  double rest = 0.0;
  for (StepKind s : {StepKind::Commit, StepKind::Save, StepKind::Load, StepKind::Start}) {
    rest += closed_form(s, m, c);
  }
  const double transfer = 7.6 - rest;
  REQUIRE(transfer > 0.03);
  c.network.bandwidth_bps = m.compression_ratio * c.image_mb * 8e6 / (transfer - 0.03);
  const OffloadTrace t = simulate_offload(m, c);
  CHECK(t.timing.total == doctest::Approx(7.6).epsilon(1e-12));
  REQUIRE(t.samples.size() == 8);
  CHECK(t.samples.front().timestamp == 0.0);
  CHECK(t.samples.back().timestamp == 7.0);
}

TEST_CASE("simulation is deterministic given the seed") {
  GroundTruthModel noisy;
  const TraceConfig c = base_cell();
  check_same(simulate_offload(noisy, c), simulate_offload(noisy, c));
  check_same(simulate_offload(testing::noiseless(), c), simulate_offload(testing::noiseless(), c));
  TraceConfig other = c;
  other.seed = c.seed + 1;
  CHECK_FALSE(simulate_offload(noisy, c).timing == simulate_offload(noisy, other).timing);
}

TEST_CASE("jitter-free samples expose the configured stress") {
  GroundTruthModel m = testing::noiseless();
  m.sample_jitter = 0.0;
  TraceConfig c = base_cell();
  c.stress.cloud = {0.3, 0.2, 0.1};
  c.stress.fog = {0.6, 0.5, 0.4};
  const OffloadTrace t = simulate_offload(m, c);
  for (const auto& s : t.samples) {
    CHECK(s.runtime[0] - s.runtime[3] - 2.0 == doctest::Approx(30.0));
    CHECK(s.runtime[6] - s.runtime[9] - 2.0 == doctest::Approx(60.0));
    CHECK(s.runtime[1] - s.runtime[4] - 8.0 == doctest::Approx(20.0));
    CHECK(s.runtime[7] - s.runtime[10] - 8.0 == doctest::Approx(50.0));
    const bool cloud_busy = s.active_step == StepKind::Commit || s.active_step == StepKind::Save;
    CHECK((s.runtime[5] > 0.0) == cloud_busy);
    const bool fog_busy = s.active_step == StepKind::Load || s.active_step == StepKind::Start;
    CHECK((s.runtime[11] > 0.0) == fog_busy);
  }
}

TEST_CASE("stress schedule") {
  const GridConfig g = default_grid();
  REQUIRE(g.platforms.size() == 2);
  const auto p1 = stress_levels(g.platforms[0], g.stress);
  const auto p2 = stress_levels(g.platforms[1], g.stress);
  // Baseline + 7 CPU levels + memory sweep + disk sweep.
  // Platform 1: memory max(floor(4.5/1), floor(1.5/0.5)) = 4, disk max(floor(22.5/4), floor(15/2)) = 7.
  CHECK(p1.size() == 1 + 7 + 4 + 7);
  // Platform 2: memory max(6, 6) = 6, disk max(floor(60/4), floor(30/2)) = 15.
  CHECK(p2.size() == 1 + 7 + 6 + 15);

  CHECK(p1.front() == StressProfile{});
  for (const auto& levels : {p1, p2}) {
    for (const auto& s : levels) {
      CHECK_NOTHROW(s.validate());
      int stressed_kinds = 0;
      stressed_kinds += (s.cloud.cpu_load > 0 || s.fog.cpu_load > 0);
      stressed_kinds += (s.cloud.memory_load > 0 || s.fog.memory_load > 0);
      stressed_kinds += (s.cloud.disk_load > 0 || s.fog.disk_load > 0);
      CHECK(stressed_kinds <= 1);
    }
  }
  CHECK(p1[7].cloud.cpu_load == doctest::Approx(0.7));
  CHECK(p1[8].cloud.memory_load == doctest::Approx(1.0 / 6.0));
  CHECK(p1[8].fog.memory_load == doctest::Approx(0.25));
  // Fog memory caps at 3 units of 0.5 GB on a 2 GB host and holds there.
  CHECK(p1[11].fog.memory_load == doctest::Approx(0.75));
  CHECK(p1[11].cloud.memory_load == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("default grid size") {
  const auto cells = enumerate_cells(default_grid(), 1);
  // 8 images x (4 bandwidths x 19 levels + 1 bandwidth x 29 levels).
  CHECK(cells.size() == 8 * (4 * 19 + 29));
  CHECK(cells.size() >= 800);
  CHECK(cells.size() <= 900);
  const auto quick = enumerate_cells(quick_grid(default_grid()), 1);
  CHECK(quick.size() * 8 <= cells.size());
}

TEST_CASE("single-valued grid gives one trace") {
  GridConfig g;
  PlatformPair p;
  p.cloud = testing::cloud_host();
  p.fog = testing::fog_host();
  p.bandwidths_bps = {50e6};
  g.platforms = {p};
  g.image_sizes_mb = {100};
  g.stress_stride = 1000;
  CHECK(run_experiment_grid(g, GroundTruthModel{}, 3).size() == 1);
}

TEST_CASE("empty grid axes are rejected") {
  GridConfig g = default_grid();
  g.image_sizes_mb.clear();
  CHECK_THROWS_AS(run_experiment_grid(g, GroundTruthModel{}, 1), ConfigError);
  g = default_grid();
  g.platforms.clear();
  CHECK_THROWS_AS(run_experiment_grid(g, GroundTruthModel{}, 1), ConfigError);
  g = default_grid();
  g.platforms[1].bandwidths_bps.clear();
  CHECK_THROWS_WITH_AS(run_experiment_grid(g, GroundTruthModel{}, 1),
                       doctest::Contains("bandwidth"), ConfigError);
}

TEST_CASE("grid results do not depend on the thread count") {
  const GridConfig g = quick_grid(default_grid());
  const auto seq = run_experiment_grid(g, GroundTruthModel{}, 8, 1);
  const auto par = run_experiment_grid(g, GroundTruthModel{}, 8, 3);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) check_same(seq[i], par[i]);
  // Each cell is simulated from its own derived seed.
  const auto cells = enumerate_cells(g, 8);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(cells[i].seed == derive_seed(8, i));
    check_same(seq[i], simulate_offload(GroundTruthModel{}, cells[i]));
  }
}

TEST_CASE("trace JSON lines round-trip") {
  std::mt19937_64 rng(4);
  std::vector<OffloadTrace> traces;
  for (int i = 0; i < 5; ++i) traces.push_back(simulate_offload(GroundTruthModel{}, testing::random_cell(rng, i)));
  std::stringstream ss;
  write_trace_jsonl(ss, traces);
  const auto back = read_trace_jsonl(ss);
  REQUIRE(back.size() == traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    check_same(traces[i], back[i]);
    CHECK(back[i].config.cloud == traces[i].config.cloud);
    CHECK(back[i].config.fog == traces[i].config.fog);
  }
  std::stringstream bad("{\"platform_id\": 1}\n");
  CHECK_THROWS_AS(read_trace_jsonl(bad), ParseError);
}

TEST_CASE("invalid model constants are rejected") {
  GroundTruthModel m;
  m.disk_contention = 1.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = {};
  m.compression_ratio = 0.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = {};
  m.noise = -0.1;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = {};
  m.save_work_divisor = 0.0;
  CHECK_THROWS_AS(simulate_offload(m, base_cell()), ConfigError);
}

#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "offload/dataset.hpp"
#include "offload/simulator.hpp"

namespace testing {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("offload-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline offload::PlatformSpec cloud_host() {
  return {6, 6, 30, 200, offload::HostRole::Cloud};
}

inline offload::PlatformSpec fog_host() {
  return {2, 2, 20, 100, offload::HostRole::Fog};
}

inline offload::GroundTruthModel noiseless() {
  offload::GroundTruthModel m;
  m.noise = 0.0;
  return m;
}

// Random trace configuration inside the valid ranges of every field.
inline offload::TraceConfig random_cell(std::mt19937_64& rng, std::uint64_t seed) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  offload::TraceConfig c;
  c.platform_id = 1;
  c.cloud = {1.0 + std::floor(8 * u(rng)), 1 + 15 * u(rng), 10 + 90 * u(rng), 50 + 250 * u(rng),
             offload::HostRole::Cloud};
  c.fog = {1.0 + std::floor(4 * u(rng)), 1 + 7 * u(rng), 10 + 50 * u(rng), 50 + 150 * u(rng),
           offload::HostRole::Fog};
  c.network = {1e6 + 999e6 * u(rng), 100 * u(rng)};
  auto stress = [&] {
    return offload::HostStress{0.75 * u(rng), 0.75 * u(rng), 0.75 * u(rng)};
  };
  c.stress = {stress(), stress()};
  c.image_mb = 1 + 399 * u(rng);
  c.seed = seed;
  return c;
}

// Small seeded dataset from random cells.
inline offload::Dataset random_dataset(std::size_t n, std::uint64_t seed,
                                       const offload::GroundTruthModel& model = {}) {
  std::mt19937_64 rng(seed);
  std::vector<offload::OffloadTrace> traces;
  for (std::size_t i = 0; i < n; ++i) {
    traces.push_back(offload::simulate_offload(model, random_cell(rng, seed * 1000 + i)));
  }
  return offload::build_dataset(traces);
}

}  // namespace testing

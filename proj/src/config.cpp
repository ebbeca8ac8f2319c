#include "offload/config.hpp"

#include <fstream>
#include <set>

#include "offload/error.hpp"

namespace offload {

namespace {

using nlohmann::json;

// Reads the keys of one JSON object and rejects whatever was not read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), join(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void read(const std::string& key, double& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(join(key) + ": expected a number");
    out = v.get<double>();
  }

  void read(const std::string& key, int& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(key) + ": expected an integer");
    out = v.get<int>();
  }

  void read(const std::string& key, std::size_t& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(join(key) + ": expected a non-negative integer");
    out = v.get<std::size_t>();
  }

  void read(const std::string& key, unsigned& out) {
    std::size_t v = out;
    read(key, v);
    out = static_cast<unsigned>(v);
  }

  void read(const std::string& key, bool& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(join(key) + ": expected true or false");
    out = v.get<bool>();
  }

  void read(const std::string& key, std::string& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(join(key) + ": expected a string");
    out = v.get<std::string>();
  }

  template <typename T>
  void read(const std::string& key, std::vector<T>& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(join(key) + ": expected an array");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const json& e = v[i];
      const std::string at = join(key) + "[" + std::to_string(i) + "]";
      if constexpr (std::is_same_v<T, double>) {
        if (!e.is_number()) throw ConfigError(at + ": expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!e.is_string()) throw ConfigError(at + ": expected a string");
      } else {
        if (!e.is_number_integer() || e.get<long long>() < 0) throw ConfigError(at + ": expected a non-negative integer");
      }
      out.push_back(e.get<T>());
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + join(key) + "'");
    }
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& path() const { return path_; }

 private:
  std::string where() const { return path_.empty() ? "" : path_ + ": "; }

  bool take(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_host(Section s, PlatformSpec& h) {
  s.read("cores", h.cores);
  s.read("memory_gb", h.memory_gb);
  s.read("disk_gb", h.disk_gb);
  s.read("disk_throughput_mbps", h.base_disk_throughput_mbps);
  s.finish();
}

json host_json(const PlatformSpec& h) {
  return {{"cores", h.cores},
          {"memory_gb", h.memory_gb},
          {"disk_gb", h.disk_gb},
          {"disk_throughput_mbps", h.base_disk_throughput_mbps}};
}

PlatformPair read_platform(Section s, std::size_t position) {
  PlatformPair p;
  p.id = static_cast<int>(position + 1);
  p.cloud.role = HostRole::Cloud;
  p.cloud.base_disk_throughput_mbps = default_disk_throughput(HostRole::Cloud);
  p.fog.role = HostRole::Fog;
  p.fog.base_disk_throughput_mbps = default_disk_throughput(HostRole::Fog);
  s.read("id", p.id);
  if (!s.has("cloud") || !s.has("fog") || !s.has("bandwidths_bps")) {
    throw ConfigError(s.path() + " needs cloud, fog and bandwidths_bps");
  }
  read_host(s.child("cloud"), p.cloud);
  read_host(s.child("fog"), p.fog);
  s.read("bandwidths_bps", p.bandwidths_bps);
  s.read("latency_ms", p.latency_ms);
  s.finish();
  return p;
}

void read_stress(Section s, StressSchedule& st) {
  s.read("cpu_step", st.cpu_step);
  s.read("cloud_memory_step_gb", st.cloud_memory_step_gb);
  s.read("fog_memory_step_gb", st.fog_memory_step_gb);
  s.read("cloud_disk_step_gb", st.cloud_disk_step_gb);
  s.read("fog_disk_step_gb", st.fog_disk_step_gb);
  s.read("cap", st.cap);
  s.finish();
}

void read_ground_truth(Section s, GroundTruthModel& m) {
  s.read("commit_overhead_s", m.commit_overhead_s);
  s.read("save_overhead_s", m.save_overhead_s);
  s.read("load_overhead_s", m.load_overhead_s);
  s.read("start_overhead_s", m.start_overhead_s);
  s.read("commit_work_divisor", m.commit_work_divisor);
  s.read("save_work_divisor", m.save_work_divisor);
  s.read("load_work_divisor", m.load_work_divisor);
  s.read("cpu_contention", m.cpu_contention);
  s.read("disk_contention", m.disk_contention);
  s.read("compression_ratio", m.compression_ratio);
  s.read("start_size_slope", m.start_size_slope);
  s.read("noise", m.noise);
  s.read("memory_coupling", m.memory_coupling);
  s.read("sample_jitter", m.sample_jitter);
  s.finish();
}

json ground_truth_json(const GroundTruthModel& m) {
  return {{"commit_overhead_s", m.commit_overhead_s},
          {"save_overhead_s", m.save_overhead_s},
          {"load_overhead_s", m.load_overhead_s},
          {"start_overhead_s", m.start_overhead_s},
          {"commit_work_divisor", m.commit_work_divisor},
          {"save_work_divisor", m.save_work_divisor},
          {"load_work_divisor", m.load_work_divisor},
          {"cpu_contention", m.cpu_contention},
          {"disk_contention", m.disk_contention},
          {"compression_ratio", m.compression_ratio},
          {"start_size_slope", m.start_size_slope},
          {"noise", m.noise},
          {"memory_coupling", m.memory_coupling},
          {"sample_jitter", m.sample_jitter}};
}

void read_models(Section s, ModelSettings& m) {
  s.read("ridge", m.ridge);
  s.read("seed", m.seed);
  if (s.has("pmr")) {
    Section p = s.child("pmr");
    p.read("degree", m.poly.degree);
    p.read("term_budget", m.poly.term_budget);
    p.finish();
  }
  if (s.has("rfr")) {
    Section f = s.child("rfr");
    f.read("trees", m.forest.trees);
    f.read("max_depth", m.forest.max_depth);
    f.read("min_samples_leaf", m.forest.min_samples_leaf);
    f.read("bootstrap", m.forest.bootstrap);
    if (f.has("features_per_split")) {
      int v = 0;
      f.read("features_per_split", v);
      m.forest.features_per_split = v;
    }
    f.finish();
  }
  if (s.has("svr")) {
    Section v = s.child("svr");
    std::string kernel = m.svr.kernel == KernelType::Rbf ? "rbf" : "linear";
    v.read("kernel", kernel);
    if (kernel == "rbf") {
      m.svr.kernel = KernelType::Rbf;
    } else if (kernel == "linear") {
      m.svr.kernel = KernelType::Linear;
    } else {
      throw ConfigError(v.join("kernel") + ": expected rbf or linear");
    }
    if (v.has("gamma")) {
      double g = 0.0;
      v.read("gamma", g);
      m.svr.gamma = g;
    }
    v.read("c", m.svr.c);
    v.read("epsilon", m.svr.epsilon);
    v.read("tolerance", m.svr.tolerance);
    v.read("max_passes", m.svr.max_passes);
    v.finish();
  }
  s.finish();
}

json models_json(const ModelSettings& m) {
  json rfr = {{"trees", m.forest.trees},
              {"max_depth", m.forest.max_depth},
              {"min_samples_leaf", m.forest.min_samples_leaf},
              {"bootstrap", m.forest.bootstrap}};
  if (m.forest.features_per_split) rfr["features_per_split"] = *m.forest.features_per_split;
  json svr = {{"kernel", m.svr.kernel == KernelType::Rbf ? "rbf" : "linear"},
              {"c", m.svr.c},
              {"epsilon", m.svr.epsilon},
              {"tolerance", m.svr.tolerance},
              {"max_passes", m.svr.max_passes}};
  if (m.svr.gamma) svr["gamma"] = *m.svr.gamma;
  return {{"ridge", m.ridge},
          {"seed", m.seed},
          {"pmr", {{"degree", m.poly.degree}, {"term_budget", m.poly.term_budget}}},
          {"rfr", rfr},
          {"svr", svr}};
}

void read_evaluation(Section s, ExperimentConfig& c) {
  if (s.has("methods")) {
    std::vector<std::string> names;
    s.read("methods", names);
    c.plan.methods.clear();
    for (const auto& n : names) c.plan.methods.push_back(parse_method(n));
  }
  if (s.has("kinds")) {
    std::vector<std::string> names;
    s.read("kinds", names);
    c.plan.kinds.clear();
    for (const auto& n : names) c.plan.kinds.push_back(parse_kind(n));
  }
  s.read("holdout_fractions", c.plan.holdout_fractions);
  s.read("k_values", c.plan.k_values);
  if (s.has("accuracy_mode")) {
    std::string mode;
    s.read("accuracy_mode", mode);
    c.plan.accuracy_mode = parse_accuracy_mode(mode);
  }
  s.read("seed", c.eval_seed);
  s.read("linearize_transfer", c.estimators.linearize_transfer);
  if (s.has("step_masks")) {
    Section m = s.child("step_masks");
    for (std::size_t i = 0; i < kStepCount; ++i) {
      const std::string name(step_name(kAllSteps[i]));
      if (!m.has(name)) continue;
      std::vector<std::size_t> idx;
      m.read(name, idx);
      c.estimators.step_masks[i] = FeatureMask(std::vector<int>(idx.begin(), idx.end()));
    }
    m.finish();
  }
  s.finish();
}

json evaluation_json(const ExperimentConfig& c) {
  json methods = json::array(), kinds = json::array(), masks = json::object();
  for (Method m : c.plan.methods) methods.push_back(method_name(m));
  for (ModelKind k : c.plan.kinds) kinds.push_back(kind_name(k));
  for (std::size_t i = 0; i < kStepCount; ++i) {
    masks[std::string(step_name(kAllSteps[i]))] = c.estimators.step_masks[i].indices();
  }
  return {{"methods", methods},
          {"kinds", kinds},
          {"holdout_fractions", c.plan.holdout_fractions},
          {"k_values", c.plan.k_values},
          {"accuracy_mode", accuracy_mode_name(c.plan.accuracy_mode)},
          {"seed", c.eval_seed},
          {"linearize_transfer", c.estimators.linearize_transfer},
          {"step_masks", masks}};
}

}  // namespace

void ExperimentConfig::validate() const {
  grid.validate();
  ground_truth.validate();
  if (quick_stress_stride == 0 || quick_image_stride == 0) {
    throw ConfigError("quick strides must be >= 1");
  }
  const ModelSettings& m = estimators.models;
  if (!(m.ridge >= 0.0)) throw ConfigError("models.ridge must be >= 0");
  if (m.poly.degree < 1) throw ConfigError("models.pmr.degree must be >= 1");
  if (m.forest.trees < 1) throw ConfigError("models.rfr.trees must be >= 1");
  if (m.forest.max_depth < 0) throw ConfigError("models.rfr.max_depth must be >= 0");
  if (m.forest.min_samples_leaf < 1) throw ConfigError("models.rfr.min_samples_leaf must be >= 1");
  if (m.forest.features_per_split && *m.forest.features_per_split < 1) {
    throw ConfigError("models.rfr.features_per_split must be >= 1");
  }
  if (!(m.svr.c > 0.0)) throw ConfigError("models.svr.c must be > 0");
  if (!(m.svr.epsilon > 0.0)) throw ConfigError("models.svr.epsilon must be > 0");
  if (m.svr.gamma && !(*m.svr.gamma > 0.0)) throw ConfigError("models.svr.gamma must be > 0");
  if (!(m.svr.tolerance > 0.0)) throw ConfigError("models.svr.tolerance must be > 0");
  if (m.svr.max_passes == 0) throw ConfigError("models.svr.max_passes must be >= 1");

  if (plan.methods.empty()) throw ConfigError("evaluation.methods is empty");
  if (plan.kinds.empty()) throw ConfigError("evaluation.kinds is empty");
  if (plan.holdout_fractions.empty() && plan.k_values.empty()) {
    throw ConfigError("evaluation needs at least one hold-out fraction or k value");
  }
  for (double f : plan.holdout_fractions) {
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("evaluation.holdout_fractions must lie in (0, 1)");
  }
  for (std::size_t k : plan.k_values) {
    if (k < 2) throw ConfigError("evaluation.k_values must be >= 2");
  }
}

ExperimentConfig default_experiment_config() { return ExperimentConfig{}; }

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  Section root(j, "");
  root.read("seed", c.seed);
  root.read("threads", c.threads);
  if (root.has("platforms")) {
    const json& list = root.raw("platforms");
    if (!list.is_array()) throw ConfigError("platforms: expected an array");
    c.grid.platforms.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      c.grid.platforms.push_back(read_platform(Section(list[i], "platforms[" + std::to_string(i) + "]"), i));
    }
  }
  if (root.has("stress")) read_stress(root.child("stress"), c.grid.stress);
  root.read("image_sizes_mb", c.grid.image_sizes_mb);
  if (root.has("quick")) {
    Section q = root.child("quick");
    q.read("stress_stride", c.quick_stress_stride);
    q.read("image_stride", c.quick_image_stride);
    q.finish();
  }
  if (root.has("ground_truth")) read_ground_truth(root.child("ground_truth"), c.ground_truth);
  if (root.has("models")) read_models(root.child("models"), c.estimators.models);
  if (root.has("evaluation")) read_evaluation(root.child("evaluation"), c);
  root.finish();
  c.validate();
  return c;
}

json experiment_config_to_json(const ExperimentConfig& c) {
  json platforms = json::array();
  for (const auto& p : c.grid.platforms) {
    platforms.push_back({{"id", p.id},
                         {"cloud", host_json(p.cloud)},
                         {"fog", host_json(p.fog)},
                         {"bandwidths_bps", p.bandwidths_bps},
                         {"latency_ms", p.latency_ms}});
  }
  const StressSchedule& st = c.grid.stress;
  return {{"seed", c.seed},
          {"threads", c.threads},
          {"platforms", platforms},
          {"stress",
           {{"cpu_step", st.cpu_step},
            {"cloud_memory_step_gb", st.cloud_memory_step_gb},
            {"fog_memory_step_gb", st.fog_memory_step_gb},
            {"cloud_disk_step_gb", st.cloud_disk_step_gb},
            {"fog_disk_step_gb", st.fog_disk_step_gb},
            {"cap", st.cap}}},
          {"image_sizes_mb", c.grid.image_sizes_mb},
          {"quick", {{"stress_stride", c.quick_stress_stride}, {"image_stride", c.quick_image_stride}}},
          {"ground_truth", ground_truth_json(c.ground_truth)},
          {"models", models_json(c.estimators.models)},
          {"evaluation", evaluation_json(c)}};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ParseError("config '" + path.string() + "': " + e.what());
  }
  try {
    return experiment_config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
}

}  // namespace offload

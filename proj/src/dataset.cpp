#include "offload/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "offload/error.hpp"

namespace offload {

namespace {

constexpr std::size_t kRuntimeCount = 12;
constexpr std::array<const char*, 6> kTargetColumns = {"t_commit", "t_save", "t_transfer",
                                                       "t_load",   "t_start", "t_offload"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

DatasetInstance instance_from_samples(const OffloadTrace& trace,
                                      std::span<const RuntimeSample* const> samples) {
  if (samples.empty()) throw ConfigError("cannot aggregate a trace without runtime samples");
  DatasetInstance inst;
  inst.platform_id = trace.config.platform_id;
  inst.features = offline_parameters(trace.config);
  for (std::size_t p = 0; p < kRuntimeCount; ++p) {
    double sum = 0.0;
    for (const RuntimeSample* s : samples) sum += s->runtime[p];
    inst.features.values[p] = sum / static_cast<double>(samples.size());
  }
  inst.targets = trace.timing;
  return inst;
}

std::string trim_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.instances.reserve(rows.size());
  for (std::size_t r : rows) out.instances.push_back(instances.at(r));
  return out;
}

const std::vector<std::string>& dataset_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c = {"instance_id", "platform_id"};
    for (int i = 1; i <= static_cast<int>(kParameterCount); ++i) c.push_back(parameter_name(i));
    for (const char* t : kTargetColumns) c.emplace_back(t);
    return c;
  }();
  return columns;
}

ParameterVector offline_parameters(const TraceConfig& config) {
  ParameterVector pv;
  pv.p(13) = config.image_mb;
  pv.p(14) = config.cloud.cores;
  pv.p(15) = config.cloud.memory_gb;
  pv.p(16) = config.cloud.disk_gb;
  pv.p(17) = config.fog.cores;
  pv.p(18) = config.fog.memory_gb;
  pv.p(19) = config.fog.disk_gb;
  pv.p(20) = config.network.bandwidth_bps;
  pv.p(21) = config.network.latency_ms;
  return pv;
}

DatasetInstance aggregate_trace(const OffloadTrace& trace) {
  std::vector<const RuntimeSample*> all;
  all.reserve(trace.samples.size());
  for (const auto& s : trace.samples) all.push_back(&s);
  return instance_from_samples(trace, all);
}

DatasetInstance aggregate_trace_window(const OffloadTrace& trace, StepKind step) {
  std::vector<const RuntimeSample*> window;
  for (const auto& s : trace.samples) {
    if (s.active_step == step) window.push_back(&s);
  }
  if (window.empty()) return aggregate_trace(trace);
  return instance_from_samples(trace, window);
}

Dataset build_dataset(std::span<const OffloadTrace> traces) {
  if (traces.empty()) throw ConfigError("cannot build a dataset from zero traces");
  Dataset ds;
  ds.instances.reserve(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    auto inst = aggregate_trace(traces[i]);
    inst.instance_id = i;
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

std::array<Dataset, kStepCount> build_step_window_datasets(std::span<const OffloadTrace> traces) {
  if (traces.empty()) throw ConfigError("cannot build a dataset from zero traces");
  std::array<Dataset, kStepCount> out;
  for (std::size_t s = 0; s < kStepCount; ++s) {
    for (std::size_t i = 0; i < traces.size(); ++i) {
      auto inst = aggregate_trace_window(traces[i], kAllSteps[s]);
      inst.instance_id = i;
      out[s].instances.push_back(std::move(inst));
    }
  }
  return out;
}

std::size_t total_samples(std::span<const OffloadTrace> traces) {
  std::size_t n = 0;
  for (const auto& t : traces) n += t.samples.size();
  return n;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error("cannot format floating-point value");
  return std::string(buf.data(), end);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError("non-numeric value '" + std::string(text) + "'");
  }
  return v;
}

void write_dataset(std::ostream& os, const Dataset& ds) {
  const auto& cols = dataset_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& inst : ds.instances) {
    os << inst.instance_id << ',' << inst.platform_id;
    for (double v : inst.features.values) os << ',' << format_double(v);
    const auto& t = inst.targets;
    for (double v : {t.commit, t.save, t.transfer, t.load, t.start, t.total}) {
      os << ',' << format_double(v);
    }
    os << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write_dataset(os, ds);
  if (!os) throw Error("failed writing '" + path.string() + "'");
}

Dataset read_dataset(std::istream& is) {
  const auto& cols = dataset_columns();
  std::string line;
  if (!std::getline(is, line)) throw ParseError("line 1: missing header row");
  const auto header = split_csv_line(trim_cr(line));
  for (const auto& c : cols) {
    if (std::find(header.begin(), header.end(), c) == header.end()) {
      throw ParseError("line 1: missing column '" + c + "'");
    }
  }
  if (header != cols) {
    throw ParseError("line 1: header does not match the expected column order");
  }

  Dataset ds;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no);
    if (cells.size() != cols.size()) {
      throw ParseError(where + ": expected " + std::to_string(cols.size()) + " columns, got " +
                       std::to_string(cells.size()));
    }
    auto number = [&](std::size_t c) {
      try {
        return parse_double(cells[c]);
      } catch (const ParseError& e) {
        throw ParseError(where + ": column '" + cols[c] + "': " + e.what());
      }
    };
    auto integer = [&](std::size_t c) -> long long {
      long long v = 0;
      const auto& s = cells[c];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(where + ": column '" + cols[c] + "': non-integer value '" + s + "'");
      }
      return v;
    };

    DatasetInstance inst;
    const long long id = integer(0);
    if (id < 0) throw ParseError(where + ": instance_id must be >= 0");
    inst.instance_id = static_cast<std::size_t>(id);
    inst.platform_id = static_cast<int>(integer(1));
    for (std::size_t p = 0; p < kParameterCount; ++p) inst.features.values[p] = number(2 + p);
    const std::size_t t0 = 2 + kParameterCount;
    inst.targets.commit = number(t0);
    inst.targets.save = number(t0 + 1);
    inst.targets.transfer = number(t0 + 2);
    inst.targets.load = number(t0 + 3);
    inst.targets.start = number(t0 + 4);
    inst.targets.total = number(t0 + 5);
    if (const auto bad = validate_parameter_vector(inst.features); !bad.empty()) {
      throw ParseError(where + ": " + bad.front());
    }
    if (!inst.targets.is_consistent()) {
      throw ParseError(where + ": t_offload is not the sum of the step times");
    }
    ds.instances.push_back(inst);
  }
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open dataset '" + path.string() + "'");
  return read_dataset(is);
}

}  // namespace offload

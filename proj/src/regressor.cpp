#include <type_traits>

#include "offload/error.hpp"
#include "offload/estimators.hpp"

namespace offload {

namespace {

using nlohmann::json;

json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json scaler_to_json(const Scaler& s) {
  return {{"mean", vector_to_json(s.mean)}, {"scale", vector_to_json(s.scale)}};
}

Scaler scaler_from_json(const json& j) {
  Scaler s;
  s.mean = vector_from_json(j.at("mean"));
  s.scale = vector_from_json(j.at("scale"));
  if (s.mean.size() != s.scale.size()) throw ParseError("scaler mean/scale length mismatch");
  return s;
}

json linear_to_json(const LinearModel& m) {
  return {{"ridge", m.ridge},
          {"intercept", m.intercept},
          {"weights", vector_to_json(m.weights)},
          {"scaler", scaler_to_json(m.scaler)}};
}

LinearModel linear_from_json(const json& j) {
  LinearModel m;
  m.ridge = j.at("ridge").get<double>();
  m.intercept = j.at("intercept").get<double>();
  m.weights = vector_from_json(j.at("weights"));
  m.scaler = scaler_from_json(j.at("scaler"));
  if (static_cast<std::size_t>(m.weights.size()) != m.scaler.dims()) {
    throw ParseError("linear model weight count does not match its scaler");
  }
  return m;
}

json tree_to_json(const RegressionTree& t) {
  std::vector<int> feature, left, right, samples;
  std::vector<double> threshold, value;
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
    samples.push_back(n.samples);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value},         {"samples", samples}};
}

RegressionTree tree_from_json(const json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const auto samples = j.at("samples").get<std::vector<int>>();
  const std::size_t n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n ||
      value.size() != n || samples.size() != n) {
    throw ParseError("tree node arrays are empty or of unequal length");
  }
  RegressionTree t;
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0 && (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) ||
                            left[i] >= static_cast<int>(n) || right[i] >= static_cast<int>(n))) {
      throw ParseError("tree node " + std::to_string(i) + " has invalid children");
    }
    t.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i], samples[i]});
  }
  return t;
}

std::string_view kernel_name(KernelType k) { return k == KernelType::Rbf ? "rbf" : "linear"; }

KernelType parse_kernel(std::string_view s) {
  if (s == "rbf") return KernelType::Rbf;
  if (s == "linear") return KernelType::Linear;
  throw ConfigError("unknown SVR kernel '" + std::string(s) + "'");
}

}  // namespace

std::string_view kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Mlr: return "mlr";
    case ModelKind::Pmr: return "pmr";
    case ModelKind::Rfr: return "rfr";
    case ModelKind::Svr: return "svr";
  }
  return "unknown";
}

ModelKind parse_kind(std::string_view name) {
  for (ModelKind k : kAllKinds) {
    if (kind_name(k) == name) return k;
  }
  throw ConfigError("unknown model kind '" + std::string(name) + "' (expected mlr, pmr, rfr or svr)");
}

Regressor Regressor::fit(ModelKind kind, const Matrix& x, const Vector& y,
                         const ModelSettings& settings) {
  switch (kind) {
    case ModelKind::Mlr: return Regressor(fit_mlr(x, y, settings.ridge));
    case ModelKind::Pmr: {
      PolyParams p = settings.poly;
      p.lambda = settings.ridge;
      return Regressor(fit_pmr(x, y, p));
    }
    case ModelKind::Rfr: return Regressor(fit_rfr(x, y, settings.forest, settings.seed));
    case ModelKind::Svr: return Regressor(fit_svr(x, y, settings.svr));
  }
  throw ConfigError("unknown model kind");
}

ModelKind Regressor::kind() const {
  return static_cast<ModelKind>(model_.index());
}

std::size_t Regressor::input_dim() const {
  return std::visit([](const auto& m) { return m.input_dim(); }, model_);
}

double Regressor::predict(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw DimensionError("model expects " + std::to_string(input_dim()) + " inputs, got " +
                         std::to_string(x.size()));
  }
  return std::visit([&](const auto& m) { return m.predict(x); }, model_);
}

json Regressor::to_json() const {
  json j;
  j["kind"] = kind_name(kind());
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j.update(linear_to_json(m));
        } else if constexpr (std::is_same_v<T, PolyModel>) {
          j["degree"] = m.degree;
          j["terms"] = m.terms;
          j["input_scaler"] = scaler_to_json(m.input_scaler);
          j["linear"] = linear_to_json(m.linear);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          j["params"] = {{"trees", m.params.trees},
                         {"max_depth", m.params.max_depth},
                         {"min_samples_leaf", m.params.min_samples_leaf},
                         {"bootstrap", m.params.bootstrap}};
          if (m.params.features_per_split) {
            j["params"]["features_per_split"] = *m.params.features_per_split;
          }
          j["seed"] = m.seed;
          j["dims"] = m.dims;
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
          j["trees"] = std::move(trees);
        } else {
          j["kernel"] = kernel_name(m.kernel);
          j["gamma"] = m.gamma;
          j["c"] = m.c;
          j["epsilon"] = m.epsilon;
          j["bias"] = m.bias;
          j["scaler"] = scaler_to_json(m.scaler);
          json sv = json::array();
          for (Eigen::Index r = 0; r < m.support_vectors.rows(); ++r) {
            sv.push_back(vector_to_json(m.support_vectors.row(r).transpose()));
          }
          j["support_vectors"] = std::move(sv);
          j["coefficients"] = vector_to_json(m.coefficients);
          j["fit"] = {{"iterations", m.info.iterations},
                      {"iteration_cap", m.info.iteration_cap},
                      {"converged", m.info.converged},
                      {"max_violation", m.info.max_violation},
                      {"dual_objective", m.info.dual_objective}};
        }
      },
      model_);
  return j;
}

Regressor Regressor::from_json(const json& j) {
  try {
    switch (parse_kind(j.at("kind").get<std::string>())) {
      case ModelKind::Mlr: return Regressor(linear_from_json(j));
      case ModelKind::Pmr: {
        PolyModel m;
        m.degree = j.at("degree").get<int>();
        m.terms = j.at("terms").get<std::vector<Exponents>>();
        m.input_scaler = scaler_from_json(j.at("input_scaler"));
        m.linear = linear_from_json(j.at("linear"));
        if (m.terms.empty() || m.linear.input_dim() + 1 != m.terms.size()) {
          throw ParseError("polynomial term table does not match its coefficients");
        }
        for (const auto& t : m.terms) {
          if (t.size() != m.input_scaler.dims()) throw ParseError("polynomial term width mismatch");
        }
        return Regressor(std::move(m));
      }
      case ModelKind::Rfr: {
        ForestModel m;
        const auto& p = j.at("params");
        m.params.trees = p.at("trees").get<int>();
        m.params.max_depth = p.at("max_depth").get<int>();
        m.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
        m.params.bootstrap = p.at("bootstrap").get<bool>();
        if (p.contains("features_per_split")) {
          m.params.features_per_split = p.at("features_per_split").get<int>();
        }
        m.seed = j.at("seed").get<std::uint64_t>();
        m.dims = j.at("dims").get<std::size_t>();
        for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
        if (m.trees.empty()) throw ParseError("forest has no trees");
        for (const auto& t : m.trees) {
          for (const auto& n : t.nodes) {
            if (n.feature >= static_cast<int>(m.dims)) throw ParseError("tree split feature out of range");
          }
        }
        return Regressor(std::move(m));
      }
      case ModelKind::Svr: {
        SvrModel m;
        m.kernel = parse_kernel(j.at("kernel").get<std::string>());
        m.gamma = j.at("gamma").get<double>();
        m.c = j.at("c").get<double>();
        m.epsilon = j.at("epsilon").get<double>();
        m.bias = j.at("bias").get<double>();
        m.scaler = scaler_from_json(j.at("scaler"));
        const auto rows = j.at("support_vectors").get<std::vector<std::vector<double>>>();
        m.coefficients = vector_from_json(j.at("coefficients"));
        if (rows.size() != static_cast<std::size_t>(m.coefficients.size())) {
          throw ParseError("support vector count does not match coefficient count");
        }
        m.support_vectors.resize(static_cast<Eigen::Index>(rows.size()),
                                 static_cast<Eigen::Index>(m.scaler.dims()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != m.scaler.dims()) throw ParseError("support vector width mismatch");
          for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m.support_vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
          }
        }
        const auto& fit = j.at("fit");
        m.info.iterations = fit.at("iterations").get<std::size_t>();
        m.info.iteration_cap = fit.at("iteration_cap").get<std::size_t>();
        m.info.converged = fit.at("converged").get<bool>();
        m.info.max_violation = fit.at("max_violation").get<double>();
        m.info.dual_objective = fit.at("dual_objective").get<double>();
        return Regressor(std::move(m));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  throw ParseError("model document: unknown kind");
}

}  // namespace offload

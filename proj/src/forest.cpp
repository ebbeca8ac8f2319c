#include <algorithm>
#include <cmath>
#include <numeric>

#include "offload/error.hpp"
#include "offload/estimators.hpp"
#include "offload/rng.hpp"

namespace offload {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Vector& y, const ForestParams& params, int mtry, Rng& rng)
      : x_(x), y_(y), params_(params), mtry_(mtry), rng_(rng) {}

  RegressionTree build(std::vector<std::size_t> rows) {
    rows_ = std::move(rows);
    tree_.nodes.clear();
    struct Pending {
      int node;
      std::size_t begin, end;
      int depth;
    };
    tree_.nodes.emplace_back();
    std::vector<Pending> stack = {{0, 0, rows_.size(), 0}};
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      const std::size_t count = p.end - p.begin;
      double sum = 0.0;
      for (std::size_t i = p.begin; i < p.end; ++i) sum += y_(static_cast<Eigen::Index>(rows_[i]));
      {
        TreeNode& node = tree_.nodes[static_cast<std::size_t>(p.node)];
        node.value = sum / static_cast<double>(count);
        node.samples = static_cast<int>(count);
      }
      if (p.depth >= params_.max_depth ||
          count < 2 * static_cast<std::size_t>(params_.min_samples_leaf) || is_pure(p.begin, p.end)) {
        continue;
      }
      const Split split = best_split(p.begin, p.end);
      if (split.feature < 0) continue;

      const auto mid_it = std::stable_partition(
          rows_.begin() + static_cast<std::ptrdiff_t>(p.begin),
          rows_.begin() + static_cast<std::ptrdiff_t>(p.end), [&](std::size_t r) {
            return x_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold;
          });
      const auto mid = static_cast<std::size_t>(mid_it - rows_.begin());

      const int left = static_cast<int>(tree_.nodes.size());
      tree_.nodes.emplace_back();
      tree_.nodes.emplace_back();
      TreeNode& node = tree_.nodes[static_cast<std::size_t>(p.node)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, mid, p.end, p.depth + 1});
      stack.push_back({left, p.begin, mid, p.depth + 1});
    }
    return std::move(tree_);
  }

 private:
  bool is_pure(std::size_t begin, std::size_t end) const {
    const double first = y_(static_cast<Eigen::Index>(rows_[begin]));
    for (std::size_t i = begin + 1; i < end; ++i) {
      if (y_(static_cast<Eigen::Index>(rows_[i])) != first) return false;
    }
    return true;
  }

  // Evaluates mtry random features; if none of them admits a valid split, keeps drawing
  // from the remaining features until one does.
  Split best_split(std::size_t begin, std::size_t end) {
    std::vector<int> features(static_cast<std::size_t>(x_.cols()));
    std::iota(features.begin(), features.end(), 0);
    shuffle_in_place(features, rng_);

    Split best;
    for (std::size_t k = 0; k < features.size(); ++k) {
      if (static_cast<int>(k) >= mtry_ && best.feature >= 0) break;
      evaluate_feature(features[k], begin, end, best);
    }
    return best;
  }

  void evaluate_feature(int feature, std::size_t begin, std::size_t end, Split& best) {
    const std::size_t n = end - begin;
    pairs_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(rows_[begin + i]);
      pairs_[i] = {x_(r, feature), y_(r)};
    }
    std::sort(pairs_.begin(), pairs_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (pairs_.front().first == pairs_.back().first) return;

    double total = 0.0;
    for (const auto& pr : pairs_) total += pr.second;
    const auto leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += pairs_[i].second;
      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      if (nl < leaf) continue;
      if (nr < leaf) break;
      if (!(pairs_[i].first < pairs_[i + 1].first)) continue;
      // SSE reduction of the split: nl * nr / n * (mean_l - mean_r)^2.
      const double ml = left_sum / static_cast<double>(nl);
      const double mr = (total - left_sum) / static_cast<double>(nr);
      const double gain = static_cast<double>(nl) * static_cast<double>(nr) /
                          static_cast<double>(n) * (ml - mr) * (ml - mr);
      if (gain > best.gain) {
        const double a = pairs_[i].first;
        const double b = pairs_[i + 1].first;
        double mid = a + (b - a) / 2.0;
        if (!(mid < b)) mid = a;
        best = {feature, mid, gain};
      }
    }
  }

  const Matrix& x_;
  const Vector& y_;
  const ForestParams& params_;
  int mtry_;
  Rng& rng_;
  std::vector<std::size_t> rows_;
  std::vector<std::pair<double, double>> pairs_;
  RegressionTree tree_;
};

}  // namespace

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                        : n.right);
  }
  return nodes[i].value;
}

double ForestModel::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

ForestModel fit_rfr(const Matrix& x, const Vector& y, const ForestParams& params,
                    std::uint64_t seed) {
  check_training_data(x, y);
  if (params.trees < 1) throw ConfigError("forest needs at least one tree");
  if (params.max_depth < 0) throw ConfigError("forest max_depth must be >= 0");
  if (params.min_samples_leaf < 1) throw ConfigError("forest min_samples_leaf must be >= 1");
  const auto n = static_cast<std::size_t>(x.rows());
  if (static_cast<std::size_t>(params.min_samples_leaf) > n) {
    throw ConfigError("forest min_samples_leaf (" + std::to_string(params.min_samples_leaf) +
                      ") exceeds the number of training rows (" + std::to_string(n) + ")");
  }
  const int d = static_cast<int>(x.cols());
  const int mtry = params.features_per_split.value_or((d + 2) / 3);
  if (mtry < 1 || mtry > d) throw ConfigError("features_per_split must lie in [1, d]");

  ForestModel m;
  m.params = params;
  m.seed = seed;
  m.dims = static_cast<std::size_t>(d);
  m.trees.reserve(static_cast<std::size_t>(params.trees));
  for (int t = 0; t < params.trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(uniform_below(rng, n));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    TreeBuilder builder(x, y, params, mtry, rng);
    m.trees.push_back(builder.build(std::move(rows)));
  }
  return m;
}

}  // namespace offload

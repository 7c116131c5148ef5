#include "drivesense/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "drivesense/error.hpp"
#include "drivesense/util.hpp"

namespace drivesense {

using nlohmann::json;

std::uint64_t ForestParams::tree_seed(std::size_t i) const noexcept {
  return mix_seed(seed, static_cast<std::uint64_t>(i), 0x7eee);
}

std::string_view model_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Tree: return "tree";
    case ModelKind::Forest: return "forest";
    case ModelKind::Extra: return "extra";
  }
  return "?";
}

std::optional<ModelKind> parse_model(std::string_view name) noexcept {
  for (ModelKind k : {ModelKind::Tree, ModelKind::Forest, ModelKind::Extra}) {
    if (model_name(k) == name) return k;
  }
  return std::nullopt;
}

ForestParams model_preset(ModelKind kind, std::uint64_t seed) {
  ForestParams p;
  p.seed = seed;
  switch (kind) {
    case ModelKind::Tree:
      p.n_trees = 1;
      p.bootstrap = false;
      p.tree.n_candidate_features = std::numeric_limits<std::size_t>::max();  // clamped to F
      break;
    case ModelKind::Forest:
      break;
    case ModelKind::Extra:
      p.bootstrap = false;
      p.tree.split_mode = SplitMode::RandomThreshold;
      break;
  }
  return p;
}

double gini_impurity(std::span<const double> weighted_counts) {
  const double total = std::accumulate(weighted_counts.begin(), weighted_counts.end(), 0.0);
  if (!(total > 0.0)) fail(ErrorKind::Model, "gini impurity of an empty node");
  double sum_sq = 0.0;
  for (double w : weighted_counts) sum_sq += (w / total) * (w / total);
  return 1.0 - sum_sq;
}

namespace {

// W * Gini = W - sum w_c^2 / W, the quantity splits minimize.
double weighted_impurity(const std::vector<double>& counts, double total) noexcept {
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (double w : counts) sum_sq += w * w;
  return total - sum_sq / total;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // W_L G_L + W_R G_R
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const int> y, std::size_t n_classes,
              const TreeParams& params, const ClassWeights* weights)
      : x_(x), y_(y), n_classes_(n_classes), params_(params), rng_(params.seed) {
    const std::size_t f = x.cols();
    candidates_ = std::clamp<std::size_t>(
        params.n_candidate_features.value_or(
            static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(f))))),
        1, std::max<std::size_t>(f, 1));
    class_weight_.assign(n_classes, 1.0);
    if (weights) {
      for (std::size_t c = 0; c < n_classes; ++c) class_weight_[c] = weights->of(static_cast<int>(c));
    }
    order_.resize(f);
  }

  Tree build(std::vector<std::size_t> rows) {
    rows_ = std::move(rows);
    grow(0, rows_.size(), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::size_t begin, std::size_t end, std::size_t depth) {
    std::vector<double> counts(n_classes_, 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const int c = y_[rows_[i]];
      counts[static_cast<std::size_t>(c)] += class_weight_[static_cast<std::size_t>(c)];
    }
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto present = std::count_if(counts.begin(), counts.end(), [](double w) { return w > 0.0; });

    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes[static_cast<std::size_t>(id)].weight = total;
    tree_.nodes[static_cast<std::size_t>(id)].impurity = total > 0.0 ? gini_impurity(counts) : 0.0;

    const bool stop = present <= 1 || end - begin < params_.min_samples_split ||
                      (params_.max_depth && depth >= *params_.max_depth);
    Split best;
    if (!stop) best = find_split(begin, end, weighted_impurity(counts, total));
    if (best.feature < 0) {
      auto& leaf = tree_.nodes[static_cast<std::size_t>(id)];
      leaf.proba.resize(n_classes_);
      for (std::size_t c = 0; c < n_classes_; ++c) leaf.proba[c] = total > 0.0 ? counts[c] / total : 0.0;
      return id;
    }

    const auto col = static_cast<std::size_t>(best.feature);
    const auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                    rows_.begin() + static_cast<std::ptrdiff_t>(end),
                                    [&](std::size_t r) { return x_(r, col) < best.threshold; });
    const auto split_at = static_cast<std::size_t>(mid - rows_.begin());
    const int left = grow(begin, split_at, depth + 1);
    const int right = grow(split_at, end, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  // Visits features in random order until `candidates_` non-constant ones
  // were examined. Exact score ties prefer the lexicographically smaller
  // column name so the chosen split does not depend on column order.
  Split find_split(std::size_t begin, std::size_t end, double parent_score) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Split best;
    best.score = parent_score;
    std::size_t examined = 0;
    for (std::size_t k = 0; k < order_.size() && examined < candidates_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, order_.size() - 1);
      std::swap(order_[k], order_[pick(rng_)]);
      const std::size_t f = order_[k];
      Split s;
      const bool varied = params_.split_mode == SplitMode::BestThreshold
                              ? best_threshold(f, begin, end, s)
                              : random_threshold(f, begin, end, s);
      if (!varied) continue;
      ++examined;
      if (s.feature < 0) continue;
      if (better(s, best)) best = s;
    }
    if (best.feature >= 0 && !(best.score < parent_score - 1e-12 * std::max(1.0, parent_score)))
      best.feature = -1;
    return best;
  }

  bool better(const Split& s, const Split& best) const {
    if (best.feature < 0) return s.score < best.score;
    if (s.score != best.score) return s.score < best.score;
    const auto& names = x_.column_names();
    const auto& a = names[static_cast<std::size_t>(s.feature)];
    const auto& b = names[static_cast<std::size_t>(best.feature)];
    if (a != b) return a < b;
    return s.feature < best.feature;
  }

  bool best_threshold(std::size_t f, std::size_t begin, std::size_t end, Split& out) {
    values_.clear();
    for (std::size_t i = begin; i < end; ++i) values_.emplace_back(x_(rows_[i], f), y_[rows_[i]]);
    std::sort(values_.begin(), values_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (values_.front().first == values_.back().first) return false;

    std::vector<double> left(n_classes_, 0.0), right(n_classes_, 0.0);
    for (const auto& [v, c] : values_) right[static_cast<std::size_t>(c)] += class_weight_[static_cast<std::size_t>(c)];
    double wl = 0.0;
    double wr = std::accumulate(right.begin(), right.end(), 0.0);
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
      const auto c = static_cast<std::size_t>(values_[i].second);
      left[c] += class_weight_[c];
      right[c] -= class_weight_[c];
      wl += class_weight_[c];
      wr -= class_weight_[c];
      const double a = values_[i].first, b = values_[i + 1].first;
      if (a == b) continue;
      const double score = weighted_impurity(left, wl) + weighted_impurity(right, wr);
      if (out.feature < 0 || score < out.score) {
        double t = a + (b - a) / 2.0;
        if (!(t > a)) t = b;
        out = {static_cast<int>(f), t, score};
      }
    }
    return true;
  }

  bool random_threshold(std::size_t f, std::size_t begin, std::size_t end, Split& out) {
    double lo = x_(rows_[begin], f), hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = x_(rows_[i], f);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) return false;
    std::uniform_real_distribution<double> draw(lo, hi);
    double t = draw(rng_);
    if (!(t > lo)) t = std::nextafter(lo, hi);
    if (!(t < hi)) t = std::nextafter(hi, lo);
    std::vector<double> left(n_classes_, 0.0), right(n_classes_, 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto c = static_cast<std::size_t>(y_[rows_[i]]);
      (x_(rows_[i], f) < t ? left : right)[c] += class_weight_[c];
    }
    const double wl = std::accumulate(left.begin(), left.end(), 0.0);
    const double wr = std::accumulate(right.begin(), right.end(), 0.0);
    out = {static_cast<int>(f), t, weighted_impurity(left, wl) + weighted_impurity(right, wr)};
    return true;
  }

  const FeatureMatrix& x_;
  std::span<const int> y_;
  std::size_t n_classes_;
  TreeParams params_;
  std::mt19937_64 rng_;
  std::size_t candidates_ = 1;
  std::vector<double> class_weight_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> rows_;
  std::vector<std::pair<double, int>> values_;
  Tree tree_;
};

void validate_fit_input(const FeatureMatrix& x, std::span<const int> y, std::size_t n_classes) {
  if (x.rows() == 0) fail(ErrorKind::Model, "cannot fit on an empty matrix");
  if (y.size() != x.rows()) fail(ErrorKind::Model, "labels do not align with rows");
  if (n_classes == 0) fail(ErrorKind::Model, "no classes");
  for (int c : y) {
    if (c < 0 || static_cast<std::size_t>(c) >= n_classes)
      fail(ErrorKind::Model, "label " + std::to_string(c) + " out of range");
  }
}

}  // namespace

const TreeNode& Tree::leaf_for(std::span<const double> row) const noexcept {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    node = &nodes[static_cast<std::size_t>(
        row[static_cast<std::size_t>(node->feature)] < node->threshold ? node->left : node->right)];
  }
  return *node;
}

std::size_t Tree::depth() const {
  std::function<std::size_t(int)> walk = [&](int id) -> std::size_t {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    return n.is_leaf() ? 0 : 1 + std::max(walk(n.left), walk(n.right));
  };
  return nodes.empty() ? 0 : walk(0);
}

Tree fit_tree(const FeatureMatrix& x, std::span<const int> y, std::size_t n_classes,
              const TreeParams& params, const ClassWeights* weights,
              std::span<const std::size_t> rows) {
  validate_fit_input(x, y, n_classes);
  if (params.min_samples_split < 2) fail(ErrorKind::Config, "min_samples_split must be >= 2");
  if (params.n_candidate_features && *params.n_candidate_features < 1)
    fail(ErrorKind::Config, "n_candidate_features must be >= 1");
  std::vector<std::size_t> sample;
  if (rows.empty()) {
    sample.resize(x.rows());
    std::iota(sample.begin(), sample.end(), std::size_t{0});
  } else {
    sample.assign(rows.begin(), rows.end());
  }
  return TreeBuilder(x, y, n_classes, params, weights).build(std::move(sample));
}

int argmax_class(std::span<const double> proba) noexcept {
  int best = 0;
  for (std::size_t c = 1; c < proba.size(); ++c) {
    if (proba[c] > proba[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

std::vector<double> Forest::predict_proba(std::span<const double> row) const {
  if (row.size() != column_names.size())
    fail(ErrorKind::Model, "row width " + std::to_string(row.size()) + " does not match " +
                               std::to_string(column_names.size()) + " trained features");
  std::vector<double> out(n_classes, 0.0);
  for (const auto& tree : trees) {
    const auto& leaf = tree.leaf_for(row);
    for (std::size_t c = 0; c < n_classes; ++c) out[c] += leaf.proba[c];
  }
  for (double& p : out) p /= static_cast<double>(trees.size());
  return out;
}

int Forest::predict(std::span<const double> row) const { return argmax_class(predict_proba(row)); }

std::vector<int> Forest::predict(const FeatureMatrix& x) const {
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
  return out;
}

Forest fit_forest(const FeatureMatrix& x, std::span<const int> y, std::size_t n_classes,
                  const ForestParams& params, unsigned jobs) {
  validate_fit_input(x, y, n_classes);
  if (params.n_trees < 1) fail(ErrorKind::Config, "n_trees must be >= 1");
  Forest forest;
  forest.params = params;
  forest.column_names = x.column_names();
  forest.n_classes = n_classes;
  forest.trees.resize(params.n_trees);
  const ClassWeights* weights = params.class_weights ? &*params.class_weights : nullptr;
  parallel_for(params.n_trees, jobs, [&](std::size_t i) {
    TreeParams tp = params.tree;
    tp.seed = params.tree_seed(i);
    std::vector<std::size_t> rows;
    if (params.bootstrap) {
      std::mt19937_64 rng(mix_seed(tp.seed, 0xb007));
      std::uniform_int_distribution<std::size_t> pick(0, x.rows() - 1);
      rows.resize(x.rows());
      for (auto& r : rows) r = pick(rng);
    }
    forest.trees[i] = fit_tree(x, y, n_classes, tp, weights, rows);
  });
  return forest;
}

namespace {

json node_to_json(const Tree& tree, int id) {
  const auto& n = tree.nodes[static_cast<std::size_t>(id)];
  if (n.is_leaf()) return json{{"proba", n.proba}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"left", node_to_json(tree, n.left)},
              {"right", node_to_json(tree, n.right)}};
}

int node_from_json(const json& j, Tree& tree) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("proba")) {
    tree.nodes.back().proba = j.at("proba").get<std::vector<double>>();
    return id;
  }
  const int feature = j.at("feature").get<int>();
  const double threshold = j.at("threshold").get<double>();
  const int left = node_from_json(j.at("left"), tree);
  const int right = node_from_json(j.at("right"), tree);
  auto& n = tree.nodes[static_cast<std::size_t>(id)];
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  return id;
}

constexpr const char* kForestFormat = "drivesense.forest";
constexpr int kForestVersion = 1;

}  // namespace

std::string forest_to_json(const Forest& forest) {
  const auto& p = forest.params;
  json params{{"n_trees", p.n_trees},
              {"bootstrap", p.bootstrap},
              {"seed", p.seed},
              {"min_samples_split", p.tree.min_samples_split},
              {"split_mode", p.tree.split_mode == SplitMode::BestThreshold ? "best" : "random"}};
  params["max_depth"] = p.tree.max_depth ? json(*p.tree.max_depth) : json(nullptr);
  params["n_candidate_features"] =
      p.tree.n_candidate_features ? json(*p.tree.n_candidate_features) : json(nullptr);
  if (p.class_weights) {
    json w = json::array();
    for (const auto& [c, v] : p.class_weights->weights) w.push_back({c, v});
    params["class_weights"] = w;
  } else {
    params["class_weights"] = nullptr;
  }
  json trees = json::array();
  for (const auto& t : forest.trees) trees.push_back(node_to_json(t, 0));
  json doc{{"format", kForestFormat},     {"version", kForestVersion},
           {"n_classes", forest.n_classes}, {"column_names", forest.column_names},
           {"params", params},            {"trees", trees}};
  return doc.dump();
}

Forest forest_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kForestFormat)
      fail(ErrorKind::Parse, "not a forest document");
    if (doc.at("version").get<int>() != kForestVersion)
      fail(ErrorKind::Parse, "unsupported forest version");
    Forest forest;
    forest.n_classes = doc.at("n_classes").get<std::size_t>();
    forest.column_names = doc.at("column_names").get<std::vector<std::string>>();
    const auto& p = doc.at("params");
    forest.params.n_trees = p.at("n_trees").get<std::size_t>();
    forest.params.bootstrap = p.at("bootstrap").get<bool>();
    forest.params.seed = p.at("seed").get<std::uint64_t>();
    forest.params.tree.min_samples_split = p.at("min_samples_split").get<std::size_t>();
    forest.params.tree.split_mode =
        p.at("split_mode").get<std::string>() == "best" ? SplitMode::BestThreshold
                                                        : SplitMode::RandomThreshold;
    if (!p.at("max_depth").is_null()) forest.params.tree.max_depth = p.at("max_depth").get<std::size_t>();
    if (!p.at("n_candidate_features").is_null())
      forest.params.tree.n_candidate_features = p.at("n_candidate_features").get<std::size_t>();
    if (!p.at("class_weights").is_null()) {
      ClassWeights w;
      for (const auto& e : p.at("class_weights")) w.weights[e.at(0).get<int>()] = e.at(1).get<double>();
      forest.params.class_weights = w;
    }
    for (const auto& t : doc.at("trees")) {
      Tree tree;
      node_from_json(t, tree);
      forest.trees.push_back(std::move(tree));
    }
    if (forest.trees.size() != forest.params.n_trees)
      fail(ErrorKind::Parse, "tree count does not match n_trees");
    return forest;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("invalid forest JSON: ") + e.what());
  }
}

void save_forest(const std::filesystem::path& path, const Forest& forest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << forest_to_json(forest) << '\n';
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

Forest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return forest_from_json(buf.str());
}

}  // namespace drivesense

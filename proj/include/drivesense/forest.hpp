#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drivesense/balance.hpp"
#include "drivesense/features.hpp"

namespace drivesense {

enum class SplitMode { BestThreshold, RandomThreshold };

struct TreeParams {
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_split = 2;
  /// Features examined per split; unset means floor(sqrt(F)), at least 1.
  std::optional<std::size_t> n_candidate_features;
  SplitMode split_mode = SplitMode::BestThreshold;
  std::uint64_t seed = 0;
};

struct ForestParams {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  TreeParams tree;
  std::optional<ClassWeights> class_weights;
  std::uint64_t seed = 0;

  std::uint64_t tree_seed(std::size_t i) const noexcept;
};

enum class ModelKind { Tree, Forest, Extra };

std::string_view model_name(ModelKind kind) noexcept;
std::optional<ModelKind> parse_model(std::string_view name) noexcept;

/// Single CART tree (all features, exhaustive thresholds), random forest
/// (bootstrap, sqrt(F) candidates) or extra trees (no bootstrap, random thresholds).
ForestParams model_preset(ModelKind kind, std::uint64_t seed);

/// Leaves have feature == -1 and carry a class-probability vector. Internal
/// nodes route value < threshold to `left`.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> proba;
  double weight = 0.0;    // total sample weight reaching the node
  double impurity = 0.0;  // Gini of the node

  bool is_leaf() const noexcept { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> row) const noexcept;
  std::size_t depth() const;
};

/// 1 - sum p_c^2 over weighted counts. Throws on a zero total.
double gini_impurity(std::span<const double> weighted_counts);

/// Grows one tree on `rows` (indices into x, repeats allowed; empty = all rows).
Tree fit_tree(const FeatureMatrix& x, std::span<const int> y, std::size_t n_classes,
              const TreeParams& params, const ClassWeights* weights = nullptr,
              std::span<const std::size_t> rows = {});

struct Forest {
  std::vector<Tree> trees;
  ForestParams params;
  std::vector<std::string> column_names;
  std::size_t n_classes = 0;

  std::vector<double> predict_proba(std::span<const double> row) const;
  int predict(std::span<const double> row) const;
  std::vector<int> predict(const FeatureMatrix& x) const;
};

/// Index of the largest probability; ties go to the lower class index.
int argmax_class(std::span<const double> proba) noexcept;

Forest fit_forest(const FeatureMatrix& x, std::span<const int> y, std::size_t n_classes,
                  const ForestParams& params, unsigned jobs = 1);

std::string forest_to_json(const Forest& forest);
Forest forest_from_json(std::string_view text);
void save_forest(const std::filesystem::path& path, const Forest& forest);
Forest load_forest(const std::filesystem::path& path);

}  // namespace drivesense

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "drivesense/features.hpp"

namespace drivesense {

enum class BalanceMode { None, ClassWeights, Smote };

struct BalanceSpec {
  BalanceMode mode = BalanceMode::None;
  std::size_t smote_k = 5;
  std::uint64_t seed = 0;
};

/// w_c = N / (C * n_c) over the C classes present.
struct ClassWeights {
  std::map<int, double> weights;

  double of(int cls) const noexcept {
    const auto it = weights.find(cls);
    return it == weights.end() ? 1.0 : it->second;
  }
};

ClassWeights class_weights(std::span<const int> labels);

/// Column means and standard deviations of a training matrix. Zero-spread
/// columns get scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const FeatureMatrix& m);
};

struct SmoteResult {
  FeatureMatrix x;
  std::vector<int> y;
  /// For each synthetic row (appended after the originals): base and neighbor
  /// row indices into the input matrix.
  std::vector<std::pair<std::size_t, std::size_t>> provenance;
  /// Classes oversampled by replication because they had a single sample.
  std::size_t replicated_classes = 0;
};

/// Oversamples every class up to the majority count with synthetic rows
/// x_i + u (x_nn - x_i), u ~ U[0,1), x_nn among the k nearest same-class
/// neighbors on standardized columns. Original rows come first, unchanged.
SmoteResult smote_oversample(const FeatureMatrix& m, std::span<const int> labels,
                             const BalanceSpec& spec);

}  // namespace drivesense

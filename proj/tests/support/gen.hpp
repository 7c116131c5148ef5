#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "drivesense/features.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Random series of length n. Mixes continuous values, small-integer values
/// (exact ties) and the occasional constant run so degenerate branches get hit.
inline std::vector<double> series(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  const auto style = index(rng, 0, 9);
  const double scale = std::pow(10.0, uniform(rng, -2.0, 4.0));
  const double offset = uniform(rng, -2.0, 2.0) * scale;
  for (double& v : x) {
    if (style == 0) v = 7.25;
    else if (style <= 3) v = static_cast<double>(index(rng, 0, 6)) - 2.0;
    else v = offset + scale * uniform(rng, -1.0, 1.0);
  }
  return x;
}

inline std::vector<int> labels(Rng& rng, std::size_t n, int n_classes) {
  std::vector<int> y(n);
  for (int& v : y) v = static_cast<int>(index(rng, 0, static_cast<std::size_t>(n_classes - 1)));
  return y;
}

inline drivesense::FeatureMatrix matrix(std::size_t rows, std::size_t cols) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
  return drivesense::FeatureMatrix(rows, names);
}

/// Gaussian blobs: class c has mean c * separation in every column.
inline drivesense::Dataset blobs(Rng& rng, std::span<const std::size_t> counts, std::size_t cols,
                                 double separation) {
  drivesense::Dataset d;
  std::size_t total = 0;
  for (auto c : counts) total += c;
  d.x = matrix(total, cols);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::size_t r = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    d.class_names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < counts[c]; ++i, ++r) {
      for (std::size_t j = 0; j < cols; ++j) d.x(r, j) = static_cast<double>(c) * separation + noise(rng);
      d.y.push_back(static_cast<int>(c));
    }
  }
  return d;
}

}  // namespace gen

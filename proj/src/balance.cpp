#include "drivesense/balance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "drivesense/error.hpp"
#include "drivesense/util.hpp"

namespace drivesense {

ClassWeights class_weights(std::span<const int> labels) {
  if (labels.empty()) fail(ErrorKind::Balance, "cannot weight an empty label list");
  std::map<int, std::size_t> counts;
  for (int y : labels) ++counts[y];
  const double total = static_cast<double>(labels.size());
  const double classes = static_cast<double>(counts.size());
  ClassWeights out;
  for (const auto& [cls, n] : counts) out.weights[cls] = total / (classes * static_cast<double>(n));
  return out;
}

Standardizer Standardizer::fit(const FeatureMatrix& m) {
  Standardizer s;
  s.mean.assign(m.cols(), 0.0);
  s.scale.assign(m.cols(), 1.0);
  if (m.rows() == 0) return s;
  const double n = static_cast<double>(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) s.mean[c] += row[c];
  }
  for (double& v : s.mean) v /= n;
  std::vector<double> ss(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double d = row[c] - s.mean[c];
      ss[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const double sd = std::sqrt(ss[c] / n);
    s.scale[c] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

namespace {

// k nearest same-class neighbors of every member, ties broken by row order.
std::vector<std::vector<std::size_t>> nearest_neighbors(const std::vector<std::vector<double>>& z,
                                                        std::size_t k) {
  const std::size_t n = z.size();
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = 0.0;
      for (std::size_t c = 0; c < z[i].size(); ++c) {
        const double diff = z[i][c] - z[j][c];
        d += diff * diff;
      }
      dist.emplace_back(d, j);
    }
    const std::size_t take = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
    for (std::size_t t = 0; t < take; ++t) out[i].push_back(dist[t].second);
  }
  return out;
}

}  // namespace

SmoteResult smote_oversample(const FeatureMatrix& m, std::span<const int> labels,
                             const BalanceSpec& spec) {
  if (m.rows() == 0) fail(ErrorKind::Balance, "cannot oversample an empty matrix");
  if (labels.size() != m.rows()) fail(ErrorKind::Balance, "labels do not match matrix rows");
  if (spec.smote_k < 1) fail(ErrorKind::Config, "smote_k must be at least 1");

  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < labels.size(); ++r) members[labels[r]].push_back(r);
  std::size_t majority = 0;
  for (const auto& [cls, rows] : members) majority = std::max(majority, rows.size());

  const auto standard = Standardizer::fit(m);
  SmoteResult out;
  out.x = m.select_rows([&] {
    std::vector<std::size_t> all(m.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }());
  out.y.assign(labels.begin(), labels.end());

  std::vector<double> synth(m.cols());
  for (const auto& [cls, rows] : members) {
    const std::size_t needed = majority - rows.size();
    if (needed == 0) continue;
    std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(cls), 0x5307e));
    if (rows.size() == 1) {
      ++out.replicated_classes;
      for (std::size_t s = 0; s < needed; ++s) {
        out.x.append_row(m.row(rows[0]));
        out.y.push_back(cls);
        out.provenance.emplace_back(rows[0], rows[0]);
      }
      continue;
    }
    std::vector<std::vector<double>> z(rows.size(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = m.row(rows[i]);
      for (std::size_t c = 0; c < m.cols(); ++c)
        z[i][c] = (row[c] - standard.mean[c]) / standard.scale[c];
    }
    const auto neighbors = nearest_neighbors(z, spec.smote_k);
    const std::size_t k = neighbors.front().size();
    std::uniform_int_distribution<std::size_t> pick(0, rows.size() * k - 1);
    std::uniform_real_distribution<double> step(0.0, 1.0);
    for (std::size_t s = 0; s < needed; ++s) {
      const std::size_t draw = pick(rng);
      const std::size_t base = rows[draw / k];
      const std::size_t nn = rows[neighbors[draw / k][draw % k]];
      const double u = std::min(step(rng), std::nextafter(1.0, 0.0));
      const auto xb = m.row(base);
      const auto xn = m.row(nn);
      for (std::size_t c = 0; c < m.cols(); ++c) {
        const double v = xb[c] + u * (xn[c] - xb[c]);
        synth[c] = std::clamp(v, std::min(xb[c], xn[c]), std::max(xb[c], xn[c]));
      }
      out.x.append_row(synth);
      out.y.push_back(cls);
      out.provenance.emplace_back(base, nn);
    }
  }
  return out;
}

}  // namespace drivesense

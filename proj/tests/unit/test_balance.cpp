#include <doctest.h>

#include <cmath>
#include <map>

#include "../support/gen.hpp"
#include "drivesense/balance.hpp"
#include "drivesense/error.hpp"

using namespace drivesense;

namespace {

std::vector<int> counts_to_labels(std::initializer_list<std::pair<int, std::size_t>> counts) {
  std::vector<int> y;
  for (auto [cls, n] : counts) y.insert(y.end(), n, cls);
  return y;
}

std::map<int, std::size_t> count(std::span<const int> y) {
  std::map<int, std::size_t> c;
  for (int v : y) ++c[v];
  return c;
}

// distance-sum test: |a - p| + |p - b| == |a - b|
bool on_segment(std::span<const double> a, std::span<const double> b, std::span<const double> p, double tol) {
  double ap = 0, pb = 0, ab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ap += (a[i] - p[i]) * (a[i] - p[i]);
    pb += (p[i] - b[i]) * (p[i] - b[i]);
    ab += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return std::sqrt(ap) + std::sqrt(pb) - std::sqrt(ab) <= tol * std::max(1.0, std::sqrt(ab));
}

}  // namespace

TEST_CASE("inverse-frequency class weights") {
  auto w = class_weights(counts_to_labels({{0, 10}, {1, 40}}));
  CHECK(w.of(0) == doctest::Approx(2.5));
  CHECK(w.of(1) == doctest::Approx(0.625));
  w = class_weights(counts_to_labels({{0, 5}, {1, 5}}));
  CHECK(w.of(0) == 1.0);
  CHECK(w.of(1) == 1.0);
  w = class_weights(counts_to_labels({{3, 7}}));
  CHECK(w.of(3) == 1.0);
  CHECK_THROWS_AS(class_weights(std::vector<int>{}), Error);
}

TEST_CASE("property: weighted counts sum to N") {
  gen::Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto y = gen::labels(rng, gen::index(rng, 1, 300), static_cast<int>(gen::index(rng, 1, 6)));
    const auto w = class_weights(y);
    double total = 0;
    for (int v : y) total += w.of(v);
    CHECK(total == doctest::Approx(static_cast<double>(y.size())).epsilon(1e-12));
  }
}

TEST_CASE("two-point minority with k=1 yields a convex combination") {
  auto m = gen::matrix(0, 2);
  m.append_row(std::vector<double>{0, 0});
  m.append_row(std::vector<double>{1, 1});
  m.append_row(std::vector<double>{5, 5});
  m.append_row(std::vector<double>{6, 6});
  m.append_row(std::vector<double>{7, 7});
  const std::vector<int> y{0, 0, 1, 1, 1};
  const auto r = smote_oversample(m, y, BalanceSpec{BalanceMode::Smote, 1, 9});
  REQUIRE(r.x.rows() == 6);
  const double u = r.x(5, 0);
  CHECK(r.x(5, 1) == u);
  CHECK(u >= 0.0);
  CHECK(u < 1.0);
  CHECK(r.y[5] == 0);
}

TEST_CASE("SMOTE equalizes counts and is deterministic") {
  gen::Rng rng(2);
  const std::size_t counts[] = {100, 20};
  const auto d = gen::blobs(rng, counts, 3, 4.0);
  const BalanceSpec spec{BalanceMode::Smote, 5, 123};
  const auto a = smote_oversample(d.x, d.y, spec);
  const auto c = count(a.y);
  CHECK(c.at(0) == 100);
  CHECK(c.at(1) == 100);
  const auto b = smote_oversample(d.x, d.y, spec);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
}

TEST_CASE("singleton class is replicated") {
  auto m = gen::matrix(0, 1);
  for (double v : {0.0, 1.0, 2.0, 9.0}) m.append_row(std::vector<double>{v});
  const std::vector<int> y{0, 0, 0, 1};
  const auto r = smote_oversample(m, y, BalanceSpec{BalanceMode::Smote, 5, 0});
  CHECK(r.replicated_classes == 1);
  for (std::size_t i = 4; i < r.x.rows(); ++i) CHECK(r.x(i, 0) == 9.0);
}

TEST_CASE("SMOTE argument checks") {
  auto m = gen::matrix(2, 1);
  CHECK_THROWS_AS(smote_oversample(m, std::vector<int>{0}, BalanceSpec{BalanceMode::Smote, 5, 0}), Error);
  CHECK_THROWS_AS(smote_oversample(m, std::vector<int>{0, 1}, BalanceSpec{BalanceMode::Smote, 0, 0}), Error);
}

TEST_CASE("standardizer uses population spread and guards zero spread") {
  auto m = gen::matrix(0, 2);
  m.append_row(std::vector<double>{1, 5});
  m.append_row(std::vector<double>{3, 5});
  const auto s = Standardizer::fit(m);
  CHECK(s.mean[0] == 2.0);
  CHECK(s.scale[0] == 1.0);
  CHECK(s.scale[1] == 1.0);
}

TEST_CASE("property: synthetic points lie on base-neighbor segments inside the class box") {
  gen::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n_classes = static_cast<int>(gen::index(rng, 2, 4));
    std::vector<std::size_t> counts;
    for (int c = 0; c < n_classes; ++c) counts.push_back(gen::index(rng, 1, 40));
    const auto d = gen::blobs(rng, counts, gen::index(rng, 1, 5), gen::uniform(rng, 0, 5));
    const BalanceSpec spec{BalanceMode::Smote, gen::index(rng, 1, 7), rng()};
    const auto r = smote_oversample(d.x, d.y, spec);

    const auto c = count(r.y);
    const auto majority = *std::max_element(counts.begin(), counts.end());
    for (auto [cls, n] : c) CHECK(n == majority);
    for (std::size_t i = 0; i < d.x.rows(); ++i) {
      CHECK(std::equal(d.x.row(i).begin(), d.x.row(i).end(), r.x.row(i).begin()));
      CHECK(r.y[i] == d.y[i]);
    }
    REQUIRE(r.provenance.size() == r.x.rows() - d.x.rows());
    for (std::size_t s = 0; s < r.provenance.size(); ++s) {
      const auto [base, nn] = r.provenance[s];
      const std::size_t row = d.x.rows() + s;
      CHECK(d.y[base] == r.y[row]);
      CHECK(d.y[nn] == r.y[row]);
      CHECK(on_segment(d.x.row(base), d.x.row(nn), r.x.row(row), 1e-9));
      for (std::size_t col = 0; col < d.x.cols(); ++col) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i = 0; i < d.x.rows(); ++i) {
          if (d.y[i] != r.y[row]) continue;
          lo = std::min(lo, d.x(i, col));
          hi = std::max(hi, d.x(i, col));
        }
        CHECK(r.x(row, col) >= lo);
        CHECK(r.x(row, col) <= hi);
      }
    }
  }
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "../support/gen.hpp"
#include "../support/oracles.hpp"
#include "drivesense/error.hpp"
#include "drivesense/features.hpp"
#include "drivesense/labeling.hpp"
#include "drivesense/windowing.hpp"

using namespace drivesense;

namespace {

double feat(const ChannelFeatures& f, Feature which) { return f[static_cast<std::size_t>(which)]; }

Window window_of(std::span<const ChannelKind> channels, std::size_t n, double fill = 1.0) {
  Window w;
  w.trip_id = "t";
  for (auto k : channels) {
    auto& v = w.values[k];
    for (std::size_t i = 0; i < n; ++i) v.push_back(fill + static_cast<double>(i % 3));
  }
  return w;
}

}  // namespace

TEST_CASE("every channel carries the full feature list") {
  CHECK(kFeaturesPerChannel == kTimeFeatureCount + kFrequencyFeatureCount);
  CHECK(kTimeFeatureCount == 28);
  CHECK(kFrequencyFeatureCount == 3);
  const auto names = FeatureSet::all().column_names();
  CHECK(names.size() == 12 * kFeaturesPerChannel);
  CHECK(names.front() == "accel_x.kurtosis");
  CHECK(names[kFeaturesPerChannel - 1] == "accel_x.entropy");
  CHECK(feature_name(Feature::SumOfReoccurringDataPoints) == "sum_of_reoccurring_data_points");
}

TEST_CASE("constant series") {
  const std::vector<double> x(10, 2.0);
  const auto f = channel_features(x);
  CHECK(feat(f, Feature::Mean) == 2.0);
  CHECK(feat(f, Feature::StandardDeviation) == 0.0);
  CHECK(feat(f, Feature::AbsoluteSumOfChanges) == 0.0);
  CHECK(feat(f, Feature::CountAboveMean) == 0.0);
  CHECK(feat(f, Feature::HasDuplicate) == 1.0);
  CHECK(feat(f, Feature::Entropy) == 0.0);
  CHECK(std::isnan(feat(f, Feature::Skewness)));
}

TEST_CASE("arithmetic ramp 1..10") {
  std::vector<double> x;
  for (int i = 1; i <= 10; ++i) x.push_back(i);
  const auto f = channel_features(x);
  CHECK(feat(f, Feature::Mean) == 5.5);
  CHECK(feat(f, Feature::MeanChange) == 1.0);
  CHECK(feat(f, Feature::LongestStrikeAboveMean) == 5.0);
  CHECK(feat(f, Feature::FirstLocationOfMaximum) == doctest::Approx(0.9));
  CHECK(feat(f, Feature::LastLocationOfMinimum) == doctest::Approx(0.1));
  CHECK(feat(f, Feature::HasDuplicate) == 0.0);
}

TEST_CASE("benford correlation") {
  // P(d) is irrational, so integer counts can only approximate it: 1e4 * P(d) rounded
  const auto p = oracle::benford_probabilities();
  std::vector<double> scaled;
  for (int d = 1; d <= 9; ++d)
    for (int i = 0; i < static_cast<int>(std::lround(1e4 * p[d - 1])); ++i) scaled.push_back(d + 0.5);
  CHECK(benford_correlation(scaled) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(benford_correlation(scaled) == doctest::Approx(oracle::benford(scaled)).epsilon(1e-12));

  CHECK(benford_correlation(std::vector<double>(5, 0.0)) == 0.0);

  const std::vector<double> x{1, 1, 2, 3};
  const std::array<double, 9> freq{.5, .25, .25, 0, 0, 0, 0, 0, 0};
  CHECK(benford_correlation(x) == doctest::Approx(oracle::pearson(freq, p)).epsilon(1e-12));
}

TEST_CASE("benford uses the decimal first digit") {
  // the double nearest 0.3 is 0.2999..., whose decimal text starts with 3
  const std::vector<double> x{0.3, 0.3, 3.0};
  const std::vector<double> y{3.0, 3.0, 3.0};
  CHECK(benford_correlation(x) == benford_correlation(y));
}

TEST_CASE("spectral entropy") {
  CHECK(spectral_entropy(std::vector<double>(8, 3.0)) == 0.0);

  std::vector<double> tone, two_tone;
  for (int i = 0; i < 10; ++i) tone.push_back(std::sin(2 * std::numbers::pi * 2 * i / 10.0));
  CHECK(spectral_entropy(tone) == doctest::Approx(0.0).epsilon(1e-12));

  for (int i = 0; i < 16; ++i)
    two_tone.push_back(std::sin(2 * std::numbers::pi * 2 * i / 16.0) + std::cos(2 * std::numbers::pi * 5 * i / 16.0));
  CHECK(std::fabs(spectral_entropy(two_tone) - std::log(2.0)) < 1e-9);
  CHECK(std::fabs(oracle::entropy(two_tone) - std::log(2.0)) < 1e-9);
}

TEST_CASE("mean second derivative central") {
  CHECK(mean_second_derivative_central(std::vector<double>{0, 1, 2, 3}) == 0.0);
  CHECK(mean_second_derivative_central(std::vector<double>{0, 1, 4, 9}) == 1.0);
  try {
    mean_second_derivative_central(std::vector<double>{5});
    FAIL("expected a feature error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Feature);
  }
}

TEST_CASE("reoccurring sums") {
  auto check = [](std::vector<double> x, double points, double values) {
    const auto r = reoccurring_sums(x);
    CHECK(r.sum_points == points);
    CHECK(r.sum_values == values);
  };
  check({1, 1, 2, 3, 3, 3}, 11, 4);
  check({1, 2, 3}, 0, 0);
  check({2, 2, 2, 2}, 8, 2);
}

TEST_CASE("property: features match the direct-definition oracle") {
  gen::Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const auto x = gen::series(rng, gen::index(rng, 3, 60));
    const auto got = channel_features(x);
    const auto want = oracle::features(x);
    for (std::size_t i = 0; i < kFeaturesPerChannel; ++i) {
      INFO(feature_name(static_cast<Feature>(i)), " length ", x.size());
      CHECK(oracle::close(got[i], want[i], 1e-9));
    }
  }
}

TEST_CASE("property: Parseval holds for the DFT") {
  gen::Rng rng(102);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = gen::series(rng, gen::index(rng, 2, 80));
    double energy = 0, spectral = 0;
    for (double v : x) energy += v * v;
    for (const auto& c : dft(x)) spectral += std::norm(c);
    spectral /= static_cast<double>(x.size());
    CHECK(oracle::close(energy, spectral, 1e-6));
  }
}

TEST_CASE("property: translation invariance") {
  gen::Rng rng(103);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(gen::index(rng, 4, 50));
    for (double& v : x) v = std::ldexp(static_cast<double>(gen::index(rng, 0, 4096)), -6);  // exact grid
    const double c = std::ldexp(static_cast<double>(gen::index(rng, 0, 1024)), -2);
    std::vector<double> y = x;
    for (double& v : y) v += c;  // exact: no rounding on this grid
    const auto a = channel_features(x), b = channel_features(y);
    CHECK(feat(b, Feature::Mean) == doctest::Approx(feat(a, Feature::Mean) + c).epsilon(1e-12));
    for (Feature f : {Feature::StandardDeviation, Feature::AbsoluteSumOfChanges, Feature::LongestStrikeAboveMean,
                      Feature::LongestStrikeBelowMean}) {
      CHECK(oracle::close(feat(a, f), feat(b, f), 1e-9));
    }
    CHECK(oracle::close(feat(a, Feature::Entropy), feat(b, Feature::Entropy), 1e-9, 1e-9));
  }
}

TEST_CASE("property: positive scaling invariance") {
  gen::Rng rng(104);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = gen::series(rng, gen::index(rng, 3, 50));
    const double a = std::ldexp(1.0, static_cast<int>(gen::index(rng, 0, 12)) - 6);  // powers of two scale exactly
    std::vector<double> y = x;
    for (double& v : y) v *= a;
    const auto fx = channel_features(x), fy = channel_features(y);
    for (Feature f : {Feature::CountAboveMean, Feature::FirstLocationOfMaximum, Feature::FirstLocationOfMinimum,
                      Feature::LastLocationOfMaximum, Feature::LastLocationOfMinimum, Feature::HasDuplicate,
                      Feature::HasDuplicateMax, Feature::HasDuplicateMin}) {
      CHECK(feat(fx, f) == feat(fy, f));
    }
    CHECK(feat(fx, Feature::FirstLocationOfMaximum) >= 0.0);
    CHECK(feat(fx, Feature::FirstLocationOfMaximum) < 1.0);
    CHECK(feat(fx, Feature::LastLocationOfMaximum) > 0.0);
    CHECK(feat(fx, Feature::LastLocationOfMaximum) <= 1.0);
  }
}

TEST_CASE("extract_features lays channels out channel-major and imputes") {
  const std::vector<ChannelKind> chans{ChannelKind::HR, ChannelKind::PPG};
  const FeatureSet fs{chans};
  auto w = window_of(chans, 10);
  w.values[ChannelKind::PPG].assign(10, 0.0);  // zero mean -> variation coefficient undefined
  const auto fv = extract_features(w, fs);
  CHECK(fv.values.size() == 2 * kFeaturesPerChannel);
  for (double v : fv.values) CHECK(std::isfinite(v));
  CHECK(fv.imputed >= 1);
  CHECK(fv.values[static_cast<std::size_t>(Feature::Mean)] == doctest::Approx(oracle::mean(w.values[ChannelKind::HR])));
}

TEST_CASE("extract_features requires every channel") {
  const std::vector<ChannelKind> have{ChannelKind::HR};
  const FeatureSet fs{{ChannelKind::HR, ChannelKind::Light}};
  try {
    extract_features(window_of(have, 10), fs);
    FAIL("expected a feature error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Feature);
  }
}

TEST_CASE("assembly: layout, imputation, mixed sets") {
  const FeatureSet all = FeatureSet::all();
  const auto chans = all.channels;
  std::vector<FeatureVector> rows{extract_features(window_of(chans, 10), all),
                                  extract_features(window_of(chans, 10, 5.0), all)};
  rows[1].values[3] = std::numeric_limits<double>::infinity();
  const auto m = impute_and_assemble(rows, all);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 12 * kFeaturesPerChannel);
  CHECK(m(1, 3) == 0.0);
  CHECK(m.imputed() == rows[0].imputed + rows[1].imputed + 1);

  const FeatureSet hr_only{{ChannelKind::HR}};
  const std::vector<ChannelKind> hr{ChannelKind::HR};
  rows.push_back(extract_features(window_of(hr, 10), hr_only));
  try {
    impute_and_assemble(rows, all);
    FAIL("expected an assembly error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Assembly);
  }
}

TEST_CASE("feature CSV round-trips bit-exactly") {
  gen::Rng rng(7);
  Dataset d;
  const FeatureSet fs{{ChannelKind::HR, ChannelKind::Light}};
  d.x = FeatureMatrix(0, fs.column_names());
  for (int r = 0; r < 20; ++r) {
    std::vector<double> row(fs.width());
    for (double& v : row) v = gen::uniform(rng, -1e6, 1e6) / 3.0;
    d.x.append_row(row);
    d.y.push_back(r % 4);
  }
  d.class_names = taxonomy(Category::OutsideEvent).classes;
  const auto path = std::filesystem::temp_directory_path() / "ds_features_roundtrip.csv";
  write_feature_csv(path, d);
  const auto back = read_feature_csv(path, taxonomy(Category::OutsideEvent));
  CHECK(back.x == d.x);
  CHECK(back.y == d.y);
  CHECK(columns_for_channels(back.x, std::vector<ChannelKind>{ChannelKind::Light}).size() == kFeaturesPerChannel);
}

TEST_CASE("matrix row append checks width") {
  FeatureMatrix m(0, {"a", "b"});
  CHECK_THROWS_AS(m.append_row(std::vector<double>{1.0}), Error);
  m.append_row(std::vector<double>{1.0, 2.0});
  const std::vector<std::size_t> cols{1};
  CHECK(m.select_columns(cols)(0, 0) == 2.0);
}

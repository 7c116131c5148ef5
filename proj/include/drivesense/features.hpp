#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drivesense/ingest.hpp"

namespace drivesense {

struct Window;
struct Taxonomy;

/// Per-channel features in vector order: 28 time-domain features followed by
/// energy, power and spectral entropy.
enum class Feature {
  Kurtosis,
  Mean,
  StandardDeviation,
  Maximum,
  Minimum,
  Variance,
  Skewness,
  Median,
  VariationCoefficient,
  AbsoluteSumOfChanges,
  BenfordCorrelation,
  CountAboveMean,
  CountBelowMean,
  FirstLocationOfMaximum,
  FirstLocationOfMinimum,
  HasDuplicate,
  HasDuplicateMax,
  HasDuplicateMin,
  LastLocationOfMaximum,
  LastLocationOfMinimum,
  LongestStrikeAboveMean,
  LongestStrikeBelowMean,
  MeanAbsChange,
  MeanChange,
  MeanSecondDerivativeCentral,
  SumOfReoccurringDataPoints,
  SumOfReoccurringValues,
  SumValues,
  Energy,
  Power,
  Entropy,
};

inline constexpr std::size_t kTimeFeatureCount = 28;
inline constexpr std::size_t kFrequencyFeatureCount = 3;
inline constexpr std::size_t kFeaturesPerChannel = kTimeFeatureCount + kFrequencyFeatureCount;

std::string_view feature_name(Feature feature) noexcept;
constexpr std::size_t index(Feature feature) noexcept { return static_cast<std::size_t>(feature); }

using ChannelFeatures = std::array<double, kFeaturesPerChannel>;

/// All per-channel features of one series. Undefined results (too short,
/// zero variance, zero mean for the variation coefficient) come back as NaN.
ChannelFeatures channel_features(std::span<const double> x);

/// Pearson correlation of first-significant-digit frequencies with Benford's
/// law; 0 when undefined.
double benford_correlation(std::span<const double> x);

/// Shannon entropy (nats) of the normalized one-sided periodogram of the
/// mean-removed series, bins 1..L/2.
double spectral_entropy(std::span<const double> x);

/// Throws ErrorKind::Feature for fewer than three samples.
double mean_second_derivative_central(std::span<const double> x);

struct ReoccurringSums {
  double sum_points = 0.0;
  double sum_values = 0.0;
};
ReoccurringSums reoccurring_sums(std::span<const double> x);

/// Full complex DFT, X_k = sum_j x_j exp(-2 pi i jk / L).
std::vector<std::complex<double>> dft(std::span<const double> x);

struct FeatureSet {
  std::vector<ChannelKind> channels;

  static FeatureSet all();
  std::size_t width() const noexcept { return channels.size() * kFeaturesPerChannel; }
  /// "channel.feature", channel-major.
  std::vector<std::string> column_names() const;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

struct WindowRef {
  std::string trip_id;
  double start_ms = 0.0;
};

struct FeatureVector {
  std::vector<double> values;
  WindowRef window;
  std::vector<ChannelKind> channels;
  std::size_t imputed = 0;
};

FeatureVector extract_features(const Window& w, const FeatureSet& fs);

/// Dense row-major matrix with named columns.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::vector<std::string> column_names);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return names_.size(); }
  const std::vector<std::string>& column_names() const noexcept { return names_; }

  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols(), cols()};
  }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols(), cols()}; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols() + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }

  void append_row(std::span<const double> values);
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;
  FeatureMatrix select_columns(std::span<const std::size_t> indices) const;

  std::size_t imputed() const noexcept { return imputed_; }
  void set_imputed(std::size_t n) noexcept { imputed_ = n; }

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.rows_ == b.rows_ && a.names_ == b.names_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::vector<std::string> names_;
  std::vector<double> data_;
  std::size_t imputed_ = 0;
};

/// Stacks rows into a matrix, replacing any remaining non-finite value by 0.
/// Rows whose channel list differs from `fs` raise ErrorKind::Assembly.
FeatureMatrix impute_and_assemble(std::span<const FeatureVector> rows, const FeatureSet& fs);

/// Feature matrix plus class labels indexed into `class_names`.
struct Dataset {
  FeatureMatrix x;
  std::vector<int> y;
  std::vector<std::string> class_names;

  std::size_t n_classes() const noexcept { return class_names.size(); }
  Dataset select_rows(std::span<const std::size_t> indices) const;
};

/// Header of column names plus a trailing `label` column holding class names.
void write_feature_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_feature_csv(const std::filesystem::path& path, const Taxonomy& taxonomy);

/// Column indices whose channel prefix is in `channels`.
std::vector<std::size_t> columns_for_channels(const FeatureMatrix& m,
                                              std::span<const ChannelKind> channels);

}  // namespace drivesense

#include "drivesense/features.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "drivesense/error.hpp"
#include "drivesense/labeling.hpp"
#include "drivesense/util.hpp"
#include "drivesense/windowing.hpp"

namespace drivesense {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<std::string_view, kFeaturesPerChannel> kFeatureNames = {
    "kurtosis",
    "mean",
    "standard_deviation",
    "maximum",
    "minimum",
    "variance",
    "skewness",
    "median",
    "variation_coefficient",
    "absolute_sum_of_changes",
    "benford_correlation",
    "count_above_mean",
    "count_below_mean",
    "first_location_of_maximum",
    "first_location_of_minimum",
    "has_duplicate",
    "has_duplicate_max",
    "has_duplicate_min",
    "last_location_of_maximum",
    "last_location_of_minimum",
    "longest_strike_above_mean",
    "longest_strike_below_mean",
    "mean_abs_change",
    "mean_change",
    "mean_second_derivative_central",
    "sum_of_reoccurring_data_points",
    "sum_of_reoccurring_values",
    "sum_values",
    "energy",
    "power",
    "entropy",
};

std::uint64_t bits(double v) noexcept { return std::bit_cast<std::uint64_t>(v); }

// First digit of the shortest decimal representation of |v|, 0 for zero.
int first_significant_digit(double v) noexcept {
  v = std::abs(v);
  if (v == 0.0 || !std::isfinite(v)) return 0;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  if (res.ec != std::errc{}) return 0;
  return buf[0] - '0';
}

double pearson(std::span<const double> a, std::span<const double> b) noexcept {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

std::size_t longest_run(std::span<const double> x, auto pred) noexcept {
  std::size_t best = 0, run = 0;
  for (double v : x) {
    run = pred(v) ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

}  // namespace

std::string_view feature_name(Feature feature) noexcept { return kFeatureNames[index(feature)]; }

std::vector<std::complex<double>> dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  if (n == 0) return out;
  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
    twiddle[m] = {std::cos(angle), std::sin(angle)};
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    std::size_t m = 0;  // (j * k) mod n
    for (std::size_t j = 0; j < n; ++j) {
      acc += x[j] * twiddle[m];
      m += k;
      if (m >= n) m -= n;
    }
    out[k] = acc;
  }
  return out;
}

double spectral_entropy(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centered(x.begin(), x.end());
  for (double& v : centered) v -= mean;
  const auto spectrum = dft(centered);
  std::vector<double> power;
  power.reserve(n / 2);
  for (std::size_t k = 1; k <= n / 2; ++k) power.push_back(std::norm(spectrum[k]));
  const double total = std::accumulate(power.begin(), power.end(), 0.0);
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double p : power) {
    const double q = p / total;
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

double benford_correlation(std::span<const double> x) {
  std::array<double, 9> freq{};
  std::size_t counted = 0;
  for (double v : x) {
    const int d = first_significant_digit(v);
    if (d >= 1 && d <= 9) {
      freq[static_cast<std::size_t>(d - 1)] += 1.0;
      ++counted;
    }
  }
  if (counted == 0) return 0.0;
  std::array<double, 9> benford{};
  for (std::size_t d = 1; d <= 9; ++d) {
    freq[d - 1] /= static_cast<double>(counted);
    benford[d - 1] = std::log10(1.0 + 1.0 / static_cast<double>(d));
  }
  return pearson(freq, benford);
}

double mean_second_derivative_central(std::span<const double> x) {
  if (x.size() < 3) fail(ErrorKind::Feature, "mean second derivative needs at least 3 samples");
  double acc = 0.0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) acc += (x[i + 1] - 2.0 * x[i] + x[i - 1]) / 2.0;
  return acc / static_cast<double>(x.size() - 2);
}

ReoccurringSums reoccurring_sums(std::span<const double> x) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end(),
            [](double a, double b) { return bits(a) < bits(b); });
  ReoccurringSums out;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i + 1;
    while (j < sorted.size() && bits(sorted[j]) == bits(sorted[i])) ++j;
    if (j - i > 1) {
      for (std::size_t k = i; k < j; ++k) out.sum_points += sorted[k];
      out.sum_values += sorted[i];
    }
    i = j;
  }
  return out;
}

ChannelFeatures channel_features(std::span<const double> x) {
  ChannelFeatures f;
  f.fill(kNaN);
  const std::size_t n = x.size();
  if (n == 0) return f;
  const double len = static_cast<double>(n);
  auto set = [&f](Feature feature, double value) { f[index(feature)] = value; };

  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  const double mean = sum / len;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, energy = 0.0;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
    energy += v * v;
  }
  const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *min_it, hi = *max_it;
  const bool constant = lo == hi;
  const double variance = m2 / len;
  const double sd = std::sqrt(variance);

  set(Feature::Mean, mean);
  set(Feature::SumValues, sum);
  set(Feature::Maximum, hi);
  set(Feature::Minimum, lo);
  set(Feature::Variance, variance);
  set(Feature::StandardDeviation, sd);
  set(Feature::VariationCoefficient, mean != 0.0 ? sd / mean : kNaN);

  if (n >= 3 && !constant) {
    const double g1 = (m3 / len) / std::pow(m2 / len, 1.5);
    set(Feature::Skewness, std::sqrt(len * (len - 1.0)) / (len - 2.0) * g1);
  }
  if (n >= 4 && !constant) {
    const double a = (len + 1.0) * len * (len - 1.0) / ((len - 2.0) * (len - 3.0));
    const double b = 3.0 * (len - 1.0) * (len - 1.0) / ((len - 2.0) * (len - 3.0));
    set(Feature::Kurtosis, a * m4 / (m2 * m2) - b);
  }

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  set(Feature::Median, n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]));

  double abs_changes = 0.0;
  for (std::size_t i = 1; i < n; ++i) abs_changes += std::abs(x[i] - x[i - 1]);
  set(Feature::AbsoluteSumOfChanges, abs_changes);
  if (n >= 2) {
    set(Feature::MeanAbsChange, abs_changes / (len - 1.0));
    set(Feature::MeanChange, (x[n - 1] - x[0]) / (len - 1.0));
  }
  if (n >= 3) set(Feature::MeanSecondDerivativeCentral, mean_second_derivative_central(x));

  set(Feature::BenfordCorrelation, benford_correlation(x));

  std::size_t above = 0, below = 0;
  for (double v : x) {
    above += v > mean ? 1 : 0;
    below += v < mean ? 1 : 0;
  }
  set(Feature::CountAboveMean, static_cast<double>(above));
  set(Feature::CountBelowMean, static_cast<double>(below));
  set(Feature::LongestStrikeAboveMean,
      static_cast<double>(longest_run(x, [mean](double v) { return v > mean; })));
  set(Feature::LongestStrikeBelowMean,
      static_cast<double>(longest_run(x, [mean](double v) { return v < mean; })));

  // minmax_element yields the first minimum and the last maximum
  const auto first_min = static_cast<std::size_t>(min_it - x.begin());
  const auto last_max = static_cast<std::size_t>(max_it - x.begin());
  const auto first_max = static_cast<std::size_t>(std::find(x.begin(), x.end(), hi) - x.begin());
  const auto last_min =
      n - 1 - static_cast<std::size_t>(std::find(x.rbegin(), x.rend(), lo) - x.rbegin());
  set(Feature::FirstLocationOfMaximum, static_cast<double>(first_max) / len);
  set(Feature::FirstLocationOfMinimum, static_cast<double>(first_min) / len);
  set(Feature::LastLocationOfMaximum, static_cast<double>(last_max + 1) / len);
  set(Feature::LastLocationOfMinimum, static_cast<double>(last_min + 1) / len);

  std::size_t max_count = 0, min_count = 0;
  for (double v : x) {
    max_count += bits(v) == bits(hi) ? 1 : 0;
    min_count += bits(v) == bits(lo) ? 1 : 0;
  }
  std::vector<std::uint64_t> keys(n);
  std::transform(x.begin(), x.end(), keys.begin(), bits);
  std::sort(keys.begin(), keys.end());
  const bool has_dup = std::adjacent_find(keys.begin(), keys.end()) != keys.end();
  set(Feature::HasDuplicate, has_dup ? 1.0 : 0.0);
  set(Feature::HasDuplicateMax, max_count > 1 ? 1.0 : 0.0);
  set(Feature::HasDuplicateMin, min_count > 1 ? 1.0 : 0.0);

  const auto reoccurring = reoccurring_sums(x);
  set(Feature::SumOfReoccurringDataPoints, reoccurring.sum_points);
  set(Feature::SumOfReoccurringValues, reoccurring.sum_values);

  set(Feature::Energy, energy);
  set(Feature::Power, energy / len);
  set(Feature::Entropy, n >= 2 ? spectral_entropy(x) : kNaN);
  return f;
}

FeatureSet FeatureSet::all() { return FeatureSet{{kAllChannels.begin(), kAllChannels.end()}}; }

std::vector<std::string> FeatureSet::column_names() const {
  std::vector<std::string> names;
  names.reserve(width());
  for (ChannelKind kind : channels) {
    for (std::string_view feature : kFeatureNames) {
      names.push_back(std::string(channel_name(kind)) + "." + std::string(feature));
    }
  }
  return names;
}

FeatureVector extract_features(const Window& w, const FeatureSet& fs) {
  FeatureVector out;
  out.window = {w.trip_id, w.start_ms};
  out.channels = fs.channels;
  out.values.reserve(fs.width());
  for (ChannelKind kind : fs.channels) {
    const auto it = w.values.find(kind);
    if (it == w.values.end())
      fail(ErrorKind::Feature, "window lacks channel " + std::string(channel_name(kind)));
    for (double v : channel_features(it->second)) {
      if (std::isfinite(v)) {
        out.values.push_back(v);
      } else {
        out.values.push_back(0.0);
        ++out.imputed;
      }
    }
  }
  return out;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::vector<std::string> column_names)
    : rows_(rows), names_(std::move(column_names)), data_(rows * names_.size(), 0.0) {}

void FeatureMatrix::append_row(std::span<const double> values) {
  if (values.size() != cols())
    fail(ErrorKind::Assembly, "row width " + std::to_string(values.size()) +
                                  " does not match " + std::to_string(cols()) + " columns");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out(0, names_);
  out.data_.reserve(indices.size() * cols());
  for (std::size_t r : indices) out.append_row(row(r));
  out.imputed_ = imputed_;
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> indices) const {
  std::vector<std::string> names;
  for (std::size_t c : indices) names.push_back(names_.at(c));
  FeatureMatrix out(rows_, std::move(names));
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t j = 0; j < indices.size(); ++j) out(r, j) = (*this)(r, indices[j]);
  }
  out.imputed_ = imputed_;
  return out;
}

FeatureMatrix impute_and_assemble(std::span<const FeatureVector> rows, const FeatureSet& fs) {
  FeatureMatrix m(0, fs.column_names());
  std::size_t tally = 0;
  std::vector<double> buf;
  for (const auto& row : rows) {
    if (row.channels != fs.channels || row.values.size() != fs.width())
      fail(ErrorKind::Assembly, "feature vector built from a different feature set");
    buf.assign(row.values.begin(), row.values.end());
    tally += row.imputed;
    for (double& v : buf) {
      if (!std::isfinite(v)) {
        v = 0.0;
        ++tally;
      }
    }
    m.append_row(buf);
  }
  m.set_imputed(tally);
  return m;
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  Dataset out;
  out.x = x.select_rows(indices);
  out.y.reserve(indices.size());
  for (std::size_t r : indices) out.y.push_back(y.at(r));
  out.class_names = class_names;
  return out;
}

void write_feature_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  for (const auto& name : data.x.column_names()) out << name << ',';
  out << "label\n";
  for (std::size_t r = 0; r < data.x.rows(); ++r) {
    for (double v : data.x.row(r)) out << format_double(v) << ',';
    out << data.class_names.at(static_cast<std::size_t>(data.y.at(r))) << '\n';
  }
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

Dataset read_feature_csv(const std::filesystem::path& path, const Taxonomy& tax) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Data, "empty feature file " + path.string());
  auto header = split(trim(line), ',');
  if (header.size() < 2 || trim(header.back()) != "label")
    fail(ErrorKind::Parse, "feature file must end with a label column: " + path.string());
  std::vector<std::string> names;
  for (std::size_t i = 0; i + 1 < header.size(); ++i) names.emplace_back(trim(header[i]));

  Dataset data;
  data.x = FeatureMatrix(0, names);
  data.class_names = tax.classes;
  std::vector<double> row(names.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != names.size() + 1) fail(ErrorKind::Parse, "wrong field count at " + where);
    for (std::size_t c = 0; c < names.size(); ++c) {
      const auto v = parse_double(fields[c]);
      if (!v) fail(ErrorKind::Parse, "malformed value at " + where);
      row[c] = *v;
    }
    const auto label = tax.index_of(trim(fields.back()));
    if (!label) fail(ErrorKind::Taxonomy, "unknown class at " + where);
    data.x.append_row(row);
    data.y.push_back(*label);
  }
  return data;
}

std::vector<std::size_t> columns_for_channels(const FeatureMatrix& m,
                                              std::span<const ChannelKind> channels) {
  std::vector<std::size_t> cols;
  const auto& names = m.column_names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto dot = names[c].find('.');
    const auto kind = parse_channel_kind(std::string_view(names[c]).substr(0, dot));
    if (kind && std::find(channels.begin(), channels.end(), *kind) != channels.end())
      cols.push_back(c);
  }
  return cols;
}

}  // namespace drivesense

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drivesense/balance.hpp"
#include "drivesense/evaluation.hpp"
#include "drivesense/features.hpp"
#include "drivesense/forest.hpp"
#include "drivesense/ingest.hpp"
#include "drivesense/labeling.hpp"
#include "drivesense/windowing.hpp"

namespace drivesense {

struct TripAudit {
  std::string trip_id;
  std::size_t grid_samples = 0;
  std::size_t masked_samples = 0;
  std::size_t candidate_windows = 0;
  std::size_t dropped_for_gaps = 0;
  std::size_t labeled_windows = 0;
};

struct FeaturizeAudit {
  std::vector<TripAudit> trips;
  std::size_t imputed_values = 0;
};

/// Windows, labels and featurizes every trip; rows follow trip order, then
/// window order.
Dataset build_dataset(std::span<const UniformTrip> trips, std::span<const LabelTrack> tracks,
                      const WindowSpec& window, const FeatureSet& features,
                      FeaturizeAudit* audit = nullptr, unsigned jobs = 1);

std::string audit_to_json(const FeaturizeAudit& audit);

/// Everything one CLI invocation needs. Populated from a flat `key = value`
/// file, then overridden key by key.
struct RunConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> features_path;
  Category category = Category::InsideActivity;
  SamplingSpec sampling;
  WindowSpec window;
  FeatureSet features = FeatureSet::all();
  BalanceSpec balance;
  ModelKind model = ModelKind::Forest;
  std::optional<std::size_t> n_trees;
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_split = 2;
  std::optional<std::size_t> n_candidate_features;
  std::size_t k_folds = 10;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  double holdout_fraction = 0.2;
  std::size_t repeats = 10;
  std::vector<std::vector<ChannelKind>> ablation_groups = default_ablation_groups();
  std::optional<std::size_t> synth_classes;
  std::size_t synth_events_per_class = 20;
  std::size_t synth_trips = 2;
  double synth_separation = 10.0;
  double synth_event_min_s = 4.0;
  double synth_event_max_s = 8.0;

  static std::vector<std::vector<ChannelKind>> default_ablation_groups();

  /// Throws ErrorKind::Config for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  void load_file(const std::filesystem::path& path);

  ForestParams forest_params() const;
  CvSpec cv_spec() const;
  std::filesystem::path feature_file() const;
  std::filesystem::path output(std::string_view stem, std::string_view ext) const;
};

/// Parses "accel_x,hr" or sensor shorthands like "accel"; "all" selects every channel.
std::vector<ChannelKind> parse_channel_list(std::string_view text);
/// Groups separated by ';', e.g. "accel;gyro;hr;ppg;light;noise".
std::vector<std::vector<ChannelKind>> parse_channel_groups(std::string_view text);

void cmd_synth(const RunConfig& config);
void cmd_featurize(const RunConfig& config);
void cmd_cv(const RunConfig& config);
void cmd_importance(const RunConfig& config);
void cmd_ablate(const RunConfig& config);
/// Text summary of the cv report written by cmd_cv.
std::string cmd_report(const RunConfig& config);

}  // namespace drivesense

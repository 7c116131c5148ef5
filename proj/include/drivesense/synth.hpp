#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "drivesense/ingest.hpp"
#include "drivesense/labeling.hpp"

namespace drivesense {

/// value(t) = baseline + amplitude * sin(2 pi f t + phase) + N(0, noise_sd)
struct ChannelProfile {
  double baseline = 0.0;
  double amplitude = 0.0;
  double frequency_hz = 1.0;
  double noise_sd = 1.0;
};

struct ClassProfile {
  std::map<ChannelKind, ChannelProfile> channels;
};

struct SynthSpec {
  Category category = Category::InsideActivity;
  std::vector<ClassProfile> classes;
  double event_min_s = 4.0;
  double event_max_s = 8.0;
  /// Scales between-class baseline differences; 0 makes all classes identical.
  /// Amplitude, frequency and noise differences are scaled by min(separation, 1).
  double separation = 1.0;
  std::size_t n_events_per_class = 20;
  std::size_t n_trips = 1;
  double spacer_s = 1.0;  // unlabeled stretch before each event
  double rate = 10.0;
  std::int64_t start_ms = 1614270000000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthData {
  std::vector<UniformTrip> trips;
  std::vector<LabelTrack> tracks;  // tracks[i] annotates trips[i]
};

SynthData generate(const SynthSpec& spec);

/// Class profiles for the first `n_classes` classes of the category. Class
/// baselines sit one noise SD apart per unit of separation.
SynthSpec default_synth_spec(Category category, std::size_t n_classes,
                             std::span<const ChannelKind> channels, double separation,
                             std::uint64_t seed);

/// Writes `<trip>_<sensor>.csv` for every sensor the trips carry and
/// `<trip>_<Category>.csv` annotations.
void write_synth(const std::filesystem::path& dir, const SynthData& data);

}  // namespace drivesense

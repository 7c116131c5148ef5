#include "drivesense/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "drivesense/error.hpp"
#include "drivesense/util.hpp"

namespace drivesense {

void SynthSpec::validate() const {
  if (classes.empty()) fail(ErrorKind::Config, "synthetic spec needs at least one class");
  if (classes.size() > taxonomy(category).size())
    fail(ErrorKind::Config, "more synthetic classes than the category defines");
  if (!(event_min_s > 0.0) || event_max_s < event_min_s)
    fail(ErrorKind::Config, "invalid event duration range");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    fail(ErrorKind::Config, "separation must be non-negative");
  if (n_events_per_class < 1) fail(ErrorKind::Config, "need at least one event per class");
  if (n_trips < 1) fail(ErrorKind::Config, "need at least one trip");
  if (!(spacer_s >= 0.0)) fail(ErrorKind::Config, "spacer must be non-negative");
  if (!(rate > 0.0)) fail(ErrorKind::Config, "rate must be positive");
  const auto& first = classes.front().channels;
  if (first.empty()) fail(ErrorKind::Config, "class profiles carry no channels");
  for (const auto& c : classes) {
    if (c.channels.size() != first.size() ||
        !std::equal(c.channels.begin(), c.channels.end(), first.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; }))
      fail(ErrorKind::Config, "all class profiles must cover the same channels");
    for (const auto& [kind, p] : c.channels) {
      if (!(p.noise_sd >= 0.0) || !(p.amplitude >= 0.0) || !(p.frequency_hz >= 0.0))
        fail(ErrorKind::Config, "profile parameters must be non-negative");
    }
  }
}

namespace {

using Profiles = std::vector<std::map<ChannelKind, ChannelProfile>>;

// Pulls every class toward the class-average profile.
Profiles effective_profiles(const SynthSpec& spec, ClassProfile* average) {
  const auto n = static_cast<double>(spec.classes.size());
  for (const auto& [kind, unused] : spec.classes.front().channels) {
    ChannelProfile mean{0.0, 0.0, 0.0, 0.0};
    for (const auto& c : spec.classes) {
      const auto& p = c.channels.at(kind);
      mean.baseline += p.baseline / n;
      mean.amplitude += p.amplitude / n;
      mean.frequency_hz += p.frequency_hz / n;
      mean.noise_sd += p.noise_sd / n;
    }
    average->channels[kind] = mean;
  }
  const double shape = std::min(spec.separation, 1.0);
  Profiles out;
  for (const auto& c : spec.classes) {
    auto& eff = out.emplace_back();
    for (const auto& [kind, p] : c.channels) {
      const auto& m = average->channels.at(kind);
      eff[kind] = {m.baseline + spec.separation * (p.baseline - m.baseline),
                   m.amplitude + shape * (p.amplitude - m.amplitude),
                   m.frequency_hz + shape * (p.frequency_hz - m.frequency_hz),
                   m.noise_sd + shape * (p.noise_sd - m.noise_sd)};
    }
  }
  return out;
}

void emit(UniformTrip& trip, const std::map<ChannelKind, ChannelProfile>& profile,
          std::size_t samples, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t first = trip.gap_mask.size();
  for (const auto& [kind, p] : profile) {
    const double phase = phase_dist(rng);
    auto& values = trip.channels[kind];
    for (std::size_t i = 0; i < samples; ++i) {
      const double t = static_cast<double>(first + i) / trip.rate;
      values.push_back(p.baseline + p.amplitude * std::sin(2.0 * std::numbers::pi * p.frequency_hz * t + phase) +
                       p.noise_sd * noise(rng));
    }
  }
  trip.gap_mask.resize(first + samples, false);
}

void add_magnitudes(UniformTrip& trip) {
  const std::array<std::array<ChannelKind, 4>, 2> triples = {{
      {ChannelKind::AccelX, ChannelKind::AccelY, ChannelKind::AccelZ, ChannelKind::AccelMag},
      {ChannelKind::GyroX, ChannelKind::GyroY, ChannelKind::GyroZ, ChannelKind::GyroMag},
  }};
  for (const auto& t : triples) {
    if (!trip.channels.contains(t[0]) || !trip.channels.contains(t[1]) || !trip.channels.contains(t[2]))
      continue;
    const auto& x = trip.channels.at(t[0]);
    const auto& y = trip.channels.at(t[1]);
    const auto& z = trip.channels.at(t[2]);
    std::vector<double> mag(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mag[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
    trip.channels[t[3]] = std::move(mag);
  }
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  ClassProfile average;
  const auto profiles = effective_profiles(spec, &average);
  // derived magnitudes come from the axes whenever all three are generated
  auto strip_derived = [](std::map<ChannelKind, ChannelProfile> p) {
    const bool accel = p.contains(ChannelKind::AccelX) && p.contains(ChannelKind::AccelY) && p.contains(ChannelKind::AccelZ);
    const bool gyro = p.contains(ChannelKind::GyroX) && p.contains(ChannelKind::GyroY) && p.contains(ChannelKind::GyroZ);
    if (accel) p.erase(ChannelKind::AccelMag);
    if (gyro) p.erase(ChannelKind::GyroMag);
    return p;
  };

  std::mt19937_64 order_rng(mix_seed(spec.seed, 0xe7e));
  std::vector<int> events;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    for (std::size_t e = 0; e < spec.n_events_per_class; ++e) events.push_back(static_cast<int>(c));
  }
  std::shuffle(events.begin(), events.end(), order_rng);

  SynthData data;
  const auto spacer = static_cast<std::size_t>(std::llround(spec.spacer_s * spec.rate));
  const auto min_len = static_cast<std::size_t>(std::llround(spec.event_min_s * spec.rate));
  const auto max_len = static_cast<std::size_t>(std::llround(spec.event_max_s * spec.rate));
  for (std::size_t t = 0; t < spec.n_trips; ++t) {
    std::mt19937_64 rng(mix_seed(spec.seed, t, 0x7a1b));
    std::uniform_int_distribution<std::size_t> length(std::max<std::size_t>(min_len, 1), std::max<std::size_t>(max_len, 1));
    UniformTrip trip;
    trip.trip_id = "trip" + std::string(t < 9 ? "0" : "") + std::to_string(t + 1);
    trip.start_ms = spec.start_ms;
    trip.rate = spec.rate;
    std::vector<LabelInterval> intervals;
    for (std::size_t e = t; e < events.size(); e += spec.n_trips) {
      const int cls = events[e];
      emit(trip, strip_derived(average.channels), spacer, rng);
      const std::size_t begin = trip.size();
      emit(trip, strip_derived(profiles[static_cast<std::size_t>(cls)]), length(rng), rng);
      intervals.push_back({std::llround(trip.time_ms(begin)), std::llround(trip.time_ms(trip.size())), cls});
    }
    emit(trip, strip_derived(average.channels), spacer, rng);
    add_magnitudes(trip);
    data.tracks.push_back(make_track(spec.category, std::move(intervals)));
    data.trips.push_back(std::move(trip));
  }
  return data;
}

SynthSpec default_synth_spec(Category category, std::size_t n_classes,
                             std::span<const ChannelKind> channels, double separation,
                             std::uint64_t seed) {
  const auto available = taxonomy(category).size();
  if (n_classes < 1 || n_classes > available)
    fail(ErrorKind::Config, std::string(category_name(category)) + " has " + std::to_string(available) +
                                " classes, asked for " + std::to_string(n_classes));
  SynthSpec spec;
  spec.category = category;
  spec.separation = separation;
  spec.seed = seed;
  auto base = [](ChannelKind kind) -> ChannelProfile {
    switch (kind) {
      case ChannelKind::AccelX: return {0.5, 0.8, 1.2, 0.3};
      case ChannelKind::AccelY: return {-0.3, 0.6, 0.9, 0.3};
      case ChannelKind::AccelZ: return {9.6, 0.5, 0.7, 0.3};
      case ChannelKind::GyroX:
      case ChannelKind::GyroY:
      case ChannelKind::GyroZ: return {0.0, 0.4, 1.5, 0.1};
      case ChannelKind::AccelMag: return {9.8, 0.5, 1.0, 0.3};
      case ChannelKind::GyroMag: return {0.5, 0.3, 1.5, 0.1};
      case ChannelKind::PPG: return {2000.0, 150.0, 1.2, 20.0};
      case ChannelKind::HR: return {75.0, 1.0, 0.1, 1.5};
      case ChannelKind::Light: return {300.0, 5.0, 0.05, 10.0};
      case ChannelKind::Noise: return {50.0, 2.0, 0.2, 2.0};
    }
    return {};
  };
  const double n = static_cast<double>(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    const double centered = static_cast<double>(c) - (n - 1.0) / 2.0;
    const double frac = n > 1 ? static_cast<double>(c) / (n - 1.0) : 0.0;
    ClassProfile profile;
    for (ChannelKind kind : channels) {
      auto p = base(kind);
      p.baseline += centered * p.noise_sd;
      p.amplitude *= 1.0 + 0.5 * frac;
      p.frequency_hz *= 1.0 + 0.4 * frac;
      profile.channels[kind] = p;
    }
    spec.classes.push_back(std::move(profile));
  }
  return spec;
}

void write_synth(const std::filesystem::path& dir, const SynthData& data) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + dir.string());
  for (std::size_t t = 0; t < data.trips.size(); ++t) {
    const auto& trip = data.trips[t];
    for (Sensor sensor : kAllSensors) {
      const auto kinds = sensor_channels(sensor);
      const bool has_all = std::all_of(kinds.begin(), kinds.end(),
                                       [&](ChannelKind k) { return trip.channels.contains(k); });
      if (!has_all) continue;
      write_sensor_csv(dir / (trip.trip_id + "_" + std::string(sensor_name(sensor)) + ".csv"), trip, sensor);
    }
    write_annotations(dir / (trip.trip_id + "_" + std::string(category_name(data.tracks[t].category)) + ".csv"),
                      data.tracks[t]);
  }
}

}  // namespace drivesense

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "drivesense/ingest.hpp"

namespace drivesense {

struct WindowSpec {
  double length_s = 1.0;
  double overlap_fraction = 0.5;

  /// Samples per window at `rate`; throws unless length * rate is an integer >= 2.
  std::size_t samples(double rate) const;
  /// Round-half-up of samples * (1 - overlap); throws if that rounds to zero.
  std::size_t stride(double rate) const;
};

struct Window {
  std::string trip_id;
  double start_ms = 0.0;
  double rate = 10.0;
  std::size_t offset = 0;  // first sample index within the trip
  std::map<ChannelKind, std::vector<double>> values;

  std::size_t length() const noexcept {
    return values.empty() ? 0 : values.begin()->second.size();
  }
  double end_ms() const noexcept {
    return start_ms + static_cast<double>(length()) * 1000.0 / rate;
  }
  double midpoint_ms() const noexcept { return 0.5 * (start_ms + end_ms()); }
};

struct SliceStats {
  std::size_t candidates = 0;
  std::size_t dropped_for_gaps = 0;
};

/// Complete windows at offsets 0, S, 2S, ...; any window touching a
/// gap-masked sample is dropped.
std::vector<Window> slice_windows(const UniformTrip& trip, const WindowSpec& spec,
                                  SliceStats* stats = nullptr);

}  // namespace drivesense

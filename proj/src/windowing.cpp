#include "drivesense/windowing.hpp"

#include <cmath>

#include "drivesense/error.hpp"

namespace drivesense {

std::size_t WindowSpec::samples(double rate) const {
  if (!(length_s > 0.0)) fail(ErrorKind::Config, "window length must be positive");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
    fail(ErrorKind::Config, "window overlap must lie in [0, 1)");
  const double exact = length_s * rate;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact) || rounded < 2.0)
    fail(ErrorKind::Config, "window length times rate must be an integer >= 2");
  return static_cast<std::size_t>(rounded);
}

std::size_t WindowSpec::stride(double rate) const {
  const double raw = static_cast<double>(samples(rate)) * (1.0 - overlap_fraction);
  const auto s = static_cast<std::size_t>(std::floor(raw + 0.5));
  if (s < 1) fail(ErrorKind::Config, "window overlap leaves a zero stride");
  return s;
}

std::vector<Window> slice_windows(const UniformTrip& trip, const WindowSpec& spec,
                                  SliceStats* stats) {
  const std::size_t len = spec.samples(trip.rate);
  const std::size_t step = spec.stride(trip.rate);
  const std::size_t n = trip.size();
  std::vector<Window> out;
  if (n < len) return out;

  // prefix count of masked samples gives O(1) gap checks per window
  std::vector<std::size_t> masked(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) masked[i + 1] = masked[i] + (trip.gap_mask[i] ? 1 : 0);

  SliceStats local;
  for (std::size_t off = 0; off + len <= n; off += step) {
    ++local.candidates;
    if (masked[off + len] != masked[off]) {
      ++local.dropped_for_gaps;
      continue;
    }
    Window w;
    w.trip_id = trip.trip_id;
    w.start_ms = trip.time_ms(off);
    w.rate = trip.rate;
    w.offset = off;
    for (const auto& [kind, values] : trip.channels) {
      const auto first = values.begin() + static_cast<std::ptrdiff_t>(off);
      w.values.emplace(kind, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(len)));
    }
    out.push_back(std::move(w));
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace drivesense

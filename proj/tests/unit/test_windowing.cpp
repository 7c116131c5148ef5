#include <doctest.h>

#include "../support/gen.hpp"
#include "drivesense/error.hpp"
#include "drivesense/windowing.hpp"

using namespace drivesense;

namespace {

UniformTrip ramp_trip(std::size_t n, double rate = 10.0) {
  UniformTrip trip;
  trip.trip_id = "t";
  trip.rate = rate;
  auto& v = trip.channels[ChannelKind::HR];
  for (std::size_t i = 0; i < n; ++i) v.push_back(static_cast<double>(i));
  trip.gap_mask.assign(n, false);
  return trip;
}

}  // namespace

TEST_CASE("window and stride sizes") {
  const WindowSpec spec;
  CHECK(spec.samples(10) == 10);
  CHECK(spec.stride(10) == 5);
  WindowSpec odd{0.5, 0.5};
  CHECK(odd.samples(10) == 5);
  CHECK(odd.stride(10) == 3);  // 2.5 rounds half up
  const WindowSpec too_short{0.05, 0.5}, fractional{0.25, 0.5};
  CHECK_THROWS_AS(too_short.samples(10), Error);
  CHECK_THROWS_AS(fractional.samples(10), Error);
  const WindowSpec no_stride{0.2, 0.9};  // 2 samples, 0.2 rounds to a zero stride
  CHECK_THROWS_AS(no_stride.stride(10), Error);
}

TEST_CASE("25 samples, L=10, S=5 give windows at 0, 5, 10, 15") {
  const auto windows = slice_windows(ramp_trip(25), WindowSpec{});
  REQUIRE(windows.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(windows[i].offset == 5 * i);
  CHECK(windows[1].start_ms == doctest::Approx(500));
}

TEST_CASE("exact fit gives one window, short trip none") {
  CHECK(slice_windows(ramp_trip(10), WindowSpec{}).size() == 1);
  CHECK(slice_windows(ramp_trip(9), WindowSpec{}).empty());
}

TEST_CASE("windows touching a masked sample are dropped") {
  auto trip = ramp_trip(25);
  trip.gap_mask[7] = true;
  SliceStats stats;
  const auto windows = slice_windows(trip, WindowSpec{}, &stats);
  CHECK(stats.candidates == 4);
  CHECK(stats.dropped_for_gaps == 2);
  for (const auto& w : windows) CHECK_FALSE((w.offset <= 7 && 7 < w.offset + 10));
}

TEST_CASE("property: overlap, mask exclusion and count formula") {
  gen::Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen::index(rng, 0, 120);
    const double rate = static_cast<double>(gen::index(rng, 2, 20));
    WindowSpec spec{static_cast<double>(gen::index(rng, 1, 3)), gen::uniform(rng, 0.0, 0.5)};
    auto trip = ramp_trip(n, rate);
    const std::size_t L = spec.samples(rate), S = spec.stride(rate);

    const auto clean = slice_windows(trip, spec);
    CHECK(clean.size() == (n >= L ? (n - L) / S + 1 : 0));
    for (std::size_t i = 0; i + 1 < clean.size(); ++i) {
      const auto& a = clean[i].values.at(ChannelKind::HR);
      const auto& b = clean[i + 1].values.at(ChannelKind::HR);
      std::size_t shared = 0;
      for (double v : a) shared += std::find(b.begin(), b.end(), v) != b.end();
      CHECK(shared == (L > S ? L - S : 0));
    }

    for (std::size_t i = 0; i < n; ++i) trip.gap_mask[i] = gen::index(rng, 0, 30) == 0;
    for (const auto& w : slice_windows(trip, spec)) {
      for (std::size_t i = w.offset; i < w.offset + w.length(); ++i) CHECK_FALSE(trip.gap_mask[i]);
    }
  }
}

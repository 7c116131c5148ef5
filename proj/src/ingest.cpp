#include "drivesense/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "drivesense/error.hpp"
#include "drivesense/util.hpp"

namespace drivesense {

double native_rate(ChannelKind kind) noexcept {
  switch (kind) {
    case ChannelKind::HR: return 1.0;
    case ChannelKind::Light:
    case ChannelKind::Noise: return 1.0 / 60.0;
    default: return 10.0;
  }
}

Interpolation interpolation(ChannelKind kind) noexcept {
  return kind == ChannelKind::Light || kind == ChannelKind::Noise ? Interpolation::HoldPrevious
                                                                  : Interpolation::Linear;
}

bool is_derived(ChannelKind kind) noexcept {
  return kind == ChannelKind::AccelMag || kind == ChannelKind::GyroMag;
}

Sensor sensor_of(ChannelKind kind) noexcept {
  switch (kind) {
    case ChannelKind::AccelX:
    case ChannelKind::AccelY:
    case ChannelKind::AccelZ:
    case ChannelKind::AccelMag: return Sensor::Accel;
    case ChannelKind::GyroX:
    case ChannelKind::GyroY:
    case ChannelKind::GyroZ:
    case ChannelKind::GyroMag: return Sensor::Gyro;
    case ChannelKind::PPG: return Sensor::PPG;
    case ChannelKind::HR: return Sensor::HR;
    case ChannelKind::Light: return Sensor::Light;
    case ChannelKind::Noise: return Sensor::Noise;
  }
  return Sensor::HR;
}

std::string_view channel_name(ChannelKind kind) noexcept {
  switch (kind) {
    case ChannelKind::AccelX: return "accel_x";
    case ChannelKind::AccelY: return "accel_y";
    case ChannelKind::AccelZ: return "accel_z";
    case ChannelKind::GyroX: return "gyro_x";
    case ChannelKind::GyroY: return "gyro_y";
    case ChannelKind::GyroZ: return "gyro_z";
    case ChannelKind::AccelMag: return "accel_mag";
    case ChannelKind::GyroMag: return "gyro_mag";
    case ChannelKind::PPG: return "ppg";
    case ChannelKind::HR: return "hr";
    case ChannelKind::Light: return "light";
    case ChannelKind::Noise: return "noise";
  }
  return "?";
}

std::optional<ChannelKind> parse_channel_kind(std::string_view name) noexcept {
  for (ChannelKind kind : kAllChannels) {
    if (channel_name(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view sensor_name(Sensor sensor) noexcept {
  switch (sensor) {
    case Sensor::Accel: return "accel";
    case Sensor::Gyro: return "gyro";
    case Sensor::PPG: return "ppg";
    case Sensor::HR: return "hr";
    case Sensor::Light: return "light";
    case Sensor::Noise: return "noise";
  }
  return "?";
}

std::optional<Sensor> parse_sensor(std::string_view name) noexcept {
  for (Sensor sensor : kAllSensors) {
    if (sensor_name(sensor) == name) return sensor;
  }
  return std::nullopt;
}

std::vector<ChannelKind> sensor_channels(Sensor sensor) {
  switch (sensor) {
    case Sensor::Accel: return {ChannelKind::AccelX, ChannelKind::AccelY, ChannelKind::AccelZ};
    case Sensor::Gyro: return {ChannelKind::GyroX, ChannelKind::GyroY, ChannelKind::GyroZ};
    case Sensor::PPG: return {ChannelKind::PPG};
    case Sensor::HR: return {ChannelKind::HR};
    case Sensor::Light: return {ChannelKind::Light};
    case Sensor::Noise: return {ChannelKind::Noise};
  }
  return {};
}

void SamplingSpec::validate() const {
  if (!(target_rate > 0.0) || !std::isfinite(target_rate))
    fail(ErrorKind::Config, "target rate must be positive");
  if (!(max_gap_s > 0.0) || !std::isfinite(max_gap_s))
    fail(ErrorKind::Config, "max gap must be positive");
}

namespace {

std::string at_line(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

bool any_numeric(const std::vector<std::string_view>& fields) {
  return std::any_of(fields.begin(), fields.end(),
                     [](std::string_view f) { return parse_double(f).has_value(); });
}

}  // namespace

std::vector<RawChannel> parse_channel_log(std::istream& in, Sensor sensor,
                                          std::string_view source) {
  const auto kinds = sensor_channels(sensor);
  std::vector<RawChannel> out(kinds.size());
  for (std::size_t c = 0; c < kinds.size(); ++c) out[c].kind = kinds[c];
  const std::size_t expected_fields = kinds.size() + 1;

  std::string line;
  std::size_t line_no = 0;
  bool seen_first = false;
  std::vector<double> values(kinds.size());
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    auto fields = split(text, ',');
    if (!seen_first) {
      seen_first = true;
      if (!any_numeric(fields)) continue;  // header
    }
    if (fields.size() != expected_fields) {
      fail(ErrorKind::Parse, "malformed record at " + at_line(source, line_no) + ": expected " +
                                 std::to_string(expected_fields) + " fields");
    }
    const auto t = parse_int(fields[0]);
    if (!t) fail(ErrorKind::Parse, "malformed timestamp at " + at_line(source, line_no));
    for (std::size_t c = 0; c < kinds.size(); ++c) {
      const auto v = parse_double(fields[c + 1]);
      if (!v) fail(ErrorKind::Parse, "malformed value at " + at_line(source, line_no));
      if (!std::isfinite(*v)) fail(ErrorKind::Data, "non-finite value at " + at_line(source, line_no));
      values[c] = *v;
    }
    auto& first = out.front().samples;
    if (!first.empty() && first.back().t_ms == *t) {
      for (std::size_t c = 0; c < kinds.size(); ++c) out[c].samples.back().value = values[c];
      continue;
    }
    if (!first.empty() && first.back().t_ms > *t) {
      fail(ErrorKind::Data, "non-monotonic timestamp at " + at_line(source, line_no));
    }
    for (std::size_t c = 0; c < kinds.size(); ++c) out[c].samples.push_back({*t, values[c]});
  }
  if (out.front().samples.empty()) fail(ErrorKind::Data, "no samples in " + std::string(source));
  return out;
}

std::vector<RawChannel> parse_channel_log(const std::filesystem::path& path, Sensor sensor) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return parse_channel_log(in, sensor, path.string());
}

RawChannel derive_magnitude(const RawChannel& x, const RawChannel& y, const RawChannel& z) {
  const std::size_t n = x.samples.size();
  if (y.samples.size() != n || z.samples.size() != n)
    fail(ErrorKind::Data, "magnitude inputs differ in length");
  RawChannel out;
  out.kind = sensor_of(x.kind) == Sensor::Gyro ? ChannelKind::GyroMag : ChannelKind::AccelMag;
  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = x.samples[i].t_ms;
    if (y.samples[i].t_ms != t || z.samples[i].t_ms != t)
      fail(ErrorKind::Data, "magnitude inputs have mismatched timestamps");
    const double a = x.samples[i].value, b = y.samples[i].value, c = z.samples[i].value;
    out.samples.push_back({t, std::sqrt(a * a + b * b + c * c)});
  }
  return out;
}

double effective_max_gap_ms(ChannelKind kind, const SamplingSpec& spec) noexcept {
  return 1000.0 * std::max(spec.max_gap_s, 2.0 / native_rate(kind));
}

UniformTrip align_and_resample(std::span<const RawChannel> channels, const SamplingSpec& spec,
                               std::string trip_id) {
  spec.validate();
  if (channels.empty()) fail(ErrorKind::Alignment, "no channels to align");
  std::int64_t start = std::numeric_limits<std::int64_t>::min();
  std::int64_t end = std::numeric_limits<std::int64_t>::max();
  for (const auto& ch : channels) {
    if (ch.samples.empty())
      fail(ErrorKind::Alignment, "channel " + std::string(channel_name(ch.kind)) + " is empty");
    start = std::max(start, ch.samples.front().t_ms);
    end = std::min(end, ch.samples.back().t_ms);
  }
  if (end < start) fail(ErrorKind::Alignment, "channels do not overlap in time");

  const double span_ms = static_cast<double>(end - start);
  auto n = static_cast<std::size_t>(std::floor(span_ms * spec.target_rate / 1000.0 + 1e-9)) + 1;

  UniformTrip trip;
  trip.trip_id = std::move(trip_id);
  trip.start_ms = start;
  trip.rate = spec.target_rate;
  trip.gap_mask.assign(n, false);
  while (n > 1 && trip.time_ms(n - 1) > static_cast<double>(end)) --n;
  trip.gap_mask.resize(n);

  for (const auto& ch : channels) {
    const auto& s = ch.samples;
    const bool hold = interpolation(ch.kind) == Interpolation::HoldPrevious;
    const double max_gap = effective_max_gap_ms(ch.kind, spec);
    std::vector<double> values(n);
    std::size_t lo = 0;  // last sample with t <= grid time
    for (std::size_t i = 0; i < n; ++i) {
      const double t = trip.time_ms(i);
      while (lo + 1 < s.size() && static_cast<double>(s[lo + 1].t_ms) <= t) ++lo;
      const double t0 = static_cast<double>(s[lo].t_ms);
      if (t0 == t || lo + 1 == s.size()) {
        values[i] = s[lo].value;
        continue;
      }
      const double t1 = static_cast<double>(s[lo + 1].t_ms);
      if (t1 - t0 > max_gap) trip.gap_mask[i] = true;
      if (hold) {
        values[i] = s[lo].value;
      } else {
        const double v0 = s[lo].value, v1 = s[lo + 1].value;
        const double f = (t - t0) / (t1 - t0);
        values[i] = std::clamp(v0 + (v1 - v0) * f, std::min(v0, v1), std::max(v0, v1));
      }
    }
    trip.channels[ch.kind] = std::move(values);
  }
  return trip;
}

UniformTrip load_trip(const std::filesystem::path& dir, const std::string& trip_id,
                      std::span<const ChannelKind> wanted, const SamplingSpec& spec) {
  std::vector<Sensor> sensors;
  for (ChannelKind kind : wanted) {
    const Sensor s = sensor_of(kind);
    if (std::find(sensors.begin(), sensors.end(), s) == sensors.end()) sensors.push_back(s);
  }
  std::vector<RawChannel> raw;
  for (Sensor sensor : sensors) {
    const auto path = dir / (trip_id + "_" + std::string(sensor_name(sensor)) + ".csv");
    if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "missing sensor file " + path.string());
    auto parsed = parse_channel_log(path, sensor);
    if (parsed.size() == 3) {
      const auto mag = derive_magnitude(parsed[0], parsed[1], parsed[2]);
      parsed.push_back(mag);
    }
    for (auto& ch : parsed) {
      if (std::find(wanted.begin(), wanted.end(), ch.kind) != wanted.end())
        raw.push_back(std::move(ch));
    }
  }
  return align_and_resample(raw, spec, trip_id);
}

void write_sensor_csv(const std::filesystem::path& path, const UniformTrip& trip, Sensor sensor) {
  const auto kinds = sensor_channels(sensor);
  std::vector<const std::vector<double>*> cols;
  for (ChannelKind kind : kinds) {
    const auto it = trip.channels.find(kind);
    if (it == trip.channels.end())
      fail(ErrorKind::Data, "trip lacks channel " + std::string(channel_name(kind)));
    cols.push_back(&it->second);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << "timestamp_ms";
  if (kinds.size() == 1) {
    out << ",value\n";
  } else {
    out << ",x,y,z\n";
  }
  for (std::size_t i = 0; i < trip.size(); ++i) {
    out << std::llround(trip.time_ms(i));
    for (const auto* col : cols) out << ',' << format_double((*col)[i]);
    out << '\n';
  }
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

}  // namespace drivesense

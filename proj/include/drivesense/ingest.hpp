#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drivesense {

enum class ChannelKind {
  AccelX,
  AccelY,
  AccelZ,
  GyroX,
  GyroY,
  GyroZ,
  AccelMag,
  GyroMag,
  PPG,
  HR,
  Light,
  Noise,
};

enum class Interpolation { Linear, HoldPrevious };

/// One file per sensor per trip. Accel and gyro files are tri-axial.
enum class Sensor { Accel, Gyro, PPG, HR, Light, Noise };

inline constexpr std::array<ChannelKind, 12> kAllChannels = {
    ChannelKind::AccelX, ChannelKind::AccelY, ChannelKind::AccelZ, ChannelKind::AccelMag,
    ChannelKind::GyroX,  ChannelKind::GyroY,  ChannelKind::GyroZ,  ChannelKind::GyroMag,
    ChannelKind::PPG,    ChannelKind::HR,     ChannelKind::Light,  ChannelKind::Noise,
};

inline constexpr std::array<Sensor, 6> kAllSensors = {
    Sensor::Accel, Sensor::Gyro, Sensor::PPG, Sensor::HR, Sensor::Light, Sensor::Noise,
};

/// Nominal rate of the smartwatch stream the channel comes from, in Hz.
double native_rate(ChannelKind kind) noexcept;
Interpolation interpolation(ChannelKind kind) noexcept;
bool is_derived(ChannelKind kind) noexcept;
Sensor sensor_of(ChannelKind kind) noexcept;

/// Lower-case identifiers used in column names and config files ("accel_x", "hr").
std::string_view channel_name(ChannelKind kind) noexcept;
std::optional<ChannelKind> parse_channel_kind(std::string_view name) noexcept;

/// File-name token ("accel", "ppg").
std::string_view sensor_name(Sensor sensor) noexcept;
std::optional<Sensor> parse_sensor(std::string_view name) noexcept;
/// Raw channels stored in one sensor file, in column order.
std::vector<ChannelKind> sensor_channels(Sensor sensor);

struct Sample {
  std::int64_t t_ms = 0;
  double value = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct RawChannel {
  ChannelKind kind = ChannelKind::HR;
  std::vector<Sample> samples;
};

struct SamplingSpec {
  double target_rate = 10.0;
  double max_gap_s = 5.0;

  void validate() const;
};

struct UniformTrip {
  std::string trip_id;
  std::int64_t start_ms = 0;
  double rate = 10.0;
  std::map<ChannelKind, std::vector<double>> channels;
  std::vector<bool> gap_mask;

  std::size_t size() const noexcept { return gap_mask.size(); }
  double time_ms(std::size_t i) const noexcept {
    return static_cast<double>(start_ms) + static_cast<double>(i) * 1000.0 / rate;
  }
};

/// Parses `timestamp_ms,value` (or `timestamp_ms,x,y,z` for tri-axial sensors).
/// An optional header line is recognized when none of its fields is numeric.
/// `source` names the input in error messages.
std::vector<RawChannel> parse_channel_log(std::istream& in, Sensor sensor,
                                          std::string_view source = "<stream>");
std::vector<RawChannel> parse_channel_log(const std::filesystem::path& path, Sensor sensor);

RawChannel derive_magnitude(const RawChannel& x, const RawChannel& y, const RawChannel& z);

/// Largest gap between bracketing source samples that is still interpolated
/// without masking. Sparse channels are never masked below two native periods.
double effective_max_gap_ms(ChannelKind kind, const SamplingSpec& spec) noexcept;

UniformTrip align_and_resample(std::span<const RawChannel> channels, const SamplingSpec& spec,
                               std::string trip_id = {});

/// Loads every sensor file `<trip_id>_<sensor>.csv` needed for `wanted`,
/// derives magnitudes and resamples. Missing files raise an I/O error.
UniformTrip load_trip(const std::filesystem::path& dir, const std::string& trip_id,
                      std::span<const ChannelKind> wanted, const SamplingSpec& spec);

/// Writes the sensor file for `sensor` from an already uniform trip.
void write_sensor_csv(const std::filesystem::path& path, const UniformTrip& trip, Sensor sensor);

}  // namespace drivesense

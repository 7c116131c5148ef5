#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drivesense {

/// SplitMix64 finalizer. Used to derive independent per-tree, per-fold and
/// per-class seeds from one user seed before any parallel dispatch.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// FNV-1a over bytes; stable across platforms.
std::uint64_t stable_hash(std::string_view text) noexcept;

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must not depend
/// on scheduling; callers write into pre-sized slots. The first exception thrown
/// by any task is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

/// Shortest text that parses back to the same double (17 significant digits).
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text) noexcept;
std::optional<std::int64_t> parse_int(std::string_view text) noexcept;

std::string_view trim(std::string_view text) noexcept;
std::vector<std::string_view> split(std::string_view text, char sep);

}  // namespace drivesense

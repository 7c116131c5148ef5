#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drivesense {

struct Window;

enum class Category { InsideActivity, OutsideEvent, RoadType };

std::string_view category_name(Category category) noexcept;
std::optional<Category> parse_category(std::string_view name) noexcept;

struct Taxonomy {
  Category category = Category::InsideActivity;
  std::vector<std::string> classes;

  std::optional<int> index_of(std::string_view class_name) const noexcept;
  std::size_t size() const noexcept { return classes.size(); }
};

/// Class lists of the three annotation categories, in the order the labels
/// are indexed everywhere downstream.
const Taxonomy& taxonomy(Category category);

/// Half-open interval [start_ms, end_ms).
struct LabelInterval {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  int class_index = 0;
};

struct LabelTrack {
  Category category = Category::InsideActivity;
  std::vector<LabelInterval> intervals;  // sorted by start, non-overlapping

  /// Class of the interval containing t, if any.
  std::optional<int> label_at(double t_ms) const noexcept;
};

/// Sorts and validates intervals; throws on overlap or an empty interval.
LabelTrack make_track(Category category, std::vector<LabelInterval> intervals);

LabelTrack load_annotations(std::istream& in, const Taxonomy& taxonomy,
                            std::string_view source = "<stream>");
LabelTrack load_annotations(const std::filesystem::path& path, const Taxonomy& taxonomy);
void write_annotations(const std::filesystem::path& path, const LabelTrack& track);

struct LabeledWindowSet {
  Category category = Category::InsideActivity;
  std::vector<std::size_t> window_indices;  // into the labeled window list
  std::vector<int> labels;
};

/// A window takes the label of the interval containing its midpoint; windows
/// with an unlabeled midpoint are left out.
LabeledWindowSet label_windows(std::span<const Window> windows, const LabelTrack& track);

}  // namespace drivesense

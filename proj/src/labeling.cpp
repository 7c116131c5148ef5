#include "drivesense/labeling.hpp"

#include <algorithm>
#include <fstream>

#include "drivesense/error.hpp"
#include "drivesense/util.hpp"
#include "drivesense/windowing.hpp"

namespace drivesense {

std::string_view category_name(Category category) noexcept {
  switch (category) {
    case Category::InsideActivity: return "InsideActivity";
    case Category::OutsideEvent: return "OutsideEvent";
    case Category::RoadType: return "RoadType";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) noexcept {
  for (Category c : {Category::InsideActivity, Category::OutsideEvent, Category::RoadType}) {
    if (category_name(c) == name) return c;
  }
  return std::nullopt;
}

std::optional<int> Taxonomy::index_of(std::string_view class_name) const noexcept {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == class_name) return static_cast<int>(i);
  }
  return std::nullopt;
}

const Taxonomy& taxonomy(Category category) {
  static const Taxonomy inside{Category::InsideActivity,
                               {"Checking Sides", "Eating/Drinking", "Working with Center Stack",
                                "Checking Speed Stack", "Touching Face", "Working with Phone",
                                "Singing and Dancing", "Searching for an Item"}};
  static const Taxonomy outside{
      Category::OutsideEvent,
      {"Change Lane", "Passing an Intersection", "Traffic Light", "Stuck in Traffic"}};
  static const Taxonomy road{
      Category::RoadType,
      {"City Street", "Parking Lot", "Merging Ramp", "2L - Highway", "3L - Highway"}};
  switch (category) {
    case Category::InsideActivity: return inside;
    case Category::OutsideEvent: return outside;
    case Category::RoadType: return road;
  }
  return inside;
}

std::optional<int> LabelTrack::label_at(double t_ms) const noexcept {
  // first interval starting after t; its predecessor is the only candidate
  auto it = std::upper_bound(intervals.begin(), intervals.end(), t_ms,
                             [](double t, const LabelInterval& iv) {
                               return t < static_cast<double>(iv.start_ms);
                             });
  if (it == intervals.begin()) return std::nullopt;
  --it;
  if (t_ms < static_cast<double>(it->end_ms)) return it->class_index;
  return std::nullopt;
}

LabelTrack make_track(Category category, std::vector<LabelInterval> intervals) {
  for (const auto& iv : intervals) {
    if (iv.start_ms >= iv.end_ms)
      fail(ErrorKind::Annotation, "interval [" + std::to_string(iv.start_ms) + ", " +
                                      std::to_string(iv.end_ms) + ") is empty");
  }
  std::stable_sort(intervals.begin(), intervals.end(),
                   [](const auto& a, const auto& b) { return a.start_ms < b.start_ms; });
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    if (intervals[i].start_ms < intervals[i - 1].end_ms)
      fail(ErrorKind::Annotation,
           "intervals starting at " + std::to_string(intervals[i - 1].start_ms) + " and " +
               std::to_string(intervals[i].start_ms) + " overlap");
  }
  return LabelTrack{category, std::move(intervals)};
}

LabelTrack load_annotations(std::istream& in, const Taxonomy& tax, std::string_view source) {
  std::vector<LabelInterval> intervals;
  std::string line;
  std::size_t line_no = 0;
  bool seen_first = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    const bool first = !seen_first;
    seen_first = true;
    if (fields.size() != 3) fail(ErrorKind::Parse, "expected start_ms,end_ms,class at " + where);
    const auto start = parse_int(fields[0]);
    const auto end = parse_int(fields[1]);
    if (!start || !end) {
      if (first && !parse_double(fields[0]) && !parse_double(fields[1])) continue;  // header
      fail(ErrorKind::Parse, "malformed interval bounds at " + where);
    }
    const auto name = trim(fields[2]);
    const auto index = tax.index_of(name);
    if (!index)
      fail(ErrorKind::Taxonomy, "unknown class '" + std::string(name) + "' for " +
                                    std::string(category_name(tax.category)) + " at " + where);
    intervals.push_back({*start, *end, *index});
  }
  return make_track(tax.category, std::move(intervals));
}

LabelTrack load_annotations(const std::filesystem::path& path, const Taxonomy& tax) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return load_annotations(in, tax, path.string());
}

void write_annotations(const std::filesystem::path& path, const LabelTrack& track) {
  const auto& tax = taxonomy(track.category);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << "start_ms,end_ms,class_name\n";
  for (const auto& iv : track.intervals) {
    out << iv.start_ms << ',' << iv.end_ms << ',' << tax.classes.at(static_cast<std::size_t>(iv.class_index))
        << '\n';
  }
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

LabeledWindowSet label_windows(std::span<const Window> windows, const LabelTrack& track) {
  LabeledWindowSet out;
  out.category = track.category;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (const auto label = track.label_at(windows[i].midpoint_ms())) {
      out.window_indices.push_back(i);
      out.labels.push_back(*label);
    }
  }
  return out;
}

}  // namespace drivesense

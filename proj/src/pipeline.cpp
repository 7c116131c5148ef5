#include "drivesense/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "drivesense/error.hpp"
#include "drivesense/synth.hpp"
#include "drivesense/util.hpp"

namespace drivesense {

using nlohmann::ordered_json;

Dataset build_dataset(std::span<const UniformTrip> trips, std::span<const LabelTrack> tracks,
                      const WindowSpec& window, const FeatureSet& features,
                      FeaturizeAudit* audit, unsigned jobs) {
  if (trips.size() != tracks.size()) fail(ErrorKind::InvalidArgument, "one label track per trip");
  FeaturizeAudit local;
  std::vector<FeatureVector> rows;
  Dataset data;
  const auto& tax = taxonomy(tracks.empty() ? Category::InsideActivity : tracks.front().category);
  data.class_names = tax.classes;
  for (std::size_t t = 0; t < trips.size(); ++t) {
    const auto& trip = trips[t];
    SliceStats stats;
    const auto windows = slice_windows(trip, window, &stats);
    const auto labeled = label_windows(windows, tracks[t]);
    TripAudit ta;
    ta.trip_id = trip.trip_id;
    ta.grid_samples = trip.size();
    ta.masked_samples = static_cast<std::size_t>(std::count(trip.gap_mask.begin(), trip.gap_mask.end(), true));
    ta.candidate_windows = stats.candidates;
    ta.dropped_for_gaps = stats.dropped_for_gaps;
    ta.labeled_windows = labeled.labels.size();
    local.trips.push_back(ta);

    const std::size_t first = rows.size();
    rows.resize(first + labeled.labels.size());
    parallel_for(labeled.labels.size(), jobs, [&](std::size_t i) {
      rows[first + i] = extract_features(windows[labeled.window_indices[i]], features);
    });
    data.y.insert(data.y.end(), labeled.labels.begin(), labeled.labels.end());
  }
  data.x = impute_and_assemble(rows, features);
  local.imputed_values = data.x.imputed();
  if (audit) *audit = std::move(local);
  return data;
}

std::string audit_to_json(const FeaturizeAudit& audit) {
  ordered_json j;
  j["schema"] = "drivesense.featurize_audit";
  j["version"] = 1;
  j["imputed_values"] = audit.imputed_values;
  ordered_json trips = ordered_json::array();
  for (const auto& t : audit.trips) {
    trips.push_back({{"trip_id", t.trip_id},
                     {"grid_samples", t.grid_samples},
                     {"masked_samples", t.masked_samples},
                     {"candidate_windows", t.candidate_windows},
                     {"dropped_for_gaps", t.dropped_for_gaps},
                     {"labeled_windows", t.labeled_windows}});
  }
  j["trips"] = trips;
  return j.dump(2) + "\n";
}

std::vector<ChannelKind> parse_channel_list(std::string_view text) {
  std::vector<ChannelKind> out;
  auto add = [&out](ChannelKind k) {
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  };
  for (auto token : split(text, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    if (token == "all") {
      for (ChannelKind k : kAllChannels) add(k);
    } else if (const auto kind = parse_channel_kind(token)) {
      add(*kind);
    } else if (const auto sensor = parse_sensor(token)) {
      for (ChannelKind k : kAllChannels) {
        if (sensor_of(k) == *sensor) add(k);
      }
    } else {
      fail(ErrorKind::Config, "unknown channel '" + std::string(token) + "'");
    }
  }
  if (out.empty()) fail(ErrorKind::Config, "empty channel list");
  return out;
}

std::vector<std::vector<ChannelKind>> parse_channel_groups(std::string_view text) {
  std::vector<std::vector<ChannelKind>> groups;
  for (auto token : split(text, ';')) {
    if (trim(token).empty()) continue;
    groups.push_back(parse_channel_list(token));
  }
  if (groups.empty()) fail(ErrorKind::Config, "empty ablation order");
  return groups;
}

std::vector<std::vector<ChannelKind>> RunConfig::default_ablation_groups() {
  return parse_channel_groups("accel;gyro;hr;ppg;light;noise");
}

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  if constexpr (std::is_floating_point_v<T>) {
    const auto v = parse_double(value);
    if (!v) fail(ErrorKind::Config, "bad number for " + std::string(key) + ": '" + std::string(value) + "'");
    return static_cast<T>(*v);
  } else {
    const auto v = parse_int(value);
    if (!v || *v < 0)
      fail(ErrorKind::Config, "bad count for " + std::string(key) + ": '" + std::string(value) + "'");
    return static_cast<T>(*v);
  }
}

std::optional<std::size_t> parse_optional_count(std::string_view key, std::string_view value) {
  if (value == "none" || value == "auto" || value.empty()) return std::nullopt;
  return parse_number<std::size_t>(key, value);
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
  const auto value = trim(raw);
  if (key == "data_dir") {
    data_dir = std::string(value);
  } else if (key == "out_dir") {
    out_dir = std::string(value);
  } else if (key == "features") {
    features_path = std::filesystem::path(std::string(value));
  } else if (key == "category") {
    const auto c = parse_category(value);
    if (!c) fail(ErrorKind::Config, "unknown category '" + std::string(value) + "'");
    category = *c;
  } else if (key == "target_rate") {
    sampling.target_rate = parse_number<double>(key, value);
  } else if (key == "max_gap") {
    sampling.max_gap_s = parse_number<double>(key, value);
  } else if (key == "window_length") {
    window.length_s = parse_number<double>(key, value);
  } else if (key == "window_overlap") {
    window.overlap_fraction = parse_number<double>(key, value);
  } else if (key == "channels") {
    features.channels = parse_channel_list(value);
  } else if (key == "balance") {
    if (value == "none") balance.mode = BalanceMode::None;
    else if (value == "weights") balance.mode = BalanceMode::ClassWeights;
    else if (value == "smote") balance.mode = BalanceMode::Smote;
    else fail(ErrorKind::Config, "balance must be none, weights or smote");
  } else if (key == "smote_k") {
    balance.smote_k = parse_number<std::size_t>(key, value);
    if (balance.smote_k < 1) fail(ErrorKind::Config, "smote_k must be >= 1");
  } else if (key == "model") {
    const auto m = parse_model(value);
    if (!m) fail(ErrorKind::Config, "model must be tree, forest or extra");
    model = *m;
  } else if (key == "n_trees") {
    n_trees = parse_optional_count(key, value);
  } else if (key == "max_depth") {
    max_depth = parse_optional_count(key, value);
  } else if (key == "min_samples_split") {
    min_samples_split = parse_number<std::size_t>(key, value);
  } else if (key == "n_candidate_features") {
    n_candidate_features = parse_optional_count(key, value);
  } else if (key == "k_folds") {
    k_folds = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "jobs") {
    jobs = std::max(1u, parse_number<unsigned>(key, value));
  } else if (key == "holdout_fraction") {
    holdout_fraction = parse_number<double>(key, value);
  } else if (key == "repeats") {
    repeats = parse_number<std::size_t>(key, value);
  } else if (key == "ablation_order") {
    ablation_groups = parse_channel_groups(value);
  } else if (key == "synth_classes") {
    synth_classes = parse_optional_count(key, value);
  } else if (key == "synth_events_per_class") {
    synth_events_per_class = parse_number<std::size_t>(key, value);
  } else if (key == "synth_trips") {
    synth_trips = parse_number<std::size_t>(key, value);
  } else if (key == "synth_separation") {
    synth_separation = parse_number<double>(key, value);
  } else if (key == "synth_event_min") {
    synth_event_min_s = parse_number<double>(key, value);
  } else if (key == "synth_event_max") {
    synth_event_max_s = parse_number<double>(key, value);
  } else {
    fail(ErrorKind::Config, "unknown config key '" + std::string(key) + "'");
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = trim(text.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::Config, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
}

ForestParams RunConfig::forest_params() const {
  ForestParams p = model_preset(model, seed);
  if (n_trees) p.n_trees = *n_trees;
  p.tree.max_depth = max_depth;
  p.tree.min_samples_split = min_samples_split;
  if (n_candidate_features) p.tree.n_candidate_features = n_candidate_features;
  return p;
}

CvSpec RunConfig::cv_spec() const {
  CvSpec spec;
  spec.k = k_folds;
  spec.seed = seed;
  spec.balance = balance;
  spec.balance.seed = seed;
  return spec;
}

std::filesystem::path RunConfig::output(std::string_view stem, std::string_view ext) const {
  return out_dir / (std::string(stem) + "_" + std::string(category_name(category)) + "." + std::string(ext));
}

std::filesystem::path RunConfig::feature_file() const {
  return features_path ? *features_path : output("features", "csv");
}

namespace {

void ensure_out_dir(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory " + config.out_dir.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Dataset load_features(const RunConfig& config) {
  const auto path = config.feature_file();
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "missing feature file " + path.string());
  auto data = read_feature_csv(path, taxonomy(config.category));
  const auto audit = path.parent_path() / ("featurize_audit_" + std::string(category_name(config.category)) + ".json");
  if (std::filesystem::exists(audit)) {
    const auto j = nlohmann::json::parse(read_text(audit), nullptr, false);
    if (!j.is_discarded() && j.contains("imputed_values"))
      data.x.set_imputed(j["imputed_values"].get<std::size_t>());
  }
  return data;
}

std::vector<std::string> discover_trips(const RunConfig& config) {
  const auto& dir = config.data_dir;
  if (!std::filesystem::is_directory(dir)) fail(ErrorKind::Io, "missing data directory " + dir.string());
  const std::string suffix = "_" + std::string(category_name(config.category)) + ".csv";
  std::set<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix))
      ids.insert(name.substr(0, name.size() - suffix.size()));
  }
  if (ids.empty())
    fail(ErrorKind::Io, "no annotation files (*" + suffix + ") in " + dir.string());
  return {ids.begin(), ids.end()};
}

}  // namespace

void cmd_synth(const RunConfig& config) {
  const auto& tax = taxonomy(config.category);
  const std::size_t n_classes = config.synth_classes.value_or(tax.size());
  auto spec = default_synth_spec(config.category, n_classes, kAllChannels, config.synth_separation, config.seed);
  spec.n_events_per_class = config.synth_events_per_class;
  spec.n_trips = config.synth_trips;
  spec.event_min_s = config.synth_event_min_s;
  spec.event_max_s = config.synth_event_max_s;
  spec.rate = config.sampling.target_rate;
  write_synth(config.out_dir, generate(spec));
}

void cmd_featurize(const RunConfig& config) {
  const auto ids = discover_trips(config);
  const auto& tax = taxonomy(config.category);
  std::vector<UniformTrip> trips;
  std::vector<LabelTrack> tracks;
  for (const auto& id : ids) {
    trips.push_back(load_trip(config.data_dir, id, config.features.channels, config.sampling));
    tracks.push_back(load_annotations(
        config.data_dir / (id + "_" + std::string(category_name(config.category)) + ".csv"), tax));
  }
  FeaturizeAudit audit;
  auto data = build_dataset(trips, tracks, config.window, config.features, &audit, config.jobs);
  data.class_names = tax.classes;
  ensure_out_dir(config);
  write_feature_csv(config.output("features", "csv"), data);
  write_text(config.output("featurize_audit", "json"), audit_to_json(audit));
}

void cmd_cv(const RunConfig& config) {
  const auto data = load_features(config);
  const auto report = run_cv(data, config.forest_params(), config.cv_spec(), config.jobs);
  ensure_out_dir(config);
  write_text(config.output("cv", "json"), report_to_json(report));
  write_text(config.output("confusion", "csv"), confusion_to_csv(report));
}

void cmd_importance(const RunConfig& config) {
  const auto data = load_features(config);
  BalanceSpec balance = config.balance;
  balance.seed = config.seed;
  const auto report = permutation_importance(data, config.forest_params(), balance, config.holdout_fraction,
                                             config.repeats, config.seed, config.jobs);
  ensure_out_dir(config);
  write_text(config.output("importance", "json"), importance_to_json(report));
}

void cmd_ablate(const RunConfig& config) {
  const auto data = load_features(config);
  const auto entries = modality_ablation(data, config.forest_params(), config.cv_spec(), config.ablation_groups,
                                         config.jobs);
  ensure_out_dir(config);
  write_text(config.output("ablation", "json"), ablation_to_json(entries));
}

std::string cmd_report(const RunConfig& config) {
  const auto path = config.output("cv", "json");
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "missing report " + path.string());
  return render_report(read_text(path));
}

}  // namespace drivesense

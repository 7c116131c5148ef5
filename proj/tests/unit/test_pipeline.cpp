#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "drivesense/error.hpp"
#include "drivesense/pipeline.hpp"
#include "drivesense/synth.hpp"

using namespace drivesense;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("channel lists accept names, sensors and all") {
  CHECK(parse_channel_list("hr, accel_x").size() == 2);
  CHECK(parse_channel_list("accel").size() == 4);
  CHECK(parse_channel_list("all").size() == 12);
  CHECK(parse_channel_list("hr,hr").size() == 1);
  CHECK(kind_of([] { parse_channel_list("sonar"); }) == ErrorKind::Config);
  CHECK(parse_channel_groups("accel;gyro;hr").size() == 3);
}

TEST_CASE("config file and overrides") {
  const auto dir = fresh_dir("ds_config");
  std::ofstream(dir / "run.conf") << "# comment\ncategory = RoadType\nseed = 42\nbalance = smote  # trailing\n"
                                     "channels = hr,ppg\nn_trees = 7\nmax_depth = none\n";
  RunConfig c;
  c.load_file(dir / "run.conf");
  CHECK(c.category == Category::RoadType);
  CHECK(c.seed == 42);
  CHECK(c.balance.mode == BalanceMode::Smote);
  CHECK(c.features.channels.size() == 2);
  CHECK(c.forest_params().n_trees == 7);
  CHECK_FALSE(c.forest_params().tree.max_depth.has_value());
  c.set("seed", "7");
  CHECK(c.cv_spec().seed == 7);
  CHECK(c.output("cv", "json").filename() == "cv_RoadType.json");

  CHECK(kind_of([&] { c.set("colour", "blue"); }) == ErrorKind::Config);
  CHECK(kind_of([&] { c.set("seed", "-1"); }) == ErrorKind::Config);
  CHECK(kind_of([&] { c.set("model", "svm"); }) == ErrorKind::Config);
  CHECK(kind_of([&] { c.load_file(dir / "absent.conf"); }) == ErrorKind::Io);
  std::ofstream(dir / "bad.conf") << "just words\n";
  CHECK(kind_of([&] { c.load_file(dir / "bad.conf"); }) == ErrorKind::Config);
}

TEST_CASE("build_dataset stacks trips in order and audits them") {
  const std::vector<ChannelKind> chans{ChannelKind::HR, ChannelKind::PPG};
  auto spec = default_synth_spec(Category::OutsideEvent, 2, chans, 5.0, 1);
  spec.n_trips = 2;
  spec.n_events_per_class = 3;
  const auto data = generate(spec);
  FeaturizeAudit audit;
  const FeatureSet fset{chans};
  const auto d1 = build_dataset(data.trips, data.tracks, WindowSpec{}, fset, &audit, 1);
  const auto d4 = build_dataset(data.trips, data.tracks, WindowSpec{}, fset, nullptr, 4);
  CHECK(d1.x == d4.x);
  CHECK(d1.y == d4.y);
  REQUIRE(audit.trips.size() == 2);
  CHECK(audit.trips[0].labeled_windows + audit.trips[1].labeled_windows == d1.x.rows());
  CHECK(d1.x.cols() == 2 * kFeaturesPerChannel);
  CHECK(audit_to_json(audit).find("\"labeled_windows\"") != std::string::npos);
}

TEST_CASE("commands run end to end from files") {
  const auto dir = fresh_dir("ds_pipeline");
  RunConfig c;
  c.category = Category::OutsideEvent;
  c.out_dir = dir / "data";
  c.synth_events_per_class = 4;
  c.seed = 3;
  cmd_synth(c);

  c.data_dir = dir / "data";
  c.out_dir = dir / "out";
  c.features.channels = parse_channel_list("hr,ppg,accel");
  cmd_featurize(c);
  const auto csv = slurp(c.output("features", "csv"));
  const auto header = csv.substr(0, csv.find('\n'));
  CHECK(std::count(header.begin(), header.end(), ',') + 1 == 6 * kFeaturesPerChannel + 1);
  cmd_featurize(c);
  CHECK(slurp(c.output("features", "csv")) == csv);

  c.n_trees = 10;
  c.k_folds = 3;
  c.repeats = 2;
  cmd_cv(c);
  cmd_importance(c);
  c.ablation_groups = parse_channel_groups("hr;ppg;accel");
  cmd_ablate(c);
  CHECK(fs::exists(c.output("cv", "json")));
  CHECK(fs::exists(c.output("confusion", "csv")));
  CHECK(fs::exists(c.output("importance", "json")));
  CHECK(fs::exists(c.output("ablation", "json")));
  CHECK(cmd_report(c).find("weighted F1") != std::string::npos);
}

TEST_CASE("featurize names what is missing") {
  const auto dir = fresh_dir("ds_pipeline_empty");
  RunConfig c;
  c.data_dir = dir;
  c.out_dir = dir / "out";
  CHECK(kind_of([&] { cmd_featurize(c); }) == ErrorKind::Io);
  CHECK(kind_of([&] { cmd_cv(c); }) == ErrorKind::Io);
}

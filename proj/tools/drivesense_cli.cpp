#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drivesense/drivesense.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitIo = 2;
constexpr int kExitUsage = 64;

int exit_code(ds_status status) {
  switch (status) {
    case DS_OK: return kExitOk;
    case DS_ERR_IO: return kExitIo;
    case DS_ERR_CONFIG:
    case DS_ERR_INVALID_ARGUMENT: return kExitUsage;
    default: return kExitData;
  }
}

struct Overrides {
  std::string config_path;
  std::optional<std::string> category, seed, jobs, out, balance, model, data, features;
  std::vector<std::string> sets;
};

struct ConfigHandle {
  ds_config* ptr = nullptr;
  ~ConfigHandle() { ds_config_free(ptr); }
};

ds_status apply(ds_config* config, const Overrides& o) {
  ds_status st = DS_OK;
  if (!o.config_path.empty() && (st = ds_config_load_file(config, o.config_path.c_str())) != DS_OK) return st;
  const std::pair<const char*, const std::optional<std::string>*> flags[] = {
      {"category", &o.category}, {"seed", &o.seed},   {"jobs", &o.jobs},     {"out_dir", &o.out},
      {"balance", &o.balance},   {"model", &o.model}, {"data_dir", &o.data}, {"features", &o.features},
  };
  for (const auto& [key, value] : flags) {
    if (*value && (st = ds_config_set(config, key, (*value)->c_str())) != DS_OK) return st;
  }
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
      return DS_ERR_CONFIG;
    }
    if ((st = ds_config_set(config, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())) != DS_OK) return st;
  }
  return DS_OK;
}

int report_failure(ds_status st) {
  std::fprintf(stderr, "error: %s\n", ds_last_error());
  return exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driver-context classification from smartwatch sensor logs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ds_version());

  Overrides o;
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Flat key = value config file");
    sub->add_option("--category", o.category, "InsideActivity, OutsideEvent or RoadType");
    sub->add_option("--seed", o.seed, "Seed for every random choice");
    sub->add_option("--jobs", o.jobs, "Worker threads");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--data", o.data, "Input directory with sensor and annotation CSVs");
    sub->add_option("--features", o.features, "Feature CSV (defaults to <out>/features_<category>.csv)");
    sub->add_option("--balance", o.balance, "none, weights or smote")
        ->check(CLI::IsMember({"none", "weights", "smote"}));
    sub->add_option("--model", o.model, "tree, forest or extra")->check(CLI::IsMember({"tree", "forest", "extra"}));
    sub->add_option("--set", o.sets, "Override any config key (KEY=VALUE), repeatable");
  };

  struct Command {
    const char* name;
    const char* help;
    ds_status (*run)(const ds_config*);
  };
  const Command commands[] = {
      {"synth", "Write a synthetic trip dataset", ds_cmd_synth},
      {"featurize", "Window, label and featurize trips", ds_cmd_featurize},
      {"cv", "Stratified k-fold cross-validation", ds_cmd_cv},
      {"importance", "Permutation feature importance", ds_cmd_importance},
      {"ablate", "Cumulative sensor-modality ablation", ds_cmd_ablate},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    subs.emplace_back(sub, &c);
  }
  auto* report = app.add_subcommand("report", "Print a summary of the cv report");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n\n%s", e.what(), app.help().c_str());
    return kExitUsage;
  }

  ConfigHandle config;
  if (ds_config_new(&config.ptr) != DS_OK) return report_failure(DS_ERR_INTERNAL);
  if (const ds_status st = apply(config.ptr, o); st != DS_OK) return report_failure(st);

  if (report->parsed()) {
    char* text = nullptr;
    if (const ds_status st = ds_cmd_report(config.ptr, &text); st != DS_OK) return report_failure(st);
    std::fputs(text, stdout);
    ds_string_free(text);
    return kExitOk;
  }
  for (const auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    if (const ds_status st = cmd->run(config.ptr); st != DS_OK) return report_failure(st);
    return kExitOk;
  }
  return kExitUsage;
}

#include "drivesense/drivesense.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "drivesense/error.hpp"
#include "drivesense/pipeline.hpp"

struct ds_config {
  drivesense::RunConfig config;
};

struct ds_dataset {
  drivesense::Dataset data;
};

struct ds_forest {
  drivesense::Forest forest;
};

namespace {

thread_local std::string g_last_error;

ds_status status_for(drivesense::ErrorKind kind) {
  using drivesense::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument: return DS_ERR_INVALID_ARGUMENT;
    case ErrorKind::Parse: return DS_ERR_PARSE;
    case ErrorKind::Data:
    case ErrorKind::Alignment:
    case ErrorKind::Taxonomy:
    case ErrorKind::Annotation:
    case ErrorKind::Feature:
    case ErrorKind::Assembly:
    case ErrorKind::Balance: return DS_ERR_DATA;
    case ErrorKind::Model: return DS_ERR_MODEL;
    case ErrorKind::Config: return DS_ERR_CONFIG;
    case ErrorKind::Io: return DS_ERR_IO;
  }
  return DS_ERR_INTERNAL;
}

template <typename F>
ds_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DS_OK;
  } catch (const drivesense::Error& e) {
    g_last_error = std::string(drivesense::to_string(e.kind())) + ": " + e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DS_ERR_INTERNAL;
  }
}

ds_status null_arg(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return DS_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* ds_version(void) { return "1.0.0"; }

const char* ds_last_error(void) { return g_last_error.c_str(); }

const char* ds_status_name(ds_status status) {
  switch (status) {
    case DS_OK: return "ok";
    case DS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DS_ERR_PARSE: return "parse error";
    case DS_ERR_DATA: return "data error";
    case DS_ERR_CONFIG: return "config error";
    case DS_ERR_MODEL: return "model error";
    case DS_ERR_IO: return "i/o error";
    case DS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ds_status ds_config_new(ds_config** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new ds_config(); });
}

void ds_config_free(ds_config* config) { delete config; }

ds_status ds_config_load_file(ds_config* config, const char* path) {
  if (!config || !path) return null_arg("config/path");
  return guarded([&] { config->config.load_file(path); });
}

ds_status ds_config_set(ds_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return null_arg("config/key/value");
  return guarded([&] { config->config.set(key, value); });
}

#define DS_COMMAND(name)                                        \
  ds_status ds_cmd_##name(const ds_config* config) {            \
    if (!config) return null_arg("config");                     \
    return guarded([&] { drivesense::cmd_##name(config->config); }); \
  }

DS_COMMAND(synth)
DS_COMMAND(featurize)
DS_COMMAND(cv)
DS_COMMAND(importance)
DS_COMMAND(ablate)

#undef DS_COMMAND

ds_status ds_cmd_report(const ds_config* config, char** out) {
  if (!config || !out) return null_arg("config/out");
  *out = nullptr;
  return guarded([&] {
    const auto text = drivesense::cmd_report(config->config);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

void ds_string_free(char* s) { delete[] s; }

ds_status ds_dataset_load_csv(const char* path, const char* category, ds_dataset** out) {
  if (!path || !category || !out) return null_arg("path/category/out");
  *out = nullptr;
  return guarded([&] {
    const auto cat = drivesense::parse_category(category);
    if (!cat) drivesense::fail(drivesense::ErrorKind::Config, std::string("unknown category '") + category + "'");
    auto data = drivesense::read_feature_csv(path, drivesense::taxonomy(*cat));
    *out = new ds_dataset{std::move(data)};
  });
}

void ds_dataset_free(ds_dataset* data) { delete data; }

size_t ds_dataset_rows(const ds_dataset* data) { return data ? data->data.x.rows() : 0; }

size_t ds_dataset_cols(const ds_dataset* data) { return data ? data->data.x.cols() : 0; }

size_t ds_dataset_n_classes(const ds_dataset* data) { return data ? data->data.n_classes() : 0; }

int ds_dataset_label(const ds_dataset* data, size_t row) {
  if (!data || row >= data->data.y.size()) return -1;
  return data->data.y[row];
}

ds_status ds_forest_fit(const ds_dataset* data, const char* model, uint64_t seed, unsigned jobs,
                        ds_forest** out) {
  if (!data || !model || !out) return null_arg("data/model/out");
  *out = nullptr;
  return guarded([&] {
    const auto kind = drivesense::parse_model(model);
    if (!kind) drivesense::fail(drivesense::ErrorKind::Config, std::string("unknown model '") + model + "'");
    const auto params = drivesense::model_preset(*kind, seed);
    auto forest = drivesense::fit_forest(data->data.x, data->data.y, data->data.n_classes(), params,
                                         jobs == 0 ? 1 : jobs);
    *out = new ds_forest{std::move(forest)};
  });
}

void ds_forest_free(ds_forest* forest) { delete forest; }

size_t ds_forest_n_classes(const ds_forest* forest) { return forest ? forest->forest.n_classes : 0; }

size_t ds_forest_n_features(const ds_forest* forest) {
  return forest ? forest->forest.column_names.size() : 0;
}

ds_status ds_forest_predict_proba(const ds_forest* forest, const double* row, size_t n_features,
                                  double* proba, size_t n_classes) {
  if (!forest || !row || !proba) return null_arg("forest/row/proba");
  return guarded([&] {
    if (n_classes != forest->forest.n_classes)
      drivesense::fail(drivesense::ErrorKind::InvalidArgument, "probability buffer has the wrong size");
    const auto p = forest->forest.predict_proba(std::span<const double>(row, n_features));
    std::copy(p.begin(), p.end(), proba);
  });
}

ds_status ds_forest_save_json(const ds_forest* forest, const char* path) {
  if (!forest || !path) return null_arg("forest/path");
  return guarded([&] { drivesense::save_forest(path, forest->forest); });
}

ds_status ds_forest_load_json(const char* path, ds_forest** out) {
  if (!path || !out) return null_arg("path/out");
  *out = nullptr;
  return guarded([&] { *out = new ds_forest{drivesense::load_forest(path)}; });
}

}  // extern "C"

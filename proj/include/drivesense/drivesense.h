/* C interface to the drivesense pipeline. Every function returns a ds_status;
 * on failure ds_last_error() describes the most recent error on this thread. */
#ifndef DRIVESENSE_H
#define DRIVESENSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(DS_BUILDING_LIBRARY)
#define DS_API __attribute__((visibility("default")))
#else
#define DS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ds_status {
  DS_OK = 0,
  DS_ERR_INVALID_ARGUMENT = 1,
  DS_ERR_PARSE = 2,
  DS_ERR_DATA = 3,
  DS_ERR_CONFIG = 4,
  DS_ERR_MODEL = 5,
  DS_ERR_IO = 6,
  DS_ERR_INTERNAL = 7
} ds_status;

typedef struct ds_config ds_config;
typedef struct ds_dataset ds_dataset;
typedef struct ds_forest ds_forest;

DS_API const char* ds_version(void);
DS_API const char* ds_last_error(void);
DS_API const char* ds_status_name(ds_status status);

DS_API ds_status ds_config_new(ds_config** out);
DS_API void ds_config_free(ds_config* config);
DS_API ds_status ds_config_load_file(ds_config* config, const char* path);
DS_API ds_status ds_config_set(ds_config* config, const char* key, const char* value);

DS_API ds_status ds_cmd_synth(const ds_config* config);
DS_API ds_status ds_cmd_featurize(const ds_config* config);
DS_API ds_status ds_cmd_cv(const ds_config* config);
DS_API ds_status ds_cmd_importance(const ds_config* config);
DS_API ds_status ds_cmd_ablate(const ds_config* config);
/* *out receives a heap string to release with ds_string_free. */
DS_API ds_status ds_cmd_report(const ds_config* config, char** out);
DS_API void ds_string_free(char* s);

/* category: "InsideActivity", "OutsideEvent" or "RoadType". */
DS_API ds_status ds_dataset_load_csv(const char* path, const char* category, ds_dataset** out);
DS_API void ds_dataset_free(ds_dataset* data);
DS_API size_t ds_dataset_rows(const ds_dataset* data);
DS_API size_t ds_dataset_cols(const ds_dataset* data);
DS_API size_t ds_dataset_n_classes(const ds_dataset* data);
DS_API int ds_dataset_label(const ds_dataset* data, size_t row);

/* model: "tree", "forest" or "extra". */
DS_API ds_status ds_forest_fit(const ds_dataset* data, const char* model, uint64_t seed,
                               unsigned jobs, ds_forest** out);
DS_API void ds_forest_free(ds_forest* forest);
DS_API size_t ds_forest_n_classes(const ds_forest* forest);
DS_API size_t ds_forest_n_features(const ds_forest* forest);
/* row has n_features values; proba receives n_classes values. */
DS_API ds_status ds_forest_predict_proba(const ds_forest* forest, const double* row, size_t n_features,
                                         double* proba, size_t n_classes);
DS_API ds_status ds_forest_save_json(const ds_forest* forest, const char* path);
DS_API ds_status ds_forest_load_json(const char* path, ds_forest** out);

#ifdef __cplusplus
}
#endif

#endif

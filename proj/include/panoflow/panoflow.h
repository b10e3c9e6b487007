// Copyright 2026 The PanoFlow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PANOFLOW_PANOFLOW_H_
#define PANOFLOW_PANOFLOW_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PF_API __declspec(dllexport)
#else
#define PF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pf_status {
  PF_OK = 0,
  PF_ERR_INVALID_ARGUMENT = 1,
  PF_ERR_SHAPE_MISMATCH = 2,
  PF_ERR_IO = 3,
  PF_ERR_FORMAT = 4,
  PF_ERR_CONFIG = 5,
  PF_ERR_SCHEMA = 6,
  PF_ERR_MISSING_WEIGHT = 7,
  PF_ERR_INTERNAL = 99
} pf_status;

typedef struct pf_config pf_config;
typedef struct pf_tensor pf_tensor;

/* Message of the last failed call on this thread; "" after success. */
PF_API const char* pf_last_error(void);
PF_API const char* pf_status_name(pf_status status);
PF_API const char* pf_version(void);

/* Strings returned through char** out-parameters are released here. */
PF_API void pf_string_free(char* str);

PF_API pf_status pf_config_create(pf_config** out);
PF_API pf_status pf_config_load(const char* json_path, pf_config** out);
PF_API pf_status pf_config_from_json(const char* json_text, pf_config** out);
/* Keys: seed, size, workers, lambda, disable-flow, stages, out, image,
   checkpoint, save-checkpoint, image-id, palette-seed. */
PF_API pf_status pf_config_set(pf_config* config, const char* key, const char* value);
PF_API pf_status pf_config_to_json(const pf_config* config, char** out_json);
PF_API void pf_config_destroy(pf_config* config);

PF_API pf_status pf_tensor_read(const char* path, pf_tensor** out);
/* dims receives batch, channels, height, width. */
PF_API void pf_tensor_dims(const pf_tensor* tensor, int64_t dims[4]);
PF_API const float* pf_tensor_data(const pf_tensor* tensor);
PF_API void pf_tensor_destroy(pf_tensor* tensor);

PF_API pf_status pf_loss_compose(double l_cls, double l_reg, double l_thing, double l_stuff,
                                 double lambda, double* out);

PF_API pf_status pf_run_forward(const pf_config* config, char** out_report);
/* Any input path may be NULL or empty. */
PF_API pf_status pf_run_fuse(const pf_config* config, const char* instances_path,
                             const char* stuff_path, const char* detections_path,
                             char** out_summary);
PF_API pf_status pf_run_evaluate(const pf_config* config, const char* gt_json,
                                 const char* gt_dir, const char* pred_json,
                                 const char* pred_dir, char** out_report_json,
                                 char** out_table);
PF_API pf_status pf_run_colorize(const pf_config* config, const char* panoptic_png,
                                 const char* out_png);

#ifdef __cplusplus
}
#endif

#endif  // PANOFLOW_PANOFLOW_H_

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

#include "panoflow/panoflow.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "panoflow/config.h"
#include "panoflow/error.h"
#include "panoflow/pipeline.h"
#include "panoflow/subnets.h"
#include "panoflow/tensor_io.h"

struct pf_config {
  panoflow::RunConfig config;
};

struct pf_tensor {
  panoflow::Tensor tensor;
};

namespace {

thread_local std::string last_error;

pf_status Record(pf_status status, const char* message) {
  last_error = message;
  return status;
}

template <typename F>
pf_status Guard(F&& body) {
  try {
    body();
    last_error.clear();
    return PF_OK;
  } catch (const panoflow::Error& e) {
    return Record(static_cast<pf_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Record(PF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Record(PF_ERR_INTERNAL, e.what());
  } catch (...) {
    return Record(PF_ERR_INTERNAL, "unknown error");
  }
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void NotNull(const void* p, const char* what) {
  panoflow::Require(p != nullptr, panoflow::ErrorCode::kInvalidArgument,
                    std::string(what) + " must not be NULL");
}

std::string OrEmpty(const char* s) { return s == nullptr ? std::string() : std::string(s); }

}  // namespace

extern "C" {

const char* pf_last_error(void) { return last_error.c_str(); }

const char* pf_status_name(pf_status status) {
  switch (status) {
    case PF_OK: return "ok";
    case PF_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PF_ERR_SHAPE_MISMATCH: return "shape_mismatch";
    case PF_ERR_IO: return "io";
    case PF_ERR_FORMAT: return "format";
    case PF_ERR_CONFIG: return "config";
    case PF_ERR_SCHEMA: return "schema";
    case PF_ERR_MISSING_WEIGHT: return "missing_weight";
    case PF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* pf_version(void) { return "0.1.0"; }

void pf_string_free(char* str) { std::free(str); }

pf_status pf_config_create(pf_config** out) {
  return Guard([&] {
    NotNull(out, "out");
    auto* handle = new pf_config;
    handle->config.Finalize();
    *out = handle;
  });
}

pf_status pf_config_load(const char* json_path, pf_config** out) {
  return Guard([&] {
    NotNull(json_path, "json_path");
    NotNull(out, "out");
    *out = new pf_config{panoflow::LoadRunConfig(json_path)};
  });
}

pf_status pf_config_from_json(const char* json_text, pf_config** out) {
  return Guard([&] {
    NotNull(json_text, "json_text");
    NotNull(out, "out");
    *out = new pf_config{panoflow::RunConfigFromJson(json_text)};
  });
}

pf_status pf_config_set(pf_config* config, const char* key, const char* value) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(key, "key");
    NotNull(value, "value");
    panoflow::RunConfig updated = config->config;
    panoflow::ApplyOverride(updated, key, value);
    config->config = std::move(updated);
  });
}

pf_status pf_config_to_json(const pf_config* config, char** out_json) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(out_json, "out_json");
    *out_json = CopyString(panoflow::RunConfigToJson(config->config));
  });
}

void pf_config_destroy(pf_config* config) { delete config; }

pf_status pf_tensor_read(const char* path, pf_tensor** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new pf_tensor{panoflow::ReadTensor(path)};
  });
}

void pf_tensor_dims(const pf_tensor* tensor, int64_t dims[4]) {
  const panoflow::Shape& s = tensor->tensor.shape();
  dims[0] = s.batch;
  dims[1] = s.channels;
  dims[2] = s.height;
  dims[3] = s.width;
}

const float* pf_tensor_data(const pf_tensor* tensor) { return tensor->tensor.data().data(); }

void pf_tensor_destroy(pf_tensor* tensor) { delete tensor; }

pf_status pf_loss_compose(double l_cls, double l_reg, double l_thing, double l_stuff,
                          double lambda, double* out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = panoflow::LossCompose(l_cls, l_reg, l_thing, l_stuff, lambda);
  });
}

pf_status pf_run_forward(const pf_config* config, char** out_report) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(out_report, "out_report");
    *out_report = CopyString(panoflow::CmdForward(config->config));
  });
}

pf_status pf_run_fuse(const pf_config* config, const char* instances_path, const char* stuff_path,
                      const char* detections_path, char** out_summary) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(out_summary, "out_summary");
    const panoflow::FuseArgs args{OrEmpty(instances_path), OrEmpty(stuff_path),
                                  OrEmpty(detections_path)};
    *out_summary = CopyString(panoflow::CmdFuse(config->config, args));
  });
}

pf_status pf_run_evaluate(const pf_config* config, const char* gt_json, const char* gt_dir,
                          const char* pred_json, const char* pred_dir, char** out_report_json,
                          char** out_table) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(gt_json, "gt_json");
    NotNull(gt_dir, "gt_dir");
    NotNull(pred_json, "pred_json");
    NotNull(pred_dir, "pred_dir");
    const panoflow::EvaluateResult r =
        panoflow::CmdEvaluate(config->config, gt_json, gt_dir, pred_json, pred_dir);
    char* json = out_report_json != nullptr ? CopyString(r.json) : nullptr;
    if (out_table != nullptr) {
      try {
        *out_table = CopyString(r.table);
      } catch (...) {
        std::free(json);
        throw;
      }
    }
    if (out_report_json != nullptr) *out_report_json = json;
  });
}

pf_status pf_run_colorize(const pf_config* config, const char* panoptic_png, const char* out_png) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(panoptic_png, "panoptic_png");
    NotNull(out_png, "out_png");
    panoflow::CmdColorize(config->config, panoptic_png, out_png);
  });
}

}  // extern "C"

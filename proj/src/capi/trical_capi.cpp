// Copyright 2026 The TriCal Authors
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

#include "trical/trical.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "trical/io.hpp"
#include "trical/oracle.hpp"
#include "trical/pipeline.hpp"

struct trical_run {
  trical::RunConfig cfg;
};

struct trical_report {
  trical::StageReport report;
  std::string table;
};

namespace {

thread_local std::string g_last_error;

trical_status fail(trical_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename Fn>
trical_status guarded(Fn&& fn) {
  try {
    fn();
    return TRICAL_OK;
  } catch (const trical::Error& e) {
    return fail(static_cast<trical_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TRICAL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TRICAL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TRICAL_ERR_INTERNAL, "unknown error");
  }
}

#define TRICAL_REQUIRE_ARG(cond, what) \
  if (!(cond)) return fail(TRICAL_ERR_INVALID_ARGUMENT, what)

trical::OracleSink sink_for(trical_check_fn fn, void* user) {
  return [fn, user](const trical::OracleCheck& c) {
    if (fn) fn(c.name.c_str(), c.passed ? 1 : 0, c.detail.c_str(), user);
  };
}

}  // namespace

extern "C" {

const char* trical_version(void) { return "1.0.0"; }

const char* trical_last_error(void) { return g_last_error.c_str(); }

const char* trical_status_name(trical_status status) {
  switch (status) {
    case TRICAL_OK: return "ok";
    case TRICAL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TRICAL_ERR_IO: return "i/o error";
    case TRICAL_ERR_PARSE: return "parse error";
    case TRICAL_ERR_DEGENERATE: return "degenerate input";
    case TRICAL_ERR_FRAME_MISMATCH: return "frame mismatch";
    case TRICAL_ERR_NUMERIC: return "numeric failure";
    case TRICAL_ERR_MISSING_CHECKPOINT: return "missing checkpoint";
    case TRICAL_ERR_CHECK_FAILED: return "check failed";
    case TRICAL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

trical_status trical_run_create(trical_run** out) {
  TRICAL_REQUIRE_ARG(out, "trical_run_create: out is NULL");
  return guarded([&] { *out = new trical_run(); });
}

void trical_run_destroy(trical_run* run) { delete run; }

trical_status trical_run_load_config(trical_run* run, const char* path) {
  TRICAL_REQUIRE_ARG(run && path, "trical_run_load_config: NULL argument");
  return guarded([&] {
    trical::RunConfig next = run->cfg;
    trical::apply_config_text(next, trical::io::read_file(path));
    run->cfg = std::move(next);
  });
}

trical_status trical_run_set(trical_run* run, const char* key, const char* value) {
  TRICAL_REQUIRE_ARG(run && key && value, "trical_run_set: NULL argument");
  return guarded([&] { trical::apply_config_value(run->cfg, key, value); });
}

trical_status trical_run_set_seed(trical_run* run, uint64_t seed) {
  TRICAL_REQUIRE_ARG(run, "trical_run_set_seed: run is NULL");
  run->cfg.seed = seed;
  return TRICAL_OK;
}

trical_status trical_run_set_jobs(trical_run* run, int jobs) {
  TRICAL_REQUIRE_ARG(run, "trical_run_set_jobs: run is NULL");
  TRICAL_REQUIRE_ARG(jobs >= 1, "jobs must be >= 1");
  run->cfg.jobs = jobs;
  return TRICAL_OK;
}

trical_status trical_run_set_schedule(trical_run* run, const char* name_or_path) {
  TRICAL_REQUIRE_ARG(run && name_or_path, "trical_run_set_schedule: NULL argument");
  return guarded([&] {
    trical::load_schedule(name_or_path);
    run->cfg.schedule = name_or_path;
  });
}

trical_status trical_synth(const trical_run* run, const char* out_dir, int* frames_written) {
  TRICAL_REQUIRE_ARG(run && out_dir, "trical_synth: NULL argument");
  return guarded([&] {
    const int n = trical::write_dataset(run->cfg, out_dir);
    if (frames_written) *frames_written = n;
  });
}

trical_status trical_train(const trical_run* run, const char* data_dir, const char* out_dir, int* stages_trained) {
  TRICAL_REQUIRE_ARG(run && data_dir && out_dir, "trical_train: NULL argument");
  return guarded([&] {
    const trical::TrainSummary s = trical::run_training(run->cfg, data_dir, out_dir);
    if (stages_trained) *stages_trained = s.trained;
  });
}

trical_status trical_eval(const trical_run* run, const char* data_dir, const char* model_dir, const char* out_dir,
                          trical_report** report) {
  TRICAL_REQUIRE_ARG(run && data_dir && model_dir && out_dir, "trical_eval: NULL argument");
  if (report) *report = nullptr;
  return guarded([&] {
    auto r = std::make_unique<trical_report>();
    r->report = trical::run_evaluation(run->cfg, data_dir, model_dir, out_dir);
    r->table = r->report.to_table();
    if (report) *report = r.release();
  });
}

size_t trical_report_size(const trical_report* report) { return report ? report->report.rows.size() : 0; }

trical_status trical_report_row(const trical_report* report, size_t index, trical_stage_row* out) {
  TRICAL_REQUIRE_ARG(report && out, "trical_report_row: NULL argument");
  TRICAL_REQUIRE_ARG(index < report->report.rows.size(), "trical_report_row: index out of range");
  const trical::StageRow& r = report->report.rows[index];
  *out = {trical::pair_name(r.pair), r.stage, r.axes.e_x,     r.axes.e_y,   r.axes.e_z, r.e_t,
          r.axes.e_roll,             r.axes.e_pitch, r.axes.e_yaw, r.e_r,      r.samples};
  return TRICAL_OK;
}

const char* trical_report_table(const trical_report* report) { return report ? report->table.c_str() : ""; }

void trical_report_destroy(trical_report* report) { delete report; }

trical_status trical_gradcheck(const trical_run* run, int seeds, trical_check_fn fn, void* user,
                               double* max_rel_error) {
  TRICAL_REQUIRE_ARG(run, "trical_gradcheck: run is NULL");
  TRICAL_REQUIRE_ARG(seeds >= 1, "trical_gradcheck: seeds must be >= 1");
  trical_status status = TRICAL_OK;
  const trical_status g = guarded([&] {
    if (!trical::run_gradchecks(run->cfg.require_seed(), seeds, sink_for(fn, user), max_rel_error))
      status = fail(TRICAL_ERR_CHECK_FAILED, "gradient check exceeded tolerance");
  });
  return g != TRICAL_OK ? g : status;
}

trical_status trical_oracle(const trical_run* run, trical_check_fn fn, void* user) {
  TRICAL_REQUIRE_ARG(run, "trical_oracle: run is NULL");
  trical_status status = TRICAL_OK;
  const trical_status g = guarded([&] {
    if (!trical::run_oracles(run->cfg.require_seed(), sink_for(fn, user)))
      status = fail(TRICAL_ERR_CHECK_FAILED, "one or more oracle checks failed");
  });
  return g != TRICAL_OK ? g : status;
}

}  // extern "C"

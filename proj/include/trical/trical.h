/* Copyright 2026 The TriCal Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the TriCal LiDAR / RGB / event calibration library.
 *
 * Every call returns a trical_status. On failure, trical_last_error() holds a
 * message for the calling thread until its next failing call. Handles are opaque and
 * owned by the caller; destroy functions accept NULL.
 */

#ifndef TRICAL_TRICAL_H_
#define TRICAL_TRICAL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TRICAL_API __declspec(dllexport)
#else
#define TRICAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum trical_status {
  TRICAL_OK = 0,
  TRICAL_ERR_INVALID_ARGUMENT = 2,
  TRICAL_ERR_IO = 3,
  TRICAL_ERR_PARSE = 4,
  TRICAL_ERR_DEGENERATE = 5,
  TRICAL_ERR_FRAME_MISMATCH = 6,
  TRICAL_ERR_NUMERIC = 7,
  TRICAL_ERR_MISSING_CHECKPOINT = 8,
  TRICAL_ERR_CHECK_FAILED = 9,
  TRICAL_ERR_INTERNAL = 10
} trical_status;

typedef struct trical_run trical_run;
typedef struct trical_report trical_report;

typedef struct trical_stage_row {
  const char* pair; /* "lidar_rgb" or "lidar_event"; valid while the report lives */
  int stage;
  double e_x, e_y, e_z, e_t;             /* cm */
  double e_roll, e_pitch, e_yaw, e_r;    /* degrees */
  size_t samples;
} trical_stage_row;

/* Called once per check by trical_oracle and trical_gradcheck. */
typedef void (*trical_check_fn)(const char* name, int passed, const char* detail, void* user);

TRICAL_API const char* trical_version(void);
TRICAL_API const char* trical_last_error(void);
TRICAL_API const char* trical_status_name(trical_status status);

/* Run configuration: defaults, then a key=value file, then individual overrides. */
TRICAL_API trical_status trical_run_create(trical_run** out);
TRICAL_API void trical_run_destroy(trical_run* run);
TRICAL_API trical_status trical_run_load_config(trical_run* run, const char* path);
TRICAL_API trical_status trical_run_set(trical_run* run, const char* key, const char* value);
TRICAL_API trical_status trical_run_set_seed(trical_run* run, uint64_t seed);
TRICAL_API trical_status trical_run_set_jobs(trical_run* run, int jobs);
TRICAL_API trical_status trical_run_set_schedule(trical_run* run, const char* name_or_path);

/* Writes frames/ and manifest.txt under out_dir. */
TRICAL_API trical_status trical_synth(const trical_run* run, const char* out_dir, int* frames_written);
/* Writes models/stage_<k>.ckpt and loss_stage_<k>.csv under out_dir; completed stages are reused. */
TRICAL_API trical_status trical_train(const trical_run* run, const char* data_dir, const char* out_dir,
                                      int* stages_trained);
/* Writes stage_report.csv and overlays/ under out_dir. `report` may be NULL. */
TRICAL_API trical_status trical_eval(const trical_run* run, const char* data_dir, const char* model_dir,
                                     const char* out_dir, trical_report** report);

TRICAL_API size_t trical_report_size(const trical_report* report);
TRICAL_API trical_status trical_report_row(const trical_report* report, size_t index, trical_stage_row* out);
/* Formatted table; valid while the report lives. */
TRICAL_API const char* trical_report_table(const trical_report* report);
TRICAL_API void trical_report_destroy(trical_report* report);

/* Finite-difference gradient checks over `seeds` seeds starting at the run seed.
 * Returns TRICAL_ERR_CHECK_FAILED when any seed exceeds the tolerance. */
TRICAL_API trical_status trical_gradcheck(const trical_run* run, int seeds, trical_check_fn fn, void* user,
                                          double* max_rel_error);
/* Brute-force reference checks. Returns TRICAL_ERR_CHECK_FAILED when any fails. */
TRICAL_API trical_status trical_oracle(const trical_run* run, trical_check_fn fn, void* user);

#ifdef __cplusplus
}
#endif

#endif /* TRICAL_TRICAL_H_ */

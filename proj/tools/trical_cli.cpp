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

// trical: synth / train / eval / gradcheck / oracle front end over the C API.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "trical/trical.h"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string data;
  std::string models;
  std::string schedule;
  int jobs = 1;
  int seeds = 20;
};

using RunPtr = std::unique_ptr<trical_run, decltype(&trical_run_destroy)>;

int report_failure(trical_status s) {
  std::fprintf(stderr, "trical: %s: %s\n", trical_status_name(s), trical_last_error());
  return static_cast<int>(s);
}

void print_check(const char* name, int passed, const char* detail, void*) {
  std::printf("%s  %s: %s\n", passed ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
}

trical_status configure(trical_run* run, const Options& o) {
  trical_status s = TRICAL_OK;
  if (!o.config.empty() && (s = trical_run_load_config(run, o.config.c_str())) != TRICAL_OK) return s;
  if (o.seed && (s = trical_run_set_seed(run, *o.seed)) != TRICAL_OK) return s;
  if (!o.schedule.empty() && (s = trical_run_set_schedule(run, o.schedule.c_str())) != TRICAL_OK) return s;
  return trical_run_set_jobs(run, o.jobs);
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "key=value run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "root seed for every random stream");
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR / RGB / event extrinsic calibration toolkit"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth, o);
  synth->add_option("--out", o.out, "dataset directory")->required();

  auto* train = app.add_subcommand("train", "train one regressor pair per schedule stage");
  add_common(train, o);
  train->add_option("--data", o.data, "dataset directory")->required();
  train->add_option("--out", o.out, "output directory")->required();
  train->add_option("--schedule", o.schedule, "five_stage, two_stage or a schedule file");

  auto* eval = app.add_subcommand("eval", "run multi-stage refinement on held-out frames");
  add_common(eval, o);
  eval->add_option("--data", o.data, "dataset directory")->required();
  eval->add_option("--models", o.models, "directory holding stage_<k>.ckpt");
  eval->add_option("--out", o.out, "output directory")->required();
  eval->add_option("--schedule", o.schedule, "five_stage, two_stage or a schedule file");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the regressor gradients");
  add_common(gradcheck, o);
  gradcheck->add_option("--seeds", o.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle", "run brute-force reference checks");
  add_common(oracle, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(TRICAL_ERR_INVALID_ARGUMENT);
  }

  trical_run* raw = nullptr;
  if (trical_status s = trical_run_create(&raw); s != TRICAL_OK) return report_failure(s);
  RunPtr run(raw, &trical_run_destroy);
  if (trical_status s = configure(run.get(), o); s != TRICAL_OK) return report_failure(s);

  trical_status s = TRICAL_OK;
  if (synth->parsed()) {
    int frames = 0;
    s = trical_synth(run.get(), o.out.c_str(), &frames);
    if (s == TRICAL_OK) std::printf("wrote %d frames to %s\n", frames, o.out.c_str());
  } else if (train->parsed()) {
    int trained = 0;
    s = trical_train(run.get(), o.data.c_str(), o.out.c_str(), &trained);
    if (s == TRICAL_OK) std::printf("trained %d stage(s); checkpoints in %s/models\n", trained, o.out.c_str());
  } else if (eval->parsed()) {
    const std::string models = o.models.empty() ? o.out + "/models" : o.models;
    trical_report* report = nullptr;
    s = trical_eval(run.get(), o.data.c_str(), models.c_str(), o.out.c_str(), &report);
    if (s == TRICAL_OK) std::fputs(trical_report_table(report), stdout);
    trical_report_destroy(report);
  } else if (gradcheck->parsed()) {
    double worst = 0.0;
    s = trical_gradcheck(run.get(), o.seeds, &print_check, nullptr, &worst);
    if (s == TRICAL_OK || s == TRICAL_ERR_CHECK_FAILED) std::printf("max relative error %.3g\n", worst);
  } else if (oracle->parsed()) {
    s = trical_oracle(run.get(), &print_check, nullptr);
  }
  return s == TRICAL_OK ? 0 : report_failure(s);
}

// Copyright 2026 The LeakAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: runs an experiment plan, or one stage of it, and
// writes checkpoints and the audit report under the output directory.
//
//   leakaudit --plan plans/quick.ini --out runs/quick
//   leakaudit --plan plans/quick.ini --out runs/quick --stage attack
//
// Environment: LEAKAUDIT_OUT (default for --out), LEAKAUDIT_WORKERS (default
// for --workers) and LEAKAUDIT_DATA (replaces the plan's CSV path).

#include <cstdlib>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "leakaudit/error.h"
#include "leakaudit/pipeline.h"
#include "leakaudit/plan.h"

namespace {

std::optional<std::string> Env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-leakage audit of compressed classifiers"};
  std::string plan_path;
  std::string out_dir;
  int workers = 0;
  std::optional<uint64_t> seed_base;
  std::string stage;
  bool quiet = false;
  app.add_option("--plan", plan_path, "Experiment plan (INI)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Run directory for checkpoints and reports");
  app.add_option("--workers", workers, "Concurrent jobs (default: plan)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed-base", seed_base, "Override the plan's seed base");
  app.add_option("--stage", stage, "Run a single stage")
      ->check(CLI::IsMember({"train", "compress", "attack", "evaluate",
                             "report"}));
  app.add_flag("--quiet", quiet, "No progress output");
  CLI11_PARSE(app, argc, argv);

  try {
    leakaudit::ExperimentPlan plan = leakaudit::LoadPlan(plan_path);
    if (auto data = Env("LEAKAUDIT_DATA")) plan.dataset.csv_path = *data;
    if (seed_base) plan.run.seed_base = *seed_base;

    leakaudit::RunOptions options;
    if (out_dir.empty()) out_dir = Env("LEAKAUDIT_OUT").value_or("");
    if (out_dir.empty()) {
      fmt::print(stderr, "error: --out (or LEAKAUDIT_OUT) is required\n");
      return 2;
    }
    options.out_dir = out_dir;
    if (workers == 0) {
      if (auto w = Env("LEAKAUDIT_WORKERS")) workers = std::atoi(w->c_str());
    }
    options.workers = workers;
    if (!stage.empty()) options.stage = leakaudit::ParseStage(stage);
    options.verbose = !quiet;

    const leakaudit::RunSummary summary = leakaudit::RunPlan(plan, options);
    if (summary.report && !quiet) fmt::print("{}", summary.report->ToText());
    if (!summary.failures.empty()) {
      fmt::print(stderr, "{} attack cell(s) failed:\n",
                 summary.failures.size());
      for (const std::string& f : summary.failures) {
        fmt::print(stderr, "  {}\n", f);
      }
      return 1;
    }
    return 0;
  } catch (const leakaudit::Error& e) {
    fmt::print(stderr, "{}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}

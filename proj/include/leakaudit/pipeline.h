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

#ifndef LEAKAUDIT_PIPELINE_H_
#define LEAKAUDIT_PIPELINE_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leakaudit/attacks.h"
#include "leakaudit/plan.h"
#include "leakaudit/report.h"

namespace leakaudit {

enum class Stage { kTrain, kCompress, kAttack, kEvaluate, kReport };

inline constexpr Stage kAllStages[] = {Stage::kTrain, Stage::kCompress,
                                       Stage::kAttack, Stage::kEvaluate,
                                       Stage::kReport};

std::string_view StageName(Stage stage);
Stage ParseStage(std::string_view name);

struct RunOptions {
  std::filesystem::path out_dir;
  int workers = 0;  // 0: the plan's run.workers
  // Unset runs every stage in order.
  std::optional<Stage> stage;
  // Progress lines on stderr.
  bool verbose = false;
};

struct RunSummary {
  std::vector<Stage> stages_run;
  std::optional<AuditReport> report;  // set when the report stage ran
  // One line per failed attack cell.
  std::vector<std::string> failures;
};

// Runs the requested stages. Each stage reads the checkpoints of the
// previous one under `out_dir` and throws kDependency naming the missing
// stage when they are absent or belong to a different plan. Attack cells
// fail independently; their errors are listed in the summary and the
// report.
RunSummary RunPlan(const ExperimentPlan& plan, const RunOptions& options);

// Calls fn(0..n-1) on up to `workers` threads. Exceptions are rethrown
// after all jobs finish (the one with the lowest index).
void ParallelFor(size_t n, int workers, const std::function<void(size_t)>& fn);

// Checkpoint layout of one repetition.
std::filesystem::path RepetitionDir(const std::filesystem::path& out_dir,
                                    int repetition);
std::filesystem::path ModelPath(const std::filesystem::path& out_dir,
                                int repetition, std::string_view role,
                                std::string_view model);

void SaveAttackOutcome(const std::filesystem::path& path,
                       const AttackOutcome& outcome);
AttackOutcome LoadAttackOutcome(const std::filesystem::path& path);

}  // namespace leakaudit

#endif  // LEAKAUDIT_PIPELINE_H_

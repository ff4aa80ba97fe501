// Copyright 2026 The Midsmith Authors
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

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "midsmith/core/types.hpp"
#include "midsmith/eval/metrics.hpp"
#include "midsmith/eval/turn_log.hpp"

namespace midsmith {

class Engine;
class VqaBackend;

/// Plays every conversation through `engine` in a fresh session whose id is
/// the conversation id and whose seed is derived from it. At most
/// `parallelism` conversations run at once; logs come back ordered by
/// (dataset order, round). A conversation with any failing turn is reported
/// in `failures` and contributes no logs.
InferenceRun run_inference(const std::vector<ConversationRecord>& dataset, const Engine& engine,
                           std::size_t parallelism = 1);

struct EvalResult {
  InferenceRun run;
  MsReport ms;
  std::optional<CoherenceReport> coherence;
};

/// Scores existing logs. Coherence is computed only when `vqa` is given.
EvalResult score_run(InferenceRun run, const std::vector<ConversationRecord>& dataset,
                     VqaBackend* vqa, std::size_t parallelism = 1);

/// run_inference followed by score_run.
EvalResult evaluate_dataset(const std::vector<ConversationRecord>& dataset, const Engine& engine,
                            VqaBackend* vqa, std::size_t parallelism = 1);

/// logs.jsonl, report.json and report.txt under `dir`.
void write_eval_outputs(const EvalResult& result, const std::filesystem::path& dir);

}  // namespace midsmith

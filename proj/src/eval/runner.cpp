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

#include "midsmith/eval/runner.hpp"

#include <optional>

#include "midsmith/core/error.hpp"
#include "midsmith/core/parallel.hpp"
#include "midsmith/engine/engine.hpp"
#include "midsmith/eval/report.hpp"

namespace midsmith {

InferenceRun run_inference(const std::vector<ConversationRecord>& dataset, const Engine& engine,
                           std::size_t parallelism) {
  struct Outcome {
    std::vector<TurnLog> logs;
    std::optional<ConversationFailure> failure;
  };
  std::vector<Outcome> outcomes(dataset.size());

  parallel_for(dataset.size(), parallelism, [&](std::size_t i) {
    const auto& record = dataset[i];
    auto session = engine.new_session(record.id, derive_seed(record.id));
    Outcome out;
    try {
      for (std::size_t t = 0; t < record.turns.size(); ++t) {
        const auto& turn = record.turns[t];
        const auto result = engine.turn(session, turn.user);
        std::optional<std::string> image_ref;
        std::optional<std::string> prompt;
        if (result.modality == Modality::Image) {
          prompt = result.text;
          if (result.image) image_ref = result.image->content_address;
        }
        out.logs.push_back(make_turn_log(record.id, static_cast<int>(t) + 1, scenario_of(turn),
                                         result.modality, image_ref, prompt));
      }
    } catch (const Error& e) {
      out.logs.clear();
      out.failure = ConversationFailure{record.id, e.what()};
    }
    outcomes[i] = std::move(out);
  });

  InferenceRun run;
  for (auto& o : outcomes) {
    for (auto& log : o.logs) run.logs.push_back(std::move(log));
    if (o.failure) run.failures.push_back(std::move(*o.failure));
  }
  return run;
}

EvalResult score_run(InferenceRun run, const std::vector<ConversationRecord>& dataset,
                     VqaBackend* vqa, std::size_t parallelism) {
  EvalResult out;
  out.ms = ms_accuracy(run.logs, run.failures.size());
  if (vqa) out.coherence = coherence_score(run.logs, dataset, *vqa, parallelism);
  out.run = std::move(run);
  return out;
}

EvalResult evaluate_dataset(const std::vector<ConversationRecord>& dataset, const Engine& engine,
                            VqaBackend* vqa, std::size_t parallelism) {
  return score_run(run_inference(dataset, engine, parallelism), dataset, vqa, parallelism);
}

void write_eval_outputs(const EvalResult& result, const std::filesystem::path& dir) {
  write_report(result.ms, result.coherence ? &*result.coherence : nullptr, dir);
  save_inference_run(result.run, dir / "logs.jsonl");
}

}  // namespace midsmith

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

#include "midsmith/eval/turn_log.hpp"

#include "midsmith/core/dataset.hpp"
#include "midsmith/core/error.hpp"

namespace midsmith {

using nlohmann::json;
using nlohmann::ordered_json;

TurnLog make_turn_log(std::string conversation_id, int round, ModalityScenario scenario,
                      Modality predicted, std::optional<std::string> image_ref,
                      std::optional<std::string> drawing_prompt) {
  TurnLog log;
  log.conversation_id = std::move(conversation_id);
  log.round = round;
  log.scenario = scenario;
  log.predicted_modality = predicted;
  log.expected_modality = scenario.output;
  log.correct = predicted == scenario.output;
  log.image_ref = std::move(image_ref);
  log.drawing_prompt = std::move(drawing_prompt);
  return log;
}

ordered_json to_json(const TurnLog& log) {
  ordered_json j;
  j["status"] = "ok";
  j["conversation_id"] = log.conversation_id;
  j["round"] = log.round;
  j["scenario"] = std::string(to_string(log.scenario));
  j["predicted_modality"] = std::string(to_string(log.predicted_modality));
  j["expected_modality"] = std::string(to_string(log.expected_modality));
  j["correct"] = log.correct;
  if (log.image_ref) j["image_ref"] = *log.image_ref;
  if (log.drawing_prompt) j["drawing_prompt"] = *log.drawing_prompt;
  return j;
}

TurnLog turn_log_from_json(const json& j) {
  TurnLog log;
  log.conversation_id = j.at("conversation_id").get<std::string>();
  log.round = j.at("round").get<int>();
  log.scenario = parse_scenario(j.at("scenario").get<std::string>());
  log.predicted_modality = parse_modality(j.at("predicted_modality").get<std::string>());
  log.expected_modality = parse_modality(j.at("expected_modality").get<std::string>());
  log.correct = j.at("correct").get<bool>();
  if (j.contains("image_ref")) log.image_ref = j["image_ref"].get<std::string>();
  if (j.contains("drawing_prompt")) log.drawing_prompt = j["drawing_prompt"].get<std::string>();
  if (log.round < 1) throw Error(ErrorKind::InvariantViolation, "round must be >= 1");
  if (log.expected_modality != log.scenario.output) {
    throw Error(ErrorKind::InvariantViolation, "expected_modality disagrees with scenario");
  }
  if (log.correct != (log.predicted_modality == log.expected_modality)) {
    throw Error(ErrorKind::InvariantViolation, "correct flag disagrees with modalities");
  }
  return log;
}

void save_inference_run(const InferenceRun& run, const std::filesystem::path& path) {
  std::string out;
  for (const auto& log : run.logs) {
    out += to_json(log).dump();
    out += '\n';
  }
  for (const auto& f : run.failures) {
    ordered_json j;
    j["status"] = "failed";
    j["conversation_id"] = f.conversation_id;
    j["error"] = f.error;
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

InferenceRun load_inference_run(const std::filesystem::path& path) {
  InferenceRun run;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    try {
      const auto j = json::parse(line);
      if (j.value("status", std::string("ok")) == "failed") {
        run.failures.push_back(
            {j.at("conversation_id").get<std::string>(), j.value("error", std::string())});
      } else {
        run.logs.push_back(turn_log_from_json(j));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedLine,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::MalformedLine,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return run;
}

}  // namespace midsmith

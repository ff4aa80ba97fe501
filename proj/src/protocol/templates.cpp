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

#include "midsmith/protocol/templates.hpp"

#include <json.hpp>

#include "midsmith/core/dataset.hpp"
#include "midsmith/core/error.hpp"

namespace midsmith {

namespace {

constexpr std::string_view kTrainingPrompt =
    "Please first identify the intention of the user, if it is to draw please append <draw> "
    "before the output";

constexpr std::string_view kCaptionPrompt = "Please describe this image in detail.";

constexpr std::string_view kCorrectionPrompt =
    "Review your previous output for the user query below. Judge it by these rules:\n"
    "1. According to the history and the current user query, did the output correctly "
    "identify whether the user wants to draw or to talk?\n"
    "2. If the user wants to talk, does the output follow the user's instruction coherently?\n"
    "3. If the user wants to draw, is the output <draw> followed by a descriptive prompt that "
    "an image generation model can use directly?\n"
    "If the output satisfies all three rules, output '###Correct'. If not, output "
    "'###Wrong###', the rule it violates and an explanation, then 'Correct Solution:' followed "
    "by a correct output for the current user query.";

// Instruction text reproduced as published, including its spelling.
constexpr std::string_view kTeacherInstruction =
    "You are an expert in providing feedback on the output of an Multi-modal Large Language "
    "Model that supports multi-turn multi-modal dialog and image generation, the behaviour of "
    "the assitant is listed as follows:\n"
    "1. The input may contains images. It is specailly identified by <img> and </img>  where "
    "the detailed description of the image lies between them.\n"
    "2. For the input of an user, it will first identify the whether the intention of the user "
    "is draw or talk, if it is to draw it will append <draw> before the output.\n"
    "3. If the user intention is to talk, then the output of the assistant in current turn "
    "should be coherent in response to the user query.\n"
    "4. If the user intention is to draw, then the output of the assistant in current turn "
    "should be <draw> and a detailed description prompt in response to the user's need. The "
    "prompt should be able to be directly sent into the image generation model to produce high "
    "quality image.\n"
    "You are given the history conversation H, user query in current turn Q, output of the "
    "assistant in current turn R_pre and a suitable output given by human expert R_gt.\n"
    "You need to make the judgements as following rules:\n"
    "1. According to the history and the current user query, make judgements on whether the "
    "model correctly identifies the use's intention.\n"
    "2. If the intention of the user is to talk, make judgements on whether the output of the "
    "assistant following the instructions of the user coherently.\n"
    "3. If the intention of the user is to draw, make judgements on whether the output prompt "
    "is indeed a descriptive text that is suitable for a image generation model to generate "
    "images.\n"
    "If the output satisfy all the three criteria, output '###Correct'. If not, output "
    "'###Wrong###' and the specific criteria it violates followed by an explanation and "
    "provide a correct output for current user query.";

constexpr std::string_view kTeacherExamples =
    "Example 1\n"
    "History: (empty)\n"
    "Question: I'd like to know more about rockets. Could you draw me a picture of rockets?\n"
    "Original Output: A rocket is a large, powerful, and complex machine that is used to "
    "transport people and goods into space. It is usually made of steel and aluminum and is "
    "equipped with engines, fuel tanks, guidance systems, and other equipment. The picture "
    "shows a large rocket with a long tail, flying high in the sky.\n"
    "Correction: ###Wrong### The output violates rule 3. The assistant's description misses "
    "the main point of the asking for a visual image of a rocket.\n"
    "Correct Solution: <draw>A rocket propelled upward by burning flames is moving through "
    "space, the Milky Way and stars in the background, the shot is panoramic, and the style is "
    "cartoonish.\n"
    "\n"
    "Example 2\n"
    "History: (empty)\n"
    "Question: What is the tallest mountain in the world?\n"
    "Original Output: <draw>A snowy mountain peak under a blue sky, the lens is panoramic, the "
    "style is realistic.\n"
    "Correction: ###Wrong### The output violates rule 1. The user asks a factual question and "
    "expects a text answer, but the assistant switched to drawing.\n"
    "Correct Solution: The tallest mountain in the world is Mount Everest, about 8,849 meters "
    "above sea level, on the border between Nepal and China.\n"
    "\n"
    "Example 3\n"
    "History: (empty)\n"
    "Question: Draw a red apple on a wooden table.\n"
    "Original Output: <draw>A shiny red apple on a rustic wooden table, soft window light, the "
    "lens is close-up, the style is realistic.\n"
    "Correction: ###Correct";

constexpr std::string_view kIntentJudgePrompt =
    "Decide whether the user instruction below, read in the context of the conversation so "
    "far, asks the assistant to produce an image or a text reply. Answer with exactly one "
    "word: IMAGE or TEXT.";

}  // namespace

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.training_prompt = kTrainingPrompt;
  t.correction_prompt = kCorrectionPrompt;
  t.caption_prompt = kCaptionPrompt;
  t.teacher_fewshot_prompt = std::string(kTeacherInstruction) + "\n\n" + std::string(kTeacherExamples);
  t.intent_judge_prompt = kIntentJudgePrompt;
  return t;
}

PromptTemplates PromptTemplates::load_overrides(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, "templates " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorKind::InvalidConfig, "templates " + path.string() + ": expected an object");
  }
  PromptTemplates t = defaults();
  for (const auto& [name, value] : j.items()) {
    if (!value.is_string()) {
      throw Error(ErrorKind::InvalidConfig, "template '" + name + "' must be a string");
    }
    auto text = value.get<std::string>();
    if (name == "training_prompt") {
      t.training_prompt = std::move(text);
    } else if (name == "correction_prompt") {
      t.correction_prompt = std::move(text);
    } else if (name == "caption_prompt") {
      t.caption_prompt = std::move(text);
    } else if (name == "teacher_fewshot_prompt") {
      t.teacher_fewshot_prompt = std::move(text);
    } else if (name == "intent_judge_prompt") {
      t.intent_judge_prompt = std::move(text);
    } else {
      throw Error(ErrorKind::InvalidConfig, "unknown template '" + name + "'");
    }
  }
  t.validate();
  return t;
}

void PromptTemplates::validate() const {
  if (training_prompt.find(kDrawToken) == std::string::npos) {
    throw Error(ErrorKind::InvalidConfig, "training_prompt must mention <draw>");
  }
  if (teacher_fewshot_prompt.find(kCorrectMarker) == std::string::npos ||
      teacher_fewshot_prompt.find(kWrongMarker) == std::string::npos) {
    throw Error(ErrorKind::InvalidConfig,
                "teacher_fewshot_prompt must contain both ###Correct and ###Wrong###");
  }
  if (correction_prompt.empty() || caption_prompt.empty() || intent_judge_prompt.empty()) {
    throw Error(ErrorKind::InvalidConfig, "templates must be non-empty");
  }
}

}  // namespace midsmith

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

#include <gtest/gtest.h>

#include <random>

#include "midsmith/core/dataset.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/protocol/output.hpp"
#include "midsmith/protocol/requests.hpp"
#include "midsmith/protocol/templates.hpp"
#include "midsmith/protocol/verdict.hpp"
#include "support.hpp"

using namespace midsmith;
using midsmith::testing::kind_of;
using midsmith::testing::TempDir;

// --- draw token ------------------------------------------------------------

TEST(Output, DrawTokenAtStartIsImage) {
  const auto p = parse_output("  \n<draw>  a red barn at dawn \n");
  EXPECT_EQ(p.modality, Modality::Image);
  EXPECT_EQ(p.text, "a red barn at dawn");
  EXPECT_FALSE(p.warning);
}

TEST(Output, PlainTextIsText) {
  const auto p = parse_output("The barn is red.");
  EXPECT_EQ(p.modality, Modality::Text);
  EXPECT_EQ(p.text, "The barn is red.");
}

TEST(Output, LateDrawTokenStaysTextWithWarning) {
  const auto p = parse_output("Sure! <draw>a barn");
  EXPECT_EQ(p.modality, Modality::Text);
  EXPECT_EQ(p.text, "Sure! <draw>a barn");
  ASSERT_TRUE(p.warning);
}

TEST(Output, EmptyOutputsRejected) {
  EXPECT_EQ(kind_of([] { parse_output(""); }), ErrorKind::EmptyOutput);
  EXPECT_EQ(kind_of([] { parse_output(" \t\n"); }), ErrorKind::EmptyOutput);
  EXPECT_EQ(kind_of([] { parse_output("<draw>"); }), ErrorKind::EmptyOutput);
  EXPECT_EQ(kind_of([] { parse_output("<draw>   "); }), ErrorKind::EmptyOutput);
}

TEST(Output, SimilarTagIsNotTheToken) {
  EXPECT_EQ(parse_output("<drawing>x").modality, Modality::Text);
  EXPECT_EQ(parse_output("<Draw>x").modality, Modality::Text);
}

TEST(Output, RenderPrefixesToken) {
  EXPECT_EQ(render_output({Modality::Image, "a cat", std::nullopt}), "<draw>a cat");
  EXPECT_EQ(render_output({Modality::Text, "hi", std::nullopt}), "hi");
  EXPECT_FALSE(is_valid({Modality::Text, " padded", std::nullopt}));
  EXPECT_FALSE(is_valid({Modality::Image, "<draw>x", std::nullopt}));
  EXPECT_FALSE(is_valid({Modality::Image, "", std::nullopt}));
}

// Property: parse(render(x)) == x for every valid output.
TEST(OutputProperty, RoundTrip10k) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> atoms = {"x", " ", "\n", "<draw>", "猫", "<", ">", "draw", "!"};
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) s += atoms[rng() % atoms.size()];
    ParsedAssistantOutput p{rng() % 2 ? Modality::Image : Modality::Text, std::string(trim(s)),
                            std::nullopt};
    if (!is_valid(p)) continue;
    ++checked;
    ASSERT_EQ(parse_output(render_output(p)), p) << s;
  }
  EXPECT_GT(checked, 5000);
}

// --- teacher verdicts ------------------------------------------------------

TEST(Verdict, CorrectMarker) {
  EXPECT_EQ(parse_teacher_verdict("###Correct").kind, CorrectionVerdict::Kind::Correct);
  EXPECT_EQ(parse_teacher_verdict("  ###Correct. Nothing to fix.\n").kind,
            CorrectionVerdict::Kind::Correct);
}

TEST(Verdict, WrongWithRuleAndSolution) {
  const auto v = parse_teacher_verdict(
      "###Wrong### The output violates Rule 2: the prompt drifted.\n"
      "Correct solution: <draw>a teapot, same pose, now blue");
  EXPECT_EQ(v.kind, CorrectionVerdict::Kind::Wrong);
  EXPECT_EQ(v.violated_rule, 2);
  EXPECT_EQ(v.explanation, "the prompt drifted.");
  EXPECT_EQ(v.corrected_output, "<draw>a teapot, same pose, now blue");
}

TEST(Verdict, Malformed) {
  EXPECT_EQ(kind_of([] { parse_teacher_verdict("Looks right."); }), ErrorKind::UnrecognizedVerdict);
  EXPECT_EQ(kind_of([] { parse_teacher_verdict(""); }), ErrorKind::UnrecognizedVerdict);
  EXPECT_EQ(kind_of([] { parse_teacher_verdict("###Wrong### rule 1. bad"); }),
            ErrorKind::MissingCorrection);
  EXPECT_EQ(kind_of([] { parse_teacher_verdict("###Wrong### rule 1.\nCorrect Solution:   "); }),
            ErrorKind::MissingCorrection);
  EXPECT_EQ(kind_of([] { parse_teacher_verdict("###Wrong### bad.\nCorrect Solution: x"); }),
            ErrorKind::MissingRule);
  EXPECT_EQ(kind_of([] { parse_teacher_verdict("###Wrong### rule 10.\nCorrect Solution: x"); }),
            ErrorKind::MissingRule);
  EXPECT_EQ(kind_of([] { parse_teacher_verdict("###Wrong### rule 0.\nCorrect Solution: x"); }),
            ErrorKind::MissingRule);
}

TEST(Verdict, RenderParsesBack) {
  CorrectionVerdict v;
  v.kind = CorrectionVerdict::Kind::Wrong;
  v.violated_rule = 1;
  v.explanation = "Should have drawn.";
  v.corrected_output = "<draw>a lighthouse";
  EXPECT_EQ(parse_teacher_verdict(render_verdict(v)), v);
  EXPECT_EQ(parse_teacher_verdict(render_verdict(CorrectionVerdict::correct())),
            CorrectionVerdict::correct());
  EXPECT_EQ(verdict_from_json(nlohmann::json(to_json(v))), v);
}

// --- templates -------------------------------------------------------------

TEST(Templates, DefaultsCarryRequiredText) {
  const auto t = PromptTemplates::defaults();
  EXPECT_EQ(t.training_prompt,
            "Please first identify the intention of the user, if it is to draw please append "
            "<draw> before the output");
  EXPECT_NE(t.teacher_fewshot_prompt.find("###Correct"), std::string::npos);
  EXPECT_NE(t.teacher_fewshot_prompt.find("###Wrong###"), std::string::npos);
  EXPECT_NO_THROW(t.validate());
}

TEST(Templates, OverridesAndUnknownNames) {
  TempDir dir;
  write_file(dir / "t.json", R"({"caption_prompt": "Caption it."})");
  const auto t = PromptTemplates::load_overrides(dir / "t.json");
  EXPECT_EQ(t.caption_prompt, "Caption it.");
  EXPECT_EQ(t.training_prompt, PromptTemplates::defaults().training_prompt);

  write_file(dir / "u.json", R"({"nonsense_prompt": "x"})");
  EXPECT_EQ(kind_of([&] { PromptTemplates::load_overrides(dir / "u.json"); }),
            ErrorKind::InvalidConfig);

  write_file(dir / "v.json", R"({"training_prompt": "no token here"})");
  EXPECT_EQ(kind_of([&] { PromptTemplates::load_overrides(dir / "v.json"); }),
            ErrorKind::InvalidConfig);
}

// --- requests --------------------------------------------------------------

TEST(Requests, InferenceRequestShape) {
  const auto t = PromptTemplates::defaults();
  std::vector<ChatMessage> history = {
      {Role::User, {ContentPart::text("hi")}},
      {Role::Assistant, {ContentPart::text("hello")}},
  };
  const std::string addr(64, 'b');
  const auto r = build_inference_request(t, history, {"edit this", addr});
  EXPECT_EQ(r.system, t.training_prompt);
  ASSERT_EQ(r.messages.size(), 3u);
  EXPECT_EQ(r.messages[2].parts.size(), 2u);
  EXPECT_EQ(r.messages[2].parts[1], ContentPart::image_ref(addr));

  history.pop_back();
  EXPECT_EQ(kind_of([&] { build_inference_request(t, history, {"x", std::nullopt}); }),
            ErrorKind::NonAlternatingHistory);
  history = {{Role::Assistant, {ContentPart::text("a")}}, {Role::User, {ContentPart::text("b")}}};
  EXPECT_EQ(kind_of([&] { build_inference_request(t, history, {"x", std::nullopt}); }),
            ErrorKind::NonAlternatingHistory);
}

TEST(Requests, CorrectionComposite) {
  auto t = PromptTemplates::defaults();
  t.correction_prompt = "PC";
  const auto r = build_correction_request(t, "q?", "r1");
  ASSERT_EQ(r.messages.size(), 1u);
  EXPECT_FALSE(r.system);
  EXPECT_EQ(r.messages[0].text(), "PC\n\nQuestion: q?\n\nOriginal Output: r1\n\nCorrection:");
  EXPECT_EQ(kind_of([&] { build_correction_request(t, "", "r"); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { build_correction_request(t, "q", " "); }), ErrorKind::InvalidArgument);
}

TEST(Requests, TeacherCompositeHasHistory) {
  auto t = PromptTemplates::defaults();
  t.teacher_fewshot_prompt = "PT";
  EXPECT_EQ(build_teacher_request(t, "q", "r").messages[0].text(),
            "PT\n\nHistory: (empty)\n\nQuestion: q\n\nOriginal Output: r\n\nCorrection:");
  EXPECT_EQ(build_teacher_request(t, "q", "r", "User: a").messages[0].text(),
            "PT\n\nHistory: User: a\n\nQuestion: q\n\nOriginal Output: r\n\nCorrection:");
}

TEST(Requests, UserTurnRendering) {
  EXPECT_EQ(render_user_turn({"hi", std::nullopt}), "hi");
  EXPECT_EQ(render_user_turn({"hi", std::string(64, 'c')}), "<img>" + std::string(64, 'c') + "</img>hi");
}

TEST(Requests, IntentVerdict) {
  EXPECT_EQ(parse_intent_verdict("IMAGE"), Modality::Image);
  EXPECT_EQ(parse_intent_verdict(" text."), Modality::Text);
  EXPECT_EQ(parse_intent_verdict("**Image**"), Modality::Image);
  EXPECT_EQ(kind_of([] { parse_intent_verdict("maybe"); }), ErrorKind::MalformedResponse);
  EXPECT_EQ(kind_of([] { parse_intent_verdict(""); }), ErrorKind::MalformedResponse);
}

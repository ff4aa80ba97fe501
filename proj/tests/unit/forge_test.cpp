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

#include <set>

#include "midsmith/backends/mock.hpp"
#include "midsmith/core/dataset.hpp"
#include "midsmith/core/digest.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/forge/forge.hpp"
#include "midsmith/protocol/output.hpp"
#include "midsmith/protocol/requests.hpp"
#include "support.hpp"

using namespace midsmith;
using midsmith::testing::fixture;
using midsmith::testing::kind_of;
using midsmith::testing::TempDir;

namespace {

InstructionSample single(const std::string& user, const std::string& reply,
                         SampleSource src = SampleSource::DO) {
  return {{{{user, std::nullopt}, reply}}, src};
}

std::vector<InstructionSample> singles(const std::string& prefix, std::size_t n,
                                       SampleSource src) {
  std::vector<InstructionSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(single(prefix + std::to_string(i),
                         i % 2 ? "<draw>picture " + std::to_string(i) : "reply " + std::to_string(i),
                         src));
  }
  return out;
}

std::string last_user(const ChatRequest& r) { return r.messages.back().text(); }

std::string image_of(const ChatRequest& r) {
  for (const auto& p : r.messages.back().parts) {
    if (p.kind == ContentPart::Kind::ImageRef) return p.value;
  }
  return "";
}

}  // namespace

// --- compositions ----------------------------------------------------------

TEST(Compositions, CountsAndOrder) {
  for (int t = 1; t <= kMaxCompositionTurns; ++t) {
    const auto all = enumerate_compositions(t);
    std::size_t expected = 1;
    for (int i = 0; i < t; ++i) expected *= 4;
    ASSERT_EQ(all.size(), expected);
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
    EXPECT_EQ(std::set<CompositionId>(all.begin(), all.end()).size(), expected);
  }
  const auto two = enumerate_compositions(2);
  EXPECT_EQ(two.front().render(), "T->T,T->T");
  EXPECT_EQ(two[1].render(), "T->T,T->I");
  EXPECT_EQ(two.back().render(), "IT->I,IT->I");
  EXPECT_EQ(kind_of([] { enumerate_compositions(0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { enumerate_compositions(7); }), ErrorKind::InvalidArgument);
}

TEST(Compositions, ParseRender) {
  const auto c = CompositionId::parse("T->I, IT->I,IT->T");
  EXPECT_EQ(c.render(), "T->I,IT->I,IT->T");
  EXPECT_EQ(CompositionId::parse(c.render()), c);
  EXPECT_THROW(CompositionId::parse(""), Error);
  EXPECT_THROW(CompositionId::parse("T->X"), Error);
  EXPECT_EQ(kind_of([] { CompositionId::parse("T->T,T->T,T->T,T->T,T->T,T->T,T->T"); }),
            ErrorKind::InvalidArgument);
}

// --- meta-prompts ----------------------------------------------------------

TEST(MetaPrompt, ContainsEveryPart) {
  const auto vocab = Vocabulary::load(fixture("vocab.json"));
  MetaPromptSpec spec;
  spec.composition = CompositionId::parse("T->I,IT->I,IT->T");
  spec.topic = "animals";
  spec.edit_type = "change color";
  spec.icl_samples = {{std::string(64, 'a'), "a fox in snow"}, {std::string(64, 'b'), "a red kite"}};
  const auto p = build_meta_prompt(spec, vocab);
  EXPECT_NE(p.find("<draw>"), std::string::npos);
  EXPECT_NE(p.find("Topic: animals"), std::string::npos);
  EXPECT_NE(p.find("Image editing method: change color"), std::string::npos);
  EXPECT_NE(p.find("in English"), std::string::npos);
  EXPECT_NE(p.find("Turn 1 [T->I]"), std::string::npos);
  EXPECT_NE(p.find("Turn 2 [IT->I]"), std::string::npos);
  EXPECT_NE(p.find("Turn 3 [IT->T]"), std::string::npos);
  EXPECT_EQ(p.find("Turn 4"), std::string::npos);
  EXPECT_NE(p.find("altered as little as possible"), std::string::npos);
  EXPECT_NE(p.find("Example 1: a fox in snow"), std::string::npos);
  EXPECT_NE(p.find("Example 2: a red kite"), std::string::npos);
  EXPECT_EQ(build_meta_prompt(spec, vocab), p);

  spec.language = Language::Cn;
  spec.edit_type.reset();
  spec.icl_samples.clear();
  const auto q = build_meta_prompt(spec, vocab);
  EXPECT_NE(q.find("in Chinese"), std::string::npos);
  EXPECT_EQ(q.find("Image editing method"), std::string::npos);
  EXPECT_EQ(q.find("Example 1"), std::string::npos);
}

TEST(MetaPrompt, VocabularyMiss) {
  const auto vocab = Vocabulary::load(fixture("vocab.json"));
  MetaPromptSpec spec;
  spec.composition = CompositionId::parse("T->T");
  spec.topic = "astronomy";
  EXPECT_EQ(kind_of([&] { build_meta_prompt(spec, vocab); }), ErrorKind::VocabularyMiss);
  spec.topic = "animals";
  spec.edit_type = "rotate";
  EXPECT_EQ(kind_of([&] { build_meta_prompt(spec, vocab); }), ErrorKind::VocabularyMiss);
}

// --- recaptioning and in-context samples ----------------------------------

TEST(Recaption, KeepsOrderAndCollectsFailures) {
  const std::vector<std::string> refs = {sha256_hex("1"), sha256_hex("2"), sha256_hex("3"),
                                         sha256_hex("4")};
  ChatScript s;
  s.responder = [&](const ChatRequest& r) -> std::optional<std::string> {
    const auto img = image_of(r);
    if (img == refs[1]) throw Error(ErrorKind::Timeout, "slow");
    if (img == refs[2]) return "   ";
    return " caption of " + img.substr(0, 4) + "\n";
  };
  MockChat chat(s);
  const auto out = recaption_corpus(refs, chat, PromptTemplates::defaults(), 3);
  ASSERT_EQ(out.pairs.size(), 2u);
  EXPECT_EQ(out.pairs[0], (CaptionedPair{refs[0], "caption of " + refs[0].substr(0, 4)}));
  EXPECT_EQ(out.pairs[1].image_ref, refs[3]);
  ASSERT_EQ(out.failures.size(), 2u);
  EXPECT_EQ(out.failures[0].item, refs[1]);
  EXPECT_NE(out.failures[0].error.find("Timeout"), std::string::npos);
  EXPECT_EQ(out.failures[1].item, refs[2]);
}

TEST(IclSamples, SeededWithoutReplacement) {
  std::vector<CaptionedPair> corpus;
  for (int i = 0; i < 50; ++i) corpus.push_back({sha256_hex(std::to_string(i)), "c" + std::to_string(i)});
  const auto a = select_icl_samples(corpus, 10, 7);
  EXPECT_EQ(a, select_icl_samples(corpus, 10, 7));
  EXPECT_NE(a, select_icl_samples(corpus, 10, 8));
  std::set<std::string> seen;
  for (const auto& p : a) seen.insert(p.caption);
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(select_icl_samples(corpus, 50, 1).size(), 50u);
  EXPECT_TRUE(select_icl_samples(corpus, 0, 1).empty());
  EXPECT_EQ(kind_of([&] { select_icl_samples(corpus, 51, 1); }), ErrorKind::InsufficientCorpus);
}

TEST(IclSamples, RoughlyUniform) {
  std::vector<CaptionedPair> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back({sha256_hex(std::to_string(i)), std::to_string(i)});
  std::map<std::string, int> hits;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    for (const auto& p : select_icl_samples(corpus, 2, seed)) ++hits[p.caption];
  }
  // Each item expected 800 times; allow a wide margin.
  for (const auto& [k, v] : hits) {
    EXPECT_GT(v, 650) << k;
    EXPECT_LT(v, 950) << k;
  }
}

// --- instruction samples ---------------------------------------------------

TEST(Instructions, ValidationAndJson) {
  TempDir dir;
  auto s = single("draw a cat", "<draw>a cat");
  s.turns.push_back({{"now blue", sha256_hex("x")}, "<draw>a blue cat"});
  EXPECT_NO_THROW(validate(s));
  save_instruction_samples({s}, dir / "s.jsonl");
  const auto back = load_instruction_samples(dir / "s.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], s);
  const auto j = nlohmann::json::parse(read_lines(dir / "s.jsonl")[0]);
  EXPECT_EQ(j["source"], "d_o");
  EXPECT_EQ(j["turns"][0]["assistant"], "<draw>a cat");

  EXPECT_EQ(kind_of([] { validate(InstructionSample{}); }), ErrorKind::InvariantViolation);
  EXPECT_EQ(kind_of([] { validate(single("x", "<draw>")); }), ErrorKind::InvariantViolation);
  EXPECT_EQ(kind_of([] { validate(single("", "y")); }), ErrorKind::InvariantViolation);
  auto bad_ref = single("x", "y");
  bad_ref.turns[0].user.image_ref = "not-an-address";
  EXPECT_EQ(kind_of([&] { validate(bad_ref); }), ErrorKind::InvariantViolation);
  EXPECT_EQ(parse_sample_source("dialogben_train"), SampleSource::DialogbenTrain);
  EXPECT_EQ(kind_of([] { parse_sample_source("d_x"); }), ErrorKind::InvalidArgument);
}

TEST(Mixer, GroupsDisjointTurns) {
  const auto d_o = singles("o", 10, SampleSource::DO);
  const auto d_p = singles("p", 8, SampleSource::DP);
  const auto mixed = mix_pseudo_multiturn(d_o, d_p, 4, 4, 11);
  ASSERT_EQ(mixed.size(), 4u);
  std::set<std::string> used;
  for (const auto& m : mixed) {
    EXPECT_EQ(m.source, SampleSource::DPM);
    ASSERT_EQ(m.turns.size(), 4u);
    for (const auto& t : m.turns) used.insert(t.user.text);
    EXPECT_NO_THROW(validate(m));
  }
  EXPECT_EQ(used.size(), 16u);
  EXPECT_EQ(mix_pseudo_multiturn(d_o, d_p, 4, 4, 11), mixed);
  EXPECT_NE(mix_pseudo_multiturn(d_o, d_p, 4, 4, 12), mixed);
}

TEST(Mixer, Errors) {
  const auto d_o = singles("o", 3, SampleSource::DO);
  EXPECT_EQ(kind_of([&] { mix_pseudo_multiturn(d_o, {}, 2, 2, 1); }), ErrorKind::PoolTooSmall);
  EXPECT_EQ(kind_of([&] { mix_pseudo_multiturn(d_o, {}, 1, 0, 1); }), ErrorKind::InvalidArgument);
  auto two_turn = d_o;
  two_turn[0].turns.push_back(two_turn[1].turns[0]);
  EXPECT_EQ(kind_of([&] { mix_pseudo_multiturn(two_turn, {}, 1, 1, 1); }),
            ErrorKind::InvalidArgument);
  EXPECT_TRUE(mix_pseudo_multiturn(d_o, {}, 0, 2, 1).empty());
}

TEST(ExportMix, ManifestAndDialogbenSwitch) {
  TempDir dir;
  TrainingParts parts;
  parts.d_o = singles("o", 3, SampleSource::DO);
  parts.d_p = singles("p", 2, SampleSource::DP);
  parts.d_pm = mix_pseudo_multiturn(parts.d_o, parts.d_p, 1, 2, 3);
  parts.d_t = singles("t", 4, SampleSource::DialogbenTrain);

  export_training_mix(parts, false, dir / "mix.jsonl");
  auto m = nlohmann::json::parse(read_file(dir / "mix.jsonl.manifest.json"));
  EXPECT_EQ(m["total"], 6);
  EXPECT_EQ(m["counts"]["dialogben_train"], 0);
  EXPECT_EQ(m["counts"]["d_pm"], 1);
  EXPECT_EQ(m["file"], "mix.jsonl");
  EXPECT_EQ(m["include_dialogben"], false);
  EXPECT_EQ(m["sha256"], sha256_hex(read_file(dir / "mix.jsonl")));
  EXPECT_EQ(load_instruction_samples(dir / "mix.jsonl").size(), 6u);

  export_training_mix(parts, true, dir / "all.jsonl");
  m = nlohmann::json::parse(read_file(dir / "all.jsonl.manifest.json"));
  EXPECT_EQ(m["total"], 10);
  EXPECT_EQ(m["counts"]["dialogben_train"], 4);
}

TEST(ExportMix, StrayDialogbenSamplesAreDropped) {
  TempDir dir;
  TrainingParts parts;
  parts.d_o = singles("o", 2, SampleSource::DO);
  parts.d_o.push_back(single("leak", "x", SampleSource::DialogbenTrain));
  export_training_mix(parts, false, dir / "m.jsonl");
  for (const auto& s : load_instruction_samples(dir / "m.jsonl")) {
    EXPECT_NE(s.source, SampleSource::DialogbenTrain);
  }
  EXPECT_EQ(read_lines(dir / "m.jsonl").size(), 2u);
}

// --- intent filter ---------------------------------------------------------

TEST(IntentFilter, KeepsRejectsAndParks) {
  const auto ds = load_dataset(fixture("dialogben_mini.jsonl"));
  ASSERT_GE(ds.size(), 4u);
  // Truthful judge except: record 1 round 2 disputed, record 2 undecidable.
  std::map<std::string, std::string> answers;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t t = 0; t < ds[r].turns.size(); ++t) {
      const auto& turn = ds[r].turns[t];
      std::string a = turn.expected_modality == Modality::Image ? "Image" : "Text";
      if (r == 1 && t == 1) a = a == "Image" ? "Text" : "Image";
      if (r == 2 && t == 0) a = "unsure";
      answers[render_user_turn(turn.user)] = a;
    }
  }
  std::vector<std::string> histories;
  std::mutex mu;
  ChatScript s;
  s.responder = [&](const ChatRequest& req) -> std::optional<std::string> {
    const auto text = last_user(req);
    const auto pos = text.find("\n\nInstruction: ");
    const auto end = text.rfind("\n\nAnswer:");
    const auto instr = text.substr(pos + 15, end - pos - 15);
    if (instr == render_user_turn(ds[0].turns[1].user)) {
      std::lock_guard lock(mu);
      histories.push_back(text);
    }
    return answers.at(instr);
  };
  MockChat judge(s);
  const auto out = filter_intent_mismatch(ds, judge, PromptTemplates::defaults(), 2);
  EXPECT_EQ(out.kept.size() + out.rejected.size() + out.undecided.size(), ds.size());
  ASSERT_EQ(out.rejected.size(), 1u);
  EXPECT_EQ(out.rejected[0].record.id, ds[1].id);
  ASSERT_EQ(out.rejected[0].mismatches.size(), 1u);
  EXPECT_EQ(out.rejected[0].mismatches[0].round, 2);
  EXPECT_EQ(out.rejected[0].mismatches[0].expected, ds[1].turns[1].expected_modality);
  ASSERT_EQ(out.undecided.size(), 1u);
  EXPECT_EQ(out.undecided[0].record.id, ds[2].id);
  EXPECT_EQ(out.kept.front().id, ds[0].id);
  EXPECT_EQ(out.kept[1].id, ds[3].id);

  // The second judge call of record 0 sees the first turn as history.
  ASSERT_EQ(histories.size(), 1u);
  EXPECT_NE(histories[0].find("Conversation so far: User: " + render_user_turn(ds[0].turns[0].user)),
            std::string::npos);
}

// --- correction data -------------------------------------------------------

TEST(Corrections, BuildsAndQuarantines) {
  const std::vector<CorrectionInput> inputs = {
      {"", "draw a cat", "A cat is an animal."},
      {"User: hi\nAssistant: hello", "how are you", "I am fine."},
      {"", "paint a dog", "<draw>a dog"},
      {"", "broken", "x"},
  };
  const auto t = PromptTemplates::defaults();
  ChatScript s;
  s.on_last_user(build_teacher_request(t, inputs[0].question, inputs[0].original_output)
                     .messages[0].text(),
                 "###Wrong### The output violates rule 1. Should draw.\nCorrect Solution: <draw>a cat");
  s.on_last_user(build_teacher_request(t, inputs[1].question, inputs[1].original_output,
                                       inputs[1].history)
                     .messages[0].text(),
                 "###Correct");
  s.on_last_user(build_teacher_request(t, inputs[2].question, inputs[2].original_output)
                     .messages[0].text(),
                 "Looks fine to me");
  s.fail_on_last_user(build_teacher_request(t, inputs[3].question, inputs[3].original_output)
                          .messages[0].text(),
                      ErrorKind::BackendUnavailable);
  MockChat teacher(s);
  const auto out = build_correction_dataset(inputs, teacher, t, 2);
  ASSERT_EQ(out.samples.size(), 2u);
  EXPECT_EQ(out.samples[0].verdict.violated_rule, 1);
  EXPECT_EQ(out.samples[1].verdict, CorrectionVerdict::correct());
  ASSERT_EQ(out.quarantine.size(), 2u);
  EXPECT_EQ(out.quarantine[0].raw, "Looks fine to me");
  EXPECT_NE(out.quarantine[0].error.find("UnrecognizedVerdict"), std::string::npos);
  EXPECT_EQ(out.quarantine[1].raw, "");
  EXPECT_EQ(out.quarantine[1].input, inputs[3]);

  const auto j = nlohmann::json(to_json(out.samples[0]));
  EXPECT_EQ(correction_sample_from_json(j), out.samples[0]);
  EXPECT_EQ(parse_teacher_verdict(j["target"].get<std::string>()), out.samples[0].verdict);
}

TEST(Corrections, InputFileAndCsv) {
  TempDir dir;
  write_file(dir / "in.jsonl",
             R"({"question": "q1", "original_output": "o1"})"
             "\n"
             R"({"history": "h", "question": "q2", "original_output": "o2"})"
             "\n");
  const auto in = load_correction_inputs(dir / "in.jsonl");
  ASSERT_EQ(in.size(), 2u);
  EXPECT_EQ(in[1], (CorrectionInput{"h", "q2", "o2"}));
  write_file(dir / "bad.jsonl", R"({"question": "q1"})""\n");
  EXPECT_EQ(kind_of([&] { load_correction_inputs(dir / "bad.jsonl"); }), ErrorKind::MalformedLine);

  CorrectionVerdict wrong;
  wrong.kind = CorrectionVerdict::Kind::Wrong;
  wrong.violated_rule = 3;
  wrong.explanation = "said \"no\", oddly";
  wrong.corrected_output = "line one\nline two";
  export_review_csv({{"", "a,b", "out", wrong}, {"", "plain", "o", CorrectionVerdict::correct()}},
                    dir / "r.csv");
  EXPECT_EQ(read_file(dir / "r.csv"),
            "index,question,original_output,verdict,rule,corrected_output,explanation\r\n"
            "0,\"a,b\",out,wrong,3,\"line one\nline two\",\"said \"\"no\"\", oddly\"\r\n"
            "1,plain,o,correct,,,\r\n");
}

TEST(SeedData, HandWrittenPromptSamplesLoad) {
  const auto seeds =
      load_instruction_samples(midsmith::testing::fixtures_dir() / ".." / ".." / "data" / "d_p_seed.jsonl");
  ASSERT_EQ(seeds.size(), 10u);
  int draws = 0;
  for (const auto& s : seeds) {
    EXPECT_EQ(s.source, SampleSource::DP);
    ASSERT_EQ(s.turns.size(), 1u);
    draws += parse_output(s.turns[0].assistant_raw).modality == Modality::Image;
  }
  EXPECT_EQ(draws, 6);
}

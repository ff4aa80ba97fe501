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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "midsmith/core/dataset.hpp"
#include "midsmith/core/types.hpp"
#include "midsmith/protocol/templates.hpp"
#include "midsmith/protocol/verdict.hpp"

namespace midsmith {

class ChatBackend;

// ---------------------------------------------------------------------------
// Compositions and meta-prompts
// ---------------------------------------------------------------------------

/// The per-turn scenario sequence of one conversation flow.
struct CompositionId {
  std::vector<ModalityScenario> turns;

  /// Comma-separated scenario codes, e.g. "T->I,IT->I,IT->T".
  std::string render() const;
  static CompositionId parse(std::string_view text);

  auto operator<=>(const CompositionId&) const = default;
};

inline constexpr int kMaxCompositionTurns = 6;

/// All 4^turn_count compositions in lexicographic scenario order
/// (T->T < T->I < IT->T < IT->I). turn_count must be within 1..6.
std::vector<CompositionId> enumerate_compositions(int turn_count);

struct CaptionedPair {
  std::string image_ref;
  std::string caption;

  bool operator==(const CaptionedPair&) const = default;
};

nlohmann::ordered_json to_json(const CaptionedPair& p);
CaptionedPair captioned_pair_from_json(const nlohmann::json& j);

struct MetaPromptSpec {
  CompositionId composition;
  std::string topic;
  std::optional<std::string> edit_type;
  Language language = Language::En;
  std::vector<CaptionedPair> icl_samples;
};

/// Deterministic generation prompt for one (composition, topic, edit type,
/// language) cell. Throws Error(VocabularyMiss).
std::string build_meta_prompt(const MetaPromptSpec& spec, const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Drawing prompt alignment
// ---------------------------------------------------------------------------

struct ItemFailure {
  std::string item;
  std::string error;

  bool operator==(const ItemFailure&) const = default;
};

struct RecaptionResult {
  std::vector<CaptionedPair> pairs;
  std::vector<ItemFailure> failures;
};

/// Captions each image with the caption prompt. Per-image failures are
/// collected; output keeps input order.
RecaptionResult recaption_corpus(const std::vector<std::string>& image_refs, ChatBackend& chat,
                                 const PromptTemplates& templates, std::size_t parallelism = 1);

/// Uniform sample of `n` pairs without replacement, fixed by `rng_seed`.
/// Throws Error(InsufficientCorpus) if n exceeds the corpus.
std::vector<CaptionedPair> select_icl_samples(const std::vector<CaptionedPair>& corpus,
                                              std::size_t n, std::uint64_t rng_seed);

// ---------------------------------------------------------------------------
// Instruction data
// ---------------------------------------------------------------------------

enum class SampleSource { DO, DP, DPM, DialogbenTrain };

std::string_view to_string(SampleSource s) noexcept;
SampleSource parse_sample_source(std::string_view s);

struct InstructionTurn {
  UserTurnInput user;
  std::string assistant_raw;

  bool operator==(const InstructionTurn&) const = default;
};

struct InstructionSample {
  std::vector<InstructionTurn> turns;
  SampleSource source = SampleSource::DO;

  bool operator==(const InstructionSample&) const = default;
};

/// Throws Error(InvariantViolation) for empty samples or unparseable replies.
void validate(const InstructionSample& sample);

nlohmann::ordered_json to_json(const InstructionSample& s);
InstructionSample instruction_sample_from_json(const nlohmann::json& j);
std::vector<InstructionSample> load_instruction_samples(const std::filesystem::path& path);
void save_instruction_samples(const std::vector<InstructionSample>& samples,
                              const std::filesystem::path& path);

/// Shuffles d_o ++ d_p with `rng_seed` and concatenates consecutive groups of
/// `turns_per_conv` single-turn samples into `conversations` multi-turn
/// samples tagged d_pm. Groups need not be on a shared topic. Throws
/// Error(PoolTooSmall) if the pool cannot fill every conversation.
std::vector<InstructionSample> mix_pseudo_multiturn(const std::vector<InstructionSample>& d_o,
                                                    const std::vector<InstructionSample>& d_p,
                                                    std::size_t conversations,
                                                    std::size_t turns_per_conv,
                                                    std::uint64_t rng_seed);

struct TrainingParts {
  std::vector<InstructionSample> d_o;
  std::vector<InstructionSample> d_p;
  std::vector<InstructionSample> d_pm;
  std::vector<InstructionSample> d_t;
};

/// Writes the mix as JSONL at `path` and per-source counts to
/// `path` + ".manifest.json". Without `include_dialogben` the d_t part and any
/// dialogben_train-tagged sample is left out.
void export_training_mix(const TrainingParts& parts, bool include_dialogben,
                         const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Intent filtering
// ---------------------------------------------------------------------------

struct TurnMismatch {
  int round = 1;
  Modality judged = Modality::Text;
  Modality expected = Modality::Text;

  bool operator==(const TurnMismatch&) const = default;
};

struct RejectedRecord {
  ConversationRecord record;
  std::vector<TurnMismatch> mismatches;
};

struct UndecidedRecord {
  ConversationRecord record;
  std::string error;
};

/// kept, rejected and undecided partition the input and keep its order.
struct FilterResult {
  std::vector<ConversationRecord> kept;
  std::vector<RejectedRecord> rejected;
  std::vector<UndecidedRecord> undecided;
};

/// Asks the judge, turn by turn, whether the instruction calls for an image
/// or text. Any disagreement with the label rejects the record; a judge
/// failure parks it as undecided.
FilterResult filter_intent_mismatch(const std::vector<ConversationRecord>& records,
                                    ChatBackend& judge, const PromptTemplates& templates,
                                    std::size_t parallelism = 1);

// ---------------------------------------------------------------------------
// Error-correction data
// ---------------------------------------------------------------------------

struct CorrectionInput {
  std::string history;
  std::string question;
  std::string original_output;

  bool operator==(const CorrectionInput&) const = default;
};

struct CorrectionSample {
  std::string history;
  std::string question;
  std::string original_output;
  CorrectionVerdict verdict;

  bool operator==(const CorrectionSample&) const = default;
};

struct QuarantinedCorrection {
  CorrectionInput input;
  std::string raw;  // teacher completion, empty if the call itself failed
  std::string error;
};

struct CorrectionDataset {
  std::vector<CorrectionSample> samples;
  std::vector<QuarantinedCorrection> quarantine;
};

nlohmann::ordered_json to_json(const CorrectionSample& s);
CorrectionSample correction_sample_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const QuarantinedCorrection& q);
std::vector<CorrectionInput> load_correction_inputs(const std::filesystem::path& path);

/// One teacher call per input. Both Correct and Wrong verdicts are kept;
/// unparseable completions and failed calls go to quarantine.
CorrectionDataset build_correction_dataset(const std::vector<CorrectionInput>& inputs,
                                           ChatBackend& teacher, const PromptTemplates& templates,
                                           std::size_t parallelism = 1);

/// CSV (RFC 4180 quoting) for manual review of generated corrections.
void export_review_csv(const std::vector<CorrectionSample>& samples,
                       const std::filesystem::path& path);

}  // namespace midsmith

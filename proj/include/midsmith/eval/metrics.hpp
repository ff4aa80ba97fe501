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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "midsmith/core/types.hpp"
#include "midsmith/eval/turn_log.hpp"

namespace midsmith {

class VqaBackend;

using Rational = boost::multiprecision::cpp_rational;

/// Round-half-up decimal rendering of a non-negative rational, e.g. "0.7500".
std::string to_fixed(const Rational& r, int decimals = 4);
/// "3/4", or "1" for integers.
std::string to_exact(const Rational& r);
Rational parse_exact(const std::string& s);

// ---------------------------------------------------------------------------
// Modality switching accuracy
// ---------------------------------------------------------------------------

/// Turn count and correct count for one (round, scenario) cell.
struct MsCell {
  std::size_t n = 0;
  std::size_t correct = 0;

  Rational acc() const { return n == 0 ? Rational(0) : Rational(correct) / n; }
  bool operator==(const MsCell&) const = default;
};

using MsCellKey = std::pair<int, ModalityScenario>;

/// Per-cell accuracy is correct / n for the cell. A round's average is the
/// unweighted mean of that round's populated cells; `overall_unweighted` is
/// the mean over all populated cells and `overall_weighted` is total correct
/// over total turns. Everything is exact until rendered.
struct MsReport {
  std::map<MsCellKey, MsCell> cells;
  std::map<int, Rational> round_avgs;
  Rational overall_unweighted;
  Rational overall_weighted;
  std::size_t total_turns = 0;
  std::size_t failed_conversations = 0;

  bool operator==(const MsReport&) const = default;
};

/// Throws Error(EmptyLogs).
MsReport ms_accuracy(const std::vector<TurnLog>& logs, std::size_t failed_conversations = 0);

// ---------------------------------------------------------------------------
// Generation coherence
// ---------------------------------------------------------------------------

struct ImageScore {
  std::string conversation_id;
  int round = 1;
  ModalityScenario scenario;
  std::string topic;
  std::optional<std::string> edit_type;
  /// Mean probability over the questions that were answered.
  double score = 0.0;
  /// One entry per question; empty when the turn produced no image.
  std::vector<std::optional<double>> probabilities;
  /// The system answered in text where an image was expected; scored 0.
  bool missing_image = false;
  std::size_t failed_items = 0;

  bool operator==(const ImageScore&) const = default;
};

struct ExcludedImage {
  std::string conversation_id;
  int round = 1;
  std::string reason;

  bool operator==(const ExcludedImage&) const = default;
};

/// `overall` is the arithmetic mean of the per-image scores, summed in
/// (conversation_id, round) order so it does not depend on log order.
struct CoherenceReport {
  std::map<std::pair<std::string, int>, ImageScore> per_image;
  double overall = 0.0;
  std::map<std::string, double> by_topic;
  std::map<std::string, double> by_edit_type;
  std::map<std::string, double> by_scenario;
  std::vector<ExcludedImage> excluded;

  bool operator==(const CoherenceReport&) const = default;
};

/// Scores every expected-image turn that has VQA items. Per-item backend
/// failures are skipped and counted; a turn whose items all fail is excluded.
CoherenceReport coherence_score(const std::vector<TurnLog>& logs,
                                const std::vector<ConversationRecord>& dataset,
                                VqaBackend& vqa, std::size_t parallelism = 1);

/// Arithmetic mean; 0 for an empty list.
double mean(const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Prompt drift
// ---------------------------------------------------------------------------

/// Levenshtein distance over Unicode code points.
std::size_t edit_distance(std::string_view a, std::string_view b);
/// edit_distance / max(length); 0 for two empty strings.
double normalized_edit_distance(std::string_view a, std::string_view b);

/// For each image turn that follows an earlier image turn in the same
/// conversation, the normalized edit distance between the two drawing prompts.
std::map<std::pair<std::string, int>, double> prompt_drift(const std::vector<TurnLog>& logs);

}  // namespace midsmith

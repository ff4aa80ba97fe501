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

#include "midsmith/protocol/verdict.hpp"

#include <algorithm>
#include <cctype>

#include "midsmith/core/error.hpp"
#include "midsmith/protocol/output.hpp"
#include "midsmith/protocol/templates.hpp"

namespace midsmith {

namespace {

constexpr std::string_view kSolutionHeaders[] = {"Correct Solution:", "Correct solution:"};

struct RuleMention {
  int rule = 0;
  std::size_t end = 0;  // one past the number
};

std::optional<RuleMention> find_rule(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::size_t pos = 0;
  while ((pos = lower.find("rule", pos)) != std::string::npos) {
    std::size_t i = pos + 4;
    while (i < lower.size() && (lower[i] == ' ' || lower[i] == '\t')) ++i;
    if (i > pos + 4 && i < lower.size() && std::isdigit(static_cast<unsigned char>(lower[i]))) {
      std::size_t j = i;
      int n = 0;
      while (j < lower.size() && std::isdigit(static_cast<unsigned char>(lower[j])) && n < 100) {
        n = n * 10 + (lower[j++] - '0');
      }
      return RuleMention{n, j};
    }
    pos += 4;
  }
  return std::nullopt;
}

std::string_view strip_leading_punct(std::string_view s) {
  s = trim(s);
  while (!s.empty() && (s.front() == '.' || s.front() == ':' || s.front() == ',' ||
                        s.front() == ';' || s.front() == ')')) {
    s.remove_prefix(1);
    s = trim(s);
  }
  return s;
}

}  // namespace

CorrectionVerdict parse_teacher_verdict(std::string_view raw) {
  const auto body = trim(raw);
  if (body.starts_with(kCorrectMarker)) return CorrectionVerdict::correct();
  if (!body.starts_with(kWrongMarker)) {
    throw Error(ErrorKind::UnrecognizedVerdict, std::string(body.substr(0, 40)));
  }

  const auto rest = body.substr(kWrongMarker.size());
  std::size_t header_pos = std::string_view::npos;
  std::size_t header_len = 0;
  for (auto header : kSolutionHeaders) {
    const auto p = rest.find(header);
    if (p < header_pos) {
      header_pos = p;
      header_len = header.size();
    }
  }
  if (header_pos == std::string_view::npos) {
    throw Error(ErrorKind::MissingCorrection, "no 'Correct Solution:' header");
  }
  const auto judgement = rest.substr(0, header_pos);
  const auto solution = trim(rest.substr(header_pos + header_len));
  if (solution.empty()) throw Error(ErrorKind::MissingCorrection, "empty corrected solution");

  const auto rule = find_rule(judgement);
  if (!rule || rule->rule < 1 || rule->rule > 3) {
    throw Error(ErrorKind::MissingRule, "wrong verdict names no rule 1-3");
  }
  auto explanation = strip_leading_punct(judgement.substr(rule->end));
  if (explanation.empty()) explanation = trim(judgement);

  CorrectionVerdict v;
  v.kind = CorrectionVerdict::Kind::Wrong;
  v.violated_rule = rule->rule;
  v.explanation = std::string(explanation);
  v.corrected_output = std::string(solution);
  return v;
}

std::string render_verdict(const CorrectionVerdict& verdict) {
  if (verdict.kind == CorrectionVerdict::Kind::Correct) return std::string(kCorrectMarker);
  return std::string(kWrongMarker) + " The output violates rule " +
         std::to_string(verdict.violated_rule.value_or(0)) + ". " +
         verdict.explanation.value_or("") + "\nCorrect Solution: " +
         verdict.corrected_output.value_or("");
}

nlohmann::ordered_json to_json(const CorrectionVerdict& v) {
  nlohmann::ordered_json j;
  j["kind"] = v.kind == CorrectionVerdict::Kind::Correct ? "correct" : "wrong";
  if (v.violated_rule) j["violated_rule"] = *v.violated_rule;
  if (v.explanation) j["explanation"] = *v.explanation;
  if (v.corrected_output) j["corrected_output"] = *v.corrected_output;
  return j;
}

CorrectionVerdict verdict_from_json(const nlohmann::json& j) {
  CorrectionVerdict v;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "correct") return v;
  if (kind != "wrong") throw Error(ErrorKind::InvalidArgument, "unknown verdict kind " + kind);
  v.kind = CorrectionVerdict::Kind::Wrong;
  v.violated_rule = j.at("violated_rule").get<int>();
  v.explanation = j.at("explanation").get<std::string>();
  v.corrected_output = j.at("corrected_output").get<std::string>();
  return v;
}

}  // namespace midsmith

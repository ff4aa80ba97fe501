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

#include <fstream>
#include <optional>

#include "midsmith/backends/backend.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/core/parallel.hpp"
#include "midsmith/forge/forge.hpp"
#include "midsmith/protocol/requests.hpp"

namespace midsmith {

nlohmann::ordered_json to_json(const CorrectionSample& s) {
  return {{"history", s.history},
          {"question", s.question},
          {"original_output", s.original_output},
          {"verdict", to_json(s.verdict)},
          {"target", render_verdict(s.verdict)}};
}

CorrectionSample correction_sample_from_json(const nlohmann::json& j) {
  try {
    return {j.value("history", std::string()), j.at("question").get<std::string>(),
            j.at("original_output").get<std::string>(), verdict_from_json(j.at("verdict"))};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedLine, std::string("correction sample: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const QuarantinedCorrection& q) {
  return {{"history", q.input.history},
          {"question", q.input.question},
          {"original_output", q.input.original_output},
          {"raw", q.raw},
          {"error", q.error}};
}

std::vector<CorrectionInput> load_correction_inputs(const std::filesystem::path& path) {
  std::vector<CorrectionInput> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.value("history", std::string()), j.at("question").get<std::string>(),
                     j.at("original_output").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedLine,
                  path.string() + " entry " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

CorrectionDataset build_correction_dataset(const std::vector<CorrectionInput>& inputs,
                                           ChatBackend& teacher, const PromptTemplates& templates,
                                           std::size_t parallelism) {
  std::vector<std::optional<CorrectionSample>> ok(inputs.size());
  std::vector<std::optional<QuarantinedCorrection>> bad(inputs.size());
  parallel_for(inputs.size(), parallelism, [&](std::size_t i) {
    const auto& in = inputs[i];
    std::string raw;
    try {
      raw = teacher.complete(
          build_teacher_request(templates, in.question, in.original_output, in.history));
      ok[i] = CorrectionSample{in.history, in.question, in.original_output,
                               parse_teacher_verdict(raw)};
    } catch (const Error& e) {
      bad[i] = QuarantinedCorrection{in, raw, e.what()};
    }
  });
  CorrectionDataset out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (ok[i]) out.samples.push_back(std::move(*ok[i]));
    if (bad[i]) out.quarantine.push_back(std::move(*bad[i]));
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void export_review_csv(const std::vector<CorrectionSample>& samples,
                       const std::filesystem::path& path) {
  std::string body = "index,question,original_output,verdict,rule,corrected_output,explanation\r\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const bool wrong = s.verdict.kind == CorrectionVerdict::Kind::Wrong;
    body += std::to_string(i) + ',' + csv_field(s.question) + ',' + csv_field(s.original_output) +
            ',' + (wrong ? "wrong" : "correct") + ',' +
            (wrong && s.verdict.violated_rule ? std::to_string(*s.verdict.violated_rule) : "") + ',' +
            csv_field(s.verdict.corrected_output.value_or("")) + ',' +
            csv_field(s.verdict.explanation.value_or("")) + "\r\n";
  }
  write_file(path, body);
}

}  // namespace midsmith

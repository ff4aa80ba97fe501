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

#include <map>

#include "midsmith/core/digest.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/core/random.hpp"
#include "midsmith/forge/forge.hpp"
#include "midsmith/protocol/output.hpp"

namespace midsmith {

std::string_view to_string(SampleSource s) noexcept {
  switch (s) {
    case SampleSource::DO: return "d_o";
    case SampleSource::DP: return "d_p";
    case SampleSource::DPM: return "d_pm";
    case SampleSource::DialogbenTrain: return "dialogben_train";
  }
  return "d_o";
}

SampleSource parse_sample_source(std::string_view s) {
  for (auto v : {SampleSource::DO, SampleSource::DP, SampleSource::DPM,
                 SampleSource::DialogbenTrain}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown sample source '" + std::string(s) + "'");
}

void validate(const InstructionSample& sample) {
  if (sample.turns.empty()) throw Error(ErrorKind::InvariantViolation, "sample has no turns");
  for (const auto& t : sample.turns) {
    if (t.user.text.empty()) throw Error(ErrorKind::InvariantViolation, "empty user text");
    if (t.user.image_ref && !is_content_address(*t.user.image_ref)) {
      throw Error(ErrorKind::InvariantViolation, "image_ref is not a content address");
    }
    try {
      parse_output(t.assistant_raw);
    } catch (const Error& e) {
      throw Error(ErrorKind::InvariantViolation, std::string("assistant reply: ") + e.what());
    }
  }
}

nlohmann::ordered_json to_json(const InstructionSample& s) {
  nlohmann::ordered_json j;
  j["source"] = std::string(to_string(s.source));
  j["turns"] = nlohmann::ordered_json::array();
  for (const auto& t : s.turns) {
    j["turns"].push_back({{"user", to_json(t.user)}, {"assistant", t.assistant_raw}});
  }
  return j;
}

InstructionSample instruction_sample_from_json(const nlohmann::json& j) {
  InstructionSample s;
  try {
    s.source = parse_sample_source(j.at("source").get<std::string>());
    for (const auto& t : j.at("turns")) {
      s.turns.push_back({user_turn_from_json(t.at("user")), t.at("assistant").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedLine, std::string("instruction sample: ") + e.what());
  }
  validate(s);
  return s;
}

std::vector<InstructionSample> load_instruction_samples(const std::filesystem::path& path) {
  std::vector<InstructionSample> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedLine,
                  path.string() + " entry " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(instruction_sample_from_json(j));
  }
  return out;
}

void save_instruction_samples(const std::vector<InstructionSample>& samples,
                              const std::filesystem::path& path) {
  std::string body;
  for (const auto& s : samples) {
    validate(s);
    body += to_json(s).dump();
    body += '\n';
  }
  write_file(path, body);
}

std::vector<InstructionSample> mix_pseudo_multiturn(const std::vector<InstructionSample>& d_o,
                                                    const std::vector<InstructionSample>& d_p,
                                                    std::size_t conversations,
                                                    std::size_t turns_per_conv,
                                                    std::uint64_t rng_seed) {
  if (turns_per_conv == 0) throw Error(ErrorKind::InvalidArgument, "turns_per_conv must be >= 1");
  std::vector<const InstructionTurn*> pool;
  for (const auto* part : {&d_o, &d_p}) {
    for (const auto& s : *part) {
      if (s.turns.size() != 1) {
        throw Error(ErrorKind::InvalidArgument, "mixer input must be single-turn samples");
      }
      pool.push_back(&s.turns.front());
    }
  }
  const std::size_t needed = conversations * turns_per_conv;
  if (pool.size() < needed) {
    throw Error(ErrorKind::PoolTooSmall, "need " + std::to_string(needed) +
                                             " single-turn samples, pool has " +
                                             std::to_string(pool.size()));
  }
  std::mt19937_64 rng(rng_seed);
  shuffle_seeded(pool, rng);
  std::vector<InstructionSample> out(conversations);
  for (std::size_t c = 0; c < conversations; ++c) {
    out[c].source = SampleSource::DPM;
    for (std::size_t t = 0; t < turns_per_conv; ++t) {
      out[c].turns.push_back(*pool[c * turns_per_conv + t]);
    }
  }
  return out;
}

void export_training_mix(const TrainingParts& parts, bool include_dialogben,
                         const std::filesystem::path& path) {
  std::string body;
  std::map<std::string, std::size_t> counts;
  for (auto s : {SampleSource::DO, SampleSource::DP, SampleSource::DPM,
                 SampleSource::DialogbenTrain}) {
    counts[std::string(to_string(s))] = 0;
  }
  std::size_t total = 0;
  for (const auto* part : {&parts.d_o, &parts.d_p, &parts.d_pm, &parts.d_t}) {
    if (part == &parts.d_t && !include_dialogben) continue;
    for (const auto& s : *part) {
      if (s.source == SampleSource::DialogbenTrain && !include_dialogben) continue;
      validate(s);
      body += to_json(s).dump();
      body += '\n';
      ++counts[std::string(to_string(s.source))];
      ++total;
    }
  }
  write_file(path, body);
  nlohmann::ordered_json manifest;
  manifest["file"] = path.filename().string();
  manifest["include_dialogben"] = include_dialogben;
  manifest["total"] = total;
  manifest["counts"] = counts;
  manifest["sha256"] = sha256_hex(body);
  write_file(path.string() + ".manifest.json", manifest.dump(2) + "\n");
}

}  // namespace midsmith

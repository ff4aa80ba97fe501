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

#include "midsmith/eval/metrics.hpp"

#include <algorithm>
#include <unordered_map>

#include "midsmith/backends/backend.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/core/parallel.hpp"

namespace midsmith {

using boost::multiprecision::cpp_int;

std::string to_fixed(const Rational& r, int decimals) {
  const cpp_int num = boost::multiprecision::numerator(r);
  const cpp_int den = boost::multiprecision::denominator(r);
  if (num < 0) throw Error(ErrorKind::InvalidArgument, "to_fixed expects a non-negative value");
  cpp_int scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const cpp_int q = (num * scale * 2 + den) / (den * 2);
  const cpp_int whole = q / scale;
  std::string frac = cpp_int(q % scale).str();
  if (decimals == 0) return whole.str();
  frac.insert(0, static_cast<std::size_t>(decimals) - frac.size(), '0');
  return whole.str() + "." + frac;
}

std::string to_exact(const Rational& r) {
  const cpp_int den = boost::multiprecision::denominator(r);
  const cpp_int num = boost::multiprecision::numerator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Rational parse_exact(const std::string& s) {
  try {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(cpp_int(s));
    return Rational(cpp_int(s.substr(0, slash)), cpp_int(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, "not a rational: '" + s + "'");
  }
}

MsReport ms_accuracy(const std::vector<TurnLog>& logs, std::size_t failed_conversations) {
  if (logs.empty()) throw Error(ErrorKind::EmptyLogs, "no turn logs to score");
  MsReport report;
  report.failed_conversations = failed_conversations;
  std::size_t total_correct = 0;
  for (const auto& log : logs) {
    auto& cell = report.cells[{log.round, log.scenario}];
    ++cell.n;
    if (log.correct) {
      ++cell.correct;
      ++total_correct;
    }
  }
  report.total_turns = logs.size();

  std::map<int, std::pair<Rational, std::size_t>> per_round;
  Rational cell_sum = 0;
  for (const auto& [key, cell] : report.cells) {
    const auto acc = cell.acc();
    auto& [sum, count] = per_round[key.first];
    sum += acc;
    ++count;
    cell_sum += acc;
  }
  for (const auto& [round, sc] : per_round) {
    report.round_avgs[round] = sc.first / static_cast<long>(sc.second);
  }
  report.overall_unweighted = cell_sum / static_cast<long>(report.cells.size());
  report.overall_weighted = Rational(total_correct) / static_cast<long>(logs.size());
  return report;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

CoherenceReport coherence_score(const std::vector<TurnLog>& logs,
                                const std::vector<ConversationRecord>& dataset, VqaBackend& vqa,
                                std::size_t parallelism) {
  std::unordered_map<std::string, const ConversationRecord*> by_id;
  for (const auto& r : dataset) by_id.emplace(r.id, &r);

  struct Job {
    const TurnLog* log;
    const ConversationRecord* record;
    const TurnSpec* turn;
  };
  std::vector<Job> jobs;
  for (const auto& log : logs) {
    if (log.expected_modality != Modality::Image) continue;
    auto it = by_id.find(log.conversation_id);
    if (it == by_id.end()) continue;
    const auto& turns = it->second->turns;
    if (log.round < 1 || static_cast<std::size_t>(log.round) > turns.size()) continue;
    const auto& turn = turns[static_cast<std::size_t>(log.round) - 1];
    if (turn.vqa_items.empty()) continue;
    jobs.push_back({&log, it->second, &turn});
  }

  std::vector<ImageScore> scores(jobs.size());
  parallel_for(jobs.size(), parallelism, [&](std::size_t i) {
    const auto& job = jobs[i];
    ImageScore s;
    s.conversation_id = job.log->conversation_id;
    s.round = job.log->round;
    s.scenario = job.log->scenario;
    s.topic = job.record->topic;
    s.edit_type = job.record->edit_type;
    if (job.log->predicted_modality != Modality::Image || !job.log->image_ref) {
      s.missing_image = true;
      s.score = 0.0;
    } else {
      std::vector<double> answered;
      for (const auto& item : job.turn->vqa_items) {
        try {
          const double p = vqa.probability(*job.log->image_ref, item);
          s.probabilities.push_back(p);
          answered.push_back(p);
        } catch (const Error&) {
          s.probabilities.push_back(std::nullopt);
          ++s.failed_items;
        }
      }
      s.score = mean(answered);
    }
    scores[i] = std::move(s);
  });

  CoherenceReport report;
  for (auto& s : scores) {
    if (!s.missing_image && s.failed_items == s.probabilities.size()) {
      report.excluded.push_back({s.conversation_id, s.round, "every VQA query failed"});
      continue;
    }
    auto key = std::make_pair(s.conversation_id, s.round);
    report.per_image.insert_or_assign(std::move(key), std::move(s));
  }
  std::sort(report.excluded.begin(), report.excluded.end(),
            [](const ExcludedImage& a, const ExcludedImage& b) {
              return std::tie(a.conversation_id, a.round) < std::tie(b.conversation_id, b.round);
            });

  std::vector<double> all;
  std::map<std::string, std::vector<double>> topic, edit, scenario;
  for (const auto& [key, s] : report.per_image) {
    all.push_back(s.score);
    topic[s.topic].push_back(s.score);
    if (s.edit_type) edit[*s.edit_type].push_back(s.score);
    scenario[std::string(to_string(s.scenario))].push_back(s.score);
  }
  report.overall = mean(all);
  for (const auto& [k, v] : topic) report.by_topic[k] = mean(v);
  for (const auto& [k, v] : edit) report.by_edit_type[k] = mean(v);
  for (const auto& [k, v] : scenario) report.by_scenario[k] = mean(v);
  return report;
}

namespace {

std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 1;
    if (i + static_cast<std::size_t>(len) > s.size()) len = 1;
    char32_t cp = len == 1 ? c : c & (0xff >> (len + 1));
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const auto x = code_points(a);
  const auto y = code_points(b);
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
  const auto longest = std::max(code_points(a).size(), code_points(b).size());
  if (longest == 0) return 0.0;
  return static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

std::map<std::pair<std::string, int>, double> prompt_drift(const std::vector<TurnLog>& logs) {
  std::map<std::pair<std::string, int>, double> out;
  std::unordered_map<std::string, std::string> last_prompt;
  for (const auto& log : logs) {
    if (log.predicted_modality != Modality::Image || !log.drawing_prompt) continue;
    auto it = last_prompt.find(log.conversation_id);
    if (it != last_prompt.end()) {
      out[{log.conversation_id, log.round}] =
          normalized_edit_distance(it->second, *log.drawing_prompt);
    }
    last_prompt[log.conversation_id] = *log.drawing_prompt;
  }
  return out;
}

}  // namespace midsmith

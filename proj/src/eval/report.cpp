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

#include "midsmith/eval/report.hpp"

#include <cstdio>
#include <sstream>

#include "midsmith/core/dataset.hpp"
#include "midsmith/core/error.hpp"

namespace midsmith {

using nlohmann::json;

namespace {

json metric(const Rational& r) {
  return {{"acc", std::stod(to_fixed(r))}, {"acc_exact", to_exact(r)}};
}

double fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return std::stod(buf);
}

void dump_into(const json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner + json(k).dump() + ": ";
        dump_into(v, indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        dump_into(v, indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f", j.get<double>());
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

std::string percent(const Rational& r) { return to_fixed(r * 100, 2); }

}  // namespace

json report_json(const MsReport& ms, const CoherenceReport* coherence) {
  json doc;
  json& m = doc["modality_switching"];
  m["cells"] = json::object();
  for (const auto& [key, cell] : ms.cells) {
    json c = metric(cell.acc());
    c["n"] = cell.n;
    c["correct"] = cell.correct;
    m["cells"][std::to_string(key.first)][std::string(to_string(key.second))] = std::move(c);
  }
  m["round_avg"] = json::object();
  for (const auto& [round, avg] : ms.round_avgs) m["round_avg"][std::to_string(round)] = metric(avg);
  m["overall_unweighted"] = metric(ms.overall_unweighted);
  m["overall_weighted"] = metric(ms.overall_weighted);
  m["total_turns"] = ms.total_turns;
  m["failed_conversations"] = ms.failed_conversations;

  if (coherence) {
    json& c = doc["coherence"];
    c["overall"] = fixed4(coherence->overall);
    c["images"] = coherence->per_image.size();
    json per_image = json::array();
    for (const auto& [key, s] : coherence->per_image) {
      json e;
      e["conversation_id"] = s.conversation_id;
      e["round"] = s.round;
      e["scenario"] = std::string(to_string(s.scenario));
      e["score"] = fixed4(s.score);
      e["missing_image"] = s.missing_image;
      e["failed_items"] = s.failed_items;
      json probs = json::array();
      for (const auto& p : s.probabilities) probs.push_back(p ? json(fixed4(*p)) : json(nullptr));
      e["probabilities"] = std::move(probs);
      per_image.push_back(std::move(e));
    }
    c["per_image"] = std::move(per_image);
    auto table = [](const std::map<std::string, double>& m) {
      json t = json::object();
      for (const auto& [k, v] : m) t[k] = fixed4(v);
      return t;
    };
    c["by_topic"] = table(coherence->by_topic);
    c["by_edit_type"] = table(coherence->by_edit_type);
    c["by_scenario"] = table(coherence->by_scenario);
    json excluded = json::array();
    for (const auto& e : coherence->excluded) {
      excluded.push_back(
          {{"conversation_id", e.conversation_id}, {"round", e.round}, {"reason", e.reason}});
    }
    c["excluded"] = std::move(excluded);
  }
  return doc;
}

std::string dump_fixed4(const json& j) {
  std::string out;
  dump_into(j, 0, out);
  out += '\n';
  return out;
}

std::string render_table(const MsReport& ms, const CoherenceReport* coherence) {
  std::ostringstream out;
  char line[256];
  out << "Modality switching accuracy (%)\n";
  std::snprintf(line, sizeof line, "%-8s%10s%10s%10s%10s%10s\n", "Round", "T->T", "T->I", "IT->T",
                "IT->I", "Avg");
  out << line;
  for (const auto& [round, avg] : ms.round_avgs) {
    std::snprintf(line, sizeof line, "%-8d", round);
    out << line;
    for (auto s : kAllScenarios) {
      auto it = ms.cells.find({round, s});
      const std::string v = it == ms.cells.end() ? "-" : percent(it->second.acc());
      std::snprintf(line, sizeof line, "%10s", v.c_str());
      out << line;
    }
    std::snprintf(line, sizeof line, "%10s\n", percent(avg).c_str());
    out << line;
  }
  out << "Overall, mean of cells:      " << percent(ms.overall_unweighted) << "\n";
  out << "Overall, weighted by turns:  " << percent(ms.overall_weighted) << "\n";
  out << "Turns scored:                " << ms.total_turns << "\n";
  out << "Failed conversations:        " << ms.failed_conversations << "\n";
  if (coherence) {
    std::snprintf(line, sizeof line, "%.4f", coherence->overall);
    out << "\nGeneration coherence VQA score\n";
    out << "Overall:                     " << line << " over " << coherence->per_image.size()
        << " images\n";
    for (const auto& [k, v] : coherence->by_scenario) {
      std::snprintf(line, sizeof line, "  %-26s %.4f\n", k.c_str(), v);
      out << line;
    }
    if (!coherence->excluded.empty()) {
      out << "Excluded images:             " << coherence->excluded.size() << "\n";
    }
  }
  return out.str();
}

void write_report(const MsReport& ms, const CoherenceReport* coherence,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string());
  write_file(dir / "report.json", dump_fixed4(report_json(ms, coherence)));
  write_file(dir / "report.txt", render_table(ms, coherence));
}

MsReport ms_report_from_json(const json& j) {
  MsReport ms;
  try {
    const auto& m = j.at("modality_switching");
    for (const auto& [round, row] : m.at("cells").items()) {
      for (const auto& [code, c] : row.items()) {
        ms.cells[{std::stoi(round), parse_scenario(code)}] =
            MsCell{c.at("n").get<std::size_t>(), c.at("correct").get<std::size_t>()};
      }
    }
    for (const auto& [round, a] : m.at("round_avg").items()) {
      ms.round_avgs[std::stoi(round)] = parse_exact(a.at("acc_exact").get<std::string>());
    }
    ms.overall_unweighted = parse_exact(m.at("overall_unweighted").at("acc_exact").get<std::string>());
    ms.overall_weighted = parse_exact(m.at("overall_weighted").at("acc_exact").get<std::string>());
    ms.total_turns = m.at("total_turns").get<std::size_t>();
    ms.failed_conversations = m.at("failed_conversations").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedLine, std::string("report json: ") + e.what());
  }
  return ms;
}

}  // namespace midsmith

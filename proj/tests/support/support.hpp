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

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "midsmith/backends/mock.hpp"
#include "midsmith/core/dataset.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/protocol/output.hpp"
#include "midsmith/protocol/requests.hpp"
#include "midsmith/protocol/templates.hpp"

namespace midsmith::testing {

inline std::filesystem::path fixtures_dir() { return MIDSMITH_FIXTURES_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return fixtures_dir() / name; }
inline std::filesystem::path cli_path() { return MIDSMITH_CLI_PATH; }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "midsmith-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Kind of the midsmith::Error thrown by `fn`; std::logic_error if none is.
template <class Fn>
ErrorKind kind_of(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  throw std::logic_error("expected midsmith::Error");
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

/// Runs `cmd` through the shell; captures stdout only.
inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string draw_reply(const std::string& user_text) {
  return "<draw>A detailed picture for: " + user_text;
}

inline std::string talk_reply(const std::string& user_text) {
  return "Here is a written answer to: " + user_text;
}

/// The reply in the expected modality, or in the other one when `wrong`.
inline std::string reply_for(const TurnSpec& turn, bool wrong) {
  const bool image = (turn.expected_modality == Modality::Image) != wrong;
  return image ? draw_reply(turn.user.text) : talk_reply(turn.user.text);
}

using WrongPredicate = std::function<bool(std::size_t record, std::size_t turn)>;

/// Student script keyed on each turn's user text.
inline ChatScript student_script(const std::vector<ConversationRecord>& records,
                                 const WrongPredicate& wrong) {
  ChatScript s;
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (std::size_t t = 0; t < records[r].turns.size(); ++t) {
      const auto& turn = records[r].turns[t];
      s.on_last_user(turn.user.text, reply_for(turn, wrong(r, t)));
    }
  }
  return s;
}

/// Adds the self-check completions: a Wrong verdict carrying the correct
/// reply where the first draft was wrong, "###Correct" elsewhere.
inline void add_correction_entries(ChatScript& s, const std::vector<ConversationRecord>& records,
                                   const PromptTemplates& templates, const WrongPredicate& wrong) {
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (std::size_t t = 0; t < records[r].turns.size(); ++t) {
      const auto& turn = records[r].turns[t];
      const bool w = wrong(r, t);
      const std::string draft{trim(reply_for(turn, w))};
      const auto req = build_correction_request(templates, render_user_turn(turn.user), draft);
      const std::string key = req.messages.back().text();
      if (w) {
        s.on_last_user(key, "###Wrong### The output violates rule 1. The reply used the wrong "
                            "modality.\nCorrect Solution: " +
                                reply_for(turn, false));
      } else {
        s.on_last_user(key, "###Correct");
      }
    }
  }
}

}  // namespace midsmith::testing

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

#include "midsmith/gateway/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>

#include "midsmith/core/dataset.hpp"
#include "midsmith/core/error.hpp"

namespace midsmith {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::pair<std::string, int> split_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size()) {
    throw Error(ErrorKind::InvalidConfig, "listen_addr must be host:port, got '" + addr + "'");
  }
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidConfig, "bad port in listen_addr '" + addr + "'");
  }
  if (port < 0 || port > 65535) throw Error(ErrorKind::InvalidConfig, "port out of range");
  return {addr.substr(0, colon), port};
}

void collect_leaves(const ordered_json& j, const std::string& prefix,
                    std::vector<std::pair<std::string, std::vector<std::string>>>& out,
                    std::vector<std::string>& path) {
  for (const auto& [k, v] : j.items()) {
    path.push_back(k);
    std::string name = prefix + "_" + k;
    if (v.is_object()) {
      collect_leaves(v, name, out, path);
    } else {
      for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      out.emplace_back(name, path);
    }
    path.pop_back();
  }
}

std::vector<std::pair<std::string, std::vector<std::string>>> leaves() {
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  std::vector<std::string> path;
  collect_leaves(to_json(AppConfig{}), "MIDSMITH", out, path);
  return out;
}

}  // namespace

void AppConfig::validate() const {
  split_addr(listen_addr);
  engine.validate();
  if (parallelism < 1) throw Error(ErrorKind::InvalidConfig, "parallelism must be >= 1");
  if (session_capacity < 1) throw Error(ErrorKind::InvalidConfig, "session_capacity must be >= 1");
  if (eval_workers < 1) throw Error(ErrorKind::InvalidConfig, "eval_workers must be >= 1");
  for (const auto* b : {&vqa, &teacher, &judge, &captioner}) b->validate();
}

void AppConfig::prepare_dirs() const {
  for (const auto* d : {&image_store_dir, &report_dir}) {
    std::error_code ec;
    std::filesystem::create_directories(*d, ec);
    if (ec || !std::filesystem::is_directory(*d)) {
      throw Error(ErrorKind::InvalidConfig, "cannot create directory " + *d);
    }
  }
}

std::string AppConfig::host() const { return split_addr(listen_addr).first; }
int AppConfig::port() const { return split_addr(listen_addr).second; }

ordered_json to_json(const AppConfig& c) {
  ordered_json j;
  j["listen_addr"] = c.listen_addr;
  j["engine"] = to_json(c.engine);
  j["dataset_dir"] = c.dataset_dir;
  j["image_store_dir"] = c.image_store_dir;
  j["report_dir"] = c.report_dir;
  j["vocab_file"] = c.vocab_file ? json(*c.vocab_file) : json(nullptr);
  j["asset_dirs"] = c.asset_dirs;
  j["parallelism"] = c.parallelism;
  j["session_capacity"] = c.session_capacity;
  j["eval_workers"] = c.eval_workers;
  j["vqa"] = to_json(c.vqa);
  j["teacher"] = to_json(c.teacher);
  j["judge"] = to_json(c.judge);
  j["captioner"] = to_json(c.captioner);
  return j;
}

AppConfig app_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "config must be a JSON object");
  static const std::vector<std::string> known = {
      "listen_addr", "engine",      "dataset_dir",      "image_store_dir", "report_dir",
      "vocab_file",  "asset_dirs",  "parallelism",      "session_capacity", "eval_workers",
      "vqa",         "teacher",     "judge",            "captioner"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw Error(ErrorKind::InvalidConfig, "unknown config field '" + k + "'");
    }
  }
  AppConfig c;
  try {
    c.listen_addr = j.value("listen_addr", c.listen_addr);
    if (j.contains("engine")) c.engine = engine_config_from_json(j["engine"]);
    c.dataset_dir = j.value("dataset_dir", c.dataset_dir);
    c.image_store_dir = j.value("image_store_dir", c.image_store_dir);
    c.report_dir = j.value("report_dir", c.report_dir);
    if (j.contains("vocab_file") && !j["vocab_file"].is_null()) {
      c.vocab_file = j["vocab_file"].get<std::string>();
    }
    if (j.contains("asset_dirs")) c.asset_dirs = j["asset_dirs"].get<std::vector<std::string>>();
    c.parallelism = j.value("parallelism", c.parallelism);
    c.session_capacity = j.value("session_capacity", c.session_capacity);
    c.eval_workers = j.value("eval_workers", c.eval_workers);
    if (j.contains("vqa")) c.vqa = backend_config_from_json(j["vqa"]);
    if (j.contains("teacher")) c.teacher = backend_config_from_json(j["teacher"]);
    if (j.contains("judge")) c.judge = backend_config_from_json(j["judge"]);
    if (j.contains("captioner")) c.captioner = backend_config_from_json(j["captioner"]);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

AppConfig load_app_config(const std::optional<std::string>& path, const EnvLookup& env) {
  json merged = to_json(AppConfig{});
  if (path) {
    json file;
    try {
      file = json::parse(read_file(*path));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidConfig, *path + ": " + e.what());
    }
    if (!file.is_object()) throw Error(ErrorKind::InvalidConfig, *path + ": not a JSON object");
    // Reject unknown top-level names before merging hides them.
    for (const auto& [k, v] : file.items()) {
      if (!merged.contains(k)) throw Error(ErrorKind::InvalidConfig, "unknown config field '" + k + "'");
    }
    merged.merge_patch(file);
  }
  for (const auto& [name, path_parts] : leaves()) {
    const auto value = env(name);
    if (!value) continue;
    json* node = &merged;
    for (const auto& p : path_parts) node = &(*node)[p];
    if (node->is_string() || node->is_null()) {
      *node = *value;
    } else {
      try {
        *node = json::parse(*value);
      } catch (const json::exception&) {
        throw Error(ErrorKind::InvalidConfig, name + ": cannot parse '" + *value + "'");
      }
    }
  }
  return app_config_from_json(merged);
}

std::vector<std::string> config_env_names() {
  std::vector<std::string> out;
  for (const auto& [name, p] : leaves()) out.push_back(name);
  return out;
}

}  // namespace midsmith

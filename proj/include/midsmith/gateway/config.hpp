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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "midsmith/backends/backend.hpp"
#include "midsmith/engine/engine.hpp"

namespace midsmith {

struct AppConfig {
  std::string listen_addr = "127.0.0.1:8080";
  EngineConfig engine;
  std::string dataset_dir = "data";
  std::string image_store_dir = "var/images";
  std::string report_dir = "var/reports";
  std::optional<std::string> vocab_file;
  /// Read-only directories searched for dataset input images.
  std::vector<std::string> asset_dirs;
  int parallelism = 1;
  int session_capacity = 1024;
  int eval_workers = 1;
  BackendConfig vqa;
  BackendConfig teacher;
  BackendConfig judge;
  BackendConfig captioner;

  /// Throws Error(InvalidConfig).
  void validate() const;
  /// Creates the writable directories. Throws Error(InvalidConfig).
  void prepare_dirs() const;

  std::string host() const;
  int port() const;
};

nlohmann::ordered_json to_json(const AppConfig& c);
AppConfig app_config_from_json(const nlohmann::json& j);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Process environment lookup.
std::optional<std::string> process_env(const std::string& name);

/// Defaults, then the JSON file if given, then environment overrides. Every
/// leaf field has a variable named MIDSMITH_ plus its upper-cased path joined
/// by underscores, e.g. MIDSMITH_PARALLELISM or MIDSMITH_ENGINE_CHAT_BASE_URL.
/// String and null leaves take the raw value; other leaves parse it as JSON.
AppConfig load_app_config(const std::optional<std::string>& path,
                          const EnvLookup& env = process_env);

/// Environment variable names recognized by load_app_config.
std::vector<std::string> config_env_names();

}  // namespace midsmith

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

#include <filesystem>
#include <string>

#include <json.hpp>

#include "midsmith/eval/metrics.hpp"

namespace midsmith {

/// Report document. Keys are sorted; every metric value is a number with
/// four decimals, and each rational also appears exactly as "acc_exact".
nlohmann::json report_json(const MsReport& ms, const CoherenceReport* coherence);

/// Pretty JSON with floats printed as %.4f.
std::string dump_fixed4(const nlohmann::json& j);

/// Table laid out by round (rows) and scenario (columns), percentages.
std::string render_table(const MsReport& ms, const CoherenceReport* coherence);

/// Writes report.json and report.txt into `dir`. Byte-identical for equal
/// inputs; the coherence section is omitted when `coherence` is null.
void write_report(const MsReport& ms, const CoherenceReport* coherence,
                  const std::filesystem::path& dir);

/// Reads the modality-switching section back from report JSON.
MsReport ms_report_from_json(const nlohmann::json& j);

}  // namespace midsmith

// Copyright 2026 The karr-assess Authors.
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

// Report files. Every method writes the same JSON layout (schema_version 1):
// a config echo, summary counts, per-relation aggregates, and a per_fact
// array whose entries always carry subject, relation, object, method, known
// and score, so reports from different methods join on the fact ids.

#ifndef KARR_REPORT_HPP_
#define KARR_REPORT_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "karr/baselines.hpp"
#include "karr/engine.hpp"

namespace karr {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const KarrResult& result);
KarrResult karr_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BaselineVerdict& verdict);
BaselineVerdict baseline_verdict_from_json(const nlohmann::json& j);

// Method parameters only; worker count and file paths are excluded so the
// result doubles as a journal fingerprint.
nlohmann::json config_to_json(const KarrConfig& config);
nlohmann::json config_to_json(const BaselineConfig& config);

// `run` is merged into the config echo (suite paths, scorer spec, ...).
nlohmann::json report_to_json(const SuiteReport& report,
                              const nlohmann::json& run = nlohmann::json::object());
nlohmann::json report_to_json(const BaselineReport& report,
                              const nlohmann::json& run = nlohmann::json::object());

// subject,relation,object,karr_r,karr_s,karr,flags
void write_karr_csv(const std::filesystem::path& path, const SuiteReport& report);
// subject,relation,object,method,known,score
void write_baseline_csv(const std::filesystem::path& path,
                        const BaselineReport& report);

// Pretty-printed with a trailing newline; byte-stable for equal input.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

struct MethodScore {
  Fact fact;
  std::string method;
  bool known = false;
  std::optional<double> score;
};

// per_fact rows of any report written by this library.
std::vector<MethodScore> load_report_scores(const std::filesystem::path& path);

}  // namespace karr

#endif  // KARR_REPORT_HPP_

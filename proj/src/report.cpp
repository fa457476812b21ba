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

#include "karr/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "karr/errors.hpp"
#include "karr/jsonl.hpp"

namespace karr {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

std::optional<double> number_or_empty(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

json fact_fields(const Fact& f) {
  return {{"subject", f.subject.str()},
          {"relation", f.relation.str()},
          {"object", f.object.str()}};
}

Fact fact_from(const json& j) {
  return Fact{EntityId(j.at("subject").get<std::string>()),
              RelationId(j.at("relation").get<std::string>()),
              EntityId(j.at("object").get<std::string>())};
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

}  // namespace

json to_json(const KarrResult& r) {
  json j = fact_fields(r.fact);
  j["method"] = "karr";
  j["karr_r"] = optional_number(r.karr_r);
  j["karr_s"] = optional_number(r.karr_s);
  j["karr"] = optional_number(r.karr);
  j["score"] = optional_number(r.karr);
  j["numerator_logprob"] = optional_number(r.numerator_logprob);
  json flags = json::array();
  for (auto f : r.flags) flags.push_back(std::string(to_string(f)));
  j["flags"] = std::move(flags);
  json subjects = json::array();
  for (const auto& s : r.sampled_subjects) subjects.push_back(s.str());
  j["sampled_subjects"] = std::move(subjects);
  json relations = json::array();
  for (const auto& s : r.sampled_relations) relations.push_back(s.str());
  j["sampled_relations"] = std::move(relations);
  if (r.ate) j["ate"] = *r.ate;
  return j;
}

KarrResult karr_result_from_json(const json& j) {
  KarrResult r;
  r.fact = fact_from(j);
  r.karr_r = number_or_empty(j, "karr_r");
  r.karr_s = number_or_empty(j, "karr_s");
  r.karr = number_or_empty(j, "karr");
  r.numerator_logprob =
      number_or_empty(j, "numerator_logprob").value_or(-INFINITY);
  for (const auto& f : j.value("flags", json::array())) {
    r.flags.insert(karr_flag_from_string(f.get<std::string>()));
  }
  for (const auto& s : j.value("sampled_subjects", json::array())) {
    r.sampled_subjects.emplace_back(s.get<std::string>());
  }
  for (const auto& s : j.value("sampled_relations", json::array())) {
    r.sampled_relations.emplace_back(s.get<std::string>());
  }
  r.ate = number_or_empty(j, "ate");
  return r;
}

json to_json(const BaselineVerdict& v) {
  json j = fact_fields(v.fact);
  j["method"] = std::string(to_string(v.method));
  j["known"] = v.known;
  j["score"] = optional_number(v.score);
  return j;
}

BaselineVerdict baseline_verdict_from_json(const json& j) {
  BaselineVerdict v;
  v.fact = fact_from(j);
  v.method = baseline_method_from_string(j.at("method").get<std::string>());
  v.known = j.at("known").get<bool>();
  v.score = number_or_empty(j, "score");
  return v;
}

json config_to_json(const KarrConfig& c) {
  return {{"method", "karr"},
          {"k", c.k},
          {"seed", c.seed},
          {"threshold", c.threshold},
          {"ratio_cap", c.ratio_cap},
          {"length_normalize", c.length_normalize},
          {"subject_pool", std::string(to_string(c.subject_pool))},
          {"with_ate", c.with_ate}};
}

json config_to_json(const BaselineConfig& c) {
  json j = {{"method", std::string(to_string(c.method))},
            {"max_tokens", c.max_tokens}};
  if (c.method == BaselineMethod::kKPrompts) {
    j["prompts"] = c.prompts;
    j["threshold"] = c.threshold;
    j["seed"] = c.seed;
  }
  return j;
}

json report_to_json(const SuiteReport& report, const json& run) {
  json config = config_to_json(report.config);
  config.update(run);
  json per_relation = json::object();
  for (const auto& [id, rel] : report.per_relation) {
    per_relation[id.str()] = {{"mean_karr", optional_number(rel.mean_karr)},
                              {"known_fraction", rel.known_fraction},
                              {"fact_count", rel.fact_count},
                              {"known_count", rel.known_count}};
  }
  json per_fact = json::array();
  for (const auto& r : report.per_fact) {
    json j = to_json(r);
    j["known"] = r.known(report.config.threshold);
    per_fact.push_back(std::move(j));
  }
  return {{"schema_version", kReportSchemaVersion},
          {"method", "karr"},
          {"config", std::move(config)},
          {"overall_karr_score", report.overall_karr_score},
          {"assessed", report.assessed},
          {"known", report.known},
          {"object_all_oov", report.object_all_oov},
          {"per_relation", std::move(per_relation)},
          {"per_fact", std::move(per_fact)}};
}

json report_to_json(const BaselineReport& report, const json& run) {
  json config = config_to_json(report.config);
  config.update(run);
  json per_relation = json::object();
  for (const auto& [id, rel] : report.per_relation) {
    per_relation[id.str()] = {{"known_fraction", rel.known_fraction},
                              {"fact_count", rel.fact_count},
                              {"known_count", rel.known_count}};
  }
  json per_fact = json::array();
  for (const auto& v : report.per_fact) per_fact.push_back(to_json(v));
  return {{"schema_version", kReportSchemaVersion},
          {"method", std::string(to_string(report.config.method))},
          {"config", std::move(config)},
          {"overall_score", report.overall_score},
          {"assessed", report.assessed},
          {"known", report.known},
          {"per_relation", std::move(per_relation)},
          {"per_fact", std::move(per_fact)}};
}

void write_karr_csv(const std::filesystem::path& path,
                    const SuiteReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "subject,relation,object,karr_r,karr_s,karr,flags\n";
  for (const auto& r : report.per_fact) {
    std::string flags;
    for (auto f : r.flags) {
      if (!flags.empty()) flags += '|';
      flags += to_string(f);
    }
    out << csv_field(r.fact.subject.str()) << ','
        << csv_field(r.fact.relation.str()) << ','
        << csv_field(r.fact.object.str()) << ',' << csv_number(r.karr_r) << ','
        << csv_number(r.karr_s) << ',' << csv_number(r.karr) << ','
        << csv_field(flags) << '\n';
  }
}

void write_baseline_csv(const std::filesystem::path& path,
                        const BaselineReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "subject,relation,object,method,known,score\n";
  for (const auto& v : report.per_fact) {
    out << csv_field(v.fact.subject.str()) << ','
        << csv_field(v.fact.relation.str()) << ','
        << csv_field(v.fact.object.str()) << ',' << to_string(v.method) << ','
        << (v.known ? "true" : "false") << ',' << csv_number(v.score) << '\n';
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<MethodScore> load_report_scores(const std::filesystem::path& path) {
  const json report = read_json_file(path);
  if (report.value("schema_version", 0) != kReportSchemaVersion) {
    throw ValidationError(path.string() + ": unsupported report schema");
  }
  auto rows = report.find("per_fact");
  if (rows == report.end() || !rows->is_array()) {
    throw ValidationError(path.string() + ": report has no per_fact array");
  }
  std::vector<MethodScore> out;
  for (const auto& row : *rows) {
    MethodScore m;
    m.fact = fact_from(row);
    m.method = row.value("method", report.value("method", ""));
    m.known = row.value("known", false);
    m.score = number_or_empty(row, "score");
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace karr

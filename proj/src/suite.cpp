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

#include "karr/suite.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "karr/errors.hpp"
#include "karr/jsonl.hpp"
#include "karr/sampling.hpp"

namespace karr {

using nlohmann::json;

bool RelationTemplate::has_object_slot() const {
  return text.find(kObjectSlot) != std::string::npos;
}

std::string to_string(const Fact& fact) {
  return "(" + fact.subject.str() + ", " + fact.relation.str() + ", " +
         fact.object.str() + ")";
}

std::string normalize_alias(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

RelationTemplate validate_template(std::string_view raw_text,
                                   const RelationId& relation) {
  if (raw_text.empty()) {
    throw ValidationError("empty template for relation " + relation.str());
  }
  const std::string where =
      " in template \"" + std::string(raw_text) + "\" (" + relation.str() + ")";
  const std::size_t xs = count_occurrences(raw_text, kSubjectSlot);
  const std::size_t ys = count_occurrences(raw_text, kObjectSlot);
  if (xs == 0) throw ValidationError("no [X]" + where);
  if (xs > 1) throw ValidationError("multiple [X]" + where);
  if (ys > 1) throw ValidationError("multiple [Y]" + where);

  RelationTemplate out{relation, std::string(raw_text), false};
  if (ys == 1) {
    const std::size_t y = raw_text.find(kObjectSlot);
    if (y < raw_text.find(kSubjectSlot)) {
      throw ValidationError("[Y] precedes [X]" + where);
    }
    const std::size_t end = y + kObjectSlot.size();
    if (end != raw_text.size()) {
      out.text = std::string(raw_text.substr(0, end));
      out.truncated = true;
    }
  }
  return out;
}

KnowledgeSuite KnowledgeSuite::build(std::vector<Entity> entities,
                                     std::vector<Relation> relations,
                                     std::vector<Fact> facts) {
  KnowledgeSuite suite;
  for (auto& e : entities) {
    if (e.id.empty()) throw ValidationError("empty entity id");
    if (e.aliases.empty()) {
      throw ValidationError("entity " + e.id.str() + " has no aliases");
    }
    for (const auto& a : e.aliases) {
      if (a.empty()) {
        throw ValidationError("entity " + e.id.str() + " has an empty alias");
      }
    }
    EntityId id = e.id;
    if (!suite.entities_.emplace(id, std::move(e)).second) {
      throw ValidationError("duplicate entity id " + id.str());
    }
  }
  for (auto& r : relations) {
    if (r.id.empty()) throw ValidationError("empty relation id");
    if (r.templates.empty()) {
      throw ValidationError("relation " + r.id.str() + " has no templates");
    }
    for (const auto& t : r.templates) {
      if (t.relation != r.id) {
        throw ValidationError("template \"" + t.text + "\" filed under " +
                              r.id.str() + " references " + t.relation.str());
      }
    }
    RelationId id = r.id;
    if (!suite.relations_.emplace(id, std::move(r)).second) {
      throw ValidationError("duplicate relation id " + id.str());
    }
  }
  if (suite.relations_.empty()) {
    throw ValidationError("at least one relation required");
  }
  return suite.with_facts(std::move(facts));
}

KnowledgeSuite KnowledgeSuite::with_facts(std::vector<Fact> facts) const {
  if (facts.empty()) throw ValidationError("at least one fact required");
  std::set<std::string> missing;
  for (const auto& f : facts) {
    if (!has_entity(f.subject)) missing.insert("entity " + f.subject.str());
    if (!has_relation(f.relation)) {
      missing.insert("relation " + f.relation.str());
    }
    if (!has_entity(f.object)) missing.insert("entity " + f.object.str());
  }
  if (!missing.empty()) {
    std::string msg = "facts reference unknown ids:";
    for (const auto& m : missing) msg += " " + m + ";";
    msg.pop_back();
    throw ValidationError(msg);
  }
  KnowledgeSuite out;
  out.entities_ = entities_;
  out.relations_ = relations_;
  out.facts_ = std::move(facts);
  std::set<EntityId> subjects;
  for (const auto& f : out.facts_) subjects.insert(f.subject);
  out.fact_subjects_.assign(subjects.begin(), subjects.end());
  out.entity_ids_.reserve(entities_.size());
  for (const auto& [id, _] : entities_) out.entity_ids_.push_back(id);
  return out;
}

KnowledgeSuite KnowledgeSuite::with_templates(
    const std::map<RelationId, std::vector<RelationTemplate>>& templates) const {
  KnowledgeSuite out = *this;
  for (const auto& [id, list] : templates) {
    auto it = out.relations_.find(id);
    if (it == out.relations_.end()) {
      throw ValidationError("unknown relation " + id.str());
    }
    if (list.empty()) {
      throw ValidationError("relation " + id.str() + " has no templates");
    }
    it->second.templates = list;
  }
  return out;
}

const Entity& KnowledgeSuite::entity(const EntityId& id) const {
  auto it = entities_.find(id);
  if (it == entities_.end()) throw ValidationError("unknown entity " + id.str());
  return it->second;
}

const Relation& KnowledgeSuite::relation(const RelationId& id) const {
  auto it = relations_.find(id);
  if (it == relations_.end()) {
    throw ValidationError("unknown relation " + id.str());
  }
  return it->second;
}

std::vector<RelationId> KnowledgeSuite::relation_ids() const {
  std::vector<RelationId> ids;
  ids.reserve(relations_.size());
  for (const auto& [id, _] : relations_) ids.push_back(id);
  return ids;
}

std::size_t KnowledgeSuite::truncated_template_count() const {
  std::size_t n = 0;
  for (const auto& [_, r] : relations_) {
    for (const auto& t : r.templates) n += t.truncated ? 1 : 0;
  }
  return n;
}

// ---------------------------------------------------------------------------
// File formats

namespace {

std::string string_field(const json& rec, const char* key,
                         const std::string& path, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_string()) {
    throw ParseError(path, line, std::string("missing string field \"") + key +
                                     "\"");
  }
  std::string value = it->get<std::string>();
  if (value.empty()) {
    throw ParseError(path, line, std::string("empty field \"") + key + "\"");
  }
  return value;
}

Fact parse_fact(const json& rec, const std::string& path, std::size_t line) {
  return Fact{EntityId(string_field(rec, "subject", path, line)),
              RelationId(string_field(rec, "relation", path, line)),
              EntityId(string_field(rec, "object", path, line))};
}

std::vector<Entity> load_entities(const std::filesystem::path& path) {
  std::vector<Entity> out;
  for_each_jsonl(path, [&](const json& rec, std::size_t line) {
    Entity e;
    e.id = EntityId(string_field(rec, "id", path.string(), line));
    auto it = rec.find("aliases");
    if (it == rec.end() || !it->is_array()) {
      throw ParseError(path.string(), line, "missing array field \"aliases\"");
    }
    std::set<std::string> seen;
    for (const auto& a : *it) {
      if (!a.is_string()) {
        throw ParseError(path.string(), line, "alias is not a string");
      }
      std::string alias = normalize_alias(a.get<std::string>());
      if (alias.empty()) {
        throw ParseError(path.string(), line, "blank alias");
      }
      // Duplicates after normalization collapse onto the first occurrence.
      if (seen.insert(alias).second) e.aliases.push_back(std::move(alias));
    }
    if (e.aliases.empty()) {
      throw ParseError(path.string(), line,
                       "entity " + e.id.str() + " has no aliases");
    }
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<Relation> load_templates(const std::filesystem::path& path) {
  std::map<RelationId, Relation> by_id;
  for_each_jsonl(path, [&](const json& rec, std::size_t line) {
    RelationId id(string_field(rec, "relation", path.string(), line));
    std::string raw = string_field(rec, "template", path.string(), line);
    RelationTemplate t;
    try {
      t = validate_template(raw, id);
    } catch (const ValidationError& e) {
      throw ParseError(path.string(), line, e.what());
    }
    auto& rel = by_id[id];
    rel.id = id;
    rel.templates.push_back(std::move(t));
  });
  std::vector<Relation> out;
  for (auto& [_, r] : by_id) out.push_back(std::move(r));
  return out;
}

void write_lines(const std::filesystem::path& path,
                 const std::vector<json>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << '\n';
}

}  // namespace

std::vector<Fact> load_facts(const std::filesystem::path& path) {
  std::vector<Fact> facts;
  for_each_jsonl(path, [&](const json& rec, std::size_t line) {
    facts.push_back(parse_fact(rec, path.string(), line));
  });
  return facts;
}

void write_facts(const std::filesystem::path& path,
                 const std::vector<Fact>& facts) {
  std::vector<json> records;
  for (const auto& f : facts) {
    records.push_back({{"subject", f.subject.str()},
                       {"relation", f.relation.str()},
                       {"object", f.object.str()}});
  }
  write_lines(path, records);
}

KnowledgeSuite load_suite(const std::filesystem::path& facts_path,
                          const std::filesystem::path& entities_path,
                          const std::filesystem::path& templates_path) {
  auto entities = load_entities(entities_path);
  auto relations = load_templates(templates_path);
  auto facts = load_facts(facts_path);
  return KnowledgeSuite::build(std::move(entities), std::move(relations),
                               std::move(facts));
}

void save_suite(const KnowledgeSuite& suite,
                const std::filesystem::path& facts_path,
                const std::filesystem::path& entities_path,
                const std::filesystem::path& templates_path) {
  write_facts(facts_path, suite.facts());
  std::vector<json> entities;
  for (const auto& [id, e] : suite.entities()) {
    entities.push_back({{"id", id.str()}, {"aliases", e.aliases}});
  }
  write_lines(entities_path, entities);
  std::vector<json> templates;
  for (const auto& [id, r] : suite.relations()) {
    for (const auto& t : r.templates) {
      templates.push_back({{"relation", id.str()}, {"template", t.text}});
    }
  }
  write_lines(templates_path, templates);
}

std::vector<Fact> sample_facts(const KnowledgeSuite& suite,
                               std::size_t per_relation_cap,
                               std::uint64_t seed) {
  if (per_relation_cap == 0) {
    throw ValidationError("per-relation cap must be at least 1");
  }
  std::map<RelationId, std::vector<Fact>> grouped;
  for (const auto& f : suite.facts()) grouped[f.relation].push_back(f);
  std::vector<Fact> out;
  for (const auto& [rel, facts] : grouped) {
    Rng rng(mix_seed(seed, rel.str()));
    for (std::size_t i : sample_indices(facts.size(), per_relation_cap, rng)) {
      out.push_back(facts[i]);
    }
  }
  return out;
}

}  // namespace karr

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

// Symbolic knowledge suite: entity and relation catalogs plus fact triples.

#ifndef KARR_SUITE_HPP_
#define KARR_SUITE_HPP_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace karr {

// Opaque catalog identifier ("Q692", "P106"). The tag keeps entity and
// relation ids from being mixed up.
template <typename Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

 private:
  std::string value_;
};

using EntityId = Id<struct EntityTag>;
using RelationId = Id<struct RelationTag>;

struct Entity {
  EntityId id;
  std::vector<std::string> aliases;  // normalized, non-empty, unique
};

struct RelationTemplate {
  RelationId relation;
  std::string text;  // one "[X]", optionally ending in "[Y]"
  bool truncated = false;

  bool has_object_slot() const;
};

struct Relation {
  RelationId id;
  std::vector<RelationTemplate> templates;
};

struct Fact {
  EntityId subject;
  RelationId relation;
  EntityId object;

  friend auto operator<=>(const Fact&, const Fact&) = default;
  friend bool operator==(const Fact&, const Fact&) = default;
};

std::string to_string(const Fact& fact);

inline constexpr std::string_view kSubjectSlot = "[X]";
inline constexpr std::string_view kObjectSlot = "[Y]";

// Strips outer whitespace and collapses inner runs to one space.
std::string normalize_alias(std::string_view raw);

// Checks placeholder structure and truncates everything after a non-final
// "[Y]". Throws ValidationError.
RelationTemplate validate_template(std::string_view raw_text,
                                   const RelationId& relation);

// Immutable once built; safe to share across threads.
class KnowledgeSuite {
 public:
  // Validates referential integrity and non-emptiness. Throws ValidationError.
  static KnowledgeSuite build(std::vector<Entity> entities,
                              std::vector<Relation> relations,
                              std::vector<Fact> facts);

  const std::map<EntityId, Entity>& entities() const { return entities_; }
  const std::map<RelationId, Relation>& relations() const { return relations_; }
  const std::vector<Fact>& facts() const { return facts_; }

  const Entity& entity(const EntityId& id) const;
  const Relation& relation(const RelationId& id) const;
  bool has_entity(const EntityId& id) const { return entities_.contains(id); }
  bool has_relation(const RelationId& id) const {
    return relations_.contains(id);
  }

  // Entities that occur as the subject of at least one fact, sorted by id.
  const std::vector<EntityId>& fact_subjects() const { return fact_subjects_; }
  const std::vector<EntityId>& all_entity_ids() const { return entity_ids_; }
  std::vector<RelationId> relation_ids() const;

  std::size_t truncated_template_count() const;

  // Same catalogs, different fact list. Throws if a fact does not resolve.
  KnowledgeSuite with_facts(std::vector<Fact> facts) const;
  // Same catalogs and facts with each listed relation's templates replaced.
  KnowledgeSuite with_templates(
      const std::map<RelationId, std::vector<RelationTemplate>>& templates) const;

 private:
  std::map<EntityId, Entity> entities_;
  std::map<RelationId, Relation> relations_;
  std::vector<Fact> facts_;
  std::vector<EntityId> fact_subjects_;
  std::vector<EntityId> entity_ids_;
};

// JSON-lines loaders. "#" lines and blank lines are skipped. Parse errors
// carry the 1-based line number.
KnowledgeSuite load_suite(const std::filesystem::path& facts_path,
                          const std::filesystem::path& entities_path,
                          const std::filesystem::path& templates_path);

std::vector<Fact> load_facts(const std::filesystem::path& path);
void write_facts(const std::filesystem::path& path,
                 const std::vector<Fact>& facts);

// Writes the three files in the load_suite formats.
void save_suite(const KnowledgeSuite& suite,
                const std::filesystem::path& facts_path,
                const std::filesystem::path& entities_path,
                const std::filesystem::path& templates_path);

// Up to `per_relation_cap` facts per relation, uniformly without
// replacement. Output is grouped by relation id, each group in sampled order.
std::vector<Fact> sample_facts(const KnowledgeSuite& suite,
                               std::size_t per_relation_cap,
                               std::uint64_t seed);

}  // namespace karr

template <typename Tag>
struct std::hash<karr::Id<Tag>> {
  std::size_t operator()(const karr::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

#endif  // KARR_SUITE_HPP_

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

#include "karr/prompts.hpp"

#include <cctype>

#include "karr/errors.hpp"

namespace karr {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

}  // namespace

std::string fill_template(const RelationTemplate& tmpl,
                          std::string_view subject_alias) {
  std::string_view text = tmpl.text;
  const std::size_t y = text.find(kObjectSlot);
  if (y != std::string_view::npos) text = text.substr(0, y);
  const std::size_t x = text.find(kSubjectSlot);
  if (x == std::string_view::npos) {
    throw ValidationError("template without [X]: " + tmpl.text);
  }
  std::string out;
  out.reserve(text.size() + subject_alias.size());
  out.append(text.substr(0, x));
  out.append(subject_alias);
  out.append(text.substr(x + kSubjectSlot.size()));
  while (!out.empty() && is_space(out.back())) out.pop_back();
  return out;
}

std::string continuation_for(std::string_view prefix, std::string_view alias) {
  if (prefix.empty() || is_space(prefix.back())) return std::string(alias);
  std::string out;
  out.reserve(alias.size() + 1);
  out.push_back(' ');
  out.append(alias);
  return out;
}

std::vector<Prompt> render_alpha(const KnowledgeSuite& suite,
                                 const EntityId& subject) {
  const Entity& e = suite.entity(subject);
  std::vector<Prompt> out;
  out.reserve(e.aliases.size());
  for (std::size_t i = 0; i < e.aliases.size(); ++i) {
    out.push_back(Prompt{e.aliases[i], PromptSource{std::nullopt, i, {}}});
  }
  return out;
}

std::vector<Prompt> render_beta(const KnowledgeSuite& suite,
                                const EntityId& subject,
                                const RelationId& relation, bool substituted) {
  const Entity& e = suite.entity(subject);
  const Relation& r = suite.relation(relation);
  if (r.templates.empty()) {
    throw ValidationError("relation " + relation.str() + " has no templates");
  }
  std::optional<EntityId> sub;
  if (substituted) sub = subject;
  std::vector<Prompt> out;
  out.reserve(r.templates.size() * e.aliases.size());
  for (std::size_t t = 0; t < r.templates.size(); ++t) {
    for (std::size_t a = 0; a < e.aliases.size(); ++a) {
      out.push_back(Prompt{fill_template(r.templates[t], e.aliases[a]),
                           PromptSource{t, a, sub}});
    }
  }
  return out;
}

std::vector<Statement> render_gamma(const KnowledgeSuite& suite,
                                    std::span<const Prompt> prefixes,
                                    const EntityId& object) {
  const Entity& o = suite.entity(object);
  std::vector<Statement> out;
  out.reserve(prefixes.size() * o.aliases.size());
  for (const auto& p : prefixes) {
    for (std::size_t j = 0; j < o.aliases.size(); ++j) {
      out.push_back(Statement{p, continuation_for(p.text, o.aliases[j]), j});
    }
  }
  return out;
}

}  // namespace karr

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

// Text forms for a fact: subject-only prompts, subject+relation prompts, and
// full statements (prompt followed by an object alias).
//
// Texts are built only from registered aliases and templates, so every
// rendered prompt realizes its symbols by construction and no text scanning
// is needed to decide which symbols a text mentions.

#ifndef KARR_PROMPTS_HPP_
#define KARR_PROMPTS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "karr/suite.hpp"

namespace karr {

struct PromptSource {
  std::optional<std::size_t> template_index;  // empty: alias-only prompt
  std::size_t subject_alias_index = 0;
  std::optional<EntityId> substituted_subject;
};

struct Prompt {
  std::string text;
  PromptSource source;
};

struct Statement {
  Prompt prefix;
  std::string continuation;  // separator + object alias
  std::size_t object_alias_index = 0;
};

// Template text with "[X]" filled, cut before "[Y]", trailing space trimmed.
std::string fill_template(const RelationTemplate& tmpl,
                          std::string_view subject_alias);

// Continuation for an alias after `prefix`: one separating space unless the
// prefix is empty or already ends in whitespace.
std::string continuation_for(std::string_view prefix, std::string_view alias);

std::vector<Prompt> render_alpha(const KnowledgeSuite& suite,
                                 const EntityId& subject);

// |templates| x |subject aliases| prompts, template-major. Pass
// `substituted` when rendering a replacement subject for a baseline.
std::vector<Prompt> render_beta(const KnowledgeSuite& suite,
                                const EntityId& subject,
                                const RelationId& relation,
                                bool substituted = false);

// Every prefix paired with every alias of `object`, prefix-major.
std::vector<Statement> render_gamma(const KnowledgeSuite& suite,
                                    std::span<const Prompt> prefixes,
                                    const EntityId& object);

}  // namespace karr

#endif  // KARR_PROMPTS_HPP_

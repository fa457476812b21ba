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

#include "karr/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "karr/errors.hpp"
#include "karr/journal.hpp"
#include "karr/prompts.hpp"
#include "karr/report.hpp"
#include "karr/sampling.hpp"
#include "karr/workers.hpp"

namespace karr {

std::string_view to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::kLama1: return "lama1";
    case BaselineMethod::kLama10: return "lama10";
    case BaselineMethod::kKPrompts: return "kprompts";
    case BaselineMethod::kConsistentAcc: return "consistent_acc";
  }
  return "unknown";
}

BaselineMethod baseline_method_from_string(std::string_view name) {
  if (name == "lama1") return BaselineMethod::kLama1;
  if (name == "lama10") return BaselineMethod::kLama10;
  if (name == "kprompts") return BaselineMethod::kKPrompts;
  if (name == "consistent_acc" || name == "consistent-acc") {
    return BaselineMethod::kConsistentAcc;
  }
  throw ValidationError("unknown baseline method " + std::string(name));
}

namespace {

bool word_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c); }

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool any_alias_in(const std::vector<TopKItem>& generations, const Entity& object) {
  for (const auto& g : generations) {
    for (const auto& alias : object.aliases) {
      if (contains_alias(g.text, alias)) return true;
    }
  }
  return false;
}

std::string canonical_prompt(const KnowledgeSuite& suite, const Fact& fact,
                             const RelationTemplate& tmpl) {
  return fill_template(tmpl, suite.entity(fact.subject).aliases.front());
}

}  // namespace

bool contains_alias(std::string_view text, std::string_view alias) {
  if (alias.empty()) return false;
  const std::string hay = ascii_lower(text);
  const std::string needle = ascii_lower(alias);
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + 1)) {
    const bool left_ok =
        pos == 0 || !word_byte(static_cast<unsigned char>(hay[pos - 1])) ||
        !word_byte(static_cast<unsigned char>(needle.front()));
    const std::size_t end = pos + needle.size();
    const bool right_ok =
        end == hay.size() || !word_byte(static_cast<unsigned char>(hay[end])) ||
        !word_byte(static_cast<unsigned char>(needle.back()));
    if (left_ok && right_ok) return true;
  }
  return false;
}

BaselineVerdict lama_at_k(const Fact& fact, const KnowledgeSuite& suite,
                          const Scorer& scorer, std::size_t k,
                          std::size_t max_tokens) {
  const Relation& rel = suite.relation(fact.relation);
  const std::string prompt =
      canonical_prompt(suite, fact, rel.templates.front());
  const auto generations = scorer.topk_continuations(prompt, k, max_tokens);
  BaselineVerdict v;
  v.fact = fact;
  v.method = k == 1 ? BaselineMethod::kLama1 : BaselineMethod::kLama10;
  v.known = any_alias_in(generations, suite.entity(fact.object));
  return v;
}

BaselineVerdict kprompts(const Fact& fact, const KnowledgeSuite& suite,
                         const Scorer& scorer, std::size_t k,
                         std::uint64_t seed, double threshold) {
  if (k == 0) throw ValidationError("K-Prompts needs k >= 1");
  auto beta = render_beta(suite, fact.subject, fact.relation);
  std::vector<Prompt> chosen;
  if (k >= beta.size()) {
    chosen = std::move(beta);
  } else {
    Rng rng(fact_seed(seed, fact, "kprompts"));
    chosen = sample_without_replacement<Prompt>(beta, k, rng);
  }
  const auto statements = render_gamma(suite, chosen, fact.object);
  std::vector<ScoreItem> items;
  items.reserve(statements.size());
  for (const auto& st : statements) {
    items.push_back(ScoreItem{st.prefix.text, st.continuation});
  }
  const auto results = scorer.score_conditional_batch(items);
  const std::size_t per_prompt = suite.entity(fact.object).aliases.size();
  double sum = 0.0;
  for (std::size_t p = 0; p < chosen.size(); ++p) {
    double best = 0.0;
    for (std::size_t j = 0; j < per_prompt; ++j) {
      const ScoreResult& r = results[p * per_prompt + j];
      if (!r.oov) best = std::max(best, std::exp(r.logprob));
    }
    sum += best;
  }
  BaselineVerdict v;
  v.fact = fact;
  v.method = BaselineMethod::kKPrompts;
  v.score = sum / static_cast<double>(chosen.size());
  v.known = *v.score > threshold;
  return v;
}

BaselineVerdict consistent_acc(const Fact& fact, const KnowledgeSuite& suite,
                               const Scorer& scorer, std::size_t max_tokens) {
  const Relation& rel = suite.relation(fact.relation);
  const Entity& object = suite.entity(fact.object);
  BaselineVerdict v;
  v.fact = fact;
  v.method = BaselineMethod::kConsistentAcc;
  v.known = true;
  for (const auto& tmpl : rel.templates) {
    const auto top1 = scorer.topk_continuations(
        canonical_prompt(suite, fact, tmpl), 1, max_tokens);
    if (!any_alias_in(top1, object)) {
      v.known = false;
      break;
    }
  }
  return v;
}

BaselineVerdict run_baseline_fact(const Fact& fact, const KnowledgeSuite& suite,
                                  const Scorer& scorer,
                                  const BaselineConfig& config) {
  switch (config.method) {
    case BaselineMethod::kLama1:
      return lama_at_k(fact, suite, scorer, 1, config.max_tokens);
    case BaselineMethod::kLama10:
      return lama_at_k(fact, suite, scorer, 10, config.max_tokens);
    case BaselineMethod::kKPrompts:
      return kprompts(fact, suite, scorer, config.prompts, config.seed,
                      config.threshold);
    case BaselineMethod::kConsistentAcc:
      return consistent_acc(fact, suite, scorer, config.max_tokens);
  }
  throw ValidationError("unknown baseline method");
}

BaselineReport run_baseline(const std::vector<Fact>& facts,
                            const KnowledgeSuite& suite, const Scorer& scorer,
                            const BaselineConfig& config, Journal* journal) {
  if (facts.empty()) throw ValidationError("no facts to assess");
  if (config.workers < 1) throw ValidationError("workers must be at least 1");
  std::vector<std::optional<BaselineVerdict>> slots(facts.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (journal != nullptr) {
      if (auto done = journal->lookup(facts[i])) {
        slots[i] = baseline_verdict_from_json(*done);
        continue;
      }
    }
    todo.push_back(i);
  }
  parallel_for(todo.size(), config.workers, [&](std::size_t t) {
    const std::size_t i = todo[t];
    BaselineVerdict v = run_baseline_fact(facts[i], suite, scorer, config);
    if (journal != nullptr) journal->append(facts[i], to_json(v));
    slots[i] = std::move(v);
  });

  BaselineReport report;
  report.config = config;
  report.assessed = facts.size();
  for (auto& s : slots) {
    auto& rel = report.per_relation[s->fact.relation];
    ++rel.fact_count;
    if (s->known) {
      ++rel.known_count;
      ++report.known;
    }
    report.per_fact.push_back(std::move(*s));
  }
  for (auto& [_, rel] : report.per_relation) {
    rel.known_fraction = static_cast<double>(rel.known_count) /
                         static_cast<double>(rel.fact_count);
  }
  report.overall_score = 100.0 * static_cast<double>(report.known) /
                         static_cast<double>(report.assessed);
  return report;
}

}  // namespace karr

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

#include "karr/engine.hpp"

#include <algorithm>
#include <cmath>

#include "karr/errors.hpp"
#include "karr/journal.hpp"
#include "karr/logmath.hpp"
#include "karr/prompts.hpp"
#include "karr/report.hpp"
#include "karr/sampling.hpp"
#include "karr/workers.hpp"

namespace karr {

std::string_view to_string(SubjectPool pool) {
  return pool == SubjectPool::kCatalog ? "catalog" : "fact-subjects";
}

SubjectPool subject_pool_from_string(std::string_view name) {
  if (name == "fact-subjects") return SubjectPool::kFactSubjects;
  if (name == "catalog") return SubjectPool::kCatalog;
  throw ValidationError("subject pool must be fact-subjects or catalog");
}

void KarrConfig::validate() const {
  if (k < 1) throw ValidationError("K must be at least 1");
  if (!(ratio_cap > 0.0)) throw ValidationError("ratio cap must be positive");
  if (!std::isfinite(threshold)) throw ValidationError("threshold must be finite");
  if (workers < 1) throw ValidationError("workers must be at least 1");
}

std::string_view to_string(KarrFlag flag) {
  switch (flag) {
    case KarrFlag::kDegenerateRDenominator: return "degenerate_r_denominator";
    case KarrFlag::kDegenerateSDenominator: return "degenerate_s_denominator";
    case KarrFlag::kObjectAllOov: return "object_all_oov";
    case KarrFlag::kCapped: return "capped";
  }
  return "unknown";
}

KarrFlag karr_flag_from_string(std::string_view name) {
  for (auto f : {KarrFlag::kDegenerateRDenominator,
                 KarrFlag::kDegenerateSDenominator, KarrFlag::kObjectAllOov,
                 KarrFlag::kCapped}) {
    if (to_string(f) == name) return f;
  }
  throw ValidationError("unknown flag " + std::string(name));
}

namespace {

struct LogMass {
  double log_value = kLogZero;
  bool all_oov = true;  // no object alias was scoreable after any prompt
};

// log sum_p P(p) * sum_j P(cont_j | p) for a prompt family, one batch.
LogMass prompt_family_mass(const std::vector<Prompt>& prompts,
                           const EntityId& object, const KnowledgeSuite& suite,
                           const Scorer& scorer, const KarrConfig& config) {
  const auto statements = render_gamma(suite, prompts, object);
  std::vector<ScoreItem> items;
  items.reserve(prompts.size() + statements.size());
  for (const auto& p : prompts) items.push_back(ScoreItem{"", p.text});
  for (const auto& st : statements) {
    items.push_back(ScoreItem{st.prefix.text, st.continuation});
  }
  const auto results = scorer.score_conditional_batch(items);
  if (results.size() != items.size()) {
    throw TransportError("scorer returned " + std::to_string(results.size()) +
                         " results for " + std::to_string(items.size()) +
                         " items");
  }

  const std::size_t per_prompt = suite.entity(object).aliases.size();
  LogMass mass;
  std::vector<double> terms;
  std::vector<double> inner;
  terms.reserve(prompts.size());
  for (std::size_t k = 0; k < prompts.size(); ++k) {
    inner.clear();
    for (std::size_t j = 0; j < per_prompt; ++j) {
      const ScoreResult& r = results[prompts.size() + k * per_prompt + j];
      if (r.oov) continue;
      mass.all_oov = false;
      inner.push_back(r.logprob);
    }
    const ScoreResult& prior = results[k];
    // An unscoreable prompt contributes nothing.
    if (prior.oov) continue;
    double log_prior = prior.logprob;
    if (config.length_normalize) {
      log_prior /= static_cast<double>(
          std::max<std::size_t>(1, count_tokens(prompts[k].text)));
    }
    terms.push_back(log_prior + log_sum_exp(inner));
  }
  mass.log_value = log_sum_exp(terms);
  return mass;
}

LogMass numerator_mass(const EntityId& subject, const RelationId& relation,
                       const EntityId& object, const KnowledgeSuite& suite,
                       const Scorer& scorer, const KarrConfig& config) {
  return prompt_family_mass(render_beta(suite, subject, relation), object,
                            suite, scorer, config);
}

struct Ratio {
  double value;
  bool degenerate = false;
  bool capped = false;
};

Ratio finish_ratio(double log_num, double log_den, double cap) {
  if (log_den == kLogZero) return Ratio{cap, true, false};
  const double v = std::exp(log_num - log_den);
  if (v > cap) return Ratio{cap, false, true};
  return Ratio{v};
}

double checked_numerator(const Fact& fact, const KnowledgeSuite& suite,
                         const Scorer& scorer, const KarrConfig& config) {
  const LogMass m = numerator_mass(fact.subject, fact.relation, fact.object,
                                   suite, scorer, config);
  if (m.all_oov) {
    throw ObjectAllOovError("every alias of " + fact.object.str() +
                            " is out of vocabulary for fact " + to_string(fact));
  }
  return m.log_value;
}

double log_alpha_denominator(const Fact& fact, const KnowledgeSuite& suite,
                             const Scorer& scorer, const KarrConfig& config) {
  return prompt_family_mass(render_alpha(suite, fact.subject), fact.object,
                            suite, scorer, config)
      .log_value;
}

struct SubjectDenominator {
  double log_value;
  std::vector<EntityId> sampled;
};

SubjectDenominator log_subject_denominator(const Fact& fact,
                                           double log_numerator,
                                           const KnowledgeSuite& suite,
                                           const Scorer& scorer,
                                           const KarrConfig& config) {
  const std::vector<EntityId>& pool =
      config.subject_pool == SubjectPool::kCatalog ? suite.all_entity_ids()
                                                   : suite.fact_subjects();
  if (pool.empty()) throw ValidationError("subject pool is empty");
  SubjectDenominator out;
  if (config.k >= pool.size()) {
    out.sampled = pool;
  } else {
    Rng rng(fact_seed(config.seed, fact, "subjects"));
    out.sampled = sample_without_replacement<EntityId>(pool, config.k, rng);
  }
  std::vector<double> logs;
  logs.reserve(out.sampled.size());
  for (const auto& s : out.sampled) {
    if (s == fact.subject) {
      logs.push_back(log_numerator);
    } else {
      logs.push_back(
          numerator_mass(s, fact.relation, fact.object, suite, scorer, config)
              .log_value);
    }
  }
  out.log_value =
      log_sum_exp(logs) - std::log(static_cast<double>(out.sampled.size()));
  return out;
}

}  // namespace

double fact_numerator(const Fact& fact, const KnowledgeSuite& suite,
                      const Scorer& scorer, const KarrConfig& config) {
  return checked_numerator(fact, suite, scorer, config);
}

double karr_r(const Fact& fact, const KnowledgeSuite& suite,
              const Scorer& scorer, const KarrConfig& config) {
  const double num = checked_numerator(fact, suite, scorer, config);
  return finish_ratio(num, log_alpha_denominator(fact, suite, scorer, config),
                      config.ratio_cap)
      .value;
}

double karr_s(const Fact& fact, const KnowledgeSuite& suite,
              const Scorer& scorer, const KarrConfig& config) {
  const double num = checked_numerator(fact, suite, scorer, config);
  return finish_ratio(
             num,
             log_subject_denominator(fact, num, suite, scorer, config).log_value,
             config.ratio_cap)
      .value;
}

KarrResult karr_fact(const Fact& fact, const KnowledgeSuite& suite,
                     const Scorer& scorer, const KarrConfig& config) {
  KarrResult out;
  out.fact = fact;
  double num;
  try {
    num = checked_numerator(fact, suite, scorer, config);
  } catch (const ObjectAllOovError&) {
    out.numerator_logprob = kLogZero;
    out.flags.insert(KarrFlag::kObjectAllOov);
    return out;
  }
  out.numerator_logprob = num;

  const Ratio r = finish_ratio(
      num, log_alpha_denominator(fact, suite, scorer, config), config.ratio_cap);
  if (r.degenerate) out.flags.insert(KarrFlag::kDegenerateRDenominator);
  if (r.capped) out.flags.insert(KarrFlag::kCapped);

  auto subj = log_subject_denominator(fact, num, suite, scorer, config);
  const Ratio s = finish_ratio(num, subj.log_value, config.ratio_cap);
  if (s.degenerate) out.flags.insert(KarrFlag::kDegenerateSDenominator);
  if (s.capped) out.flags.insert(KarrFlag::kCapped);

  out.karr_r = r.value;
  out.karr_s = s.value;
  out.karr = std::sqrt(r.value * s.value);
  out.sampled_subjects = std::move(subj.sampled);

  if (config.with_ate) {
    AteResult ate = ate_fact(fact, suite, scorer, config);
    out.ate = ate.ate;
    out.sampled_relations = std::move(ate.sampled_relations);
  }
  return out;
}

AteResult ate_fact(const Fact& fact, const KnowledgeSuite& suite,
                   const Scorer& scorer, const KarrConfig& config) {
  const double num = checked_numerator(fact, suite, scorer, config);
  std::vector<RelationId> pool = suite.relation_ids();
  AteResult out;
  if (config.k >= pool.size()) {
    out.sampled_relations = std::move(pool);
  } else {
    Rng rng(fact_seed(config.seed, fact, "relations"));
    out.sampled_relations =
        sample_without_replacement<RelationId>(pool, config.k, rng);
  }
  std::vector<double> logs;
  for (const auto& r : out.sampled_relations) {
    logs.push_back(r == fact.relation
                       ? num
                       : numerator_mass(fact.subject, r, fact.object, suite,
                                        scorer, config)
                             .log_value);
  }
  out.treated = std::exp(num);
  out.control = std::exp(log_sum_exp(logs) -
                         std::log(static_cast<double>(logs.size())));
  out.ate = out.treated - out.control;
  return out;
}

SuiteReport summarize(std::vector<KarrResult> results,
                      const KarrConfig& config) {
  SuiteReport report;
  report.config = config;
  report.assessed = results.size();
  std::map<RelationId, double> karr_sums;
  std::map<RelationId, std::size_t> karr_counts;
  for (const auto& r : results) {
    auto& rel = report.per_relation[r.fact.relation];
    ++rel.fact_count;
    if (r.flags.contains(KarrFlag::kObjectAllOov)) ++report.object_all_oov;
    if (r.karr) {
      karr_sums[r.fact.relation] += *r.karr;
      ++karr_counts[r.fact.relation];
    }
    if (r.known(config.threshold)) {
      ++rel.known_count;
      ++report.known;
    }
  }
  for (auto& [id, rel] : report.per_relation) {
    rel.known_fraction =
        static_cast<double>(rel.known_count) / static_cast<double>(rel.fact_count);
    if (karr_counts[id] > 0) {
      rel.mean_karr = karr_sums[id] / static_cast<double>(karr_counts[id]);
    }
  }
  report.overall_karr_score =
      report.assessed == 0
          ? 0.0
          : 100.0 * static_cast<double>(report.known) /
                static_cast<double>(report.assessed);
  report.per_fact = std::move(results);
  return report;
}

SuiteReport assess_suite(const std::vector<Fact>& facts,
                         const KnowledgeSuite& suite, const Scorer& scorer,
                         const KarrConfig& config, Journal* journal) {
  config.validate();
  if (facts.empty()) throw ValidationError("no facts to assess");
  std::vector<std::optional<KarrResult>> slots(facts.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (journal != nullptr) {
      if (auto done = journal->lookup(facts[i])) {
        slots[i] = karr_result_from_json(*done);
        continue;
      }
    }
    todo.push_back(i);
  }
  parallel_for(todo.size(), config.workers, [&](std::size_t t) {
    const std::size_t i = todo[t];
    KarrResult r = karr_fact(facts[i], suite, scorer, config);
    if (journal != nullptr) journal->append(facts[i], to_json(r));
    slots[i] = std::move(r);
  });
  std::vector<KarrResult> results;
  results.reserve(slots.size());
  for (auto& s : slots) results.push_back(std::move(*s));
  return summarize(std::move(results), config);
}

}  // namespace karr

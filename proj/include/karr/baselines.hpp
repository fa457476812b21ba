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

// Reference probes for left-to-right models: top-k generation containment
// (LAMA@1, LAMA@10), mean object probability over sampled prompts
// (K-Prompts), and top-1 accuracy across every paraphrase (Consistent-Acc).
//
// The canonical surface form of a fact is the subject's first alias and the
// relation's first template.

#ifndef KARR_BASELINES_HPP_
#define KARR_BASELINES_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "karr/scorer.hpp"
#include "karr/suite.hpp"

namespace karr {

class Journal;

enum class BaselineMethod { kLama1, kLama10, kKPrompts, kConsistentAcc };

std::string_view to_string(BaselineMethod method);
BaselineMethod baseline_method_from_string(std::string_view name);

struct BaselineVerdict {
  Fact fact;
  BaselineMethod method = BaselineMethod::kLama1;
  bool known = false;
  std::optional<double> score;  // K-Prompts mean probability only
};

// Case-insensitive match of `alias` in `text` bounded by non-word
// characters, so "art" does not match inside "Stuttgart".
bool contains_alias(std::string_view text, std::string_view alias);

inline constexpr std::size_t kDefaultMaxTokens = 8;
inline constexpr double kDefaultKPromptsThreshold = 0.13;

// Any of the top-k generations after the canonical prompt names the object.
// k other than 1 is reported as the lama10 method.
BaselineVerdict lama_at_k(const Fact& fact, const KnowledgeSuite& suite,
                          const Scorer& scorer, std::size_t k,
                          std::size_t max_tokens = kDefaultMaxTokens);

// Mean over k sampled template prompts of the best object-alias probability.
// With k >= |prompts| all prompts are used and the seed is irrelevant.
BaselineVerdict kprompts(const Fact& fact, const KnowledgeSuite& suite,
                         const Scorer& scorer, std::size_t k,
                         std::uint64_t seed,
                         double threshold = kDefaultKPromptsThreshold);

// Top-1 generation names the object for every template of the relation.
BaselineVerdict consistent_acc(const Fact& fact, const KnowledgeSuite& suite,
                               const Scorer& scorer,
                               std::size_t max_tokens = kDefaultMaxTokens);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kLama1;
  std::size_t prompts = 4;  // K-Prompts sample size
  std::size_t max_tokens = kDefaultMaxTokens;
  double threshold = kDefaultKPromptsThreshold;
  std::uint64_t seed = 0;
  std::size_t workers = 4;
};

BaselineVerdict run_baseline_fact(const Fact& fact, const KnowledgeSuite& suite,
                                  const Scorer& scorer,
                                  const BaselineConfig& config);

struct BaselineRelationSummary {
  std::size_t fact_count = 0;
  std::size_t known_count = 0;
  double known_fraction = 0.0;
};

struct BaselineReport {
  BaselineConfig config;
  double overall_score = 0.0;  // percent known
  std::size_t assessed = 0;
  std::size_t known = 0;
  std::map<RelationId, BaselineRelationSummary> per_relation;
  std::vector<BaselineVerdict> per_fact;
};

BaselineReport run_baseline(const std::vector<Fact>& facts,
                            const KnowledgeSuite& suite, const Scorer& scorer,
                            const BaselineConfig& config,
                            Journal* journal = nullptr);

}  // namespace karr

#endif  // KARR_BASELINES_HPP_

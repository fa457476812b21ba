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

// Meta-evaluations of an assessment method: spread of its overall score
// across prompt variants, its susceptibility to prompt-only shortcuts, and
// its agreement with human gold scores.

#ifndef KARR_ANALYSIS_HPP_
#define KARR_ANALYSIS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "karr/report.hpp"
#include "karr/scorer.hpp"
#include "karr/suite.hpp"

namespace karr {

struct GoldLabel {
  Fact fact;
  double mean_score = 0.0;  // in [0, 1]
};

// JSON-lines {"subject","relation","object","mean_score"}.
std::vector<GoldLabel> load_gold_labels(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Prompt-variance study

struct SpreadStats {
  double variance = 0.0;  // population variance
  double stddev = 0.0;
  std::vector<double> per_variant_scores;
};

SpreadStats population_spread(std::span<const double> scores);

// Variant v keeps only template v of every relation. Every relation needs at
// least `variants` templates (>= 2).
std::vector<KnowledgeSuite> template_variants(const KnowledgeSuite& suite,
                                              std::size_t variants);

// Runs overall_score once per variant suite and reports the spread.
SpreadStats variance_study(
    const KnowledgeSuite& suite, std::size_t variants,
    const std::function<double(const KnowledgeSuite&)>& overall_score);

// ---------------------------------------------------------------------------
// Spurious-correlation study

// Template text with the subject slot removed: "[X]" plus a directly
// following possessive and whitespace are dropped, then the first character
// is uppercased. "[X]'s birthplace is [Y]" -> "Birthplace is [Y]".
std::string subject_free_template(std::string_view text);

struct SpuriousFact {
  Fact base;
  EntityId replaced_object;
  std::string source = "top-5 subject-free prediction";

  Fact as_fact() const { return Fact{base.subject, base.relation, replaced_object}; }
};

struct SpuriousOptions {
  std::size_t top_n = 5;
  std::size_t templates_per_relation = 3;
  std::size_t facts_per_relation = 100;
  std::size_t max_tokens = 8;
  std::uint64_t seed = 0;
};

struct SpuriousSynthesis {
  std::vector<SpuriousFact> facts;
  std::map<RelationId, EntityId> high_frequency_object;
  std::vector<RelationId> skipped;  // no catalog-resolvable prediction
};

// For each relation, the subject-free prompts' top-n continuations are
// mapped to catalog entities by alias (case-insensitive). The entity with the
// most probability mass becomes the relation's high-frequency object, and up
// to facts_per_relation sampled facts get it as a replacement object unless
// it already is their object.
SpuriousSynthesis spurious_synthesize(const KnowledgeSuite& suite,
                                      std::span<const RelationId> relations,
                                      const Scorer& scorer,
                                      const SpuriousOptions& options = {});

std::vector<SpuriousFact> load_spurious_facts(const std::filesystem::path& path);
void write_spurious_facts(const std::filesystem::path& path,
                          std::span<const SpuriousFact> facts);

struct SpuriousMetrics {
  double sp = 0.0;                  // % of spurious facts judged known
  double true_positive_rate = 0.0;  // % of real facts judged known
  double delta_p = 0.0;             // sp - true_positive_rate
  std::size_t spurious_known = 0;
  std::size_t spurious_total = 0;
  std::size_t real_known = 0;
  std::size_t real_total = 0;
};

using KnownFn = std::function<bool(const Fact&)>;

SpuriousMetrics spurious_metrics(const KnownFn& judged_known,
                                 std::span<const Fact> real_facts,
                                 std::span<const SpuriousFact> spurious_facts);

// ---------------------------------------------------------------------------
// Agreement with gold labels

struct KendallResult {
  std::optional<double> tau;  // empty when either side is constant
  std::optional<double> p_value;
  std::string p_method;  // "exact" (n <= 10) or "normal"
  std::size_t n = 0;
  long long s = 0;  // concordant minus discordant pairs
};

// Tie-corrected tau-b in O(n log n).
std::optional<double> kendall_tau_b(std::span<const double> x,
                                    std::span<const double> y);

// tau-b with a two-sided p-value: exact permutation enumeration for
// n <= 10, normal approximation with tie-corrected variance above.
KendallResult kendall_tau(std::span<const double> x, std::span<const double> y);

// Pairs each gold fact with its report score; rows without a score use
// their 0/1 verdict.
// Throws if a gold fact is absent from the report.
KendallResult kendall_tau(const std::vector<MethodScore>& method,
                          const std::vector<GoldLabel>& gold);

struct RecallResult {
  std::optional<double> recall;  // empty when no gold fact is below cutoff
  std::size_t positives = 0;
  std::size_t flagged = 0;
};

// Share of gold-unknown facts (mean score < cutoff) the method calls unknown.
RecallResult recall_unknown(const std::vector<MethodScore>& method,
                            const std::vector<GoldLabel>& gold,
                            double cutoff = 0.5);

struct Calibration {
  double threshold = 0.0;
  double achieved_fraction = 0.0;
};

// Smallest threshold t with fraction(score > t) <= target. Candidates are
// the observed scores plus the value just below the minimum.
Calibration calibrate_threshold(std::span<const double> scores,
                                double target_known_fraction);

}  // namespace karr

#endif  // KARR_ANALYSIS_HPP_

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

// Knowledge assessment risk ratios for a fact (s, r, o).
//
// Numerator, the model's probability of o given s and r:
//   N(s, r, o) = sum_k P(beta_k) * sum_j P(" " + o_j | beta_k)
// over the template prompts beta_k of (s, r) and in-vocabulary aliases o_j.
//
// karr_r divides N by the subject-only baseline
//   D_r = sum_i P(alpha_i) * sum_j P(" " + o_j | alpha_i)
// over the subject's bare alias prompts alpha_i.
//
// karr_s divides N by the mean of N(s_u, r, o) over K subjects s_u drawn
// uniformly without replacement from the subject pool; with K at least the
// pool size the mean is exact.
//
// karr = sqrt(karr_r * karr_s). A fact is known when karr > threshold.
// All accumulation is in natural-log space.

#ifndef KARR_ENGINE_HPP_
#define KARR_ENGINE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "karr/scorer.hpp"
#include "karr/suite.hpp"

namespace karr {

class Journal;

enum class SubjectPool {
  kFactSubjects,  // entities that are the subject of some loaded fact
  kCatalog,       // every entity in the catalog
};

std::string_view to_string(SubjectPool pool);
SubjectPool subject_pool_from_string(std::string_view name);

struct KarrConfig {
  std::size_t k = 4;
  std::uint64_t seed = 0;
  double threshold = 22.0;
  double ratio_cap = 1e6;
  // Divide each prompt prior's log-probability by its token count.
  bool length_normalize = false;
  SubjectPool subject_pool = SubjectPool::kFactSubjects;
  // Also compute the subtraction-form treatment effect per fact.
  bool with_ate = false;
  std::size_t workers = 4;

  void validate() const;
};

enum class KarrFlag {
  kDegenerateRDenominator,
  kDegenerateSDenominator,
  kObjectAllOov,
  kCapped,
};

std::string_view to_string(KarrFlag flag);
KarrFlag karr_flag_from_string(std::string_view name);

struct KarrResult {
  Fact fact;
  std::optional<double> karr_r;
  std::optional<double> karr_s;
  std::optional<double> karr;  // empty when the object is all-OOV
  double numerator_logprob = 0.0;
  std::set<KarrFlag> flags;
  std::vector<RelationId> sampled_relations;
  std::vector<EntityId> sampled_subjects;
  std::optional<double> ate;

  bool known(double threshold) const { return karr && *karr > threshold; }
};

// log N(s, r, o). Throws ObjectAllOovError when every object alias is OOV.
double fact_numerator(const Fact& fact, const KnowledgeSuite& suite,
                      const Scorer& scorer, const KarrConfig& config = {});

double karr_r(const Fact& fact, const KnowledgeSuite& suite,
              const Scorer& scorer, const KarrConfig& config = {});
double karr_s(const Fact& fact, const KnowledgeSuite& suite,
              const Scorer& scorer, const KarrConfig& config = {});

// Never throws ObjectAllOovError; reports it as a flag instead.
KarrResult karr_fact(const Fact& fact, const KnowledgeSuite& suite,
                     const Scorer& scorer, const KarrConfig& config = {});

struct AteResult {
  double ate = 0.0;
  double treated = 0.0;  // N(s, r, o)
  double control = 0.0;  // mean of N(s, r_u, o) over sampled relations
  std::vector<RelationId> sampled_relations;
};

// Treatment effect of specifying r: N(s, r, o) minus its mean over K
// relations sampled uniformly from the catalog.
AteResult ate_fact(const Fact& fact, const KnowledgeSuite& suite,
                   const Scorer& scorer, const KarrConfig& config = {});

struct RelationSummary {
  std::optional<double> mean_karr;
  double known_fraction = 0.0;
  std::size_t fact_count = 0;
  std::size_t known_count = 0;
};

struct SuiteReport {
  KarrConfig config;
  double overall_karr_score = 0.0;  // percent of assessed facts known
  std::size_t assessed = 0;
  std::size_t known = 0;
  std::size_t object_all_oov = 0;
  std::map<RelationId, RelationSummary> per_relation;
  std::vector<KarrResult> per_fact;
};

// Overall score and per-relation summaries from per-fact results.
SuiteReport summarize(std::vector<KarrResult> results, const KarrConfig& config);

// Scores `facts` on config.workers threads. Completed facts are appended to
// `journal` when given, and facts already in it are not rescored. A
// transport failure aborts the run; the journal keeps what finished.
SuiteReport assess_suite(const std::vector<Fact>& facts,
                         const KnowledgeSuite& suite, const Scorer& scorer,
                         const KarrConfig& config, Journal* journal = nullptr);

}  // namespace karr

#endif  // KARR_ENGINE_HPP_

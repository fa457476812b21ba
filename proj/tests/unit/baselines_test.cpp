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

#include <cmath>

#include "doctest.h"
#include "karr/baselines.hpp"
#include "karr/errors.hpp"
#include "karr/journal.hpp"
#include "karr/report.hpp"
#include "test_util.hpp"

using namespace karr;

namespace {

const Fact kS1Job{EntityId("S1"), RelationId("R1"), EntityId("O1")};
const Fact kS2Job{EntityId("S2"), RelationId("R1"), EntityId("O1")};
const Fact kS2Poet{EntityId("S2"), RelationId("R1"), EntityId("O2")};

TableScorer tiny_table() {
  return TableScorer::from_file(karr::testing::fixture("tiny_kg") / "table.json");
}

}  // namespace

TEST_CASE("alias matching respects word boundaries") {
  CHECK(contains_alias(" playwright", "playwright"));
  CHECK(contains_alias(" Playwright and poet", "playwright"));
  CHECK(contains_alias("born in Stuttgart.", "Stuttgart"));
  CHECK_FALSE(contains_alias("born in Stuttgart", "art"));
  CHECK_FALSE(contains_alias("playwrights", "playwright"));
  CHECK(contains_alias("a new york city", "New York"));
  CHECK(contains_alias("wrote C++ code", "C++"));
  CHECK(contains_alias("\xC3\xA9t\xC3\xA9 Zo\xC3\xAB", "Zo\xC3\xAB"));
  CHECK_FALSE(contains_alias("Zo\xC3\xABs", "Zo\xC3\xAB"));
  CHECK_FALSE(contains_alias("anything", ""));
}

TEST_CASE("LAMA top-k") {
  const auto suite = karr::testing::tiny_kg().with_facts({kS1Job, kS2Job, kS2Poet});
  const auto t = tiny_table();
  auto v = lama_at_k(kS1Job, suite, t, 1);
  CHECK(v.known);
  CHECK(v.method == BaselineMethod::kLama1);
  CHECK_FALSE(v.score);
  CHECK_FALSE(lama_at_k(kS2Job, suite, t, 1).known);
  CHECK(lama_at_k(kS2Poet, suite, t, 1).known);
  v = lama_at_k(kS2Job, suite, t, 10);
  CHECK(v.known);
  CHECK(v.method == BaselineMethod::kLama10);
}

TEST_CASE("consistent accuracy needs every template") {
  const auto suite = karr::testing::tiny_kg().with_facts({kS1Job, kS2Job, kS2Poet});
  const auto t = tiny_table();
  CHECK(consistent_acc(kS1Job, suite, t).known);
  CHECK_FALSE(consistent_acc(kS2Job, suite, t).known);
  CHECK(consistent_acc(kS2Poet, suite, t).known);
}

TEST_CASE("K-Prompts mean of best object probability") {
  const auto suite = karr::testing::tiny_kg();
  const auto t = tiny_table();
  auto v = kprompts(kS1Job, suite, t, 10, 0);
  REQUIRE(v.score);
  CHECK(*v.score == doctest::Approx(0.3625).epsilon(1e-12));
  CHECK(v.known);
  CHECK_FALSE(kprompts(kS1Job, suite, t, 10, 0, 0.3625).known);
  CHECK(kprompts(kS1Job, suite, t, 10, 0, 0.3624).known);

  const double allowed[] = {0.5, 0.4, 0.3, 0.25};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto one = kprompts(kS1Job, suite, t, 1, seed);
    bool found = false;
    for (double a : allowed) found = found || std::fabs(*one.score - a) < 1e-12;
    CHECK(found);
    CHECK(*one.score == *kprompts(kS1Job, suite, t, 1, seed).score);
  }
  CHECK_THROWS_AS(kprompts(kS1Job, suite, t, 0, 0), ValidationError);
}

TEST_CASE("K-Prompts threshold is strict") {
  KnowledgeSuite suite = KnowledgeSuite::build(
      {{EntityId("A"), {"Al"}}, {EntityId("B"), {"Bo"}}},
      {{RelationId("r"), {validate_template("[X] likes [Y]", RelationId("r"))}}},
      {{EntityId("A"), RelationId("r"), EntityId("B")}});
  const TableScorer at(nlohmann::json{{"conditionals", {{"Al likes", {{" Bo", 0.13}}}}}});
  const TableScorer above(nlohmann::json{{"conditionals", {{"Al likes", {{" Bo", 0.14}}}}}});
  CHECK_FALSE(kprompts(suite.facts()[0], suite, at, 4, 0).known);
  CHECK(kprompts(suite.facts()[0], suite, above, 4, 0).known);
}

TEST_CASE("baseline suite run and resume") {
  karr::testing::TempDir dir;
  const std::vector<Fact> facts = {kS1Job, kS2Job, kS2Poet};
  const auto suite = karr::testing::tiny_kg().with_facts(facts);
  const auto t = tiny_table();
  BaselineConfig c;
  c.method = BaselineMethod::kLama1;
  BaselineReport first;
  {
    Journal j(dir / "b.jsonl", "lama", false);
    first = run_baseline(facts, suite, t, c, &j);
  }
  CHECK(first.known == 2);
  CHECK(first.overall_score == doctest::Approx(200.0 / 3.0));
  CHECK(first.per_relation.at(RelationId("R1")).fact_count == 3);
  Journal j(dir / "b.jsonl", "lama", true);
  CHECK(j.loaded() == 3);
  const auto second = run_baseline(facts, suite, t, c, &j);
  CHECK(report_to_json(first).dump() == report_to_json(second).dump());

  CHECK(baseline_method_from_string("consistent-acc") == BaselineMethod::kConsistentAcc);
  CHECK(baseline_method_from_string(to_string(BaselineMethod::kLama10)) ==
        BaselineMethod::kLama10);
  CHECK_THROWS_AS(baseline_method_from_string("lama5"), ValidationError);
  CHECK_THROWS_AS(run_baseline({}, suite, t, c), ValidationError);
}

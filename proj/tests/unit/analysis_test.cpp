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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>

#include "brute_force.hpp"
#include "doctest.h"
#include "karr/analysis.hpp"
#include "karr/engine.hpp"
#include "karr/errors.hpp"
#include "test_util.hpp"

using namespace karr;

namespace {

TableScorer table_at(const std::string& dir) {
  return TableScorer::from_file(karr::testing::fixture(dir) / "table.json");
}

MethodScore scored(const char* s, double score, bool known) {
  return MethodScore{Fact{EntityId(s), RelationId("r"), EntityId("o")}, "m", known, score};
}

GoldLabel gold(const char* s, double mean) {
  return GoldLabel{Fact{EntityId(s), RelationId("r"), EntityId("o")}, mean};
}

// Brute force over all n! index permutations.
double permutation_p(const std::vector<double>& x, const std::vector<double>& y) {
  const long long target = std::llabs(karr_oracle::pair_sum(x, y));
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  long long hits = 0, total = 0;
  std::vector<double> yy(y.size());
  do {
    for (std::size_t i = 0; i < idx.size(); ++i) yy[i] = y[idx[i]];
    hits += std::llabs(karr_oracle::pair_sum(x, yy)) >= target;
    ++total;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("population spread") {
  const std::vector<double> v = {10.0, 12.0, 14.0};
  const auto s = population_spread(v);
  CHECK(s.variance == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(s.stddev == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-12));
  CHECK(s.per_variant_scores == v);
  const std::vector<double> flat = {5.0, 5.0};
  CHECK(population_spread(flat).variance == 0.0);
}

TEST_CASE("template variants") {
  const auto suite = karr::testing::tiny_kg();
  CHECK_THROWS_WITH_AS(template_variants(suite, 2), doctest::Contains("R2"),
                       ValidationError);
  CHECK_THROWS_AS(template_variants(suite, 1), ValidationError);
  std::map<RelationId, std::vector<RelationTemplate>> two = {
      {RelationId("R2"),
       {validate_template("[X] speaks [Y]", RelationId("R2")),
        validate_template("[X] talks in [Y]", RelationId("R2"))}}};
  const auto wide = suite.with_templates(two);
  const auto variants = template_variants(wide, 2);
  REQUIRE(variants.size() == 2);
  CHECK(variants[1].relation(RelationId("R1")).templates.size() == 1);
  CHECK(variants[1].relation(RelationId("R1")).templates[0].text == "[X]'s job is [Y]");
  CHECK(variants[1].relation(RelationId("R2")).templates[0].text == "[X] talks in [Y]");

  const auto table = table_at("tiny_kg");
  const auto spread = variance_study(wide, 2, [&](const KnowledgeSuite& s) {
    KarrConfig c;
    return assess_suite(s.facts(), s, table, c).overall_karr_score;
  });
  CHECK(spread.per_variant_scores.size() == 2);
}

TEST_CASE("subject-free templates") {
  CHECK(subject_free_template("[X]'s birthplace is [Y]") == "Birthplace is [Y]");
  CHECK(subject_free_template("[X] worked as a [Y]") == "Worked as a [Y]");
  CHECK(subject_free_template("[X]\xE2\x80\x99s job is [Y]") == "Job is [Y]");
  CHECK(subject_free_template("[X]' home is [Y]") == "Home is [Y]");
  CHECK(subject_free_template("The capital of [X] is [Y]") == "The capital of is [Y]");
}

TEST_CASE("spurious synthesis on TINY-KG") {
  const auto suite = karr::testing::tiny_kg();
  const auto table = table_at("tiny_kg");
  const std::vector<RelationId> rels = {RelationId("R1"), RelationId("R2")};
  const auto syn = spurious_synthesize(suite, rels, table);
  CHECK(syn.high_frequency_object.at(RelationId("R1")) == EntityId("O2"));
  REQUIRE(syn.facts.size() == 1);
  CHECK(syn.facts[0].base == suite.facts()[0]);
  CHECK(syn.facts[0].replaced_object == EntityId("O2"));
  // "English" and "Italian" name no catalog entity.
  CHECK(syn.skipped == std::vector<RelationId>{RelationId("R2")});

  karr::testing::TempDir dir;
  write_spurious_facts(dir / "sp.jsonl", syn.facts);
  const auto back = load_spurious_facts(dir / "sp.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].as_fact() == syn.facts[0].as_fact());
  karr::testing::write_text(
      dir / "bad.jsonl",
      R"({"subject":"S1","relation":"R1","object":"O1","replaced_object":"O1"})" "\n");
  CHECK_THROWS_AS(load_spurious_facts(dir / "bad.jsonl"), ParseError);
}

TEST_CASE("shortcut fixture separates KaRR from LAMA") {
  const auto dir = karr::testing::fixture("shortcut");
  const auto suite = karr::testing::load_fixture(dir);
  const auto table = table_at("shortcut");
  const std::vector<RelationId> rels = {RelationId("born_in")};
  const auto syn = spurious_synthesize(suite, rels, table);
  REQUIRE(syn.facts.size() == 1);
  CHECK(syn.facts[0].replaced_object == EntityId("L"));
  const auto spurious_suite = suite.with_facts({syn.facts[0].as_fact()});
  KarrConfig c;
  const auto m = spurious_metrics(
      [&](const Fact& f) {
        return karr_fact(f, spurious_suite, table, c).known(c.threshold);
      },
      suite.facts(), syn.facts);
  CHECK(m.sp == 0.0);
  CHECK(m.true_positive_rate == 50.0);
  CHECK(m.delta_p == -50.0);
  CHECK(m.spurious_total == 1);
  CHECK(m.real_total == 2);
}

TEST_CASE("spurious metrics arithmetic") {
  const std::vector<Fact> real = {{EntityId("a"), RelationId("r"), EntityId("x")},
                                  {EntityId("b"), RelationId("r"), EntityId("y")}};
  const std::vector<SpuriousFact> sp = {{real[0], EntityId("y")}};
  const auto m = spurious_metrics([](const Fact&) { return true; }, real, sp);
  CHECK(m.sp == 100.0);
  CHECK(m.true_positive_rate == 100.0);
  CHECK(m.delta_p == 0.0);
  CHECK_THROWS_AS(spurious_metrics([](const Fact&) { return true; }, real, {}),
                  ValidationError);
}

TEST_CASE("Kendall tau-b") {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const std::vector<double> b = {5, 4, 3, 2, 1};
  const std::vector<double> flat = {2, 2, 2, 2, 2};
  CHECK(*kendall_tau_b(a, a) == doctest::Approx(1.0));
  CHECK(*kendall_tau_b(a, b) == doctest::Approx(-1.0));
  CHECK_FALSE(kendall_tau_b(a, flat));
  const auto r = kendall_tau(a, a);
  CHECK(r.p_method == "exact");
  CHECK(r.s == 10);
  // Only the identity permutation reaches |S| = 10 in either direction.
  CHECK(*r.p_value == doctest::Approx(2.0 / 120.0));
  const auto none = kendall_tau(a, flat);
  CHECK_FALSE(none.tau);
  CHECK_FALSE(none.p_value);
  CHECK_THROWS_AS(kendall_tau(std::vector<double>{1.0}, std::vector<double>{1.0}),
                  ValidationError);
  CHECK_THROWS_AS(kendall_tau(a, std::vector<double>{1.0, 2.0}), ValidationError);
}

TEST_CASE("Kendall tau-b matches pairwise counting with ties") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % 5);
      y[i] = static_cast<double>(rng() % 6);
    }
    const auto got = kendall_tau(x, y);
    const auto want = karr_oracle::pair_tau_b(x, y);
    REQUIRE(got.tau.has_value() == want.has_value());
    if (want) CHECK(*got.tau == doctest::Approx(*want).epsilon(1e-12));
    CHECK(got.s == karr_oracle::pair_sum(x, y));
    if (got.tau) CHECK(got.p_method == (n <= 10 ? "exact" : "normal"));
    if (got.p_value) CHECK((*got.p_value >= 0.0 && *got.p_value <= 1.0 + 1e-12));
  }
}

TEST_CASE("exact p-value equals full permutation enumeration") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    const unsigned levels = trial % 2 == 0 ? 1000 : 2 + rng() % 4;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % levels);
      y[i] = static_cast<double>(rng() % (trial % 3 == 0 ? 1000 : levels));
    }
    const auto got = kendall_tau(x, y);
    if (!got.tau) continue;
    CHECK(*got.p_value == doctest::Approx(permutation_p(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("tau and recall against gold labels") {
  const std::vector<MethodScore> m = {scored("a", 1.0, false), scored("b", 2.0, false),
                                      scored("c", 30.0, true), scored("d", 40.0, true)};
  const std::vector<GoldLabel> g = {gold("a", 0.1), gold("b", 0.2), gold("c", 0.8),
                                    gold("d", 0.9)};
  CHECK(*kendall_tau(m, g).tau == doctest::Approx(1.0));
  auto verdicts = m;
  for (auto& v : verdicts) v.score.reset();
  CHECK(*kendall_tau(verdicts, g).tau == doctest::Approx(4.0 / std::sqrt(24.0)));

  const std::vector<GoldLabel> g2 = {gold("a", 0.1), gold("b", 0.2), gold("c", 0.3),
                                     gold("d", 0.4)};
  auto r = recall_unknown(m, g2);
  CHECK(*r.recall == 0.5);
  CHECK(r.positives == 4);
  CHECK(r.flagged == 2);
  auto m2 = m;
  m2[2].known = false;
  CHECK(*recall_unknown(m2, g2).recall == 0.75);
  CHECK_FALSE(recall_unknown(m, g2, 0.05).recall);
  CHECK_THROWS_AS(kendall_tau(m, {gold("zz", 0.5), gold("a", 0.2)}), ValidationError);
}

TEST_CASE("gold label loading") {
  karr::testing::TempDir dir;
  karr::testing::write_text(
      dir / "g.jsonl",
      "# gold\n{\"subject\":\"a\",\"relation\":\"r\",\"object\":\"o\",\"mean_score\":0.25}\n\n");
  const auto g = load_gold_labels(dir / "g.jsonl");
  REQUIRE(g.size() == 1);
  CHECK(g[0].mean_score == 0.25);
  karr::testing::write_text(dir / "h.jsonl",
                            "{\"subject\":\"a\",\"relation\":\"r\",\"object\":\"o\",\"mean_score\":1.5}\n");
  CHECK_THROWS_WITH_AS(load_gold_labels(dir / "h.jsonl"), doctest::Contains(":1"), ParseError);
  karr::testing::write_text(dir / "i.jsonl", "{\"subject\":\"a\",\"relation\":\"r\"}\n");
  CHECK_THROWS_AS(load_gold_labels(dir / "i.jsonl"), ParseError);
}

TEST_CASE("threshold calibration") {
  const std::vector<double> s = {1, 2, 3, 4};
  auto c = calibrate_threshold(s, 0.5);
  CHECK(c.threshold == 2.0);
  CHECK(c.achieved_fraction == 0.5);
  c = calibrate_threshold(s, 1.0);
  CHECK(c.threshold < 1.0);
  CHECK(c.achieved_fraction == 1.0);
  c = calibrate_threshold(s, 0.0);
  CHECK(c.threshold == 4.0);
  CHECK(c.achieved_fraction == 0.0);
  c = calibrate_threshold(s, 0.6);
  CHECK(c.threshold == 2.0);
  const std::vector<double> ties = {5, 5, 5, 1};
  c = calibrate_threshold(ties, 0.5);
  CHECK(c.threshold == 5.0);
  CHECK(c.achieved_fraction == 0.0);
  CHECK_THROWS_AS(calibrate_threshold(s, 1.5), ValidationError);
  CHECK_THROWS_AS(calibrate_threshold({}, 0.5), ValidationError);
}

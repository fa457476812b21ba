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

#include "karr/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>

#include "karr/errors.hpp"
#include "karr/jsonl.hpp"
#include "karr/sampling.hpp"

namespace karr {

using nlohmann::json;

namespace {

Fact fact_from(const json& rec, const std::string& path, std::size_t line) {
  auto field = [&](const char* key) {
    auto it = rec.find(key);
    if (it == rec.end() || !it->is_string() || it->get<std::string>().empty()) {
      throw ParseError(path, line, std::string("missing string field \"") + key + "\"");
    }
    return it->get<std::string>();
  };
  return Fact{EntityId(field("subject")), RelationId(field("relation")),
              EntityId(field("object"))};
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<GoldLabel> load_gold_labels(const std::filesystem::path& path) {
  std::vector<GoldLabel> out;
  for_each_jsonl(path, [&](const json& rec, std::size_t line) {
    GoldLabel g;
    g.fact = fact_from(rec, path.string(), line);
    auto it = rec.find("mean_score");
    if (it == rec.end() || !it->is_number()) {
      throw ParseError(path.string(), line, "missing number \"mean_score\"");
    }
    g.mean_score = it->get<double>();
    if (!(g.mean_score >= 0.0 && g.mean_score <= 1.0)) {
      throw ParseError(path.string(), line, "mean_score outside [0, 1]");
    }
    out.push_back(std::move(g));
  });
  return out;
}

// ---------------------------------------------------------------------------

SpreadStats population_spread(std::span<const double> scores) {
  SpreadStats out;
  out.per_variant_scores.assign(scores.begin(), scores.end());
  if (scores.empty()) return out;
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  out.variance = ss / n;
  out.stddev = std::sqrt(out.variance);
  return out;
}

std::vector<KnowledgeSuite> template_variants(const KnowledgeSuite& suite,
                                              std::size_t variants) {
  if (variants < 2) throw ValidationError("variance study needs >= 2 variants");
  std::vector<std::string> short_relations;
  for (const auto& [id, r] : suite.relations()) {
    if (r.templates.size() < variants) short_relations.push_back(id.str());
  }
  if (!short_relations.empty()) {
    std::string msg = "relations with fewer than " + std::to_string(variants) +
                      " templates:";
    for (const auto& id : short_relations) msg += " " + id;
    throw ValidationError(msg);
  }
  std::vector<KnowledgeSuite> out;
  for (std::size_t v = 0; v < variants; ++v) {
    std::map<RelationId, std::vector<RelationTemplate>> pick;
    for (const auto& [id, r] : suite.relations()) {
      pick[id] = {r.templates[v]};
    }
    out.push_back(suite.with_templates(pick));
  }
  return out;
}

SpreadStats variance_study(
    const KnowledgeSuite& suite, std::size_t variants,
    const std::function<double(const KnowledgeSuite&)>& overall_score) {
  std::vector<double> scores;
  for (const auto& variant : template_variants(suite, variants)) {
    scores.push_back(overall_score(variant));
  }
  return population_spread(scores);
}

// ---------------------------------------------------------------------------

std::string subject_free_template(std::string_view text) {
  std::string out(text);
  const std::size_t x = out.find(kSubjectSlot);
  if (x == std::string::npos) return out;
  std::size_t end = x + kSubjectSlot.size();
  for (std::string_view marker : {"\xE2\x80\x99s", "'s", "\xE2\x80\x99", "'"}) {
    if (out.compare(end, marker.size(), marker) == 0) {
      end += marker.size();
      break;
    }
  }
  while (end < out.size() && std::isspace(static_cast<unsigned char>(out[end]))) {
    ++end;
  }
  out.erase(x, end - x);
  const std::size_t first = out.find_first_not_of(" \t");
  out.erase(0, first == std::string::npos ? out.size() : first);
  if (!out.empty()) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  }
  return out;
}

namespace {

std::string subject_free_prompt(const RelationTemplate& tmpl) {
  std::string text = subject_free_template(tmpl.text);
  const std::size_t y = text.find(kObjectSlot);
  if (y != std::string::npos) text.erase(y);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.pop_back();
  }
  return text;
}

std::string generation_key(std::string_view text) {
  std::string s = normalize_alias(text);
  while (!s.empty() && std::string_view(".,;:!?\"").find(s.back()) !=
                           std::string_view::npos) {
    s.pop_back();
  }
  return lower(s);
}

}  // namespace

SpuriousSynthesis spurious_synthesize(const KnowledgeSuite& suite,
                                      std::span<const RelationId> relations,
                                      const Scorer& scorer,
                                      const SpuriousOptions& options) {
  std::map<std::string, EntityId> by_alias;
  for (const auto& [id, e] : suite.entities()) {
    for (const auto& a : e.aliases) by_alias.emplace(lower(a), id);
  }
  std::map<RelationId, std::vector<Fact>> facts_by_relation;
  for (const auto& f : suite.facts()) facts_by_relation[f.relation].push_back(f);

  SpuriousSynthesis out;
  for (const auto& rel_id : relations) {
    const Relation& rel = suite.relation(rel_id);
    std::map<EntityId, double> mass;
    const std::size_t n_templates =
        std::min(options.templates_per_relation, rel.templates.size());
    for (std::size_t t = 0; t < n_templates; ++t) {
      const std::string prompt = subject_free_prompt(rel.templates[t]);
      for (const auto& item :
           scorer.topk_continuations(prompt, options.top_n, options.max_tokens)) {
        auto hit = by_alias.find(generation_key(item.text));
        if (hit != by_alias.end()) mass[hit->second] += std::exp(item.logprob);
      }
    }
    if (mass.empty()) {
      out.skipped.push_back(rel_id);
      continue;
    }
    auto best = std::max_element(
        mass.begin(), mass.end(),
        [](const auto& a, const auto& b) { return a.second < b.second; });
    const EntityId hf = best->first;
    out.high_frequency_object[rel_id] = hf;

    const auto& pool = facts_by_relation[rel_id];
    Rng rng(mix_seed(options.seed, "spurious:" + rel_id.str()));
    for (std::size_t i :
         sample_indices(pool.size(), options.facts_per_relation, rng)) {
      if (pool[i].object == hf) continue;
      out.facts.push_back(SpuriousFact{pool[i], hf});
    }
  }
  return out;
}

std::vector<SpuriousFact> load_spurious_facts(const std::filesystem::path& path) {
  std::vector<SpuriousFact> out;
  for_each_jsonl(path, [&](const json& rec, std::size_t line) {
    SpuriousFact s;
    s.base = fact_from(rec, path.string(), line);
    auto it = rec.find("replaced_object");
    if (it == rec.end() || !it->is_string()) {
      throw ParseError(path.string(), line, "missing \"replaced_object\"");
    }
    s.replaced_object = EntityId(it->get<std::string>());
    if (s.replaced_object == s.base.object) {
      throw ParseError(path.string(), line, "replaced_object equals object");
    }
    s.source = rec.value("source", s.source);
    out.push_back(std::move(s));
  });
  return out;
}

void write_spurious_facts(const std::filesystem::path& path,
                          std::span<const SpuriousFact> facts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& s : facts) {
    out << json{{"subject", s.base.subject.str()},
                {"relation", s.base.relation.str()},
                {"object", s.base.object.str()},
                {"replaced_object", s.replaced_object.str()},
                {"source", s.source}}
               .dump()
        << '\n';
  }
}

SpuriousMetrics spurious_metrics(const KnownFn& judged_known,
                                 std::span<const Fact> real_facts,
                                 std::span<const SpuriousFact> spurious_facts) {
  if (real_facts.empty() || spurious_facts.empty()) {
    throw ValidationError("spurious metrics need real and spurious facts");
  }
  SpuriousMetrics m;
  m.real_total = real_facts.size();
  m.spurious_total = spurious_facts.size();
  for (const auto& f : real_facts) m.real_known += judged_known(f) ? 1 : 0;
  for (const auto& s : spurious_facts) {
    m.spurious_known += judged_known(s.as_fact()) ? 1 : 0;
  }
  m.sp = 100.0 * static_cast<double>(m.spurious_known) /
         static_cast<double>(m.spurious_total);
  m.true_positive_rate = 100.0 * static_cast<double>(m.real_known) /
                         static_cast<double>(m.real_total);
  m.delta_p = m.sp - m.true_positive_rate;
  return m;
}

// ---------------------------------------------------------------------------
// Kendall tau-b

namespace {

struct TieCounts {
  long long pairs = 0;  // sum t(t-1)/2
  double v_t = 0.0;     // sum t(t-1)(2t+5)
  double v_1 = 0.0;     // sum t(t-1)
  double v_2 = 0.0;     // sum t(t-1)(t-2)
};

TieCounts tie_counts(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  TieCounts out;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double t = static_cast<double>(j - i);
    out.pairs += static_cast<long long>((j - i) * (j - i - 1) / 2);
    out.v_t += t * (t - 1) * (2 * t + 5);
    out.v_1 += t * (t - 1);
    out.v_2 += t * (t - 1) * (t - 2);
    i = j;
  }
  return out;
}

// Inversions (strictly decreasing pairs) by merge sort.
long long count_inversions(std::vector<double>& v, std::vector<double>& buf,
                           std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inv = count_inversions(v, buf, lo, mid) +
                  count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<long long>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return inv;
}

struct TauParts {
  long long s = 0;
  long long n0 = 0;
  TieCounts x_ties;
  TieCounts y_ties;
};

TauParts tau_parts(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  long long joint = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && x[order[j]] == x[order[i]] && y[order[j]] == y[order[i]]) ++j;
    joint += static_cast<long long>((j - i) * (j - i - 1) / 2);
    i = j;
  }
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> buf(n);
  const long long swaps = count_inversions(ys, buf, 0, n);

  TauParts p;
  p.x_ties = tie_counts(std::vector<double>(x.begin(), x.end()));
  p.y_ties = tie_counts(std::vector<double>(y.begin(), y.end()));
  p.n0 = static_cast<long long>(n * (n - 1) / 2);
  p.s = p.n0 - p.x_ties.pairs - p.y_ties.pairs + joint - 2 * swaps;
  return p;
}

std::optional<double> tau_from(const TauParts& p) {
  const long long dx = p.n0 - p.x_ties.pairs;
  const long long dy = p.n0 - p.y_ties.pairs;
  if (dx == 0 || dy == 0) return std::nullopt;
  return static_cast<double>(p.s) /
         std::sqrt(static_cast<double>(dx) * static_cast<double>(dy));
}

void check_pairs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("tau needs paired samples");
  if (x.size() < 2) throw ValidationError("tau needs at least 2 pairs");
}

// Fraction of equally likely reassignments of y to x whose |S| reaches |s|.
double exact_p_value(std::span<const double> x, std::span<const double> y,
                     const TauParts& p) {
  const std::size_t n = x.size();
  const long long target = p.s < 0 ? -p.s : p.s;
  if (p.x_ties.pairs == 0 && p.y_ties.pairs == 0) {
    // S = n0 - 2 * inversions; count permutations by inversions.
    std::vector<double> count(static_cast<std::size_t>(p.n0) + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t m = 2; m <= n; ++m) {
      std::vector<double> next(count.size(), 0.0);
      for (std::size_t k = 0; k < count.size(); ++k) {
        if (count[k] == 0.0) continue;
        for (std::size_t add = 0; add < m && k + add < next.size(); ++add) {
          next[k + add] += count[k];
        }
      }
      count = std::move(next);
    }
    double hits = 0.0, total = 0.0;
    for (std::size_t k = 0; k < count.size(); ++k) {
      const long long s = p.n0 - 2 * static_cast<long long>(k);
      if ((s < 0 ? -s : s) >= target) hits += count[k];
      total += count[k];
    }
    return hits / total;
  }
  // Permute the side with more ties: its distinct arrangements are fewer
  // and each stands for the same number of full permutations.
  const bool permute_x = p.x_ties.pairs > p.y_ties.pairs;
  std::span<const double> fixed = permute_x ? y : x;
  std::vector<double> moving(permute_x ? x.begin() : y.begin(),
                             permute_x ? x.end() : y.end());
  std::vector<int> sign(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sign[i * n + j] = (fixed[i] > fixed[j]) - (fixed[i] < fixed[j]);
    }
  }
  std::sort(moving.begin(), moving.end());
  long long hits = 0, total = 0;
  do {
    long long s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        s += sign[i * n + j] * ((moving[i] > moving[j]) - (moving[i] < moving[j]));
      }
    }
    if ((s < 0 ? -s : s) >= target) ++hits;
    ++total;
  } while (std::next_permutation(moving.begin(), moving.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

std::optional<double> kendall_tau_b(std::span<const double> x,
                                    std::span<const double> y) {
  check_pairs(x, y);
  return tau_from(tau_parts(x, y));
}

KendallResult kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_pairs(x, y);
  const TauParts p = tau_parts(x, y);
  KendallResult out;
  out.n = x.size();
  out.s = p.s;
  out.tau = tau_from(p);
  if (!out.tau) return out;

  const std::size_t n = x.size();
  if (n <= 10) {
    // Every reassignment of y to x is equally likely under independence.
    out.p_method = "exact";
    out.p_value = exact_p_value(x, y, p);
  } else {
    out.p_method = "normal";
    const double nn = static_cast<double>(n);
    const double v0 = nn * (nn - 1) * (2 * nn + 5);
    const double var = (v0 - p.x_ties.v_t - p.y_ties.v_t) / 18.0 +
                       p.x_ties.v_1 * p.y_ties.v_1 / (2.0 * nn * (nn - 1)) +
                       p.x_ties.v_2 * p.y_ties.v_2 /
                           (9.0 * nn * (nn - 1) * (nn - 2));
    const double z = static_cast<double>(p.s) / std::sqrt(var);
    out.p_value = std::erfc(std::fabs(z) / std::sqrt(2.0));
  }
  return out;
}

namespace {

std::map<Fact, const MethodScore*> index_scores(const std::vector<MethodScore>& m) {
  std::map<Fact, const MethodScore*> out;
  for (const auto& s : m) out.emplace(s.fact, &s);
  return out;
}

const MethodScore& find_score(const std::map<Fact, const MethodScore*>& idx,
                              const Fact& f) {
  auto it = idx.find(f);
  if (it == idx.end()) {
    throw ValidationError("gold fact " + to_string(f) + " is not in the report");
  }
  return *it->second;
}

}  // namespace

KendallResult kendall_tau(const std::vector<MethodScore>& method,
                          const std::vector<GoldLabel>& gold) {
  const auto idx = index_scores(method);
  std::vector<double> x, y;
  for (const auto& g : gold) {
    const MethodScore& m = find_score(idx, g.fact);
    x.push_back(m.score.value_or(m.known ? 1.0 : 0.0));
    y.push_back(g.mean_score);
  }
  return kendall_tau(x, y);
}

RecallResult recall_unknown(const std::vector<MethodScore>& method,
                            const std::vector<GoldLabel>& gold, double cutoff) {
  const auto idx = index_scores(method);
  RecallResult out;
  for (const auto& g : gold) {
    const MethodScore& m = find_score(idx, g.fact);
    if (g.mean_score < cutoff) {
      ++out.positives;
      if (!m.known) ++out.flagged;
    }
  }
  if (out.positives > 0) {
    out.recall =
        static_cast<double>(out.flagged) / static_cast<double>(out.positives);
  }
  return out;
}

Calibration calibrate_threshold(std::span<const double> scores,
                                double target_known_fraction) {
  if (scores.empty()) throw ValidationError("calibration needs scores");
  if (!(target_known_fraction >= 0.0 && target_known_fraction <= 1.0)) {
    throw ValidationError("target fraction must be in [0, 1]");
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto fraction_above = [&](double t) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
    return static_cast<double>(sorted.end() - it) / n;
  };
  std::vector<double> candidates = {
      std::nextafter(sorted.front(), -INFINITY)};
  for (double s : sorted) {
    if (s != candidates.back()) candidates.push_back(s);
  }
  for (double t : candidates) {
    const double f = fraction_above(t);
    if (f <= target_known_fraction) return Calibration{t, f};
  }
  return Calibration{sorted.back(), 0.0};
}

}  // namespace karr

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

#include "karr/scorer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "karr/errors.hpp"
#include "karr/jsonl.hpp"
#include "karr/prompts.hpp"
#include "karr/suite.hpp"

namespace karr {

using nlohmann::json;

ScoreResult Scorer::score_unconditional(std::string_view text) const {
  ScoreItem item{"", std::string(text)};
  return score_conditional_batch(std::span<const ScoreItem>(&item, 1)).front();
}

std::size_t count_tokens(std::string_view text) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

namespace {

double checked_log(const json& value, const std::string& what) {
  if (!value.is_number()) {
    throw ValidationError("probability is not a number for " + what);
  }
  const double p = value.get<double>();
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("probability out of [0,1] for " + what);
  }
  return std::log(p);
}

// Lenient UTF-8 decode: stray bytes map into a private range so they still
// count as distinct glyphs.
void for_each_code_point(std::string_view s, auto&& fn) {
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3
                             : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
      fn(static_cast<char32_t>(0xDC00 + c));
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? c : c & (0x7F >> len);
    for (int k = 1; k < len; ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    fn(cp);
    i += len;
  }
}

std::vector<TopKItem> rank(std::vector<TopKItem> items, std::size_t k) {
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.text < b.text;
  });
  if (items.size() > k) items.resize(k);
  return items;
}

void check_topk_args(std::size_t k, std::size_t max_tokens) {
  if (k == 0) throw ValidationError("top-k needs k >= 1");
  if (max_tokens == 0) throw ValidationError("top-k needs max_tokens >= 1");
}

std::string strip_leading_space(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return std::string(s.substr(i));
}

}  // namespace

// ---------------------------------------------------------------------------
// TableScorer

TableScorer::TableScorer(const json& table) {
  if (!table.is_object()) throw ValidationError("scorer table must be an object");
  auto add_text = [this](std::string_view text) {
    for_each_code_point(text, [this](char32_t cp) { alphabet_.insert(cp); });
  };
  if (auto it = table.find("priors"); it != table.end()) {
    for (const auto& [text, p] : it->items()) {
      priors_[text] = checked_log(p, "prior \"" + text + "\"");
      add_text(text);
    }
  }
  if (auto it = table.find("conditionals"); it != table.end()) {
    for (const auto& [prefix, row] : it->items()) {
      if (!row.is_object()) {
        throw ValidationError("conditionals for \"" + prefix + "\" must be an object");
      }
      auto& out = conditionals_[prefix];
      add_text(prefix);
      for (const auto& [cont, p] : row.items()) {
        out[cont] = checked_log(p,
                                "\"" + cont + "\" after \"" + prefix + "\"");
        add_text(cont);
      }
    }
  }
}

TableScorer TableScorer::from_file(const std::filesystem::path& path) {
  return TableScorer(read_json_file(path));
}

bool TableScorer::in_alphabet(std::string_view text) const {
  bool ok = true;
  for_each_code_point(text, [&](char32_t cp) {
    if (!alphabet_.contains(cp)) ok = false;
  });
  return ok;
}

ScoreResult TableScorer::score_one(const ScoreItem& item) const {
  if (item.continuation.empty()) {
    throw ValidationError("score item with empty continuation");
  }
  if (!in_alphabet(item.continuation)) return ScoreResult::out_of_vocabulary();
  if (item.prefix.empty()) {
    auto it = priors_.find(item.continuation);
    return it == priors_.end() ? ScoreResult{} : ScoreResult{it->second, false};
  }
  auto row = conditionals_.find(item.prefix);
  if (row == conditionals_.end()) return ScoreResult{};
  auto it = row->second.find(item.continuation);
  return it == row->second.end() ? ScoreResult{}
                                 : ScoreResult{it->second, false};
}

std::vector<ScoreResult> TableScorer::score_conditional_batch(
    std::span<const ScoreItem> items) const {
  std::vector<ScoreResult> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(score_one(item));
  return out;
}

std::vector<TopKItem> TableScorer::topk_continuations(
    std::string_view prefix, std::size_t k, std::size_t max_tokens) const {
  check_topk_args(k, max_tokens);
  std::vector<TopKItem> items;
  auto collect = [&](const std::unordered_map<std::string, double>& row) {
    for (const auto& [text, lp] : row) {
      if (std::isfinite(lp) && count_tokens(text) <= max_tokens) {
        items.push_back(TopKItem{text, lp});
      }
    }
  };
  if (prefix.empty()) {
    collect(priors_);
  } else if (auto row = conditionals_.find(std::string(prefix));
             row != conditionals_.end()) {
    collect(row->second);
  }
  return rank(std::move(items), k);
}

// ---------------------------------------------------------------------------
// UniformScorer

UniformScorer::UniformScorer(const KnowledgeSuite& suite) {
  for (const auto& [id, e] : suite.entities()) {
    for (const auto& a : e.aliases) continuations_.insert(a);
  }
  // First registration wins when two families render the same text.
  for (const auto& [id, e] : suite.entities()) {
    const double alpha_prior = std::log(1.0 / e.aliases.size());
    for (const auto& p : render_alpha(suite, id)) {
      prompt_priors_.emplace(p.text, alpha_prior);
    }
  }
  for (const auto& [id, e] : suite.entities()) {
    for (const auto& [rid, r] : suite.relations()) {
      auto beta = render_beta(suite, id, rid);
      const double prior = std::log(1.0 / beta.size());
      for (const auto& p : beta) prompt_priors_.emplace(p.text, prior);
    }
  }
}

std::vector<ScoreResult> UniformScorer::score_conditional_batch(
    std::span<const ScoreItem> items) const {
  const double uniform = std::log(1.0 / continuations_.size());
  std::vector<ScoreResult> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    if (item.continuation.empty()) {
      throw ValidationError("score item with empty continuation");
    }
    if (item.prefix.empty()) {
      if (auto it = prompt_priors_.find(item.continuation);
          it != prompt_priors_.end()) {
        out.push_back(ScoreResult{it->second, false});
        continue;
      }
    }
    if (continuations_.contains(strip_leading_space(item.continuation))) {
      out.push_back(ScoreResult{uniform, false});
    } else {
      out.push_back(ScoreResult::out_of_vocabulary());
    }
  }
  return out;
}

std::vector<TopKItem> UniformScorer::topk_continuations(
    std::string_view prefix, std::size_t k, std::size_t max_tokens) const {
  check_topk_args(k, max_tokens);
  const double uniform = std::log(1.0 / continuations_.size());
  std::vector<TopKItem> items;
  for (const auto& c : continuations_) {
    if (count_tokens(c) <= max_tokens) {
      items.push_back(TopKItem{continuation_for(prefix, c), uniform});
    }
  }
  return rank(std::move(items), k);
}

// ---------------------------------------------------------------------------
// Wire encoding

json score_results_to_json(std::span<const ScoreResult> results) {
  json arr = json::array();
  for (const auto& r : results) {
    json item = {{"oov", r.oov}};
    // JSON has no -inf; probability zero travels as null.
    item["logprob"] = (r.oov || !std::isfinite(r.logprob)) ? json(nullptr)
                                                          : json(r.logprob);
    arr.push_back(std::move(item));
  }
  return json{{"results", std::move(arr)}};
}

std::vector<ScoreResult> score_results_from_json(const json& body,
                                                 std::size_t expected) {
  auto it = body.find("results");
  if (!body.is_object() || it == body.end() || !it->is_array()) {
    throw TransportError("protocol violation: missing \"results\" array");
  }
  if (it->size() != expected) {
    throw TransportError("protocol violation: expected " +
                         std::to_string(expected) + " results, got " +
                         std::to_string(it->size()));
  }
  std::vector<ScoreResult> out;
  out.reserve(expected);
  for (const auto& r : *it) {
    if (!r.is_object()) throw TransportError("protocol violation: bad result");
    const bool oov = r.value("oov", false);
    if (oov) {
      out.push_back(ScoreResult::out_of_vocabulary());
      continue;
    }
    auto lp = r.find("logprob");
    if (lp == r.end() || lp->is_null()) {
      out.push_back(ScoreResult{});
    } else if (lp->is_number()) {
      double v = lp->get<double>();
      if (v > 0.0) throw TransportError("protocol violation: logprob > 0");
      out.push_back(ScoreResult{v, false});
    } else {
      throw TransportError("protocol violation: logprob is not a number");
    }
  }
  return out;
}

json topk_to_json(std::span<const TopKItem> items) {
  json arr = json::array();
  for (const auto& i : items) {
    arr.push_back({{"text", i.text}, {"logprob", i.logprob}});
  }
  return json{{"items", std::move(arr)}};
}

std::vector<TopKItem> topk_from_json(const json& body) {
  auto it = body.find("items");
  if (!body.is_object() || it == body.end() || !it->is_array()) {
    throw TransportError("protocol violation: missing \"items\" array");
  }
  std::vector<TopKItem> out;
  for (const auto& i : *it) {
    if (!i.is_object() || !i.contains("text") || !i["text"].is_string() ||
        !i.contains("logprob") || !i["logprob"].is_number()) {
      throw TransportError("protocol violation: bad top-k item");
    }
    out.push_back(TopKItem{i["text"].get<std::string>(),
                           i["logprob"].get<double>()});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Scorer> make_scorer(std::string_view spec,
                                    const KnowledgeSuite* suite,
                                    RemoteOptions remote) {
  if (spec == "uniform") {
    if (suite == nullptr) throw ValidationError("uniform scorer needs a suite");
    return std::make_unique<UniformScorer>(*suite);
  }
  if (spec.starts_with("table:")) {
    return std::make_unique<TableScorer>(
        TableScorer::from_file(std::string(spec.substr(6))));
  }
  if (spec.starts_with("remote:")) {
    return std::make_unique<RemoteScorer>(std::string(spec.substr(7)),
                                          std::move(remote));
  }
  throw ValidationError("scorer spec must be table:PATH, remote:URL or uniform, got \"" +
                        std::string(spec) + "\"");
}

}  // namespace karr

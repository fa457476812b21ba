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

// The only channel to a language model: conditional log-probabilities of
// continuations, unconditional log-probabilities of texts, and top-k
// continuations. All log-probabilities are natural logs.

#ifndef KARR_SCORER_HPP_
#define KARR_SCORER_HPP_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace karr {

class KnowledgeSuite;

struct ScoreItem {
  std::string prefix;        // may be empty
  std::string continuation;  // non-empty
};

struct ScoreResult {
  // -inf encodes probability zero; ignored when oov is set.
  double logprob = -std::numeric_limits<double>::infinity();
  bool oov = false;

  static ScoreResult out_of_vocabulary() { return ScoreResult{0.0, true}; }
};

struct TopKItem {
  std::string text;
  double logprob;
};

// Implementations must tolerate concurrent calls.
class Scorer {
 public:
  virtual ~Scorer() = default;

  // result[i] scores items[i]. Throws TransportError on backend failure.
  virtual std::vector<ScoreResult> score_conditional_batch(
      std::span<const ScoreItem> items) const = 0;

  // Up to k continuations of at most max_tokens tokens, best first.
  // Throws UnsupportedCapability when the backend cannot generate.
  virtual std::vector<TopKItem> topk_continuations(std::string_view prefix,
                                                   std::size_t k,
                                                   std::size_t max_tokens) const = 0;

  virtual std::string name() const = 0;

  // Same as scoring `text` after an empty prefix.
  ScoreResult score_unconditional(std::string_view text) const;
};

// Whitespace-delimited token count; the table and uniform backends use it
// for max_tokens and for the optional per-token normalization.
std::size_t count_tokens(std::string_view text);

// Explicit probability table:
//   {"priors": {text: p}, "conditionals": {prefix: {continuation: p}}}
// An empty prefix reads from "priors". Missing entries have probability 0.
// A continuation with a code point that appears nowhere in the table is OOV.
class TableScorer : public Scorer {
 public:
  explicit TableScorer(const nlohmann::json& table);
  static TableScorer from_file(const std::filesystem::path& path);

  std::vector<ScoreResult> score_conditional_batch(
      std::span<const ScoreItem> items) const override;
  std::vector<TopKItem> topk_continuations(std::string_view prefix,
                                           std::size_t k,
                                           std::size_t max_tokens) const override;
  std::string name() const override { return "table"; }

  bool in_alphabet(std::string_view text) const;

 private:
  ScoreResult score_one(const ScoreItem& item) const;

  std::unordered_map<std::string, double> priors_;
  std::unordered_map<std::string, std::unordered_map<std::string, double>>
      conditionals_;
  std::set<char32_t> alphabet_;
};

// Every catalog alias is an equally likely continuation after any non-empty
// prefix. Prompt priors are uniform within each prompt family: the alias
// prompts of one subject share probability 1, as do the template prompts of
// one (subject, relation) pair. Texts outside those sets are OOV.
class UniformScorer : public Scorer {
 public:
  explicit UniformScorer(const KnowledgeSuite& suite);

  std::vector<ScoreResult> score_conditional_batch(
      std::span<const ScoreItem> items) const override;
  std::vector<TopKItem> topk_continuations(std::string_view prefix,
                                           std::size_t k,
                                           std::size_t max_tokens) const override;
  std::string name() const override { return "uniform"; }

 private:
  std::set<std::string> continuations_;
  std::unordered_map<std::string, double> prompt_priors_;
};

struct RemoteOptions {
  std::size_t batch_size = 64;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  std::chrono::milliseconds timeout{30000};
  std::string bearer_token;  // empty: no Authorization header
};

// Client for the HTTP+JSON scoring protocol:
//   POST /v1/score, POST /v1/topk, GET /v1/info.
class RemoteScorer : public Scorer {
 public:
  explicit RemoteScorer(std::string base_url, RemoteOptions options = {});
  ~RemoteScorer() override;

  std::vector<ScoreResult> score_conditional_batch(
      std::span<const ScoreItem> items) const override;
  std::vector<TopKItem> topk_continuations(std::string_view prefix,
                                           std::size_t k,
                                           std::size_t max_tokens) const override;
  std::string name() const override { return "remote:" + base_url_; }

  struct Info {
    std::string model_name;
    std::vector<std::string> capabilities;
  };
  Info info() const;

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
  nlohmann::json get(const std::string& path) const;

  std::string base_url_;
  RemoteOptions options_;
};

// "table:PATH", "remote:URL", or "uniform" (needs the suite).
std::unique_ptr<Scorer> make_scorer(std::string_view spec,
                                    const KnowledgeSuite* suite,
                                    RemoteOptions remote = {});

// Wire encoding shared by the client, the test servers, and the bindings.
nlohmann::json score_results_to_json(std::span<const ScoreResult> results);
std::vector<ScoreResult> score_results_from_json(const nlohmann::json& body,
                                                 std::size_t expected);
nlohmann::json topk_to_json(std::span<const TopKItem> items);
std::vector<TopKItem> topk_from_json(const nlohmann::json& body);

}  // namespace karr

#endif  // KARR_SCORER_HPP_

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
#include <thread>

#include "httplib.h"
#include "karr/errors.hpp"
#include "karr/scorer.hpp"

namespace karr {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path_prefix;
};

Endpoint split_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ValidationError("remote scorer URL needs a scheme: " + url);
  }
  const std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

class Retryable : public TransportError {
 public:
  using TransportError::TransportError;
};

}  // namespace

RemoteScorer::RemoteScorer(std::string base_url, RemoteOptions options)
    : base_url_(std::move(base_url)), options_(std::move(options)) {
  split_url(base_url_);  // validate early
  if (options_.batch_size == 0) options_.batch_size = 1;
  if (options_.attempts < 1) options_.attempts = 1;
}

RemoteScorer::~RemoteScorer() = default;

namespace {

template <typename Call>
json with_retries(const RemoteOptions& opts, const std::string& what,
                  Call&& call) {
  auto backoff = opts.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return call();
    } catch (const Retryable& e) {
      if (attempt >= opts.attempts) {
        throw TransportError(what + " failed after " + std::to_string(attempt) +
                             " attempts: " + e.what());
      }
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

json decode_response(const httplib::Result& res, const std::string& what) {
  if (!res) {
    throw Retryable(what + ": " + httplib::to_string(res.error()));
  }
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::parse_error&) {
    if (res->status != 200) {
      throw Retryable(what + ": HTTP " + std::to_string(res->status));
    }
    throw Retryable(what + ": protocol violation: response is not JSON");
  }
  if (res->status != 200) {
    std::string msg = what + ": HTTP " + std::to_string(res->status);
    if (body.is_object() && body.contains("error") && body["error"].is_string()) {
      msg += ": " + body["error"].get<std::string>();
    }
    // Client errors and "not implemented" will not improve on retry.
    if ((res->status >= 400 && res->status < 500 && res->status != 429) ||
        res->status == 501) {
      throw TransportError(msg);
    }
    throw Retryable(msg);
  }
  return body;
}

}  // namespace

json RemoteScorer::post(const std::string& path, const json& body) const {
  const Endpoint ep = split_url(base_url_);
  const std::string full = ep.path_prefix + path;
  const std::string payload = body.dump();
  return with_retries(options_, "POST " + full, [&] {
    httplib::Client client(ep.origin);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    if (!options_.bearer_token.empty()) {
      client.set_bearer_token_auth(options_.bearer_token);
    }
    return decode_response(client.Post(full, payload, "application/json"),
                           "POST " + full);
  });
}

json RemoteScorer::get(const std::string& path) const {
  const Endpoint ep = split_url(base_url_);
  const std::string full = ep.path_prefix + path;
  return with_retries(options_, "GET " + full, [&] {
    httplib::Client client(ep.origin);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    if (!options_.bearer_token.empty()) {
      client.set_bearer_token_auth(options_.bearer_token);
    }
    return decode_response(client.Get(full), "GET " + full);
  });
}

std::vector<ScoreResult> RemoteScorer::score_conditional_batch(
    std::span<const ScoreItem> items) const {
  std::vector<ScoreResult> out;
  out.reserve(items.size());
  for (std::size_t start = 0; start < items.size();
       start += options_.batch_size) {
    const std::size_t end = std::min(items.size(), start + options_.batch_size);
    json arr = json::array();
    for (std::size_t i = start; i < end; ++i) {
      if (items[i].continuation.empty()) {
        throw ValidationError("score item with empty continuation");
      }
      arr.push_back(
          {{"prefix", items[i].prefix}, {"continuation", items[i].continuation}});
    }
    auto results =
        score_results_from_json(post("/v1/score", json{{"items", arr}}),
                                end - start);
    out.insert(out.end(), results.begin(), results.end());
  }
  return out;
}

std::vector<TopKItem> RemoteScorer::topk_continuations(
    std::string_view prefix, std::size_t k, std::size_t max_tokens) const {
  if (k == 0 || max_tokens == 0) {
    throw ValidationError("top-k needs k >= 1 and max_tokens >= 1");
  }
  json body = {{"prefix", std::string(prefix)},
               {"k", k},
               {"max_tokens", max_tokens}};
  json res;
  try {
    res = post("/v1/topk", body);
  } catch (const TransportError& e) {
    // A 404 or 501 on /v1/topk means the backend cannot generate.
    const std::string msg = e.what();
    if (msg.find("HTTP 404") != std::string::npos ||
        msg.find("HTTP 501") != std::string::npos) {
      throw UnsupportedCapability("backend " + base_url_ +
                                  " does not support top-k: " + msg);
    }
    throw;
  }
  auto items = topk_from_json(res);
  if (items.size() > k) items.resize(k);
  return items;
}

RemoteScorer::Info RemoteScorer::info() const {
  json body = get("/v1/info");
  Info info;
  info.model_name = body.value("model_name", "");
  if (auto it = body.find("capabilities"); it != body.end() && it->is_array()) {
    for (const auto& c : *it) {
      if (c.is_string()) info.capabilities.push_back(c.get<std::string>());
    }
  }
  return info;
}

}  // namespace karr

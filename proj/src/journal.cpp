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

#include "karr/journal.hpp"

#include "karr/errors.hpp"

namespace karr {

using nlohmann::json;

namespace {

constexpr int kJournalVersion = 1;

std::string fact_key(const Fact& f) { return to_string(f); }

}  // namespace

Journal::Journal(std::filesystem::path path, std::string fingerprint,
                 bool resume)
    : path_(std::move(path)) {
  bool has_header = false;
  if (resume && std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::parse_error&) {
        // A torn final line from an interrupted write is dropped.
        if (in.peek() == std::char_traits<char>::eof()) break;
        throw ParseError(path_.string(), line_no, "corrupt journal entry");
      }
      if (!has_header) {
        if (rec.value("journal", 0) != kJournalVersion) {
          throw ParseError(path_.string(), line_no, "not a journal file");
        }
        if (rec.value("fingerprint", "") != fingerprint) {
          throw ValidationError("journal " + path_.string() +
                                " was written with a different configuration");
        }
        has_header = true;
        continue;
      }
      Fact f{EntityId(rec.at("subject").get<std::string>()),
             RelationId(rec.at("relation").get<std::string>()),
             EntityId(rec.at("object").get<std::string>())};
      done_[fact_key(f)] = rec.at("result");
    }
    loaded_ = done_.size();
  }
  if (has_header) {
    out_.open(path_, std::ios::binary | std::ios::app);
  } else {
    out_.open(path_, std::ios::binary | std::ios::trunc);
    if (out_) {
      out_ << json{{"journal", kJournalVersion}, {"fingerprint", fingerprint}}
                  .dump()
           << '\n';
      out_.flush();
    }
  }
  if (!out_) throw Error("cannot write journal " + path_.string());
}

std::optional<json> Journal::lookup(const Fact& fact) const {
  auto it = done_.find(fact_key(fact));
  if (it == done_.end()) return std::nullopt;
  return it->second;
}

void Journal::append(const Fact& fact, const json& payload) {
  json rec = {{"subject", fact.subject.str()},
              {"relation", fact.relation.str()},
              {"object", fact.object.str()},
              {"result", payload}};
  const std::string line = rec.dump() + "\n";
  std::lock_guard<std::mutex> lock(mu_);
  out_ << line;
  out_.flush();
}

}  // namespace karr

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

// Append-only per-fact checkpoint. The first line carries a fingerprint of
// the run configuration; resuming against a different configuration fails.

#ifndef KARR_JOURNAL_HPP_
#define KARR_JOURNAL_HPP_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"
#include "karr/suite.hpp"

namespace karr {

class Journal {
 public:
  // resume=false starts a fresh file; resume=true loads completed entries
  // (a missing file is treated as empty).
  Journal(std::filesystem::path path, std::string fingerprint, bool resume);

  std::optional<nlohmann::json> lookup(const Fact& fact) const;
  // Thread-safe; each entry is flushed before returning.
  void append(const Fact& fact, const nlohmann::json& payload);

  std::size_t loaded() const { return loaded_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::map<std::string, nlohmann::json> done_;
  std::size_t loaded_ = 0;
  std::ofstream out_;
  std::mutex mu_;
};

}  // namespace karr

#endif  // KARR_JOURNAL_HPP_

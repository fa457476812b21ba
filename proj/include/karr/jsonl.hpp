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

#ifndef KARR_JSONL_HPP_
#define KARR_JSONL_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>

#include "json.hpp"

namespace karr {

// Calls fn(record, line_number) for each JSON object line. Blank lines and
// lines starting with "#" are skipped. Throws ParseError.
void for_each_jsonl(
    const std::filesystem::path& path,
    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace karr

#endif  // KARR_JSONL_HPP_

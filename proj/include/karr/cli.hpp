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

// The `assess` command line.

#ifndef KARR_CLI_HPP_
#define KARR_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace karr {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;    // usage, parse or validation error
inline constexpr int kExitTransport = 2;  // scorer unreachable after retries

// args[0] is the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace karr

#endif  // KARR_CLI_HPP_

// Copyright 2026 The choiscope Authors
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


// Command-line front end.  Verbs: inspect, convert, bsa, gen, compose,
// tensor.  Exit codes: 0 success, 1 I/O, parse or usage error, 2 validation
// or feasibility failure.

#ifndef CHOISCOPE_CLI_HPP_
#define CHOISCOPE_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace choiscope {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitValidation = 2;

inline constexpr const char* kReportSchemaVersion = "1";

// args excludes the program name.  Reports and generated files go to `out`
// unless --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace choiscope

#endif  // CHOISCOPE_CLI_HPP_

// Copyright 2026 The INSTA-Kernels Authors.
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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace insta::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kNumericError = 3 };

inline constexpr int kSchemaVersion = 1;

/// Parses argv, runs one subcommand and writes result.json, summary.csv and
/// config.effective.yaml into the output directory. Returns the exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Flat CSV of the document's "rows" array (header from the first row).
std::string csv_from_json(const nlohmann::ordered_json& doc);

}  // namespace insta::cli

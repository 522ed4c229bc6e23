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

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "insta/fsl/model.hpp"

namespace insta::fsl {

/// Text container: a version line, the config hash, the variant id, then one
/// `tensor <name> <rank> <dims...>` header per tensor followed by its values
/// in hexadecimal floating point (exact round trip), then `end`.
void save_checkpoint(const std::filesystem::path& path, ModelParams& model, std::uint64_t config_hash);

/// Restores every tensor of `model.named_state()`. Throws ConfigError on a
/// version, hash, variant, name or shape mismatch, or a truncated file.
void load_checkpoint(const std::filesystem::path& path, ModelParams& model, std::uint64_t config_hash);

/// FNV-1a of a string, for hashing the effective configuration.
std::uint64_t fnv1a(std::string_view text);

}  // namespace insta::fsl

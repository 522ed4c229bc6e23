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

#include "insta/fsl/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "insta/errors.hpp"

namespace insta::fsl {

namespace {

constexpr const char* kMagic = "insta-checkpoint";
constexpr int kVersion = 1;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string hexfloat(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw ConfigError("checkpoint " + path.string() + ": " + what);
}

}  // namespace

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save_checkpoint(const std::filesystem::path& path, ModelParams& model, std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out << kMagic << ' ' << kVersion << '\n';
  out << "config_hash " << hex64(config_hash) << '\n';
  out << "variant " << to_string(model.variant) << '\n';
  for (const auto& [name, tensor] : model.named_state()) {
    out << "tensor " << name << ' ' << tensor->rank();
    for (std::size_t d : tensor->shape()) out << ' ' << d;
    out << '\n';
    std::size_t col = 0;
    for (double v : tensor->data()) {
      out << hexfloat(v) << (++col % 8 == 0 ? '\n' : ' ');
    }
    if (col % 8 != 0) out << '\n';
  }
  out << "end\n";
  if (!out) fail(path, "write failed");
}

void load_checkpoint(const std::filesystem::path& path, ModelParams& model, std::uint64_t config_hash) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open for reading");
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != kMagic) fail(path, "not a checkpoint file");
  if (version != kVersion) fail(path, "unsupported version " + std::to_string(version));
  std::string hash;
  if (!(in >> word >> hash) || word != "config_hash") fail(path, "missing config_hash");
  if (hash != hex64(config_hash)) fail(path, "config hash " + hash + " does not match " + hex64(config_hash));
  std::string variant;
  if (!(in >> word >> variant) || word != "variant") fail(path, "missing variant");
  if (variant != to_string(model.variant)) {
    fail(path, "variant " + variant + " does not match model variant " + std::string(to_string(model.variant)));
  }
  for (const auto& [name, tensor] : model.named_state()) {
    std::string stored;
    std::size_t rank = 0;
    if (!(in >> word >> stored >> rank) || word != "tensor") fail(path, "truncated before " + name);
    if (stored != name) fail(path, "expected tensor " + name + ", found " + stored);
    Shape shape(rank);
    for (auto& d : shape) {
      if (!(in >> d)) fail(path, "bad shape for " + name);
    }
    if (shape != tensor->shape()) {
      fail(path, name + " has shape " + shape_to_string(shape) + ", model expects " + shape_to_string(tensor->shape()));
    }
    for (double& v : tensor->data()) {
      if (!(in >> word)) fail(path, "truncated values for " + name);
      char* end = nullptr;
      v = std::strtod(word.c_str(), &end);
      if (end == word.c_str() || *end != '\0') fail(path, "bad value '" + word + "' in " + name);
    }
  }
  if (!(in >> word) || word != "end") fail(path, "missing end marker");
}

}  // namespace insta::fsl

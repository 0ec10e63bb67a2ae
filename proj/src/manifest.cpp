// Copyright 2026 The Qutrit Forces Authors
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

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <memory>

#include "qutrit/io.hpp"

namespace qutrit {

void to_json(json& j, const RunManifest& m) {
  json inputs = json::array();
  for (const auto& d : m.inputs) inputs.push_back({{"path", d.path}, {"sha256", d.sha256}});
  j = {{"command", m.command},
       {"inputs", inputs},
       {"version", m.version},
       {"seed", m.seed},
       {"wall_clock_seconds", m.wall_clock_seconds}};
}

void from_json(const json& j, RunManifest& m) {
  m.command = j.at("command").get<std::string>();
  m.inputs.clear();
  for (const auto& d : j.at("inputs")) m.inputs.push_back({d.at("path").get<std::string>(), d.at("sha256").get<std::string>()});
  m.version = j.at("version").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
}

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("sha256: OpenSSL digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open '" + path + "'");
  return sha256_hex(std::string(std::istreambuf_iterator<char>(in), {}));
}

std::uint64_t resolve_seed(std::uint64_t fallback) {
  const char* env = std::getenv("QUTRIT_SEED");
  if (!env || !*env) return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  require(end && *end == '\0' && env[0] != '-', "QUTRIT_SEED must be an unsigned integer");
  return v;
}

}  // namespace qutrit

// Copyright 2026 The urbanenv Authors.
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

#include "urbanenv/cli/manifest.hpp"

#include <fmt/format.h>

#include "urbanenv/text_io.hpp"

#ifndef URBANENV_VERSION
#define URBANENV_VERSION "unknown"
#endif

namespace urbanenv::cli {

RunRecord::RunRecord(std::string subcommand, std::vector<std::string> args, RunConfig cfg)
    : subcommand_(std::move(subcommand)), args_(std::move(args)), cfg_(std::move(cfg)) {
  std::filesystem::create_directories(cfg_.out);
}

void RunRecord::input(const std::filesystem::path& path) {
  inputs_.push_back({{"path", path.string()}, {"sha256", sha256_hex(read_binary_file(path))}});
}

void RunRecord::input_digest(const std::string& label, std::size_t files, const std::string& sha256) {
  inputs_.push_back({{"path", label}, {"files", files}, {"sha256", sha256}});
}

void RunRecord::output(const std::filesystem::path& rel, std::string_view bytes) {
  write_file_atomic(cfg_.out / rel, bytes);
  outputs_.push_back({{"path", rel.generic_string()}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
}

void RunRecord::output_tree(const std::filesystem::path& rel, std::size_t files, const std::string& sha256) {
  outputs_.push_back({{"path", rel.generic_string() + "/"}, {"files", files}, {"sha256", sha256}});
}

void RunRecord::finish() {
  const std::string echo = cfg_.echo();
  const std::string config_name = subcommand_ + ".config.txt";
  write_file_atomic(cfg_.out / config_name, echo);
  nlohmann::json m;
  m["tool"] = "urbanenv";
  m["versions"] = {{"urbanenv", URBANENV_VERSION}, {"manifest", 1}};
  m["subcommand"] = subcommand_;
  m["arguments"] = args_;
  m["seed"] = cfg_.seed;
  m["config_file"] = config_name;
  m["config_sha256"] = sha256_hex(echo);
  m["inputs"] = inputs_;
  m["outputs"] = outputs_;
  m["summary"] = summary_;
  write_file_atomic(cfg_.out / (subcommand_ + ".manifest.json"), m.dump(2) + "\n");
}

void TreeDigest::add(std::string_view name, std::string_view sha256) {
  buffer_ += fmt::format("{}  {}\n", sha256, name);
  ++files_;
}

std::string TreeDigest::hex() const { return sha256_hex(buffer_); }

}  // namespace urbanenv::cli

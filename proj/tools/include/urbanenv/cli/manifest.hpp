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

// Provenance record written next to the outputs of every subcommand.

#ifndef URBANENV_CLI_MANIFEST_HPP
#define URBANENV_CLI_MANIFEST_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "urbanenv/cli/run_config.hpp"

namespace urbanenv::cli {

class RunRecord {
 public:
  RunRecord(std::string subcommand, std::vector<std::string> args, RunConfig cfg);

  const RunConfig& config() const { return cfg_; }
  const std::filesystem::path& out_dir() const { return cfg_.out; }

  /// Hashes and records an input file.
  void input(const std::filesystem::path& path);
  /// Records an input described by a digest computed elsewhere.
  void input_digest(const std::string& label, std::size_t files, const std::string& sha256);

  /// Writes `bytes` to out_dir()/rel atomically and records it.
  void output(const std::filesystem::path& rel, std::string_view bytes);
  /// Records a directory of files written elsewhere, by combined digest.
  void output_tree(const std::filesystem::path& rel, std::size_t files, const std::string& sha256);

  nlohmann::json& summary() { return summary_; }

  /// Writes `<subcommand>.config.txt` and `<subcommand>.manifest.json`.
  void finish();

 private:
  std::string subcommand_;
  std::vector<std::string> args_;
  RunConfig cfg_;
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json summary_ = nlohmann::json::object();
};

/// Folds (name, sha256) pairs into one digest, order-sensitive.
class TreeDigest {
 public:
  void add(std::string_view name, std::string_view sha256);
  std::size_t files() const { return files_; }
  std::string hex() const;

 private:
  std::string buffer_;
  std::size_t files_ = 0;
};

}  // namespace urbanenv::cli

#endif  // URBANENV_CLI_MANIFEST_HPP

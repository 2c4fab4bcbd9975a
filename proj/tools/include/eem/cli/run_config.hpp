// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eem/model/config.hpp"
#include "eem/train/trainer.hpp"

namespace eem::cli {

/// Fully resolved settings of one command invocation.
///
/// Built from defaults, then a JSON config file, then command-line flags.
/// The result is written into every artifact the command produces.
struct RunConfig {
  std::uint64_t seed = 1;
  model::ModelConfig model;
  train::TrainConfig train;

  // decoding
  std::size_t beam_width = 5;
  std::size_t max_len = 20;
  bool length_normalize = true;

  // lambda settings
  double lambda = 1.0;
  std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};

  // data preparation
  std::size_t synth_n = 1000;
  double split_train = 0.8;
  double split_valid = 0.1;
  double split_test = 0.1;
  /// Share of the test split set aside to train the user simulator.
  double simulator_fraction = 0.5;
  std::size_t vocab_cap = 20000;

  std::size_t threads = 0;
  std::string grammar;  // empty: shipped grammar
  std::string lexicon;  // empty: shipped lexicon

  /// File paths named on the command line, by role.
  std::map<std::string, std::string> paths;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Applies the keys of `j` on top of `base`. Unknown keys raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});

/// Reads and applies a JSON config file. Throws ConfigError when the file
/// is missing or malformed.
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Parses "0,0.25,1" into numbers. Throws ConfigError on junk.
std::vector<double> parse_grid(const std::string& text);

}  // namespace eem::cli

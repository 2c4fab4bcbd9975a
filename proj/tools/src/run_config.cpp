// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/cli/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "eem/common/error.hpp"

namespace eem::cli {

void RunConfig::validate() const {
  auto m = model;
  if (m.vocab == 0) m.vocab = 5;  // filled in from the vocabulary file later
  m.validate();
  train.validate();
  if (beam_width == 0) throw ConfigError("beam_width must be at least 1");
  if (max_len == 0) throw ConfigError("max_len must be at least 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  for (double g : grid) {
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("grid points must lie in [0, 1]");
  }
  if (synth_n == 0) throw ConfigError("synth_n must be positive");
  if (!(simulator_fraction > 0.0 && simulator_fraction < 1.0)) {
    throw ConfigError("simulator_fraction must lie strictly between 0 and 1");
  }
  if (vocab_cap < 5) throw ConfigError("vocab_cap must be at least 5");
}

nlohmann::json RunConfig::to_json() const {
  auto m = model::to_json(model);
  m.erase("vocab");  // derived from the vocabulary file
  return {{"seed", seed},
          {"model", m},
          {"train", train.to_json()},
          {"decode", {{"beam_width", beam_width}, {"max_len", max_len}, {"length_normalize", length_normalize}}},
          {"lambda", lambda},
          {"grid", grid},
          {"synth_n", synth_n},
          {"split", {{"train", split_train}, {"valid", split_valid}, {"test", split_test}}},
          {"simulator_fraction", simulator_fraction},
          {"vocab_cap", vocab_cap},
          {"threads", threads},
          {"grammar", grammar},
          {"lexicon", lexicon},
          {"paths", paths}};
}

RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      const auto& v = *it;
      if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "model") c.model = model::model_config_from_json(v, c.model);
      else if (k == "train") c.train = train::train_config_from_json(v, c.train);
      else if (k == "decode") {
        for (auto d = v.begin(); d != v.end(); ++d) {
          if (d.key() == "beam_width") c.beam_width = d->get<std::size_t>();
          else if (d.key() == "max_len") c.max_len = d->get<std::size_t>();
          else if (d.key() == "length_normalize") c.length_normalize = d->get<bool>();
          else throw ConfigError("decode: unknown key '" + d.key() + "'");
        }
      } else if (k == "lambda") c.lambda = v.get<double>();
      else if (k == "grid") c.grid = v.get<std::vector<double>>();
      else if (k == "synth_n") c.synth_n = v.get<std::size_t>();
      else if (k == "split") {
        for (auto d = v.begin(); d != v.end(); ++d) {
          if (d.key() == "train") c.split_train = d->get<double>();
          else if (d.key() == "valid") c.split_valid = d->get<double>();
          else if (d.key() == "test") c.split_test = d->get<double>();
          else throw ConfigError("split: unknown key '" + d.key() + "'");
        }
      } else if (k == "simulator_fraction") c.simulator_fraction = v.get<double>();
      else if (k == "vocab_cap") c.vocab_cap = v.get<std::size_t>();
      else if (k == "threads") c.threads = v.get<std::size_t>();
      else if (k == "grammar") c.grammar = v.get<std::string>();
      else if (k == "lexicon") c.lexicon = v.get<std::string>();
      else if (k == "paths") c.paths = v.get<std::map<std::string, std::string>>();
      else throw ConfigError("config: unknown key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path.string() + "': " + e.what());
  }
  return run_config_from_json(j, std::move(base));
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("grid: '" + item + "' is not a number");
    }
    if (used != item.size() || !std::isfinite(v)) throw ConfigError("grid: '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("grid: no values");
  return out;
}

}  // namespace eem::cli

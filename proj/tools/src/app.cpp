// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/cli/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <utility>

#include "eem/cli/run_config.hpp"
#include "eem/common/error.hpp"
#include "eem/common/hash.hpp"
#include "eem/decode/decoder.hpp"
#include "eem/emotion/labeling.hpp"
#include "eem/emotion/lexicon.hpp"
#include "eem/model/batch.hpp"
#include "eem/text/corpus_io.hpp"
#include "eem/text/preprocess.hpp"
#include "eem/text/split.hpp"
#include "eem/text/synth.hpp"
#include "eem/text/vocab.hpp"
#include "eem/train/evaluation.hpp"
#include "eem/train/model_io.hpp"
#include "eem/train/trainer.hpp"

namespace eem::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kToolVersion = "0.1.0";

// Flag values. Unset optionals leave the config file (or default) alone.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> n;
  std::optional<std::string> grammar, lexicon;
  std::optional<std::string> arch, lambda_mode;
  std::optional<std::size_t> d_emb, d_h, d_z, layers;
  std::optional<std::size_t> epochs, batch_size, patience, max_steps, checkpoint_every;
  std::optional<double> lr, clip_norm;
  bool positive_only = false;
  std::optional<std::size_t> beam_width, max_len;
  bool no_length_normalize = false;
  std::optional<double> lambda;
  std::optional<std::string> grid;
  std::optional<double> split_train, split_valid, split_test, simulator_fraction;
  std::optional<std::size_t> vocab_cap;
  bool simulator = false;
  bool details = false;
  std::string text;
  std::map<std::string, std::string> paths;
};

void add_path(CLI::App* app, Overrides& o, const std::string& flag, const std::string& role, const std::string& help) {
  app->add_option_function<std::string>(flag, [&o, role](const std::string& v) { o.paths[role] = v; }, help);
}

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON run configuration");
  app->add_option("--seed", o.seed, "Random seed");
}

void add_decode(CLI::App* app, Overrides& o) {
  app->add_option("--lambda", o.lambda, "Control factor in [0, 1]");
  app->add_option("--beam-width", o.beam_width, "Beam width");
  app->add_option("--max-len", o.max_len, "Maximum response length");
  app->add_flag("--no-length-normalize", o.no_length_normalize, "Rank beams by total log-probability");
}

void add_model(CLI::App* app, Overrides& o) {
  app->add_option("--arch", o.arch, "eem, encdec, emb_s2, emb_delta, eem_no_dual_attn or eem_no_dual_dec");
  app->add_option("--lambda-mode", o.lambda_mode, "learned, s2 or delta");
  app->add_option("--d-emb", o.d_emb, "Embedding width");
  app->add_option("--d-h", o.d_h, "Encoder state width");
  app->add_option("--d-z", o.d_z, "Decoder state width");
  app->add_option("--layers", o.layers, "Stacked GRU layers");
}

void add_train(CLI::App* app, Overrides& o) {
  app->add_option("--epochs", o.epochs, "Maximum epochs");
  app->add_option("--batch-size", o.batch_size, "Examples per step");
  app->add_option("--lr", o.lr, "Adam learning rate");
  app->add_option("--patience", o.patience, "Early stopping patience (0 disables)");
  app->add_option("--max-steps", o.max_steps, "Cap on optimizer steps (0 means none)");
  app->add_option("--clip-norm", o.clip_norm, "Global gradient norm cap (0 disables)");
  app->add_option("--checkpoint-every", o.checkpoint_every, "Steps between intermediate checkpoints");
  app->add_flag("--positive-only", o.positive_only, "Train on the positive-reaction subset");
}

template <typename T, typename U>
void apply(const std::optional<T>& v, U& dst) {
  if (v) dst = *v;
}

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (!o.config.empty()) c = load_run_config(o.config, c);
  if (o.seed) {
    c.seed = *o.seed;
    c.train.seed = *o.seed;
  }
  apply(o.threads, c.threads);
  apply(o.n, c.synth_n);
  apply(o.grammar, c.grammar);
  apply(o.lexicon, c.lexicon);
  if (o.arch) c.model.arch = model::parse_arch(*o.arch);
  if (o.lambda_mode) c.model.lambda_mode = model::parse_lambda_mode(*o.lambda_mode);
  apply(o.d_emb, c.model.d_emb);
  apply(o.d_h, c.model.d_h);
  apply(o.d_z, c.model.d_z);
  apply(o.layers, c.model.layers);
  apply(o.epochs, c.train.epochs);
  apply(o.batch_size, c.train.batch_size);
  apply(o.patience, c.train.patience);
  apply(o.max_steps, c.train.max_steps);
  apply(o.checkpoint_every, c.train.checkpoint_every);
  apply(o.lr, c.train.lr);
  apply(o.clip_norm, c.train.clip_norm);
  if (o.positive_only) c.train.positive_only = true;
  apply(o.beam_width, c.beam_width);
  apply(o.max_len, c.max_len);
  if (o.no_length_normalize) c.length_normalize = false;
  apply(o.lambda, c.lambda);
  if (o.grid) c.grid = parse_grid(*o.grid);
  apply(o.split_train, c.split_train);
  apply(o.split_valid, c.split_valid);
  apply(o.split_test, c.split_test);
  apply(o.simulator_fraction, c.simulator_fraction);
  apply(o.vocab_cap, c.vocab_cap);
  for (const auto& [role, path] : o.paths) c.paths[role] = path;
  c.validate();
  return c;
}

// ---- file helpers ---------------------------------------------------------

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

std::optional<fs::path> path_of(const RunConfig& c, const std::string& role) {
  auto it = c.paths.find(role);
  if (it == c.paths.end() || it->second.empty()) return std::nullopt;
  return fs::path(it->second);
}

// Inputs are artifacts: a missing one is a data error naming it.
fs::path need_input(const RunConfig& c, const std::string& role, const std::string& what) {
  auto p = path_of(c, role);
  if (!p) throw DataError("missing " + what + ": pass --" + role);
  if (!fs::exists(*p)) throw DataError(what + " not found: '" + p->string() + "'");
  return *p;
}

// Output paths get their parent directories created.
fs::path need_output(const RunConfig& c, const std::string& role) {
  auto p = path_of(c, role);
  if (!p) throw ConfigError("--" + role + " is required");
  const auto dir = role == "out-dir" ? *p : p->parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  return *p;
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << bytes;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Records every input by role with its content hash.
class Inputs {
 public:
  void add(const std::string& role, const fs::path& path) { files_.emplace_back(role, path); }

  json to_json() const {
    json j = json::object();
    for (const auto& [role, path] : files_) j[role] = {{"path", path.generic_string()}, {"sha256", sha256_file(path)}};
    return j;
  }

  // Refuses to overwrite any input file.
  void guard(const fs::path& output) const {
    std::error_code ec;
    for (const auto& [role, path] : files_) {
      if (fs::exists(output) && fs::equivalent(output, path, ec)) {
        throw ContractError("output '" + output.string() + "' would overwrite the " + role + " input");
      }
    }
  }

 private:
  std::vector<std::pair<std::string, fs::path>> files_;
};

json provenance(const std::string& command, const RunConfig& c, const Inputs& inputs) {
  return {{"tool", "eem"}, {"version", kToolVersion}, {"command", command}, {"config", c.to_json()},
          {"inputs", inputs.to_json()}};
}

void write_sidecar(const fs::path& artifact, json meta) {
  meta["output_sha256"] = sha256_file(artifact);
  write_file(fs::path(artifact.string() + ".meta.json"), dump(meta));
}

emotion::LexiconScorer load_scorer(const RunConfig& c, Inputs& inputs) {
  if (c.lexicon.empty()) return emotion::LexiconScorer::load_default();
  inputs.add("lexicon", c.lexicon);
  return emotion::LexiconScorer::load(c.lexicon);
}

text::Corpus read_input_corpus(const fs::path& p) {
  auto corpus = text::read_corpus(p);
  if (corpus.empty()) throw DataError("corpus '" + p.string() + "' has no records");
  return corpus;
}

// A checkpoint together with the vocabulary stored in its header.
struct Checkpoint {
  train::LoadedModel loaded;
  text::Vocab vocab;
  std::string role;
};

Checkpoint load_checkpoint_file(const fs::path& path, const std::string& expected_role) {
  auto loaded = train::load_model(path);
  const auto& prov = loaded.provenance;
  if (!prov.contains("vocab") || !prov.contains("role")) {
    throw DataError("checkpoint '" + path.string() + "' lacks vocabulary or role metadata");
  }
  std::string role = prov.at("role").get<std::string>();
  if (role != expected_role) {
    throw DataError("checkpoint '" + path.string() + "' holds a " + role + ", expected a " + expected_role);
  }
  text::Vocab vocab(prov.at("vocab").get<std::vector<std::string>>());
  if (vocab.size() != loaded.model.config().vocab) {
    throw DataError("checkpoint '" + path.string() + "': vocabulary size disagrees with the model");
  }
  return {std::move(loaded), std::move(vocab), std::move(role)};
}

std::vector<text::TokenId> encode_text(const std::string& raw, const text::Vocab& vocab) {
  const auto tokens = text::tokenize(text::normalize_text(raw));
  if (tokens.empty()) throw DataError("input text is empty after normalization");
  return text::encode(tokens, vocab);
}

decode::DecodeOptions decode_options(const RunConfig& c, bool trace = false) {
  decode::DecodeOptions d;
  d.width = c.beam_width;
  d.max_len = c.max_len;
  d.length_normalize = c.length_normalize;
  d.trace = trace;
  return d;
}

train::ElicitationOptions elicitation_options(const RunConfig& c, bool details) {
  train::ElicitationOptions e;
  e.beam_width = c.beam_width;
  e.max_len = c.max_len;
  e.length_normalize = c.length_normalize;
  e.simulator_max_len = c.max_len;
  e.threads = c.threads;
  e.keep_records = details;
  return e;
}

// ---- subcommands ----------------------------------------------------------

int run_synth(const Overrides& o, Io& io) {
  const auto c = resolve(o);
  const auto out = need_output(c, "out");
  Inputs inputs;
  auto grammar = text::SynthGrammar::load_default();
  if (!c.grammar.empty()) {
    inputs.add("grammar", c.grammar);
    grammar = text::SynthGrammar::load(c.grammar);
  }
  inputs.guard(out);
  const auto corpus = text::synth_corpus(grammar, c.synth_n, c.seed);
  text::write_corpus(out, corpus);
  auto meta = provenance("synth", c, inputs);
  meta["manifest"] = text::synth_manifest(grammar, corpus, c.seed);
  write_sidecar(out, std::move(meta));
  io.err << "synth: wrote " << corpus.size() << " records to " << out.string() << "\n";
  return kExitOk;
}

int run_prepare(const Overrides& o, Io& io) {
  const auto c = resolve(o);
  const auto in = need_input(c, "in", "raw corpus");
  const auto dir = need_output(c, "out-dir");
  Inputs inputs;
  inputs.add("in", in);

  text::IngestStats stats;
  auto corpus = text::ingest(in, &stats);
  if (corpus.empty()) throw DataError("prepare: no records survived filtering in '" + in.string() + "'");
  auto splits = text::split_corpus(corpus, {c.split_train, c.split_valid, c.split_test}, c.seed);

  // The simulator slice is carved from the held-out test split so it never
  // overlaps the generator's training records.
  const auto n_sim = static_cast<std::size_t>(
      std::llround(static_cast<double>(splits.test.size()) * c.simulator_fraction));
  text::Corpus simulator(splits.test.begin(), splits.test.begin() + static_cast<std::ptrdiff_t>(n_sim));
  text::Corpus test(splits.test.begin() + static_cast<std::ptrdiff_t>(n_sim), splits.test.end());
  if (splits.train.empty() || splits.valid.empty() || simulator.empty() || test.empty()) {
    throw DataError("prepare: " + std::to_string(corpus.size()) +
                    " records are too few for non-empty train, valid, simulator and test parts");
  }
  const auto vocab = text::build_vocab(splits.train, c.vocab_cap);

  const std::pair<const char*, const text::Corpus*> parts[] = {
      {"train", &splits.train}, {"valid", &splits.valid}, {"simulator", &simulator}, {"test", &test}};
  json outputs = json::object();
  for (const auto& [name, part] : parts) {
    const auto p = dir / (std::string(name) + ".jsonl");
    inputs.guard(p);
    text::write_corpus(p, *part);
    outputs[name] = {{"records", part->size()}, {"sha256", sha256_file(p)}};
  }
  const auto vocab_path = dir / "vocab.txt";
  vocab.save(vocab_path);
  outputs["vocab"] = {{"tokens", vocab.size()}, {"sha256", sha256_file(vocab_path)}};

  auto meta = provenance("prepare", c, inputs);
  meta["ingest"] = stats.to_json();
  meta["outputs"] = outputs;
  write_file(dir / "prepare.meta.json", dump(meta));
  io.err << "prepare: kept " << stats.kept << " of " << stats.read << " records; train " << splits.train.size()
         << ", valid " << splits.valid.size() << ", simulator " << simulator.size() << ", test " << test.size()
         << ", vocab " << vocab.size() << "\n";
  return kExitOk;
}

int run_label(const Overrides& o, Io& io) {
  const auto c = resolve(o);
  const auto in = need_input(c, "in", "corpus");
  const auto out = need_output(c, "out");
  Inputs inputs;
  inputs.add("in", in);
  const auto scorer = load_scorer(c, inputs);
  inputs.guard(out);
  const auto labeled = emotion::label_corpus(read_input_corpus(in), scorer);
  text::write_corpus(out, labeled);
  auto meta = provenance("label", c, inputs);
  meta["lexicon_sha256"] = scorer.hash();
  meta["distribution"] = emotion::distribution_stats(labeled).to_json();
  write_sidecar(out, std::move(meta));
  io.err << "label: labeled " << labeled.size() << " records into " << out.string() << "\n";
  return kExitOk;
}

int run_train(const Overrides& o, Io& io) {
  const auto c = resolve(o);
  const auto train_path = need_input(c, "train", "training corpus");
  const auto valid_path = need_input(c, "valid", "validation corpus");
  const auto vocab_path = need_input(c, "vocab", "vocabulary");
  const auto out = need_output(c, "out");
  Inputs inputs;
  inputs.add("train", train_path);
  inputs.add("valid", valid_path);
  inputs.add("vocab", vocab_path);

  auto train_set = read_input_corpus(train_path);
  const auto valid_set = read_input_corpus(valid_path);
  const auto base_vocab = text::Vocab::load(vocab_path);

  std::optional<fs::path> generator_train;
  if (o.simulator) {
    generator_train = need_input(c, "generator-train", "generator training corpus");
    inputs.add("generator-train", *generator_train);
  }
  inputs.guard(out);
  if (auto csv = path_of(c, "loss-csv")) inputs.guard(*csv);

  const std::string role = o.simulator ? "simulator" : "generator";
  const auto vocab = o.simulator ? base_vocab.with_separator() : base_vocab;
  auto prov = provenance("train", c, inputs);
  prov["role"] = role;
  prov["vocab"] = vocab.tokens();

  train::TrainHooks hooks;
  hooks.on_epoch = [&](const train::EpochStats& s) {
    io.err << "train: epoch " << s.epoch << " train_ppl " << s.train_ppl;
    if (s.valid_ppl) io.err << " valid_ppl " << *s.valid_ppl;
    io.err << "\n";
  };
  std::set<std::int64_t> ids;
  hooks.on_checkpoint = [&](const model::Model& m, const ad::AdamState& adam, std::size_t step) {
    const fs::path p = out.string() + ".step" + std::to_string(step);
    inputs.guard(p);
    train::save_model(p, m, ids, prov, &adam);
  };

  std::optional<model::Model> trained;
  train::TrainResult result;
  if (o.simulator) {
    ids = text::id_set(train_set);
    auto sim = train::train_user_simulator(train_set, valid_set, text::id_set(read_input_corpus(*generator_train)),
                                           vocab, c.model, c.train, hooks);
    trained.emplace(std::move(sim.model));
    result = std::move(sim.history);
  } else {
    if (c.train.positive_only) {
      train_set = train::positive_subset(train_set);
      if (train_set.empty()) throw DataError("train: the positive subset is empty");
    }
    ids = text::id_set(train_set);
    auto mc = c.model;
    mc.vocab = vocab.size();
    trained.emplace(mc, c.seed);
    const auto train_ex = model::generator_examples(train_set, vocab);
    const auto valid_ex = model::generator_examples(valid_set, vocab);
    result = train::train(*trained, train_ex, valid_ex, c.train, hooks);
  }

  json history = {{"steps", result.steps}, {"best_epoch", result.best_epoch},
                  {"early_stopped", result.early_stopped}};
  if (result.best_valid_ppl) history["best_valid_ppl"] = *result.best_valid_ppl;
  if (result.aborted) history["aborted"] = *result.aborted;
  prov["history"] = history;
  train::save_model(out, *trained, ids, prov);
  if (auto csv = path_of(c, "loss-csv")) {
    std::ostringstream s;
    train::write_loss_csv(s, result.curve);
    write_file(*csv, s.str());
  }
  if (result.aborted) {
    io.err << "train: aborted: " << *result.aborted << "; wrote last good parameters to " << out.string() << "\n";
    return kExitData;
  }
  io.err << "train: " << result.steps << " steps; wrote " << out.string() << "\n";
  return kExitOk;
}

int run_generate(const Overrides& o, Io& io) {
  const auto c = resolve(o);
  Inputs inputs;
  const auto model_path = need_input(c, "model", "generator checkpoint");
  inputs.add("model", model_path);
  const auto ckpt = load_checkpoint_file(model_path, "generator");
  decode::ModelStepper stepper(ckpt.loaded.model);
  const auto opts = decode_options(c);

  auto row = [&](std::optional<std::int64_t> id, const text::Tokens& input, const decode::DecodeResult& r) {
    json j = {{"input", text::join_tokens(input)},
              {"response", text::join_tokens(text::decode(r.tokens, ckpt.vocab))},
              {"lambda", c.lambda},
              {"score", r.score},
              {"finished", r.finished}};
    if (id) j["id"] = *id;
    return j.dump() + "\n";
  };

  std::string lines;
  if (!o.text.empty()) {
    const auto tokens = text::tokenize(text::normalize_text(o.text));
    const auto r = decode::beam_search(stepper, encode_text(o.text, ckpt.vocab), c.lambda, opts);
    lines = row(std::nullopt, tokens, r);
  } else {
    const auto in = need_input(c, "in", "input corpus");
    inputs.add("in", in);
    for (const auto& t : read_input_corpus(in)) {
      const auto r = decode::beam_search(stepper, text::encode(t.u1, ckpt.vocab), c.lambda, opts);
      lines += row(t.id, t.u1, r);
    }
  }
  if (auto out = path_of(c, "out")) {
    inputs.guard(*out);
    write_file(*out, lines);
    write_sidecar(*out, provenance("generate", c, inputs));
  } else {
    io.out << lines;
  }
  return kExitOk;
}

struct EvalSetup {
  RunConfig config;
  Inputs inputs;
  Checkpoint generator;
  Checkpoint simulator;
  text::Corpus test;
};

EvalSetup eval_setup(const Overrides& o) {
  auto c = resolve(o);
  Inputs inputs;
  const auto gen_path = need_input(c, "model", "generator checkpoint");
  const auto sim_path = need_input(c, "simulator", "simulator checkpoint");
  const auto test_path = need_input(c, "test", "test corpus");
  inputs.add("model", gen_path);
  inputs.add("simulator", sim_path);
  inputs.add("test", test_path);
  auto gen = load_checkpoint_file(gen_path, "generator");
  auto sim = load_checkpoint_file(sim_path, "simulator");
  auto test = read_input_corpus(test_path);
  return {std::move(c), std::move(inputs), std::move(gen), std::move(sim), std::move(test)};
}

void emit_report(const RunConfig& c, const Inputs& inputs, const train::EvalReport& report, Io& io) {
  const auto text = dump(report.to_json());
  if (auto out = path_of(c, "out")) {
    inputs.guard(*out);
    write_file(*out, text);
  } else {
    io.out << text;
  }
}

int run_eval(const Overrides& o, Io& io) {
  auto s = eval_setup(o);
  auto scorer = load_scorer(s.config, s.inputs);
  decode::ModelStepper gen(s.generator.loaded.model), sim(s.simulator.loaded.model);
  const train::EvalContext ctx{gen,    s.generator.vocab,           sim, s.simulator.vocab, scorer,
                               &s.generator.loaded.train_ids, &s.simulator.loaded.train_ids};
  train::EvalReport report;
  report.elicitation =
      train::elicitation_eval(ctx, s.test, s.config.lambda, elicitation_options(s.config, o.details));
  report.ppl = train::perplexity(s.generator.loaded.model, model::generator_examples(s.test, s.generator.vocab));
  report.config = provenance("eval", s.config, s.inputs);
  report.generator_hash = s.generator.loaded.hash;
  report.simulator_hash = s.simulator.loaded.hash;
  emit_report(s.config, s.inputs, report, io);
  io.err << "eval: ppl " << *report.ppl << " mean_s2_hat " << report.elicitation->mean_s2_hat << "\n";
  return kExitOk;
}

int run_sweep(const Overrides& o, Io& io) {
  auto s = eval_setup(o);
  auto scorer = load_scorer(s.config, s.inputs);
  decode::ModelStepper gen(s.generator.loaded.model), sim(s.simulator.loaded.model);
  const train::EvalContext ctx{gen,    s.generator.vocab,           sim, s.simulator.vocab, scorer,
                               &s.generator.loaded.train_ids, &s.simulator.loaded.train_ids};
  train::EvalReport report;
  report.sweep = train::lambda_sweep(ctx, s.test, s.config.grid, elicitation_options(s.config, o.details));
  report.config = provenance("sweep", s.config, s.inputs);
  report.generator_hash = s.generator.loaded.hash;
  report.simulator_hash = s.simulator.loaded.hash;
  emit_report(s.config, s.inputs, report, io);
  for (const auto& r : report.sweep->rows) io.err << "sweep: lambda " << r.lambda << " mean_s2_hat " << r.mean_s2_hat << "\n";
  io.err << "sweep: spearman " << report.sweep->spearman << "\n";
  return kExitOk;
}

int run_dump_attn(const Overrides& o, Io& io) {
  const auto c = resolve(o);
  Inputs inputs;
  const auto model_path = need_input(c, "model", "generator checkpoint");
  inputs.add("model", model_path);
  if (o.text.empty()) throw ConfigError("--text is required");
  const auto ckpt = load_checkpoint_file(model_path, "generator");
  decode::ModelStepper stepper(ckpt.loaded.model);
  const auto src = encode_text(o.text, ckpt.vocab);
  const auto r = decode::beam_search(stepper, src, c.lambda, decode_options(c, true));
  auto j = decode::trace_to_json(r, src, ckpt.vocab);
  j["lambda"] = c.lambda;
  j["provenance"] = provenance("dump-attn", c, inputs);
  const auto text = dump(j);
  if (auto out = path_of(c, "out")) {
    inputs.guard(*out);
    write_file(*out, text);
  } else {
    io.out << text;
  }
  return kExitOk;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void print_trace(std::ostream& out, const decode::DecodeResult& r, const std::vector<text::TokenId>& src,
                 const text::Vocab& vocab) {
  const auto trace = decode::attention_trace(r);
  out << "  source:";
  for (auto id : src) out << ' ' << vocab.token(id);
  out << '\n';
  std::ostringstream row;
  row << std::fixed << std::setprecision(3);
  for (std::size_t t = 0; t < trace.alpha_pos.size(); ++t) {
    const std::string tok = t < r.tokens.size() ? vocab.token(r.tokens[t]) : std::string(text::kEosToken);
    row.str("");
    row << "  " << tok << " | pos";
    for (double a : trace.alpha_pos[t]) row << ' ' << a;
    row << " | neg";
    for (double a : trace.alpha_neg[t]) row << ' ' << a;
    out << row.str() << '\n';
  }
}

int run_chat(const Overrides& o, Io& io) {
  const auto c = resolve(o);
  const auto model_path = need_input(c, "model", "generator checkpoint");
  const auto ckpt = load_checkpoint_file(model_path, "generator");
  decode::ModelStepper stepper(ckpt.loaded.model);
  double lambda = c.lambda;
  bool trace = false;
  io.err << "chat: lambda " << lambda << "; commands: /lambda <v>, /trace, /quit\n";
  std::string line;
  while (std::getline(io.in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line == "/quit") return kExitOk;
    if (line == "/trace") {
      trace = !trace;
      io.out << "trace " << (trace ? "on" : "off") << '\n';
      continue;
    }
    if (line.rfind("/lambda", 0) == 0) {
      const auto arg = trim(line.substr(7));
      std::size_t used = 0;
      double v = std::nan("");
      try {
        v = std::stod(arg, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (arg.empty() || used != arg.size() || !(v >= 0.0 && v <= 1.0)) {
        io.err << "error: lambda must be a number in [0, 1]; keeping " << lambda << '\n';
      } else {
        lambda = v;
        io.out << "lambda " << lambda << '\n';
      }
      continue;
    }
    if (line.front() == '/') {
      io.err << "error: unknown command '" << line << "'\n";
      continue;
    }
    try {
      const auto src = encode_text(line, ckpt.vocab);
      const auto r = decode::beam_search(stepper, src, lambda, decode_options(c, trace));
      io.out << text::join_tokens(text::decode(r.tokens, ckpt.vocab)) << '\n';
      if (trace) print_trace(io.out, r, src, ckpt.vocab);
    } catch (const DataError& e) {
      io.err << "error: " << e.what() << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Emotion eliciting response generation", "eem"};
  app.require_subcommand(1);
  Overrides o;
  Io io{in, out, err};

  auto* synth = app.add_subcommand("synth", "Generate a synthetic triplet corpus");
  add_common(synth, o);
  synth->add_option("--n", o.n, "Number of triplets");
  synth->add_option("--grammar", o.grammar, "Grammar JSON (default: shipped grammar)");
  add_path(synth, o, "--out", "out", "Output JSONL corpus");

  auto* prepare = app.add_subcommand("prepare", "Normalize, filter and split a corpus; build the vocabulary");
  add_common(prepare, o);
  add_path(prepare, o, "--in", "in", "Raw JSONL corpus");
  add_path(prepare, o, "--out-dir", "out-dir", "Output directory");
  prepare->add_option("--train-frac", o.split_train, "Training share");
  prepare->add_option("--valid-frac", o.split_valid, "Validation share");
  prepare->add_option("--test-frac", o.split_test, "Test share");
  prepare->add_option("--simulator-frac", o.simulator_fraction, "Share of the test split for the simulator");
  prepare->add_option("--vocab-cap", o.vocab_cap, "Maximum vocabulary size");

  auto* label = app.add_subcommand("label", "Attach lexicon emotion annotations");
  add_common(label, o);
  add_path(label, o, "--in", "in", "Prepared JSONL corpus");
  add_path(label, o, "--out", "out", "Labeled JSONL corpus");
  label->add_option("--lexicon", o.lexicon, "Lexicon file (default: shipped lexicon)");

  auto* train_cmd = app.add_subcommand("train", "Train a generator or the user simulator");
  add_common(train_cmd, o);
  add_model(train_cmd, o);
  add_train(train_cmd, o);
  add_path(train_cmd, o, "--train", "train", "Training corpus");
  add_path(train_cmd, o, "--valid", "valid", "Validation corpus");
  add_path(train_cmd, o, "--vocab", "vocab", "Vocabulary file");
  add_path(train_cmd, o, "--out", "out", "Output checkpoint");
  add_path(train_cmd, o, "--loss-csv", "loss-csv", "Per-step loss curve");
  train_cmd->add_flag("--simulator", o.simulator, "Train the user simulator");
  add_path(train_cmd, o, "--generator-train", "generator-train", "Generator training corpus (leakage check)");

  auto* generate = app.add_subcommand("generate", "Decode responses at a given lambda");
  add_common(generate, o);
  add_decode(generate, o);
  add_path(generate, o, "--model", "model", "Generator checkpoint");
  add_path(generate, o, "--in", "in", "Corpus whose u1 utterances are decoded");
  generate->add_option("--text", o.text, "Single input utterance");
  add_path(generate, o, "--out", "out", "Output JSONL (default: standard output)");

  auto add_eval_flags = [&](CLI::App* cmd) {
    add_common(cmd, o);
    add_decode(cmd, o);
    add_path(cmd, o, "--model", "model", "Generator checkpoint");
    add_path(cmd, o, "--simulator", "simulator", "User simulator checkpoint");
    add_path(cmd, o, "--test", "test", "Labeled test corpus");
    add_path(cmd, o, "--out", "out", "Report JSON (default: standard output)");
    cmd->add_option("--lexicon", o.lexicon, "Lexicon file (default: shipped lexicon)");
    cmd->add_option("--threads", o.threads, "Worker threads (0: hardware concurrency)");
    cmd->add_flag("--details", o.details, "Include per-record results");
  };
  auto* eval = app.add_subcommand("eval", "Perplexity and elicitation report");
  add_eval_flags(eval);
  auto* sweep = app.add_subcommand("sweep", "Elicitation over a lambda grid");
  add_eval_flags(sweep);
  sweep->add_option("--grid", o.grid, "Comma separated lambda values");

  auto* dump_attn = app.add_subcommand("dump-attn", "Attention trace for one input");
  add_common(dump_attn, o);
  add_decode(dump_attn, o);
  add_path(dump_attn, o, "--model", "model", "Generator checkpoint");
  dump_attn->add_option("--text", o.text, "Input utterance");
  add_path(dump_attn, o, "--out", "out", "Trace JSON (default: standard output)");

  auto* chat = app.add_subcommand("chat", "Interactive session with live lambda control");
  add_common(chat, o);
  add_decode(chat, o);
  add_path(chat, o, "--model", "model", "Generator checkpoint");

  if (!args.empty() && !args[0].empty() && args[0][0] != '-' && app.get_subcommand_no_throw(args[0]) == nullptr) {
    err << "error: unknown subcommand '" << args[0] << "'\n\n" << app.help();
    return kExitUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return run_synth(o, io);
    if (prepare->parsed()) return run_prepare(o, io);
    if (label->parsed()) return run_label(o, io);
    if (train_cmd->parsed()) return run_train(o, io);
    if (generate->parsed()) return run_generate(o, io);
    if (eval->parsed()) return run_eval(o, io);
    if (sweep->parsed()) return run_sweep(o, io);
    if (dump_attn->parsed()) return run_dump_attn(o, io);
    if (chat->parsed()) return run_chat(o, io);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace eem::cli

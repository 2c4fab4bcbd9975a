// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The EEM Authors
#include "eem/autodiff/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "eem/common/error.hpp"

namespace eem::ad {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::string_view kMagic = "EEMCKPT1";

void append_tensor(std::string& out, const Tensor& t) {
  const auto* bytes = reinterpret_cast<const char*>(t.raw());
  out.append(bytes, t.size() * sizeof(double));
}

void read_tensor(std::string_view bytes, std::size_t& offset, Tensor& t) {
  const std::size_t n = t.size() * sizeof(double);
  if (offset + n > bytes.size()) throw DataError("checkpoint: payload truncated");
  std::memcpy(t.raw(), bytes.data() + offset, n);
  offset += n;
}

}  // namespace

std::string serialize_checkpoint(const ParamStore& params, const AdamState* adam, const RngRecord& rng,
                                 const nlohmann::json& meta) {
  nlohmann::json header;
  header["format"] = "eem-checkpoint";
  header["version"] = 1;
  header["meta"] = meta;
  header["rng"] = {{"seed", rng.seed}, {"counter", rng.counter}};
  nlohmann::json list = nlohmann::json::array();
  for (const auto& p : params) list.push_back({{"name", p.name}, {"shape", p.value.shape()}});
  header["params"] = std::move(list);
  if (adam) {
    header["adam"] = {{"step", adam->step},
                      {"lr", adam->config.lr},
                      {"beta1", adam->config.beta1},
                      {"beta2", adam->config.beta2},
                      {"eps", adam->config.eps}};
  } else {
    header["adam"] = nullptr;
  }
  const std::string text = header.dump();

  std::string out(kMagic);
  const std::uint64_t len = text.size();
  out.append(reinterpret_cast<const char*>(&len), sizeof(len));
  out += text;
  for (const auto& p : params) append_tensor(out, p.value);
  if (adam) {
    for (const auto& m : adam->m) append_tensor(out, m);
    for (const auto& v : adam->v) append_tensor(out, v);
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + sizeof(std::uint64_t) || bytes.substr(0, kMagic.size()) != kMagic) {
    throw DataError("checkpoint: bad magic, not an EEM checkpoint");
  }
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + kMagic.size(), sizeof(len));
  std::size_t offset = kMagic.size() + sizeof(len);
  if (offset + len > bytes.size()) throw DataError("checkpoint: header truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(offset, len));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: malformed header: ") + e.what());
  }
  offset += len;

  Checkpoint ck;
  try {
    ck.meta = header.at("meta");
    ck.rng.seed = header.at("rng").at("seed").get<std::uint64_t>();
    ck.rng.counter = header.at("rng").at("counter").get<std::uint64_t>();
    for (const auto& entry : header.at("params")) {
      Tensor t(entry.at("shape").get<Shape>());
      read_tensor(bytes, offset, t);
      ck.params.add(entry.at("name").get<std::string>(), std::move(t));
    }
    if (!header.at("adam").is_null()) {
      const auto& a = header.at("adam");
      AdamConfig cfg{a.at("lr").get<double>(), a.at("beta1").get<double>(), a.at("beta2").get<double>(),
                     a.at("eps").get<double>()};
      AdamState state(cfg, ck.params);
      state.step = a.at("step").get<std::uint64_t>();
      for (auto& m : state.m) read_tensor(bytes, offset, m);
      for (auto& v : state.v) read_tensor(bytes, offset, v);
      ck.adam = std::move(state);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: malformed header: ") + e.what());
  }
  if (offset != bytes.size()) throw DataError("checkpoint: trailing bytes after payload");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const AdamState* adam,
                     const RngRecord& rng, const nlohmann::json& meta) {
  const std::string bytes = serialize_checkpoint(params, adam, rng, meta);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

void assign_params(ParamStore& dst, const ParamStore& src) {
  if (dst.size() != src.size()) {
    throw DataError("parameter count mismatch: " + std::to_string(dst.size()) + " vs " + std::to_string(src.size()));
  }
  for (auto& p : dst) {
    if (!src.contains(p.name)) throw DataError("missing parameter '" + p.name + "'");
    const Parameter& s = src.get(p.name);
    if (s.value.shape() != p.value.shape()) {
      throw DataError("shape mismatch for '" + p.name + "': " + shape_string(p.value.shape()) + " vs " +
                      shape_string(s.value.shape()));
    }
    p.value = s.value;
    p.value.set_requires_grad(true);
  }
}

}  // namespace eem::ad

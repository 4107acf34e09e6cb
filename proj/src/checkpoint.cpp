// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "error.hpp"
#include "io_util.hpp"

namespace olp {

namespace {

constexpr char kMagic[8] = {'O', 'L', 'P', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw DataError("corrupt checkpoint (truncated u32): " + path);
  return v;
}
std::uint64_t get_u64(std::istream& in, const std::string& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw DataError("corrupt checkpoint (truncated u64): " + path);
  return v;
}
std::string get_str(std::istream& in, const std::string& path) {
  auto n = get_u32(in, path);
  if (n > (1u << 20)) throw DataError("corrupt checkpoint (string): " + path);
  std::string s(n, '\0');
  if (!in.read(s.data(), n))
    throw DataError("corrupt checkpoint (truncated string): " + path);
  return s;
}

std::string encode_config(const EncoderConfig& c) {
  std::string kv;
  kv += "name=" + c.name + "\n";
  kv += "num_layers=" + std::to_string(c.num_layers) + "\n";
  kv += "hidden_dim=" + std::to_string(c.hidden_dim) + "\n";
  kv += "num_heads=" + std::to_string(c.num_heads) + "\n";
  kv += "vocab_size=" + std::to_string(c.vocab_size) + "\n";
  kv += "max_positions=" + std::to_string(c.max_positions) + "\n";
  kv += "num_labels=" + std::to_string(c.num_labels) + "\n";
  kv += "lowercase=" + std::string(c.lowercase ? "1" : "0") + "\n";
  kv += "lr_scale=" + format_double("%.17g", c.lr_scale) + "\n";
  return kv;
}

EncoderConfig decode_config(const std::string& kv, const std::string& path) {
  EncoderConfig c;
  for (const auto& line : split(kv, '\n')) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("corrupt checkpoint config: " + path);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (key == "name") c.name = val;
    else if (key == "num_layers") c.num_layers = static_cast<int>(parse_int(val, key));
    else if (key == "hidden_dim") c.hidden_dim = static_cast<int>(parse_int(val, key));
    else if (key == "num_heads") c.num_heads = static_cast<int>(parse_int(val, key));
    else if (key == "vocab_size") c.vocab_size = static_cast<int>(parse_int(val, key));
    else if (key == "max_positions") c.max_positions = static_cast<int>(parse_int(val, key));
    else if (key == "num_labels") c.num_labels = static_cast<int>(parse_int(val, key));
    else if (key == "lowercase") c.lowercase = val == "1";
    else if (key == "lr_scale") c.lr_scale = parse_double(val, key);
    // Unknown keys are ignored for forward compatibility.
  }
  return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const EncoderModel& model) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());

  out.write(kMagic, sizeof(kMagic));
  put_str(out, encode_config(model.config()));

  auto refs = tensor_refs(model.params());
  put_u32(out, static_cast<std::uint32_t>(refs.size()));
  for (const auto& r : refs) {
    put_str(out, r.name);
    put_u64(out, static_cast<std::uint64_t>(r.mat->rows()));
    put_u64(out, static_cast<std::uint64_t>(r.mat->cols()));
    out.write(reinterpret_cast<const char*>(r.mat->data()),
              static_cast<std::streamsize>(sizeof(double) *
                                           static_cast<std::size_t>(r.mat->size())));
  }
  out.flush();
  if (!out) throw IoError("write failed for checkpoint: " + path.string());
}

EncoderModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());

  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("not an olp checkpoint: " + path.string());

  EncoderConfig cfg = decode_config(get_str(in, path.string()), path.string());
  validate_config(cfg);

  // Build an empty shell with the right shapes, then overwrite every tensor.
  EncoderConfig shell = cfg;
  shell.pretrained_source.clear();
  shell.requires_pretrained = false;
  EncoderModel model = build_encoder(shell, 0);

  auto refs = tensor_refs(model.params());
  auto count = get_u32(in, path.string());
  if (count != refs.size())
    throw DataError("checkpoint tensor count mismatch in " + path.string());
  for (auto& r : refs) {
    auto name = get_str(in, path.string());
    auto rows = static_cast<Eigen::Index>(get_u64(in, path.string()));
    auto cols = static_cast<Eigen::Index>(get_u64(in, path.string()));
    if (name != r.name || rows != r.mat->rows() || cols != r.mat->cols())
      throw DataError("checkpoint tensor '" + name + "' does not match model shape in " +
                      path.string());
    if (!in.read(reinterpret_cast<char*>(r.mat->data()),
                 static_cast<std::streamsize>(sizeof(double) *
                                              static_cast<std::size_t>(r.mat->size()))))
      throw DataError("corrupt checkpoint (truncated tensor '" + name + "'): " +
                      path.string());
  }
  return model;
}

}  // namespace olp

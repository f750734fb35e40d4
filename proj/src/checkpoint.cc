// Copyright (c) 2026 The vtad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vtad/checkpoint.h"

#include <charconv>
#include <map>
#include <sstream>

#include "vtad/error.h"
#include "vtad/text.h"

namespace vtad {
namespace {

constexpr std::string_view kCheckpointMagic = "#vtad-ckpt v1";

template <typename M>
void write_block(std::ostringstream& out, const char* name, const M& m, bool is_vector) {
  const Eigen::Index rows = is_vector ? 1 : m.rows();
  const Eigen::Index cols = is_vector ? m.size() : m.cols();
  out << "block\t" << name << '\t' << rows << '\t' << cols << '\n';
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (c) out << ',';
      out << text::format_double(m.data()[r * cols + c]);
    }
    out << '\n';
  }
}

std::string config_line(const TrainConfig& c) {
  std::ostringstream out;
  out << "learning_rate=" << text::format_double(c.learning_rate)
      << " batch_size=" << c.batch_size << " epochs=" << c.epochs
      << " dropout_rate=" << text::format_double(c.dropout_rate)
      << " bn_momentum=" << text::format_double(c.bn_momentum)
      << " optimizer=" << optimizer_name(c.optimizer)
      << " adam_beta1=" << text::format_double(c.adam_beta1)
      << " adam_beta2=" << text::format_double(c.adam_beta2)
      << " adam_eps=" << text::format_double(c.adam_eps) << " hidden_size=" << c.hidden_size
      << " seed=" << c.rng_seed;
  return out.str();
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const DiffNetParams& p = ckpt.params;
  p.validate();
  std::ostringstream out;
  out << kCheckpointMagic << '\n';
  out << "input_dim\t" << p.input_dim() << '\n';
  out << "hidden_size\t" << p.hidden_size() << '\n';
  out << "output_dim\t" << p.output_dim() << '\n';
  out << "catalog\t" << text::hex64(p.catalog_fingerprint) << '\n';
  out << "encoder\t" << ckpt.encoder_tag << '\n';
  out << "config\t" << config_line(ckpt.config) << '\n';
  write_block(out, "w1", p.w1, false);
  write_block(out, "b1", p.b1, true);
  write_block(out, "bn_gamma", p.bn_gamma, true);
  write_block(out, "bn_beta", p.bn_beta, true);
  write_block(out, "bn_running_mean", p.bn_running_mean, true);
  write_block(out, "bn_running_var", p.bn_running_var, true);
  write_block(out, "w2", p.w2, false);
  write_block(out, "b2", p.b2, true);
  return out.str();
}

Checkpoint parse_checkpoint(const std::string& contents, const DescriptorCatalog& catalog,
                            const std::string& source) {
  std::istringstream in(contents);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> Error {
    return Error(ErrorCode::kFormatError, source + ":" + std::to_string(lineno) + ": " + msg);
  };
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next() || line != kCheckpointMagic) throw fail("missing '#vtad-ckpt v1' header");

  Checkpoint ckpt;
  std::map<std::string, std::string> header;
  std::map<std::string, std::vector<double>> blocks;
  std::map<std::string, std::pair<long long, long long>> shapes;
  while (next()) {
    if (line.empty()) continue;
    auto f = text::split(line, '\t');
    if (f[0] == "block") {
      if (f.size() != 4) throw fail("bad block header");
      auto rows = text::parse_int(f[2]);
      auto cols = text::parse_int(f[3]);
      if (!rows || !cols || *rows < 1 || *cols < 1) throw fail("bad block shape");
      const std::string name(f[1]);
      std::vector<double> values;
      values.reserve(static_cast<std::size_t>(*rows * *cols));
      for (long long r = 0; r < *rows; ++r) {
        if (!next()) throw fail("truncated block " + name);
        auto toks = text::split(line, ',');
        if (static_cast<long long>(toks.size()) != *cols) throw fail("wrong row length in " + name);
        for (auto t : toks) {
          auto v = text::parse_double(t);
          if (!v) throw fail("bad number '" + std::string(t) + "'");
          values.push_back(*v);
        }
      }
      shapes[name] = {*rows, *cols};
      blocks[name] = std::move(values);
    } else {
      if (f.size() != 2) throw fail("expected key<TAB>value");
      header[std::string(f[0])] = std::string(f[1]);
    }
  }

  for (const char* key : {"input_dim", "hidden_size", "output_dim", "catalog", "encoder", "config"})
    if (!header.count(key)) throw fail(std::string("missing header field ") + key);

  const std::string expected = text::hex64(catalog.fingerprint());
  if (header["catalog"] != expected) {
    throw Error(ErrorCode::kCatalogMismatch,
                source + ": checkpoint catalog " + header["catalog"] +
                    " does not match this build's catalog " + expected);
  }
  ckpt.params.catalog_fingerprint = catalog.fingerprint();
  ckpt.encoder_tag = header["encoder"];

  const auto in_dim = text::parse_int(header["input_dim"]);
  const auto hidden = text::parse_int(header["hidden_size"]);
  const auto out_dim = text::parse_int(header["output_dim"]);
  if (!in_dim || !hidden || !out_dim) throw fail("bad dimension header");
  if (*out_dim != catalog.n_dims())
    throw Error(ErrorCode::kCatalogMismatch, source + ": output_dim does not match the catalog");

  auto take = [&](const char* name, long long rows, long long cols) {
    auto it = blocks.find(name);
    if (it == blocks.end()) throw fail(std::string("missing block ") + name);
    auto shape = shapes[name];
    if (shape.first != rows || shape.second != cols)
      throw Error(ErrorCode::kShapeMismatch, source + ": block " + name + " has wrong size");
    return it->second;
  };
  auto to_matrix = [](const std::vector<double>& v, long long rows, long long cols) {
    return Matrix(Eigen::Map<const Matrix>(v.data(), rows, cols));
  };
  auto to_vector = [](const std::vector<double>& v) {
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  DiffNetParams& p = ckpt.params;
  p.w1 = to_matrix(take("w1", *in_dim, *hidden), *in_dim, *hidden);
  p.b1 = to_vector(take("b1", 1, *hidden));
  p.bn_gamma = to_vector(take("bn_gamma", 1, *hidden));
  p.bn_beta = to_vector(take("bn_beta", 1, *hidden));
  p.bn_running_mean = to_vector(take("bn_running_mean", 1, *hidden));
  p.bn_running_var = to_vector(take("bn_running_var", 1, *hidden));
  p.w2 = to_matrix(take("w2", *hidden, *out_dim), *hidden, *out_dim);
  p.b2 = to_vector(take("b2", 1, *out_dim));
  p.validate();

  // Config echo: space-separated key=value pairs.
  TrainConfig& c = ckpt.config;
  std::istringstream cfg(header["config"]);
  std::string kv;
  while (cfg >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw fail("bad config echo entry '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    auto num = text::parse_double(value);
    if (key == "optimizer") {
      auto o = parse_optimizer(value);
      if (!o) throw fail("bad optimizer in config echo");
      c.optimizer = *o;
      continue;
    }
    if (!num) throw fail("bad config echo value '" + kv + "'");
    if (key == "learning_rate") c.learning_rate = *num;
    else if (key == "batch_size") c.batch_size = static_cast<int>(*num);
    else if (key == "epochs") c.epochs = static_cast<int>(*num);
    else if (key == "dropout_rate") c.dropout_rate = *num;
    else if (key == "bn_momentum") c.bn_momentum = *num;
    else if (key == "adam_beta1") c.adam_beta1 = *num;
    else if (key == "adam_beta2") c.adam_beta2 = *num;
    else if (key == "adam_eps") c.adam_eps = *num;
    else if (key == "hidden_size") c.hidden_size = static_cast<int>(*num);
    else if (key == "seed") {
      std::uint64_t seed = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
      if (ec != std::errc() || ptr != value.data() + value.size())
        throw fail("bad seed '" + std::string(value) + "'");
      c.rng_seed = seed;
    }
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  text::write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path, const DescriptorCatalog& catalog) {
  return parse_checkpoint(text::read_file(path), catalog, path);
}

}  // namespace vtad

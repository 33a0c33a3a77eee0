/* Copyright (c) 2026 The tabad Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "tabad/bundle.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tabad/csv.hpp"

namespace tabad {

namespace {

constexpr char kMagic[8] = {'T', 'A', 'B', 'G', 'A', 'N', 'A', 'D'};
// A dimension above this is treated as corruption rather than allocated.
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

std::uint32_t crc32_of(const char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    out_ += s;
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  void matrix(const Matrix& m) {
    u64(m.rows());
    u64(m.cols());
    for (double x : m.storage()) f64(x);
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t begin, std::size_t end)
      : data_(bytes), pos_(begin), end_(end) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::uint64_t count() {
    const std::uint64_t n = u64();
    if (n > kMaxCount) throw BundleError("model bundle: implausible count " + std::to_string(n));
    return n;
  }
  std::string str() {
    const auto n = count();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> doubles() {
    const auto n = count();
    need(n * 8);
    std::vector<double> v(n);
    for (double& x : v) x = f64();
    return v;
  }
  Matrix matrix() {
    const auto r = count();
    const auto c = count();
    if (r == 0 || c == 0) throw BundleError("model bundle: empty matrix");
    if (r * c > kMaxCount) throw BundleError("model bundle: implausible matrix size");
    need(r * c * 8);
    Matrix m(r, c);
    for (double& x : m.values()) x = f64();
    return m;
  }
  bool at_end() const { return pos_ == end_; }

 private:
  void need(std::uint64_t n) const {
    if (n > end_ - pos_) throw BundleError("model bundle: payload ends early");
  }
  const std::string& data_;
  std::size_t pos_;
  std::size_t end_;
};

void write_layers(Writer& w, const std::vector<DenseLayer>& layers) {
  w.u64(layers.size());
  for (const auto& l : layers) {
    w.matrix(l.weight);
    w.matrix(l.bias);
  }
}

std::vector<DenseLayer> read_layers(Reader& r) {
  std::vector<DenseLayer> layers(r.count());
  for (auto& l : layers) {
    l.weight = r.matrix();
    l.bias = r.matrix();
  }
  return layers;
}

}  // namespace

std::string serialize_bundle(const ModelBundle& b) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kBundleVersion);
  w.str(b.config_text);

  w.u64(b.codec.columns().size());
  for (const ColumnNormalizer& c : b.codec.columns()) {
    w.str(c.name);
    w.u8(c.encoding == ColumnEncoding::kGmm ? 0 : 1);
    w.u8(c.scale_before_gmm ? 1 : 0);
    w.f64(c.minmax.min);
    w.f64(c.minmax.max);
    w.doubles(c.gmm.weights);
    w.doubles(c.gmm.means);
    w.doubles(c.gmm.variances);
  }

  const GanModel& m = b.model;
  w.u64(m.latent_dim);
  w.u64(m.pack);
  w.f64(m.gumbel.temperature);
  w.u8(m.gumbel.variant == GumbelVariant::kHard ? 0 : 1);
  write_layers(w, m.generator);
  write_layers(w, m.discriminator);

  const LossHistory& h = b.history;
  w.doubles(h.generator);
  w.doubles(h.discriminator);
  w.doubles(h.smoothed_generator);
  w.u64(h.stop_epoch);
  w.u64(h.best_epoch);
  w.u8(h.early_stopped ? 1 : 0);

  const std::uint32_t crc = crc32_of(w.bytes().data(), w.bytes().size());
  w.u32(crc);
  return std::move(w.bytes());
}

ModelBundle deserialize_bundle(const std::string& bytes) {
  constexpr std::size_t kHeader = sizeof kMagic + 4;
  if (bytes.size() < kHeader + 4) throw BundleError("model bundle: file too short");
  if (bytes.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0) {
    throw BundleError("model bundle: bad magic (not a tabad model file)");
  }
  const std::size_t body_end = bytes.size() - 4;
  Reader trailer(bytes, body_end, bytes.size());
  const std::uint32_t stored = trailer.u32();
  if (stored != crc32_of(bytes.data(), body_end)) {
    throw BundleError("model bundle: checksum mismatch (file is corrupted or truncated)");
  }
  Reader r(bytes, sizeof kMagic, body_end);
  const std::uint32_t version = r.u32();
  if (version != kBundleVersion) {
    throw BundleError("model bundle: unsupported format version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kBundleVersion) + ")");
  }

  ModelBundle b;
  b.config_text = r.str();

  std::vector<ColumnNormalizer> cols(r.count());
  for (ColumnNormalizer& c : cols) {
    c.name = r.str();
    const auto enc = r.u8();
    if (enc > 1) throw BundleError("model bundle: unknown column encoding " + std::to_string(enc));
    c.encoding = enc == 0 ? ColumnEncoding::kGmm : ColumnEncoding::kMinMax;
    c.scale_before_gmm = r.u8() != 0;
    c.minmax.min = r.f64();
    c.minmax.max = r.f64();
    c.gmm.weights = r.doubles();
    c.gmm.means = r.doubles();
    c.gmm.variances = r.doubles();
    if (c.gmm.means.size() != c.gmm.weights.size() || c.gmm.variances.size() != c.gmm.weights.size()) {
      throw BundleError("model bundle: inconsistent mixture for column '" + c.name + "'");
    }
    if (c.encoding == ColumnEncoding::kGmm && c.gmm.weights.empty()) {
      throw BundleError("model bundle: column '" + c.name + "' has no mixture components");
    }
  }
  if (cols.empty()) throw BundleError("model bundle: no columns");

  GanModel& m = b.model;
  m.latent_dim = r.count();
  m.pack = r.count();
  m.gumbel.temperature = r.f64();
  const auto variant = r.u8();
  if (variant > 1) throw BundleError("model bundle: unknown gumbel variant");
  m.gumbel.variant = variant == 0 ? GumbelVariant::kHard : GumbelVariant::kSoftNoised;
  m.generator = read_layers(r);
  m.discriminator = read_layers(r);

  LossHistory& h = b.history;
  h.generator = r.doubles();
  h.discriminator = r.doubles();
  h.smoothed_generator = r.doubles();
  h.stop_epoch = r.count();
  h.best_epoch = r.count();
  h.early_stopped = r.u8() != 0;
  if (!r.at_end()) throw BundleError("model bundle: trailing bytes after payload");

  b.codec = RowCodec(std::move(cols));
  m.layout = b.codec.layout();
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw BundleError(std::string("model bundle: ") + e.what());
  }
  return b;
}

void save_model(const ModelBundle& bundle, const std::string& path) {
  const std::string bytes = serialize_bundle(bundle);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw BundleError("cannot write model bundle '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.flush()) throw BundleError("write to '" + path + "' failed");
}

ModelBundle load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BundleError("cannot open model bundle '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize_bundle(buf.str());
  } catch (const BundleError& e) {
    throw BundleError(path + ": " + e.what());
  }
}

std::string describe_codec(const RowCodec& codec) {
  std::ostringstream s;
  for (const ColumnNormalizer& c : codec.columns()) {
    s << "  " << c.name << ": " << to_string(c.encoding);
    if (c.encoding == ColumnEncoding::kGmm) {
      s << ", " << c.gmm.components() << " modes";
      for (std::size_t k = 0; k < c.gmm.components(); ++k) {
        s << (k ? "; " : " [") << "w=" << format_double(c.gmm.weights[k])
          << " mean=" << format_double(c.gmm.means[k])
          << " sd=" << format_double(std::sqrt(c.gmm.variances[k]));
      }
      s << "]";
    }
    s << ", range [" << format_double(c.minmax.min) << ", " << format_double(c.minmax.max) << "]\n";
  }
  return s.str();
}

std::string describe_bundle(const ModelBundle& b) {
  std::ostringstream s;
  const GanModel& m = b.model;
  s << "format version: " << kBundleVersion << "\n";
  s << "columns: " << b.codec.columns().size() << " (encoded width " << b.codec.width() << ")\n";
  s << describe_codec(b.codec);
  auto layers = [&](const std::vector<DenseLayer>& ls) {
    std::string t;
    for (std::size_t i = 0; i < ls.size(); ++i) {
      t += (i ? " -> " : "") + std::to_string(ls[i].inputs());
    }
    return t + " -> " + std::to_string(ls.back().outputs());
  };
  s << "latent dim: " << m.latent_dim << "\n";
  s << "generator: " << layers(m.generator) << "\n";
  s << "discriminator: " << layers(m.discriminator) << " (pack " << m.pack << ")\n";
  s << "gumbel: " << to_string(m.gumbel.variant) << " training, temperature "
    << format_double(m.gumbel.temperature) << "\n";
  const LossHistory& h = b.history;
  s << "training: " << h.stop_epoch << " epochs, kept epoch " << h.best_epoch
    << (h.early_stopped ? " (early stop)" : "") << "\n";
  if (!h.generator.empty()) {
    s << "final losses: generator " << format_double(h.generator.back()) << ", discriminator "
      << format_double(h.discriminator.back()) << "\n";
  }
  s << "config:\n";
  std::istringstream cfg(b.config_text);
  for (std::string line; std::getline(cfg, line);) s << "  " << line << "\n";
  return s.str();
}

}  // namespace tabad

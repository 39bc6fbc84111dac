#include "spacee/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "spacee/config_file.hpp"
#include "spacee/error.hpp"

namespace spacee {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    auto* c = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), c, c + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void real(double v, Precision p) {
    if (p == Precision::F64) f64(v);
    else u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  void table(const ParamTable& t, Precision p) {
    for (double v : t.values()) real(v, p);
  }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> data) : data_(data) {}

  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw IoError("checkpoint is truncated or inconsistent");
  }
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  double real(Precision p) {
    return p == Precision::F64 ? f64() : static_cast<double>(std::bit_cast<float>(u32()));
  }
  void table(ParamTable& t, Precision p) {
    need(t.values().size() * static_cast<std::size_t>(p));
    for (auto& v : t.values()) v = real(p);
  }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void write_params(Writer& w, const ModelParams& params, Precision p) {
  w.table(params.entity, p);
  w.table(params.relation_fwd, p);
  w.table(params.relation_rev, p);
}

void read_params(Reader& r, ModelParams& params, Precision p) {
  r.table(params.entity, p);
  r.table(params.relation_fwd, p);
  r.table(params.relation_rev, p);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  const Precision prec = ckpt.config.precision;
  const auto& shape = ckpt.params.shape;
  Writer w;
  w.bytes("SPKE", 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(prec));
  w.u64(shape.n_entities);
  w.u64(shape.n_relations);
  w.u64(shape.p);
  w.u64(shape.q);
  write_params(w, ckpt.params, prec);
  w.u8(ckpt.adam ? 1 : 0);
  if (ckpt.adam) {
    w.u64(ckpt.adam->step);
    w.f64(ckpt.adam->beta1);
    w.f64(ckpt.adam->beta2);
    w.f64(ckpt.adam->epsilon);
    write_params(w, ckpt.adam->first, prec);
    write_params(w, ckpt.adam->second, prec);
  }
  std::string meta;
  meta += "model=" + std::string(model_kind_name(shape.kind)) + "\n";
  meta += "entity_hash=" + std::to_string(ckpt.entity_hash) + "\n";
  meta += "relation_hash=" + std::to_string(ckpt.relation_hash) + "\n";
  meta += "step=" + std::to_string(ckpt.step) + "\n";
  for (const auto& [k, v] : train_config_entries(ckpt.config)) {
    if (k != "model") meta += "config." + k + "=" + v + "\n";
  }
  w.bytes(meta.data(), meta.size());
  w.u64(meta.size());
  w.u64(fnv1a64(w.data()));
  return std::move(w.data());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 4 + 4 + 4 + 4 * 8;
  if (bytes.size() < kHeader + 1 + 16) throw IoError("checkpoint is truncated");
  const auto body = bytes.first(bytes.size() - 8);
  Reader tail(bytes.subspan(bytes.size() - 16));
  const std::uint64_t meta_len = tail.u64();
  const std::uint64_t checksum = tail.u64();
  if (fnv1a64(body) != checksum) throw IoError("checkpoint checksum mismatch (file corrupt or truncated)");
  if (std::memcmp(bytes.data(), "SPKE", 4) != 0) throw IoError("not a checkpoint (bad magic)");
  if (meta_len > bytes.size() - 16 - kHeader) throw IoError("checkpoint metadata length is invalid");

  const std::size_t meta_start = bytes.size() - 16 - meta_len;
  const std::string meta(reinterpret_cast<const char*>(bytes.data() + meta_start), meta_len);

  Checkpoint ckpt;
  ModelShape shape;
  for (const auto& e : parse_key_values(meta)) {
    if (e.key == "model") shape.kind = parse_model_kind(e.value);
    else if (e.key == "entity_hash") ckpt.entity_hash = std::stoull(e.value);
    else if (e.key == "relation_hash") ckpt.relation_hash = std::stoull(e.value);
    else if (e.key == "step") ckpt.step = std::stoull(e.value);
    else if (e.key.rfind("config.", 0) == 0) apply_train_option(ckpt.config, e.key.substr(7), e.value);
  }
  ckpt.config.model = shape.kind;

  Reader r(bytes.first(meta_start));
  r.need(4);
  for (int i = 0; i < 4; ++i) r.u8();
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto prec_flag = r.u32();
  if (prec_flag != 4 && prec_flag != 8) throw IoError("invalid checkpoint precision flag");
  const Precision prec = static_cast<Precision>(prec_flag);
  ckpt.config.precision = prec;
  shape.n_entities = r.u64();
  shape.n_relations = r.u64();
  shape.p = r.u64();
  shape.q = r.u64();
  try {
    validate_shape(shape);
  } catch (const ConfigError& e) {
    throw IoError(std::string("checkpoint has an invalid shape: ") + e.what());
  }
  // Guard against absurd sizes before allocating.
  const double elems = static_cast<double>(shape.n_entities) * static_cast<double>(shape.entity_row()) +
                       static_cast<double>(shape.n_relations) *
                           static_cast<double>(shape.relation_row() + shape.reverse_row());
  if (elems * static_cast<double>(prec_flag) > static_cast<double>(bytes.size())) {
    throw IoError("checkpoint is truncated or inconsistent");
  }
  ckpt.params = ModelParams(shape);
  read_params(r, ckpt.params, prec);
  if (r.u8() == 1) {
    AdamState adam(shape);
    adam.step = r.u64();
    adam.beta1 = r.f64();
    adam.beta2 = r.f64();
    adam.epsilon = r.f64();
    read_params(r, adam.first, prec);
    read_params(r, adam.second, prec);
    ckpt.adam = std::move(adam);
  }
  if (r.pos() != meta_start) throw IoError("checkpoint body size does not match its header");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const fs::path& path) {
  const auto bytes = encode_checkpoint(ckpt);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace spacee

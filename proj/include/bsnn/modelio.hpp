#ifndef BSNN_MODELIO_HPP_
#define BSNN_MODELIO_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsnn/convert.hpp"
#include "bsnn/netcore.hpp"

// Bit-exact binary containers: "BSNN" deployment/real models, "BSNC"
// trainer checkpoints, "BSTD" tensor files (plus IDX import). All
// little-endian, CRC32-trailed.

namespace bsnn {

enum class IoErrorCode {
  BadMagic,
  BadVersion,
  BadChecksum,
  Truncated,
  SizeMismatch,
  FileError,
};

class IoError : public std::runtime_error {
 public:
  IoError(IoErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  IoErrorCode code() const { return code_; }

 private:
  IoErrorCode code_;
};

namespace detail {

inline uint32_t crc32(const uint8_t* data, size_t n, uint32_t crc = 0) {
  crc = ~crc;
  for (size_t i = 0; i < n; ++i) {
    crc ^= data[i];
    for (int k = 0; k < 8; ++k) {
      crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
    }
  }
  return ~crc;
}

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void i8(int8_t v) { buf_.push_back(static_cast<uint8_t>(v)); }
  void u16(uint16_t v) { u8(v & 0xFF); u8(v >> 8); }
  void u32(uint32_t v) { u16(v & 0xFFFF); u16(v >> 16); }
  void i32(int32_t v) { u32(static_cast<uint32_t>(v)); }
  void u64(uint64_t v) { u32(v & 0xFFFFFFFFu); u32(v >> 32); }
  void f32(float v) { uint32_t b; std::memcpy(&b, &v, 4); u32(b); }
  void f64(double v) { uint64_t b; std::memcpy(&b, &v, 8); u64(b); }
  void bytes(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }

  void finish_with_crc() {
    uint32_t c = crc32(buf_.data(), buf_.size());
    u32(c);
  }

  const std::vector<uint8_t>& data() const { return buf_; }

 private:
  std::vector<uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<uint8_t> data) : buf_(std::move(data)) {}

  uint8_t u8() { need(1); return buf_[pos_++]; }
  int8_t i8() { return static_cast<int8_t>(u8()); }
  uint16_t u16() { uint16_t lo = u8(); return lo | (uint16_t(u8()) << 8); }
  uint32_t u32() { uint32_t lo = u16(); return lo | (uint32_t(u16()) << 16); }
  int32_t i32() { return static_cast<int32_t>(u32()); }
  uint64_t u64() { uint64_t lo = u32(); return lo | (uint64_t(u32()) << 32); }
  float f32() { uint32_t b = u32(); float v; std::memcpy(&v, &b, 4); return v; }
  double f64() { uint64_t b = u64(); double v; std::memcpy(&v, &b, 8); return v; }
  void bytes(uint8_t* p, size_t n) { need(n); std::memcpy(p, &buf_[pos_], n); pos_ += n; }

  size_t remaining() const { return buf_.size() - pos_; }

  void check_trailing_crc() {
    if (buf_.size() < 4) throw IoError(IoErrorCode::Truncated, "file too short");
    uint32_t stored;
    std::memcpy(&stored, &buf_[buf_.size() - 4], 4);
    uint32_t computed = crc32(buf_.data(), buf_.size() - 4);
    if (stored != computed) {
      throw IoError(IoErrorCode::BadChecksum, "checksum mismatch");
    }
    buf_.resize(buf_.size() - 4);
  }

 private:
  void need(size_t n) {
    if (pos_ + n > buf_.size()) {
      throw IoError(IoErrorCode::Truncated, "unexpected end of file");
    }
  }
  std::vector<uint8_t> buf_;
  size_t pos_ = 0;
};

inline void write_file(const std::string& path, const std::vector<uint8_t>& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(IoErrorCode::FileError, "cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
  if (!f) throw IoError(IoErrorCode::FileError, "write failed: " + path);
}

inline std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw IoError(IoErrorCode::FileError, "cannot open for read: " + path);
  std::streamsize n = f.tellg();
  f.seekg(0);
  std::vector<uint8_t> data(static_cast<size_t>(n));
  f.read(reinterpret_cast<char*>(data.data()), n);
  if (!f) throw IoError(IoErrorCode::FileError, "read failed: " + path);
  return data;
}

// Magic and version are validated before the checksum so each corruption
// mode reports its own error.
inline void precheck(const std::vector<uint8_t>& data, const char (&magic)[5],
                     uint16_t expected_version) {
  if (data.size() < 6) throw IoError(IoErrorCode::Truncated, "file too short");
  if (std::memcmp(data.data(), magic, 4) != 0) {
    throw IoError(IoErrorCode::BadMagic, std::string("bad magic, expected ") + magic);
  }
  uint16_t version = data[4] | (uint16_t(data[5]) << 8);
  if (version != expected_version) {
    throw IoError(IoErrorCode::BadVersion,
                  "unsupported format version " + std::to_string(version));
  }
}

inline void expect_magic(ByteReader& r, const char (&magic)[5]) {
  uint8_t m[4];
  r.bytes(m, 4);
  if (std::memcmp(m, magic, 4) != 0) {
    throw IoError(IoErrorCode::BadMagic, std::string("bad magic, expected ") + magic);
  }
}

inline void write_f32_vec(ByteWriter& w, const std::vector<float>& v) {
  w.u64(v.size());
  for (float x : v) w.f32(x);
}

inline std::vector<float> read_f32_vec(ByteReader& r) {
  std::vector<float> v(r.u64());
  for (auto& x : v) x = r.f32();
  return v;
}

inline void write_geom(ByteWriter& w, const Geometry& g) {
  w.i32(g.in_ch); w.i32(g.out_ch); w.i32(g.kh); w.i32(g.kw);
  w.i32(g.stride); w.i32(g.pad); w.i32(g.in_h); w.i32(g.in_w);
}

inline Geometry read_geom(ByteReader& r) {
  Geometry g;
  g.in_ch = r.i32(); g.out_ch = r.i32(); g.kh = r.i32(); g.kw = r.i32();
  g.stride = r.i32(); g.pad = r.i32(); g.in_h = r.i32(); g.in_w = r.i32();
  return g;
}

}  // namespace detail

inline constexpr uint16_t kModelFormatVersion = 1;

inline std::vector<uint8_t> serialize_model(const NetworkModel& m) {
  detail::ByteWriter w;
  w.bytes(reinterpret_cast<const uint8_t*>("BSNN"), 4);
  w.u16(kModelFormatVersion);
  uint16_t flags = m.deploy ? 1 : 0;
  w.u16(flags);
  w.i32(m.input_ch); w.i32(m.input_h); w.i32(m.input_w);
  w.i32(m.class_count); w.i32(m.default_T); w.i32(m.default_n_mc);
  w.u32(static_cast<uint32_t>(m.layers.size()));
  for (const LayerSpec& l : m.layers) {
    w.u8(static_cast<uint8_t>(l.kind));
    w.i32(l.skip_from);
    detail::write_geom(w, l.geom);
    w.i32(l.levels);
    w.f32(static_cast<float>(l.step));
    uint8_t lflags = 0;
    if (l.weight.frozen()) lflags |= 1;
    if (l.weight.has_lambda()) lflags |= 2;
    w.u8(lflags);
    if (m.deploy) {
      w.i32(l.a_q.exponent);
      w.u64(l.a_q.mantissas.size());
      w.bytes(reinterpret_cast<const uint8_t*>(l.a_q.mantissas.data()),
              l.a_q.mantissas.size());
      w.i32(l.b_q.exponent);
      w.u64(l.b_q.mantissas.size());
      w.bytes(reinterpret_cast<const uint8_t*>(l.b_q.mantissas.data()),
              l.b_q.mantissas.size());
      w.i8(l.theta_q.mantissa);
      w.i32(l.theta_q.exponent);
    } else {
      w.u64(l.a.size());
      for (double v : l.a) w.f64(v);
      w.u64(l.b.size());
      for (double v : l.b) w.f64(v);
      w.f64(l.theta);
    }
    if (l.weight.frozen()) {
      // prob_q in row-major flattened order, the same 64-block order the
      // block sampler consumes.
      w.u64(l.weight.prob_q.size());
      w.bytes(l.weight.prob_q.data(), l.weight.prob_q.size());
    }
    if (l.weight.has_lambda()) {
      detail::write_f32_vec(w, l.weight.lambda);
    }
  }
  w.finish_with_crc();
  return w.data();
}

inline NetworkModel deserialize_model(std::vector<uint8_t> data) {
  detail::precheck(data, "BSNN", kModelFormatVersion);
  detail::ByteReader r(std::move(data));
  r.check_trailing_crc();
  detail::expect_magic(r, "BSNN");
  (void)r.u16();  // version, already validated
  uint16_t flags = r.u16();
  NetworkModel m;
  m.deploy = flags & 1;
  m.input_ch = r.i32(); m.input_h = r.i32(); m.input_w = r.i32();
  m.class_count = r.i32(); m.default_T = r.i32(); m.default_n_mc = r.i32();
  uint32_t n_layers = r.u32();
  m.layers.resize(n_layers);
  for (LayerSpec& l : m.layers) {
    l.kind = static_cast<LayerKind>(r.u8());
    l.skip_from = r.i32();
    l.geom = detail::read_geom(r);
    l.levels = r.i32();
    l.step = r.f32();
    uint8_t lflags = r.u8();
    if (m.deploy) {
      l.a_q.exponent = r.i32();
      l.a_q.mantissas.resize(r.u64());
      r.bytes(reinterpret_cast<uint8_t*>(l.a_q.mantissas.data()),
              l.a_q.mantissas.size());
      l.b_q.exponent = r.i32();
      l.b_q.mantissas.resize(r.u64());
      r.bytes(reinterpret_cast<uint8_t*>(l.b_q.mantissas.data()),
              l.b_q.mantissas.size());
      l.theta_q.mantissa = r.i8();
      l.theta_q.exponent = r.i32();
      l.a = l.a_q.decode_all();
      l.b = l.b_q.decode_all();
      l.theta = l.theta_q.decode();
    } else {
      l.a.resize(r.u64());
      for (double& v : l.a) v = r.f64();
      l.b.resize(r.u64());
      for (double& v : l.b) v = r.f64();
      l.theta = r.f64();
    }
    if (lflags & 1) {
      l.weight.prob_q.resize(r.u64());
      r.bytes(l.weight.prob_q.data(), l.weight.prob_q.size());
    }
    if (lflags & 2) {
      l.weight.lambda = detail::read_f32_vec(r);
    }
    if (l.has_weights() &&
        static_cast<int>(l.weight.size()) != l.geom.weight_count()) {
      throw IoError(IoErrorCode::SizeMismatch, "weight payload size mismatch");
    }
  }
  return m;
}

inline void save_model(const NetworkModel& m, const std::string& path) {
  detail::write_file(path, serialize_model(m));
}

inline NetworkModel load_model(const std::string& path) {
  return deserialize_model(detail::read_file(path));
}

// ---- trainer checkpoints ("BSNC") ----

inline constexpr uint16_t kCheckpointFormatVersion = 1;

inline std::vector<uint8_t> serialize_checkpoint(const AnnCheckpoint& c) {
  detail::ByteWriter w;
  w.bytes(reinterpret_cast<const uint8_t*>("BSNC"), 4);
  w.u16(kCheckpointFormatVersion);
  w.i32(c.levels);
  w.i32(c.input_ch); w.i32(c.input_h); w.i32(c.input_w);
  w.i32(c.class_count);
  w.f32(c.bn_eps);
  w.u32(static_cast<uint32_t>(c.layers.size()));
  for (const AnnLayer& l : c.layers) {
    w.u8(static_cast<uint8_t>(l.kind));
    w.i32(l.skip_from);
    detail::write_geom(w, l.geom);
    w.f32(l.step);
    detail::write_f32_vec(w, l.lambda);
    detail::write_f32_vec(w, l.gamma);
    detail::write_f32_vec(w, l.beta);
    detail::write_f32_vec(w, l.mu);
    detail::write_f32_vec(w, l.var);
    detail::write_f32_vec(w, l.bias);
  }
  w.finish_with_crc();
  return w.data();
}

inline AnnCheckpoint deserialize_checkpoint(std::vector<uint8_t> data) {
  detail::precheck(data, "BSNC", kCheckpointFormatVersion);
  detail::ByteReader r(std::move(data));
  r.check_trailing_crc();
  detail::expect_magic(r, "BSNC");
  (void)r.u16();  // version, already validated
  AnnCheckpoint c;
  c.levels = r.i32();
  c.input_ch = r.i32(); c.input_h = r.i32(); c.input_w = r.i32();
  c.class_count = r.i32();
  c.bn_eps = r.f32();
  uint32_t n = r.u32();
  c.layers.resize(n);
  for (AnnLayer& l : c.layers) {
    l.kind = static_cast<LayerKind>(r.u8());
    l.skip_from = r.i32();
    l.geom = detail::read_geom(r);
    l.step = r.f32();
    l.lambda = detail::read_f32_vec(r);
    l.gamma = detail::read_f32_vec(r);
    l.beta = detail::read_f32_vec(r);
    l.mu = detail::read_f32_vec(r);
    l.var = detail::read_f32_vec(r);
    l.bias = detail::read_f32_vec(r);
  }
  return c;
}

inline void save_checkpoint(const AnnCheckpoint& c, const std::string& path) {
  detail::write_file(path, serialize_checkpoint(c));
}

inline AnnCheckpoint load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(detail::read_file(path));
}

// ---- tensor files ("BSTD") and IDX import ----

enum class TensorDtype : uint8_t { U8Image = 0, U8Label = 1 };

struct TensorFile {
  TensorDtype dtype = TensorDtype::U8Image;
  std::vector<uint32_t> dims;
  std::vector<uint8_t> payload;

  size_t elem_count() const {
    size_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
};

inline std::vector<uint8_t> serialize_tensor(const TensorFile& t) {
  detail::ByteWriter w;
  w.bytes(reinterpret_cast<const uint8_t*>("BSTD"), 4);
  w.u8(static_cast<uint8_t>(t.dtype));
  w.u8(static_cast<uint8_t>(t.dims.size()));
  for (uint32_t d : t.dims) w.u32(d);
  w.bytes(t.payload.data(), t.payload.size());
  w.finish_with_crc();
  return w.data();
}

inline TensorFile deserialize_tensor(std::vector<uint8_t> data) {
  detail::ByteReader r(std::move(data));
  r.check_trailing_crc();
  detail::expect_magic(r, "BSTD");
  TensorFile t;
  t.dtype = static_cast<TensorDtype>(r.u8());
  t.dims.resize(r.u8());
  for (uint32_t& d : t.dims) d = r.u32();
  if (r.remaining() != t.elem_count()) {
    throw IoError(IoErrorCode::SizeMismatch, "tensor payload size mismatch");
  }
  t.payload.resize(r.remaining());
  r.bytes(t.payload.data(), t.payload.size());
  return t;
}

inline void save_tensor(const TensorFile& t, const std::string& path) {
  detail::write_file(path, serialize_tensor(t));
}

// IDX (MNIST-class) files: big-endian magic 0x0000 08 ndims.
inline TensorFile load_idx(const std::vector<uint8_t>& data) {
  if (data.size() < 4) throw IoError(IoErrorCode::Truncated, "idx too short");
  if (data[0] != 0 || data[1] != 0 || data[2] != 0x08) {
    throw IoError(IoErrorCode::BadMagic, "not a u8 IDX file");
  }
  int ndims = data[3];
  size_t pos = 4;
  TensorFile t;
  t.dtype = ndims >= 2 ? TensorDtype::U8Image : TensorDtype::U8Label;
  for (int i = 0; i < ndims; ++i) {
    if (pos + 4 > data.size()) throw IoError(IoErrorCode::Truncated, "idx dims");
    uint32_t d = (uint32_t(data[pos]) << 24) | (uint32_t(data[pos + 1]) << 16) |
                 (uint32_t(data[pos + 2]) << 8) | uint32_t(data[pos + 3]);
    t.dims.push_back(d);
    pos += 4;
  }
  if (data.size() - pos != t.elem_count()) {
    throw IoError(IoErrorCode::SizeMismatch, "idx payload size mismatch");
  }
  t.payload.assign(data.begin() + pos, data.end());
  return t;
}

inline TensorFile load_tensor(const std::string& path) {
  std::vector<uint8_t> data = detail::read_file(path);
  if (data.size() >= 4 && data[0] == 0 && data[1] == 0 && data[2] == 0x08) {
    return load_idx(data);
  }
  return deserialize_tensor(std::move(data));
}

struct Dataset {
  int n = 0, ch = 1, h = 0, w = 0;
  std::vector<uint8_t> images;  // n * ch * h * w
  std::vector<int> labels;

  std::vector<double> image_as_real(int i) const {
    size_t sz = static_cast<size_t>(ch) * h * w;
    std::vector<double> out(sz);
    const uint8_t* p = images.data() + static_cast<size_t>(i) * sz;
    for (size_t k = 0; k < sz; ++k) out[k] = p[k] / 255.0;
    return out;
  }
};

inline Dataset load_dataset(const std::string& images_path,
                            const std::string& labels_path) {
  TensorFile imgs = load_tensor(images_path);
  TensorFile labs = load_tensor(labels_path);
  if (imgs.dims.size() < 3 || labs.dims.size() != 1) {
    throw IoError(IoErrorCode::SizeMismatch, "unexpected tensor ranks");
  }
  Dataset d;
  d.n = static_cast<int>(imgs.dims[0]);
  if (imgs.dims.size() == 4) {
    d.ch = static_cast<int>(imgs.dims[1]);
    d.h = static_cast<int>(imgs.dims[2]);
    d.w = static_cast<int>(imgs.dims[3]);
  } else {
    d.ch = 1;
    d.h = static_cast<int>(imgs.dims[1]);
    d.w = static_cast<int>(imgs.dims[2]);
  }
  if (static_cast<int>(labs.dims[0]) != d.n) {
    throw IoError(IoErrorCode::SizeMismatch, "image/label count mismatch");
  }
  d.images = imgs.payload;
  d.labels.assign(labs.payload.begin(), labs.payload.end());
  return d;
}

}  // namespace bsnn

#endif  // BSNN_MODELIO_HPP_

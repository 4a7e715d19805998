#pragma once

// Binary record format (all integers and floats little-endian):
//
//   offset  size        field
//   0       4           magic "PFL1"
//   4       2           version (u16) = 1
//   6       2           L (u16)
//   8       4           flags (u32); bits 0-7 hold the generator kind
//   12      4           porosity (f32)
//   16      32          tau, g_x, g_y, tolerance (4 x f64)
//   48      ceil(L*L/8) occupancy bits, row-major, LSB first, 1 = solid
//   ...     4*L*L       u_x plane, row-major f32
//   ...     4*L*L       u_y plane, row-major f32
//   end-4   4           CRC-32 (zlib polynomial) of every preceding byte

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "porelab/core.hpp"
#include "porelab/lbm.hpp"

namespace porelab::format {

class FormatError : public DataError {
 public:
  using DataError::DataError;
};
class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};
class VersionMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};
class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};
class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

inline constexpr char kMagic[4] = {'P', 'F', 'L', '1'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 48;

enum class GeneratorKind : std::uint8_t { none = 0, trig = 1, shapes = 2, pipe = 3 };

inline const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::trig: return "trig";
    case GeneratorKind::shapes: return "shapes";
    case GeneratorKind::pipe: return "pipe";
    case GeneratorKind::none: break;
  }
  return "none";
}

inline GeneratorKind kind_from_string(const std::string& s) {
  if (s == "trig") return GeneratorKind::trig;
  if (s == "shapes") return GeneratorKind::shapes;
  if (s == "pipe") return GeneratorKind::pipe;
  if (s == "none") return GeneratorKind::none;
  throw ParameterError("unknown generator kind: " + s);
}

/// Contents of one record file.
struct RecordData {
  StructureGrid structure;
  VelocityField field;
  lbm::LbmParams params;
  GeneratorKind kind = GeneratorKind::none;
};

inline std::size_t mask_bytes(std::size_t size) { return (size * size + 7) / 8; }

inline std::size_t record_bytes(std::size_t size) {
  return kHeaderBytes + mask_bytes(size) + 2 * 4 * size * size + 4;
}

/// Velocity rounded through f32, i.e. exactly what a record stores.
inline VelocityField quantize(const VelocityField& f) {
  VelocityField out = f;
  for (auto& v : out.ux.values()) v = static_cast<double>(static_cast<float>(v));
  for (auto& v : out.uy.values()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

inline std::uint32_t crc32_of(const std::uint8_t* data, std::size_t len) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (len > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(len, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    len -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace detail {

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get(4))); }
  double f64() { return std::bit_cast<double>(get(8)); }
  const std::uint8_t* take(std::size_t n) {
    if (pos_ + n > n_) throw TruncatedError("record truncated");
    const auto* p = p_ + pos_;
    pos_ += n;
    return p;
  }

 private:
  std::uint64_t get(int n) {
    const auto* b = take(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Serializes a record. Non-finite velocities or parameters are rejected.
inline std::vector<std::uint8_t> encode(const RecordData& rec) {
  const std::size_t n = rec.structure.size();
  require_same_size(rec.field.size(), n, "encode");
  if (n == 0 || n > 0xFFFF) throw ParameterError("record: grid size must be in [1, 65535]");
  if (!rec.field.all_finite()) throw DataError("record: non-finite velocity values");
  const double params[4] = {rec.params.tau, rec.params.force.x, rec.params.force.y, rec.params.tolerance};
  for (double v : params)
    if (!std::isfinite(v)) throw DataError("record: non-finite solver parameter");

  std::vector<std::uint8_t> out;
  out.reserve(record_bytes(n));
  detail::Writer w(out);
  w.bytes(kMagic, 4);
  w.u16(kVersion);
  w.u16(static_cast<std::uint16_t>(n));
  w.u32(static_cast<std::uint32_t>(rec.kind));
  w.f32(static_cast<float>(rec.structure.porosity()));
  for (double v : params) w.f64(v);

  std::vector<std::uint8_t> mask(mask_bytes(n), 0);
  for (std::size_t i = 0; i < rec.structure.cells(); ++i)
    if (rec.structure.solid(i)) mask[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  w.bytes(mask.data(), mask.size());
  for (double v : rec.field.ux.values()) w.f32(static_cast<float>(v));
  for (double v : rec.field.uy.values()) w.f32(static_cast<float>(v));
  w.u32(crc32_of(out.data(), out.size()));
  return out;
}

/// Parses a record. Checks, in order: header length, magic, version, total
/// length, checksum, then content consistency.
inline RecordData decode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes) throw TruncatedError("record shorter than its header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw BadMagicError("record: bad magic");
  detail::Reader r(bytes.data(), bytes.size());
  r.take(4);
  const std::uint16_t version = r.u16();
  if (version != kVersion)
    throw VersionMismatchError("record: unsupported version " + std::to_string(version));
  const std::size_t n = r.u16();
  const std::size_t expected = record_bytes(n);
  if (bytes.size() < expected) throw TruncatedError("record truncated");
  if (bytes.size() > expected) throw FormatError("record: trailing bytes after checksum");
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[expected - 4 + static_cast<std::size_t>(i)]) << (8 * i);
  if (crc32_of(bytes.data(), expected - 4) != stored) throw ChecksumError("record: checksum mismatch");

  RecordData rec;
  const std::uint32_t flags = r.u32();
  const auto kind = static_cast<std::uint8_t>(flags & 0xFF);
  if (kind > static_cast<std::uint8_t>(GeneratorKind::pipe)) throw FormatError("record: unknown generator kind");
  rec.kind = static_cast<GeneratorKind>(kind);
  const float porosity = r.f32();
  rec.params.tau = r.f64();
  rec.params.force.x = r.f64();
  rec.params.force.y = r.f64();
  rec.params.tolerance = r.f64();

  rec.structure = StructureGrid(n);
  const std::uint8_t* mask = r.take(mask_bytes(n));
  for (std::size_t i = 0; i < n * n; ++i)
    if (mask[i / 8] & (1u << (i % 8))) rec.structure.set_solid(i);
  rec.field = VelocityField(n);
  for (auto& v : rec.field.ux.values()) v = r.f32();
  for (auto& v : rec.field.uy.values()) v = r.f32();

  if (static_cast<float>(rec.structure.porosity()) != porosity)
    throw DataError("record: stored porosity disagrees with the structure");
  if (!rec.field.all_finite()) throw DataError("record: non-finite velocity values");
  return rec;
}

inline void write_record(const std::filesystem::path& path, const RecordData& rec) {
  const auto bytes = encode(rec);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DataError("write failed: " + path.string());
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline RecordData read_record(const std::filesystem::path& path) { return decode(read_bytes(path)); }

}  // namespace porelab::format

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "gpso/adamw.hpp"
#include "gpso/arch.hpp"
#include "gpso/error.hpp"

namespace gpso {

// Binary checkpoint, version 1, little-endian. Doubles are stored as raw
// IEEE-754 bits so the round trip is exact. Layout:
//   magic "GPSOCKPT" | u32 version | 16-byte config digest (hex chars)
//   arch (5 x i32, u64 init_seed) | u64 step
//   manifest: u32 count, then {u32 name_len, name, u64 rows, u64 cols, u64 offset}
//   params: u64 count, f64 bits x count
//   u8 has_opt; if set: u64 t, then m and v as counted f64 arrays
//   trailer "END0"
struct Checkpoint {
  PolicySnapshot snapshot;
  AdamWState opt;
  bool has_opt = false;
  std::string config_digest;  // 16 hex chars
};

namespace ckptdetail {

inline void put_bytes(std::string& out, const void* p, std::size_t n) {
  out.append(static_cast<const char*>(p), n);
}
inline void put_u32(std::string& out, std::uint32_t v) { put_bytes(out, &v, 4); }
inline void put_u64(std::string& out, std::uint64_t v) { put_bytes(out, &v, 8); }
inline void put_f64_array(std::string& out, const std::vector<double>& a) {
  put_u64(out, a.size());
  for (double d : a) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
  }
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;
  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw StateError("checkpoint: truncated file");
  }
  void get_bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, buf.data() + pos, n);
    pos += n;
  }
  std::uint32_t get_u32() { std::uint32_t v; get_bytes(&v, 4); return v; }
  std::uint64_t get_u64() { std::uint64_t v; get_bytes(&v, 8); return v; }
  std::vector<double> get_f64_array() {
    const std::uint64_t n = get_u64();
    if (n > (buf.size() - pos) / 8) throw StateError("checkpoint: truncated file");
    std::vector<double> a(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      std::uint64_t bits = get_u64();
      std::memcpy(&a[i], &bits, 8);
    }
    return a;
  }
};

constexpr char kMagic[8] = {'G', 'P', 'S', 'O', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

}  // namespace ckptdetail

inline std::string encode_checkpoint(const Checkpoint& c) {
  using namespace ckptdetail;
  if (c.config_digest.size() != 16) throw InputError("checkpoint: digest must be 16 hex chars");
  std::string out;
  put_bytes(out, kMagic, 8);
  put_u32(out, kVersion);
  put_bytes(out, c.config_digest.data(), 16);
  const ArchConfig& a = c.snapshot.arch;
  for (int v : {a.vocab_size, a.context_length, a.depth, a.width, a.head_count}) {
    put_u32(out, static_cast<std::uint32_t>(v));
  }
  put_u64(out, a.init_seed);
  put_u64(out, c.snapshot.step);
  const std::vector<ParamSegment> manifest = param_manifest(a);
  put_u32(out, static_cast<std::uint32_t>(manifest.size()));
  for (const ParamSegment& s : manifest) {
    put_u32(out, static_cast<std::uint32_t>(s.name.size()));
    put_bytes(out, s.name.data(), s.name.size());
    put_u64(out, static_cast<std::uint64_t>(s.rows));
    put_u64(out, static_cast<std::uint64_t>(s.cols));
    put_u64(out, static_cast<std::uint64_t>(s.offset));
  }
  put_f64_array(out, c.snapshot.params);
  out.push_back(c.has_opt ? '\1' : '\0');
  if (c.has_opt) {
    put_u64(out, c.opt.t);
    put_f64_array(out, c.opt.m);
    put_f64_array(out, c.opt.v);
  }
  put_bytes(out, "END0", 4);
  return out;
}

inline Checkpoint decode_checkpoint(const std::string& buf, const std::string& expected_digest) {
  using namespace ckptdetail;
  Reader r{buf};
  char magic[8];
  r.get_bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw StateError("checkpoint: bad magic");
  const std::uint32_t version = r.get_u32();
  if (version != kVersion) {
    throw StateError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint c;
  c.config_digest.resize(16);
  r.get_bytes(c.config_digest.data(), 16);
  if (!expected_digest.empty() && c.config_digest != expected_digest) {
    throw StateError("checkpoint: config digest mismatch (file " + c.config_digest +
                     ", expected " + expected_digest + ")");
  }
  ArchConfig a;
  a.vocab_size = static_cast<int>(r.get_u32());
  a.context_length = static_cast<int>(r.get_u32());
  a.depth = static_cast<int>(r.get_u32());
  a.width = static_cast<int>(r.get_u32());
  a.head_count = static_cast<int>(r.get_u32());
  a.init_seed = r.get_u64();
  validate_arch(a);
  c.snapshot.arch = a;
  c.snapshot.step = r.get_u64();
  const std::vector<ParamSegment> manifest = param_manifest(a);
  const std::uint32_t seg_count = r.get_u32();
  if (seg_count != manifest.size()) throw StateError("checkpoint: manifest segment count mismatch");
  for (const ParamSegment& s : manifest) {
    const std::uint32_t name_len = r.get_u32();
    std::string name(name_len, '\0');
    r.get_bytes(name.data(), name_len);
    const std::uint64_t rows = r.get_u64();
    const std::uint64_t cols = r.get_u64();
    const std::uint64_t offset = r.get_u64();
    if (name != s.name || rows != static_cast<std::uint64_t>(s.rows) ||
        cols != static_cast<std::uint64_t>(s.cols) || offset != static_cast<std::uint64_t>(s.offset)) {
      throw StateError("checkpoint: manifest entry '" + name + "' does not match arch");
    }
  }
  c.snapshot.params = r.get_f64_array();
  if (c.snapshot.params.size() != param_count(a)) {
    throw StateError("checkpoint: parameter count does not match arch");
  }
  char has_opt;
  r.get_bytes(&has_opt, 1);
  c.has_opt = has_opt != 0;
  if (c.has_opt) {
    c.opt.t = r.get_u64();
    c.opt.m = r.get_f64_array();
    c.opt.v = r.get_f64_array();
    if (c.opt.m.size() != c.snapshot.params.size() || c.opt.v.size() != c.snapshot.params.size()) {
      throw StateError("checkpoint: optimizer state size mismatch");
    }
  }
  char trailer[4];
  r.get_bytes(trailer, 4);
  if (std::memcmp(trailer, "END0", 4) != 0) throw StateError("checkpoint: bad trailer");
  if (r.pos != buf.size()) throw StateError("checkpoint: trailing bytes after trailer");
  return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw StateError("checkpoint: cannot open '" + path + "' for writing");
  const std::string buf = encode_checkpoint(c);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw StateError("checkpoint: write failed for '" + path + "'");
}

// Pass an empty expected_digest to skip the digest check (eval on an
// arbitrary checkpoint); otherwise a mismatch is refused.
inline Checkpoint load_checkpoint(const std::string& path, const std::string& expected_digest = "") {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw StateError("checkpoint: cannot open '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(buf, expected_digest);
}

}  // namespace gpso

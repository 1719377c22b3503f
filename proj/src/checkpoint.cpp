#include "fingergan/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace fingergan::checkpoint {
namespace {

constexpr std::array<char, 8> kMagic = {'F', 'G', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kMaxString = 1u << 20;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_ += s;
  }
  void f32(float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    u32(bits);
  }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  const std::string& bytes() const { return buf_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::string& buf, std::size_t end) : buf_(buf), end_(end) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > kMaxString) throw std::runtime_error("checkpoint: implausible string length");
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
  }
  void expect_raw(const char* p, std::size_t n) {
    need(n);
    if (buf_.compare(pos_, n, p, n) != 0) throw std::runtime_error("checkpoint: bad magic");
    pos_ += n;
  }
  bool done() const { return pos_ == end_; }
  std::size_t remaining() const { return end_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw std::runtime_error("checkpoint: truncated file");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  const std::string& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

const NamedArray* Checkpoint::find(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const std::string& Checkpoint::meta(const std::string& key) const {
  const auto it = metadata.find(key);
  if (it == metadata.end()) throw std::runtime_error("checkpoint: missing metadata key '" + key + "'");
  return it->second;
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  Writer w;
  w.raw(kMagic.data(), kMagic.size());
  w.u32(Checkpoint::kVersion);
  w.u64(ckpt.spec_hash);
  w.u64(ckpt.iteration);
  w.u32(static_cast<std::uint32_t>(ckpt.metadata.size()));
  for (const auto& [k, v] : ckpt.metadata) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& a : ckpt.arrays) {
    std::size_t expected = 1;
    for (const int d : a.shape) expected *= static_cast<std::size_t>(d);
    if (expected != a.values.size()) throw std::invalid_argument("checkpoint: array '" + a.name + "' shape/size mismatch");
    w.str(a.name);
    w.u32(static_cast<std::uint32_t>(a.shape.size()));
    for (const int d : a.shape) w.u32(static_cast<std::uint32_t>(d));
    w.u64(a.values.size());
    for (const float v : a.values) w.f32(v);
  }
  const std::uint64_t sum = fnv1a(w.bytes());
  w.u64(sum);

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + tmp.string());
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    out.flush();
    if (!out) throw std::runtime_error("checkpoint: failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kMagic.size() + 8) throw std::runtime_error("checkpoint: truncated file " + path.string());
  const std::size_t body = buf.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[body + i])) << (8 * i);
  if (stored != fnv1a(buf.substr(0, body))) throw std::runtime_error("checkpoint: checksum mismatch in " + path.string());

  Reader r(buf, body);
  r.expect_raw(kMagic.data(), kMagic.size());
  const std::uint32_t version = r.u32();
  if (version != Checkpoint::kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.spec_hash = r.u64();
  ck.iteration = r.u64();
  const std::uint32_t nmeta = r.u32();
  for (std::uint32_t i = 0; i < nmeta; ++i) {
    std::string k = r.str();
    ck.metadata[std::move(k)] = r.str();
  }
  const std::uint32_t narrays = r.u32();
  for (std::uint32_t i = 0; i < narrays; ++i) {
    NamedArray a;
    a.name = r.str();
    const std::uint32_t ndim = r.u32();
    if (ndim > 8) throw std::runtime_error("checkpoint: implausible rank for '" + a.name + "'");
    std::size_t expected = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      a.shape.push_back(static_cast<int>(r.u32()));
      expected *= static_cast<std::size_t>(a.shape.back());
    }
    const std::uint64_t count = r.u64();
    if (count != expected || count * 4 > r.remaining()) throw std::runtime_error("checkpoint: corrupt array '" + a.name + "'");
    a.values.resize(count);
    for (float& v : a.values) v = r.f32();
    ck.arrays.push_back(std::move(a));
  }
  if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes in " + path.string());
  return ck;
}

}  // namespace fingergan::checkpoint

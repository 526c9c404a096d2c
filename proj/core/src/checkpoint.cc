// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dccrgan/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace dccrgan {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

template <typename U>
void put_int(std::vector<unsigned char>& out, U v) {
  unsigned char b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  out.insert(out.end(), b, b + sizeof(U));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& b) : b_(b) {}

  template <typename U>
  U get(const char* what) {
    U v;
    std::memcpy(&v, take(sizeof(U), what), sizeof(U));
    return v;
  }
  const unsigned char* take(std::size_t n, const char* what) {
    if (b_.size() - pos_ < n) {
      throw ParseError(std::string("checkpoint: truncated while reading ") + what + " at byte " +
                       std::to_string(pos_));
    }
    const unsigned char* p = b_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const std::vector<unsigned char>& b_;
  std::size_t pos_ = 0;
};

std::size_t dtype_size(Checkpoint::Dtype d) { return d == Checkpoint::Dtype::f32 ? 4 : 8; }

}  // namespace

template <typename T>
void Checkpoint::put(const std::string& name, const Tensor<T>& t) {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  if (name.size() > 0xFFFF) throw ContractError("checkpoint: tensor name too long");
  Entry e{name, std::is_same_v<T, float> ? Dtype::f32 : Dtype::f64, t.shape(), {}};
  e.bytes.resize(t.numel() * sizeof(T));
  std::memcpy(e.bytes.data(), t.ptr(), e.bytes.size());
  for (auto& existing : entries_) {
    if (existing.name == name) {
      existing = std::move(e);
      return;
    }
  }
  entries_.push_back(std::move(e));
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

const Checkpoint::Entry& Checkpoint::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e;
  }
  throw IoError("checkpoint: no tensor named '" + name + "'");
}

template <typename T>
Tensor<T> Checkpoint::get(const std::string& name) const {
  const Entry& e = find(name);
  Tensor<T> t(e.shape);
  if (e.dtype == Dtype::f32) {
    const float* src = reinterpret_cast<const float*>(e.bytes.data());
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(src[i]);
  } else {
    const double* src = reinterpret_cast<const double*>(e.bytes.data());
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(src[i]);
  }
  return t;
}

std::vector<unsigned char> Checkpoint::serialize() const {
  std::vector<unsigned char> out{'D', 'C', 'R', 'G'};
  put_int<std::uint32_t>(out, kVersion);
  put_int<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& e : entries_) {
    put_int<std::uint16_t>(out, static_cast<std::uint16_t>(e.name.size()));
    out.insert(out.end(), e.name.begin(), e.name.end());
    put_int<std::uint8_t>(out, static_cast<std::uint8_t>(e.dtype));
    put_int<std::uint8_t>(out, static_cast<std::uint8_t>(e.shape.size()));
    for (std::size_t d : e.shape) put_int<std::uint64_t>(out, d);
    out.insert(out.end(), e.bytes.begin(), e.bytes.end());
  }
  return out;
}

Checkpoint Checkpoint::parse(const std::vector<unsigned char>& bytes) {
  Reader r(bytes);
  const unsigned char* magic = r.take(4, "magic");
  if (std::memcmp(magic, "DCRG", 4) != 0) throw ParseError("checkpoint: bad magic (not a DCRG file)");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>("tensor count");
  Checkpoint ck;
  for (std::uint32_t i = 0; i < count; ++i) {
    Entry e;
    const auto len = r.get<std::uint16_t>("name length");
    const unsigned char* name = r.take(len, "name");
    e.name.assign(reinterpret_cast<const char*>(name), len);
    const auto dtype = r.get<std::uint8_t>("dtype");
    if (dtype > 1) {
      throw ParseError("checkpoint: tensor '" + e.name + "' has unknown dtype " +
                       std::to_string(dtype));
    }
    e.dtype = static_cast<Dtype>(dtype);
    const auto rank = r.get<std::uint8_t>("rank");
    std::size_t numel = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      const auto dim = r.get<std::uint64_t>("dims");
      if (dim == 0 || dim > (std::uint64_t{1} << 40)) {
        throw ParseError("checkpoint: tensor '" + e.name + "' has invalid dimension " +
                         std::to_string(dim));
      }
      e.shape.push_back(static_cast<std::size_t>(dim));
      numel *= static_cast<std::size_t>(dim);
      if (numel > (std::size_t{1} << 40)) throw ParseError("checkpoint: tensor '" + e.name + "' too large");
    }
    const std::size_t n = numel * dtype_size(e.dtype);
    const unsigned char* data = r.take(n, "values");
    e.bytes.assign(data, data + n);
    ck.entries_.push_back(std::move(e));
  }
  if (!r.done()) throw ParseError("checkpoint: trailing bytes after last tensor");
  return ck;
}

void Checkpoint::write(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("checkpoint: cannot open " + tmp.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("checkpoint: write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("checkpoint: cannot move " + tmp.string() + " to " + path.string() + ": " +
                        ec.message());
}

Checkpoint Checkpoint::read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  return parse(bytes);
}

template void Checkpoint::put(const std::string&, const Tensor<float>&);
template void Checkpoint::put(const std::string&, const Tensor<double>&);
template Tensor<float> Checkpoint::get(const std::string&) const;
template Tensor<double> Checkpoint::get(const std::string&) const;

}  // namespace dccrgan

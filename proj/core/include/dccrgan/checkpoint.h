// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_CHECKPOINT_H_
#define DCCRGAN_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dccrgan/tensor.h"

namespace dccrgan {

/// Named tensor bundle in the "DCRG" container:
///
///   "DCRG" | u32 version (1) | u32 count | count x record
///   record = u16 name length | UTF-8 name | u8 dtype | u8 rank | rank x u64 dim | values
///
/// All integers and values are little-endian. dtype 0 is f32; 1 is f64
/// (used for 64-bit models). Records keep their raw bytes, so parse() followed
/// by serialize() reproduces the input exactly.
class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;
  enum class Dtype : std::uint8_t { f32 = 0, f64 = 1 };

  struct Entry {
    std::string name;
    Dtype dtype;
    Shape shape;
    std::vector<unsigned char> bytes;
  };

  template <typename T>
  void put(const std::string& name, const Tensor<T>& t);

  bool contains(const std::string& name) const;
  /// Converts to T if needed; IoError if the name is missing.
  template <typename T>
  Tensor<T> get(const std::string& name) const;

  const std::vector<Entry>& entries() const { return entries_; }

  std::vector<unsigned char> serialize() const;
  /// ParseError on malformed input.
  static Checkpoint parse(const std::vector<unsigned char>& bytes);

  /// Writes to a temporary sibling and renames it into place.
  void write(const std::filesystem::path& path) const;
  static Checkpoint read(const std::filesystem::path& path);

 private:
  const Entry& find(const std::string& name) const;
  std::vector<Entry> entries_;
};

}  // namespace dccrgan

#endif  // DCCRGAN_CHECKPOINT_H_

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_ERROR_H_
#define DCCRGAN_ERROR_H_

#include <stdexcept>
#include <string>

namespace dccrgan {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or channel counts that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Sequence or signal too short for the requested operation.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, or a numeric routine that cannot proceed.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an API precondition (wrong mode, non-scalar loss, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Slice layout inconsistent with the utterance it claims to cover.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Input is structurally valid but carries no usable signal.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (WAV, checkpoint, manifest).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dccrgan

#endif  // DCCRGAN_ERROR_H_

// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DCCRGAN_VERIFY_H_
#define DCCRGAN_VERIFY_H_

#include <functional>
#include <string>
#include <vector>

#include "dccrgan/autodiff.h"

namespace dccrgan {

struct CheckResult {
  std::string module;
  std::string name;
  double value = 0;      // relative error, or the checked quantity
  double threshold = 0;
  bool passed = false;
};

inline constexpr double kGradTolerance = 1e-4;

/// Backward() gradients of `loss` with respect to `wrt` against central
/// differences (h = 1e-5). Tensors with more than `max_coords` entries are
/// probed on an evenly spaced subset. The error is relative over all probed
/// coordinates together.
CheckResult gradient_check(const std::string& module, const std::string& name,
                           const std::function<Var<double>()>& loss,
                           const std::vector<Var<double>>& wrt, std::size_t max_coords = 48);

/// Modules of the finite-difference suite.
const std::vector<std::string>& gradcheck_modules();

/// Runs the suite for one module, or every module when `module` is empty.
/// ConfigError for an unknown module name.
std::vector<CheckResult> run_gradcheck_suite(const std::string& module = "");

/// Oracle-mask reconstruction, STFT and slicing round-trips, loss identities.
std::vector<CheckResult> run_selftest();

/// "PASS|FAIL  module/name  value (threshold)" per line.
std::string format_check(const CheckResult& r);

}  // namespace dccrgan

#endif  // DCCRGAN_VERIFY_H_

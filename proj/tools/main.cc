// Copyright 2026 The dccrgan Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cli.h"

int main(int argc, char** argv) {
  return dccrgan::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}

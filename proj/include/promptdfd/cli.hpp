// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dfd {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitValidation = 3,
  kExitPrerequisite = 4,
};

/// Entry point of the `promptdfd` tool. Progress goes to `out`; on failure
/// a one-line JSON error record goes to `err` and a nonzero code is returned.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dfd

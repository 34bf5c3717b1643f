// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dfd {

/// Bad argument or violated precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// KL(p || q) with p_i > 0 where q_i = 0.
class DivergenceUndefined : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Cross-entropy against a zero-probability label.
class InfiniteLoss : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A loss, reward or gradient became NaN/Inf during training.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config or checkpoint failed schema validation. `path()` names the
/// offending key, e.g. "kd.alpha".
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// A CLI stage was invoked before the stage that produces its inputs.
class PrerequisiteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dfd

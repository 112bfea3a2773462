// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mixadc {

/// A numerical routine failed to converge or met a singular matrix.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Monte Carlo kernel threw; carries the index of the first failing trial.
class TrialFailure : public std::runtime_error {
 public:
  TrialFailure(std::uint64_t trial, const std::string& what)
      : std::runtime_error("trial " + std::to_string(trial) + ": " + what), trial_(trial) {}

  std::uint64_t trial() const noexcept { return trial_; }

 private:
  std::uint64_t trial_;
};

}  // namespace mixadc

// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mixadc/random.hpp"

namespace mixadc {

/// Trial t of a plan draws from RandomStream(seed, t), so results never depend
/// on which worker ran it.
struct TrialPlan {
  std::uint64_t seed = 1;
  std::uint64_t trials = 1000;
  int workers = 0;  ///< 0 = hardware concurrency
};

/// Running count, mean and sum of squared deviations of a vector sample.
struct Moments {
  std::uint64_t count = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;

  explicit Moments(Eigen::Index dimension = 0);
  void add(const Eigen::VectorXd& x);
  /// Pairwise combination; exact in real arithmetic, deterministic in floating point.
  static Moments merge(const Moments& a, const Moments& b);
};

struct TrialSummary {
  std::uint64_t trials = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;   ///< unbiased sample variance per component
  Eigen::VectorXd std_error;  ///< standard error of each mean
  std::vector<Moments> batches;  ///< contiguous trial-index batches, for jackknife errors
};

/// Fills `out` (pre-sized to the record dimension) for trial `index`.
using TrialKernel = std::function<void(std::uint64_t index, RandomStream& rng, Eigen::Ref<Eigen::VectorXd> out)>;

/// Runs the kernel for every trial index and aggregates the records.
/// The aggregate is bitwise identical for any worker count. A throwing
/// kernel aborts the run with TrialFailure naming the lowest failing index.
TrialSummary run_trials(const TrialPlan& plan, Eigen::Index dimension, const TrialKernel& kernel);

/// Delete-one-batch jackknife standard error of statistic(mean).
double jackknife_std_error(const TrialSummary& summary,
                           const std::function<double(const Eigen::VectorXd&)>& statistic);

}  // namespace mixadc

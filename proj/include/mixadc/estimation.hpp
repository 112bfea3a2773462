// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mixadc/random.hpp"
#include "mixadc/sysmodel.hpp"

namespace mixadc {

enum class TrainingScheme {
  kOneBitOnly,      ///< every antenna behind a one-bit ADC, eta pilot symbols
  kFullResRR,       ///< round robin, high-resolution samples only
  kJointRR,         ///< round robin, high-resolution plus one-bit samples
  kNonRoundRobin,   ///< fixed assignment: last N antennas high-resolution, the rest one-bit
};

const char* to_string(TrainingScheme scheme) noexcept;

/// Training symbols consumed by `scheme`: eta, or (M/N) eta for round robin.
int training_length(const SystemConfig& config, TrainingScheme scheme);

/// Pilot-phase observations of one coherence interval.
///
/// Round robin runs M/N sub-intervals. Antenna group j (rows jN .. jN+N-1) is
/// on the high-resolution ADCs in sub-interval j; its row of `x` comes from
/// that sub-interval. For JOINT_RR, `ybank[t-1]` holds for every antenna the
/// one-bit samples from sub-interval (j + t) mod (M/N), t = 1 .. M/N-1.
struct TrainingObservations {
  TrainingScheme scheme = TrainingScheme::kJointRR;
  Eigen::MatrixXcd x;                   ///< M x eta unquantized rows (zero rows where absent)
  std::vector<Eigen::MatrixXcd> ybank;  ///< one-bit matrices, M x eta each
  std::vector<int> x_interval;          ///< sub-interval of each row of x (-1 when absent)
  std::vector<std::vector<int>> y_interval;  ///< y_interval[t][m]: sub-interval of row m of ybank[t]
};

/// Draws fresh noise for every sub-interval and records the observations the
/// given scheme collects. Throws std::invalid_argument when the training does
/// not fit in the coherence interval.
TrainingObservations simulate_round_robin(const ChannelMatrix& channel, const SystemConfig& config,
                                          const PilotMatrix& pilots, TrainingScheme scheme, RandomStream& rng);

/// Channel estimate with its closed-form per-user variances.
/// `ghat` is empty when only the closed forms were requested.
struct EstimationResult {
  Eigen::MatrixXcd ghat;        ///< M x K
  Eigen::VectorXd var_est;      ///< sigma_ghat^2 per user
  Eigen::VectorXd var_err;      ///< sigma_eps^2 per user
  Eigen::VectorXd sigma_hhat2;  ///< var_est / beta
  int eta_eff = 0;
};

/// Closed-form variances of the one-bit LMMSE estimator (eta_eff = eta).
EstimationResult onebit_variances(const SystemConfig& config, const PilotMatrix& pilots);
/// Closed-form variances of the round-robin estimator using high-resolution samples only.
EstimationResult fullres_variances(const SystemConfig& config, const PilotMatrix& pilots);
/// Closed-form variances of the joint round-robin estimator. `ignore_correlation`
/// sets rho = 0 (the additive-noise-model prediction).
EstimationResult joint_variances(const SystemConfig& config, const PilotMatrix& pilots,
                                 bool ignore_correlation = false);

/// One-bit LMMSE estimate from an M x eta one-bit observation matrix.
EstimationResult estimate_onebit(const Eigen::MatrixXcd& y, const SystemConfig& config, const PilotMatrix& pilots);
/// Round-robin estimate from the high-resolution rows (ignores `ybank`).
EstimationResult estimate_fullres_rr(const TrainingObservations& obs, const SystemConfig& config,
                                     const PilotMatrix& pilots);

/// Weights of the joint high-resolution/one-bit LMMSE estimator, per user.
struct JointWeights {
  Eigen::VectorXd w_inf;     ///< weight on the high-resolution statistic
  Eigen::VectorXd w_one;     ///< weight on each one-bit statistic
  Eigen::VectorXd varsigma;  ///< information contributed by the one-bit blocks
  Eigen::VectorXd rho;       ///< covariance between one-bit statistics of distinct sub-intervals
  Eigen::VectorXd sigma_w2;  ///< variance of one one-bit statistic's disturbance
};

JointWeights joint_weights(const SystemConfig& config, const PilotMatrix& pilots, bool ignore_correlation = false);

EstimationResult estimate_joint(const TrainingObservations& obs, const SystemConfig& config,
                                const PilotMatrix& pilots);

/// Estimate for the fixed-assignment mixed array: the high-resolution rows use
/// the unquantized estimator and the one-bit rows the one-bit estimator.
struct NonRoundRobinEstimate {
  Eigen::MatrixXcd ghat;
  EstimationResult highres;
  EstimationResult onebit;
  std::vector<int> highres_rows;
  int eta_eff = 0;
};

NonRoundRobinEstimate estimate_non_round_robin(const TrainingObservations& obs, const SystemConfig& config,
                                               const PilotMatrix& pilots);

/// Antennas with high-resolution ADCs under fixed assignment (the last N).
std::vector<int> fixed_highres_rows(const SystemConfig& config);

/// Closed-form joint-estimator varsigma under power control with eta = K and
/// a unitary pilot matrix, in the form
///   (M/N - 1) / ((pi/2) noise/(K p) + (pi/2 - 1)(M/N - 1)),
/// which treats one-bit statistics of distinct sub-intervals as if their
/// quantizer inputs were fully correlated. Agrees with joint_weights only as
/// SNR grows; kept for comparison.
double correlated_limit_varsigma(const SystemConfig& config);

}  // namespace mixadc

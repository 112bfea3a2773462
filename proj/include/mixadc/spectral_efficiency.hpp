// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mixadc/estimation.hpp"
#include "mixadc/montecarlo.hpp"
#include "mixadc/sysmodel.hpp"

namespace mixadc {

enum class Detector { kMrc, kZf };
/// Which antennas get the N high-resolution ADCs in the data phase.
enum class Selection {
  kFixed,     ///< the last N antennas, independent of the channel
  kGlobal,    ///< the N rows of the estimate with the largest energy
  kSubarray,  ///< the strongest row inside each contiguous group of M/N antennas
};
enum class SeMethod { kClosedForm, kMonteCarlo };

const char* to_string(Detector detector) noexcept;
const char* to_string(Selection selection) noexcept;
const char* to_string(SeMethod method) noexcept;

struct SeReport {
  Eigen::VectorXd sqinr;  ///< per user
  Eigen::VectorXd se;     ///< per user, bits/s/Hz
  double sum_se = 0.0;
  int eta_eff = 0;
  SeMethod method = SeMethod::kClosedForm;
  std::uint64_t trials = 0;
  // Monte Carlo only; zero for closed forms.
  Eigen::VectorXd sqinr_std_error;
  Eigen::VectorXd se_std_error;
  double sum_se_std_error = 0.0;
};

/// (1 - eta_eff/T) log2(1 + theta).
double rate_wrapper(double theta, double eta_eff, double T);

/// Builds a closed-form report from per-user SQINR values.
SeReport closed_form_report(const Eigen::VectorXd& sqinr, int eta_eff, int coherence);

/// Bussgang gain of a one-bit ADC under channel hardening, sqrt((2/pi)/(K p_d + noise)).
double bussgang_alpha(const SystemConfig& config);

/// MRC with the high-resolution ADCs on an arbitrary fixed set of antennas.
/// `sigma_hhat2` holds the per-user normalized estimate variance.
SeReport se_mrc_mixed(const SystemConfig& config, const Eigen::VectorXd& sigma_hhat2, int eta_eff);

/// Lower bound for MRC when the high-resolution ADCs follow the strongest estimated rows.
SeReport se_mrc_selection(const SystemConfig& config, const Eigen::VectorXd& sigma_hhat2, int eta_eff);

/// MRC with row-dependent estimate variance s(m,k) and gain-normalized
/// quantization-noise variance distortion(m) under channel hardening:
///   SQINR_k = p S_k^2 / (S_k (pK + noise) + sum_m distortion(m) s(m,k)),  S_k = sum_m s(m,k).
SeReport se_mrc_profile(const SystemConfig& config, const Eigen::MatrixXd& s, const Eigen::VectorXd& distortion,
                        int eta_eff);

/// ZF with every antenna unquantized: p (M-K) s / (pK (1-s) + noise).
SeReport se_zf_fullres(const SystemConfig& config, const Eigen::VectorXd& sigma_hhat2, int eta_eff);

/// Per-row normalized estimate variance (M x K) of the given training scheme.
/// Non-round-robin training gives the last N rows the unquantized variance.
Eigen::MatrixXd row_estimate_variance(const SystemConfig& config, TrainingScheme scheme);

/// Zero-based indices of the high-resolution antennas, ascending. Ties in row
/// energy go to the lower index.
std::vector<int> antenna_selection(const Eigen::MatrixXcd& hhat, int highres, Selection mode);

/// Data-phase Bussgang model y = A r + q_d of the received block.
struct DataPhaseModel {
  double alpha = 0.0;        ///< hardened one-bit gain
  double noise_power = 1.0;
  Eigen::VectorXd gain;      ///< diagonal of A
  Eigen::MatrixXcd cqd;      ///< quantization-noise covariance
  bool diagonal = true;      ///< cqd has no off-diagonal entries
  std::vector<int> highres_set;

  /// A^{-1} C_qd A^{-1}, the quantization noise referred to the antenna input.
  Eigen::MatrixXcd referred_distortion() const;
  /// noise I + A^{-1} C_qd A^{-1}.
  Eigen::MatrixXcd effective_noise() const;
};

/// Hardened model: every row sees power K p_d + noise. `highres_alpha0` < 1
/// models the high-resolution rows as multi-bit AQNM quantizers.
DataPhaseModel hardened_data_model(const SystemConfig& config, const std::vector<int>& highres_set,
                                   double highres_alpha0 = 1.0);

/// Model conditioned on the normalized channel `h`: one-bit rows use the
/// arcsine law of C_r = p_d h h^H + noise I with per-row gains.
DataPhaseModel exact_data_model(const SystemConfig& config, const std::vector<int>& highres_set,
                                const Eigen::MatrixXcd& h, double highres_alpha0 = 1.0);

/// C_neff^{-1} H (H^H C_neff^{-1} H)^{-1}. Throws NumericFailure if H is rank deficient.
Eigen::MatrixXcd zf_detector(const Eigen::MatrixXcd& hhat, const DataPhaseModel& model);

enum class EstimateSource {
  kSimulated,      ///< run the training scheme on every draw
  kPerfect,        ///< hhat = h
  kGaussianModel,  ///< hhat = s h + sqrt(s (1 - s)) z with s from `model_variance`
};

struct SqinrOptions {
  Detector detector = Detector::kMrc;
  Selection selection = Selection::kFixed;
  TrainingScheme scheme = TrainingScheme::kJointRR;
  EstimateSource source = EstimateSource::kSimulated;
  bool exact_cqd = false;        ///< evaluate quantization noise per draw from the arcsine law
  double highres_alpha0 = 1.0;   ///< AQNM gain of the high-resolution ADCs in the data phase
  Eigen::MatrixXd model_variance;  ///< M x K, kGaussianModel only; empty = row_estimate_variance
  TrialPlan plan;
};

/// Monte Carlo SQINR from its expectation terms
///   p |E w^H h_k|^2 / (p sum_i E|w^H h_i|^2 - p |E w^H h_k|^2 + noise E|w|^2 + E w^H A^{-1} C_qd A^{-1} w).
SeReport sqinr_empirical(const SystemConfig& config, const SqinrOptions& options);

/// Normalized estimate variance of b-bit AQNM training on every antenna.
double aqnm_estimate_variance(const SystemConfig& config, double alpha0);

/// All M antennas on b-bit ADCs, MRC, AQNM closed form.
SeReport se_uniform_mrc(const SystemConfig& config, int bits);

/// All M antennas on b-bit ADCs, ZF, with E{w^H C_0 w} by Monte Carlo.
SeReport se_uniform_zf(const SystemConfig& config, int bits, const TrialPlan& plan);

}  // namespace mixadc

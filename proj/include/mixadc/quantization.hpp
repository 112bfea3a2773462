// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mixadc/sysmodel.hpp"

namespace mixadc {

/// Element-wise one-bit quantizer: each entry maps to (+-1 +- j)/sqrt(2)
/// following the signs of its real and imaginary parts. A component that is
/// exactly zero maps to +1/sqrt(2).
Eigen::MatrixXcd one_bit_quantize(const Eigen::MatrixXcd& x);

/// True when every entry has real and imaginary parts of magnitude 1/sqrt(2).
bool is_one_bit(const Eigen::MatrixXcd& y, double tol = 1e-12);

/// Pilot-phase autocorrelation of one antenna's eta received samples,
/// C_x = sum_k eta p_k beta_k conj(phi_k) phi_k^T + noise_power I. Uses the
/// training power of `config`. With `include_noise == false` the noise term is
/// dropped, which is the covariance between two sub-intervals of round-robin
/// training (independent noise, common channel).
Eigen::MatrixXcd pilot_autocorrelation(const SystemConfig& config, const PilotMatrix& pilots,
                                       bool include_noise = true);

/// Quantization-noise covariance of the one-bit quantizer for a Gaussian
/// input with covariance `cx` (arcsine law, applied separately to real and
/// imaginary parts). Throws std::invalid_argument unless `cx` is Hermitian
/// positive definite.
Eigen::MatrixXcd arcsine_covariance(const Eigen::MatrixXcd& cx);

/// Cross covariance of the quantization noise of two one-bit quantizers whose
/// Gaussian inputs have cross covariance `cross` and per-entry input
/// variances `variance` (the diagonal used for normalization).
Eigen::MatrixXcd arcsine_cross_covariance(const Eigen::MatrixXcd& cross, const Eigen::VectorXd& variance);

/// Bussgang linearization Q(x^T) = x^T gain + q^T for a one-bit quantizer.
struct BussgangModel {
  Eigen::VectorXd dx;    ///< diag(C_x)
  Eigen::VectorXd gain;  ///< sqrt(2/pi) dx^{-1/2}
  Eigen::MatrixXcd cq;   ///< quantization-noise covariance
};

BussgangModel bussgang_model(const Eigen::MatrixXcd& cx);

/// Scalar Lloyd-Max quantizer for a unit-variance Gaussian.
struct LloydMaxQuantizer {
  std::vector<double> thresholds;  ///< 2^b - 1 decision boundaries, ascending
  std::vector<double> levels;      ///< 2^b reconstruction points, ascending
  double distortion = 0.0;         ///< mean squared error
  int iterations = 0;
};

LloydMaxQuantizer lloyd_max_gaussian(int bits);

/// Additive quantization noise model gain of a b-bit ADC.
struct AqnmGain {
  int bits = 1;
  double alpha0 = 0.0;  ///< 1 - Lloyd-Max distortion
};

/// Requires 1 <= bits <= 12.
AqnmGain aqnm_alpha(int bits);

}  // namespace mixadc

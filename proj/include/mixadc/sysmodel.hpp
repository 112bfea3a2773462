// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixadc/random.hpp"

namespace mixadc {

/// Scalar parameters of a single-cell uplink with a mixed-ADC base station.
///
/// `highres == 0` describes an all one-bit array. Powers are linear and are
/// the per-user received powers after statistics-aware power control, so the
/// transmit power of user k in a given phase is `power / beta[k]`.
struct SystemConfig {
  int antennas = 100;     ///< M
  int highres = 20;       ///< N high-resolution ADC pairs
  int users = 10;         ///< K
  int coherence = 400;    ///< T, symbols per coherence interval
  int pilot_length = 10;  ///< eta, K <= eta <= T
  double snr_db = 0.0;    ///< P_ave / noise_power in dB
  double noise_power = 1.0;
  double power = 1.0;        ///< P_ave
  std::vector<double> beta;  ///< large-scale gains, length K
  double train_power = 1.0;  ///< p_t
  double data_power = 1.0;   ///< p_d

  /// M/N round-robin sub-intervals (1 when every antenna has a high-resolution ADC, 0 for all one-bit).
  int rounds() const noexcept { return highres > 0 ? antennas / highres : 0; }
  /// Builds a validated configuration with beta = 1 and p = p_t = p_d = noise_power * 10^(snr/10).
  static SystemConfig make(int antennas, int highres, int users, int coherence, int pilot_length, double snr_db);

  /// Throws std::invalid_argument when any structural invariant fails.
  void validate() const;

  /// Copy with P_ave, p_t and p_d all reset from the given SNR.
  SystemConfig with_snr_db(double snr) const;
  SystemConfig with_powers(double p_train, double p_data) const;
};

/// Reads a JSON object whose keys mirror the SystemConfig fields (M, N, K, T,
/// eta, sigma_n2, p, beta, p_t, p_d). Keys ending in `_db` are converted from
/// dB; `snr_db` sets p, p_t and p_d unless those are given explicitly.
SystemConfig config_from_json(const std::string& text);
SystemConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const SystemConfig& config);

/// eta x K pilot matrix with orthonormal columns.
struct PilotMatrix {
  Eigen::MatrixXcd phi;

  int length() const noexcept { return static_cast<int>(phi.rows()); }
  int users() const noexcept { return static_cast<int>(phi.cols()); }
};

/// Fast fading `h` (i.i.d. CN(0,1)) and the scaled channel g_k = sqrt(beta_k) h_k.
struct ChannelMatrix {
  Eigen::MatrixXcd h;
  Eigen::MatrixXcd g;
};

/// First K columns of the unitary eta-point DFT matrix.
PilotMatrix generate_pilots(int eta, int users);

ChannelMatrix draw_channel(const SystemConfig& config, RandomStream& rng);

/// Statistics-aware power control: p_k = p / beta_k.
std::vector<double> power_control(const std::vector<double>& beta, double p);

double db_to_linear(double db) noexcept;

}  // namespace mixadc

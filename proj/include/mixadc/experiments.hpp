// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mixadc/estimation.hpp"
#include "mixadc/spectral_efficiency.hpp"
#include "mixadc/sysmodel.hpp"

namespace mixadc {

enum class FigureId {
  kF4EstError,
  kF5Weights,
  kF6MrcAs,
  kF7ZfAs,
  kF8MrcSnr,
  kF9ZfSnr,
  kF10MrcT,
  kF11ZfT,
  kF12MrcComp,
  kF13ZfComp,
  kF14MrcN,
  kF15ZfN,
};

const char* to_string(FigureId id) noexcept;
/// Accepts "F4_EST_ERROR", "F4", "f4" or "4". Throws std::invalid_argument otherwise.
FigureId parse_figure_id(const std::string& text);
std::vector<FigureId> all_figures();

/// A receiver architecture together with its training scheme.
struct Architecture {
  std::string name;
  TrainingScheme training = TrainingScheme::kJointRR;
  Selection selection = Selection::kFixed;
  int antennas = 0;             ///< 0 keeps the configuration's M
  int highres = -1;             ///< -1 keeps the configuration's N
  int uniform_bits = 0;         ///< > 0: every antenna on a b-bit ADC (AQNM)
  double highres_alpha0 = 1.0;  ///< < 1: the high-resolution ADCs are multi-bit AQNM quantizers

  /// Known names: joint-as, joint-fixed, joint-subarray, fullres-fixed, non-rr, one-bit, uniform-<b>bit.
  static Architecture from_name(const std::string& name);
  SystemConfig apply(const SystemConfig& base) const;
};

struct PowerSplit {
  double fraction = 0.0;  ///< share of the interval's energy spent on training
  double train_power = 0.0;
  double data_power = 0.0;
  int eta_eff = 0;
  double sum_se = 0.0;    ///< objective value at the maximizer
};

/// Training and data powers for a fraction f of the energy P_ave T spent on training.
PowerSplit split_from_fraction(double fraction, double p_ave, int coherence, int eta_eff);

/// Closed-form sum SE used as the power-split objective. MRC uses the
/// analytic expressions; ZF uses p (M-K) s / (pK (1-s) + noise + d) with the
/// row-averaged estimate variance s and referred quantization noise d.
double closed_form_sum_se(const SystemConfig& config, const Architecture& arch, Detector detector);

/// Maximizes closed_form_sum_se over the training-energy fraction under
/// eta_eff p_t + (T - eta_eff) p_d = P_ave T, with P_ave = config.power.
PowerSplit optimize_power_split(const SystemConfig& config, const Architecture& arch, Detector detector);

struct EvalOptions {
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  int workers = 0;
  bool exact_cqd = false;
};

/// SE report of the architecture at the configuration's powers: closed form
/// where one exists, Monte Carlo otherwise.
SeReport evaluate_architecture(const SystemConfig& config, const Architecture& arch, Detector detector,
                               const EvalOptions& options);

struct FigureSpec {
  FigureId id = FigureId::kF4EstError;
  SystemConfig base;              ///< M, K, eta, noise; N, T and SNR are swept
  std::vector<double> snr_db;     ///< SNR grid or the SNR curve set
  std::vector<int> coherence;     ///< T grid or set
  std::vector<int> highres;       ///< N grid or set
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  int workers = 0;
  bool exact_cqd = false;
  bool power_opt = true;

  /// Grids and base parameters of the published figure.
  static FigureSpec defaults(FigureId id);
  void validate() const;
};

struct CsvRow {
  std::string figure;
  std::string curve;
  std::string x_name;
  double x_value = 0.0;
  double y_value = 0.0;
  std::optional<double> std_error;  ///< empty for closed forms
};

struct FigureResult {
  std::vector<CsvRow> rows;
  std::string meta_json;  ///< resolved configuration, seed and per-curve conventions
};

FigureResult run_figure(const FigureSpec& spec);

/// CSV text with header figure,curve,x_name,x_value,y_value,stderr.
std::string to_csv(const std::vector<CsvRow>& rows);
std::vector<CsvRow> parse_csv(const std::string& text);

/// Writes <dir>/<figure>.csv and <dir>/<figure>.meta.json; returns the CSV path.
std::filesystem::path write_figure(const FigureResult& result, FigureId id, const std::filesystem::path& dir);

}  // namespace mixadc

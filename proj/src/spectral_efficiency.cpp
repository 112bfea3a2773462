// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "mixadc/spectral_efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "mixadc/errors.hpp"
#include "mixadc/orderstats.hpp"
#include "mixadc/quantization.hpp"

namespace mixadc {
namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;
constexpr int kTerms = 5;  // Re a, Im a, interference, |w|^2, quantization

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double hardened_power(const SystemConfig& config) {
  return config.users * config.data_power + config.noise_power;
}

void check_variances(const SystemConfig& config, const Eigen::VectorXd& s) {
  if (s.size() != config.users) throw std::invalid_argument("estimate variances must have one entry per user");
  if ((s.array() <= 0.0).any() || (s.array() > 1.0 + 1e-12).any())
    throw std::invalid_argument("normalized estimate variances must lie in (0, 1]");
}

// Shared by the closed-form MRC expressions: sqinr = p M s / (pK + noise + extra).
SeReport mrc_with_distortion(const SystemConfig& config, const Eigen::VectorXd& s, int eta_eff, double extra) {
  check_variances(config, s);
  const double p = config.data_power;
  const Eigen::VectorXd sqinr = (p * config.antennas * s.array() / (p * config.users + config.noise_power + extra)).matrix();
  return closed_form_report(sqinr, eta_eff, config.coherence);
}

Eigen::VectorXd sqinr_from_terms(const Eigen::VectorXd& mean, int users, double p, double noise) {
  Eigen::VectorXd out(users);
  for (int k = 0; k < users; ++k) {
    const double* t = mean.data() + kTerms * k;
    const double gain2 = t[0] * t[0] + t[1] * t[1];
    out(k) = p * gain2 / (p * t[2] - p * gain2 + noise * t[3] + t[4]);
  }
  return out;
}

// Attaches jackknife errors for SQINR, SE and sum SE to a Monte Carlo report.
SeReport monte_carlo_report(const TrialSummary& summary, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& sqinr_of,
                            int users, int eta_eff, int coherence) {
  SeReport r = closed_form_report(sqinr_of(summary.mean), eta_eff, coherence);
  r.method = SeMethod::kMonteCarlo;
  r.trials = summary.trials;
  r.sqinr_std_error.resize(users);
  r.se_std_error.resize(users);
  for (int k = 0; k < users; ++k) {
    r.sqinr_std_error(k) = jackknife_std_error(summary, [&](const Eigen::VectorXd& m) { return sqinr_of(m)(k); });
    r.se_std_error(k) = jackknife_std_error(
        summary, [&](const Eigen::VectorXd& m) { return rate_wrapper(std::max(0.0, sqinr_of(m)(k)), eta_eff, coherence); });
  }
  r.sum_se_std_error = jackknife_std_error(summary, [&](const Eigen::VectorXd& m) {
    const Eigen::VectorXd q = sqinr_of(m);
    double sum = 0.0;
    for (int k = 0; k < users; ++k) sum += rate_wrapper(std::max(0.0, q(k)), eta_eff, coherence);
    return sum;
  });
  return r;
}

Eigen::MatrixXcd gaussian_model_estimate(const Eigen::MatrixXcd& h, const Eigen::MatrixXd& s, RandomStream& rng) {
  Eigen::MatrixXcd hhat(h.rows(), h.cols());
  for (Eigen::Index k = 0; k < h.cols(); ++k)
    for (Eigen::Index m = 0; m < h.rows(); ++m) {
      const double v = s(m, k);
      hhat(m, k) = v * h(m, k) + std::sqrt(v * (1.0 - v)) * rng.complex_normal();
    }
  return hhat;
}

Eigen::MatrixXcd simulated_estimate(const ChannelMatrix& channel, const SystemConfig& config, const PilotMatrix& pilots,
                                    TrainingScheme scheme, RandomStream& rng) {
  const TrainingObservations obs = simulate_round_robin(channel, config, pilots, scheme, rng);
  Eigen::MatrixXcd ghat;
  switch (scheme) {
    case TrainingScheme::kOneBitOnly: ghat = estimate_onebit(obs.ybank.front(), config, pilots).ghat; break;
    case TrainingScheme::kFullResRR: ghat = estimate_fullres_rr(obs, config, pilots).ghat; break;
    case TrainingScheme::kJointRR: ghat = estimate_joint(obs, config, pilots).ghat; break;
    case TrainingScheme::kNonRoundRobin: ghat = estimate_non_round_robin(obs, config, pilots).ghat; break;
  }
  Eigen::VectorXd inv_sqrt_beta(config.users);
  for (int k = 0; k < config.users; ++k) inv_sqrt_beta(k) = 1.0 / std::sqrt(config.beta[idx(k)]);
  return ghat * inv_sqrt_beta.asDiagonal();
}

std::vector<bool> highres_mask(int antennas, const std::vector<int>& set) {
  std::vector<bool> mask(idx(antennas), false);
  for (int m : set) {
    if (m < 0 || m >= antennas) throw std::invalid_argument("high-resolution index out of range");
    mask[idx(m)] = true;
  }
  return mask;
}

}  // namespace

const char* to_string(Detector detector) noexcept { return detector == Detector::kMrc ? "MRC" : "ZF"; }

const char* to_string(Selection selection) noexcept {
  switch (selection) {
    case Selection::kFixed: return "fixed";
    case Selection::kGlobal: return "global";
    case Selection::kSubarray: return "subarray";
  }
  return "unknown";
}

const char* to_string(SeMethod method) noexcept {
  return method == SeMethod::kClosedForm ? "CLOSED_FORM" : "MONTE_CARLO";
}

double rate_wrapper(double theta, double eta_eff, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("rate_wrapper: coherence interval must be positive");
  if (eta_eff < 0.0 || eta_eff > T) throw std::invalid_argument("rate_wrapper: need 0 <= eta_eff <= T");
  if (theta < 0.0) throw std::invalid_argument("rate_wrapper: SQINR must be nonnegative");
  return (1.0 - eta_eff / T) * std::log2(1.0 + theta);
}

SeReport closed_form_report(const Eigen::VectorXd& sqinr, int eta_eff, int coherence) {
  SeReport r;
  r.sqinr = sqinr;
  r.se.resize(sqinr.size());
  for (Eigen::Index k = 0; k < sqinr.size(); ++k) r.se(k) = rate_wrapper(std::max(0.0, sqinr(k)), eta_eff, coherence);
  r.sum_se = r.se.sum();
  r.eta_eff = eta_eff;
  r.sqinr_std_error = Eigen::VectorXd::Zero(sqinr.size());
  r.se_std_error = Eigen::VectorXd::Zero(sqinr.size());
  return r;
}

double bussgang_alpha(const SystemConfig& config) { return std::sqrt(kTwoOverPi / hardened_power(config)); }

SeReport se_mrc_mixed(const SystemConfig& config, const Eigen::VectorXd& sigma_hhat2, int eta_eff) {
  const double alpha = bussgang_alpha(config);
  const double onebit_fraction = 1.0 - static_cast<double>(config.highres) / config.antennas;
  return mrc_with_distortion(config, sigma_hhat2, eta_eff, (1.0 - kTwoOverPi) / (alpha * alpha) * onebit_fraction);
}

SeReport se_mrc_selection(const SystemConfig& config, const Eigen::VectorXd& sigma_hhat2, int eta_eff) {
  const double alpha = bussgang_alpha(config);
  const int m_ant = config.antennas;
  const double weak_share = chi_sum_lowest(m_ant - config.highres, m_ant, config.users) / (m_ant * config.users);
  return mrc_with_distortion(config, sigma_hhat2, eta_eff, (1.0 - kTwoOverPi) / (alpha * alpha) * weak_share);
}

SeReport se_mrc_profile(const SystemConfig& config, const Eigen::MatrixXd& s, const Eigen::VectorXd& distortion,
                        int eta_eff) {
  if (s.rows() != config.antennas || s.cols() != config.users || distortion.size() != config.antennas)
    throw std::invalid_argument("se_mrc_profile: profile dimensions do not match the configuration");
  const double p = config.data_power;
  Eigen::VectorXd sqinr(config.users);
  for (int k = 0; k < config.users; ++k) {
    const double s1 = s.col(k).sum();
    sqinr(k) = p * s1 * s1 / (s1 * (p * config.users + config.noise_power) + distortion.dot(s.col(k)));
  }
  return closed_form_report(sqinr, eta_eff, config.coherence);
}

SeReport se_zf_fullres(const SystemConfig& config, const Eigen::VectorXd& sigma_hhat2, int eta_eff) {
  check_variances(config, sigma_hhat2);
  if (config.antennas <= config.users) throw std::invalid_argument("se_zf_fullres: need M > K");
  const double p = config.data_power;
  const Eigen::VectorXd sqinr =
      (p * (config.antennas - config.users) * sigma_hhat2.array() /
       (p * config.users * (1.0 - sigma_hhat2.array()) + config.noise_power))
          .matrix();
  return closed_form_report(sqinr, eta_eff, config.coherence);
}

Eigen::MatrixXd row_estimate_variance(const SystemConfig& config, TrainingScheme scheme) {
  const PilotMatrix pilots = generate_pilots(config.pilot_length, config.users);
  Eigen::MatrixXd s(config.antennas, config.users);
  switch (scheme) {
    case TrainingScheme::kOneBitOnly: s.rowwise() = onebit_variances(config, pilots).sigma_hhat2.transpose(); break;
    case TrainingScheme::kFullResRR: s.rowwise() = fullres_variances(config, pilots).sigma_hhat2.transpose(); break;
    case TrainingScheme::kJointRR: s.rowwise() = joint_variances(config, pilots).sigma_hhat2.transpose(); break;
    case TrainingScheme::kNonRoundRobin: {
      const PilotMatrix p = pilots;
      const int first_hr = config.antennas - config.highres;
      // Unquantized rows see a single pilot block, so their variance equals the M = N case.
      SystemConfig single = config;
      single.highres = config.antennas;
      const Eigen::VectorXd hr = fullres_variances(single, p).sigma_hhat2;
      const Eigen::VectorXd ob = onebit_variances(config, p).sigma_hhat2;
      for (int m = 0; m < config.antennas; ++m) s.row(m) = (m >= first_hr ? hr : ob).transpose();
      break;
    }
  }
  return s;
}

std::vector<int> antenna_selection(const Eigen::MatrixXcd& hhat, int highres, Selection mode) {
  const int m_ant = static_cast<int>(hhat.rows());
  if (highres < 0 || highres > m_ant) throw std::invalid_argument("antenna_selection: need 0 <= N <= M");
  std::vector<int> chosen;
  if (highres == 0) return chosen;
  const Eigen::VectorXd energy = hhat.rowwise().squaredNorm();
  switch (mode) {
    case Selection::kFixed:
      for (int m = m_ant - highres; m < m_ant; ++m) chosen.push_back(m);
      break;
    case Selection::kGlobal: {
      std::vector<int> order(idx(m_ant));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return energy(a) > energy(b); });
      chosen.assign(order.begin(), order.begin() + highres);
      std::sort(chosen.begin(), chosen.end());
      break;
    }
    case Selection::kSubarray: {
      if (m_ant % highres != 0) throw std::invalid_argument("antenna_selection: subarrays need N to divide M");
      const int group = m_ant / highres;
      for (int j = 0; j < highres; ++j) {
        int best = j * group;
        for (int m = best + 1; m < (j + 1) * group; ++m)
          if (energy(m) > energy(best)) best = m;
        chosen.push_back(best);
      }
      break;
    }
  }
  return chosen;
}

Eigen::MatrixXcd DataPhaseModel::referred_distortion() const {
  const Eigen::VectorXd inv = gain.cwiseInverse();
  return inv.asDiagonal() * cqd * inv.asDiagonal();
}

Eigen::MatrixXcd DataPhaseModel::effective_noise() const {
  Eigen::MatrixXcd c = referred_distortion();
  c.diagonal().array() += noise_power;
  return c;
}

DataPhaseModel hardened_data_model(const SystemConfig& config, const std::vector<int>& highres_set,
                                   double highres_alpha0) {
  if (!(highres_alpha0 > 0.0 && highres_alpha0 <= 1.0))
    throw std::invalid_argument("hardened_data_model: alpha0 must lie in (0, 1]");
  const int m_ant = config.antennas;
  const auto mask = highres_mask(m_ant, highres_set);
  const double power = hardened_power(config);
  DataPhaseModel model;
  model.alpha = bussgang_alpha(config);
  model.noise_power = config.noise_power;
  model.highres_set = highres_set;
  model.gain.resize(m_ant);
  model.cqd = Eigen::MatrixXcd::Zero(m_ant, m_ant);
  for (int m = 0; m < m_ant; ++m) {
    if (mask[idx(m)]) {
      model.gain(m) = highres_alpha0;
      model.cqd(m, m) = highres_alpha0 * (1.0 - highres_alpha0) * power;
    } else {
      model.gain(m) = model.alpha;
      model.cqd(m, m) = 1.0 - kTwoOverPi;
    }
  }
  return model;
}

DataPhaseModel exact_data_model(const SystemConfig& config, const std::vector<int>& highres_set,
                                const Eigen::MatrixXcd& h, double highres_alpha0) {
  if (h.rows() != config.antennas || h.cols() != config.users)
    throw std::invalid_argument("exact_data_model: channel dimensions do not match the configuration");
  DataPhaseModel model = hardened_data_model(config, highres_set, highres_alpha0);
  const auto mask = highres_mask(config.antennas, highres_set);
  Eigen::MatrixXcd cr = config.data_power * h * h.adjoint();
  cr.diagonal().array() += config.noise_power;

  std::vector<int> onebit;
  for (int m = 0; m < config.antennas; ++m) {
    if (mask[idx(m)]) {
      const double d = cr(m, m).real();
      model.cqd(m, m) = highres_alpha0 * (1.0 - highres_alpha0) * d;
    } else {
      onebit.push_back(m);
    }
  }
  if (!onebit.empty()) {
    const Eigen::Index n = static_cast<Eigen::Index>(onebit.size());
    Eigen::MatrixXcd sub(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = cr(onebit[idx(static_cast<int>(i))], onebit[idx(static_cast<int>(j))]);
    const Eigen::MatrixXcd cq = arcsine_covariance(sub);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int row = onebit[idx(static_cast<int>(i))];
      model.gain(row) = std::sqrt(kTwoOverPi / sub(i, i).real());
      for (Eigen::Index j = 0; j < n; ++j) model.cqd(row, onebit[idx(static_cast<int>(j))]) = cq(i, j);
    }
    model.diagonal = false;
  }
  return model;
}

Eigen::MatrixXcd zf_detector(const Eigen::MatrixXcd& hhat, const DataPhaseModel& model) {
  if (hhat.rows() != model.gain.size()) throw std::invalid_argument("zf_detector: estimate and model sizes differ");
  if (hhat.cols() > hhat.rows()) throw NumericFailure("zf_detector: more users than antennas");
  Eigen::MatrixXcd weighted;
  if (model.diagonal) {
    const Eigen::VectorXd c = model.effective_noise().diagonal().real();
    weighted = c.cwiseInverse().asDiagonal() * hhat;
  } else {
    weighted = model.effective_noise().ldlt().solve(hhat);
  }
  const Eigen::MatrixXcd gram = hhat.adjoint() * weighted;
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
  const Eigen::VectorXd d = ldlt.vectorD().real();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(dmax > 0.0) || d.minCoeff() <= 1e-12 * dmax)
    throw NumericFailure("zf_detector: channel estimate is rank deficient");
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(gram.rows(), gram.cols());
  return weighted * ldlt.solve(eye);
}

SeReport sqinr_empirical(const SystemConfig& config, const SqinrOptions& options) {
  config.validate();
  if (options.plan.trials < 100) throw std::invalid_argument("sqinr_empirical: need at least 100 trials");
  const int users = config.users;
  const int eta_eff = training_length(config, options.scheme);
  if (options.scheme != TrainingScheme::kOneBitOnly && options.scheme != TrainingScheme::kNonRoundRobin &&
      config.highres == 0)
    throw std::invalid_argument("sqinr_empirical: round-robin training needs N > 0");
  const PilotMatrix pilots = generate_pilots(config.pilot_length, users);
  Eigen::MatrixXd model_variance;
  if (options.source == EstimateSource::kGaussianModel) {
    model_variance = options.model_variance.size() ? options.model_variance
                                                   : row_estimate_variance(config, options.scheme);
    if (model_variance.rows() != config.antennas || model_variance.cols() != users)
      throw std::invalid_argument("sqinr_empirical: model variance must be M x K");
  }
  const double p = config.data_power;
  const double noise = config.noise_power;

  auto kernel = [&](std::uint64_t, RandomStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
    const ChannelMatrix channel = draw_channel(config, rng);
    Eigen::MatrixXcd hhat;
    switch (options.source) {
      case EstimateSource::kPerfect: hhat = channel.h; break;
      case EstimateSource::kGaussianModel: hhat = gaussian_model_estimate(channel.h, model_variance, rng); break;
      case EstimateSource::kSimulated: hhat = simulated_estimate(channel, config, pilots, options.scheme, rng); break;
    }
    const auto chosen = antenna_selection(hhat, config.highres, options.selection);
    const DataPhaseModel design = hardened_data_model(config, chosen, options.highres_alpha0);
    const Eigen::MatrixXcd w =
        options.detector == Detector::kMrc ? hhat : zf_detector(hhat, design);
    const Eigen::MatrixXcd distortion = options.exact_cqd
                                            ? exact_data_model(config, chosen, channel.h, options.highres_alpha0).referred_distortion()
                                            : design.referred_distortion();
    const Eigen::MatrixXcd gains = w.adjoint() * channel.h;
    const Eigen::MatrixXcd dw = distortion * w;
    for (int k = 0; k < users; ++k) {
      out(kTerms * k + 0) = gains(k, k).real();
      out(kTerms * k + 1) = gains(k, k).imag();
      out(kTerms * k + 2) = gains.row(k).squaredNorm();
      out(kTerms * k + 3) = w.col(k).squaredNorm();
      out(kTerms * k + 4) = w.col(k).dot(dw.col(k)).real();
    }
  };

  const TrialSummary summary = run_trials(options.plan, kTerms * users, kernel);
  return monte_carlo_report(summary, [&](const Eigen::VectorXd& m) { return sqinr_from_terms(m, users, p, noise); },
                            users, eta_eff, config.coherence);
}

double aqnm_estimate_variance(const SystemConfig& config, double alpha0) {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw std::invalid_argument("aqnm_estimate_variance: alpha0 must lie in (0, 1]");
  const double a2 = alpha0 * alpha0;
  const double ep = config.pilot_length * config.train_power;
  const double sigma2 = config.noise_power;
  return a2 * ep / (a2 * ep + a2 * sigma2 + alpha0 * (1.0 - alpha0) * (config.train_power * config.users + sigma2));
}

SeReport se_uniform_mrc(const SystemConfig& config, int bits) {
  const double a0 = aqnm_alpha(bits).alpha0;
  const double s = aqnm_estimate_variance(config, a0);
  const double p = config.data_power;
  const double sigma2 = config.noise_power;
  const double sqinr = p * config.antennas * s /
                       (p * config.users + sigma2 + (1.0 - a0) / (a0 * a0) * (p * (s + config.users) + sigma2));
  return closed_form_report(Eigen::VectorXd::Constant(config.users, sqinr), config.pilot_length, config.coherence);
}

SeReport se_uniform_zf(const SystemConfig& config, int bits, const TrialPlan& plan) {
  config.validate();
  if (plan.trials < 100) throw std::invalid_argument("se_uniform_zf: need at least 100 trials");
  const int m_ant = config.antennas;
  const int users = config.users;
  if (m_ant <= users) throw std::invalid_argument("se_uniform_zf: need M > K");
  const double a0 = aqnm_alpha(bits).alpha0;
  const double s = aqnm_estimate_variance(config, a0);
  const double p = config.data_power;
  const double sigma2 = config.noise_power;
  const Eigen::MatrixXd variance = Eigen::MatrixXd::Constant(m_ant, users, s);

  auto kernel = [&](std::uint64_t, RandomStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
    const ChannelMatrix channel = draw_channel(config, rng);
    const Eigen::MatrixXcd hhat = gaussian_model_estimate(channel.h, variance, rng);
    DataPhaseModel plain;
    plain.gain = Eigen::VectorXd::Ones(m_ant);
    plain.cqd = Eigen::MatrixXcd::Zero(m_ant, m_ant);
    plain.noise_power = 1.0;
    const Eigen::MatrixXcd w = zf_detector(hhat, plain);
    // C_0 conditioned on the channel: alpha0 (1 - alpha0) diag(p |h_m|^2 + noise)
    const Eigen::VectorXd c0 = a0 * (1.0 - a0) * (p * channel.h.rowwise().squaredNorm().array() + sigma2).matrix();
    for (int k = 0; k < users; ++k) out(k) = w.col(k).cwiseAbs2().dot(c0);
  };
  const TrialSummary summary = run_trials(plan, users, kernel);
  auto sqinr_of = [&](const Eigen::VectorXd& m) {
    Eigen::VectorXd q(users);
    for (int k = 0; k < users; ++k)
      q(k) = p * (m_ant - users) * s /
             (p * users * (1.0 - s) + sigma2 + (m_ant - users) * s / (a0 * a0) * m(k));
    return q;
  };
  return monte_carlo_report(summary, sqinr_of, users, config.pilot_length, config.coherence);
}

}  // namespace mixadc

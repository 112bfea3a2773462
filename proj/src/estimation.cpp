// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "mixadc/estimation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mixadc/quantization.hpp"

namespace mixadc {
namespace {

constexpr double kPi = std::numbers::pi;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Per-user quantities shared by the one-bit and joint estimators.
struct OneBitTerms {
  Eigen::VectorXd dx;       // diag(C_x), quantizer input variances
  Eigen::MatrixXcd cq;      // within-interval quantization-noise covariance
  Eigen::MatrixXcd phibar;  // effective pilots sqrt(pi/2) D_x^{1/2} phi_k, column per user
  Eigen::VectorXd sigma_w2;
  std::vector<double> pk;   // per-user training transmit power
};

OneBitTerms onebit_terms(const SystemConfig& config, const PilotMatrix& pilots) {
  OneBitTerms terms;
  const Eigen::MatrixXcd cx = pilot_autocorrelation(config, pilots);
  terms.cq = arcsine_covariance(cx);
  terms.dx = cx.diagonal().real();
  terms.pk = power_control(config.beta, config.train_power);
  const int eta = pilots.length();
  const int users = pilots.users();
  terms.phibar = (std::sqrt(kPi / 2.0) * terms.dx.cwiseSqrt()).asDiagonal() * pilots.phi;
  terms.sigma_w2.resize(users);
  for (int k = 0; k < users; ++k) {
    const Eigen::VectorXcd pb = terms.phibar.col(k);
    const double quad = (pb.transpose() * terms.cq * pb.conjugate()).value().real();
    terms.sigma_w2(k) = (config.noise_power + quad) / (eta * terms.pk[idx(k)]);
  }
  return terms;
}

EstimationResult fullres_closed_form(const SystemConfig& config, const PilotMatrix& pilots, int eta_eff) {
  const int users = pilots.users();
  const int eta = pilots.length();
  const auto pk = power_control(config.beta, config.train_power);
  EstimationResult r;
  r.var_est.resize(users);
  r.var_err.resize(users);
  r.sigma_hhat2.resize(users);
  for (int k = 0; k < users; ++k) {
    const double beta = config.beta[idx(k)];
    const double snr = eta * pk[idx(k)] * beta / config.noise_power;
    r.var_est(k) = beta / (1.0 + 1.0 / snr);
    r.var_err(k) = beta / (1.0 + snr);
    r.sigma_hhat2(k) = r.var_est(k) / beta;
  }
  r.eta_eff = eta_eff;
  return r;
}

void check_dimensions(const SystemConfig& config, const PilotMatrix& pilots) {
  if (pilots.users() != config.users || pilots.length() != config.pilot_length)
    throw std::invalid_argument("pilot matrix does not match the configuration");
}

void require_round_robin(const SystemConfig& config) {
  if (config.highres <= 0) throw std::invalid_argument("round-robin training needs N > 0 high-resolution ADCs");
}

Eigen::MatrixXcd fullres_estimate(const Eigen::MatrixXcd& x, const SystemConfig& config,
                                  const PilotMatrix& pilots) {
  const int eta = pilots.length();
  const auto pk = power_control(config.beta, config.train_power);
  Eigen::MatrixXcd ghat(x.rows(), pilots.users());
  for (int k = 0; k < pilots.users(); ++k) {
    const double beta = config.beta[idx(k)];
    const double shrink = 1.0 / (1.0 + config.noise_power / (eta * pk[idx(k)] * beta));
    ghat.col(k) = shrink / std::sqrt(eta * pk[idx(k)]) * (x * pilots.phi.col(k).conjugate());
  }
  return ghat;
}

Eigen::MatrixXcd onebit_estimate(const Eigen::MatrixXcd& y, const SystemConfig& config, const PilotMatrix& pilots,
                                 const OneBitTerms& terms) {
  const int eta = pilots.length();
  Eigen::MatrixXcd ghat(y.rows(), pilots.users());
  for (int k = 0; k < pilots.users(); ++k) {
    const double beta = config.beta[idx(k)];
    const double shrink = beta / (beta + terms.sigma_w2(k));
    ghat.col(k) = shrink / std::sqrt(eta * terms.pk[idx(k)]) * (y * terms.phibar.col(k).conjugate());
  }
  return ghat;
}

}  // namespace

const char* to_string(TrainingScheme scheme) noexcept {
  switch (scheme) {
    case TrainingScheme::kOneBitOnly: return "one-bit";
    case TrainingScheme::kFullResRR: return "fullres-rr";
    case TrainingScheme::kJointRR: return "joint-rr";
    case TrainingScheme::kNonRoundRobin: return "non-rr";
  }
  return "unknown";
}

int training_length(const SystemConfig& config, TrainingScheme scheme) {
  switch (scheme) {
    case TrainingScheme::kOneBitOnly:
    case TrainingScheme::kNonRoundRobin: return config.pilot_length;
    case TrainingScheme::kFullResRR:
    case TrainingScheme::kJointRR: require_round_robin(config); return config.rounds() * config.pilot_length;
  }
  return config.pilot_length;
}

std::vector<int> fixed_highres_rows(const SystemConfig& config) {
  std::vector<int> rows;
  for (int m = config.antennas - config.highres; m < config.antennas; ++m) rows.push_back(m);
  return rows;
}

TrainingObservations simulate_round_robin(const ChannelMatrix& channel, const SystemConfig& config,
                                          const PilotMatrix& pilots, TrainingScheme scheme, RandomStream& rng) {
  check_dimensions(config, pilots);
  const int m_ant = config.antennas;
  const int eta = pilots.length();
  if (training_length(config, scheme) > config.coherence)
    throw std::invalid_argument("simulate_round_robin: training exceeds the coherence interval");

  const auto pk = power_control(config.beta, config.train_power);
  Eigen::VectorXd amplitude(pilots.users());
  for (int k = 0; k < pilots.users(); ++k) amplitude(k) = std::sqrt(eta * pk[idx(k)]);
  const Eigen::MatrixXcd signal = channel.g * amplitude.asDiagonal() * pilots.phi.transpose();

  auto noisy_rows = [&](Eigen::MatrixXcd& out, int first, int count) {
    for (int n = 0; n < eta; ++n)
      for (int r = first; r < first + count; ++r) out(r, n) = signal(r, n) + rng.complex_normal(config.noise_power);
  };

  TrainingObservations obs;
  obs.scheme = scheme;
  switch (scheme) {
    case TrainingScheme::kOneBitOnly: {
      Eigen::MatrixXcd received(m_ant, eta);
      noisy_rows(received, 0, m_ant);
      obs.ybank.push_back(one_bit_quantize(received));
      obs.x_interval.assign(idx(m_ant), -1);
      obs.y_interval.emplace_back(idx(m_ant), 0);
      break;
    }
    case TrainingScheme::kNonRoundRobin: {
      const int first_hr = m_ant - config.highres;
      Eigen::MatrixXcd received(m_ant, eta);
      noisy_rows(received, 0, m_ant);
      obs.x = Eigen::MatrixXcd::Zero(m_ant, eta);
      obs.x.bottomRows(config.highres) = received.bottomRows(config.highres);
      Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(m_ant, eta);
      y.topRows(first_hr) = one_bit_quantize(received.topRows(first_hr));
      obs.ybank.push_back(std::move(y));
      obs.x_interval.assign(idx(m_ant), -1);
      obs.y_interval.emplace_back(idx(m_ant), -1);
      for (int r = 0; r < m_ant; ++r) (r >= first_hr ? obs.x_interval[idx(r)] : obs.y_interval[0][idx(r)]) = 0;
      break;
    }
    case TrainingScheme::kFullResRR: {
      const int n_hr = config.highres;
      const int rounds = config.rounds();
      obs.x.resize(m_ant, eta);
      obs.x_interval.resize(idx(m_ant));
      for (int t = 0; t < rounds; ++t) {
        // only the connected group is observed in sub-interval t
        noisy_rows(obs.x, t * n_hr, n_hr);
        for (int r = t * n_hr; r < (t + 1) * n_hr; ++r) obs.x_interval[idx(r)] = t;
      }
      break;
    }
    case TrainingScheme::kJointRR: {
      const int n_hr = config.highres;
      const int rounds = config.rounds();
      obs.x.resize(m_ant, eta);
      obs.x_interval.resize(idx(m_ant));
      obs.ybank.assign(idx(rounds - 1), Eigen::MatrixXcd(m_ant, eta));
      obs.y_interval.assign(idx(rounds - 1), std::vector<int>(idx(m_ant)));
      Eigen::MatrixXcd received(m_ant, eta);
      for (int t = 0; t < rounds; ++t) {
        noisy_rows(received, 0, m_ant);
        const Eigen::MatrixXcd quantized = one_bit_quantize(received);
        for (int r = 0; r < m_ant; ++r) {
          const int group = r / n_hr;
          if (group == t) {
            obs.x.row(r) = received.row(r);
            obs.x_interval[idx(r)] = t;
          } else {
            const int slot = (t - group + rounds) % rounds;  // t = (group + slot) mod rounds
            obs.ybank[idx(slot - 1)].row(r) = quantized.row(r);
            obs.y_interval[idx(slot - 1)][idx(r)] = t;
          }
        }
      }
      break;
    }
  }
  return obs;
}

EstimationResult onebit_variances(const SystemConfig& config, const PilotMatrix& pilots) {
  check_dimensions(config, pilots);
  const OneBitTerms terms = onebit_terms(config, pilots);
  const int users = pilots.users();
  EstimationResult r;
  r.var_est.resize(users);
  r.var_err.resize(users);
  r.sigma_hhat2.resize(users);
  for (int k = 0; k < users; ++k) {
    const double beta = config.beta[idx(k)];
    const double sw2 = terms.sigma_w2(k);
    r.var_est(k) = beta * beta / (beta + sw2);
    r.var_err(k) = sw2 * beta / (beta + sw2);
    r.sigma_hhat2(k) = r.var_est(k) / beta;
  }
  r.eta_eff = config.pilot_length;
  return r;
}

EstimationResult fullres_variances(const SystemConfig& config, const PilotMatrix& pilots) {
  check_dimensions(config, pilots);
  return fullres_closed_form(config, pilots, training_length(config, TrainingScheme::kFullResRR));
}

JointWeights joint_weights(const SystemConfig& config, const PilotMatrix& pilots, bool ignore_correlation) {
  check_dimensions(config, pilots);
  require_round_robin(config);
  const int users = pilots.users();
  const int eta = pilots.length();
  const int rounds = config.rounds();
  const OneBitTerms terms = onebit_terms(config, pilots);

  JointWeights w;
  w.w_inf.resize(users);
  w.w_one.resize(users);
  w.varsigma.resize(users);
  w.rho.resize(users);
  w.sigma_w2 = terms.sigma_w2;

  Eigen::MatrixXcd cross_q;
  if (rounds > 1 && !ignore_correlation) {
    // Quantizer inputs of two sub-intervals share the channel but not the noise:
    // cross covariance is the noiseless C_x, each input still has variance diag(C_x).
    cross_q = arcsine_cross_covariance(pilot_autocorrelation(config, pilots, false), terms.dx);
  }

  for (int k = 0; k < users; ++k) {
    const double beta = config.beta[idx(k)];
    const double pk = terms.pk[idx(k)];
    const double fullres_info = eta * pk / config.noise_power;
    double rho = 0.0;
    double varsigma = 0.0;
    if (rounds > 1) {
      if (!ignore_correlation) {
        const Eigen::VectorXcd pb = terms.phibar.col(k);
        rho = (pb.transpose() * cross_q * pb.conjugate()).value().real() / (eta * pk);
      }
      varsigma = (rounds - 1) / (terms.sigma_w2(k) + (rounds - 2) * rho);
    }
    const double denom = 1.0 / beta + fullres_info + varsigma;
    w.rho(k) = rho;
    w.varsigma(k) = varsigma;
    w.w_inf(k) = fullres_info / denom;
    w.w_one(k) = rounds > 1 ? varsigma / (rounds - 1) / denom : 0.0;
  }
  return w;
}

EstimationResult joint_variances(const SystemConfig& config, const PilotMatrix& pilots, bool ignore_correlation) {
  const JointWeights w = joint_weights(config, pilots, ignore_correlation);
  const auto pk = power_control(config.beta, config.train_power);
  const int users = pilots.users();
  EstimationResult r;
  r.var_est.resize(users);
  r.var_err.resize(users);
  r.sigma_hhat2.resize(users);
  for (int k = 0; k < users; ++k) {
    const double beta = config.beta[idx(k)];
    const double info = pilots.length() * pk[idx(k)] / config.noise_power + w.varsigma(k);
    r.var_err(k) = 1.0 / (1.0 / beta + info);
    r.var_est(k) = info / (1.0 / beta + info) * beta;
    r.sigma_hhat2(k) = r.var_est(k) / beta;
  }
  r.eta_eff = training_length(config, TrainingScheme::kJointRR);
  return r;
}

EstimationResult estimate_onebit(const Eigen::MatrixXcd& y, const SystemConfig& config, const PilotMatrix& pilots) {
  check_dimensions(config, pilots);
  if (y.cols() != pilots.length()) throw std::invalid_argument("estimate_onebit: observation width must equal eta");
  if (!is_one_bit(y)) throw std::invalid_argument("estimate_onebit: observations must be one-bit (unit modulus)");
  const OneBitTerms terms = onebit_terms(config, pilots);
  EstimationResult r = onebit_variances(config, pilots);
  r.ghat = onebit_estimate(y, config, pilots, terms);
  return r;
}

EstimationResult estimate_fullres_rr(const TrainingObservations& obs, const SystemConfig& config,
                                     const PilotMatrix& pilots) {
  if (obs.scheme != TrainingScheme::kFullResRR && obs.scheme != TrainingScheme::kJointRR)
    throw std::invalid_argument("estimate_fullres_rr: observations are not from round-robin training");
  EstimationResult r = fullres_variances(config, pilots);
  r.ghat = fullres_estimate(obs.x, config, pilots);
  return r;
}

EstimationResult estimate_joint(const TrainingObservations& obs, const SystemConfig& config,
                                const PilotMatrix& pilots) {
  if (obs.scheme != TrainingScheme::kJointRR)
    throw std::invalid_argument("estimate_joint: observations are not from joint round-robin training");
  check_dimensions(config, pilots);
  const JointWeights w = joint_weights(config, pilots);
  const OneBitTerms terms = onebit_terms(config, pilots);
  const int eta = pilots.length();

  Eigen::MatrixXcd ysum = Eigen::MatrixXcd::Zero(obs.x.rows(), eta);
  for (const auto& y : obs.ybank) ysum += y;

  EstimationResult r = joint_variances(config, pilots);
  r.ghat.resize(obs.x.rows(), pilots.users());
  for (int k = 0; k < pilots.users(); ++k) {
    const double scale = 1.0 / std::sqrt(eta * terms.pk[idx(k)]);
    r.ghat.col(k) = scale * (w.w_inf(k) * (obs.x * pilots.phi.col(k).conjugate()) +
                             w.w_one(k) * (ysum * terms.phibar.col(k).conjugate()));
  }
  return r;
}

NonRoundRobinEstimate estimate_non_round_robin(const TrainingObservations& obs, const SystemConfig& config,
                                               const PilotMatrix& pilots) {
  if (obs.scheme != TrainingScheme::kNonRoundRobin)
    throw std::invalid_argument("estimate_non_round_robin: observations are not from fixed-assignment training");
  check_dimensions(config, pilots);
  const int n_hr = config.highres;
  const int n_ob = config.antennas - n_hr;

  NonRoundRobinEstimate est;
  est.highres_rows = fixed_highres_rows(config);
  est.eta_eff = config.pilot_length;
  est.highres = fullres_closed_form(config, pilots, est.eta_eff);
  est.onebit = onebit_variances(config, pilots);
  est.ghat.resize(config.antennas, pilots.users());
  if (n_hr > 0) est.ghat.bottomRows(n_hr) = fullres_estimate(obs.x.bottomRows(n_hr), config, pilots);
  if (n_ob > 0) {
    const OneBitTerms terms = onebit_terms(config, pilots);
    est.ghat.topRows(n_ob) = onebit_estimate(obs.ybank.front().topRows(n_ob), config, pilots, terms);
  }
  return est;
}

double correlated_limit_varsigma(const SystemConfig& config) {
  require_round_robin(config);
  const double extra = config.rounds() - 1.0;
  if (extra <= 0.0) return 0.0;
  const double kp = config.users * config.train_power;
  return extra / (kPi / 2.0 * config.noise_power / kp + (kPi / 2.0 - 1.0) * extra);
}

}  // namespace mixadc

// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "mixadc/sysmodel.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace mixadc {

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

SystemConfig SystemConfig::make(int antennas, int highres, int users, int coherence, int pilot_length,
                                double snr_db) {
  SystemConfig c;
  c.antennas = antennas;
  c.highres = highres;
  c.users = users;
  c.coherence = coherence;
  c.pilot_length = pilot_length;
  c.beta.assign(static_cast<std::size_t>(std::max(users, 0)), 1.0);
  c = c.with_snr_db(snr_db);
  c.validate();
  return c;
}

SystemConfig SystemConfig::with_snr_db(double snr) const {
  SystemConfig c = *this;
  c.snr_db = snr;
  c.power = noise_power * db_to_linear(snr);
  c.train_power = c.power;
  c.data_power = c.power;
  return c;
}

SystemConfig SystemConfig::with_powers(double p_train, double p_data) const {
  SystemConfig c = *this;
  c.train_power = p_train;
  c.data_power = p_data;
  return c;
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("SystemConfig: " + what); };
  if (antennas <= 0) fail("antenna count must be positive");
  if (users <= 0) fail("user count must be positive");
  if (highres < 0 || highres > antennas) fail("high-resolution ADC count must lie in [0, M]");
  if (pilot_length < users) fail("pilot length must be at least the user count");
  if (pilot_length > coherence) fail("pilot length exceeds the coherence interval");
  if (highres > 0) {
    if (antennas % highres != 0) fail("M/N must be an integer");
    if (static_cast<long long>(rounds()) * pilot_length > coherence)
      fail("round-robin training (M/N)*eta exceeds the coherence interval");
  }
  if (!(noise_power > 0.0)) fail("noise power must be positive");
  if (!(power > 0.0) || !(train_power > 0.0) || !(data_power > 0.0)) fail("powers must be positive");
  if (static_cast<int>(beta.size()) != users) fail("beta must have one entry per user");
  for (double b : beta)
    if (!(b > 0.0)) fail("large-scale gains must be positive");
}

namespace {

double read_linear(const nlohmann::json& j, const std::string& key, double fallback) {
  if (j.contains(key)) return j.at(key).get<double>();
  if (j.contains(key + "_db")) return db_to_linear(j.at(key + "_db").get<double>());
  return fallback;
}

}  // namespace

SystemConfig config_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");

  SystemConfig c;
  c.antennas = j.value("M", c.antennas);
  c.highres = j.value("N", c.highres);
  c.users = j.value("K", c.users);
  c.coherence = j.value("T", c.coherence);
  c.pilot_length = j.value("eta", c.users);
  c.noise_power = read_linear(j, "sigma_n2", c.noise_power);

  const double snr = j.value("snr_db", 0.0);
  c = c.with_snr_db(snr);
  c.power = read_linear(j, "p", c.power);
  c.train_power = read_linear(j, "p_t", c.power);
  c.data_power = read_linear(j, "p_d", c.power);

  if (j.contains("beta")) {
    c.beta = j.at("beta").get<std::vector<double>>();
  } else if (j.contains("beta_db")) {
    c.beta.clear();
    for (double b : j.at("beta_db").get<std::vector<double>>()) c.beta.push_back(db_to_linear(b));
  } else {
    c.beta.assign(static_cast<std::size_t>(std::max(c.users, 0)), 1.0);
  }
  c.validate();
  return c;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str());
}

std::string config_to_json(const SystemConfig& c) {
  nlohmann::json j{{"M", c.antennas},        {"N", c.highres},           {"K", c.users},
                   {"T", c.coherence},       {"eta", c.pilot_length},    {"snr_db", c.snr_db},
                   {"sigma_n2", c.noise_power}, {"p", c.power},          {"beta", c.beta},
                   {"p_t", c.train_power},   {"p_d", c.data_power}};
  return j.dump();
}

PilotMatrix generate_pilots(int eta, int users) {
  if (users <= 0 || eta <= 0) throw std::invalid_argument("generate_pilots: sizes must be positive");
  if (users > eta) throw std::invalid_argument("generate_pilots: need K <= eta for orthogonal pilots");
  PilotMatrix pilots{Eigen::MatrixXcd(eta, users)};
  const double scale = 1.0 / std::sqrt(static_cast<double>(eta));
  for (int n = 0; n < eta; ++n) {
    for (int k = 0; k < users; ++k) {
      // reduce n*k mod eta before scaling so the phase stays exact for large products
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((static_cast<long long>(n) * k) % eta) / eta;
      pilots.phi(n, k) = std::polar(scale, phase);
    }
  }
  return pilots;
}

ChannelMatrix draw_channel(const SystemConfig& config, RandomStream& rng) {
  const int m = config.antennas;
  const int k = config.users;
  ChannelMatrix ch{Eigen::MatrixXcd(m, k), Eigen::MatrixXcd(m, k)};
  for (int col = 0; col < k; ++col) {
    for (int row = 0; row < m; ++row) ch.h(row, col) = rng.complex_normal();
    ch.g.col(col) = std::sqrt(config.beta[static_cast<std::size_t>(col)]) * ch.h.col(col);
  }
  return ch;
}

std::vector<double> power_control(const std::vector<double>& beta, double p) {
  std::vector<double> out;
  out.reserve(beta.size());
  for (double b : beta) {
    if (!(b > 0.0)) throw std::invalid_argument("power_control: large-scale gains must be positive");
    out.push_back(p / b);
  }
  return out;
}

}  // namespace mixadc

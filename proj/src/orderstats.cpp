// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "mixadc/orderstats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mixadc/errors.hpp"

namespace mixadc {

void OrderStatSpec::validate() const {
  if (M < 1 || m < 1 || m > M) throw std::invalid_argument("OrderStatSpec: need 1 <= m <= M");
  if (K < 1) throw std::invalid_argument("OrderStatSpec: need K >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("OrderStatSpec: scale must be positive");
}

double gamma_cdf(double x, int K, double scale) {
  if (!(x >= 0.0)) throw std::invalid_argument("gamma_cdf: x must be nonnegative");
  if (K < 1 || !(scale > 0.0)) throw std::invalid_argument("gamma_cdf: need K >= 1 and scale > 0");
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(static_cast<double>(K), x / scale);
}

double order_stat_mean(const OrderStatSpec& spec) {
  spec.validate();
  if (spec.M == 1) return spec.K * spec.scale;

  const double shape = spec.K;
  const double a = spec.m;
  const double b = spec.M - spec.m + 1;
  // x(u) F'(x) dx = x(u) du; the Beta(m, M-m+1) density weights the ranks.
  // The complement argument keeps the quantile accurate next to u = 1.
  auto integrand = [&](double u, double uc) {
    double x;
    if (u > 0.5) {
      if (uc <= 0.0) return 0.0;
      x = boost::math::gamma_q_inv(shape, uc);
    } else {
      if (u <= 0.0) return 0.0;
      x = boost::math::gamma_p_inv(shape, u);
    }
    const double w = boost::math::ibeta_derivative(a, b, u);
    return x * w;
  };

  boost::math::quadrature::tanh_sinh<double> rule(15);
  double error = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  double value = 0.0;
  try {
    value = rule.integrate(integrand, 0.0, 1.0, 1e-12, &error, &l1, &levels);
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "order_stat_mean(m=" << spec.m << ", M=" << spec.M << ", K=" << spec.K << "): " << e.what();
    throw NumericFailure(msg.str());
  }
  if (!std::isfinite(value) || error > 1e-9 * std::max(1.0, std::abs(value))) {
    std::ostringstream msg;
    msg << "order_stat_mean(m=" << spec.m << ", M=" << spec.M << ", K=" << spec.K
        << "): quadrature did not converge, estimate " << value << ", error " << error << ", levels " << levels;
    throw NumericFailure(msg.str());
  }
  return value * spec.scale;
}

namespace {

const std::vector<double>& chi_table(int M, int K) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find({M, K});
  if (it != cache.end()) return it->second;
  std::vector<double> values(static_cast<std::size_t>(M));
  for (int m = 1; m <= M; ++m) values[static_cast<std::size_t>(m - 1)] = order_stat_mean({m, M, K, 1.0});
  return cache.emplace(std::make_pair(M, K), std::move(values)).first->second;
}

}  // namespace

double chi_m(int m, int M, int K) {
  OrderStatSpec{m, M, K, 1.0}.validate();
  return chi_table(M, K)[static_cast<std::size_t>(m - 1)];
}

double chi_sum_lowest(int count, int M, int K) {
  if (count < 0 || count > M) throw std::invalid_argument("chi_sum_lowest: need 0 <= count <= M");
  if (count == 0) return 0.0;
  OrderStatSpec{1, M, K, 1.0}.validate();
  const auto& table = chi_table(M, K);
  double sum = 0.0;
  for (int m = 0; m < count; ++m) sum += table[static_cast<std::size_t>(m)];
  return sum;
}

OrderStatEstimate order_stat_mc_oracle(const OrderStatSpec& spec, std::uint64_t trials, RandomStream& rng) {
  spec.validate();
  if (trials < 2) throw std::invalid_argument("order_stat_mc_oracle: need at least two trials");
  std::gamma_distribution<double> gamma(static_cast<double>(spec.K), spec.scale);
  std::vector<double> sample(static_cast<std::size_t>(spec.M));
  const auto rank = sample.begin() + (spec.m - 1);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    for (auto& v : sample) v = gamma(rng);
    std::nth_element(sample.begin(), rank, sample.end());
    const double delta = *rank - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (*rank - mean);
  }
  const double n = static_cast<double>(trials);
  return {mean, std::sqrt(m2 / (n - 1.0) / n)};
}

}  // namespace mixadc

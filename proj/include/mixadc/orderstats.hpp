// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#pragma once

#include <cstdint>
#include <vector>

#include "mixadc/random.hpp"

namespace mixadc {

/// m-th smallest of M i.i.d. Gamma(K, scale) row energies.
struct OrderStatSpec {
  int m = 1;           ///< rank, 1 = smallest
  int M = 1;           ///< population size
  int K = 1;           ///< Gamma shape (number of users)
  double scale = 1.0;  ///< Gamma scale, the per-coefficient estimate variance

  void validate() const;
};

/// Regularized lower incomplete gamma P(K, x / scale).
double gamma_cdf(double x, int K, double scale = 1.0);

/// Expected value of the order statistic, by quadrature over u = F(x).
/// Throws NumericFailure when the quadrature does not reach 1e-9.
double order_stat_mean(const OrderStatSpec& spec);

/// E(m) at unit scale. Values for each (M, K) are cached after first use.
double chi_m(int m, int M, int K);

/// chi_1 + ... + chi_count, i.e. the expected energy of the `count` weakest rows.
double chi_sum_lowest(int count, int M, int K);

struct OrderStatEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean of the order statistic over `trials` independent populations.
OrderStatEstimate order_stat_mc_oracle(const OrderStatSpec& spec, std::uint64_t trials, RandomStream& rng);

}  // namespace mixadc

// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "mixadc/quantization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace mixadc {
namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;
constexpr double kInvSqrt2 = 0.70710678118654752440;

double sign_bit(double v) { return v < 0.0 ? -kInvSqrt2 : kInvSqrt2; }

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

Eigen::MatrixXcd one_bit_quantize(const Eigen::MatrixXcd& x) {
  return x.unaryExpr([](const std::complex<double>& z) {
    return std::complex<double>(sign_bit(z.real()), sign_bit(z.imag()));
  });
}

bool is_one_bit(const Eigen::MatrixXcd& y, double tol) {
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const auto z = y(i, j);
      if (std::abs(std::abs(z.real()) - kInvSqrt2) > tol || std::abs(std::abs(z.imag()) - kInvSqrt2) > tol)
        return false;
    }
  return true;
}

Eigen::MatrixXcd pilot_autocorrelation(const SystemConfig& config, const PilotMatrix& pilots, bool include_noise) {
  const int eta = pilots.length();
  const auto pk = power_control(config.beta, config.train_power);
  Eigen::MatrixXcd cx = Eigen::MatrixXcd::Zero(eta, eta);
  for (int k = 0; k < pilots.users(); ++k) {
    const double weight = eta * pk[static_cast<std::size_t>(k)] * config.beta[static_cast<std::size_t>(k)];
    const Eigen::VectorXcd phi = pilots.phi.col(k);
    cx.noalias() += weight * phi.conjugate() * phi.transpose();
  }
  if (include_noise) cx.diagonal().array() += config.noise_power;
  return cx;
}

Eigen::MatrixXcd arcsine_cross_covariance(const Eigen::MatrixXcd& cross, const Eigen::VectorXd& variance) {
  if (cross.rows() != cross.cols() || cross.rows() != variance.size())
    throw std::invalid_argument("arcsine_cross_covariance: dimension mismatch");
  if ((variance.array() <= 0.0).any())
    throw std::invalid_argument("arcsine_cross_covariance: variances must be positive");
  const Eigen::VectorXd inv_sd = variance.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXcd normalized = inv_sd.asDiagonal() * cross * inv_sd.asDiagonal();
  const Eigen::MatrixXcd arcsine = normalized.unaryExpr([](const std::complex<double>& c) {
    return std::complex<double>(std::asin(clamp_unit(c.real())), std::asin(clamp_unit(c.imag())));
  });
  return kTwoOverPi * (arcsine - normalized);
}

Eigen::MatrixXcd arcsine_covariance(const Eigen::MatrixXcd& cx) {
  if (cx.rows() != cx.cols()) throw std::invalid_argument("arcsine_covariance: matrix must be square");
  const double scale = std::max(1.0, cx.cwiseAbs().maxCoeff());
  if ((cx - cx.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("arcsine_covariance: input must be Hermitian");
  Eigen::LLT<Eigen::MatrixXcd> llt(cx);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("arcsine_covariance: input must be positive definite");
  Eigen::MatrixXcd cq = arcsine_cross_covariance(cx, cx.diagonal().real());
  cq.diagonal().setConstant(1.0 - kTwoOverPi);
  return cq;
}

BussgangModel bussgang_model(const Eigen::MatrixXcd& cx) {
  BussgangModel model;
  model.cq = arcsine_covariance(cx);
  model.dx = cx.diagonal().real();
  model.gain = std::sqrt(kTwoOverPi) * model.dx.cwiseSqrt().cwiseInverse();
  return model;
}

namespace {

double gauss_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// upper tail P(X > x)
double gauss_tail(double x) {
  if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

}  // namespace

LloydMaxQuantizer lloyd_max_gaussian(int bits) {
  if (bits < 1 || bits > 16) throw std::invalid_argument("lloyd_max_gaussian: bits must lie in [1, 16]");
  const int levels = 1 << bits;
  const int half = levels / 2;

  // Positive half only; the quantizer is odd-symmetric with a threshold at 0.
  // Companding start point (point density proportional to pdf^{1/3}).
  const boost::math::normal_distribution<double> unit;
  std::vector<double> y(static_cast<std::size_t>(half));
  for (int i = 0; i < half; ++i) {
    const double u = (half + i + 0.5) / levels;
    y[static_cast<std::size_t>(i)] = std::sqrt(3.0) * boost::math::quantile(unit, u);
  }

  std::vector<double> t(static_cast<std::size_t>(half + 1));
  auto update_thresholds = [&] {
    t.front() = 0.0;
    for (int i = 1; i < half; ++i)
      t[static_cast<std::size_t>(i)] = 0.5 * (y[static_cast<std::size_t>(i - 1)] + y[static_cast<std::size_t>(i)]);
    t.back() = std::numeric_limits<double>::infinity();
  };

  constexpr int kMaxIterations = 200000;
  constexpr double kTolerance = 1e-13;
  int iter = 0;
  for (; iter < kMaxIterations; ++iter) {
    update_thresholds();
    double change = 0.0;
    for (int i = 0; i < half; ++i) {
      const double a = t[static_cast<std::size_t>(i)];
      const double b = t[static_cast<std::size_t>(i + 1)];
      const double mass = gauss_tail(a) - gauss_tail(b);
      const double first = gauss_pdf(a) - (std::isinf(b) ? 0.0 : gauss_pdf(b));
      const double centroid = first / mass;
      change = std::max(change, std::abs(centroid - y[static_cast<std::size_t>(i)]));
      y[static_cast<std::size_t>(i)] = centroid;
    }
    if (change < kTolerance) break;
  }
  update_thresholds();

  // E[(X - Q(X))^2] evaluated cell by cell from truncated Gaussian moments.
  double distortion = 0.0;
  for (int i = 0; i < half; ++i) {
    const double a = t[static_cast<std::size_t>(i)];
    const double b = t[static_cast<std::size_t>(i + 1)];
    const double level = y[static_cast<std::size_t>(i)];
    const double mass = gauss_tail(a) - gauss_tail(b);
    const double pa = gauss_pdf(a);
    const double pb = std::isinf(b) ? 0.0 : gauss_pdf(b);
    const double first = pa - pb;
    const double second = mass + a * pa - (std::isinf(b) ? 0.0 : b * pb);
    distortion += second - 2.0 * level * first + level * level * mass;
  }
  distortion *= 2.0;

  LloydMaxQuantizer q;
  q.iterations = iter;
  q.distortion = distortion;
  q.levels.reserve(static_cast<std::size_t>(levels));
  for (int i = half - 1; i >= 0; --i) q.levels.push_back(-y[static_cast<std::size_t>(i)]);
  for (int i = 0; i < half; ++i) q.levels.push_back(y[static_cast<std::size_t>(i)]);
  for (int i = half - 1; i >= 1; --i) q.thresholds.push_back(-t[static_cast<std::size_t>(i)]);
  for (int i = 0; i < half; ++i) q.thresholds.push_back(t[static_cast<std::size_t>(i)]);
  return q;
}

AqnmGain aqnm_alpha(int bits) {
  if (bits < 1 || bits > 12) throw std::invalid_argument("aqnm_alpha: bits must lie in [1, 12]");
  if (bits == 1) return {1, kTwoOverPi};

  static std::mutex mutex;
  static std::array<std::optional<double>, 13> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[static_cast<std::size_t>(bits)];
  if (!slot) slot = 1.0 - lloyd_max_gaussian(bits).distortion;
  return {bits, *slot};
}

}  // namespace mixadc

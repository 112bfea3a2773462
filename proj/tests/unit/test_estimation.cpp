// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mixadc/estimation.hpp"
#include "mixadc/montecarlo.hpp"
#include "mixadc/quantization.hpp"

using namespace mixadc;
using Catch::Approx;

namespace
{

const double pi = std::numbers::pi;

double empirical_mse(const SystemConfig &c, TrainingScheme scheme, std::uint64_t trials, std::uint64_t seed)
{
    const PilotMatrix pilots = generate_pilots(c.pilot_length, c.users);
    auto kernel = [&](std::uint64_t, RandomStream &rng, Eigen::Ref<Eigen::VectorXd> out)
    {
        const ChannelMatrix ch = draw_channel(c, rng);
        const TrainingObservations obs = simulate_round_robin(ch, c, pilots, scheme, rng);
        Eigen::MatrixXcd ghat;
        if (scheme == TrainingScheme::kOneBitOnly)
            ghat = estimate_onebit(obs.ybank.front(), c, pilots).ghat;
        else if (scheme == TrainingScheme::kFullResRR)
            ghat = estimate_fullres_rr(obs, c, pilots).ghat;
        else
            ghat = estimate_joint(obs, c, pilots).ghat;
        out(0) = (ghat - ch.g).squaredNorm() / (c.antennas * c.users);
    };
    return run_trials({seed, trials, 1}, 1, kernel).mean(0);
}

} // namespace

TEST_CASE("estimation - Training lengths and scheme names")
{
    const SystemConfig c = SystemConfig::make(100, 20, 10, 400, 10, 0.0);
    CHECK(training_length(c, TrainingScheme::kOneBitOnly) == 10);
    CHECK(training_length(c, TrainingScheme::kNonRoundRobin) == 10);
    CHECK(training_length(c, TrainingScheme::kFullResRR) == 50);
    CHECK(training_length(c, TrainingScheme::kJointRR) == 50);
    CHECK(std::string(to_string(TrainingScheme::kJointRR)) == "joint-rr");
    const SystemConfig z = SystemConfig::make(100, 0, 10, 400, 10, 0.0);
    CHECK_THROWS_AS(training_length(z, TrainingScheme::kJointRR), std::invalid_argument);
    CHECK(fixed_highres_rows(c).front() == 80);
    CHECK(fixed_highres_rows(c).back() == 99);
}

TEST_CASE("estimation - Closed forms under power control")
{
    for (double snr : {-20.0, -10.0, 0.0, 10.0, 30.0})
    {
        const SystemConfig c = SystemConfig::make(100, 20, 10, 400, 10, snr);
        const PilotMatrix p = generate_pilots(10, 10);
        const double kp = c.users * c.train_power / c.noise_power;

        const EstimationResult ob = onebit_variances(c, p);
        const double onebit_expected = (kp * (1.0 - 2.0 / pi) + 1.0) / (1.0 + kp);
        CHECK(ob.var_err(0) == Approx(onebit_expected).epsilon(1e-10));
        CHECK(ob.eta_eff == 10);

        const EstimationResult fr = fullres_variances(c, p);
        CHECK(fr.var_err(0) == Approx(1.0 / (1.0 + kp)).epsilon(1e-12));
        CHECK(fr.eta_eff == 50);

        const EstimationResult jt = joint_variances(c, p);
        for (const auto *r : {&ob, &fr, &jt})
        {
            CHECK((r->var_est + r->var_err).isApprox(Eigen::VectorXd::Ones(10), 1e-12));
            CHECK(r->sigma_hhat2.isApprox(r->var_est, 1e-12));
        }
        // extra one-bit blocks can only help
        CHECK(jt.var_err(0) <= fr.var_err(0) * (1.0 + 1e-12));

        // With eta = K and DFT pilots the one-bit cross term reduces to a scalar.
        const JointWeights w = joint_weights(c, p);
        const double r = kp / (kp + 1.0);
        CHECK(w.rho(0) == Approx((std::asin(r) - r) / r).epsilon(1e-9));
        CHECK(w.sigma_w2(0) == Approx((1.0 + kp * (1.0 - 2.0 / pi)) * pi / 2.0 / kp).epsilon(1e-9));
    }
}

TEST_CASE("estimation - Non-uniform large-scale gains")
{
    SystemConfig c = SystemConfig::make(16, 4, 3, 100, 5, 5.0);
    c.beta = {1.0, 0.1, 3.0};
    const PilotMatrix p = generate_pilots(5, 3);
    for (const auto &r : {onebit_variances(c, p), fullres_variances(c, p), joint_variances(c, p)})
        for (int k = 0; k < 3; ++k)
        {
            CHECK(r.var_est(k) + r.var_err(k) == Approx(c.beta[k]).epsilon(1e-12));
            CHECK(r.sigma_hhat2(k) == Approx(r.var_est(k) / c.beta[k]).epsilon(1e-12));
        }
}

TEST_CASE("estimation - Joint weights equal brute-force LMMSE")
{
    for (int rounds : {2, 3, 5, 10})
        for (double snr : {-10.0, 0.0, 15.0})
        {
            const int m = 30;
            const SystemConfig c = SystemConfig::make(m, m / rounds, 4, 1000, 4, snr);
            const PilotMatrix p = generate_pilots(4, 4);
            const JointWeights w = joint_weights(c, p);
            const double beta = 1.0;
            const double ep = c.pilot_length * c.train_power;
            // disturbance covariance of [high-res statistic, one-bit statistics]
            const int n = rounds;
            Eigen::MatrixXd cu = Eigen::MatrixXd::Zero(n, n);
            cu(0, 0) = c.noise_power / ep;
            for (int i = 1; i < n; ++i)
                for (int j = 1; j < n; ++j)
                    cu(i, j) = i == j ? w.sigma_w2(0) : w.rho(0);
            const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
            const Eigen::VectorXd ci1 = cu.inverse() * ones;
            const Eigen::VectorXd weights = ci1 / (1.0 / beta + ones.dot(ci1));
            CHECK(weights(0) == Approx(w.w_inf(0)).epsilon(1e-10));
            for (int i = 1; i < n; ++i)
                CHECK(weights(i) == Approx(w.w_one(0)).epsilon(1e-10));
            const double mmse = 1.0 / (1.0 / beta + ones.dot(ci1));
            CHECK(joint_variances(c, p).var_err(0) == Approx(mmse).epsilon(1e-10));
        }
}

TEST_CASE("estimation - One-bit disturbance moments against simulation")
{
    // v_t = (eta p)^{-1/2} y_t phibar* = g + w_t; sample Var(w_t) and Cov(w_t, w_s).
    for (double snr : {0.0, 10.0})
    {
        const SystemConfig c = SystemConfig::make(4, 1, 4, 400, 4, snr);
        const PilotMatrix p = generate_pilots(4, 4);
        const JointWeights w = joint_weights(c, p);
        const Eigen::MatrixXcd cx = pilot_autocorrelation(c, p);
        const Eigen::VectorXd dx = cx.diagonal().real();
        const Eigen::VectorXcd phibar = (std::sqrt(pi / 2.0) * dx.cwiseSqrt()).asDiagonal() * p.phi.col(0);
        const double ep = 4.0 * c.train_power;

        RandomStream rng(99, 0);
        const int draws = 200000;
        double var = 0.0;
        std::complex<double> cov = 0.0;
        for (int t = 0; t < draws; ++t)
        {
            const ChannelMatrix ch = draw_channel(c, rng);
            const Eigen::MatrixXcd s = std::sqrt(ep) * ch.g * p.phi.transpose();
            Eigen::MatrixXcd x1 = s, x2 = s;
            for (int n = 0; n < 4; ++n)
                for (int r = 0; r < 4; ++r)
                {
                    x1(r, n) += rng.complex_normal(c.noise_power);
                    x2(r, n) += rng.complex_normal(c.noise_power);
                }
            const std::complex<double> w1 = (one_bit_quantize(x1).row(0) * phibar.conjugate())(0) / std::sqrt(ep) - ch.g(0, 0);
            const std::complex<double> w2 = (one_bit_quantize(x2).row(0) * phibar.conjugate())(0) / std::sqrt(ep) - ch.g(0, 0);
            var += 0.5 * (std::norm(w1) + std::norm(w2));
            cov += w1 * std::conj(w2);
        }
        var /= draws;
        cov /= static_cast<double>(draws);
        CHECK(var == Approx(w.sigma_w2(0)).epsilon(0.02));
        const double band = 4.0 * w.sigma_w2(0) / std::sqrt(static_cast<double>(draws));
        CHECK(std::abs(cov.real() - w.rho(0)) < band);
        CHECK(std::abs(cov.imag()) < band);
    }
}

TEST_CASE("estimation - Asymptotic weights")
{
    const SystemConfig c = SystemConfig::make(100, 20, 10, 400, 10, 80.0);
    const JointWeights w = joint_weights(c, generate_pilots(10, 10));
    CHECK(w.varsigma(0) == Approx(1.0 / (pi / 2.0 - 1.0)).epsilon(1e-4));
    CHECK(w.w_inf(0) > 0.999);
    CHECK(w.w_one(0) < 1e-3);

    // All antennas on high-resolution ADCs: no one-bit blocks.
    const SystemConfig full = SystemConfig::make(16, 16, 4, 100, 4, 0.0);
    const PilotMatrix p = generate_pilots(4, 4);
    const JointWeights wf = joint_weights(full, p);
    CHECK(wf.w_one(0) == 0.0);
    CHECK(joint_variances(full, p).var_err(0) == Approx(fullres_variances(full, p).var_err(0)).epsilon(1e-12));

    // Ignoring the correlation over-counts the one-bit information.
    const SystemConfig low = SystemConfig::make(100, 20, 10, 400, 10, -10.0);
    const PilotMatrix pl = generate_pilots(10, 10);
    CHECK(joint_variances(low, pl, true).var_err(0) < joint_variances(low, pl).var_err(0));
    // At low SNR the fully correlated closed form is far from the exact value.
    CHECK(correlated_limit_varsigma(low) < joint_weights(low, pl).varsigma(0));
    CHECK(correlated_limit_varsigma(c) == Approx(w.varsigma(0)).epsilon(1e-3));
}

TEST_CASE("estimation - Observation layout of round-robin training")
{
    const SystemConfig c = SystemConfig::make(12, 3, 2, 100, 2, 0.0);
    const PilotMatrix p = generate_pilots(2, 2);
    RandomStream rng(5, 0);
    const ChannelMatrix ch = draw_channel(c, rng);

    RandomStream r1(6, 0);
    const TrainingObservations obs = simulate_round_robin(ch, c, p, TrainingScheme::kJointRR, r1);
    REQUIRE(obs.ybank.size() == 3);
    for (int m = 0; m < 12; ++m)
    {
        const int group = m / 3;
        CHECK(obs.x_interval[m] == group);
        for (int t = 1; t < 4; ++t)
            CHECK(obs.y_interval[t - 1][m] == (group + t) % 4);
    }
    for (const auto &y : obs.ybank)
        CHECK(is_one_bit(y));

    RandomStream r2(6, 0);
    const TrainingObservations again = simulate_round_robin(ch, c, p, TrainingScheme::kJointRR, r2);
    CHECK(again.x == obs.x);

    RandomStream r3(7, 0);
    const TrainingObservations fixed = simulate_round_robin(ch, c, p, TrainingScheme::kNonRoundRobin, r3);
    CHECK(fixed.x.topRows(9).cwiseAbs().maxCoeff() == 0.0);
    CHECK(is_one_bit(fixed.ybank.front().topRows(9)));
    CHECK(fixed.ybank.front().bottomRows(3).cwiseAbs().maxCoeff() == 0.0);
    const NonRoundRobinEstimate est = estimate_non_round_robin(fixed, c, p);
    CHECK(est.eta_eff == 2);
    CHECK(est.highres_rows == fixed_highres_rows(c));

    CHECK_THROWS_AS(estimate_joint(fixed, c, p), std::invalid_argument);
    CHECK_THROWS_AS(estimate_non_round_robin(obs, c, p), std::invalid_argument);
    CHECK_THROWS_AS(estimate_onebit(obs.x, c, p), std::invalid_argument);

    SystemConfig short_t = c;
    short_t.coherence = 6;
    CHECK_THROWS_AS(simulate_round_robin(ch, short_t, p, TrainingScheme::kJointRR, r1), std::invalid_argument);
}

TEST_CASE("estimation - Empirical MSE matches the closed forms")
{
    for (double snr : {-10.0, 0.0, 10.0})
    {
        const SystemConfig c = SystemConfig::make(16, 4, 4, 100, 4, snr);
        const PilotMatrix p = generate_pilots(4, 4);
        CHECK(empirical_mse(c, TrainingScheme::kOneBitOnly, 20000, 1) ==
              Approx(onebit_variances(c, p).var_err(0)).epsilon(0.03));
        CHECK(empirical_mse(c, TrainingScheme::kFullResRR, 20000, 2) ==
              Approx(fullres_variances(c, p).var_err(0)).epsilon(0.03));
        CHECK(empirical_mse(c, TrainingScheme::kJointRR, 20000, 3) ==
              Approx(joint_variances(c, p).var_err(0)).epsilon(0.03));
    }
}

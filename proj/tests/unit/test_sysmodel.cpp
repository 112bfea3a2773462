// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "catch_amalgamated.hpp"

#include <cmath>
#include <stdexcept>

#include "mixadc/sysmodel.hpp"

using namespace mixadc;
using Catch::Approx;

TEST_CASE("sysmodel - Configuration validation")
{
    const SystemConfig c = SystemConfig::make(100, 20, 10, 400, 10, 0.0);
    CHECK(c.rounds() == 5);
    CHECK(c.power == Approx(1.0));
    CHECK(c.beta.size() == 10);

    CHECK_THROWS_AS(SystemConfig::make(100, 30, 10, 400, 10, 0.0), std::invalid_argument);  // M/N not integer
    CHECK_THROWS_AS(SystemConfig::make(100, 20, 10, 40, 10, 0.0), std::invalid_argument);   // (M/N) eta > T
    CHECK_THROWS_AS(SystemConfig::make(100, 20, 10, 400, 8, 0.0), std::invalid_argument);   // eta < K
    CHECK_THROWS_AS(SystemConfig::make(100, 101, 10, 400, 10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(SystemConfig::make(0, 0, 10, 400, 10, 0.0), std::invalid_argument);

    // N = 0 is the all one-bit array
    const SystemConfig z = SystemConfig::make(100, 0, 10, 400, 10, 0.0);
    CHECK(z.rounds() == 0);

    SystemConfig bad = c;
    bad.beta.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.beta[3] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("sysmodel - SNR and power helpers")
{
    const SystemConfig c = SystemConfig::make(16, 4, 4, 100, 4, 10.0);
    CHECK(c.power == Approx(10.0));
    CHECK(c.train_power == Approx(10.0));
    CHECK(c.data_power == Approx(10.0));
    const SystemConfig s = c.with_powers(2.0, 3.0);
    CHECK(s.train_power == 2.0);
    CHECK(s.data_power == 3.0);
    CHECK(s.power == Approx(10.0));
    CHECK(db_to_linear(-20.0) == Approx(0.01));

    const auto pk = power_control({0.5, 2.0}, 4.0);
    CHECK(pk[0] == Approx(8.0));
    CHECK(pk[1] == Approx(2.0));
    CHECK_THROWS_AS(power_control({1.0, -1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("sysmodel - JSON round trip")
{
    SystemConfig c = SystemConfig::make(32, 8, 4, 200, 6, -5.0);
    c.beta = {1.0, 0.5, 0.25, 2.0};
    const SystemConfig r = config_from_json(config_to_json(c));
    CHECK(r.antennas == 32);
    CHECK(r.highres == 8);
    CHECK(r.users == 4);
    CHECK(r.coherence == 200);
    CHECK(r.pilot_length == 6);
    CHECK(r.snr_db == Approx(-5.0));
    CHECK(r.beta == c.beta);
    CHECK(r.train_power == Approx(c.train_power));

    const SystemConfig d = config_from_json(R"({"M": 16, "N": 4, "K": 2, "T": 50, "beta_db": [0, -10], "p_d_db": 3})");
    CHECK(d.pilot_length == 2);
    CHECK(d.beta[1] == Approx(0.1));
    CHECK(d.data_power == Approx(std::pow(10.0, 0.3)));

    CHECK_THROWS(config_from_json("[1, 2]"));
    CHECK_THROWS_AS(config_from_json(R"({"M": 10, "N": 3})"), std::invalid_argument);
}

TEST_CASE("sysmodel - Pilots are orthonormal DFT columns")
{
    for (int eta : {4, 10, 50})
    {
        const PilotMatrix p = generate_pilots(eta, 4);
        CHECK(p.length() == eta);
        CHECK(p.users() == 4);
        const Eigen::MatrixXcd gram = p.phi.adjoint() * p.phi;
        CHECK((gram - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((p.phi.cwiseAbs().array() - 1.0 / std::sqrt(eta)).abs().maxCoeff() < 1e-14);
    }
    CHECK_THROWS_AS(generate_pilots(3, 4), std::invalid_argument);
    CHECK_THROWS_AS(generate_pilots(0, 0), std::invalid_argument);
}

TEST_CASE("sysmodel - Rayleigh channel statistics")
{
    SystemConfig c = SystemConfig::make(64, 16, 4, 100, 4, 0.0);
    c.beta = {1.0, 0.5, 0.1, 2.0};
    RandomStream rng(11, 0);
    Eigen::VectorXd power = Eigen::VectorXd::Zero(4);
    std::complex<double> mean = 0.0;
    const int draws = 500;
    for (int i = 0; i < draws; ++i)
    {
        const ChannelMatrix ch = draw_channel(c, rng);
        REQUIRE(ch.h.rows() == 64);
        REQUIRE(ch.h.cols() == 4);
        for (int k = 0; k < 4; ++k)
            CHECK((ch.g.col(k) - std::sqrt(c.beta[k]) * ch.h.col(k)).norm() < 1e-12);
        power += ch.h.colwise().squaredNorm().transpose();
        mean += ch.h.sum();
    }
    const double n = 64.0 * draws;
    for (int k = 0; k < 4; ++k)
        CHECK(power(k) / n == Approx(1.0).margin(5.0 / std::sqrt(n)));
    CHECK(std::abs(mean) / (4.0 * n) < 5.0 / std::sqrt(4.0 * n));
}

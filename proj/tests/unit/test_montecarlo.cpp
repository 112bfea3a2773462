// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "catch_amalgamated.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "mixadc/errors.hpp"
#include "mixadc/montecarlo.hpp"

using namespace mixadc;
using Catch::Approx;

namespace
{
bool same_bits(const Eigen::VectorXd &a, const Eigen::VectorXd &b)
{
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

void gaussian_kernel(std::uint64_t, RandomStream &rng, Eigen::Ref<Eigen::VectorXd> out)
{
    out(0) = rng.normal();
    out(1) = out(0) * out(0);
    out(2) = rng.uniform();
}
} // namespace

TEST_CASE("montecarlo - Constant kernel")
{
    const TrialSummary s = run_trials({1, 5000, 4}, 2, [](std::uint64_t, RandomStream &, Eigen::Ref<Eigen::VectorXd> out)
                                      { out << 3.5, -1.0; });
    CHECK(s.trials == 5000);
    CHECK(s.mean(0) == 3.5);
    CHECK(s.mean(1) == -1.0);
    CHECK(s.variance.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.std_error.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("montecarlo - Schedule invariance")
{
    for (std::uint64_t trials : {2ull, 255ull, 257ull, 10007ull, 100000ull})
    {
        const TrialSummary one = run_trials({77, trials, 1}, 3, gaussian_kernel);
        const TrialSummary eight = run_trials({77, trials, 8}, 3, gaussian_kernel);
        const TrialSummary many = run_trials({77, trials, 64}, 3, gaussian_kernel);
        CHECK(same_bits(one.mean, eight.mean));
        CHECK(same_bits(one.variance, eight.variance));
        CHECK(same_bits(one.mean, many.mean));
        CHECK(same_bits(one.std_error, many.std_error));
    }
    const TrialSummary a = run_trials({77, 1000, 2}, 3, gaussian_kernel);
    const TrialSummary b = run_trials({78, 1000, 2}, 3, gaussian_kernel);
    CHECK_FALSE(same_bits(a.mean, b.mean));
}

TEST_CASE("montecarlo - Moments against two-pass oracle")
{
    const std::uint64_t n = 3001;
    const TrialSummary s = run_trials({9, n, 0}, 3, gaussian_kernel);
    Eigen::MatrixXd samples(n, 3);
    for (std::uint64_t i = 0; i < n; ++i)
    {
        RandomStream rng(9, i);
        Eigen::VectorXd row(3);
        gaussian_kernel(i, rng, row);
        samples.row(i) = row.transpose();
    }
    const Eigen::VectorXd mean = samples.colwise().mean().transpose();
    const Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
    const Eigen::VectorXd var = centered.colwise().squaredNorm().transpose() / double(n - 1);
    CHECK(s.mean.isApprox(mean, 1e-12));
    CHECK(s.variance.isApprox(var, 1e-12));
    CHECK(s.std_error.isApprox((var / double(n)).cwiseSqrt(), 1e-12));

    std::uint64_t total = 0;
    for (const auto &batch : s.batches)
        total += batch.count;
    CHECK(total == n);

    Moments left(1), right(1), all(1);
    for (int i = 0; i < 10; ++i)
    {
        Eigen::VectorXd x(1);
        x << i * i;
        (i < 4 ? left : right).add(x);
        all.add(x);
    }
    const Moments merged = Moments::merge(left, right);
    CHECK(merged.count == 10);
    CHECK(merged.mean(0) == Approx(all.mean(0)).epsilon(1e-14));
    CHECK(merged.m2(0) == Approx(all.m2(0)).epsilon(1e-14));
}

TEST_CASE("montecarlo - Gaussian mean band")
{
    const TrialSummary s = run_trials({2025, 1000000, 0}, 3, gaussian_kernel);
    CHECK(std::abs(s.mean(0)) < 0.004);
    CHECK(s.mean(1) == Approx(1.0).margin(0.006));
    CHECK(s.mean(2) == Approx(0.5).margin(0.002));
    CHECK(s.std_error(0) == Approx(1e-3).epsilon(0.01));
}

TEST_CASE("montecarlo - Jackknife of a ratio")
{
    // ratio of means of two independent uniforms: delta method gives the error band
    auto kernel = [](std::uint64_t, RandomStream &rng, Eigen::Ref<Eigen::VectorXd> out)
    {
        out(0) = 1.0 + rng.uniform();
        out(1) = 2.0 + rng.uniform();
    };
    const TrialSummary s = run_trials({5, 64000, 0}, 2, kernel);
    const double jk = jackknife_std_error(s, [](const Eigen::VectorXd &m)
                                          { return m(0) / m(1); });
    const double r = s.mean(0) / s.mean(1);
    const double delta = r * std::sqrt(std::pow(s.std_error(0) / s.mean(0), 2) + std::pow(s.std_error(1) / s.mean(1), 2));
    CHECK(jk == Approx(delta).epsilon(0.35));
    // linear statistic: jackknife reproduces the plain standard error up to batch granularity
    const double lin = jackknife_std_error(s, [](const Eigen::VectorXd &m)
                                           { return m(0); });
    CHECK(lin == Approx(s.std_error(0)).epsilon(0.35));
}

TEST_CASE("montecarlo - Failures report the lowest trial index")
{
    auto failing = [](std::uint64_t i, RandomStream &, Eigen::Ref<Eigen::VectorXd> out)
    {
        if (i == 4321 || i == 9000)
            throw std::runtime_error("bad draw");
        out(0) = 1.0;
    };
    for (int workers : {1, 8})
    {
        try
        {
            run_trials({1, 10000, workers}, 1, failing);
            FAIL("expected TrialFailure");
        }
        catch (const TrialFailure &e)
        {
            CHECK(e.trial() == 4321);
            CHECK(std::string(e.what()).find("bad draw") != std::string::npos);
        }
    }
    auto nan_kernel = [](std::uint64_t i, RandomStream &, Eigen::Ref<Eigen::VectorXd> out)
    { out(0) = i == 17 ? std::nan("") : 0.0; };
    try
    {
        run_trials({1, 100, 2}, 1, nan_kernel);
        FAIL("expected TrialFailure");
    }
    catch (const TrialFailure &e)
    {
        CHECK(e.trial() == 17);
    }
    CHECK_THROWS_AS(run_trials({1, 1, 1}, 1, nan_kernel), std::invalid_argument);
    CHECK_THROWS_AS(run_trials({1, 10, 1}, 0, nan_kernel), std::invalid_argument);
}

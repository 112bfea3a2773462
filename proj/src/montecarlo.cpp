// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "mixadc/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "mixadc/errors.hpp"

namespace mixadc {
namespace {

constexpr std::uint64_t kBatches = 32;
constexpr std::uint64_t kBlockTrials = 256;

struct Block {
  std::uint64_t first = 0;
  std::uint64_t last = 0;  // one past
  std::size_t batch = 0;
};

// Pairwise reduction over a fixed index order.
Moments tree_merge(const std::vector<Moments>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return Moments::merge(tree_merge(parts, lo, mid), tree_merge(parts, mid, hi));
}

}  // namespace

Moments::Moments(Eigen::Index dimension)
    : mean(Eigen::VectorXd::Zero(dimension)), m2(Eigen::VectorXd::Zero(dimension)) {}

void Moments::add(const Eigen::VectorXd& x) {
  ++count;
  const Eigen::VectorXd delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta.cwiseProduct(x - mean);
}

Moments Moments::merge(const Moments& a, const Moments& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  Moments out;
  out.count = a.count + b.count;
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double n = static_cast<double>(out.count);
  const Eigen::VectorXd delta = b.mean - a.mean;
  out.mean = a.mean + delta * (nb / n);
  out.m2 = a.m2 + b.m2 + delta.cwiseAbs2() * (na * nb / n);
  return out;
}

TrialSummary run_trials(const TrialPlan& plan, Eigen::Index dimension, const TrialKernel& kernel) {
  if (plan.trials < 2) throw std::invalid_argument("run_trials: need at least two trials");
  if (dimension < 1) throw std::invalid_argument("run_trials: record dimension must be positive");

  // Batches and blocks depend on the trial count only.
  const std::uint64_t batches = std::min(kBatches, plan.trials);
  std::vector<Block> blocks;
  std::vector<std::size_t> batch_begin;
  for (std::uint64_t j = 0; j < batches; ++j) {
    const std::uint64_t lo = j * plan.trials / batches;
    const std::uint64_t hi = (j + 1) * plan.trials / batches;
    batch_begin.push_back(blocks.size());
    for (std::uint64_t s = lo; s < hi; s += kBlockTrials)
      blocks.push_back({s, std::min(hi, s + kBlockTrials), static_cast<std::size_t>(j)});
  }
  batch_begin.push_back(blocks.size());

  std::vector<Moments> block_moments(blocks.size(), Moments(dimension));
  const std::uint64_t none = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> failed_trial(blocks.size(), none);
  std::vector<std::string> failed_what(blocks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};

  auto worker = [&]() {
    Eigen::VectorXd record(dimension);
    for (std::size_t b = next.fetch_add(1); b < blocks.size() && !abort.load(); b = next.fetch_add(1)) {
      for (std::uint64_t t = blocks[b].first; t < blocks[b].last; ++t) {
        try {
          RandomStream rng(plan.seed, t);
          record.setZero();
          kernel(t, rng, record);
          if (!record.allFinite()) throw NumericFailure("kernel produced a non-finite record");
        } catch (const std::exception& e) {
          failed_trial[b] = t;
          failed_what[b] = e.what();
          abort.store(true);
          break;
        }
        block_moments[b].add(record);
      }
    }
  };

  unsigned workers = plan.workers > 0 ? static_cast<unsigned>(plan.workers) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Report the lowest failing index among the blocks that ran.
  std::size_t worst = blocks.size();
  for (std::size_t b = 0; b < blocks.size(); ++b)
    if (failed_trial[b] != none && (worst == blocks.size() || failed_trial[b] < failed_trial[worst])) worst = b;
  if (worst != blocks.size()) throw TrialFailure(failed_trial[worst], failed_what[worst]);

  TrialSummary summary;
  summary.trials = plan.trials;
  for (std::uint64_t j = 0; j < batches; ++j)
    summary.batches.push_back(tree_merge(block_moments, batch_begin[j], batch_begin[j + 1]));
  const Moments total = tree_merge(summary.batches, 0, summary.batches.size());
  const double n = static_cast<double>(total.count);
  summary.mean = total.mean;
  summary.variance = total.m2 / (n - 1.0);
  summary.std_error = (summary.variance / n).cwiseSqrt();
  return summary;
}

double jackknife_std_error(const TrialSummary& summary,
                           const std::function<double(const Eigen::VectorXd&)>& statistic) {
  const std::size_t groups = summary.batches.size();
  if (groups < 2) return 0.0;
  const double n = static_cast<double>(summary.trials);
  const Eigen::VectorXd total = summary.mean * n;
  std::vector<double> loo(groups);
  double avg = 0.0;
  for (std::size_t j = 0; j < groups; ++j) {
    const double nj = static_cast<double>(summary.batches[j].count);
    loo[j] = statistic((total - summary.batches[j].mean * nj) / (n - nj));
    avg += loo[j];
  }
  avg /= static_cast<double>(groups);
  double ss = 0.0;
  for (double v : loo) ss += (v - avg) * (v - avg);
  const double g = static_cast<double>(groups);
  return std::sqrt((g - 1.0) / g * ss);
}

}  // namespace mixadc

// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
//
//   mixadc run --figure F9 --snr -20:20:5 --trials 1000 --out results
//   mixadc optimize --scheme joint-as --detector zf --snr 0
#include <charconv>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mixadc/experiments.hpp"

namespace {

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw CLI::ValidationError("not a number: " + s);
  return v;
}

// "a:b:step", inclusive of b up to rounding
std::vector<double> parse_range(const std::string& text) {
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) throw CLI::ValidationError("--snr expects a:b:step");
  const double a = to_double(text.substr(0, c1));
  const double b = to_double(text.substr(c1 + 1, c2 - c1 - 1));
  const double step = to_double(text.substr(c2 + 1));
  if (!(step > 0.0) || b < a) throw CLI::ValidationError("--snr needs a <= b and step > 0");
  std::vector<double> out;
  const long n = static_cast<long>((b - a) / step + 1e-9);
  for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
  return out;
}

mixadc::SystemConfig merge_config(const mixadc::SystemConfig& base, const std::string& path) {
  return path.empty() ? base : mixadc::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-ADC massive MIMO uplink: figure runs and power-split optimization"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Compute one figure and write <figure>.csv plus <figure>.meta.json");
  std::string figure;
  std::string snr_range;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string config_path;
  bool exact_cqd = false;
  bool no_power_opt = false;
  int workers = 0;
  std::vector<int> t_list;
  std::vector<int> n_list;
  run->add_option("--figure", figure, "Figure id, e.g. F9 or F9_ZF_SNR")->required();
  run->add_option("--snr", snr_range, "SNR grid a:b:step in dB (SNR curve set for T and N sweeps)");
  run->add_option("--trials", trials, "Monte Carlo trials per point")->check(CLI::Range(std::uint64_t{100}, std::uint64_t{100000000}));
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--config", config_path, "JSON system configuration (M, K, eta, sigma_n2, beta)")->check(CLI::ExistingFile);
  run->add_flag("--exact-cqd", exact_cqd, "Per-draw arcsine-law quantization noise in the data phase");
  run->add_flag("--no-power-opt", no_power_opt, "Use p_t = p_d = P_ave instead of the optimized split");
  run->add_option("--workers", workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  run->add_option("--T", t_list, "Coherence interval list")->delimiter(',');
  run->add_option("--N", n_list, "High-resolution ADC count list")->delimiter(',');

  // optimize
  auto* opt = app.add_subcommand("optimize", "Optimize the training/data power split for one architecture");
  std::string scheme;
  std::string detector_name = "mrc";
  double snr = 0.0;
  int o_m = 0;
  int o_n = -1;
  int o_t = 0;
  std::string o_config;
  std::uint64_t o_trials = 1000;
  std::uint64_t o_seed = 1;
  opt->add_option("--scheme", scheme,
                  "joint-as, joint-fixed, joint-subarray, fullres-fixed, non-rr, non-rr-5bit, one-bit, uniform-<b>bit")
      ->required();
  opt->add_option("--detector", detector_name, "mrc or zf")->check(CLI::IsMember({"mrc", "zf"}));
  opt->add_option("--snr", snr, "P_ave / noise in dB");
  opt->add_option("--M", o_m, "Antennas");
  opt->add_option("--N", o_n, "High-resolution ADCs");
  opt->add_option("--T", o_t, "Coherence interval");
  opt->add_option("--config", o_config, "JSON system configuration")->check(CLI::ExistingFile);
  opt->add_option("--trials", o_trials, "Monte Carlo trials for ZF evaluation");
  opt->add_option("--seed", o_seed, "Master seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const mixadc::FigureId id = mixadc::parse_figure_id(figure);
      mixadc::FigureSpec spec = mixadc::FigureSpec::defaults(id);
      spec.base = merge_config(spec.base, config_path);
      if (!snr_range.empty()) spec.snr_db = parse_range(snr_range);
      if (!t_list.empty()) spec.coherence = t_list;
      if (!n_list.empty()) spec.highres = n_list;
      spec.trials = trials;
      spec.seed = seed;
      spec.workers = workers;
      spec.exact_cqd = exact_cqd;
      if (no_power_opt) spec.power_opt = false;
      const auto result = mixadc::run_figure(spec);
      const auto path = mixadc::write_figure(result, id, out_dir);
      std::cout << path.string() << "\n";
      return 0;
    }

    mixadc::SystemConfig base = mixadc::FigureSpec::defaults(mixadc::FigureId::kF8MrcSnr).base;
    base = merge_config(base, o_config);
    if (o_m > 0) base.antennas = o_m;
    if (o_n >= 0) base.highres = o_n;
    if (o_t > 0) base.coherence = o_t;
    base = base.with_snr_db(snr);
    const auto arch = mixadc::Architecture::from_name(scheme);
    const auto detector = detector_name == "zf" ? mixadc::Detector::kZf : mixadc::Detector::kMrc;
    const auto split = mixadc::optimize_power_split(base, arch, detector);
    const auto report = mixadc::evaluate_architecture(arch.apply(base).with_powers(split.train_power, split.data_power),
                                                      arch, detector, {o_trials, o_seed, 0, false});
    nlohmann::json j{{"scheme", scheme},
                     {"detector", mixadc::to_string(detector)},
                     {"snr_db", snr},
                     {"config", nlohmann::json::parse(mixadc::config_to_json(arch.apply(base)))},
                     {"fraction", split.fraction},
                     {"p_t", split.train_power},
                     {"p_d", split.data_power},
                     {"eta_eff", split.eta_eff},
                     {"objective_sum_se", split.sum_se},
                     {"sum_se", report.sum_se},
                     {"method", mixadc::to_string(report.method)}};
    if (report.method == mixadc::SeMethod::kMonteCarlo) j["sum_se_stderr"] = report.sum_se_std_error;
    std::cout << j.dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "mixadc: " << e.what() << "\n";
    return 1;
  }
}

// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include "mixadc/experiments.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ios>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mixadc/errors.hpp"
#include "mixadc/montecarlo.hpp"
#include "mixadc/orderstats.hpp"
#include "mixadc/quantization.hpp"

namespace mixadc {
namespace {

using nlohmann::json;

constexpr std::array<const char*, 12> kFigureNames = {
    "F4_EST_ERROR", "F5_WEIGHTS", "F6_MRC_AS",   "F7_ZF_AS",    "F8_MRC_SNR", "F9_ZF_SNR",
    "F10_MRC_T",    "F11_ZF_T",   "F12_MRC_COMP", "F13_ZF_COMP", "F14_MRC_N",  "F15_ZF_N",
};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string label(const std::string& head, const std::vector<std::string>& parts) {
  std::string out = head;
  for (const auto& p : parts) out += ", " + p;
  return out;
}

std::string snr_tag(double snr) { return "SNR=" + format_number(snr) + " dB"; }

int eta_eff_of(const SystemConfig& config, const Architecture& arch) {
  return arch.uniform_bits > 0 ? config.pilot_length : training_length(config, arch.training);
}

double hardened_power(const SystemConfig& c) { return c.users * c.data_power + c.noise_power; }

// Per-row estimate variance (M x K) and referred quantization noise (M) with
// the high-resolution ADCs on the last N antennas.
struct Profile {
  Eigen::MatrixXd s;
  Eigen::VectorXd d;
};

Profile architecture_profile(const SystemConfig& c, const Architecture& arch) {
  Profile pr;
  const double hard = hardened_power(c);
  if (arch.uniform_bits > 0) {
    const double a0 = aqnm_alpha(arch.uniform_bits).alpha0;
    pr.s = Eigen::MatrixXd::Constant(c.antennas, c.users, aqnm_estimate_variance(c, a0));
    pr.d = Eigen::VectorXd::Constant(c.antennas, (1.0 - a0) / a0 * hard);
    return pr;
  }
  pr.s = row_estimate_variance(c, arch.training);
  const int first_hr = c.antennas - c.highres;
  const double a0 = arch.highres_alpha0;
  if (arch.training == TrainingScheme::kNonRoundRobin && a0 < 1.0)
    pr.s.bottomRows(c.highres).setConstant(aqnm_estimate_variance(c, a0));
  pr.d.resize(c.antennas);
  for (int m = 0; m < c.antennas; ++m)
    pr.d(m) = m >= first_hr ? (1.0 - a0) / a0 * hard : (std::numbers::pi / 2.0 - 1.0) * hard;
  return pr;
}

SeReport closed_form_report_for(const SystemConfig& c, const Architecture& arch, Detector detector) {
  const int eta_eff = eta_eff_of(c, arch);
  const Profile pr = architecture_profile(c, arch);
  const bool selected = arch.selection != Selection::kFixed && arch.uniform_bits == 0;
  if (detector == Detector::kMrc) {
    if (arch.uniform_bits > 0) return se_uniform_mrc(c, arch.uniform_bits);
    if (arch.training == TrainingScheme::kNonRoundRobin) return se_mrc_profile(c, pr.s, pr.d, eta_eff);
    const Eigen::VectorXd s = pr.s.row(0).transpose();
    return selected ? se_mrc_selection(c, s, eta_eff) : se_mrc_mixed(c, s, eta_eff);
  }
  // ZF surrogate for the power split only
  double d = pr.d.mean();
  if (selected) {
    const double share = chi_sum_lowest(c.antennas - c.highres, c.antennas, c.users) / (c.antennas * c.users);
    d = (std::numbers::pi / 2.0 - 1.0) * hardened_power(c) * share;
  }
  const double p = c.data_power;
  Eigen::VectorXd sqinr(c.users);
  for (int k = 0; k < c.users; ++k) {
    const double s = pr.s.col(k).mean();
    sqinr(k) = p * (c.antennas - c.users) * s / (p * c.users * (1.0 - s) + c.noise_power + d);
  }
  return closed_form_report(sqinr, eta_eff, c.coherence);
}

}  // namespace

const char* to_string(FigureId id) noexcept { return kFigureNames[static_cast<std::size_t>(id)]; }

std::vector<FigureId> all_figures() {
  std::vector<FigureId> ids;
  for (std::size_t i = 0; i < kFigureNames.size(); ++i) ids.push_back(static_cast<FigureId>(i));
  return ids;
}

FigureId parse_figure_id(const std::string& text) {
  const std::string t = lower(text);
  for (std::size_t i = 0; i < kFigureNames.size(); ++i) {
    const std::string full = lower(kFigureNames[i]);
    const std::string shortname = full.substr(0, full.find('_'));
    if (t == full || t == shortname || "f" + t == shortname) return static_cast<FigureId>(i);
  }
  throw std::invalid_argument("unknown figure id: " + text);
}

Architecture Architecture::from_name(const std::string& name) {
  Architecture a;
  a.name = name;
  if (name == "joint-as") {
    a.selection = Selection::kGlobal;
  } else if (name == "joint-fixed") {
  } else if (name == "joint-subarray") {
    a.selection = Selection::kSubarray;
  } else if (name == "fullres-fixed") {
    a.training = TrainingScheme::kFullResRR;
  } else if (name == "non-rr") {
    a.training = TrainingScheme::kNonRoundRobin;
  } else if (name == "non-rr-5bit") {
    a.training = TrainingScheme::kNonRoundRobin;
    a.highres_alpha0 = aqnm_alpha(5).alpha0;
  } else if (name == "one-bit") {
    a.training = TrainingScheme::kOneBitOnly;
    a.highres = 0;
  } else if (name.rfind("uniform-", 0) == 0 && name.size() > 11 && name.substr(name.size() - 3) == "bit") {
    const std::string digits = name.substr(8, name.size() - 11);
    int bits = 0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), bits);
    if (res.ec != std::errc() || res.ptr != digits.data() + digits.size() || bits < 1)
      throw std::invalid_argument("bad uniform architecture name: " + name);
    a.uniform_bits = bits;
    a.training = TrainingScheme::kOneBitOnly;
    a.highres = 0;
  } else {
    throw std::invalid_argument("unknown architecture: " + name);
  }
  return a;
}

SystemConfig Architecture::apply(const SystemConfig& base) const {
  SystemConfig c = base;
  if (antennas > 0) c.antennas = antennas;
  if (highres >= 0) c.highres = highres;
  c.validate();
  return c;
}

PowerSplit split_from_fraction(double fraction, double p_ave, int coherence, int eta_eff) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split_from_fraction: need 0 < f < 1");
  if (eta_eff <= 0 || eta_eff >= coherence) throw std::invalid_argument("split_from_fraction: need 0 < eta_eff < T");
  PowerSplit s;
  s.fraction = fraction;
  s.eta_eff = eta_eff;
  const double energy = p_ave * coherence;
  s.train_power = fraction * energy / eta_eff;
  s.data_power = (1.0 - fraction) * energy / (coherence - eta_eff);
  return s;
}

double closed_form_sum_se(const SystemConfig& config, const Architecture& arch, Detector detector) {
  return closed_form_report_for(config, arch, detector).sum_se;
}

PowerSplit optimize_power_split(const SystemConfig& config, const Architecture& arch, Detector detector) {
  const SystemConfig c = arch.apply(config);
  const int eta_eff = eta_eff_of(c, arch);
  const int T = c.coherence;
  if (eta_eff >= T) throw std::invalid_argument("optimize_power_split: training fills the coherence interval");
  auto objective = [&](double f) {
    const PowerSplit s = split_from_fraction(f, c.power, T, eta_eff);
    return closed_form_sum_se(c.with_powers(s.train_power, s.data_power), arch, detector);
  };

  // Coarse scan for a bracket, then golden-section refinement.
  constexpr int kGrid = 64;
  int best = 1;
  double best_value = -1.0;
  for (int i = 1; i < kGrid; ++i) {
    const double v = objective(static_cast<double>(i) / kGrid);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double a = (best - 1.0) / kGrid;
  double b = (best + 1.0) / kGrid;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = objective(std::max(x1, 1e-12));
  double f2 = objective(std::min(x2, 1.0 - 1e-12));
  while (b - a > 1e-6 * 0.5 * (a + b)) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = objective(std::min(x2, 1.0 - 1e-12));
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = objective(std::max(x1, 1e-12));
    }
  }
  double f = f1 > f2 ? x1 : x2;
  double value = std::max(f1, f2);
  if (best_value > value) {
    f = static_cast<double>(best) / kGrid;
    value = best_value;
  }
  PowerSplit out = split_from_fraction(f, c.power, T, eta_eff);
  out.sum_se = value;
  return out;
}

SeReport evaluate_architecture(const SystemConfig& config, const Architecture& arch, Detector detector,
                               const EvalOptions& options) {
  const SystemConfig c = arch.apply(config);
  const bool closed = detector == Detector::kMrc && (arch.selection != Selection::kSubarray || arch.uniform_bits > 0);
  if (closed) return closed_form_report_for(c, arch, detector);

  TrialPlan plan{options.seed, options.trials, options.workers};
  if (arch.uniform_bits > 0) return se_uniform_zf(c, arch.uniform_bits, plan);

  SqinrOptions o;
  o.detector = detector;
  o.selection = arch.selection;
  o.scheme = arch.training;
  o.exact_cqd = options.exact_cqd;
  o.highres_alpha0 = arch.highres_alpha0;
  o.plan = plan;
  if (arch.highres_alpha0 < 1.0) {
    // multi-bit training has no simulated estimator here; draw from its Gaussian model
    o.source = EstimateSource::kGaussianModel;
    o.model_variance = architecture_profile(c, arch).s;
  }
  return sqinr_empirical(c, o);
}

FigureSpec FigureSpec::defaults(FigureId id) {
  FigureSpec s;
  s.id = id;
  s.base = SystemConfig::make(100, 20, 10, 400, 10, 0.0);
  s.snr_db.clear();
  for (int v = -20; v <= 20; v += 5) s.snr_db.push_back(v);
  s.coherence = {400};
  s.highres = {20};
  switch (id) {
    case FigureId::kF4EstError:
      s.highres = {20, 10};
      s.power_opt = false;
      break;
    case FigureId::kF5Weights:
      s.highres = {50, 20, 10};
      s.power_opt = false;
      break;
    case FigureId::kF6MrcAs:
    case FigureId::kF7ZfAs: break;
    case FigureId::kF8MrcSnr:
    case FigureId::kF9ZfSnr:
      s.highres = {10, 20};
      s.coherence = {400, 1000};
      break;
    case FigureId::kF10MrcT:
    case FigureId::kF11ZfT:
      s.snr_db = {-10, 0, 10};
      s.coherence.clear();
      for (int t = 100; t <= 2000; t += 100) s.coherence.push_back(t);
      break;
    case FigureId::kF12MrcComp:
    case FigureId::kF13ZfComp: s.coherence = {400, 1000}; break;
    case FigureId::kF14MrcN:
    case FigureId::kF15ZfN:
      s.snr_db = {-10, 0, 10};
      s.coherence = {1000};
      s.highres = {10, 20, 25, 50, 100};
      break;
  }
  return s;
}

void FigureSpec::validate() const {
  if (snr_db.empty() || coherence.empty() || highres.empty()) throw std::invalid_argument("FigureSpec: empty grid");
  if (trials < 100) throw std::invalid_argument("FigureSpec: need at least 100 trials");
  base.validate();
}

namespace {

struct Curve {
  std::string name;
  Architecture arch;
  int highres = 0;
  int coherence = 0;
  double snr = 0.0;  // used when x is not the SNR
};

class FigureRunner {
 public:
  explicit FigureRunner(const FigureSpec& spec) : spec_(spec), name_(to_string(spec.id)) {}

  FigureResult run() {
    switch (spec_.id) {
      case FigureId::kF4EstError: estimation_error(); break;
      case FigureId::kF5Weights: weights(); break;
      default: spectral_efficiency(); break;
    }
    json meta;
    meta["figure"] = name_;
    meta["seed"] = spec_.seed;
    meta["trials"] = spec_.trials;
    meta["workers"] = spec_.workers;
    meta["exact_cqd"] = spec_.exact_cqd;
    meta["power_optimization"] = spec_.power_opt;
    meta["base_config"] = json::parse(config_to_json(spec_.base));
    meta["grid"] = {{"snr_db", spec_.snr_db}, {"T", spec_.coherence}, {"N", spec_.highres}};
    meta["pilot_length"] = "eta fixed at the configured value; only the power split is optimized";
    meta["random_numbers"] = "every point of a curve reuses the master seed (common random numbers)";
    meta["curves"] = curves_;
    meta["points"] = points_;
    return {std::move(rows_), meta.dump(2)};
  }

 private:
  void add_row(const std::string& curve, const std::string& x_name, double x, double y, std::optional<double> se) {
    rows_.push_back({name_, curve, x_name, x, y, se});
  }

  SystemConfig base_with(int highres, int coherence, double snr) const {
    SystemConfig c = spec_.base;
    c.highres = highres;
    c.coherence = coherence;
    return c.with_snr_db(snr);
  }

  void estimation_error() {
    const int T = spec_.coherence.front();
    const int K = spec_.base.users;
    const int M = spec_.base.antennas;
    struct Est {
      std::string name;
      std::function<double(const SystemConfig&)> value;
      int highres;
      int eta;
    };
    std::vector<Est> list;
    auto err = [](const EstimationResult& r, const SystemConfig& c) { return r.var_err(0) / c.beta[0]; };
    list.push_back({"One-bit, eta=K",
                    [&](const SystemConfig& c) { return err(onebit_variances(c, generate_pilots(c.pilot_length, K)), c); },
                    0, K});
    for (int n : spec_.highres)
      list.push_back({"One-bit, eta=(M/N)K, N=" + std::to_string(n),
                      [&](const SystemConfig& c) { return err(onebit_variances(c, generate_pilots(c.pilot_length, K)), c); },
                      0, (M / n) * K});
    list.push_back({"Full res",
                    [&](const SystemConfig& c) { return err(fullres_variances(c, generate_pilots(c.pilot_length, K)), c); },
                    spec_.highres.front(), K});
    for (int n : spec_.highres)
      list.push_back({"Joint, N=" + std::to_string(n),
                      [&](const SystemConfig& c) { return err(joint_variances(c, generate_pilots(c.pilot_length, K)), c); },
                      n, K});
    for (int n : spec_.highres)
      list.push_back(
          {"Joint AQNM, N=" + std::to_string(n),
           [&](const SystemConfig& c) { return err(joint_variances(c, generate_pilots(c.pilot_length, K), true), c); },
           n, K});

    for (const auto& e : list) {
      curves_.push_back({{"name", e.name}, {"method", "CLOSED_FORM"}, {"N", e.highres}, {"eta", e.eta}, {"T", T}});
      for (double snr : spec_.snr_db) {
        SystemConfig c = base_with(e.highres, std::max(T, e.eta), snr);
        c.pilot_length = e.eta;
        add_row(e.name, "snr_db", snr, e.value(c), std::nullopt);
      }
    }

    // Simulated estimators for comparison with the closed forms.
    struct Sim {
      std::string name;
      TrainingScheme scheme;
      int highres;
    };
    const std::vector<Sim> sims = {{"One-bit, eta=K (simulation)", TrainingScheme::kOneBitOnly, 0},
                                   {"Joint, N=" + std::to_string(spec_.highres.front()) + " (simulation)",
                                    TrainingScheme::kJointRR, spec_.highres.front()}};
    for (const auto& sim : sims) {
      curves_.push_back({{"name", sim.name}, {"method", "MONTE_CARLO"}, {"N", sim.highres}, {"eta", K}, {"T", T}});
      for (double snr : spec_.snr_db) {
        SystemConfig c = base_with(sim.highres, T, snr);
        c.pilot_length = K;
        const PilotMatrix pilots = generate_pilots(K, K);
        auto kernel = [&](std::uint64_t, RandomStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
          const ChannelMatrix ch = draw_channel(c, rng);
          const TrainingObservations obs = simulate_round_robin(ch, c, pilots, sim.scheme, rng);
          const Eigen::MatrixXcd ghat = sim.scheme == TrainingScheme::kOneBitOnly
                                            ? estimate_onebit(obs.ybank.front(), c, pilots).ghat
                                            : estimate_joint(obs, c, pilots).ghat;
          double acc = 0.0;
          for (int k = 0; k < K; ++k) acc += (ghat.col(k) - ch.g.col(k)).squaredNorm() / c.beta[static_cast<std::size_t>(k)];
          out(0) = acc / (static_cast<double>(c.antennas) * K);
        };
        const TrialSummary sum = run_trials({spec_.seed, spec_.trials, spec_.workers}, 1, kernel);
        add_row(sim.name, "snr_db", snr, sum.mean(0), sum.std_error(0));
      }
    }
  }

  void weights() {
    const int M = spec_.base.antennas;
    const int T = spec_.coherence.front();
    for (int n : spec_.highres) {
      const std::string tag = "M/N=" + std::to_string(M / n);
      curves_.push_back({{"name", "w_inf, " + tag}, {"method", "CLOSED_FORM"}, {"N", n}});
      curves_.push_back({{"name", "w_1, " + tag}, {"method", "CLOSED_FORM"}, {"N", n}});
      for (double snr : spec_.snr_db) {
        SystemConfig c = base_with(n, std::max(T, (M / n) * spec_.base.pilot_length), snr);
        const JointWeights w = joint_weights(c, generate_pilots(c.pilot_length, c.users));
        add_row("w_inf, " + tag, "snr_db", snr, w.w_inf(0), std::nullopt);
        add_row("w_1, " + tag, "snr_db", snr, w.w_one(0), std::nullopt);
      }
    }
  }

  Detector detector() const {
    switch (spec_.id) {
      case FigureId::kF7ZfAs:
      case FigureId::kF9ZfSnr:
      case FigureId::kF11ZfT:
      case FigureId::kF13ZfComp:
      case FigureId::kF15ZfN: return Detector::kZf;
      default: return Detector::kMrc;
    }
  }

  void evaluate_point(const Curve& curve, const SystemConfig& c, const std::string& x_name, double x) {
    const Detector det = detector();
    SystemConfig point = curve.arch.apply(c);
    json pm{{"curve", curve.name}, {"x", x}};
    if (spec_.power_opt) {
      const PowerSplit split = optimize_power_split(point, curve.arch, det);
      point = point.with_powers(split.train_power, split.data_power);
      pm["fraction"] = split.fraction;
    }
    pm["p_t"] = point.train_power;
    pm["p_d"] = point.data_power;
    const SeReport r = evaluate_architecture(point, curve.arch, det,
                                             {spec_.trials, spec_.seed, spec_.workers, spec_.exact_cqd});
    pm["method"] = to_string(r.method);
    pm["eta_eff"] = r.eta_eff;
    points_.push_back(pm);
    add_row(curve.name, x_name, x, r.sum_se,
            r.method == SeMethod::kMonteCarlo ? std::optional<double>(r.sum_se_std_error) : std::nullopt);
  }

  void describe(const Curve& curve) {
    const Detector det = detector();
    const Architecture& a = curve.arch;
    const bool closed = det == Detector::kMrc && (a.selection != Selection::kSubarray || a.uniform_bits > 0);
    json j{{"name", curve.name},
           {"architecture", a.name},
           {"training", to_string(a.training)},
           {"selection", to_string(a.selection)},
           {"detector", to_string(det)},
           {"method", closed ? "CLOSED_FORM" : "MONTE_CARLO"},
           {"M", a.antennas > 0 ? a.antennas : spec_.base.antennas}};
    if (a.uniform_bits > 0) {
      j["uniform_bits"] = a.uniform_bits;
      j["alpha0"] = aqnm_alpha(a.uniform_bits).alpha0;
    } else {
      j["N"] = a.highres >= 0 ? a.highres : curve.highres;
      j["highres_convention"] = a.highres_alpha0 < 1.0 ? "AQNM 5-bit (alpha0=" + format_number(a.highres_alpha0) + ")"
                                                       : "ideal (unquantized)";
    }
    if (det == Detector::kZf && spec_.power_opt)
      j["power_split_objective"] = "ZF surrogate p(M-K)s/(pK(1-s)+noise+d) with row-averaged s and d";
    if (a.selection == Selection::kSubarray && spec_.power_opt)
      j["power_split_objective"] = "antenna-selection closed form (global selection)";
    if (curve.coherence > 0) j["T"] = curve.coherence;
    curves_.push_back(j);
  }

  Architecture named(const std::string& arch_name, int antennas = 0) {
    Architecture a = Architecture::from_name(arch_name);
    if (antennas > 0) a.antennas = antennas;
    return a;
  }

  void spectral_efficiency() {
    std::vector<Curve> curves;
    auto add = [&](std::string name, Architecture a, int n, int t, double snr = 0.0) {
      curves.push_back({std::move(name), std::move(a), n, t, snr});
    };
    const auto nt = [](int n, int t) { return std::vector<std::string>{"N=" + std::to_string(n), "T=" + std::to_string(t)}; };

    switch (spec_.id) {
      case FigureId::kF6MrcAs:
      case FigureId::kF7ZfAs: {
        const int n = spec_.highres.front();
        const int t = spec_.coherence.front();
        add("Joint with AS", named("joint-as"), n, t);
        add("Joint without AS", named("joint-fixed"), n, t);
        add("Joint Subarray AS", named("joint-subarray"), n, t);
        add("Not Joint without AS", named("fullres-fixed"), n, t);
        break;
      }
      case FigureId::kF8MrcSnr:
      case FigureId::kF9ZfSnr:
        for (int t : spec_.coherence) {
          for (int n : spec_.highres) {
            add(label("Joint with AS", nt(n, t)), named("joint-as"), n, t);
            add(label("Non-round-robin", nt(n, t)), named("non-rr"), n, t);
          }
          add(label("One-bit", {"T=" + std::to_string(t)}), named("one-bit"), 0, t);
        }
        break;
      case FigureId::kF10MrcT:
      case FigureId::kF11ZfT: {
        const int n = spec_.highres.front();
        for (double snr : spec_.snr_db) {
          add(label("Joint with AS", {snr_tag(snr)}), named("joint-as"), n, 0, snr);
          add(label("Non-round-robin", {snr_tag(snr)}), named("non-rr"), n, 0, snr);
          add(label("One-bit", {snr_tag(snr)}), named("one-bit"), 0, 0, snr);
        }
        break;
      }
      case FigureId::kF12MrcComp:
      case FigureId::kF13ZfComp: {
        const int n = spec_.highres.front();
        for (int t : spec_.coherence) {
          const std::string tt = "T=" + std::to_string(t);
          add(label("Joint with AS (M=100, N=" + std::to_string(n) + ")", {tt}), named("joint-as", 100), n, t);
          add(label("Non-round-robin 5-bit (M=100, N=" + std::to_string(n) + ")", {tt}), named("non-rr-5bit", 100), n, t);
          add(label("One-bit (M=180)", {tt}), named("one-bit", 180), 0, t);
          add(label("Multi-bit 2-bit (M=90)", {tt}), named("uniform-2bit", 90), 0, t);
          add(label("Multi-bit 3-bit (M=60)", {tt}), named("uniform-3bit", 60), 0, t);
        }
        break;
      }
      case FigureId::kF14MrcN:
      case FigureId::kF15ZfN: {
        const int t = spec_.coherence.front();
        for (double snr : spec_.snr_db) {
          add(label("Joint with AS", {snr_tag(snr)}), named("joint-as"), 0, t, snr);
          add(label("Non-round-robin", {snr_tag(snr)}), named("non-rr"), 0, t, snr);
          add(label("One-bit", {snr_tag(snr)}), named("one-bit"), 0, t, snr);
        }
        break;
      }
      default: throw std::invalid_argument("not a spectral-efficiency figure");
    }

    for (const auto& curve : curves) {
      describe(curve);
      switch (spec_.id) {
        case FigureId::kF10MrcT:
        case FigureId::kF11ZfT:
          for (int t : spec_.coherence) evaluate_point(curve, base_with(curve.highres, t, curve.snr), "T", t);
          break;
        case FigureId::kF14MrcN:
        case FigureId::kF15ZfN:
          for (int n : spec_.highres) {
            const int effective_n = curve.arch.highres == 0 ? 0 : n;
            evaluate_point(curve, base_with(effective_n, curve.coherence, curve.snr), "N", n);
          }
          break;
        default:
          for (double snr : spec_.snr_db)
            evaluate_point(curve, base_with(curve.highres, curve.coherence, snr), "snr_db", snr);
          break;
      }
    }
  }

  const FigureSpec& spec_;
  std::string name_;
  std::vector<CsvRow> rows_;
  json curves_ = json::array();
  json points_ = json::array();
};

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_quotes) throw std::invalid_argument("csv: unterminated quote");
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("csv: bad number '" + s + "'");
  return v;
}

constexpr const char* kHeader = "figure,curve,x_name,x_value,y_value,stderr";

}  // namespace

FigureResult run_figure(const FigureSpec& spec) {
  spec.validate();
  return FigureRunner(spec).run();
}

std::string to_csv(const std::vector<CsvRow>& rows) {
  std::string out = std::string(kHeader) + "\n";
  for (const auto& r : rows) {
    out += quote(r.figure) + "," + quote(r.curve) + "," + quote(r.x_name) + "," + format_number(r.x_value) + "," +
           format_number(r.y_value) + "," + (r.std_error ? format_number(*r.std_error) : std::string()) + "\n";
  }
  return out;
}

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::invalid_argument("csv: missing or wrong header");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw std::invalid_argument("csv: expected 6 fields in '" + line + "'");
    CsvRow r{f[0], f[1], f[2], parse_double(f[3]), parse_double(f[4]), std::nullopt};
    if (!f[5].empty()) r.std_error = parse_double(f[5]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::filesystem::path write_figure(const FigureResult& result, FigureId id, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path csv = dir / (std::string(to_string(id)) + ".csv");
  const std::filesystem::path meta = dir / (std::string(to_string(id)) + ".meta.json");
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::ios_base::failure("failed writing " + path.string());
  };
  write(csv, to_csv(result.rows));
  write(meta, result.meta_json + "\n");
  return csv;
}

}  // namespace mixadc

// SPDX-License-Identifier: Apache-2.0
//
// mixadc: mixed-ADC massive MIMO uplink simulation toolkit
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mixadc/errors.hpp"
#include "mixadc/estimation.hpp"
#include "mixadc/experiments.hpp"
#include "mixadc/montecarlo.hpp"
#include "mixadc/orderstats.hpp"
#include "mixadc/quantization.hpp"
#include "mixadc/spectral_efficiency.hpp"
#include "mixadc/sysmodel.hpp"

namespace py = pybind11;
using namespace mixadc;

namespace {

// Empirical per-coefficient MSE of a training scheme's estimator, normalized by beta.
py::tuple simulate_estimation_mse(const SystemConfig& config, TrainingScheme scheme, std::uint64_t trials,
                                  std::uint64_t seed) {
  const PilotMatrix pilots = generate_pilots(config.pilot_length, config.users);
  auto kernel = [&](std::uint64_t, RandomStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
    const ChannelMatrix ch = draw_channel(config, rng);
    const TrainingObservations obs = simulate_round_robin(ch, config, pilots, scheme, rng);
    Eigen::MatrixXcd ghat;
    switch (scheme) {
      case TrainingScheme::kOneBitOnly: ghat = estimate_onebit(obs.ybank.front(), config, pilots).ghat; break;
      case TrainingScheme::kFullResRR: ghat = estimate_fullres_rr(obs, config, pilots).ghat; break;
      case TrainingScheme::kJointRR: ghat = estimate_joint(obs, config, pilots).ghat; break;
      case TrainingScheme::kNonRoundRobin: ghat = estimate_non_round_robin(obs, config, pilots).ghat; break;
    }
    double acc = 0.0;
    for (int k = 0; k < config.users; ++k)
      acc += (ghat.col(k) - ch.g.col(k)).squaredNorm() / config.beta[static_cast<std::size_t>(k)];
    out(0) = acc / (static_cast<double>(config.antennas) * config.users);
  };
  py::gil_scoped_release release;
  const TrialSummary s = run_trials({seed, trials, 0}, 1, kernel);
  py::gil_scoped_acquire acquire;
  return py::make_tuple(s.mean(0), s.std_error(0));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mixed-ADC massive MIMO uplink simulation toolkit";

  py::register_exception<NumericFailure>(m, "NumericFailure", PyExc_ArithmeticError);
  py::register_exception<TrialFailure>(m, "TrialFailure", PyExc_RuntimeError);

  py::enum_<TrainingScheme>(m, "TrainingScheme")
      .value("ONE_BIT", TrainingScheme::kOneBitOnly)
      .value("FULL_RES_RR", TrainingScheme::kFullResRR)
      .value("JOINT_RR", TrainingScheme::kJointRR)
      .value("NON_RR", TrainingScheme::kNonRoundRobin);
  py::enum_<Detector>(m, "Detector").value("MRC", Detector::kMrc).value("ZF", Detector::kZf);
  py::enum_<Selection>(m, "Selection")
      .value("FIXED", Selection::kFixed)
      .value("GLOBAL", Selection::kGlobal)
      .value("SUBARRAY", Selection::kSubarray);
  py::enum_<EstimateSource>(m, "EstimateSource")
      .value("SIMULATED", EstimateSource::kSimulated)
      .value("PERFECT", EstimateSource::kPerfect)
      .value("GAUSSIAN_MODEL", EstimateSource::kGaussianModel);

  py::class_<SystemConfig>(m, "SystemConfig")
      .def(py::init([](int M, int N, int K, int T, int eta, double snr_db) {
             return SystemConfig::make(M, N, K, T, eta, snr_db);
           }),
           py::arg("M") = 100, py::arg("N") = 20, py::arg("K") = 10, py::arg("T") = 400, py::arg("eta") = 10,
           py::arg("snr_db") = 0.0)
      .def_readwrite("antennas", &SystemConfig::antennas)
      .def_readwrite("highres", &SystemConfig::highres)
      .def_readwrite("users", &SystemConfig::users)
      .def_readwrite("coherence", &SystemConfig::coherence)
      .def_readwrite("pilot_length", &SystemConfig::pilot_length)
      .def_readwrite("noise_power", &SystemConfig::noise_power)
      .def_readwrite("beta", &SystemConfig::beta)
      .def_readonly("snr_db", &SystemConfig::snr_db)
      .def_readonly("power", &SystemConfig::power)
      .def_readwrite("train_power", &SystemConfig::train_power)
      .def_readwrite("data_power", &SystemConfig::data_power)
      .def("rounds", &SystemConfig::rounds)
      .def("validate", &SystemConfig::validate)
      .def("with_snr_db", &SystemConfig::with_snr_db)
      .def("with_powers", &SystemConfig::with_powers)
      .def("to_json", [](const SystemConfig& c) { return config_to_json(c); })
      .def_static("from_json", &config_from_json);

  py::class_<EstimationResult>(m, "EstimationResult")
      .def_readonly("ghat", &EstimationResult::ghat)
      .def_readonly("var_est", &EstimationResult::var_est)
      .def_readonly("var_err", &EstimationResult::var_err)
      .def_readonly("sigma_hhat2", &EstimationResult::sigma_hhat2)
      .def_readonly("eta_eff", &EstimationResult::eta_eff);
  py::class_<JointWeights>(m, "JointWeights")
      .def_readonly("w_inf", &JointWeights::w_inf)
      .def_readonly("w_one", &JointWeights::w_one)
      .def_readonly("varsigma", &JointWeights::varsigma)
      .def_readonly("rho", &JointWeights::rho)
      .def_readonly("sigma_w2", &JointWeights::sigma_w2);
  py::class_<LloydMaxQuantizer>(m, "LloydMaxQuantizer")
      .def_readonly("thresholds", &LloydMaxQuantizer::thresholds)
      .def_readonly("levels", &LloydMaxQuantizer::levels)
      .def_readonly("distortion", &LloydMaxQuantizer::distortion);
  py::class_<SeReport>(m, "SeReport")
      .def_readonly("sqinr", &SeReport::sqinr)
      .def_readonly("se", &SeReport::se)
      .def_readonly("sum_se", &SeReport::sum_se)
      .def_readonly("eta_eff", &SeReport::eta_eff)
      .def_property_readonly("method", [](const SeReport& r) { return std::string(to_string(r.method)); })
      .def_readonly("trials", &SeReport::trials)
      .def_readonly("sqinr_stderr", &SeReport::sqinr_std_error)
      .def_readonly("se_stderr", &SeReport::se_std_error)
      .def_readonly("sum_se_stderr", &SeReport::sum_se_std_error);
  py::class_<Architecture>(m, "Architecture")
      .def(py::init(&Architecture::from_name), py::arg("name"))
      .def_readwrite("antennas", &Architecture::antennas)
      .def_readwrite("highres", &Architecture::highres)
      .def_readonly("name", &Architecture::name);
  py::class_<PowerSplit>(m, "PowerSplit")
      .def_readonly("fraction", &PowerSplit::fraction)
      .def_readonly("train_power", &PowerSplit::train_power)
      .def_readonly("data_power", &PowerSplit::data_power)
      .def_readonly("eta_eff", &PowerSplit::eta_eff)
      .def_readonly("sum_se", &PowerSplit::sum_se);

  m.def("generate_pilots", [](int eta, int users) { return generate_pilots(eta, users).phi; }, py::arg("eta"),
        py::arg("users"));
  m.def("one_bit_quantize", &one_bit_quantize);
  m.def("arcsine_covariance", &arcsine_covariance);
  m.def("aqnm_alpha", [](int bits) { return aqnm_alpha(bits).alpha0; }, py::arg("bits"));
  m.def("lloyd_max_gaussian", &lloyd_max_gaussian, py::arg("bits"));

  auto pilots_for = [](const SystemConfig& c) { return generate_pilots(c.pilot_length, c.users); };
  m.def("onebit_variances", [=](const SystemConfig& c) { return onebit_variances(c, pilots_for(c)); });
  m.def("fullres_variances", [=](const SystemConfig& c) { return fullres_variances(c, pilots_for(c)); });
  m.def(
      "joint_variances",
      [=](const SystemConfig& c, bool ignore) { return joint_variances(c, pilots_for(c), ignore); }, py::arg("config"),
      py::arg("ignore_correlation") = false);
  m.def(
      "joint_weights", [=](const SystemConfig& c, bool ignore) { return joint_weights(c, pilots_for(c), ignore); },
      py::arg("config"), py::arg("ignore_correlation") = false);
  m.def("correlated_limit_varsigma", &correlated_limit_varsigma);
  m.def("simulate_estimation_mse", &simulate_estimation_mse, py::arg("config"), py::arg("scheme"),
        py::arg("trials") = 10000, py::arg("seed") = 1);

  m.def("gamma_cdf", &gamma_cdf, py::arg("x"), py::arg("K"), py::arg("scale") = 1.0);
  m.def(
      "order_stat_mean", [](int rank, int M, int K, double scale) { return order_stat_mean({rank, M, K, scale}); },
      py::arg("m"), py::arg("M"), py::arg("K"), py::arg("scale") = 1.0);
  m.def("chi_m", &chi_m, py::arg("m"), py::arg("M"), py::arg("K"));

  m.def("rate_wrapper", &rate_wrapper, py::arg("theta"), py::arg("eta_eff"), py::arg("T"));
  m.def("se_mrc_mixed", &se_mrc_mixed);
  m.def("se_mrc_selection", &se_mrc_selection);
  m.def("se_zf_fullres", &se_zf_fullres);
  m.def("se_uniform_mrc", &se_uniform_mrc);
  m.def(
      "se_uniform_zf",
      [](const SystemConfig& c, int bits, std::uint64_t trials, std::uint64_t seed) {
        py::gil_scoped_release release;
        return se_uniform_zf(c, bits, {seed, trials, 0});
      },
      py::arg("config"), py::arg("bits"), py::arg("trials") = 1000, py::arg("seed") = 1);
  m.def("antenna_selection", &antenna_selection, py::arg("hhat"), py::arg("N"), py::arg("mode"));
  m.def(
      "sqinr_empirical",
      [](const SystemConfig& c, Detector detector, Selection selection, TrainingScheme scheme, EstimateSource source,
         bool exact_cqd, std::uint64_t trials, std::uint64_t seed) {
        SqinrOptions o;
        o.detector = detector;
        o.selection = selection;
        o.scheme = scheme;
        o.source = source;
        o.exact_cqd = exact_cqd;
        o.plan = {seed, trials, 0};
        py::gil_scoped_release release;
        return sqinr_empirical(c, o);
      },
      py::arg("config"), py::arg("detector") = Detector::kMrc, py::arg("selection") = Selection::kFixed,
      py::arg("scheme") = TrainingScheme::kJointRR, py::arg("source") = EstimateSource::kSimulated,
      py::arg("exact_cqd") = false, py::arg("trials") = 1000, py::arg("seed") = 1);

  m.def("closed_form_sum_se", &closed_form_sum_se);
  m.def("optimize_power_split", &optimize_power_split);
  m.def(
      "evaluate_architecture",
      [](const SystemConfig& c, const Architecture& a, Detector d, std::uint64_t trials, std::uint64_t seed) {
        py::gil_scoped_release release;
        return evaluate_architecture(c, a, d, {trials, seed, 0, false});
      },
      py::arg("config"), py::arg("arch"), py::arg("detector"), py::arg("trials") = 1000, py::arg("seed") = 1);
  m.def(
      "run_figure",
      [](const std::string& figure, std::optional<std::vector<double>> snr_db, std::uint64_t trials,
         std::uint64_t seed, bool power_opt) {
        FigureSpec spec = FigureSpec::defaults(parse_figure_id(figure));
        if (snr_db) spec.snr_db = *snr_db;
        spec.trials = trials;
        spec.seed = seed;
        spec.power_opt = power_opt;
        FigureResult r;
        {
          py::gil_scoped_release release;
          r = run_figure(spec);
        }
        return py::make_tuple(to_csv(r.rows), r.meta_json);
      },
      "Returns (csv_text, meta_json).", py::arg("figure"), py::arg("snr_db") = py::none(), py::arg("trials") = 1000,
      py::arg("seed") = 1, py::arg("power_opt") = true);
}

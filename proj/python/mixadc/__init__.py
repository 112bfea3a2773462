# SPDX-License-Identifier: Apache-2.0
"""Mixed-ADC massive MIMO uplink simulation toolkit."""

from ._core import (  # noqa: F401
    Architecture,
    Detector,
    EstimateSource,
    EstimationResult,
    JointWeights,
    LloydMaxQuantizer,
    PowerSplit,
    SeReport,
    Selection,
    SystemConfig,
    TrainingScheme,
    antenna_selection,
    aqnm_alpha,
    arcsine_covariance,
    chi_m,
    closed_form_sum_se,
    evaluate_architecture,
    fullres_variances,
    gamma_cdf,
    generate_pilots,
    joint_variances,
    joint_weights,
    lloyd_max_gaussian,
    one_bit_quantize,
    onebit_variances,
    optimize_power_split,
    order_stat_mean,
    correlated_limit_varsigma,
    rate_wrapper,
    run_figure,
    se_mrc_mixed,
    se_mrc_selection,
    se_uniform_mrc,
    se_uniform_zf,
    se_zf_fullres,
    simulate_estimation_mse,
    sqinr_empirical,
)

__version__ = "0.1.0"

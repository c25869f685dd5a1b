"""Goodness-of-fit testing for the gamma distribution on complete and
right-censored lifetime data, built on a fixed-point (Stein-type)
characterization, with parametric-bootstrap and asymptotic-normal decision
rules and a Monte-Carlo study harness."""

from .distributions import (
    AlternativeSpec,
    GammaParams,
    alternative,
    alternative_cdf,
    gamma_cdf,
    gamma_pdf,
    gamma_quantile,
    sample,
)
from .estimators import (
    CensoredSample,
    KaplanMeierCurve,
    ipcw_mean,
    ipcw_weights,
    km_censoring_survival,
    mle_estimates,
    moment_estimates,
    moment_estimates_censored,
)
from .statistics import (
    SteinStatistic,
    be_statistic,
    cvm_statistic,
    hme_statistic,
    kernel_min,
    kernel_ratio,
    ks_statistic,
    stein_statistic,
    u_statistic,
)
from .censored import (
    CensoredSteinStatistic,
    CensoredTestReport,
    censored_gamma_test,
    ipcw_expected_min,
    ipcw_expected_ratio,
    ipcw_less_probability,
    stein_statistic_censored,
    stein_variance_censored,
)
from .resampling import (
    CriticalValues,
    PowerEstimate,
    TestReport,
    bootstrap_critical_values,
    calibrate_censoring_rate,
    complete_gamma_test,
    power_study,
    power_study_censored,
)

__version__ = "0.1.0"

__all__ = [
    "AlternativeSpec",
    "GammaParams",
    "alternative",
    "alternative_cdf",
    "gamma_cdf",
    "gamma_pdf",
    "gamma_quantile",
    "sample",
    "CensoredSample",
    "KaplanMeierCurve",
    "ipcw_mean",
    "ipcw_weights",
    "km_censoring_survival",
    "mle_estimates",
    "moment_estimates",
    "moment_estimates_censored",
    "SteinStatistic",
    "be_statistic",
    "cvm_statistic",
    "hme_statistic",
    "kernel_min",
    "kernel_ratio",
    "ks_statistic",
    "stein_statistic",
    "u_statistic",
    "CensoredSteinStatistic",
    "CensoredTestReport",
    "censored_gamma_test",
    "ipcw_expected_min",
    "ipcw_expected_ratio",
    "ipcw_less_probability",
    "stein_statistic_censored",
    "stein_variance_censored",
    "CriticalValues",
    "PowerEstimate",
    "TestReport",
    "bootstrap_critical_values",
    "calibrate_censoring_rate",
    "complete_gamma_test",
    "power_study",
    "power_study_censored",
    "__version__",
]

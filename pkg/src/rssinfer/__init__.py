"""Distribution function inference from ranked set samples.

Estimators (stratified, moment, NPMLE), their asymptotic covariances, exact
pointwise confidence intervals and Monte Carlo confidence bands.
"""

from ._backend import BACKEND
from .asymptotics import (
    EfficiencyProfile,
    WeightProfile,
    covariance,
    efficiency_bound_M,
    efficiency_profile,
    gamma,
    variance,
    variance_closed_form_k2,
)
from .bands import BandResult, band, estimate_kappa, jps_average_halfwidth, sup_statistic_M
from .beta_rank import RankBetaFamily, family
from .errors import ArgumentError, DomainError, EstimatorUndefinedError, ParseError, RSSError
from .estimators import StepCdf, ecdf, estimate, loglik, loglik_deriv, moment, npmle, stratified, transform_check
from .exact import (
    PointwiseInterval,
    SumBinomialDistribution,
    bound_lower,
    bound_upper,
    cdf_G,
    generalized_beta_cdf,
    interval,
    poisson_binomial,
    pvalue_ge,
    pvalue_le,
    sum_binomial,
)
from .sampling import (
    ImpreciseRanking,
    RankedDataset,
    RankedObservation,
    StratumCounts,
    load_dataset,
    save_dataset,
    simulate_jps,
    simulate_rss,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ArgumentError",
    "BandResult",
    "DomainError",
    "EfficiencyProfile",
    "EstimatorUndefinedError",
    "ImpreciseRanking",
    "ParseError",
    "PointwiseInterval",
    "RSSError",
    "RankBetaFamily",
    "RankedDataset",
    "RankedObservation",
    "StepCdf",
    "StratumCounts",
    "SumBinomialDistribution",
    "WeightProfile",
    "band",
    "bound_lower",
    "bound_upper",
    "cdf_G",
    "covariance",
    "ecdf",
    "efficiency_bound_M",
    "efficiency_profile",
    "estimate",
    "estimate_kappa",
    "family",
    "gamma",
    "generalized_beta_cdf",
    "interval",
    "jps_average_halfwidth",
    "load_dataset",
    "loglik",
    "loglik_deriv",
    "moment",
    "npmle",
    "poisson_binomial",
    "pvalue_ge",
    "pvalue_le",
    "save_dataset",
    "simulate_jps",
    "simulate_rss",
    "stratified",
    "sum_binomial",
    "sup_statistic_M",
    "transform_check",
    "variance",
    "variance_closed_form_k2",
]

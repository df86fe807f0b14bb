"""Unbiased stationary-distribution estimation for mean-field SDEs.

Thin wrapper over the C++ core: model builders, the randomized multilevel
estimator, kernel density estimation and coupling diagnostics.
"""

from ._core import (
    BlowUpError,
    EstimatorConfig,
    Model,
    NeuronParams,
    contraction_trace,
    curie_weiss,
    curie_weiss_stationary,
    estimate_moment,
    expected_cost,
    kde_curve,
    mean_field_ou,
    mle_gaussian,
    neuron3d,
    pmf_horizon,
    pmf_level,
    wasserstein_1d,
)

__all__ = [
    "BlowUpError",
    "EstimatorConfig",
    "Model",
    "NeuronParams",
    "contraction_trace",
    "curie_weiss",
    "curie_weiss_stationary",
    "estimate_moment",
    "expected_cost",
    "kde_curve",
    "mean_field_ou",
    "mle_gaussian",
    "neuron3d",
    "pmf_horizon",
    "pmf_level",
    "wasserstein_1d",
]

"""Zero-bias enhanced Stein couplings over finite discrete distributions.

Layout:

* :mod:`zbest.distributions` - finite laws and atom/segment mixtures, the
  exact-computation substrate.
* :mod:`zbest.coupling` - coupling triples, measure reweighting, zero-bias
  constructions.
* :mod:`zbest.analytics` - Stein-equation solutions, exact and empirical
  Kolmogorov/Wasserstein distances, bound formulas.
* :mod:`zbest.bernoulli` - independent indicator sums end to end.
* :mod:`zbest.lightbulb` / :mod:`zbest.lightbulb_exact` - the lightbulb
  process: sampling, couplings, moments, and exhaustive enumeration.
* :mod:`zbest.experiment` / :mod:`zbest.cli` - the experiment driver and its
  command line.
"""

from .analytics import (
    DistanceMode,
    DistanceReport,
    KOLMOGOROV_DELTA_COEFF,
    TestFunctionFamily,
    empirical_distances,
    kolmogorov_vs_normal,
    normal_cdf,
    stein_solution,
    stein_solution_derivative,
    theorem_bounds,
    wasserstein_vs_normal,
)
from .bernoulli import (
    BernoulliVector,
    bernoulli_bounds,
    exact_pmf,
    exact_zero_bias_law,
    sample_coupling,
)
from .coupling import (
    ZbestTripleLaw,
    bias_by_R,
    exchangeable_pair_triple,
    expected_DG,
    interpolate_sample,
    monotone_sizebias_to_zerobias,
    size_bias_triple,
    square_bias_zero_bias,
    trivial_triple,
    verify_zbest_identity,
    zero_bias_via_DG,
)
from .distributions import (
    FiniteDistribution,
    SegmentMixture,
    zero_bias_density_oracle,
)
from .experiment import ExperimentConfig, ExperimentReport, compute_bn, run
from .lightbulb import (
    CouplingSample,
    LightbulbMoments,
    ToggleMatrix,
    final_states,
    lightbulb_moments,
    sample_configuration,
    sample_dagger_coupling,
    sample_size_bias_coupling,
    swap_toggles,
    zero_bias_sample,
)
from .lightbulb_exact import LightbulbExact, enumerate_exact

__version__ = "0.1.0"

__all__ = [
    "BernoulliVector",
    "CouplingSample",
    "DistanceMode",
    "DistanceReport",
    "ExperimentConfig",
    "ExperimentReport",
    "FiniteDistribution",
    "KOLMOGOROV_DELTA_COEFF",
    "LightbulbExact",
    "LightbulbMoments",
    "SegmentMixture",
    "TestFunctionFamily",
    "ToggleMatrix",
    "ZbestTripleLaw",
    "bernoulli_bounds",
    "bias_by_R",
    "compute_bn",
    "empirical_distances",
    "enumerate_exact",
    "exact_pmf",
    "exact_zero_bias_law",
    "exchangeable_pair_triple",
    "expected_DG",
    "final_states",
    "interpolate_sample",
    "kolmogorov_vs_normal",
    "lightbulb_moments",
    "monotone_sizebias_to_zerobias",
    "normal_cdf",
    "run",
    "sample_configuration",
    "sample_coupling",
    "sample_dagger_coupling",
    "sample_size_bias_coupling",
    "size_bias_triple",
    "square_bias_zero_bias",
    "stein_solution",
    "stein_solution_derivative",
    "swap_toggles",
    "theorem_bounds",
    "trivial_triple",
    "verify_zbest_identity",
    "wasserstein_vs_normal",
    "zero_bias_density_oracle",
    "zero_bias_sample",
    "zero_bias_via_DG",
]

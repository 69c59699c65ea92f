"""Bayesian joint tail-risk estimation for paired measurements with
one-parameter Archimedean (Clayton, Gumbel) copulas."""

__version__ = "0.1.0"

from .copula_core import (
    CopulaModel,
    Family,
    Functional,
    TailSpec,
    copula_cdf,
    copula_density,
    copula_partial_u,
    copula_partial_v,
    generator_d2phi,
    generator_dphi,
    generator_phi,
    independence_baseline,
    log_copula_density,
    tail_risk,
    tail_risk_derivative,
    tail_risk_values,
)
from .inference import (
    CredibleInterval,
    FisherTable,
    PosteriorGrid,
    PriorSpec,
    TailRiskReport,
    ThetaGrid,
    compute_fisher_table,
    delta_method_ci,
    fisher_information_mc,
    fit_posterior,
    fit_tail_risk,
    induced_risk_posterior,
    log_likelihood,
    make_theta_grid,
    mle,
    posterior_grid,
    posterior_summary_theta,
    restricted_jeffreys_prior,
)
from .pseudo_obs import PseudoSample, to_pseudo_observations
from .sampling import CopulaSample, make_rng, sample_dataset, sample_pair
from .sim_harness import SimConfig, SimReport, coverage_study, run_replicate


def load_schema(kind: str) -> dict:
    """JSON schema for ``"fit"`` or ``"simulation"`` reports."""
    import json
    from importlib import resources

    name = {"fit": "fit_report.v1.json", "simulation": "simulation_report.v1.json"}[kind]
    return json.loads(resources.files(__package__).joinpath("schemas", name).read_text(encoding="utf-8"))

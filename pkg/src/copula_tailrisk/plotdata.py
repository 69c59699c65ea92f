"""Plot-ready posterior densities of the tail-risk functionals."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .copula_core import TailSpec, tail_risk_values
from .inference import PosteriorGrid, PosteriorSummary, induced_risk_posterior, risk_is_monotone

__all__ = ["RiskDensity", "risk_posterior_density"]

# nodes whose posterior density is below this fraction of the peak are not emitted
_SUPPORT_CUTOFF = 1e-10


@dataclass(frozen=True)
class RiskDensity:
    values: np.ndarray
    density: np.ndarray
    summary: PosteriorSummary
    method: str
    warning: str | None = None


def _risk_slope(post: PosteriorGrid, spec: TailSpec) -> np.ndarray:
    th = post.nodes
    h = np.maximum(1e-5, 1e-5 * th)
    lo = np.maximum(th - h, th[0])
    hi = np.minimum(th + h, th[-1])
    up = np.asarray(tail_risk_values(post.family, hi, spec.alpha, spec.functional))
    dn = np.asarray(tail_risk_values(post.family, lo, spec.alpha, spec.functional))
    return (up - dn) / (hi - lo)


def _histogram(r: np.ndarray, weights: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray]:
    mass, edges = np.histogram(r, bins=bins, weights=weights, density=True)
    return 0.5 * (edges[1:] + edges[:-1]), mass


def risk_posterior_density(
    post: PosteriorGrid, spec: TailSpec, level: float = 0.95, bins: int = 200
) -> RiskDensity:
    """Posterior density of R_T by change of variables from the theta grid.

    At each node ``p_R(R(theta)) = p(theta) / R'(theta)``. When R_T is not
    monotone on the grid a weighted histogram of R_T values is returned
    instead, with a warning.
    """
    summary = induced_risk_posterior(post, spec, level)
    r = np.atleast_1d(np.asarray(tail_risk_values(post.family, post.nodes, spec.alpha, spec.functional), dtype=float))
    if len(post.nodes) == 1:
        msg = "degenerate one-node grid: emitting a single point mass"
        warnings.warn(msg, stacklevel=2)
        return RiskDensity(r, np.ones(1), summary, "point_mass", msg)
    if not risk_is_monotone(r):
        msg = f"R_{spec.functional.value} is not monotone on the grid; emitting a weighted histogram"
        warnings.warn(msg, stacklevel=2)
        centers, mass = _histogram(r, post.weights, bins)
        return RiskDensity(centers, mass, summary, "weighted_histogram", msg)
    slope = _risk_slope(post, spec)
    keep = (post.density >= _SUPPORT_CUTOFF * post.density.max()) & (slope > 0)
    dens = post.density[keep] / slope[keep]
    return RiskDensity(r[keep], dens, summary, "change_of_variables")


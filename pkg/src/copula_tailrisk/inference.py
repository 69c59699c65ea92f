"""
Grid-based Bayesian inference for the copula parameter
------------------------------------------------------

Likelihood, maximum-likelihood diagnostic, Monte-Carlo Fisher information,
restricted Jeffreys prior, grid posterior, and the posterior induced on the
joint tail-risk functionals.

All posterior integrals are trapezoid sums on a fixed theta grid, so every
summary is a deterministic function of (data, prior, grid).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.stats import norm

from .copula_core import (
    CopulaModel,
    Family,
    Functional,
    TailSpec,
    _log_density,
    independence_baseline,
    tail_risk,
    tail_risk_derivative,
    tail_risk_values,
)
from .pseudo_obs import PseudoSample
from .sampling import RNG_ALGORITHM, make_rng, sample_uv

__all__ = [
    "DEFAULT_THETA_MAX",
    "DEFAULT_PRIOR_SEED",
    "PriorSpec",
    "ThetaGrid",
    "make_theta_grid",
    "refine_theta_grid",
    "FisherTable",
    "JeffreysPrior",
    "PosteriorGrid",
    "CredibleInterval",
    "PosteriorSummary",
    "MleResult",
    "TailRiskReport",
    "log_likelihood",
    "log_likelihood_grid",
    "mle",
    "finite_difference_scores",
    "fisher_information_mc",
    "compute_fisher_table",
    "restricted_jeffreys_prior",
    "trapezoid_weights",
    "posterior_grid",
    "posterior_summary_theta",
    "induced_risk_posterior",
    "delta_method_ci",
    "z_multiplier",
    "fit_posterior",
    "fit_tail_risk",
    "posterior_from_log_terms",
    "risk_is_monotone",
]

DEFAULT_THETA_MAX = 50.0
DEFAULT_PRIOR_SEED = 20180917
FISHER_FORMAT_VERSION = 1

_THETA_MIN = {Family.CLAYTON: 1e-4, Family.GUMBEL: 1.0 + 1e-6}
# log-posterior drop (nats) beyond which grid mass is treated as zero when refining
_REFINE_CUTOFF = 40.0
_BOUNDARY_TOL = 1e-4


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriorSpec:
    """Truncation and Fisher-information settings for one family.

    Parameters
    ----------
    family : Family
    theta_min, theta_max : float
        Truncation bounds of the restricted Jeffreys prior.
    fisher_draws : int
        Monte-Carlo draws per Fisher-table node.
    fd_step : float
        Base finite-difference step ``h0`` for the score.
    fd_relative : bool
        If True the step at ``theta`` is ``max(h0, h0 * theta)``.
    fisher_grid_size : int
        Number of Fisher-table nodes.
    prior_seed : int
        Seed for the Fisher Monte-Carlo draws.
    """

    family: Family
    theta_min: float
    theta_max: float = DEFAULT_THETA_MAX
    fisher_draws: int = 20_000
    fd_step: float = 1e-4
    fd_relative: bool = True
    fisher_grid_size: int = 60
    prior_seed: int = DEFAULT_PRIOR_SEED

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if not self.family.admits(self.theta_min) or not math.isfinite(self.theta_max):
            raise ValueError(f"invalid truncation [{self.theta_min}, {self.theta_max}] for {self.family.value}")
        if not self.theta_min < self.theta_max:
            raise ValueError("theta_min must be smaller than theta_max")
        if self.fisher_grid_size < 2:
            raise ValueError("fisher_grid_size must be at least 2")
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")

    @classmethod
    def for_family(cls, family: Family | str, **overrides) -> PriorSpec:
        family = Family.parse(family)
        overrides.setdefault("theta_min", _THETA_MIN[family])
        return cls(family=family, **overrides)

    def step(self, theta: float) -> float:
        return max(self.fd_step, self.fd_step * theta) if self.fd_relative else self.fd_step

    def cache_key(self) -> dict:
        return {
            "family": self.family.value,
            "theta_min": repr(float(self.theta_min)),
            "theta_max": repr(float(self.theta_max)),
            "grid_size": str(self.fisher_grid_size),
            "draws": str(self.fisher_draws),
            "fd_step": repr(float(self.fd_step)),
            "fd_relative": "true" if self.fd_relative else "false",
            "seed": str(self.prior_seed),
            "rng": RNG_ALGORITHM,
        }


@dataclass(frozen=True)
class ThetaGrid:
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) == 0:
            raise ValueError("grid needs at least one node")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return len(self.nodes)


def make_theta_grid(spec: PriorSpec, size: int = 2000) -> ThetaGrid:
    """Base grid: log-spaced for Clayton, linear for Gumbel; endpoints are the bounds."""
    if size < 200:
        raise ValueError("theta grid needs at least 200 nodes")
    if spec.family is Family.CLAYTON:
        nodes = np.geomspace(spec.theta_min, spec.theta_max, size)
    else:
        nodes = np.linspace(spec.theta_min, spec.theta_max, size)
    nodes[0], nodes[-1] = spec.theta_min, spec.theta_max
    return ThetaGrid(nodes)


def refine_theta_grid(grid: ThetaGrid, log_post: np.ndarray, size: int = 1000) -> ThetaGrid:
    """Add ``size`` evenly spaced nodes where the posterior carries mass.

    The window spans every base node whose log posterior is within
    ``_REFINE_CUTOFF`` nats of the maximum, widened by one node per side.
    """
    log_post = np.asarray(log_post, dtype=float)
    top = np.max(log_post)
    if not np.isfinite(top) or size <= 0 or len(grid) < 2:
        return grid
    live = np.flatnonzero(log_post >= top - _REFINE_CUTOFF)
    i0 = max(live[0] - 1, 0)
    i1 = min(live[-1] + 1, len(grid) - 1)
    dense = np.linspace(grid.nodes[i0], grid.nodes[i1], size)
    return ThetaGrid(np.union1d(grid.nodes, dense))


# ---------------------------------------------------------------------------
# likelihood
# ---------------------------------------------------------------------------


def log_likelihood(model: CopulaModel, data: PseudoSample) -> float:
    """Sum of log copula densities over the sample."""
    if model.is_independence:
        return 0.0
    out = float(np.sum(_log_density(model.family, model.theta, data.u, data.v)))
    if math.isnan(out):
        raise FloatingPointError(f"log-likelihood is NaN at {model}")
    return out


def log_likelihood_grid(family: Family, thetas, data: PseudoSample, chunk: int = 64) -> np.ndarray:
    """Log-likelihood at every theta in ``thetas`` (row-wise sums, chunked)."""
    family = Family.parse(family)
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty(len(thetas))
    u = data.u[None, :]
    v = data.v[None, :]
    for start in range(0, len(thetas), chunk):
        th = thetas[start : start + chunk, None]
        out[start : start + chunk] = np.sum(_log_density(family, th, u, v), axis=1)
    if np.any(np.isnan(out)):
        raise FloatingPointError("log-likelihood is NaN on the grid")
    return out


@dataclass(frozen=True)
class MleResult:
    theta: float
    log_lik: float
    at_boundary: bool


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, a: float, b: float, tol: float = 1e-6, max_iter: int = 200) -> float:
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def mle(family: Family, data: PseudoSample, spec: PriorSpec, grid_size: int = 2000) -> MleResult:
    """Maximize the log-likelihood over ``[theta_min, theta_max]``.

    A grid scan locates the best node, then golden-section search refines
    inside the two neighbouring cells to ``|d theta| < 1e-6``.
    """
    family = Family.parse(family)
    if data.n < 10:
        raise ValueError("MLE needs at least 10 pairs")
    grid = make_theta_grid(replace(spec, family=family), grid_size)
    ll = log_likelihood_grid(family, grid.nodes, data)
    k = int(np.argmax(ll))
    a = grid.nodes[max(k - 1, 0)]
    b = grid.nodes[min(k + 1, len(grid) - 1)]

    def f(th):
        return log_likelihood(CopulaModel(family, th), data)

    theta = _golden_max(f, a, b)
    # the refined point must not be worse than the scanned node
    ll_theta = f(theta)
    for cand in (a, b, grid.nodes[k]):
        fc = f(cand)
        if fc > ll_theta:
            theta, ll_theta = cand, fc
    at_boundary = theta - spec.theta_min < _BOUNDARY_TOL or spec.theta_max - theta < _BOUNDARY_TOL
    return MleResult(float(theta), float(ll_theta), bool(at_boundary))


# ---------------------------------------------------------------------------
# Fisher information and the restricted Jeffreys prior
# ---------------------------------------------------------------------------


def _theta_substream(theta: float) -> int:
    return int(np.float64(theta).view(np.uint64))


def finite_difference_scores(family: Family, theta: float, u, v, spec: PriorSpec) -> np.ndarray:
    """Score d/dtheta log c_theta(u, v) by finite differences.

    Central with step ``spec.step(theta)``; one-sided when the step would
    cross a truncation bound.
    """
    family = Family.parse(family)
    h = spec.step(theta)
    lo_ok = theta - h >= spec.theta_min
    hi_ok = theta + h <= spec.theta_max
    if lo_ok and hi_ok:
        return (_log_density(family, theta + h, u, v) - _log_density(family, theta - h, u, v)) / (2 * h)
    if hi_ok:
        return (_log_density(family, theta + h, u, v) - _log_density(family, theta, u, v)) / h
    if lo_ok:
        return (_log_density(family, theta, u, v) - _log_density(family, theta - h, u, v)) / h
    raise ValueError(f"finite-difference step {h} does not fit inside the truncation bounds")


def fisher_information_mc(
    family: Family,
    theta: float,
    spec: PriorSpec,
    rng: np.random.Generator | None = None,
    draws: int | None = None,
    return_se: bool = False,
):
    """Monte-Carlo estimate of the per-observation Fisher information.

    Draws ``M`` pairs from the copula at ``theta`` and averages squared
    finite-difference scores. Without an explicit ``rng`` the stream is
    derived from ``(spec.prior_seed, theta)``, so the estimate at a given
    theta never depends on which other thetas were evaluated.
    """
    family = Family.parse(family)
    m = spec.fisher_draws if draws is None else int(draws)
    if m < 100:
        raise ValueError(f"M too small: need at least 100 draws, got {m}")
    if not spec.theta_min <= theta <= spec.theta_max:
        raise ValueError(f"theta={theta} outside [{spec.theta_min}, {spec.theta_max}]")
    if rng is None:
        rng = make_rng(spec.prior_seed, _theta_substream(theta))
    u, v = sample_uv(CopulaModel(family, theta), m, rng)
    s2 = finite_difference_scores(family, theta, u, v, spec) ** 2
    info = float(np.mean(s2))
    if not math.isfinite(info):
        raise FloatingPointError(f"non-finite Fisher information at theta={theta}")
    if return_se:
        return info, float(np.std(s2, ddof=1) / math.sqrt(m))
    return info


def _fisher_nodes(spec: PriorSpec) -> np.ndarray:
    g = spec.fisher_grid_size
    if spec.family is Family.CLAYTON:
        nodes = np.geomspace(spec.theta_min, spec.theta_max, g)
    else:
        # geometric in theta - 1 so the steep region next to independence is resolved
        nodes = 1.0 + np.geomspace(spec.theta_min - 1.0, spec.theta_max - 1.0, g)
    nodes[0], nodes[-1] = spec.theta_min, spec.theta_max
    return nodes


@dataclass(frozen=True)
class FisherTable:
    spec: PriorSpec
    nodes: np.ndarray
    info: np.ndarray
    steps: np.ndarray

    def __post_init__(self):
        for name in ("nodes", "info", "steps"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.nodes.shape == self.info.shape == self.steps.shape):
            raise ValueError("Fisher table columns must have equal length")

    def matches(self, spec: PriorSpec) -> bool:
        return self.spec.cache_key() == spec.cache_key()

    def to_text(self) -> str:
        """Versioned key=value header followed by ``theta,info,step`` rows."""
        lines = ["# copula-tailrisk Fisher information table", f"format_version={FISHER_FORMAT_VERSION}"]
        lines += [f"{k}={v}" for k, v in self.spec.cache_key().items()]
        lines.append("columns=theta,info,step")
        lines += [f"{t!r},{i!r},{h!r}" for t, i, h in zip(self.nodes.tolist(), self.info.tolist(), self.steps.tolist())]
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def from_text(cls, text: str) -> FisherTable:
        header: dict[str, str] = {}
        rows = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                key, _, value = line.partition("=")
                header[key.strip()] = value.strip()
            else:
                rows.append([float(x) for x in line.split(",")])
        if header.get("format_version") != str(FISHER_FORMAT_VERSION):
            raise ValueError(f"unsupported Fisher table version {header.get('format_version')!r}")
        if header.get("rng") != RNG_ALGORITHM:
            raise ValueError(f"Fisher table produced by a different generator: {header.get('rng')!r}")
        spec = PriorSpec(
            family=Family.parse(header["family"]),
            theta_min=float(header["theta_min"]),
            theta_max=float(header["theta_max"]),
            fisher_grid_size=int(header["grid_size"]),
            fisher_draws=int(header["draws"]),
            fd_step=float(header["fd_step"]),
            fd_relative=header["fd_relative"] == "true",
            prior_seed=int(header["seed"]),
        )
        arr = np.array(rows, dtype=float).reshape(-1, 3)
        if len(arr) != spec.fisher_grid_size:
            raise ValueError("Fisher table row count does not match grid_size")
        return cls(spec, arr[:, 0], arr[:, 1], arr[:, 2])

    @classmethod
    def read(cls, path: str | Path) -> FisherTable:
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def compute_fisher_table(spec: PriorSpec) -> FisherTable:
    nodes = _fisher_nodes(spec)
    info = np.array([fisher_information_mc(spec.family, th, spec) for th in nodes])
    steps = np.array([spec.step(th) for th in nodes])
    return FisherTable(spec, nodes, info, steps)


@dataclass(frozen=True)
class JeffreysPrior:
    """Truncated prior proportional to sqrt(I), linear in sqrt(I) between nodes."""

    table: FisherTable
    sqrt_info: np.ndarray
    normalizer: float

    @property
    def theta_min(self) -> float:
        return self.table.spec.theta_min

    @property
    def theta_max(self) -> float:
        return self.table.spec.theta_max

    def density(self, theta):
        theta = np.asarray(theta, dtype=float)
        inside = (theta >= self.theta_min) & (theta <= self.theta_max)
        out = np.where(inside, np.interp(theta, self.table.nodes, self.sqrt_info) / self.normalizer, 0.0)
        return out.item() if out.ndim == 0 else out

    def log_density(self, theta):
        with np.errstate(divide="ignore"):
            return np.log(self.density(theta))

    def integral(self) -> float:
        return float(np.trapezoid(self.sqrt_info, self.table.nodes) / self.normalizer)


def restricted_jeffreys_prior(
    family: Family, spec: PriorSpec, table: FisherTable | None = None
) -> JeffreysPrior:
    """Normalized restricted Jeffreys prior built from a Fisher table.

    The table is computed from ``spec`` unless one is supplied.
    """
    family = Family.parse(family)
    if family is not spec.family:
        raise ValueError(f"prior spec is for {spec.family.value}, not {family.value}")
    if table is None:
        table = compute_fisher_table(spec)
    elif table.spec.family is not family:
        raise ValueError("Fisher table belongs to a different family")
    if not np.all(np.isfinite(table.info)):
        raise FloatingPointError("Fisher table contains non-finite values")
    sqrt_info = np.sqrt(np.maximum(table.info, 0.0))
    z = float(np.trapezoid(sqrt_info, table.nodes))
    if not z > 0:
        raise FloatingPointError("Jeffreys prior cannot be normalized (zero Fisher information)")
    return JeffreysPrior(table, sqrt_info, z)


# ---------------------------------------------------------------------------
# posterior
# ---------------------------------------------------------------------------


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    """Quadrature weights w with sum(w * f) equal to the trapezoid integral of f."""
    nodes = np.asarray(nodes, dtype=float)
    if len(nodes) == 1:
        return np.ones(1)
    d = np.diff(nodes)
    w = np.zeros(len(nodes))
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


@dataclass(frozen=True)
class PosteriorGrid:
    """Posterior on a theta grid.

    ``density`` integrates to one under the trapezoid rule; ``weights`` are
    the corresponding quadrature masses and sum to one.
    """

    family: Family
    grid: ThetaGrid
    log_lik: np.ndarray
    log_prior: np.ndarray
    density: np.ndarray
    weights: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def cdf(self) -> np.ndarray:
        x, d = self.nodes, self.density
        return np.concatenate([[0.0], np.cumsum(np.diff(x) * (d[1:] + d[:-1]) / 2)])


def posterior_from_log_terms(family: Family, grid: ThetaGrid, log_lik, log_prior) -> PosteriorGrid:
    log_lik = np.asarray(log_lik, dtype=float)
    log_prior = np.asarray(log_prior, dtype=float)
    lp = log_lik + log_prior
    top = np.max(lp)
    if not np.isfinite(top):
        raise FloatingPointError("posterior underflows everywhere on the grid; check grid against truncation")
    unnorm = np.exp(lp - top)
    w = trapezoid_weights(grid.nodes)
    z = float(np.sum(w * unnorm))
    if not z > 0:
        raise FloatingPointError("posterior underflows everywhere on the grid; check grid against truncation")
    density = unnorm / z
    weights = w * density
    weights = weights / np.sum(weights)
    return PosteriorGrid(Family.parse(family), grid, log_lik, log_prior, density, weights)


def posterior_grid(
    family: Family,
    data: PseudoSample | None,
    spec: PriorSpec,
    grid: ThetaGrid,
    prior: JeffreysPrior | None = None,
    log_lik=None,
) -> PosteriorGrid:
    """Posterior proportional to likelihood times restricted Jeffreys prior.

    ``log_lik`` may be given directly (one value per node) instead of data.
    """
    family = Family.parse(family)
    if prior is None:
        prior = restricted_jeffreys_prior(family, spec)
    if log_lik is None:
        if data is None:
            raise ValueError("either data or log_lik is required")
        log_lik = log_likelihood_grid(family, grid.nodes, data)
    return posterior_from_log_terms(family, grid, log_lik, prior.log_density(grid.nodes))


@dataclass(frozen=True)
class CredibleInterval:
    level: float
    lo: float
    hi: float
    method: str = "grid_quantile"

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class PosteriorSummary:
    mean: float
    variance: float
    ci: CredibleInterval

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")


def _single_atom(post: PosteriorGrid) -> int | None:
    nz = np.flatnonzero(post.weights > 0)
    return int(nz[0]) if len(nz) == 1 else None


def _theta_quantiles(post: PosteriorGrid, probs) -> np.ndarray:
    atom = _single_atom(post)
    if atom is not None:
        return np.full(len(probs), post.nodes[atom])
    cdf = post.cdf()
    cdf = cdf / cdf[-1]
    return np.interp(probs, cdf, post.nodes)


def posterior_summary_theta(post: PosteriorGrid, level: float = 0.95) -> PosteriorSummary:
    """Mean, variance and equal-tailed interval of theta.

    Interval endpoints interpolate the cumulative trapezoid CDF linearly.
    """
    _check_level(level)
    x = post.nodes
    mean = float(np.sum(post.weights * x))
    var = float(max(np.sum(post.weights * (x - mean) ** 2), 0.0))
    tail = (1.0 - level) / 2.0
    lo, hi = _theta_quantiles(post, [tail, 1.0 - tail])
    return PosteriorSummary(mean, var, CredibleInterval(level, float(lo), float(hi), "grid_quantile"))


def _weighted_quantiles(values: np.ndarray, weights: np.ndarray, probs) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    vals = values[order]
    cw = np.cumsum(weights[order])
    cw = cw / cw[-1]
    # midpoint convention so a single atom maps to itself
    pos = cw - weights[order] / (2 * cw[-1])
    return np.interp(probs, pos, vals)


def risk_is_monotone(values: np.ndarray) -> bool:
    return bool(np.all(np.diff(values) >= 0.0))


def induced_risk_posterior(post: PosteriorGrid, spec: TailSpec, level: float = 0.95) -> PosteriorSummary:
    """Posterior mean, variance and interval of R_T(theta).

    The interval maps the theta interval through R_T when R_T is
    nondecreasing on the grid, else uses weighted quantiles of R_T values.
    """
    _check_level(level)
    r = np.asarray(tail_risk_values(post.family, post.nodes, spec.alpha, spec.functional), dtype=float).reshape(-1)
    mean = float(np.sum(post.weights * r))
    var = float(max(np.sum(post.weights * r * r) - mean * mean, 0.0))
    tail = (1.0 - level) / 2.0
    if risk_is_monotone(r):
        t_lo, t_hi = _theta_quantiles(post, [tail, 1.0 - tail])
        lo, hi = (float(x) for x in np.interp([t_lo, t_hi], post.nodes, r))
        method = "grid_quantile"
    else:
        lo, hi = (float(x) for x in _weighted_quantiles(r, post.weights, [tail, 1.0 - tail]))
        method = "weighted_quantile"
    return PosteriorSummary(mean, var, CredibleInterval(level, lo, hi, method))


def z_multiplier(level: float) -> float:
    _check_level(level)
    return float(norm.ppf(1.0 - (1.0 - level) / 2.0))


def delta_method_ci(
    family: Family,
    theta_hat: float,
    n: int,
    fisher: float,
    spec: TailSpec,
    level: float = 0.95,
    bounds: tuple[float, float] | None = None,
) -> CredibleInterval:
    """Asymptotic interval R(theta_hat) +- z |R'(theta_hat)| / sqrt(n I(theta_hat)), clipped to [0, 1]."""
    if not fisher > 0:
        raise ValueError("Fisher information estimate must be positive")
    if n < 1:
        raise ValueError("sample size must be positive")
    model = CopulaModel(family, theta_hat)
    r = tail_risk(model, spec)
    dr = tail_risk_derivative(model, spec, bounds)
    half = z_multiplier(level) * abs(dr) / math.sqrt(n * fisher)
    return CredibleInterval(level, max(r - half, 0.0), min(r + half, 1.0), "delta_method")


# ---------------------------------------------------------------------------
# end-to-end fit
# ---------------------------------------------------------------------------


@dataclass
class TailRiskReport:
    family: Family
    alpha: float
    level: float
    n: int
    theta: PosteriorSummary
    risks: dict[str, PosteriorSummary]
    delta_method: dict[str, CredibleInterval]
    mle: MleResult
    fisher_at_mle: float
    independence_baseline: float
    independence_ratio_upper: float
    independence_ratio_lower: float
    monotone: bool
    grid_size: int
    prior: PriorSpec
    diagnostics: list[str] = field(default_factory=list)

    @property
    def theta_mean(self) -> float:
        return self.theta.mean

    @property
    def theta_ci(self) -> CredibleInterval:
        return self.theta.ci

    def to_dict(self) -> dict:
        def summ(s: PosteriorSummary) -> dict:
            return {"mean": s.mean, "variance": s.variance, "ci": _ci_dict(s.ci)}

        return {
            "family": self.family.value,
            "alpha": self.alpha,
            "level": self.level,
            "n": self.n,
            "theta": summ(self.theta),
            "risks": {k: summ(v) for k, v in self.risks.items()},
            "delta_method": {k: _ci_dict(v) for k, v in self.delta_method.items()},
            "mle": asdict(self.mle),
            "fisher_at_mle": self.fisher_at_mle,
            "independence_baseline": self.independence_baseline,
            "independence_ratio_upper": self.independence_ratio_upper,
            "independence_ratio_lower": self.independence_ratio_lower,
            "monotone_mapping": self.monotone,
            "grid": {
                "size": self.grid_size,
                "theta_min": self.prior.theta_min,
                "theta_max": self.prior.theta_max,
                "layout": "log" if self.family is Family.CLAYTON else "linear",
            },
            "prior": {k: v for k, v in self.prior.cache_key().items() if k != "family"},
            "diagnostics": list(self.diagnostics),
        }


def _ci_dict(ci: CredibleInterval) -> dict:
    return {"level": ci.level, "lo": ci.lo, "hi": ci.hi, "method": ci.method}


def fit_posterior(
    family: Family,
    data: PseudoSample,
    spec: PriorSpec,
    prior: JeffreysPrior,
    grid_size: int = 2000,
    refine_size: int = 1000,
) -> PosteriorGrid:
    """Posterior on the base grid, refined where the posterior has mass."""
    family = Family.parse(family)
    base = make_theta_grid(spec, grid_size)
    ll = log_likelihood_grid(family, base.nodes, data)
    grid = refine_theta_grid(base, ll + prior.log_density(base.nodes), refine_size)
    if grid is base:
        return posterior_grid(family, data, spec, grid, prior=prior, log_lik=ll)
    return posterior_grid(family, data, spec, grid, prior=prior)


def fit_tail_risk(
    family: Family,
    data: PseudoSample,
    spec: PriorSpec,
    prior: JeffreysPrior,
    alpha: float = 0.05,
    level: float = 0.95,
    grid_size: int = 2000,
    refine_size: int = 1000,
) -> TailRiskReport:
    """Posterior summaries of theta and of R_L, R_U, R_C for one family."""
    family = Family.parse(family)
    post = fit_posterior(family, data, spec, prior, grid_size, refine_size)
    theta = posterior_summary_theta(post, level)
    risks = {f.value: induced_risk_posterior(post, TailSpec(alpha, f), level) for f in Functional}
    r_nodes = tail_risk_values(family, post.nodes, alpha, Functional.LOWER)
    monotone = risk_is_monotone(np.atleast_1d(r_nodes)) and risk_is_monotone(
        np.atleast_1d(tail_risk_values(family, post.nodes, alpha, Functional.UPPER))
    )
    diagnostics = []
    fit = mle(family, data, spec, grid_size)
    if fit.at_boundary:
        diagnostics.append("mle_at_truncation_boundary")
    if not monotone:
        diagnostics.append("non_monotone_risk_map")
    fisher = fisher_information_mc(family, fit.theta, spec)
    delta = {}
    if fisher > 0:
        for f in Functional:
            delta[f.value] = delta_method_ci(
                family, fit.theta, data.n, fisher, TailSpec(alpha, f), level, (spec.theta_min, spec.theta_max)
            )
    else:
        diagnostics.append("delta_method_skipped")
    base = independence_baseline(alpha)
    return TailRiskReport(
        family=family,
        alpha=alpha,
        level=level,
        n=data.n,
        theta=theta,
        risks=risks,
        delta_method=delta,
        mle=fit,
        fisher_at_mle=fisher,
        independence_baseline=base,
        independence_ratio_upper=risks["U"].mean / base,
        independence_ratio_lower=risks["L"].mean / base,
        monotone=monotone,
        grid_size=len(post.grid),
        prior=spec,
        diagnostics=diagnostics,
    )

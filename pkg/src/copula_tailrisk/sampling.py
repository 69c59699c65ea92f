"""Conditional-inversion sampling from Clayton and Gumbel copulas.

A pair is drawn as ``u ~ U(0,1)``, ``w ~ U(0,1)`` and ``v`` solving
``dC/du(u, v) = w``. Clayton has a closed-form inverse. For Gumbel the
equation is solved in ``t = -log C(u, v)``, where it reads

    t + (theta - 1) log t = x + (theta - 1) log x - log w,    x = -log u,

a strictly increasing function of ``t`` bracketed by ``[x, x - log w]``.
A vectorized safeguarded Newton/bisection iteration solves all pairs at
once; ``v = exp(-(t^theta - x^theta)^(1/theta))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .copula_core import CopulaModel, Family

__all__ = [
    "RNG_ALGORITHM",
    "SamplingError",
    "CopulaSample",
    "make_rng",
    "conditional_inverse",
    "sample_pair",
    "sample_uv",
    "sample_dataset",
]

RNG_ALGORITHM = "numpy.PCG64/SeedSequence"

_TINY = np.nextafter(0.0, 1.0)
_ONE_MINUS = np.nextafter(1.0, 0.0)
_ROOT_TOL = 1e-13
_ROOT_MAXITER = 200


class SamplingError(RuntimeError):
    """Root finding for the conditional inverse did not converge."""

    def __init__(self, theta: float, u: float, w: float):
        super().__init__(f"conditional inversion failed to converge (theta={theta}, u={u}, w={w})")
        self.theta = theta
        self.u = u
        self.w = w


def make_rng(seed: int, *substream: int) -> np.random.Generator:
    """PCG64 generator for ``seed``; extra integers select an independent substream."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in substream))
    return np.random.Generator(np.random.PCG64(ss))


def _clayton_inverse(theta: float, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    # v = ((w^(-theta/(1+theta)) - 1) u^-theta + 1)^(-1/theta), in logs
    c = -theta / (1.0 + theta) * np.log(w)
    with np.errstate(divide="ignore"):
        log_a = np.log(np.expm1(c))
    log_inner = np.logaddexp(log_a - theta * np.log(u), 0.0)
    return np.exp(-log_inner / theta)


def _gumbel_inverse(theta: float, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    if theta == 1.0:
        return w.copy()
    x = -np.log(u)
    k = theta - 1.0
    target = x + k * np.log(x) - np.log(w)
    lo = x.copy()
    hi = x - np.log(w)
    t = 0.5 * (lo + hi)
    active = np.ones(t.shape, dtype=bool)
    for _ in range(_ROOT_MAXITER):
        ta = t[active]
        g = ta + k * np.log(ta) - target[active]
        # shrink the bracket, then try a Newton step and fall back to bisection
        hi_a = np.where(g > 0, ta, hi[active])
        lo_a = np.where(g > 0, lo[active], ta)
        newton = ta - g / (1.0 + k / ta)
        inside = (newton > lo_a) & (newton < hi_a)
        t_new = np.where(inside, newton, 0.5 * (lo_a + hi_a))
        lo[active] = lo_a
        hi[active] = hi_a
        done = np.abs(t_new - ta) <= _ROOT_TOL * np.maximum(ta, 1.0)
        t[active] = t_new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not active.any():
            break
    else:
        i = int(np.flatnonzero(active)[0])
        raise SamplingError(theta, float(u.flat[i]), float(w.flat[i]))
    # (t^theta - x^theta)^(1/theta) = t (1 - (x/t)^theta)^(1/theta)
    with np.errstate(divide="ignore"):
        ratio = np.minimum(x / t, 1.0)
        y = t * np.exp(np.log(-np.expm1(theta * np.log(ratio))) / theta)
    return np.exp(-y)


def conditional_inverse(model: CopulaModel, u, w):
    """Solve dC/du(u, v) = w for v (vectorized)."""
    u, w = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(w, dtype=float))
    shape = u.shape
    u, w = np.atleast_1d(u).ravel(), np.atleast_1d(w).ravel()
    if model.family is Family.CLAYTON:
        v = _clayton_inverse(model.theta, u, w)
    else:
        v = _gumbel_inverse(model.theta, u, w)
    v = np.clip(v, _TINY, _ONE_MINUS).reshape(shape)
    return v.item() if v.ndim == 0 else v


def _uniform_open(rng: np.random.Generator, size) -> np.ndarray:
    x = rng.random(size)
    return np.clip(x, _TINY, _ONE_MINUS)


def sample_uv(model: CopulaModel, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` pairs as two arrays ``(u, v)``."""
    u = _uniform_open(rng, n)
    w = _uniform_open(rng, n)
    return u, np.asarray(conditional_inverse(model, u, w))


def sample_pair(model: CopulaModel, rng: np.random.Generator) -> tuple[float, float]:
    u, v = sample_uv(model, 1, rng)
    return float(u[0]), float(v[0])


@dataclass(frozen=True)
class CopulaSample:
    u: np.ndarray
    v: np.ndarray
    model: CopulaModel
    seed: int
    rng_algorithm: str = RNG_ALGORITHM

    def __len__(self) -> int:
        return len(self.u)

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.u, self.v])


def sample_dataset(model: CopulaModel, n: int, seed: int, *substream: int) -> CopulaSample:
    """``n`` i.i.d. pairs from ``model``; deterministic in ``(seed, substream)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u, v = sample_uv(model, n, make_rng(seed, *substream))
    return CopulaSample(u=u, v=v, model=model, seed=int(seed))

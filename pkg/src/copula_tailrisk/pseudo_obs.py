"""Rank-based pseudo-observations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

__all__ = ["PseudoSample", "to_pseudo_observations", "clamp_unit", "CLAMP_EPS"]


@dataclass(frozen=True)
class PseudoSample:
    """Pairs on the open unit square, stored column-wise."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.ndim != 1 or u.shape != v.shape:
            raise ValueError("u and v must be 1-d arrays of equal length")
        if len(u) == 0:
            raise ValueError("a pseudo-sample needs at least one pair")
        if not (np.all((u > 0) & (u < 1)) and np.all((v > 0) & (v < 1))):
            raise ValueError("pseudo-observations must lie strictly inside (0, 1)")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return len(self.u)

    def __len__(self) -> int:
        return self.n

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.u, self.v])


def to_pseudo_observations(x, y) -> PseudoSample:
    """Map each margin to ``rank / (n + 1)``.

    Ranks are ascending and computed per margin; ties get midranks.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d sequences of equal length")
    n = len(x)
    if n < 2:
        raise ValueError(f"need at least 2 pairs, got {n}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("inputs contain non-finite values")
    return PseudoSample(rankdata(x) / (n + 1), rankdata(y) / (n + 1))


CLAMP_EPS = 1e-12


def clamp_unit(u, v, eps: float = CLAMP_EPS) -> tuple[PseudoSample, int]:
    """Clamp externally supplied copula-scale data into ``[eps, 1 - eps]``.

    Returns the sample and the number of coordinates that had to move.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("inputs contain non-finite values")
    cu = np.clip(u, eps, 1.0 - eps)
    cv = np.clip(v, eps, 1.0 - eps)
    moved = int(np.count_nonzero(cu != u) + np.count_nonzero(cv != v))
    return PseudoSample(cu, cv), moved

"""Weight functions, weighted sup norms and the geometric Lipschitz seminorm.

All weights are evaluated in log space so that ``g**n`` for large ``n`` never
has to be formed explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError


@dataclass(frozen=True)
class WeightFn:
    """A weight ``V >= 1`` on the state space.

    Use :meth:`geometric` for ``V(n) = gamma**n`` on the integers and
    :meth:`polynomial` for ``V(x) = (1 + |x - center|)**power`` on the line.
    """

    kind: str
    gamma: float = 1.0
    power: float = 0.0
    center: float = 0.0

    @classmethod
    def geometric(cls, gamma: float) -> "WeightFn":
        if not gamma > 1.0 or not math.isfinite(gamma):
            raise DomainError(f"geometric weight needs gamma > 1, got {gamma!r}")
        return cls("geometric", gamma=float(gamma))

    @classmethod
    def polynomial(cls, power: float, center: float = 0.0) -> "WeightFn":
        if not power >= 0.0:
            raise DomainError(f"polynomial weight needs power >= 0, got {power!r}")
        return cls("polynomial", power=float(power), center=float(center))

    @property
    def log_gamma(self) -> float:
        return math.log(self.gamma)

    def log_eval(self, s):
        """``log V(s)``, vectorised over ``s``."""
        s = np.asarray(s, dtype=np.float64)
        if self.kind == "geometric":
            if np.any(s < 0):
                raise DomainError("geometric weight is defined on non-negative states")
            return s * self.log_gamma
        return self.power * np.log1p(np.abs(s - self.center))

    def eval(self, s):
        """``V(s)``; overflows to ``inf`` for very large states."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_eval(s))

    __call__ = eval

    def to_dict(self) -> dict:
        if self.kind == "geometric":
            return {"kind": "geometric", "gamma": self.gamma}
        return {"kind": "polynomial", "power": self.power, "center": self.center}


@dataclass(frozen=True)
class GeometricDistance:
    """``d(i, j) = |gamma**i - gamma**j|`` on the non-negative integers."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise DomainError(f"geometric distance needs gamma > 1, got {self.gamma!r}")

    def __call__(self, i, j):
        i = np.asarray(i, dtype=np.float64)
        j = np.asarray(j, dtype=np.float64)
        return np.abs(np.power(self.gamma, i) - np.power(self.gamma, j))


@dataclass
class WeightedVector:
    """Function values on states ``0..len-1`` together with their weight."""

    values: np.ndarray
    weight: WeightFn

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(self.values)):
            raise DomainError("weighted vector has non-finite entries")

    def norm(self) -> float:
        return weighted_norm(self.values, self.weight)


def weighted_norm(f, weight: WeightFn, states=None) -> float:
    """Weighted sup norm ``max_s |f(s)| / V(s)`` over the supplied states.

    Parameters
    ----------
    f : array_like
        Function values.
    weight : WeightFn
    states : array_like, optional
        Points at which ``f`` is given; defaults to ``0..len(f)-1``.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.size == 0:
        raise DomainError("weighted norm of an empty vector")
    if states is None:
        states = np.arange(f.size)
    logv = weight.log_eval(states)
    mag = np.abs(f)
    nz = mag > 0
    if not np.any(nz):
        return 0.0
    return float(np.exp(np.max(np.log(mag[nz]) - logv[nz])))


def lipschitz_seminorm_m1(f, distance: GeometricDistance, M: int | None = None,
                          return_pair: bool = False):
    """Lipschitz seminorm of ``f`` on ``{0..M}`` w.r.t. a geometric distance.

    ``max_{i<j<=M} |f(i) - f(j)| / |gamma**i - gamma**j|``, an ``O(M**2)``
    scan done by the compiled kernel when it is available.
    """
    f = np.asarray(f, dtype=np.float64)
    if M is None:
        M = f.size - 1
    if M < 1 or f.size < M + 1:
        raise DomainError(f"need f on 0..M with M >= 1 (M={M}, len(f)={f.size})")
    ratio, i, j = _kernels.m1_pair_max(f[: M + 1], math.log(distance.gamma))
    if return_pair:
        return ratio, (i, j)
    return ratio


def m1_from_weighted_norm_bound(norm: float, gamma: float) -> float:
    """Upper bound ``(gamma + 1) / (gamma - 1) * |f|_gamma`` on the seminorm."""
    if not gamma > 1.0:
        raise DomainError(f"gamma must exceed 1, got {gamma!r}")
    return (gamma + 1.0) / (gamma - 1.0) * norm


def m1_indicator(j: int, gamma: float) -> float:
    """Exact seminorm of the indicator of ``{j}``: ``gamma**(1-j) / (gamma - 1)``."""
    return gamma ** (1 - j) / (gamma - 1.0)

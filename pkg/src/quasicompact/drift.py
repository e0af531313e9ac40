"""Drift conditions: iterated weights, the weak-drift rate and minorization bounds.

Ratios ``(P^N V)(i) / V(i)`` are propagated through the weight-conjugated
kernel ``P(i,j) V(j) / V(i)``, so no power of ``V`` is ever formed.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from . import _kernels
from .errors import DomainError, InfeasibleError, TruncationError
from .kernels import SUBSTOCHASTIC, Kernel
from .weights import WeightedVector, WeightFn

FEASIBILITY_ZERO_TOL = 1e-12


def _ratio_history(P: Kernel, V: WeightFn, N: int, M: int) -> np.ndarray:
    """Rows ``n = 0..N`` hold ``(P^n V)(i) / V(i)`` for ``i = 0..M``.

    Only the entries with ``i <= P.exact_rows(n, M)`` are exact.
    """
    logv = V.log_eval(np.arange(M + 1))
    T = P.csr(M, SUBSTOCHASTIC, log_weight=logv)
    return _kernels.csr_power_history(T.indptr, T.indices, T.data, np.ones(M + 1), N)


def weight_ratios(P: Kernel, V: WeightFn, N: int, M: int) -> np.ndarray:
    """``(P^N V)(i) / V(i)`` on the rows that the truncation gets exactly right."""
    hi = P.exact_rows(N, M)
    if hi < 0:
        raise TruncationError(f"M={M} is too small for {N} steps")
    return _ratio_history(P, V, N, M)[N, : hi + 1]


def iterated_weight(P: Kernel, V: WeightFn, N: int, M: int) -> WeightedVector:
    """``(P^N V)(i)`` for ``i = 0 .. M - N * support_radius`` (or the exact window).

    Raises
    ------
    TruncationError
        if no row is exact at this truncation level.
    DomainError
        if ``P^N V`` overflows double precision; use :func:`weight_ratios`.
    """
    if N < 1:
        raise DomainError("N must be at least 1")
    ratios = weight_ratios(P, V, N, M)
    logv = V.log_eval(np.arange(ratios.size))
    with np.errstate(divide="ignore", over="ignore"):
        vals = np.exp(np.log(ratios) + logv)
    if not np.all(np.isfinite(vals)):
        raise DomainError("P^N V overflows; use weight_ratios for the scale-free quantity")
    return WeightedVector(vals, V)


@dataclass
class DriftReport:
    """Outcome of the weak-drift analysis for one weight."""

    weight: dict
    M: int
    tail_start: int
    ell: list
    L: float
    n_star: int
    d_constant: float
    delta_V_estimate: float
    feasible: bool
    windows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def ell_and_L(P: Kernel, V: WeightFn, N_max: int = 20, M: int = 2000,
              tail_start: int | None = None) -> DriftReport:
    """Estimate ``ell_N = limsup (P^N V)/V`` and ``L = inf_N ell_N**(1/N)``.

    The limsup is replaced by a maximum over ``[tail_start, hi_N]`` where
    ``hi_N`` is the last row that the truncation propagates exactly. The
    constant ``d`` makes ``P^N V <= L^N V + d`` hold on the rows below
    ``tail_start`` for the minimising ``N``.
    """
    if tail_start is None:
        tail_start = M // 2
    hist = _ratio_history(P, V, N_max, M)
    ell, windows = [], []
    for n in range(1, N_max + 1):
        hi = P.exact_rows(n, M)
        if hi < tail_start:
            if n == 1:
                raise TruncationError(f"M={M} leaves no exact rows above tail_start={tail_start}")
            break
        ell.append(float(np.max(hist[n, tail_start: hi + 1])))
        windows.append([tail_start, hi])
    roots = [e ** (1.0 / (k + 1)) for k, e in enumerate(ell)]
    k_star = int(np.argmin(roots))
    L = roots[k_star]
    n_star = k_star + 1
    logv = V.log_eval(np.arange(tail_start))
    # d can exceed the float range for steep weights and large tail_start; it is then inf
    gap = hist[n_star, :tail_start] - L ** n_star
    pos = gap > 0
    with np.errstate(over="ignore"):
        d = float(np.max(gap[pos] * np.exp(logv[pos]))) if np.any(pos) else 0.0
    return DriftReport(weight=V.to_dict(), M=M, tail_start=tail_start, ell=ell, L=float(L),
                       n_star=n_star, d_constant=d, delta_V_estimate=float(L),
                       feasible=bool(L < 1.0), windows=windows)


# ---------------------------------------------------------------------------
# increment generating function


def _law(increments) -> dict:
    if isinstance(increments, Mapping):
        return {int(k): v for k, v in increments.items() if v != 0}
    vals = list(increments)
    half = len(vals) // 2
    return {k - half: v for k, v in enumerate(vals) if v != 0}


def phi(increments, gamma):
    """``sum_k a_k gamma**k``; vectorised over ``gamma``."""
    law = _law(increments)
    g = np.asarray(gamma, dtype=np.float64)
    out = sum(float(a) * g ** k for k, a in law.items())
    return float(out) if np.ndim(out) == 0 else out


def _phi_prime(law, gamma: float) -> float:
    return math.fsum(float(a) * k * gamma ** (k - 1) for k, a in law.items())


@dataclass(frozen=True)
class PhiMinimum:
    gamma: float
    value: float
    feasible: bool


def minimize_phi(increments, gamma_max: float | None = None) -> PhiMinimum:
    """Minimise the convex function ``phi`` over ``(1, gamma_max]``.

    ``phi`` is convex on ``(0, inf)``, so its derivative is increasing and
    the minimiser is found by bisection on the sign of ``phi'``. When the
    minimum sits at ``gamma -> 1+`` (``phi'(1) >= 0``) no geometric weight
    contracts and the result is flagged infeasible.
    """
    law = _law(increments)
    if not law:
        raise DomainError("empty increment law")
    if _phi_prime(law, 1.0) >= 0.0:
        return PhiMinimum(1.0, math.fsum(float(a) for a in law.values()), False)
    lo = 1.0
    if gamma_max is None:
        hi = 2.0
        while _phi_prime(law, hi) < 0.0 and hi < 1e6:
            hi *= 2.0
    else:
        if not gamma_max > 1.0:
            raise DomainError("gamma_max must exceed 1")
        hi = float(gamma_max)
    if _phi_prime(law, hi) <= 0.0:
        g = hi
    else:
        while True:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if _phi_prime(law, mid) < 0.0:
                lo = mid
            else:
                hi = mid
        g = lo if abs(_phi_prime(law, lo)) <= abs(_phi_prime(law, hi)) else hi
    val = math.fsum(float(a) * g ** k for k, a in law.items())
    return PhiMinimum(g, val, bool(g > 1.0 and val < 1.0 - 1e-14))


@dataclass(frozen=True)
class FeasibilityResult:
    """First non-vanishing derivative of ``phi`` at 1 and its sign."""

    order: int
    value: float
    sign: int

    @property
    def feasible(self) -> bool:
        return self.sign < 0


def _falling(k: int, order: int) -> int:
    out = 1
    for m in range(order):
        out *= k - m
    return out


def wd_feasibility_test(increments, zero_tol: float = FEASIBILITY_ZERO_TOL) -> FeasibilityResult:
    """Decide whether some geometric weight ``gamma**n`` satisfies weak drift.

    Finds the smallest ``l`` with ``phi^(l)(1) != 0``; the weights are
    feasible exactly when that derivative is negative. Integer or
    :class:`fractions.Fraction` probabilities are handled exactly; floats
    use ``zero_tol`` to decide what counts as zero.
    """
    law = _law(increments)
    if not law or max(abs(k) for k in law) == 0:
        raise DomainError("increment law is concentrated at 0; phi is identically 1")
    exact = all(isinstance(a, (int, Fraction)) for a in law.values())
    b = max(abs(k) for k in law)
    for order in range(1, 2 * b + 1):
        if exact:
            val = sum(Fraction(a) * _falling(k, order) for k, a in law.items())
            if val != 0:
                return FeasibilityResult(order, float(val), 1 if val > 0 else -1)
        else:
            val = math.fsum(float(a) * _falling(k, order) for k, a in law.items())
            if abs(val) > zero_tol:
                return FeasibilityResult(order, val, 1 if val > 0 else -1)
    raise DomainError("all derivatives of phi at 1 up to order 2b vanish")


# ---------------------------------------------------------------------------
# minorization


def essential_radius_bound(rho: float, nu_mass: float, m_drift: float, nu_v: float) -> float:
    """Bound ``(rho nu(1) + tau) / (nu(1) + tau)`` with ``tau = max(0, M - nu(V))``."""
    if not nu_mass > 0.0:
        raise DomainError("minorizing measure must have positive mass")
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"drift factor must lie in [0, 1), got {rho!r}")
    tau = max(0.0, m_drift - nu_v)
    return (rho * nu_mass + tau) / (nu_mass + tau)


@dataclass
class MinorizationCertificate:
    """A small set ``S``, the measure ``nu = min_{i in S} P^N(i, .)`` and the drift pair."""

    small_set: list
    nu: dict
    nu_mass: float
    nu_V: float
    rho: float
    m_drift: float
    tau: float
    bound: float
    n_step: int = 1

    @property
    def rate_bound(self) -> float:
        """Bound on the essential spectral radius of ``P`` itself."""
        return self.bound ** (1.0 / self.n_step)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["nu"] = {str(k): v for k, v in sorted(self.nu.items())}
        d["rate_bound"] = self.rate_bound
        return d


def power_row(P: Kernel, i: int, n_step: int) -> dict[int, float]:
    """Row ``i`` of ``P^n_step`` by sparse propagation."""
    cur = {i: 1.0}
    for _ in range(n_step):
        nxt: dict[int, float] = {}
        for s, w in cur.items():
            for j, v in P.row(s).items():
                nxt[j] = nxt.get(j, 0.0) + w * v
        cur = nxt
    return cur


def _drift_ratio(row: Mapping[int, float], i: int, V: WeightFn) -> float:
    cols = np.fromiter(row.keys(), dtype=np.float64)
    probs = np.fromiter(row.values(), dtype=np.float64)
    return float(np.sum(probs * np.exp(V.log_eval(cols) - V.log_eval(i))))


def extract_minorization(P: Kernel, small_set: Iterable[int], V: WeightFn, M: int,
                         n_step: int = 1) -> MinorizationCertificate:
    """Build a minorization/drift certificate on ``{0..M}``.

    The drift factor is ``max_{i not in S, i <= M} (P^N V)(i) / V(i)``; it
    must be below one.
    """
    S = sorted(set(int(i) for i in small_set))
    if not S:
        raise DomainError("small set is empty")
    rows = {i: power_row(P, i, n_step) for i in S}
    common = set.intersection(*(set(r) for r in rows.values()))
    nu = {j: min(rows[i][j] for i in S) for j in sorted(common)}
    nu = {j: v for j, v in nu.items() if v > 0}
    nu_mass = math.fsum(nu.values())
    if nu_mass <= 0:
        raise DomainError("rows of the small set share no mass")
    nu_v = math.fsum(v * float(V.eval(j)) for j, v in nu.items())
    outside = [i for i in range(M + 1) if i not in rows]
    if not outside:
        raise DomainError("M leaves no states outside the small set")
    rho = max(_drift_ratio(power_row(P, i, n_step), i, V) for i in outside)
    if rho >= 1.0:
        raise InfeasibleError(f"drift factor {rho:.6g} >= 1 outside the small set")
    m_drift = max(_drift_ratio(rows[i], i, V) * float(V.eval(i)) - rho * float(V.eval(i)) for i in S)
    m_drift = max(m_drift, 0.0)
    tau = max(0.0, m_drift - nu_v)
    bound = essential_radius_bound(rho, nu_mass, m_drift, nu_v)
    return MinorizationCertificate(S, nu, nu_mass, nu_v, rho, m_drift, tau, bound, n_step)

"""Closed-form convergence rates.

Birth-death chains with ``P(n, n-1) = p``, ``P(n, n) = r``, ``P(n, n+1) = q``
(``p > q``) and boundary row ``P(0, 0) = a``, ``P(0, 1) = 1 - a`` have rate
either ``r + 2 sqrt(pq)`` (the essential spectral radius on ``V(n) = gamma**n``
with ``gamma = sqrt(p/q)``) or ``|lambda(a)|`` for the isolated eigenvalue
``lambda(a) = a + p (1 - a) / (a - 1 + q)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .errors import DomainError

A0_BRANCH = "A0Branch"
CASE_A = "CaseA"
CASE_B_LAMBDA = "CaseB_Lambda"
CASE_B_ESSENTIAL = "CaseB_Essential"
SPECIAL_A_EQ_1_MINUS_Q = "SpecialAEquals1MinusQ"


@dataclass
class BirthDeathRate:
    """Rate of a birth-death chain together with the branch that produced it."""

    rho: float
    case_label: str
    gamma_hat: float
    essential_radius: float
    a0: float
    a1: float | None
    lambda_a: float | None
    z_a: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def _check_pqr(p, q, r):
    if not (p > q > 0.0):
        raise DomainError(f"need p > q > 0, got p={p!r}, q={q!r}")
    if r < 0.0:
        raise DomainError(f"r must be non-negative, got {r!r}")
    if abs(p + q + r - 1.0) > 1e-12:
        raise DomainError(f"p + q + r = {p + q + r!r}, not 1")


def lambda_of_a(p: float, q: float, a: float) -> float:
    """Isolated eigenvalue ``a + p (1 - a) / (a - 1 + q)``."""
    return a + p * (1.0 - a) / (a - 1.0 + q)


def z_of_a(p: float, q: float, a: float) -> float:
    """Ratio ``p / (a + q - 1)`` of the eigenfunction ``n -> z**n``."""
    return p / (a + q - 1.0)


def birth_death_rate(p: float, q: float, r: float, a: float) -> BirthDeathRate:
    """Convergence rate of the birth-death chain in ``B_{sqrt(p/q)}``.

    Points on the boundaries between branches (``a = a0``, ``a = a1``) are
    assigned the essential-radius branch; both formulas agree there.
    """
    _check_pqr(p, q, r)
    if not 0.0 < a < 1.0:
        raise DomainError(f"a must lie in (0, 1), got {a!r}")
    s = math.sqrt(p * q)
    ess = r + 2.0 * s
    gamma_hat = math.sqrt(p / q)
    a0 = 1.0 - q - s
    special = abs(a - (1.0 - q)) <= 1e-12
    lam = None if special else lambda_of_a(p, q, a)
    z = None if special else z_of_a(p, q, a)

    def out(rho, label, a1=None):
        return BirthDeathRate(rho, label, gamma_hat, ess, a0, a1, lam, z)

    if special:
        return out(ess, SPECIAL_A_EQ_1_MINUS_Q)
    if a >= a0:
        return out(ess, A0_BRANCH)
    if 2.0 * p <= (1.0 - q + s) ** 2:
        return out(ess, CASE_A)
    a1 = p - s - math.sqrt(r * (r + 2.0 * s))
    if a < a1:
        rho = abs(lam)
        if not (ess < rho < 1.0 and abs(z) <= gamma_hat):
            raise ArithmeticError(f"lambda branch inconsistent at a={a}: |lambda|={rho}, ess={ess}")
        return out(rho, CASE_B_LAMBDA, a1)
    return out(ess, CASE_B_ESSENTIAL, a1)


def birth_death_rate_r_zero(p: float, a: float) -> float:
    """Rate of the birth-death chain with ``r = 0`` and ``q = 1 - p``.

    ``(pq + (a - p)**2) / |a - p|`` for ``a <= p - sqrt(pq)``, else ``2 sqrt(pq)``.
    """
    q = 1.0 - p
    _check_pqr(p, q, 0.0)
    if not 0.0 < a < 1.0:
        raise DomainError(f"a must lie in (0, 1), got {a!r}")
    if a == p:
        raise DomainError("a = p makes the boundary row coincide with the interior; formula undefined")
    s = math.sqrt(p * q)
    if a <= p - s:
        return (p * q + (a - p) ** 2) / abs(a - p)
    return 2.0 * s


def mm1_rate(beta: float, mu: float, h: float) -> tuple[float, float]:
    """Rate ``1 - h (sqrt(mu) - sqrt(beta))**2`` and weight ``sqrt(mu/beta)`` of uniformised M/M/1."""
    if not (beta > 0 and mu > 0 and h > 0):
        raise DomainError("beta, mu and h must be positive")
    if beta >= mu:
        raise DomainError(f"queue is not stable: beta={beta} >= mu={mu}")
    if h >= 1.0 / (beta + mu):
        raise DomainError(f"h={h} must be below 1/(beta + mu) = {1.0 / (beta + mu)}")
    return 1.0 - h * (math.sqrt(mu) - math.sqrt(beta)) ** 2, math.sqrt(mu / beta)


def unbounded_rw_rate_bound(p: float, gamma: float) -> float:
    """Bound ``max(q gamma, p)`` for the walk that resets to 0 with probability ``p``."""
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0, 1)")
    q = 1.0 - p
    if not 1.0 < gamma < 1.0 / q:
        raise DomainError(f"gamma must lie in (1, 1/q) = (1, {1.0 / q}), got {gamma!r}")
    return max(q * gamma, p)


def boundary_moment(row, gamma: float, max_terms: int = 100_000) -> float:
    """``sum_n P(0, n) gamma**n`` for a user-supplied boundary row.

    Returns ``inf`` when the partial sums keep growing, which voids the
    closed-form rate.
    """
    items = sorted(row.items()) if hasattr(row, "items") else list(enumerate(row))
    total = 0.0
    log_g = math.log(gamma)
    for n, w in items[:max_terms]:
        if w == 0:
            continue
        log_term = math.log(w) + n * log_g
        if log_term > 700.0:
            return math.inf
        total += math.exp(log_term)
    return total


@dataclass
class RateCertificate:
    """Closed-form rate with the constants that go with it."""

    model: str
    params: dict
    rho: float
    constants: dict = field(default_factory=dict)
    case: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

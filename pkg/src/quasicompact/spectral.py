"""Spectra of weight-conjugated truncations.

A drifting chain's transition matrix is far from normal, and a dense
eigensolver applied to it returns pseudospectral noise. Conjugating by the
weight, ``T(i, j) = P(i, j) V(j) / V(i)``, leaves the eigenvalues unchanged
but balances the matrix so that LAPACK resolves them to working accuracy.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DomainError
from .kernels import SUBSTOCHASTIC, GridKernel, Kernel, normalize_policy
from .weights import WeightFn

MAX_DENSE = 3001
RESIDUAL_TOL = 1e-8


@dataclass
class Truncation:
    """Dense conjugated truncation ``V^{-1} P_M V`` and what it was built from."""

    matrix: np.ndarray
    log_weight: np.ndarray
    policy: str
    weight: WeightFn | None
    M: int

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def build_truncation(P, V: WeightFn | None, M: int | None = None,
                     policy: str = SUBSTOCHASTIC) -> Truncation:
    """Truncate ``P`` to ``{0..M}`` and conjugate by ``V``.

    ``Substochastic`` drops mass leaving ``{0..M}``; ``ReflectLast`` puts it
    on state ``M``. Grid kernels are used as they are (``M`` is ignored).
    """
    policy = normalize_policy(policy)
    if isinstance(P, GridKernel):
        lw = V.log_eval(P.points) if V is not None else np.zeros(P.n_points)
        return Truncation(P.dense(log_weight=lw), lw, policy, V, P.n_points - 1)
    if M is None or M < 8:
        raise DomainError(f"truncation level must be at least 8, got {M!r}")
    lw = V.log_eval(np.arange(M + 1)) if V is not None else np.zeros(M + 1)
    return Truncation(P.dense(M, policy, log_weight=lw), lw, policy, V, M)


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    max_residual: float | None = None

    def nearest(self, target: complex) -> int:
        return int(np.argmin(np.abs(self.eigenvalues - target)))


def full_spectrum(T, vectors: bool = False) -> Spectrum:
    """All eigenvalues of a dense matrix, sorted by decreasing modulus.

    LAPACK ``geev`` (balancing, Hessenberg reduction, shifted QR). With
    ``vectors=True`` every eigenpair is checked to have residual
    ``||Tv - lambda v|| <= 1e-8 ||v||``.

    Raises
    ------
    DomainError
        for matrices larger than 3001 x 3001.
    ConvergenceError
        if the QR iteration fails or a residual is too large.
    """
    A = T.matrix if isinstance(T, Truncation) else np.asarray(T, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("matrix must be square")
    if A.shape[0] > MAX_DENSE:
        raise DomainError(f"dense eigensolver limited to {MAX_DENSE} states, got {A.shape[0]}")
    try:
        if vectors:
            w, v = scipy.linalg.eig(A, right=True)
        else:
            w = scipy.linalg.eigvals(A)
            v = None
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"QR iteration did not converge: {exc}") from exc
    order = np.lexsort((-w.imag, -w.real, -np.round(np.abs(w), 12)))
    w = w[order]
    res = None
    if v is not None:
        v = v[:, order]
        res = float(np.max(np.linalg.norm(A @ v - v * w[None, :], axis=0) / np.linalg.norm(v, axis=0)))
        if res > RESIDUAL_TOL:
            raise ConvergenceError(f"eigenpair residual {res:.3e} exceeds {RESIDUAL_TOL}")
    return Spectrum(w, v, res)


@dataclass
class SpectrumReport:
    """Spectral rate estimate from a truncation."""

    eigenvalues: list
    r0: float
    rho_estimate: float
    peripheral: list
    unit_count: int
    simple_unit: bool
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues,
            "r0": self.r0,
            "rho_estimate": self.rho_estimate,
            "peripheral": self.peripheral,
            "unit_count": self.unit_count,
            "simple_unit": self.simple_unit,
            "warnings": self.warnings,
        }


def _pairs(z) -> list:
    return [[float(c.real), float(c.imag)] for c in np.atleast_1d(z)]


def rate_from_spectrum(eigenvalues, r0: float, tol: float = 1e-6) -> SpectrumReport:
    """Largest modulus among eigenvalues with ``r0 <= |lambda| < 1 - tol``.

    Falls back to ``r0`` when that band is empty. Also reports whether the
    eigenvalue 1 is simple and the only one on the unit circle.
    """
    w = np.asarray(eigenvalues, dtype=np.complex128)
    mod = np.abs(w)
    band = (mod >= r0) & (mod < 1.0 - tol)
    rho = float(np.max(mod[band])) if np.any(band) else float(r0)
    on_circle = np.abs(mod - 1.0) < tol
    near_one = np.abs(w - 1.0) < tol
    warnings = []
    if not np.any(near_one):
        warnings.append("no eigenvalue within tolerance of 1")
    if np.any(mod > 1.0 + tol):
        warnings.append("eigenvalue outside the unit disc")
    simple = bool(near_one.sum() == 1 and on_circle.sum() == 1)
    return SpectrumReport(_pairs(w), float(r0), rho, _pairs(w[band]), int(on_circle.sum()), simple, warnings)


@dataclass
class GrowthCheck:
    beta: float
    c: float
    max_ratio: float
    verdict: bool


def growth_verdict(log_abs_f, log_v, beta: float, i_lo: int, i_hi: int, slack: float = 1.05) -> GrowthCheck:
    """Check ``|f(i)| <= slack * c * V(i)**beta`` on ``(i_lo, i_hi]``.

    ``c`` is fitted as ``max_{i <= i_lo} |f(i)| / V(i)**beta``.
    """
    log_abs_f = np.asarray(log_abs_f, dtype=np.float64)
    log_v = np.asarray(log_v, dtype=np.float64)
    scaled = log_abs_f - beta * log_v
    log_c = np.max(scaled[: i_lo + 1])
    tail = scaled[i_lo + 1: i_hi + 1]
    max_ratio = float(np.exp(np.max(tail) - log_c)) if tail.size else 0.0
    return GrowthCheck(float(beta), float(np.exp(log_c)), max_ratio, bool(max_ratio <= slack))


def eigen_growth_check(T: Truncation, lam: complex, g, delta: float, window=None,
                       slack: float = 1.05) -> GrowthCheck:
    """Check that an eigenfunction grows no faster than ``V**beta``.

    Parameters
    ----------
    T : Truncation
        The conjugated truncation ``g`` is an eigenvector of.
    lam : complex
        Its eigenvalue; needs ``delta < |lam| <= 1``.
    g : ndarray
        Eigenvector of ``T.matrix``; the eigenfunction of ``P`` is ``V g``.
    delta : float
        Weak-drift rate in ``(0, 1)``.
    window : (int, int), optional
        ``(i_lo, i_hi)``; defaults to ``(M // 4, 3 M // 4)``.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    mod = abs(lam)
    if not delta < mod <= 1.0 + 1e-9:
        raise DomainError(f"|lambda| = {mod} must lie in (delta, 1]")
    beta = math.log(min(mod, 1.0)) / math.log(delta)
    if window is None:
        window = (T.M // 4, 3 * T.M // 4)
    with np.errstate(divide="ignore"):
        log_abs_f = np.log(np.abs(np.asarray(g))) + T.log_weight
    return growth_verdict(log_abs_f, T.log_weight, beta, window[0], window[1], slack)


def truncation_convergence(P: Kernel, V: WeightFn, policy: str, M_list, r0: float,
                           tol: float = 1e-6, workers: int = 1) -> list[dict]:
    """Spectral rate estimate for each truncation level in ``M_list``."""
    def one(M):
        spec = full_spectrum(build_truncation(P, V, M, policy))
        rep = rate_from_spectrum(spec.eigenvalues, r0, tol)
        return {"M": int(M), "rho_estimate": rep.rho_estimate,
                "unit_gap": float(abs(1.0 - np.abs(spec.eigenvalues[0])))}

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(one, M_list))
    else:
        rows = [one(M) for M in M_list]
    prev = None
    for row in rows:
        row["change"] = None if prev is None else abs(row["rho_estimate"] - prev)
        prev = row["rho_estimate"]
    return rows

"""Empirical checks: stationary laws, decay curves and audits of analytic bounds."""
from __future__ import annotations

import io
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .errors import ConvergenceError, DomainError, TruncationError
from .kernels import REFLECT_LAST, GridKernel, Kernel
from .weights import WeightFn, m1_indicator

STAGNATION_FLOOR = 1e-10


def _operator(P, M, policy=REFLECT_LAST):
    if isinstance(P, GridKernel):
        return P.matrix
    if isinstance(P, np.ndarray):
        return P
    if M is None:
        raise DomainError("countable kernels need a truncation level M")
    return P.csr(M, policy)


def stationary(P, M: int | None = None, policy: str = REFLECT_LAST, tol: float = 1e-12,
               max_iter: int = 1_000_000, return_residual: bool = False, weight: WeightFn | None = None):
    """Stationary law of the truncation by left power iteration.

    Iterates ``pi <- pi P`` until ``||pi P - pi||_1 <= tol``. If the residual
    stops improving at a level no worse than ``1e-10`` (round-off floor), the
    current iterate is accepted.

    With ``weight`` the iteration runs on ``u = pi V`` through the conjugated
    truncation ``P(i,j) V(j) / V(i)``; the residual is then measured relative
    to ``pi(V)``, which keeps far-tail entries accurate relative to ``V``.

    Raises
    ------
    ConvergenceError
        if the residual stagnates above ``1e-10`` or ``max_iter`` is reached.
    """
    if isinstance(P, (list, tuple)):
        P = np.asarray(P, dtype=np.float64)
    if weight is None or isinstance(P, np.ndarray):
        if weight is not None:
            raise DomainError("weighted iteration needs a kernel, not a bare matrix")
        A = _operator(P, M, policy)
        lw = None
    else:
        states = P.points if isinstance(P, GridKernel) else np.arange(M + 1)
        lw = weight.log_eval(states)
        A = P.csr(M, policy, log_weight=lw)
    At = A.T.tocsr() if hasattr(A, "tocsr") else np.ascontiguousarray(A.T)
    n = A.shape[0]
    u = np.full(n, 1.0 / n)
    best, since = np.inf, 0
    res = np.inf
    for _ in range(max_iter):
        new = At @ u
        new /= new.sum()
        res = float(np.abs(new - u).sum())
        u = new
        if res <= tol:
            break
        if res < 0.999 * best:
            best, since = res, 0
        else:
            since += 1
        if since > 5000:
            if best <= STAGNATION_FLOOR:
                break
            raise ConvergenceError(f"power iteration stagnated at residual {best:.3e}")
    else:
        raise ConvergenceError(f"no convergence after {max_iter} iterations (residual {res:.3e})")
    if lw is None:
        pi = u
    else:
        pi = u * np.exp(lw.min() - lw)
        pi /= pi.sum()
    if return_residual:
        return pi, res
    return pi


@dataclass
class DecayCurve:
    """``e_n = ||P^n f - pi(f)||_V`` on a window, with a log-linear fit."""

    n: np.ndarray
    e: np.ndarray
    fitted_rho: float
    fit_r2: float
    window: tuple

    def to_dict(self) -> dict:
        return {"n": [int(k) for k in self.n], "e": [float(x) for x in self.e],
                "fitted_rho": self.fitted_rho, "fit_r2": self.fit_r2, "window": list(self.window)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,e_n\n")
        for k, x in zip(self.n, self.e):
            buf.write(f"{int(k)},{float(x):.17g}\n")
        return buf.getvalue()


def fit_rate(n, e, floor: float = 1e-13) -> tuple[float, float]:
    """Least-squares ``log e_n ~ c + n log rho`` over the second half of ``n``.

    Points with ``e_n <= floor`` are dropped. Returns ``(rho, r2)``, or
    ``(nan, nan)`` when fewer than two points remain.
    """
    n = np.asarray(n, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    sel = (n >= n.max() / 2.0) & (e > floor)
    if sel.sum() < 2:
        return float("nan"), float("nan")
    x, y = n[sel], np.log(e[sel])
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return float(np.exp(slope)), r2


def decay_curve(P, V: WeightFn, f, n_max: int, M: int | None = None, window=None,
                pi=None) -> DecayCurve:
    """Weighted distance of ``P^n f`` from ``pi(f)`` for ``n = 0..n_max``.

    For countable kernels the window defaults to the rows that the
    truncation propagates exactly for ``n_max`` steps; asking for more rows
    raises :class:`TruncationError`. Grid kernels use the whole grid unless
    a window of indices is given.
    """
    if isinstance(P, GridKernel):
        states = P.points
        hi_exact = P.n_points - 1
    else:
        if M is None:
            raise DomainError("countable kernels need a truncation level M")
        states = np.arange(M + 1)
        hi_exact = P.exact_rows(n_max, M)
        if hi_exact < 0:
            raise TruncationError(f"M={M} too small for {n_max} steps")
    if window is None:
        window = (0, hi_exact)
    lo, hi = int(window[0]), int(window[1])
    if hi > hi_exact:
        raise TruncationError(f"window end {hi} exceeds exact rows {hi_exact} at M={M}")
    fv = np.asarray(f(states) if callable(f) else f, dtype=np.float64)[: states.size]
    if pi is None:
        # the weighted iteration keeps pi(j) accurate relative to 1/V(j), so
        # pi(f) stays accurate for f that grow like V
        weight = None if isinstance(P, GridKernel) else V
        pi = stationary(P, M, tol=1e-14, weight=weight)
    pf = float(pi @ fv)
    logv = V.log_eval(states[lo: hi + 1])
    if isinstance(P, GridKernel):
        hist = np.empty((n_max + 1, states.size))
        hist[0] = fv
        for k in range(1, n_max + 1):
            hist[k] = P.matrix @ hist[k - 1]
    else:
        A = P.csr(M, REFLECT_LAST)
        hist = _kernels.csr_power_history(A.indptr, A.indices, A.data, fv, n_max)
    e = np.max(np.abs(hist[:, lo: hi + 1] - pf) * np.exp(-logv)[None, :], axis=1)
    n = np.arange(n_max + 1)
    rho, r2 = fit_rate(n, e)
    return DecayCurve(n, e, rho, r2, (lo, hi))


@dataclass
class BoundAudit:
    """Worst observed ratio of a quantity to its claimed upper bound."""

    max_ratio: float
    passed: bool
    worst_case: dict
    n_checked: int
    tolerance: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def audit_bound(lhs, rhs, index=None, tol: float = 1e-9, stderr=None,
                model_hash: str | None = None, certificate_hash: str | None = None) -> BoundAudit:
    """Compare ``lhs <= rhs`` entrywise.

    Exact data pass when ``lhs / rhs <= 1 + tol``. Monte Carlo data (with
    ``stderr``) pass when ``lhs <= rhs + 3 stderr``.

    Parameters
    ----------
    index : sequence of dict, optional
        Labels for the entries, reported for the worst case.
    model_hash, certificate_hash : str, optional
        When both are given they must match.
    """
    if model_hash is not None and certificate_hash is not None and model_hash != certificate_hash:
        raise DomainError("certificate was issued for a different model")
    lhs = np.asarray(lhs, dtype=np.float64).ravel()
    rhs = np.asarray(rhs, dtype=np.float64).ravel()
    if lhs.shape != rhs.shape:
        raise DomainError("lhs and rhs differ in shape")
    if np.any(rhs <= 0):
        raise DomainError("bounds must be positive")
    ratio = lhs / rhs
    if stderr is None:
        ok = ratio <= 1.0 + tol
        label = f"relative {tol:g}"
    else:
        se = np.asarray(stderr, dtype=np.float64).ravel()
        ok = lhs <= rhs + 3.0 * se
        label = "3 standard errors"
    k = int(np.argmax(ratio))
    worst = dict(index[k]) if index is not None else {"position": k}
    worst.update({"lhs": float(lhs[k]), "rhs": float(rhs[k])})
    return BoundAudit(float(ratio[k]), bool(np.all(ok)), worst, int(lhs.size), label)


def tv_distance(mu, nu, points_mu=None, points_nu=None) -> float:
    """Total variation ``0.5 * sum |mu - nu|`` of two mass vectors on one grid."""
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    if mu.shape != nu.shape:
        raise DomainError("measures live on grids of different sizes")
    if points_mu is not None and points_nu is not None:
        if not np.array_equal(np.asarray(points_mu), np.asarray(points_nu)):
            raise DomainError("measures live on different grids")
    return 0.5 * float(np.abs(mu - nu).sum())


def _matrix_power_rows(A, rows, n_max):
    """Rows of ``A^n`` for ``n = 0..n_max``: array ``(n_max+1, len(rows), size)``."""
    dense = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
    cur = np.zeros((len(rows), dense.shape[0]))
    cur[np.arange(len(rows)), rows] = 1.0
    out = np.empty((n_max + 1,) + cur.shape)
    out[0] = cur
    for k in range(1, n_max + 1):
        cur = cur @ dense
        out[k] = cur
    return out


def audit_lindley(kernel: Kernel, cert, n_max: int = 60, i_max: int = 30, j_max: int = 20,
                  rate_scale: float = 1.0) -> dict:
    """Audit the pointwise and indicator bounds of a reflected-walk certificate.

    Checks ``|(P^n V)(i) - pi(V)| <= c1 kappa^n gamma^i`` and
    ``|P^n(i, j) - pi(j)| <= c1 kappa^n gamma^(i+1) / ((gamma - 1) gamma^j)``
    over ``n <= n_max``, ``i <= i_max``, ``j <= j_max``. ``rate_scale``
    multiplies ``kappa`` (0.5 gives the negative control).
    """
    gamma, kappa, c1 = cert.gamma, cert.kappa1 * rate_scale, cert.c1
    M = i_max + n_max * max(kernel.support_radius, 1) + 10
    if kernel.exact_rows(n_max, M) < i_max:
        raise TruncationError("truncation too small for the audit window")
    pi = np.asarray(cert.pi)
    if pi.size < M + 1:
        pi = np.concatenate([pi, np.zeros(M + 1 - pi.size)])
    A = kernel.csr(M, REFLECT_LAST)
    rows = _matrix_power_rows(A, list(range(i_max + 1)), n_max)  # (n, i, j)
    vg = gamma ** np.arange(M + 1, dtype=np.float64)
    ns = np.arange(n_max + 1)[:, None]
    ii = np.arange(i_max + 1)[None, :]
    lhs_v = np.abs(rows @ vg - cert.c1)
    rhs_v = c1 * kappa ** ns * gamma ** ii * 1.0
    idx_v = [{"f": "V", "n": int(n), "i": int(i)} for n in range(n_max + 1) for i in range(i_max + 1)]
    lhs_j = np.abs(rows[:, :, : j_max + 1] - pi[None, None, : j_max + 1])
    m1 = np.array([m1_indicator(j, gamma) for j in range(j_max + 1)])
    rhs_j = c1 * kappa ** ns[:, :, None] * (gamma ** ii)[:, :, None] * m1[None, None, :]
    idx_j = [{"f": f"1_{j}", "n": int(n), "i": int(i), "j": int(j)}
             for n in range(n_max + 1) for i in range(i_max + 1) for j in range(j_max + 1)]
    return {
        "pointwise": audit_bound(lhs_v, np.broadcast_to(rhs_v, lhs_v.shape), idx_v,
                                 model_hash=kernel.model_hash, certificate_hash=cert.model_hash or None),
        "indicator": audit_bound(lhs_j, rhs_j, idx_j,
                                 model_hash=kernel.model_hash, certificate_hash=cert.model_hash or None),
    }


def audit_tv_grid(kernel: GridKernel, prefactor: float, rate: float, x_list, n_max: int,
                  n_min: int = 0, pi=None) -> BoundAudit:
    """Audit ``TV(delta_x P^n, pi) <= prefactor (1 + |x|) rate^n`` on a grid kernel."""
    if pi is None:
        pi = stationary(kernel, tol=1e-14)
    idx = [kernel.index_of(x) for x in x_list]
    rows = _matrix_power_rows(kernel.matrix, idx, n_max)
    lhs, rhs, labels = [], [], []
    for n in range(n_min, n_max + 1):
        for k, x in enumerate(x_list):
            lhs.append(tv_distance(rows[n, k], pi))
            rhs.append(prefactor * (1.0 + abs(x)) * rate ** n)
            labels.append({"x": float(x), "n": n})
    return audit_bound(lhs, rhs, labels)


def tv_table(kernel: GridKernel, x_list, n_max: int, pi=None) -> np.ndarray:
    """``TV(delta_x P^n, pi)`` for each ``x`` (rows) and ``n = 0..n_max`` (columns)."""
    if pi is None:
        pi = stationary(kernel, tol=1e-14)
    idx = [kernel.index_of(x) for x in x_list]
    rows = _matrix_power_rows(kernel.matrix, idx, n_max)
    return np.array([[tv_distance(rows[n, k], pi) for n in range(n_max + 1)] for k in range(len(idx))])

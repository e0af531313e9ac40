"""Contraction constants and explicit certificates for iterated random functions."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, special

from . import _kernels
from .errors import DomainError, InfeasibleError, UnsupportedModelError
from .kernels import REFLECT_LAST, IFSModel, ModelBundle, make_lindley
from .verify import BoundAudit, audit_bound, stationary
from .weights import WeightFn

MC_DIVERGENCE = 1e12


@dataclass
class ContractionEstimate:
    kappa1: float
    kappa_hat: float
    stderr: float
    method: str
    a: float

    def to_dict(self) -> dict:
        return asdict(self)


def _mean_lipschitz_power(model: IFSModel, a: float, n_samples: int, seed: int):
    if model.noise_expectation is not None:
        val = model.noise_expectation(lambda v: float(model.lipschitz_coeff(v)) ** a)
        return val, 0.0, "quadrature"
    rng = np.random.default_rng(seed)
    draws = np.asarray(model.lipschitz_coeff(model.noise_sampler(rng, n_samples)), dtype=np.float64) ** a
    mean = float(draws.mean())
    if not math.isfinite(mean) or mean > MC_DIVERGENCE:
        raise DomainError(f"Monte Carlo estimate of E[L^a] diverges ({mean:.3e})")
    return mean, float(draws.std(ddof=1) / math.sqrt(n_samples)), "monte_carlo"


def contraction_estimate(model: IFSModel, a: float = 1.0, n_samples: int = 100_000,
                         seed: int = 0) -> ContractionEstimate:
    """``kappa_1 = E[L(theta)^a]^(1/a)`` and the asymptotic ``kappa_hat_a``.

    ``kappa_hat_a`` comes from the model's closed form when it has one and
    otherwise falls back to ``kappa_1``, which bounds it from above.
    """
    if a < 1.0:
        raise DomainError("a must be at least 1")
    mean, se, method = _mean_lipschitz_power(model, a, n_samples, seed)
    kappa1 = mean ** (1.0 / a)
    se_k = (1.0 / a) * mean ** (1.0 / a - 1.0) * se if mean > 0 else 0.0
    closed = model.closed_forms.get("kappa_hat")
    if closed is not None:
        return ContractionEstimate(kappa1, float(closed(a)), se_k, "closed_form", a)
    return ContractionEstimate(kappa1, kappa1, se_k, method, a)


def composed_lipschitz_moments(model: IFSModel, a: float, n_max: int, n_samples: int = 20_000,
                               seed: int = 0):
    """Monte Carlo ``E[prod_{k<=n} L(theta_k)^a]^(1/(n a))`` for ``n = 1..n_max``.

    Returns ``(estimate, stderr)`` arrays of length ``n_max``.
    """
    rng = np.random.default_rng(seed)
    L = np.asarray(model.lipschitz_coeff(model.noise_sampler(rng, (n_samples, n_max))), dtype=np.float64)
    logs = np.cumsum(a * np.log(np.maximum(L, 1e-300)), axis=1)
    prods = np.exp(logs)
    mean = prods.mean(axis=0)
    se = prods.std(axis=0, ddof=1) / math.sqrt(n_samples)
    n = np.arange(1, n_max + 1)
    est = mean ** (1.0 / (n * a))
    est_se = est / (n * a) * se / mean
    return est, est_se


@dataclass
class LindleyCertificate:
    """Explicit constants for the reflected walk in the weight ``gamma**n``."""

    gamma: float
    kappa1: float
    c1: float
    c_rho: float
    tail_estimate: float
    mean_increment: float
    M: int
    pi: np.ndarray = field(repr=False)
    model_hash: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pi"] = [float(x) for x in self.pi[:50]]
        return d


def lindley_certificate(bundle_or_increments, gamma: float | None = None, M: int = 200) -> LindleyCertificate:
    """Rate ``kappa1 = E[gamma**theta]`` and constants ``c1 = pi(V)``, ``c_rho = c1 (gamma+1)/(gamma-1)``.

    The stationary law comes from power iteration on the reflected
    truncation at level ``M``.

    Raises
    ------
    InfeasibleError
        if ``E[gamma**theta] >= 1``.
    """
    if isinstance(bundle_or_increments, ModelBundle):
        bundle = bundle_or_increments
        if gamma is not None and gamma != bundle.ifs.gamma:
            bundle = make_lindley(bundle.ifs.increments, gamma)
    else:
        bundle = make_lindley(bundle_or_increments, gamma)
    law = bundle.ifs.increments
    g = bundle.ifs.gamma
    mean_inc = math.fsum(k * w for k, w in law.items())
    if mean_inc >= 0:
        warnings.warn(f"increments have mean {mean_inc:.3g} >= 0; the walk is not positive recurrent",
                      RuntimeWarning, stacklevel=2)
    kappa1 = math.fsum(w * g ** k for k, w in law.items())
    if kappa1 >= 1.0:
        raise InfeasibleError(f"E[gamma^theta] = {kappa1:.6g} >= 1 for gamma = {g}")
    V = WeightFn.geometric(g)
    pi = stationary(bundle.kernel, M, REFLECT_LAST, tol=1e-14, weight=V)
    with np.errstate(divide="ignore"):
        terms = np.exp(np.log(pi) + V.log_eval(np.arange(M + 1)))
    c1 = float(math.fsum(terms))
    # geometric extrapolation of the neglected tail from the middle of the range
    k = (3 * M) // 4
    ratio = terms[k + 1] / terms[k] if terms[k] > 0 else 0.0
    tail = float(terms[M] * ratio / (1.0 - ratio)) if 0.0 < ratio < 1.0 else float("inf")
    c_rho = c1 * (g + 1.0) / (g - 1.0)
    return LindleyCertificate(g, kappa1, c1, c_rho, tail, mean_inc, M, pi, bundle.kernel.model_hash)


def geometric_mh_constants(p: float) -> tuple[float, float, float]:
    """``(gamma, kappa1, c_rho) = (p**-0.5, sqrt(p) + (1-p)/2, (1+sqrt p)**2 / (1-sqrt p))``."""
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0, 1)")
    s = math.sqrt(p)
    return 1.0 / s, s + (1.0 - p) / 2.0, (1.0 + s) ** 2 / (1.0 - s)


# ---------------------------------------------------------------------------
# moment bounds


@dataclass
class XiBound:
    r: float
    xi: float
    xi1: float
    delta: float
    method: str

    def to_dict(self) -> dict:
        return asdict(self)


def _noise_mean(model: IFSModel, g, samples):
    if model.noise_expectation is not None:
        return model.noise_expectation(g)
    return float(np.mean(g(samples)))


def xi_bound(model: IFSModel, a: float, delta: float, n_samples: int = 1_000_000, seed: int = 0,
             grid_ratio: float = 1.01) -> XiBound:
    """Bound ``xi = sup_n sup_x (P^n p^a)(x) / p(x)^a`` with ``p = 1 + d(., x0)``.

    Finds the smallest ``r`` on the grid ``1e-6 * grid_ratio**k`` such that
    ``E[((1 + L t + d(F x0, x0)) / (1 + t))^a] <= delta`` at ``t = r, 2r, 4r``
    and returns ``1 + xi1 (1 + r)^a / (1 - delta)`` with
    ``xi1 = E[(max(1, L) + d(F x0, x0))^a]``. Models with a known ``xi`` for
    this ``a`` return it directly.
    """
    known = model.closed_forms.get("xi", {})
    if a in known:
        return XiBound(0.0, float(known[a]), float("nan"), float(delta), "closed_form")
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    samples = None
    if model.noise_expectation is None:
        samples = model.noise_sampler(np.random.default_rng(seed), n_samples)
    x0 = model.x0

    def L(v):
        return np.asarray(model.lipschitz_coeff(v), dtype=np.float64)

    def jump(v):
        return np.asarray(model.distance(model.step(v, x0), x0), dtype=np.float64)

    moment = _noise_mean(model, lambda v: L(v) ** a, samples)
    if not moment < delta:
        raise DomainError(f"E[L^a] = {moment:.6g} is not below delta = {delta}")

    def g(t):
        return _noise_mean(model, lambda v: ((1.0 + L(v) * t + jump(v)) / (1.0 + t)) ** a, samples)

    def ok(r):
        return all(g(m * r) <= delta for m in (1.0, 2.0, 4.0))

    grid = 1e-6 * grid_ratio ** np.arange(int(math.log(1e14) / math.log(grid_ratio)) + 1)
    if not ok(grid[-1]):
        raise DomainError("no radius on the search grid satisfies the drift inequality")
    lo, hi = -1, grid.size - 1  # the predicate is monotone for these expectations; bisect
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(grid[mid]):
            hi = mid
        else:
            lo = mid
    r = float(grid[hi])
    xi1 = _noise_mean(model, lambda v: (np.maximum(1.0, L(v)) + jump(v)) ** a, samples)
    xi = 1.0 + xi1 * (1.0 + r) ** a / (1.0 - delta)
    return XiBound(r, float(xi), float(xi1), float(delta), "drift_recipe")


def gaussian_abs_moment(std: float, b: float) -> float:
    """``E|X|^b`` for ``X ~ N(0, std**2)``."""
    return std ** b * 2.0 ** (b / 2.0) * special.gamma((b + 1.0) / 2.0) / math.sqrt(math.pi)


def gaussian_shifted_moment(std: float, shift: float, b: float) -> float:
    """``E[(shift + |X|)^b]`` for ``X ~ N(0, std**2)``."""
    if std == 0:
        return shift ** b
    val, _ = integrate.quad(lambda x: (shift + x) ** b * math.exp(-0.5 * (x / std) ** 2),
                            0.0, np.inf, epsabs=1e-14, epsrel=1e-13)
    return val * 2.0 / (std * math.sqrt(2.0 * math.pi))


@dataclass
class ARConstants:
    """Constants of the explicit bound for ``X_n = theta X_{n-1} + noise``."""

    theta: float
    a: float
    noise_moment: float
    eps0: float
    r: float
    rho: float
    xi1: float
    xi: float
    pi_norm1: float
    pi_norm_a: float
    c1: float
    d0: float
    tv_prefactor: float

    def to_dict(self) -> dict:
        return asdict(self)


def ar_constants(theta: float, a: float, noise_std: float, stationary_std: float = 1.0,
                 xi: float | None = None) -> ARConstants:
    """Explicit constants for a scalar Gaussian autoregression.

    ``c1 = xi^((a-1)/a) ||pi||_1 (1 + ||pi||_a)^(a-1)`` with
    ``||pi||_b = E[(1 + |X|)^b]^(1/b)`` and ``d0 = 2|theta| / sqrt(2 pi sigma^2)``.
    ``tv_prefactor`` is ``c1 d0 / |theta|``, so that
    ``TV(mu P^n, pi) <= tv_prefactor * mu(1 + |x|) * |theta|^n``.
    ``xi`` overrides the generic moment bound when a sharper one is known.
    """
    if not abs(theta) < 1.0:
        raise DomainError("|theta| must be < 1")
    if a < 1.0:
        raise DomainError("a must be at least 1")
    if noise_std <= 0:
        raise DomainError("noise_std must be positive")
    at = abs(theta)
    m = gaussian_abs_moment(noise_std, a) ** (1.0 / a)
    eps0 = (1.0 - at) / 2.0
    r = max(0.0, (1.0 + m - eps0) / eps0)
    rho = ((1.0 + at) / 2.0) ** a
    xi1 = gaussian_shifted_moment(noise_std, at, a)
    xi_val = 1.0 + xi1 * (1.0 + r) ** a / (1.0 - rho) if xi is None else float(xi)
    norm1 = gaussian_shifted_moment(stationary_std, 1.0, 1.0)
    norm_a = gaussian_shifted_moment(stationary_std, 1.0, a) ** (1.0 / a)
    c1 = xi_val ** ((a - 1.0) / a) * norm1 * (1.0 + norm_a) ** (a - 1.0)
    d0 = 2.0 * at / math.sqrt(2.0 * math.pi * noise_std ** 2)
    pref = c1 * d0 / at if at > 0 else float("nan")
    return ARConstants(theta, a, m, eps0, r, rho, xi1, xi_val, norm1, norm_a, c1, d0, pref)


def c_gamma_beta(gamma: float, beta: float, theta: float, x_grid=None, y_max: float = 1e4,
                 n_nodes: int = 20001) -> float:
    """``sup_x (1+|x|)^-gamma * int (1+|y+theta x|)^gamma / (1+|y|)^beta dy``.

    Trapezoid quadrature on ``[-y_max, y_max]`` in the variable
    ``log(1 + |y|)``, plus an analytic upper bound on the two tails.
    """
    if not beta > 1.0 + gamma:
        raise DomainError(f"need beta > 1 + gamma, got beta={beta}, gamma={gamma}")
    if x_grid is None:
        x_grid = np.linspace(0.0, 20.0, 81)
    t = np.linspace(0.0, math.log1p(y_max), n_nodes)
    y = np.expm1(t)
    jac = np.exp(t)
    best = 0.0
    for x in np.atleast_1d(x_grid):
        s = theta * x
        total = 0.0
        for sign in (1.0, -1.0):
            yy = sign * y
            vals = (1.0 + np.abs(yy + s)) ** gamma / (1.0 + y) ** beta * jac
            total += integrate.trapezoid(vals, t)
        tail = (1.0 + abs(s) / (1.0 + y_max)) ** gamma * (1.0 + y_max) ** (gamma - beta + 1.0) / (beta - gamma - 1.0)
        total += 2.0 * tail
        best = max(best, total / (1.0 + abs(x)) ** gamma)
    return float(best)


# ---------------------------------------------------------------------------
# coupling inequality


@dataclass
class CouplingCheck:
    n: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    stderr: np.ndarray | None
    exact: bool
    audit: BoundAudit

    @property
    def ratio(self) -> np.ndarray:
        return self.lhs / self.rhs


def coupling_inequality_check(model: IFSModel, a: float, n_max: int, x1, x2, n_paths: int = 100_000,
                              seed: int = 0, xi: float | None = None) -> CouplingCheck:
    """Check ``E[Delta_n] <= xi^((a-1)/a) kappa1^n E[d(X0, Y0)] (||mu1||_a + ||mu2||_a)^(a-1)``.

    ``Delta_n = d(X_n, Y_n) (p(X_n) + p(Y_n))^(a-1)`` for two copies driven
    by the same noise from ``x1`` and ``x2`` (scalars or arrays of paired
    starting points). For ``a = 1`` and maps whose Lipschitz constant is
    attained on every pair the left side is computed exactly.
    """
    x1 = np.atleast_1d(np.asarray(x1, dtype=np.float64))
    x2 = np.atleast_1d(np.asarray(x2, dtype=np.float64))
    if x1.shape != x2.shape:
        raise DomainError("starting points must be paired")
    d0 = float(np.mean(model.distance(x1, x2)))
    norm1 = float(np.mean(model.moment_weight(x1) ** a)) ** (1.0 / a)
    norm2 = float(np.mean(model.moment_weight(x2) ** a)) ** (1.0 / a)
    closed = model.closed_forms.get("kappa_hat")
    kappa = float(closed(a)) if closed is not None else contraction_estimate(model, a).kappa1
    if a == 1.0:
        xi_factor = 1.0
    else:
        if xi is None:
            known = model.closed_forms.get("xi", {})
            if a not in known:
                raise DomainError("pass xi explicitly for this model and exponent")
            xi = known[a]
        xi_factor = xi ** ((a - 1.0) / a)
    n = np.arange(n_max + 1)
    rhs = xi_factor * kappa ** n * d0 * (norm1 + norm2) ** (a - 1.0)
    exact = a == 1.0 and model.closed_forms.get("lipschitz_exact_for_compositions") and model.affine is not None
    if exact:
        mean_l = model.noise_expectation(lambda v: float(model.lipschitz_coeff(v)))
        lhs = d0 * mean_l ** n
        audit = audit_bound(lhs, rhs, [{"n": int(k)} for k in n], tol=1e-12)
        return CouplingCheck(n, lhs, rhs, None, True, audit)
    if model.affine is None:
        raise UnsupportedModelError("Monte Carlo coupling check needs an affine model")
    rng = np.random.default_rng(seed)
    sums = np.zeros(n_max + 1)
    sums_sq = np.zeros(n_max + 1)
    chunk = 20_000
    done = 0
    while done < n_paths:
        m = min(chunk, n_paths - done)
        pick = rng.integers(0, x1.size, size=m) if x1.size > 1 else np.zeros(m, dtype=int)
        v = model.noise_sampler(rng, (m, n_max))
        scale, shift = model.affine(v)
        s, sq = _kernels.coupled_affine_moments(x1[pick], x2[pick], np.ascontiguousarray(scale, dtype=np.float64),
                                                np.ascontiguousarray(shift, dtype=np.float64),
                                                float(a), float(model.x0))
        sums += s
        sums_sq += sq
        done += m
    lhs = sums / n_paths
    var = np.maximum(sums_sq / n_paths - lhs ** 2, 0.0) * n_paths / max(n_paths - 1, 1)
    se = np.sqrt(var / n_paths)
    audit = audit_bound(lhs, rhs, [{"n": int(k)} for k in n], stderr=se)
    return CouplingCheck(n, lhs, rhs, se, False, audit)

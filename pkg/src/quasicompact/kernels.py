"""Catalog of transition kernels and iterated function systems.

Countable-state kernels are described row by row: a few explicit boundary
rows followed by a rule for the remaining rows. Truncations to ``{0..M}`` are
built on demand as sparse matrices, optionally conjugated by a weight so that
the non-normal structure of drifting chains does not spoil dense eigensolvers.

Kernels on the real line are represented by a quadrature grid
(:class:`GridKernel`).
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import sparse, stats
from scipy import integrate

from .errors import DomainError, KernelError, UnsupportedModelError

SUBSTOCHASTIC = "Substochastic"
REFLECT_LAST = "ReflectLast"
_POLICIES = {"substochastic": SUBSTOCHASTIC, "reflectlast": REFLECT_LAST, "reflect_last": REFLECT_LAST}

ROW_TOL = 1e-12


def normalize_policy(policy: str) -> str:
    try:
        return _POLICIES[policy.replace("-", "_").lower()]
    except (KeyError, AttributeError):
        raise DomainError(f"unknown truncation policy {policy!r}") from None


def config_hash(config: Mapping) -> str:
    """Stable SHA-256 of a JSON-able configuration."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()


def _as_row(row) -> dict[int, float]:
    if isinstance(row, Mapping):
        out = {int(k): float(v) for k, v in row.items()}
    else:
        out = {j: float(v) for j, v in enumerate(row)}
    return {j: v for j, v in out.items() if v != 0.0}


def _check_row(row: Mapping[int, float], index: int) -> None:
    total = 0.0
    for j, v in row.items():
        if not math.isfinite(v) or v < 0.0:
            raise KernelError(f"row {index}: entry P({index},{j}) = {v!r} is not a probability")
        if j < 0:
            raise KernelError(f"row {index}: column {j} is outside the state space")
        total += v
    if abs(total - 1.0) > ROW_TOL:
        raise KernelError(f"row {index}: mass {total!r} differs from 1")


class Kernel:
    """Transition kernel on the non-negative integers.

    Parameters
    ----------
    label : str
    boundary_rows : sequence of mapping
        Explicit rows ``P(0, .), ..., P(B-1, .)`` as ``{column: probability}``.
    row_rule : callable
        ``i -> {column: probability}`` for ``i >= B``.
    support_radius : int
        Largest forward jump ``j - i`` made by rows ``i >= B``.
    config : dict, optional
        JSON description used for hashing and reports.
    limit_increments : dict, optional
        Increment law ``{k: a_k}`` of the interior rows when they are
        translation invariant.
    """

    state_space = "countable"

    def __init__(self, label: str, boundary_rows: Sequence[Mapping[int, float]],
                 row_rule: Callable[[int], Mapping[int, float]], support_radius: int,
                 config: dict | None = None, limit_increments: Mapping[int, float] | None = None):
        self.label = label
        self.boundary_rows = [_as_row(r) for r in boundary_rows]
        for i, r in enumerate(self.boundary_rows):
            _check_row(r, i)
        self._rule = row_rule
        self.support_radius = int(support_radius)
        self.config = config or {"model": label, "params": {}}
        self.limit_increments = dict(limit_increments) if limit_increments is not None else None
        self._cache: dict[int, dict[int, float]] = {}
        self.boundary_reach = max((max(r) for r in self.boundary_rows), default=0)

    def __repr__(self):
        return f"Kernel({self.label!r}, boundary_rows={len(self.boundary_rows)}, radius={self.support_radius})"

    @property
    def model_hash(self) -> str:
        return config_hash(self.config)

    def row(self, i: int) -> dict[int, float]:
        """Row ``P(i, .)`` as a sparse mapping; checked on first access."""
        if i < 0:
            raise DomainError(f"negative state {i}")
        if i < len(self.boundary_rows):
            return self.boundary_rows[i]
        r = self._cache.get(i)
        if r is None:
            r = {int(j): float(v) for j, v in self._rule(i).items() if v != 0.0}
            _check_row(r, i)
            for j in r:
                if j - i > self.support_radius:
                    raise KernelError(f"row {i}: jump to {j} exceeds support radius {self.support_radius}")
            if len(self._cache) < 100_000:
                self._cache[i] = r
        return r

    def reach(self, i: int) -> int:
        """Largest column reachable in one step from any state ``<= i``."""
        return max(self.boundary_reach, i + self.support_radius)

    def exact_rows(self, n_steps: int, M: int) -> int:
        """Largest ``i`` whose ``n_steps``-step trajectories stay inside ``{0..M}``.

        Returns ``-1`` if there is none.
        """
        lo, hi = -1, M
        while lo < hi:  # reach is monotone, so bisect
            mid = (lo + hi + 1) // 2
            r = mid
            for _ in range(n_steps):
                r = self.reach(r)
                if r > M:
                    break
            if r <= M:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def csr(self, M: int, policy: str = SUBSTOCHASTIC, log_weight=None):
        """Sparse ``(M+1) x (M+1)`` truncation, optionally weight-conjugated.

        With ``log_weight`` the entries are ``P(i,j) V(j) / V(i)``.
        """
        policy = normalize_policy(policy)
        rows, cols, vals = [], [], []
        for i in range(M + 1):
            for j, v in self.row(i).items():
                if j > M:
                    if policy == SUBSTOCHASTIC:
                        continue
                    j = M
                rows.append(i)
                cols.append(j)
                vals.append(v)
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        vals = np.asarray(vals, dtype=np.float64)
        if log_weight is not None:
            lw = np.asarray(log_weight, dtype=np.float64)[: M + 1]
            vals = vals * np.exp(lw[cols] - lw[rows])
        A = sparse.csr_matrix((vals, (rows, cols)), shape=(M + 1, M + 1))
        A.sum_duplicates()
        A.indices = A.indices.astype(np.int32)
        A.indptr = A.indptr.astype(np.int32)
        return A

    def dense(self, M: int, policy: str = SUBSTOCHASTIC, log_weight=None) -> np.ndarray:
        return self.csr(M, policy, log_weight).toarray()


class GridKernel:
    """Kernel on the real line discretised on a trapezoid grid.

    ``matrix[i, j]`` is the mass moved from ``points[i]`` to ``points[j]``;
    rows are renormalised to one.
    """

    state_space = "grid"

    def __init__(self, label: str, points: np.ndarray, weights: np.ndarray, matrix: np.ndarray,
                 config: dict | None = None):
        self.label = label
        self.points = np.asarray(points, dtype=np.float64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.config = config or {"model": label, "params": {}}
        if np.any(self.matrix < 0) or np.max(np.abs(self.matrix.sum(axis=1) - 1.0)) > ROW_TOL:
            raise KernelError("grid kernel rows must be non-negative and sum to one")

    def __repr__(self):
        return f"GridKernel({self.label!r}, n_points={self.points.size})"

    @property
    def model_hash(self) -> str:
        return config_hash(self.config)

    @property
    def n_points(self) -> int:
        return self.points.size

    def index_of(self, x: float) -> int:
        """Index of the grid point equal to ``x`` (within half a cell)."""
        i = int(np.argmin(np.abs(self.points - x)))
        h = self.points[1] - self.points[0]
        if abs(self.points[i] - x) > 0.5 * h:
            raise DomainError(f"{x} lies outside the grid")
        return i

    def dense(self, M=None, policy=None, log_weight=None) -> np.ndarray:
        if log_weight is None:
            return self.matrix.copy()
        lw = np.asarray(log_weight, dtype=np.float64)
        return self.matrix * np.exp(lw[None, :] - lw[:, None])

    def csr(self, M=None, policy=None, log_weight=None):
        return sparse.csr_matrix(self.dense(log_weight=log_weight))


@dataclass
class IFSModel:
    """Iterated random function ``X_n = F(theta_n, X_{n-1})``.

    Attributes
    ----------
    step : callable
        ``(v, x) -> F_v(x)``, vectorised over arrays of equal shape.
    lipschitz_coeff : callable
        ``v -> L(v)``, the Lipschitz constant of ``F_v`` for ``distance``.
    noise_sampler : callable
        ``(rng, size) -> draws``.
    x0 : float
        Reference point for the moment weight ``1 + d(x, x0)``.
    distance : callable
        ``(x, y) -> d(x, y)``.
    closed_forms : dict
        Known exact quantities (``kappa_hat``, stationary norms, ...).
    affine : callable, optional
        ``v -> (scale, shift)`` when ``F_v(x) = scale * x + shift``.
    noise_expectation : callable, optional
        ``g -> E[g(theta)]`` by quadrature.
    """

    label: str
    step: Callable
    lipschitz_coeff: Callable
    noise_sampler: Callable
    x0: float
    distance: Callable
    closed_forms: dict = field(default_factory=dict)
    affine: Callable | None = None
    noise_expectation: Callable | None = None
    config: dict = field(default_factory=dict)

    def moment_weight(self, x):
        """``p(x) = 1 + d(x, x0)``."""
        return 1.0 + self.distance(x, self.x0)

    @property
    def model_hash(self) -> str:
        return config_hash(self.config or {"model": self.label})


@dataclass
class ModelBundle:
    """A kernel together with its IFS representation, if it has one."""

    kernel: Kernel | GridKernel | None
    ifs: IFSModel | None
    config: dict


# ---------------------------------------------------------------------------
# constructors


def _seq(value, name):
    if callable(value):
        return value
    if isinstance(value, (int, float)):
        v = float(value)
        return lambda n: v
    seq = [float(x) for x in value]

    def get(n):
        if n - 1 >= len(seq):
            raise DomainError(f"{name} has no entry for index {n}")
        return seq[n - 1]
    return get


def make_birth_death(p_seq, r_seq, q_seq, boundary_row, *, check_upto: int = 1000,
                     config: dict | None = None, label: str = "birth_death") -> Kernel:
    """Birth-death chain with ``P(n, n-1) = p_n``, ``P(n, n) = r_n``, ``P(n, n+1) = q_n``.

    Each of ``p_seq``, ``r_seq``, ``q_seq`` is a constant, a sequence indexed
    from ``n = 1`` or a callable ``n -> value``. ``boundary_row`` is row 0.
    """
    p, r, q = _seq(p_seq, "p_seq"), _seq(r_seq, "r_seq"), _seq(q_seq, "q_seq")

    def rule(n):
        return {n - 1: p(n), n: r(n), n + 1: q(n)}

    for n in range(1, check_upto + 1):
        try:
            vals = (p(n), r(n), q(n))
        except DomainError:
            break
        if min(vals) < 0 or abs(sum(vals) - 1.0) > ROW_TOL:
            raise KernelError(f"row {n}: p+r+q = {sum(vals)!r} with entries {vals}")
    limit = None
    if all(isinstance(s, (int, float)) for s in (p_seq, r_seq, q_seq)):
        limit = {-1: float(p_seq), 0: float(r_seq), 1: float(q_seq)}
    if config is None:
        config = {"model": "birth_death",
                  "params": {"p": _cfg(p_seq), "r": _cfg(r_seq), "q": _cfg(q_seq),
                             "boundary": _cfg(boundary_row)}}
    return Kernel(label, [boundary_row], rule, 1, config=config, limit_increments=limit)


def _cfg(value):
    if callable(value):
        return getattr(value, "__name__", "callable")
    if isinstance(value, Mapping):
        return {str(k): v for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [float(x) for x in value]
    return value


def _increment_law(increments, b=None) -> dict[int, float]:
    if isinstance(increments, Mapping):
        law = {int(k): float(v) for k, v in increments.items()}
    else:
        vals = [float(x) for x in increments]
        if len(vals) % 2 != 1:
            raise DomainError("increment sequence must have odd length 2b+1")
        half = len(vals) // 2
        law = {k - half: v for k, v in enumerate(vals)}
    law = {k: v for k, v in law.items() if v != 0.0}
    if any(v < 0 or not math.isfinite(v) for v in law.values()):
        raise KernelError("increment probabilities must be non-negative")
    if abs(math.fsum(law.values()) - 1.0) > ROW_TOL:
        raise KernelError(f"increment law has mass {math.fsum(law.values())!r}")
    if b is not None and law and max(abs(k) for k in law) > b:
        raise KernelError(f"increment law puts mass outside [-{b}, {b}]")
    return law


def make_bounded_increment_rw(b: int, increments, boundary_rows: Sequence, *,
                              config: dict | None = None) -> Kernel:
    """Random walk with increments in ``[-b, b]`` and explicit boundary rows.

    ``increments`` is ``{k: a_k}``, a length ``2b+1`` sequence, or a callable
    ``i -> {k: a_k(i)}`` for state-dependent interior rows.
    """
    if b < 1:
        raise DomainError("b must be at least 1")
    if len(boundary_rows) < b:
        raise KernelError(f"need at least {b} boundary rows, got {len(boundary_rows)}")
    if callable(increments):
        def rule(i):
            return {i + k: v for k, v in _increment_law(increments(i), b).items()}
        limit = None
    else:
        law = _increment_law(increments, b)
        limit = law

        def rule(i):
            return {i + k: v for k, v in law.items()}
    if config is None:
        config = {"model": "bounded_rw",
                  "params": {"b": b, "increments": _cfg(increments),
                             "boundary_rows": [_cfg(r) for r in boundary_rows]}}
    return Kernel("bounded_rw", boundary_rows, rule, b, config=config, limit_increments=limit)


def geometric_jumps(ratio: float):
    """``n -> (1 - ratio) * ratio**(n-1)`` for ``n >= 1``."""
    if not 0.0 < ratio < 1.0:
        raise DomainError("ratio must lie in (0, 1)")

    def q(n):
        return (1.0 - ratio) * ratio ** (n - 1)
    q.__name__ = f"geometric({ratio})"
    return q


def make_unbounded_increment_rw(p: float, q_seq, tail_tol: float = 1e-14, *,
                                config: dict | None = None) -> Kernel:
    """Walk with ``P(0, n) = q_n``, ``P(n, 0) = p`` and ``P(n, n+1) = 1 - p``.

    Row 0 is cut where the cumulative mass first exceeds ``1 - tail_tol``;
    the leftover mass is put on the last kept column.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    get = _seq(q_seq, "q_seq")
    row0: dict[int, float] = {}
    total = 0.0
    n = 0
    while total < 1.0 - tail_tol and n < 1_000_000:
        n += 1
        try:
            v = get(n)
        except DomainError:
            break
        if v < 0:
            raise KernelError(f"q_{n} = {v!r} is negative")
        if v > 0:
            row0[n] = v
            total += v
    total = math.fsum(row0.values())
    if total > 1.0 + ROW_TOL or total < 1.0 - max(tail_tol, ROW_TOL):
        raise KernelError(f"sum of q_n is {total!r}, not 1")
    last = max(row0)
    row0[last] += 1.0 - total
    q = 1.0 - p

    def rule(i):
        return {0: p, i + 1: q}
    if config is None:
        config = {"model": "unbounded_rw", "params": {"p": p, "q_seq": _cfg(q_seq)}}
    k = Kernel("unbounded_rw", [row0], rule, 1, config=config)
    k.tail_index = last
    return k


def _lindley_row(law: Mapping[int, float], i: int) -> dict[int, float]:
    row: dict[int, float] = {}
    for v, w in law.items():
        j = max(0, i + v)
        row[j] = row.get(j, 0.0) + w
    return row


def make_lindley(increments, gamma: float | None = None, *,
                 config: dict | None = None) -> ModelBundle:
    """Reflected walk ``X_n = max(0, X_{n-1} + theta_n)``.

    Returns the kernel together with its IFS, whose Lipschitz coefficient is
    ``gamma**v`` for the distance ``|gamma**i - gamma**j|``. When ``gamma`` is
    omitted it is chosen to minimise ``E[gamma**theta]``.
    """
    from .weights import GeometricDistance

    law = _increment_law(increments)
    v_min, v_max = min(law), max(law)
    n_boundary = max(0, -v_min)
    boundary = [_lindley_row(law, i) for i in range(n_boundary)]

    def rule(i):
        return {i + v: w for v, w in law.items()}
    if gamma is None:
        from .drift import minimize_phi

        if math.fsum(k * a for k, a in law.items()) >= 0:
            raise DomainError("increments have non-negative mean; pass gamma explicitly")
        gamma = minimize_phi(law, gamma_max=_default_gamma_max(law)).gamma
    gamma = float(gamma)
    if config is None:
        config = {"model": "lindley", "params": {"increments": {str(k): v for k, v in sorted(law.items())},
                                                 "gamma": gamma}}
    kernel = Kernel("lindley", boundary, rule, max(v_max, 0), config=config, limit_increments=law)
    support = np.array(sorted(law), dtype=np.int64)
    probs = np.array([law[k] for k in sorted(law)])
    dist = GeometricDistance(gamma)

    def kappa_hat(a):
        return math.fsum(w * gamma ** (a * v) for v, w in law.items()) ** (1.0 / a)

    ifs = IFSModel(
        label="lindley",
        step=lambda v, x: np.maximum(0, np.asarray(x) + np.asarray(v)),
        lipschitz_coeff=lambda v: np.power(gamma, np.asarray(v, dtype=np.float64)),
        noise_sampler=lambda rng, size: rng.choice(support, size=size, p=probs),
        x0=0,
        distance=dist,
        closed_forms={"kappa_hat": kappa_hat, "lipschitz_exact_for_compositions": True},
        noise_expectation=lambda g: math.fsum(w * g(v) for v, w in law.items()),
        config=config,
    )
    ifs.gamma = gamma
    ifs.increments = law
    return ModelBundle(kernel, ifs, config)


def _default_gamma_max(law) -> float:
    # the mgf is finite everywhere for finite support; 1e3 is ample for minimisers
    return 1e3


def make_ar1(theta: float, noise_std: float, *, config: dict | None = None) -> IFSModel:
    """Scalar autoregression ``X_n = theta X_{n-1} + noise`` with Gaussian noise."""
    if not abs(theta) < 1.0:
        raise DomainError(f"|theta| must be < 1, got {theta!r}")
    if noise_std < 0:
        raise DomainError("noise_std must be non-negative")
    law = stats.norm(0.0, noise_std) if noise_std > 0 else None

    def sampler(rng, size):
        if noise_std == 0:
            return np.zeros(size)
        return rng.normal(0.0, noise_std, size=size)

    def expect(g):
        if noise_std == 0:
            return float(g(0.0))
        # split at 0, where integrands built from |v| have a kink
        left, _ = integrate.quad(lambda v: g(v) * law.pdf(v), -np.inf, 0.0, epsabs=1e-15, epsrel=1e-13, limit=200)
        right, _ = integrate.quad(lambda v: g(v) * law.pdf(v), 0.0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=200)
        return left + right

    if config is None:
        config = {"model": "ar1", "params": {"theta": theta, "noise_std": noise_std}}
    return IFSModel(
        label="ar1",
        step=lambda v, x: theta * np.asarray(x) + np.asarray(v),
        lipschitz_coeff=lambda v: np.full(np.shape(v), abs(theta)) if np.ndim(v) else abs(theta),
        noise_sampler=sampler,
        x0=0.0,
        distance=lambda x, y: np.abs(np.asarray(x) - np.asarray(y)),
        closed_forms={"kappa_hat": lambda a: abs(theta), "noise_std": noise_std, "theta": theta,
                      "lipschitz_exact_for_compositions": True},
        affine=lambda v: (np.full(np.shape(v), theta), v),
        noise_expectation=expect,
        config=config,
    )


def trapezoid_grid(half_width: float, n_points: int):
    """Uniform grid on ``[-half_width, half_width]`` with trapezoid weights."""
    if n_points < 32:
        raise DomainError(f"grid needs at least 32 points, got {n_points}")
    x = np.linspace(-half_width, half_width, n_points)
    w = np.full(n_points, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return x, w


def make_contracting_normals(theta: float, half_width: float = 8.0, n_points: int = 401, *,
                             config: dict | None = None) -> ModelBundle:
    """Gaussian autoregression ``N(theta x, 1 - theta**2)`` with ``N(0, 1)`` invariant law.

    The kernel is discretised on a trapezoid grid with rows renormalised.
    """
    if not abs(theta) < 1.0:
        raise DomainError(f"|theta| must be < 1, got {theta!r}")
    x, w = trapezoid_grid(half_width, n_points)
    sd = math.sqrt(1.0 - theta * theta)
    dens = stats.norm.pdf((x[None, :] - theta * x[:, None]) / sd) / sd
    mat = dens * w[None, :]
    mat /= mat.sum(axis=1, keepdims=True)
    if config is None:
        config = {"model": "contracting_normals",
                  "params": {"theta": theta, "half_width": half_width, "n_points": n_points}}
    kernel = GridKernel("contracting_normals", x, w, mat, config=config)
    ifs = make_ar1(theta, sd, config=config)
    ifs.label = "contracting_normals"
    abs1 = 1.0 + math.sqrt(2.0 / math.pi)
    ifs.closed_forms.update({
        "stationary": "normal(0,1)",
        "stationary_norm": {1: abs1, 2: math.sqrt(2.0 * abs1)},
        "xi": {2: 4.0},
    })
    return ModelBundle(kernel, ifs, config)


def make_multiplicative_uniform(*, config: dict | None = None) -> IFSModel:
    """``X_n = U_n X_{n-1}`` with ``U_n`` uniform on ``[0, 1]``; invariant law ``delta_0``."""
    if config is None:
        config = {"model": "multiplicative_uniform", "params": {}}
    return IFSModel(
        label="multiplicative_uniform",
        step=lambda v, x: np.asarray(v) * np.asarray(x),
        lipschitz_coeff=lambda v: np.asarray(v, dtype=np.float64),
        noise_sampler=lambda rng, size: rng.uniform(0.0, 1.0, size=size),
        x0=0.0,
        distance=lambda x, y: np.abs(np.asarray(x) - np.asarray(y)),
        closed_forms={"kappa_hat": lambda a: (1.0 / (a + 1.0)) ** (1.0 / a),
                      "stationary": "delta(0)", "stationary_norm": {"any": 1.0},
                      "lipschitz_exact_for_compositions": True},
        affine=lambda v: (v, np.zeros(np.shape(v))),
        noise_expectation=lambda g: integrate.quad(g, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12)[0],
        config=config,
    )


def make_mm1(beta: float, mu: float, h: float) -> Kernel:
    """Uniformised M/M/1 queue ``I + hQ`` with arrival rate ``beta`` and service rate ``mu``."""
    if not (beta > 0 and mu > 0 and h > 0):
        raise DomainError("beta, mu and h must be positive")
    if h * (beta + mu) > 1.0:
        raise DomainError("uniformisation needs h <= 1/(beta + mu)")
    config = {"model": "mm1", "params": {"beta": beta, "mu": mu, "h": h}}
    return make_birth_death(mu * h, 1.0 - h * (beta + mu), beta * h,
                            {0: 1.0 - beta * h, 1: beta * h}, config=config, label="mm1")


def make_poisson_mh() -> Kernel:
    """Metropolis-Hastings chain targeting Poisson(1) with the +-1 proposal."""
    config = {"model": "poisson_mh", "params": {}}
    return make_birth_death(lambda n: 0.5, lambda n: n / (2.0 * (n + 1)), lambda n: 1.0 / (2.0 * (n + 1)),
                            {0: 0.5, 1: 0.5}, config=config, label="poisson_mh")


def make_geometric_mh(p: float) -> ModelBundle:
    """Metropolis-Hastings chain targeting Geometric(p) with the +-1 proposal."""
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0, 1)")
    config = {"model": "geometric_mh", "params": {"p": p}}
    return make_lindley({-1: 0.5, 0: (1.0 - p) / 2.0, 1: p / 2.0}, gamma=p ** -0.5, config=config)


def make_identity() -> Kernel:
    """The identity kernel; it satisfies no geometric drift condition."""
    return Kernel("identity", [], lambda i: {i: 1.0}, 0,
                  config={"model": "identity", "params": {}}, limit_increments={0: 1.0})


# ---------------------------------------------------------------------------
# JSON configs


def _need(params, *names):
    missing = [n for n in names if n not in params]
    if missing:
        raise DomainError(f"missing parameter(s): {', '.join(missing)}")
    return [params[n] for n in names]


def model_from_config(cfg: Mapping) -> ModelBundle:
    """Build a model from ``{"model": name, "params": {...}}``."""
    if not isinstance(cfg, Mapping) or "model" not in cfg:
        raise DomainError("config must be an object with a 'model' field")
    name = cfg["model"]
    params = dict(cfg.get("params", {}))
    config = {"model": name, "params": params}
    if name == "birth_death":
        p, r, q = _need(params, "p", "r", "q")
        if "a" in params:
            boundary = {0: params["a"], 1: 1.0 - params["a"]}
        else:
            boundary = _need(params, "boundary")[0]
        return ModelBundle(make_birth_death(p, r, q, boundary, config=config), None, config)
    if name == "bounded_rw":
        b, inc, rows = _need(params, "b", "increments", "boundary_rows")
        return ModelBundle(make_bounded_increment_rw(int(b), inc, rows, config=config), None, config)
    if name == "unbounded_rw":
        (p,) = _need(params, "p")
        if "q_ratio" in params:
            q_seq = geometric_jumps(params["q_ratio"])
        else:
            (q_seq,) = _need(params, "q")
        return ModelBundle(make_unbounded_increment_rw(p, q_seq, config=config), None, config)
    if name == "lindley":
        (inc,) = _need(params, "increments")
        return make_lindley(inc, params.get("gamma"), config=config)
    if name == "geometric_mh":
        (p,) = _need(params, "p")
        bundle = make_geometric_mh(p)
        return ModelBundle(bundle.kernel, bundle.ifs, config)
    if name == "contracting_normals":
        (theta,) = _need(params, "theta")
        return make_contracting_normals(theta, params.get("half_width", 8.0),
                                        int(params.get("n_points", 401)), config=config)
    if name == "mm1":
        beta, mu, h = _need(params, "beta", "mu", "h")
        k = make_mm1(beta, mu, h)
        return ModelBundle(k, None, config)
    if name == "poisson_mh":
        return ModelBundle(make_poisson_mh(), None, config)
    if name == "multiplicative_uniform":
        return ModelBundle(None, make_multiplicative_uniform(config=config), config)
    if name == "ar1":
        theta, sd = _need(params, "theta", "noise_std")
        return ModelBundle(None, make_ar1(theta, sd, config=config), config)
    if name == "identity":
        return ModelBundle(make_identity(), None, config)
    raise UnsupportedModelError(f"unknown model {name!r}")

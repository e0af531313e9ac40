"""NumPy implementations of the hot loops.

These mirror ``_ckernels.pyx`` one to one and are used when the compiled
extension is not available (or when ``QUASICOMPACT_PURE_PYTHON`` is set).
"""
import numpy as np


def m1_pair_max(values, log_gamma):
    """Largest ``|f(i) - f(j)| / |g**i - g**j|`` over ``i < j``.

    Parameters
    ----------
    values : ndarray of float64
        Function values ``f(0), ..., f(M)``.
    log_gamma : float
        ``log(g)`` with ``g > 1``.

    Returns
    -------
    (ratio, i, j) : tuple
        The maximal ratio and the pair that attains it. ``(0.0, -1, -1)``
        when ``f`` is constant.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    n = values.shape[0]
    # log(1 - g**-k) for k = 0..n-1; entry 0 is never used
    ks = np.arange(n, dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_gap = np.log(-np.expm1(-ks * log_gamma))
    best = -np.inf
    best_i = best_j = -1
    for j in range(1, n):
        diff = np.abs(values[:j] - values[j])
        with np.errstate(divide="ignore"):
            logs = np.log(diff) - j * log_gamma - log_gap[j:0:-1]
        k = int(np.argmax(logs))
        if logs[k] > best:
            best, best_i, best_j = float(logs[k]), k, j
    if best_i < 0:
        return 0.0, -1, -1
    return float(np.exp(best)), best_i, best_j


def csr_power_history(indptr, indices, data, x, n_steps):
    """Return the iterates ``x, Ax, ..., A**n_steps x`` of a square CSR matrix as rows."""
    from scipy.sparse import csr_matrix

    n = indptr.shape[0] - 1
    A = csr_matrix((data, indices, indptr), shape=(n, n))
    out = np.empty((n_steps + 1, n))
    out[0] = x
    for k in range(1, n_steps + 1):
        out[k] = A @ out[k - 1]
    return out


def coupled_affine_moments(x1, x2, scale, shift, exponent, center):
    """Per-step sums of the coupled discrepancy for an affine random map.

    Each path starts at ``(x1[k], x2[k])`` and both copies are pushed through
    the same map ``x -> scale[k, n] * x + shift[k, n]``. The tracked quantity
    is ``|X1 - X2| * (2 + |X1 - c| + |X2 - c|) ** (exponent - 1)``.

    Returns
    -------
    sums, sums_sq : ndarray, shape (n_steps + 1,)
    """
    a = np.array(x1, dtype=np.float64)
    b = np.array(x2, dtype=np.float64)
    n_steps = scale.shape[1]
    sums = np.empty(n_steps + 1)
    sums_sq = np.empty(n_steps + 1)
    for n in range(n_steps + 1):
        if n > 0:
            a = scale[:, n - 1] * a + shift[:, n - 1]
            b = scale[:, n - 1] * b + shift[:, n - 1]
        delta = np.abs(a - b) * (2.0 + np.abs(a - center) + np.abs(b - center)) ** (exponent - 1.0)
        sums[n] = delta.sum()
        sums_sq[n] = (delta * delta).sum()
    return sums, sums_sq

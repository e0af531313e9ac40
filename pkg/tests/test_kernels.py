import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasicompact.errors import DomainError, KernelError
from quasicompact.kernels import (
    REFLECT_LAST,
    SUBSTOCHASTIC,
    geometric_jumps,
    make_ar1,
    make_birth_death,
    make_bounded_increment_rw,
    make_contracting_normals,
    make_geometric_mh,
    make_identity,
    make_lindley,
    make_mm1,
    make_multiplicative_uniform,
    make_poisson_mh,
    make_unbounded_increment_rw,
    model_from_config,
)
from quasicompact.weights import WeightFn

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def row_sum(row):
    return sum(row.values())


def test_birth_death_rows_sum_to_one():
    P = make_birth_death(0.5, 0.3, 0.2, {0: 0.6, 1: 0.4})
    for i in range(50):
        assert row_sum(P.row(i)) == pytest.approx(1.0, abs=1e-15)
    assert P.row(5) == {4: 0.5, 5: 0.3, 6: 0.2}


def test_poisson_mh_rows():
    P = make_poisson_mh()
    assert P.row(0) == {0: 0.5, 1: 0.5}
    for n in range(1, 40):
        r = P.row(n)
        assert r[n - 1] == 0.5
        assert r[n] == pytest.approx(n / (2 * (n + 1)))
        assert r[n + 1] == pytest.approx(1 / (2 * (n + 1)))
        assert row_sum(r) == pytest.approx(1.0, abs=1e-15)


def test_mm1_uniformisation():
    P = make_mm1(1.0, 4.0, 0.1)
    assert P.row(0) == pytest.approx({0: 0.9, 1: 0.1})
    assert P.row(3) == pytest.approx({2: 0.4, 3: 0.5, 4: 0.1})


def test_birth_death_rejects_bad_rows():
    with pytest.raises(KernelError):
        make_birth_death(0.5, 0.3, 0.3, {0: 1.0})
    with pytest.raises(KernelError):
        make_birth_death(0.5, 0.5, 0.0, {0: 0.7, 1: 0.2})


def test_bounded_rw_b1_equals_birth_death():
    A = make_bounded_increment_rw(1, {-1: 0.5, 0: 0.3, 1: 0.2}, [{0: 0.6, 1: 0.4}])
    B = make_birth_death(0.5, 0.3, 0.2, {0: 0.6, 1: 0.4})
    for i in range(30):
        assert A.row(i) == pytest.approx(B.row(i))


def test_bounded_rw_translation_invariant():
    a = (0.3, 0.2, 0.2, 0.2, 0.1)
    P = make_bounded_increment_rw(2, a, [{0: 0.5, 1: 0.5}, {0: 0.5, 2: 0.5}])
    base = {k - 2: v for k, v in enumerate(a)}
    for i in range(2, 30):
        assert {j - i: v for j, v in P.row(i).items()} == pytest.approx(base)


def test_state_dependent_increments_converge():
    base = {-1: 0.4, 0: 0.3, 1: 0.3}

    def law(i):
        eps = 1.0 / (i + 10)
        return {-1: 0.4 + 0.1 * eps, 0: 0.3 - 0.2 * eps, 1: 0.3 + 0.1 * eps}

    P = make_bounded_increment_rw(1, law, [{0: 0.5, 1: 0.5}])
    for i in range(1, 200):
        assert row_sum(P.row(i)) == pytest.approx(1.0, abs=1e-14)
    far = P.row(10 ** 6)
    for k, v in base.items():
        assert far[10 ** 6 + k] == pytest.approx(v, abs=1e-6)


def test_bounded_rw_rejects_wide_increments():
    with pytest.raises(KernelError):
        make_bounded_increment_rw(1, {-2: 0.5, 1: 0.5}, [{0: 1.0}])


def test_unbounded_rw_rows():
    P = make_unbounded_increment_rw(0.4, geometric_jumps(0.5))
    assert row_sum(P.row(0)) == pytest.approx(1.0, abs=1e-15)
    for n in range(1, 30):
        assert P.row(n) == pytest.approx({0: 0.4, n + 1: 0.6})


def test_unbounded_rw_eigenvector_exact():
    # f = (1, -p, -p, ...) satisfies P f = -p f row by row, in exact arithmetic
    p = Fraction(2, 5)
    q = 1 - p
    M = 60
    row0 = {n: Fraction(1, 2 ** n) for n in range(1, M)}
    row0[M] = 1 - sum(row0.values())
    f = [Fraction(1)] + [-p] * (M + 1)
    assert sum(w * f[j] for j, w in row0.items()) == -p * f[0]
    for i in range(1, M):
        assert p * f[0] + q * f[i + 1] == -p * f[i]


def test_unbounded_rw_drift_ratio_limit():
    P = make_unbounded_increment_rw(0.4, geometric_jumps(0.5))
    V = WeightFn.geometric(1.5)
    for n in (1, 5, 40):
        ratio = sum(w * 1.5 ** j for j, w in P.row(n).items()) / 1.5 ** n
        assert ratio == pytest.approx(0.4 / 1.5 ** n + 0.6 * 1.5, rel=1e-13)
    assert float(V.eval(0)) == 1.0


def test_lindley_geometric_mh_rows():
    b = make_geometric_mh(0.25)
    P = b.kernel
    assert P.row(0) == pytest.approx({0: 0.5 + 0.375, 1: 0.125})
    assert P.row(4) == pytest.approx({3: 0.5, 4: 0.375, 5: 0.125})


def test_lindley_positive_increments():
    P = make_lindley({1: 0.5, 2: 0.5}, gamma=1.1).kernel
    assert 0 not in P.row(0)
    assert row_sum(P.row(0)) == pytest.approx(1.0)


def test_lindley_pooled_mass():
    P = make_lindley({-2: 0.5, 1: 0.5}, gamma=1.1).kernel
    assert P.row(1)[0] == pytest.approx(0.5)
    assert P.row(1)[2] == pytest.approx(0.5)


def test_contracting_normals_grid():
    K = make_contracting_normals(0.5).kernel
    assert np.allclose(K.matrix.sum(axis=1), 1.0, atol=1e-14)
    x = K.points
    mean = K.matrix @ x
    inner = np.abs(x) <= 4
    assert np.max(np.abs(mean[inner] - 0.5 * x[inner])) < 1e-6


def test_contracting_normals_theta_zero():
    K = make_contracting_normals(0.0).kernel
    assert np.allclose(K.matrix, K.matrix[0][None, :], atol=1e-14)


def test_multiplicative_uniform_kappa():
    m = make_multiplicative_uniform()
    assert m.closed_forms["kappa_hat"](1.0) == pytest.approx(0.5)
    assert m.closed_forms["kappa_hat"](2.0) == pytest.approx(3 ** -0.5)
    rng = np.random.default_rng(1)
    mc = np.mean(m.noise_sampler(rng, 10 ** 6) ** 2) ** 0.5
    assert mc == pytest.approx(3 ** -0.5, abs=2e-3)


def test_truncation_policies():
    P = make_birth_death(0.5, 0.3, 0.2, {0: 0.6, 1: 0.4})
    sub = P.dense(20, SUBSTOCHASTIC)
    ref = P.dense(20, REFLECT_LAST)
    assert sub[-1].sum() == pytest.approx(0.8)
    assert np.allclose(ref.sum(axis=1), 1.0, atol=1e-15)


def test_conjugated_entries():
    g = 2.5 ** 0.5
    P = make_birth_death(0.5, 0.3, 0.2, {0: 0.6, 1: 0.4})
    T = P.dense(20, log_weight=WeightFn.geometric(g).log_eval(np.arange(21)))
    assert T[5, 6] == pytest.approx(0.2 * g)
    assert T[5, 4] == pytest.approx(0.5 / g)


def test_exact_rows():
    P = make_birth_death(0.5, 0.3, 0.2, {0: 0.6, 1: 0.4})
    assert P.exact_rows(1, 100) == 99
    assert P.exact_rows(10, 100) == 90


def test_identity_kernel():
    P = make_identity()
    assert P.row(7) == {7: 1.0}


def test_ar1_rejects_unit_root():
    with pytest.raises(DomainError):
        make_ar1(1.0, 1.0)


def test_model_hash_stable():
    assert make_mm1(1.0, 4.0, 0.1).model_hash == make_mm1(1.0, 4.0, 0.1).model_hash
    assert make_mm1(1.0, 4.0, 0.1).model_hash != make_mm1(1.0, 4.0, 0.2).model_hash


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_configs_build(path):
    bundle = model_from_config(json.loads(path.read_text()))
    assert bundle.kernel is not None or bundle.ifs is not None


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=3, max_size=7).filter(lambda v: len(v) % 2 == 1),
       st.integers(0, 200))
def test_random_walk_rows_stochastic(weights, i):
    w = np.array(weights) / np.sum(weights)
    b = len(w) // 2
    bnd = [{0: 1.0}] * b
    P = make_bounded_increment_rw(b, list(w), bnd)
    assert row_sum(P.row(i)) == pytest.approx(1.0, abs=1e-12)
    A = P.dense(40, REFLECT_LAST)
    assert np.allclose(A.sum(axis=1), 1.0, atol=1e-12)

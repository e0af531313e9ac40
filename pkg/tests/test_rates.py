import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasicompact import rates
from quasicompact.errors import DomainError
from quasicompact.rates import (
    birth_death_rate,
    birth_death_rate_r_zero,
    boundary_moment,
    lambda_of_a,
    mm1_rate,
    unbounded_rw_rate_bound,
)


def test_lambda_branch():
    out = birth_death_rate(0.75, 0.2, 0.05, 0.1)
    assert out.case_label == rates.CASE_B_LAMBDA
    assert out.a1 == pytest.approx(0.75 - math.sqrt(0.15) - math.sqrt(0.05 * (0.05 + 2 * math.sqrt(0.15))))
    assert out.a1 == pytest.approx(0.15965, abs=1e-5)
    assert out.rho == pytest.approx(abs(0.1 - 0.675 / 0.7), rel=1e-14)
    assert out.rho == pytest.approx(0.864286, abs=1e-6)
    assert 2 * 0.75 > (0.8 + math.sqrt(0.15)) ** 2


def test_essential_branch():
    out = birth_death_rate(0.75, 0.2, 0.05, 0.3)
    assert out.case_label == rates.CASE_B_ESSENTIAL
    assert out.rho == pytest.approx(0.05 + 2 * math.sqrt(0.15), rel=1e-14)


def test_a0_branch():
    out = birth_death_rate(0.6, 0.2, 0.2, 0.6)
    assert out.a0 == pytest.approx(1 - 0.2 - math.sqrt(0.12))
    assert out.case_label == rates.A0_BRANCH
    assert out.rho == pytest.approx(0.2 + 2 * math.sqrt(0.12), rel=1e-14)


def test_case_a():
    # 2p <= (1 - q + sqrt(pq))**2: small p relative to q
    p, q, r = 0.45, 0.35, 0.2
    assert 2 * p <= (1 - q + math.sqrt(p * q)) ** 2
    out = birth_death_rate(p, q, r, 0.05)
    assert out.case_label == rates.CASE_A
    assert out.rho == pytest.approx(r + 2 * math.sqrt(p * q))


def test_special_a_equals_one_minus_q():
    out = birth_death_rate(0.75, 0.2, 0.05, 0.8)
    assert out.case_label == rates.SPECIAL_A_EQ_1_MINUS_Q
    assert out.lambda_a is None


def test_rejects_bad_parameters():
    with pytest.raises(DomainError):
        birth_death_rate(0.2, 0.5, 0.3, 0.1)
    with pytest.raises(DomainError):
        birth_death_rate(0.5, 0.2, 0.2, 0.1)
    with pytest.raises(DomainError):
        birth_death_rate(0.5, 0.2, 0.3, 1.0)


def test_r_zero_values():
    assert birth_death_rate_r_zero(0.7, 0.1) == pytest.approx(0.95, rel=1e-14)
    assert birth_death_rate_r_zero(0.7, 0.5) == pytest.approx(2 * math.sqrt(0.21), rel=1e-14)
    assert birth_death_rate(0.7, 0.3, 0.0, 0.1).rho == pytest.approx(0.95, rel=1e-14)


def test_r_zero_rejects_a_equal_p():
    with pytest.raises(DomainError):
        birth_death_rate_r_zero(0.7, 0.7)


def test_mm1():
    rho, g = mm1_rate(1.0, 4.0, 0.1)
    assert rho == pytest.approx(0.9, rel=1e-15)
    assert g == 2.0
    h = 1 / 5 - 1e-12
    assert mm1_rate(1.0, 4.0, h)[0] == pytest.approx(2 * math.sqrt(4.0) / 5, abs=1e-10)
    with pytest.raises(DomainError):
        mm1_rate(2.0, 2.0, 0.1)


def test_unbounded_rw_bound():
    assert unbounded_rw_rate_bound(0.4, 1.5) == pytest.approx(0.9)
    assert unbounded_rw_rate_bound(0.9, 1.05) == pytest.approx(0.9)
    assert unbounded_rw_rate_bound(0.4, 1 + 1e-12) == pytest.approx(max(0.6, 0.4))
    with pytest.raises(DomainError):
        unbounded_rw_rate_bound(0.4, 2.0)


def test_boundary_moment():
    assert boundary_moment({0: 0.5, 1: 0.5}, 2.0) == pytest.approx(1.5)
    assert boundary_moment([0.5, 0.5], 2.0) == pytest.approx(1.5)
    assert boundary_moment({5000: 1.0}, 2.0) == math.inf


pqr = st.tuples(st.floats(0.05, 0.9), st.floats(0.0, 1.0), st.floats(0.01, 0.99)).map(
    lambda t: (t[0], t[0] * t[1] * 0.999, t[2])).filter(lambda t: t[0] + t[1] < 0.999)


@settings(max_examples=200, deadline=None)
@given(pqr)
def test_rate_tree_invariants(args):
    p, q, a = args
    if q <= 1e-6:
        return
    r = 1.0 - p - q
    if abs(a - (1 - q)) < 1e-9:
        return
    out = birth_death_rate(p, q, r, a)
    ess = r + 2 * math.sqrt(p * q)
    assert 0 < out.rho < 1
    assert out.rho >= ess - 1e-15
    if out.case_label == rates.CASE_B_LAMBDA:
        assert ess < abs(out.lambda_a) < 1
        assert abs(out.z_a) < out.gamma_hat


@settings(max_examples=200, deadline=None)
@given(st.floats(0.51, 0.99), st.floats(0.001, 0.999))
def test_r_zero_matches_tree(p, a):
    if abs(a - p) < 1e-6:  # a = p = 1 - q is the excluded special point
        return
    q = 1 - p
    try:
        tree = birth_death_rate(p, q, 0.0, a).rho
    except DomainError:
        return
    assert birth_death_rate_r_zero(p, a) == pytest.approx(tree, abs=1e-12)


def test_lambda_formula():
    assert lambda_of_a(0.75, 0.2, 0.1) == pytest.approx(0.1 + 0.75 * 0.9 / (0.1 - 0.8))

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasicompact.drift import (
    ell_and_L,
    essential_radius_bound,
    extract_minorization,
    iterated_weight,
    minimize_phi,
    phi,
    power_row,
    weight_ratios,
    wd_feasibility_test,
)
from quasicompact.errors import DomainError
from quasicompact.kernels import (
    make_birth_death,
    make_bounded_increment_rw,
    make_geometric_mh,
    make_identity,
    make_poisson_mh,
)
from quasicompact.weights import WeightFn

GHAT = math.sqrt(2.5)
ESS = 0.3 + 2 * math.sqrt(0.1)


@pytest.fixture
def bd():
    return make_birth_death(0.5, 0.3, 0.2, {0: 0.6, 1: 0.4})


def test_interior_ratio_is_phi_power(bd):
    V = WeightFn.geometric(GHAT)
    r = weight_ratios(bd, V, 3, 200)
    assert np.allclose(r[10:150], phi({-1: 0.5, 0: 0.3, 1: 0.2}, GHAT) ** 3, rtol=1e-12)


def test_identity_iterates_fixed():
    V = WeightFn.geometric(2.0)
    w = iterated_weight(make_identity(), V, 4, 30)
    assert np.allclose(w.values, V.eval(np.arange(w.values.size)))


def test_poisson_mh_ratio_at_ten():
    V = WeightFn.geometric(2.0)
    r = weight_ratios(make_poisson_mh(), V, 1, 100)
    n = 10
    assert r[n] == pytest.approx(0.5 / 2.0 + n / (2 * (n + 1)) + 2.0 / (2 * (n + 1)), rel=1e-14)


def test_L_birth_death(bd):
    rep = ell_and_L(bd, WeightFn.geometric(GHAT), N_max=6, M=400)
    assert rep.L == pytest.approx(ESS, rel=1e-12)
    for n, e in enumerate(rep.ell, start=1):
        assert e ** (1 / n) == pytest.approx(ESS, rel=1e-12)
    assert rep.feasible


def test_L_identity():
    rep = ell_and_L(make_identity(), WeightFn.geometric(2.0), N_max=5, M=100)
    assert rep.L == pytest.approx(1.0)
    assert all(e == pytest.approx(1.0) for e in rep.ell)
    assert not rep.feasible


def test_L_poisson_mh():
    # the row ratio is 0.75 + 1/(2(n+1)); the window starts at M/2
    rep = ell_and_L(make_poisson_mh(), WeightFn.geometric(2.0), N_max=1, M=4000)
    assert rep.L == pytest.approx(0.75, abs=1e-3)
    assert rep.L >= 0.75


def test_L_below_every_root(bd):
    rep = ell_and_L(bd, WeightFn.geometric(1.3), N_max=8, M=400)
    assert all(rep.L <= e ** (1 / n) + 1e-15 for n, e in enumerate(rep.ell, start=1))


def test_weak_drift_holds_with_d(bd):
    V = WeightFn.geometric(1.3)
    rep = ell_and_L(bd, V, N_max=4, M=200)
    PNV = iterated_weight(bd, V, rep.n_star, 200).values
    vv = V.eval(np.arange(PNV.size))
    lim = rep.windows[rep.n_star - 1][1]
    assert np.all(PNV[: lim + 1] <= rep.L ** rep.n_star * vv[: lim + 1] * (1 + 1e-12) + rep.d_constant + 1e-9)


def test_phi_values():
    law = {-1: 0.5, 0: 0.3, 1: 0.2}
    assert phi(law, GHAT) == pytest.approx(ESS, rel=1e-14)
    assert phi(law, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert phi({-1: 0.5, 0: 0.5}, 2.0) == pytest.approx(0.75)


def test_minimize_phi_closed_form():
    m = minimize_phi({-1: 0.5, 0: 0.3, 1: 0.2})
    assert m.gamma == pytest.approx(GHAT, rel=1e-9)
    assert m.value == pytest.approx(ESS, rel=1e-12)
    assert m.feasible


def test_minimize_phi_stationary_point():
    law = {-2: 0.4, -1: 0.2, 0: 0.2, 1: 0.1, 2: 0.1}
    m = minimize_phi(law)
    h = 1e-6
    deriv = (phi(law, m.gamma + h) - phi(law, m.gamma - h)) / (2 * h)
    assert abs(deriv) < 1e-8


def test_minimize_phi_symmetric_infeasible():
    m = minimize_phi({-1: 0.3, 0: 0.4, 1: 0.3})
    assert m.gamma == 1.0
    assert not m.feasible


@pytest.mark.parametrize("law, order, sign", [
    ({-1: 0.5, 0: 0.3, 1: 0.2}, 1, -1),
    ({-1: 0.3, 0: 0.4, 1: 0.3}, 2, 1),
    ({-1: 0.2, 0: 0.3, 1: 0.5}, 1, 1),
])
def test_feasibility_orders(law, order, sign):
    res = wd_feasibility_test(law)
    assert (res.order, res.sign) == (order, sign)
    assert res.feasible == (sign < 0)


def test_feasibility_exact_fractions():
    law = {-1: Fraction(3, 10), 0: Fraction(2, 5), 1: Fraction(3, 10)}
    res = wd_feasibility_test(law)
    assert res.order == 2
    assert res.value == pytest.approx(0.6)


def test_feasibility_rejects_zero_law():
    with pytest.raises(DomainError):
        wd_feasibility_test({0: 1.0})


def test_essential_radius_bound_values():
    assert essential_radius_bound(0.7, 0.5, 0.2, 1.0) == pytest.approx(0.7)
    assert essential_radius_bound(0.8, 0.5, 2.0, 1.0) == pytest.approx(1.4 / 1.5)


def test_minorization_geometric_mh():
    b = make_geometric_mh(0.25)
    V = WeightFn.geometric(2.0)
    c = extract_minorization(b.kernel, {0, 1}, V, 60)
    # independent recomputation
    r0, r1 = b.kernel.row(0), b.kernel.row(1)
    nu = {j: min(r0.get(j, 0), r1.get(j, 0)) for j in set(r0) | set(r1)}
    nu = {j: v for j, v in nu.items() if v > 0}
    assert c.nu == pytest.approx(nu)
    assert c.nu_mass == pytest.approx(sum(nu.values()))
    assert c.nu_V == pytest.approx(sum(v * 2.0 ** j for j, v in nu.items()))
    assert c.rho == pytest.approx(0.5 / 2 + 0.375 + 0.125 * 2)
    assert c.rho <= c.bound < 1.0
    assert c.tau == max(0.0, c.m_drift - c.nu_V)


def test_minorization_singleton(bd):
    V = WeightFn.geometric(GHAT)
    c = extract_minorization(bd, {0}, V, 100)
    assert c.nu == pytest.approx(bd.row(0))
    assert c.nu_mass == pytest.approx(1.0)
    assert c.rho == pytest.approx(ESS, rel=1e-12)


def test_minorization_empty_set(bd):
    with pytest.raises(DomainError):
        extract_minorization(bd, [], WeightFn.geometric(1.2), 20)


def test_power_row_stochastic(bd):
    r = power_row(bd, 3, 5)
    assert sum(r.values()) == pytest.approx(1.0, abs=1e-14)


# properties


@settings(max_examples=80, deadline=None)
@given(st.floats(0.0, 0.99), st.floats(0.01, 1.0), st.floats(0.0, 10.0), st.floats(0.0, 10.0),
       st.floats(0.0, 5.0))
def test_essential_radius_bound_monotone(rho, mass, m_drift, nu_v, bump):
    b = essential_radius_bound(rho, mass, m_drift, nu_v)
    assert rho - 1e-12 <= b < 1.0 + 1e-12
    # larger drift constant or a smaller nu(V) can only worsen the bound
    assert essential_radius_bound(rho, mass, m_drift + bump, nu_v) >= b - 1e-12
    assert essential_radius_bound(rho, mass, m_drift, max(0.0, nu_v - bump)) >= b - 1e-12
    if rho + 0.005 < 1.0:
        assert essential_radius_bound(rho + 0.005, mass, m_drift, nu_v) >= b - 1e-12


def random_law(draw_weights, b):
    w = np.array(draw_weights[: 2 * b + 1], dtype=float)
    w = w / w.sum()
    return {k - b: float(v) for k, v in enumerate(w) if v > 0}


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3), st.lists(st.integers(0, 20), min_size=7, max_size=7))
def test_feasibility_equivalence(b, raw):
    w = raw[: 2 * b + 1]
    if sum(w) == 0 or all(v == 0 for k, v in enumerate(w) if k != b):
        return
    law = {k - b: Fraction(v, sum(w)) for k, v in enumerate(w) if v > 0}
    res = wd_feasibility_test(law)
    m = minimize_phi({k: float(v) for k, v in law.items()})
    assert res.feasible == m.feasible

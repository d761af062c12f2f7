import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardy_adjoint.errors import PoleError
from hardy_adjoint.hardy import compose, g_p, h2_norm
from hardy_adjoint.transfer import (
    DiscBoundaryFunction,
    J,
    J_inv,
    V,
    V_inv,
    disc_norm,
    disc_symbol,
    disc_weight,
    monomial,
    random_disc_points,
    transfer_check,
    weighted_comp_disc,
)

from conftest import BOUNDED_CORPUS, LINEAR, R, RECIP

BASIS = [monomial(n) for n in range(4)]
THETA = 2 * np.pi * np.arange(64) / 64


# -- Mobius maps -------------------------------------------------------------


def test_mobius_examples():
    assert J(0) == 1j
    assert J_inv(1j) == 0
    assert abs(J(J_inv(3 + 2j)) - (3 + 2j)) <= 1e-14


def test_mobius_excluded_points():
    with pytest.raises(PoleError):
        J(-1)
    with pytest.raises(PoleError):
        J_inv(-1j)


@given(st.floats(0, 0.99), st.floats(0, 2 * math.pi))
def test_J_maps_disc_to_upper_half_plane(r, th):
    w = r * complex(math.cos(th), math.sin(th))
    s = J(w)
    assert s.imag > 0
    assert abs(J_inv(s) - w) <= 1e-12 * (1 + abs(s))


# -- the unitary V -----------------------------------------------------------


def test_V_of_one_is_scaled_g2():
    s = np.linspace(-30, 30, 121)
    assert np.max(np.abs(V(monomial(0))(s) - g_p(2)(s) / math.sqrt(math.pi))) <= 1e-15


@pytest.mark.parametrize("g", BASIS, ids=lambda g: g.name)
def test_unitarity(g):
    assert abs(disc_norm(g) - 1) <= 1e-14
    assert abs(h2_norm(V(g)) - disc_norm(g)) <= 1e-7


@pytest.mark.parametrize("g", BASIS + [DiscBoundaryFunction(lambda w: np.exp(w), name="exp")], ids=lambda g: g.name)
def test_V_inverse_pair(g):
    back = V_inv(V(g)).on_circle(THETA[THETA != math.pi])
    assert np.max(np.abs(back - g.on_circle(THETA[THETA != math.pi]))) <= 1e-10


def test_only_p2():
    with pytest.raises(NotImplementedError):
        V(monomial(0), p=4)
    with pytest.raises(NotImplementedError):
        V_inv(g_p(2), p=1)
    with pytest.raises(NotImplementedError):
        weighted_comp_disc(LINEAR, monomial(0), 0.1, p=3)


# -- the disc operator -------------------------------------------------------


def test_identity_symbol_has_unit_weight():
    pts = random_disc_points(20, seed=1)
    ident = R((0, 1))
    assert np.max(np.abs(disc_weight(ident, pts) - 1)) <= 1e-14
    for g in BASIS:
        assert np.max(np.abs(weighted_comp_disc(ident, g, pts) - g(pts))) <= 1e-14


def test_weight_at_origin_for_linear():
    # Phi(0) = J_inv(phi(i)) = J_inv(3i) = -1/2, so the weight is 1/2
    assert abs(disc_symbol(LINEAR)(0) - (-0.5)) <= 1e-15
    assert abs(disc_weight(LINEAR, 0) - 0.5) <= 1e-15


@pytest.mark.parametrize("name", sorted(BOUNDED_CORPUS))
def test_two_path_equivalence(name):
    phi = BOUNDED_CORPUS[name]
    pts = random_disc_points(20, seed=0)
    for g in BASIS:
        lhs = V_inv(compose(phi, V(g)))(pts)
        assert np.max(np.abs(lhs - weighted_comp_disc(phi, g, pts))) <= 1e-7


def test_weight_blows_up_for_unbounded_symbol():
    d = 10.0 ** -np.arange(1, 7)
    w = np.abs(disc_weight(RECIP, -1 + d))
    assert np.all(np.diff(w) > 0) and w[-1] > 1e6


# -- report ------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(BOUNDED_CORPUS))
def test_transfer_check_bounded(name):
    rep = transfer_check(BOUNDED_CORPUS[name])
    assert rep["unitarity"]["pass"] and rep["two_path"]["pass"]
    assert not rep["weight_near_minus_one"]["blows_up"]
    assert rep["weight_near_minus_one"]["consistent"]


def test_transfer_check_unbounded():
    rep = transfer_check(RECIP)
    w = rep["weight_near_minus_one"]
    assert w["blows_up"] and w["classifier_bounded"] is False and w["consistent"]


def test_transfer_check_seeded():
    assert transfer_check(LINEAR, seed=5) == transfer_check(LINEAR, seed=5)

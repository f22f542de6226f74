import math

import numpy as np
import pytest

from supcusp.cayley import (
    EscapeKind,
    GeodesicH,
    HeisenbergElement,
    a_prime,
    cayley_R,
    cayley_R_inv,
    cayley_to_B,
    cayley_to_H,
    delta_prime,
    delta_prime_profile,
    delta_prime_profile_alt,
    delta_prime_via_ball,
    escape_classification,
    geodesic_point,
    geodesic_point_by_transport,
    heisenberg_act,
    heisenberg_mul,
    in_H,
)
from supcusp.domain import fractional_linear, mobius
from supcusp.fixtures import random_ball_point
from supcusp.structure import a_t, random_group_element, weyl_representative


def test_cayley_maps_are_inverse(rng):
    for n in (1, 2, 3):
        assert np.allclose(cayley_R(n) @ cayley_R_inv(n), np.eye(n + 1))
        z = random_ball_point(n, rng)
        w = cayley_to_H(z)
        assert in_H(w)
        assert np.allclose(cayley_to_B(w), z, atol=1e-12)


def test_origin_goes_to_e1():
    assert np.allclose(cayley_to_H(np.zeros(2)), [1, 0])


def test_delta_prime_on_a_t_axis():
    for t in (-1.0, 0.0, 0.7):
        p = fractional_linear(a_prime(t, 2), cayley_to_H(np.zeros(2)))
        assert delta_prime(p, p) == pytest.approx(2 * math.exp(2 * t))


def test_delta_prime_matches_ball_formula(rng):
    for _ in range(10):
        z, w = cayley_to_H(random_ball_point(2, rng)), cayley_to_H(random_ball_point(2, rng))
        assert delta_prime(z, w) == pytest.approx(delta_prime_via_ball(z, w), rel=1e-10)


def test_heisenberg_group_law_and_action(rng):
    a = HeisenbergElement(0.3, rng.normal(size=2) + 1j * rng.normal(size=2))
    b = HeisenbergElement(-1.1, rng.normal(size=2) + 1j * rng.normal(size=2))
    ab = heisenberg_mul(a, b)
    assert np.allclose(a.matrix() @ b.matrix(), ab.matrix(), atol=1e-12)
    w = cayley_to_H(random_ball_point(3, rng))
    assert np.allclose(heisenberg_act(a, heisenberg_act(b, w)), heisenberg_act(ab, w), atol=1e-12)
    assert heisenberg_mul(a, a.inverse()).close_to(HeisenbergElement(0.0, np.zeros(2)))
    # Delta' is invariant under the Heisenberg group
    w2 = cayley_to_H(random_ball_point(3, rng))
    assert delta_prime(heisenberg_act(a, w), heisenberg_act(a, w2)) == pytest.approx(delta_prime(w, w2), rel=1e-12)


def test_heisenberg_to_group_fixes_infinity_direction():
    a = HeisenbergElement(0.5, [0.2 + 0.1j])
    g = a.to_group()
    assert np.allclose(HeisenbergElement.from_matrix(cayley_R(2) @ g.gprime @ cayley_R_inv(2)).u, a.u)


def test_geodesic_formulas_agree():
    geo = GeodesicH(0.4, 0.6, [0.8])
    for t in (-2.0, -0.3, 0.0, 0.9, 2.5):
        assert np.allclose(geodesic_point(geo, t), geodesic_point_by_transport(geo, t), atol=1e-12)
        p = geodesic_point(geo, t)
        assert delta_prime(p, p).real == pytest.approx(delta_prime_profile(geo, t), rel=1e-12)
        assert delta_prime_profile_alt(geo, t) == pytest.approx(delta_prime_profile(geo, t), rel=1e-12)


def test_geodesic_rejects_bad_direction():
    with pytest.raises(ValueError):
        GeodesicH(0.0, 0.6, [0.6])


def test_escape_to_infinity_for_a_t():
    n = 2
    res = escape_classification(a_t(0.3, n))
    assert res.kind is EscapeKind.TO_INFINITY
    assert res.direction == 1
    assert res.law_residual < 1e-12
    res = escape_classification(weyl_representative(n))
    assert res.kind is EscapeKind.TO_INFINITY
    assert res.direction == -1


def test_escape_two_points_profile_is_symmetric(rng):
    g = random_group_element(2, 0, rng)
    res = escape_classification(g)
    assert res.kind is EscapeKind.TWO_BOUNDARY_POINTS
    ts = res.t_star
    for s in (0.3, 1.0, 2.0):
        assert res.profile(ts + s) == pytest.approx(res.profile(ts - s), rel=1e-6)
        assert res.profile(ts + s) < res.profile(ts)


def test_geodesic_in_H_matches_mobius(rng):
    from supcusp.cayley import geodesic_in_H

    g = random_group_element(2, 0, rng)
    w = geodesic_in_H(g)
    assert np.allclose(w(0.7), cayley_to_H(mobius(g @ a_t(0.7, 2), np.zeros(2))), atol=1e-12)


def _random_heis(rng, n):
    return HeisenbergElement(rng.normal(), rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1))


def test_heisenberg_associative_and_central_commutators(rng):
    a, b, c = (_random_heis(rng, 3) for _ in range(3))
    left = heisenberg_mul(heisenberg_mul(a, b), c)
    right = heisenberg_mul(a, heisenberg_mul(b, c))
    assert left.close_to(right)
    comm = heisenberg_mul(heisenberg_mul(a, b), heisenberg_mul(a.inverse(), b.inverse()))
    assert np.allclose(comm.u, 0, atol=1e-14)
    assert comm.lam == pytest.approx(2 * float(np.vdot(a.u, b.u).imag))


def test_transport_between_ball_and_siegel_domain(rng):
    n = 2
    g = random_group_element(n, 0, rng)
    z = random_ball_point(n, rng, 0.7)
    gH = cayley_R(n) @ g.gprime @ cayley_R_inv(n)
    assert np.allclose(fractional_linear(gH, cayley_to_H(z)), cayley_to_H(mobius(g, z)), atol=1e-10)


def test_heisenberg_orbit_keeps_delta_prime_level(rng):
    t = 0.35
    p = fractional_linear(a_prime(t, 2), cayley_to_H(np.zeros(2)))
    for _ in range(5):
        q = heisenberg_act(_random_heis(rng, 2), p)
        assert delta_prime(q, q).real == pytest.approx(2 * math.exp(2 * t), rel=1e-10)

import numpy as np
import pytest

from supcusp.domain import (
    GroupElement,
    MembershipError,
    OutsideBallError,
    Quadrature,
    SuperFunction,
    as_ball_point,
    check_membership,
    cocycle,
    form_J,
    jordan_delta,
    lift,
    mobius,
    petersson_pair,
    slash,
)
from supcusp.fixtures import random_ball_point, random_polynomial_superfunction
from supcusp.structure import random_group_element


def test_identity_and_inverse(rng):
    g = random_group_element(2, 1, rng)
    e = GroupElement.identity(2, 1)
    assert (g @ g.inv()).distance_to(e) < 1e-12
    J = form_J(2)
    assert np.allclose(g.gprime.conj().T @ J @ g.gprime, J, atol=1e-12)
    assert abs(np.linalg.det(g.gprime) - np.linalg.det(g.E)) < 1e-12


def test_membership_rejects_non_unitary():
    with pytest.raises(MembershipError):
        check_membership(np.diag([2.0, 1.0]), np.eye(0))


def test_json_roundtrip(rng):
    g = random_group_element(2, 2, rng)
    assert GroupElement.from_json(g.to_json()).distance_to(g) == 0


def test_ball_point_validation():
    with pytest.raises(OutsideBallError):
        as_ball_point([1.0 + 0j])
    assert as_ball_point([0.5]).dtype == complex


def test_cocycle_chain_rule(rng):
    for _ in range(20):
        g = random_group_element(2, 0, rng)
        h = random_group_element(2, 0, rng)
        z = random_ball_point(2, rng)
        assert cocycle(g @ h, z) == pytest.approx(cocycle(g, mobius(h, z)) * cocycle(h, z), rel=1e-10)


def test_delta_two_sided_law(rng):
    for _ in range(20):
        g = random_group_element(2, 0, rng)
        z, w = random_ball_point(2, rng), random_ball_point(2, rng)
        lhs = jordan_delta(mobius(g, z), mobius(g, w))
        rhs = cocycle(g, z) * jordan_delta(z, w) * np.conj(cocycle(g, w))
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_slash_is_right_action(rng):
    f = random_polynomial_superfunction(1, 2, rng)
    g = random_group_element(1, 2, rng)
    h = random_group_element(1, 2, rng)
    z = random_ball_point(1, rng)
    k = 5
    assert slash(slash(f, g, k), h, k)(z).allclose(slash(f, g @ h, k)(z), atol=1e-10)


def test_lift_of_identity_is_value_at_zero(rng):
    f = random_polynomial_superfunction(2, 1, rng)
    e = GroupElement.identity(2, 1)
    assert lift(f, e, 4).allclose(f(np.zeros(2)), atol=1e-14)


def test_petersson_pair_hermitian_and_positive(rng):
    f = random_polynomial_superfunction(1, 1, rng)
    h = random_polynomial_superfunction(1, 1, rng)
    k = 4
    q = Quadrature(32, 32)
    assert petersson_pair(f, h, k, q) == pytest.approx(np.conj(petersson_pair(h, f, k, q)), rel=1e-10)
    assert petersson_pair(f, f, k, q).real > 0


def test_petersson_pair_invariance(rng):
    # weight large enough that the pairing converges; polynomials are not invariant
    # themselves, but <f|g, h|g> = <f, h> for any g
    f = SuperFunction.scalar(lambda z: 1 + z[0], 1)
    h = SuperFunction.scalar(lambda z: 2 - z[0] ** 2, 1)
    g = random_group_element(1, 0, rng, scale=0.3)
    k = 4
    q = Quadrature(64, 64)
    assert petersson_pair(slash(f, g, k), slash(h, g, k), k, q) == pytest.approx(petersson_pair(f, h, k, q), rel=1e-6)

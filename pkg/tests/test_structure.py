import math

import numpy as np
import pytest

from supcusp.domain import GroupElement
from supcusp.fixtures import desk_generators, planted_loxodromic
from supcusp.structure import (
    ElementKind,
    LieAlgebraElement,
    LoxodromicData,
    a_t,
    am_normalizer_residual,
    classify_element,
    inner,
    is_in_M,
    iwasawa_decompose,
    lie_basis,
    m_element,
    primitive_root,
    random_group_element,
    random_lie_element,
    root_split,
    translation_length,
    weyl_representative,
    word_ball,
)


def test_a_generator_has_unit_norm():
    xi = LieAlgebraElement.a_generator(2, 1)
    assert inner(xi, xi) == pytest.approx(1.0)
    assert xi.exp().distance_to(a_t(1.0, 2, 1)) < 1e-12


def test_root_split_is_orthogonal_and_complete(rng):
    xi = random_lie_element(2, 1, rng)
    c = root_split(xi)
    assert c.total().allclose(xi, atol=1e-12)
    parts = list(c.by_root().values())
    for i, a in enumerate(parts):
        for b in parts[i + 1 :]:
            assert abs(inner(a, b)) < 1e-12


def test_bracket_respects_root_grading(rng):
    basis = lie_basis(2, 0)
    for ka in (1, -1, 2):
        for kb in (1, -1, -2):
            for x in basis[ka]:
                for y in basis[kb]:
                    br = x.bracket(y)
                    present = root_split(br).present_roots(1e-10)
                    target = ka + kb
                    if abs(target) > 2:
                        assert not present
                    else:
                        assert present <= {target}


def test_ad_a_t_scales_root_spaces():
    basis = lie_basis(2, 0)
    t = 0.4
    g = a_t(t, 2)
    for root in (1, 2, -1, -2):
        for x in basis[root]:
            assert x.Ad(g).allclose(x * math.exp(root * t), atol=1e-12)


def test_weyl_representative_inverts_A():
    w = weyl_representative(2, 1)
    assert (w @ a_t(0.8, 2, 1) @ w.inv()).distance_to(a_t(-0.8, 2, 1)) < 1e-12


def test_m_elements_commute_with_A(rng):
    u = np.array([[np.exp(0.3j)]])
    eps = np.exp(0.2j)
    E = np.diag([eps**2 * u[0, 0], 1.0])
    m = m_element(eps, u, E)
    assert is_in_M(m)
    assert (m @ a_t(0.5, 2, 2)).distance_to(a_t(0.5, 2, 2) @ m) < 1e-12
    assert am_normalizer_residual(m) < 1e-12
    assert am_normalizer_residual(random_group_element(2, 0, rng)) > 1e-3


def test_iwasawa_roundtrip(rng):
    g = random_group_element(2, 1, rng)
    tri = iwasawa_decompose(g)
    assert tri.product().distance_to(g) < 1e-10
    # the K part fixes the origin
    from supcusp.domain import mobius

    assert np.linalg.norm(mobius(tri.k_part, np.zeros(2))) < 1e-12


def test_classify_planted_loxodromic(rng):
    for n, r in ((1, 0), (1, 2), (2, 1), (3, 0)):
        gamma, h, _ = planted_loxodromic(n, r, 0.9, rng)
        cls = classify_element(gamma)
        assert cls.kind is ElementKind.REGULAR_LOXODROMIC
        assert cls.data.t0 == pytest.approx(0.9, abs=1e-9)
        assert max(cls.data.residuals().values()) < 1e-9
        assert translation_length(gamma) == pytest.approx(0.9, abs=1e-9)


def test_loxodromic_data_json_roundtrip(rng):
    gamma, _, _ = planted_loxodromic(2, 1, 1.2, rng)
    d = classify_element(gamma).data
    d2 = LoxodromicData.from_json(d.to_json())
    assert d2.gamma().distance_to(d.gamma()) < 1e-12


def test_classify_generic_elliptic_is_not_loxodromic():
    phases = np.exp(1j * np.array([0.4, 1.1, -1.5]))
    g = GroupElement(np.diag(phases), np.zeros((0, 0)))
    assert classify_element(g).kind is ElementKind.NOT_LOXODROMIC


def test_elements_fixing_a_geodesic_are_irregular():
    # the identity and other elements of M lie in AM with t = 0
    assert classify_element(GroupElement.identity(2, 1)).kind is ElementKind.IRREGULAR_LOXODROMIC
    m = m_element(np.exp(0.3j), [[np.exp(-0.6j)]])
    assert classify_element(m).kind is ElementKind.IRREGULAR_LOXODROMIC


def test_classify_parabolic():
    from supcusp.cayley import HeisenbergElement

    par = HeisenbergElement(0.7, [0.3 + 0.2j]).to_group()
    assert classify_element(par).kind is ElementKind.NOT_LOXODROMIC
    lam_only = HeisenbergElement(1.0, np.zeros(0)).to_group()
    assert classify_element(lam_only).kind is ElementKind.NOT_LOXODROMIC


def test_short_translation_inside_band_is_still_regular():
    # well separated isotropic eigenvectors: a genuine translation, not a Jordan block
    cls = classify_element(a_t(3e-5, 2))
    assert cls.kind is ElementKind.REGULAR_LOXODROMIC
    assert cls.data.t0 == pytest.approx(3e-5, rel=1e-6)


def test_near_parabolic_inside_band_is_not_regular():
    from supcusp.cayley import HeisenbergElement

    par = HeisenbergElement(0.0, [1.0]).to_group()
    # nudge the spectrum off the unit circle by a tiny translation
    kind = classify_element(par @ a_t(1e-7, 2)).kind
    assert kind is not ElementKind.REGULAR_LOXODROMIC


def test_desk_lattice_generators():
    gens = desk_generators(0)
    t0 = math.log((3 + math.sqrt(5)) / 2)
    for g in gens:
        cls = classify_element(g)
        assert cls.is_regular
        assert cls.data.t0 == pytest.approx(t0, abs=1e-12)


def test_word_ball_sizes():
    gens = desk_generators(0)
    ball = word_ball(gens, 2)
    # free group on two generators: 1 + 4 + 12 reduced words
    assert len(ball) == 17
    assert ball[0][0] == ()


def test_conjugators_differ_by_normalizer_of_AM(rng):
    gamma, h, _ = planted_loxodromic(2, 1, 0.8, rng)
    g = classify_element(gamma).data.g
    assert am_normalizer_residual(g.inv() @ h) < 1e-8


def test_primitive_root_of_square():
    gens = desk_generators(0)
    root = primitive_root(gens[0] @ gens[0], gens)
    assert root.nu == 2
    assert (root.root @ root.root).distance_to(gens[0] @ gens[0]) < 1e-9
    assert not root.proven_primitive
    base = primitive_root(gens[0], gens)
    assert base.nu == 1


@pytest.mark.parametrize("nu", [2, 3, 4])
def test_primitive_root_recovers_power(nu):
    gens = desk_generators(0)
    delta = gens[1] @ gens[0]
    root = primitive_root(delta**nu, gens)
    assert root.nu == nu
    assert translation_length(root.root) == pytest.approx(translation_length(delta), abs=1e-9)

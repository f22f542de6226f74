import math

import numpy as np
import pytest

from supcusp.domain import Quadrature, SuperFunction
from supcusp.fixtures import desk_generators, load_data, planted_loxodromic, random_ball_point
from supcusp.series import (
    CosetAmbiguityError,
    FourierSpectrum,
    PoincareKernel,
    all_subsets,
    bernstein_constant,
    bernstein_sup_ratio,
    coset_enumerate,
    fourier_coefficients,
    frequency_lattice,
    frequency_offset,
    kernel_function,
    lattice_residual,
    poincare_series,
    poincare_translate,
    q_closed,
    q_integral,
    q_integral_report,
    reproducing_check,
    reproducing_kernel,
    reverse_bernstein,
    screen_h,
    shell_sizes,
)
from supcusp.structure import classify_element
from supcusp.superalg import SubsetIndex


def _planted_kernel(rng, n=1, r=1, k=8, bits=1, C=3.0):
    gamma, _, _ = planted_loxodromic(n, r, 0.9, rng)
    lox = classify_element(gamma).data
    I = SubsetIndex(bits, r)
    m = float(frequency_lattice(lox, I, k, C)[0])
    return PoincareKernel(lox, I, m, k)


def test_frequency_lattice_points_are_on_lattice(rng):
    kern = _planted_kernel(rng)
    nu = frequency_offset(kern.lox, kern.I, kern.k)
    ms = frequency_lattice(kern.lox, kern.I, kern.k, 4.0)
    assert len(ms) > 0
    assert all(abs(m) < 4.0 for m in ms)
    assert max(lattice_residual(m, kern.lox.t0, nu) for m in ms) < 1e-12
    assert np.allclose(np.diff(ms), 1 / kern.lox.t0)


def test_off_lattice_m_is_rejected(rng):
    kern = _planted_kernel(rng)
    with pytest.raises(ValueError):
        PoincareKernel(kern.lox, kern.I, kern.m + 0.1, kern.k)


def test_weight_too_small_is_rejected(rng):
    kern = _planted_kernel(rng)
    with pytest.raises(ValueError):
        PoincareKernel(kern.lox, kern.I, kern.m, 1)


def test_q_closed_matches_integral_up_to_constant(rng):
    kern = _planted_kernel(rng)
    ratios = []
    for _ in range(6):
        z = random_ball_point(1, rng, 0.8)
        c, q = q_closed(kern, z), q_integral(kern, z)
        ratios.append(q[kern.I.bits] / c[kern.I.bits])
    assert np.ptp(np.abs(ratios)) < 1e-8 * abs(ratios[0])
    assert np.ptp(np.angle(ratios)) < 1e-8
    value, rep = q_integral_report(kern, random_ball_point(1, rng, 0.5))
    assert rep.tail_estimate < 1e-8 * value.norm()


def test_q_is_invariant_under_gamma0(rng):
    kern = _planted_kernel(rng)
    gamma = kern.lox.gamma()
    from supcusp.domain import slash

    q = kernel_function(kern)
    z = random_ball_point(1, rng, 0.6)
    assert slash(q, gamma, kern.k)(z).allclose(q(z), atol=1e-10 * q(z).norm())


def test_screening_is_periodic_and_spectrum_concentrated(rng):
    kern = _planted_kernel(rng)
    q = kernel_function(kern)
    lox = kern.lox
    b = kern.I.bits
    h0 = screen_h(q, kern.k, lox, 0.2)[b]
    h1 = screen_h(q, kern.k, lox, 0.2 + lox.t0)[b]
    nu = frequency_offset(lox, kern.I, kern.k)
    assert h1 == pytest.approx(np.exp(-2j * np.pi * nu) * h0, rel=1e-10)
    # full screening identity: shifting t by t0 is right translation by w0^-1
    hw = screen_h(q, kern.k, lox, 0.2, lox.w0.inv())
    assert screen_h(q, kern.k, lox, 0.2 + lox.t0).allclose(hw, atol=1e-10 * hw.norm())
    spectrum = fourier_coefficients(lambda t: screen_h(q, kern.k, lox, t), lox, kern.I, kern.k, 3.0)
    assert spectrum.mass_fraction(kern.I.bits, kern.m) > 0.99


def test_fourier_spectrum_roundtrip(rng):
    kern = _planted_kernel(rng)
    q = kernel_function(kern)
    spectrum = fourier_coefficients(lambda t: screen_h(q, kern.k, kern.lox, t), kern.lox, kern.I, kern.k, 3.0)
    again = FourierSpectrum.from_json(spectrum.to_json())
    ts = np.linspace(0, kern.lox.t0, 7)
    assert np.allclose(again.evaluate(kern.I.bits, ts), spectrum.evaluate(kern.I.bits, ts))
    lines = spectrum.to_csv().splitlines()
    assert lines[0] == "I,m,re,im"
    assert len(lines) == 1 + len(spectrum.coeffs)


def test_reverse_bernstein_on_known_series():
    t0 = 1.0
    C = 2.0
    coeffs = {(0, 2.0): 1.0, (0, -3.0): 0.5j, (0, 5.0): -0.25}
    spectrum = FourierSpectrum(t0, {0: 0.0}, coeffs, 0)
    anti = reverse_bernstein(spectrum, C)
    # derivative of the antiderivative returns the series
    ts = np.linspace(0, t0, 11)
    h = 1e-6
    d = (anti.evaluate(0, ts + h) - anti.evaluate(0, ts - h)) / (2 * h)
    assert np.allclose(d, spectrum.evaluate(0, ts), atol=1e-6)
    assert bernstein_sup_ratio(spectrum, anti) <= bernstein_constant(C)
    with pytest.raises(ValueError):
        reverse_bernstein(FourierSpectrum(t0, {0: 0.0}, {(0, 1.0): 1.0}, 0), C)


def test_desk_lattice_coset_shells():
    gens = desk_generators(0)
    lox = classify_element(gens[0]).data
    cosets = coset_enumerate(gens, lox, 4)
    assert shell_sizes(cosets)[:4] == [1, 2, 6, 18]


def test_coset_enumeration_flags_loose_tolerance():
    gens = desk_generators(0)
    lox = classify_element(gens[0]).data
    with pytest.raises(CosetAmbiguityError):
        coset_enumerate(gens, lox, 2, tol=1e6, feature_tol=1e6)


def test_coset_representatives_are_shortest_words():
    gens = desk_generators(0)
    lox = classify_element(gens[0]).data
    cosets = coset_enumerate(gens, lox, 3)
    # gamma0 itself lies in the trivial coset, so no representative is a pure power of it
    assert all(set(c.word) - {1, -1} or not c.word for c in cosets)


def test_poincare_series_shells_decay_and_translate():
    data = load_data("desk_lattice.json")
    from supcusp.domain import GroupElement

    gens = [GroupElement.from_json(g) for g in data["generators"]]
    kern = PoincareKernel.from_json(data["kernel"])
    cosets = coset_enumerate(gens, kern.lox, 5)
    z = np.array([0.1 + 0.2j])
    pv = poincare_series(kern, cosets, z)
    norms = pv.shell_norms
    assert norms[-1] < norms[1]
    # translating by a generator moves the value by at most the truncated tail
    shifted = poincare_translate(kern, cosets, gens[1], z)
    assert (shifted - pv.value).norm() < 2 * norms[-1]


def test_reproducing_constant_is_pi_over_two():
    quad = Quadrature(48, 48)
    I = SubsetIndex.empty(0)
    k = 3
    for w in (np.array([0.0j]), np.array([0.3 - 0.1j])):
        for fn in (lambda z: 1.0, lambda z: 1 + z[0] - 2 * z[0] ** 2):
            f = SuperFunction.scalar(fn, 1)
            assert reproducing_check(w, I, k, f, quad) == pytest.approx(math.pi / 2, rel=1e-6)


def test_reproducing_kernel_value_at_its_point():
    w = np.array([0.2 + 0.1j])
    K = reproducing_kernel(w, SubsetIndex.empty(0), 3, 1)
    assert K(w)[0] == pytest.approx((1 - abs(w[0]) ** 2) ** -3)


def test_all_subsets_counts():
    assert len(all_subsets(3)) == 8


def test_shipped_kernel_loads():
    kern = PoincareKernel.from_json(load_data("kernel.json"))
    assert kern.k == 8 and kern.I.elements() == (1,)
    assert kern.N == 9

"""The acceptance suite: eleven numerical checks at desk scale.

Each check returns a :class:`CriterionResult` with the measured quantity and
the threshold it is held to.  Both the ``verify`` command and the test suite
run these functions.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cayley import (
    GeodesicH,
    HeisenbergElement,
    delta_prime,
    delta_prime_profile,
    delta_prime_profile_alt,
    escape_classification,
    geodesic_point,
    heisenberg_act,
    heisenberg_mul,
)
from .domain import GroupElement, Quadrature, SuperFunction, cocycle, jordan_delta, mobius, slash
from .dynamics import axis_oracle, close_orbit, constants
from .fixtures import (
    desk_generators,
    planted_closing_case,
    planted_loxodromic,
    random_ball_point,
    random_m_element,
    random_polynomial_superfunction,
)
from .series import (
    FourierSpectrum,
    PoincareKernel,
    bernstein_constant,
    bernstein_sup_ratio,
    coset_enumerate,
    fourier_coefficients,
    frequency_lattice,
    kernel_function,
    poincare_series,
    poincare_translate,
    q_closed,
    q_integral,
    reproducing_check,
    reverse_bernstein,
    screen_h,
)
from .structure import (
    a_t,
    classify_element,
    lie_basis,
    random_group_element,
    random_lie_element,
    root_split,
)
from .superalg import SubsetIndex

log = logging.getLogger(__name__)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.name}: measured {self.measured:.3e} vs threshold {self.threshold:.3e}"


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _shapes(rng, count, ns=(1, 2), rs=(0, 1, 2)):
    for _ in range(count):
        yield int(rng.choice(ns)), int(rng.choice(rs))


# ------------------------------------------------------------------ criteria


def cocycle_and_slash(rng: np.random.Generator, cases: int = 200, tol: float = 1e-9) -> CriterionResult:
    """Chain rule of j and the right-action property of the slash operator."""
    worst_j = worst_s = 0.0
    for n, r in _shapes(rng, cases):
        g = random_group_element(n, r, rng, 0.6)
        h = random_group_element(n, r, rng, 0.6)
        z = random_ball_point(n, rng)
        k = int(rng.integers(0, 9))
        lhs = cocycle(g @ h, z)
        worst_j = max(worst_j, _rel(lhs, cocycle(g, mobius(h, z)) * cocycle(h, z)))
        f = random_polynomial_superfunction(n, r, rng)
        a = slash(f, g @ h, k)(z)
        b = slash(slash(f, g, k), h, k)(z)
        worst_s = max(worst_s, (a - b).norm() / max(1.0, b.norm()))
    worst = max(worst_j, worst_s)
    return CriterionResult(1, "cocycle identity and slash right action", worst <= tol, worst, tol,
                           {"cocycle": worst_j, "slash": worst_s, "cases": cases})


def delta_law(rng: np.random.Generator, cases: int = 200, tol: float = 1e-10) -> CriterionResult:
    """Delta(gz, gw) = j(g,z) Delta(z,w) conj(j(g,w)) and |j(g,0)| = Delta(g0,g0)^(1/2)."""
    worst_t = worst_0 = 0.0
    for n, _ in _shapes(rng, cases, rs=(0,)):
        g = random_group_element(n, 0, rng, 0.6)
        z, w = random_ball_point(n, rng), random_ball_point(n, rng)
        lhs = jordan_delta(mobius(g, z), mobius(g, w))
        rhs = cocycle(g, z) * jordan_delta(z, w) * np.conj(cocycle(g, w))
        worst_t = max(worst_t, _rel(lhs, rhs))
        o = mobius(g, np.zeros(n))
        worst_0 = max(worst_0, _rel(abs(cocycle(g, np.zeros(n))), math.sqrt(jordan_delta(o, o).real)))
    worst = max(worst_t, worst_0)
    return CriterionResult(2, "Delta transformation law", worst <= tol, worst, tol,
                           {"transformation": worst_t, "at-origin": worst_0})


def _random_H_point(n: int, rng) -> np.ndarray:
    w2 = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)
    w1 = 0.5 * np.vdot(w2, w2).real + rng.exponential() + 0.05 + 1j * rng.normal()
    return np.concatenate([[w1], w2])


def heisenberg_law(rng: np.random.Generator, cases: int = 200, tol: float = 1e-12) -> CriterionResult:
    worst_m = worst_d = 0.0
    for _ in range(cases):
        n = int(rng.choice((1, 2, 3)))
        a = HeisenbergElement(rng.normal(), rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1))
        b = HeisenbergElement(rng.normal(), rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1))
        prod = heisenberg_mul(a, b).matrix()
        worst_m = max(worst_m, float(np.max(np.abs(prod - a.matrix() @ b.matrix()))))
        w = _random_H_point(n, rng)
        aw = heisenberg_act(a, w)
        worst_d = max(worst_d, abs(delta_prime(aw, aw) - delta_prime(w, w)) / max(1.0, abs(delta_prime(w, w))))
    worst = max(worst_m, worst_d)
    return CriterionResult(3, "Heisenberg law and Delta' invariance", worst <= tol, worst, tol,
                           {"mul-vs-matrix": worst_m, "delta-prime": worst_d})


def geodesic_profile(rng: np.random.Generator, tol: float = 1e-10) -> CriterionResult:
    # case (i): the geodesic through e1 towards infinity, for g in the stabilizer of infinity
    worst_law = 0.0
    for n in (1, 2):
        for g in (
            GroupElement.identity(n),
            HeisenbergElement(rng.normal(), rng.normal(size=n - 1) + 0j).to_group() @ a_t(0.4, n),
            HeisenbergElement(0.3, np.full(n - 1, 0.2j)).to_group() @ a_t(-0.7, n),
        ):
            res = escape_classification(g)
            worst_law = max(worst_law, res.law_residual if res.law_residual is not None else math.inf)
    # case (ii): symmetry and the two-sided bound on a 50 x 20 (t, y) grid
    violations = 0
    worst_sym = worst_forms = 0.0
    ts = np.linspace(-4, 4, 50)
    ys = np.linspace(-1, 1, 20)
    for y in ys:
        s = np.array([math.sqrt(max(0.0, 1 - y * y))], dtype=complex)
        geo = GeodesicH(rng.normal(scale=0.5), y, s)
        p0 = delta_prime_profile(geo, 0.0)
        for t in ts:
            w = geodesic_point(geo, t)
            pt = delta_prime(w, w).real
            worst_forms = max(worst_forms, abs(pt - delta_prime_profile(geo, t)) / p0,
                              abs(delta_prime_profile_alt(geo, t) - delta_prime_profile(geo, t)) / p0)
            wm = geodesic_point(geo, -t)
            worst_sym = max(worst_sym, abs(delta_prime(wm, wm).real - pt) / p0)
            lo, hi = math.exp(-2 * abs(t)) * p0, 4 * math.exp(-2 * abs(t)) * p0
            if not (lo * (1 - 1e-12) <= pt <= hi * (1 + 1e-12)):
                violations += 1
    worst = max(worst_law, worst_sym, worst_forms)
    passed = worst <= tol and violations == 0
    return CriterionResult(4, "geodesic profile law, symmetry and bounds", passed, worst, tol,
                           {"law": worst_law, "symmetry": worst_sym, "forms": worst_forms,
                            "bound-violations": violations})


def root_structure(rng: np.random.Generator, samples: int = 20, tol: float = 1e-10) -> CriterionResult:
    detected = {}
    for n in (1, 2):
        found = set()
        for _ in range(samples):
            found |= root_split(random_lie_element(n, int(rng.integers(0, 3)), rng)).present_roots(1e-8)
        detected[n] = sorted(found)
    expected = {1: [-2, 0, 2], 2: [-2, -1, 0, 1, 2]}
    worst = 0.0
    for n in (1, 2):
        for r in (0, 1, 2):
            basis = lie_basis(n, r)
            spaces = {0: basis["a"] + basis["m"], 1: basis[1], -1: basis[-1], 2: basis[2], -2: basis[-2]}
            for al, A in spaces.items():
                for be, B in spaces.items():
                    for x in A:
                        for y in B:
                            parts = root_split(x.bracket(y)).by_root()
                            for gam, part in parts.items():
                                if gam != al + be:
                                    worst = max(worst, part.norm())
    passed = detected == expected and worst <= tol
    return CriterionResult(5, "root spaces and bracket closure", passed, worst, tol,
                           {"detected": {str(k): v for k, v in detected.items()}})


def closing_certificates(rng: np.random.Generator, cases: int = 50, tol: float = 1e-12) -> CriterionResult:
    c1 = constants(1.0)
    worst_ratio = 0.0
    worst_axis = 0.0
    worst_t0 = 0.0
    failures = 0
    for i in range(cases):
        n, r = 1 + i % 2, (i // 2) % 2
        T = float(rng.uniform(1.0, 3.0))
        case = planted_closing_case(n, r, T, rng, perturbation=1e-4)
        res = close_orbit(case.x, case.gamma, T, tol=tol)
        if not res.certified:
            failures += 1
        worst_ratio = max(worst_ratio, max(res.bound_ratios.values()))
        oracle = axis_oracle(case.gamma)
        worst_axis = max(worst_axis, oracle.coset_distance(res.z))
        worst_t0 = max(worst_t0, abs(res.t0 - oracle.t0))
    c1_ok = abs(c1.C1 - 11.39) < 5e-3
    passed = failures == 0 and worst_ratio <= 1 and worst_axis <= 10 * tol and worst_t0 <= 10 * tol and c1_ok
    return CriterionResult(6, "closing certificates on planted loxodromics", passed, worst_ratio, 1.0,
                           {"uncertified": failures, "axis-oracle": worst_axis, "t0-oracle": worst_t0,
                            "oracle-threshold": 10 * tol, "C1(T1=1)": c1.C1})


def _grid(n: int, rng, count: int = 20, radius: float = 0.8) -> list:
    return [random_ball_point(n, rng, radius) for _ in range(count)]


def _kernel_case(n, r, k, size, m, rng):
    if m == 0:
        # chi = 0 and D = 0, so that m = 0 lies on the lattice
        h = random_group_element(n, r, rng, 0.5)
        gamma = h @ a_t(0.9, n, r) @ h.inv()
    else:
        gamma, _, _ = planted_loxodromic(n, r, 0.9, rng)
    lox = classify_element(gamma).data
    I = SubsetIndex.of(range(1, size + 1), r)
    if m is None:
        ms = frequency_lattice(lox, I, k, 3.0)
        m = float(ms[np.argmin(np.abs(ms - 1.0))])
    return gamma, PoincareKernel(lox, I, float(m), k)


KERNEL_CASES = ((1, 0, 8, 0, 0), (1, 1, 8, 1, None), (2, 0, 9, 0, 0))


def kernel_equivalence(rng: np.random.Generator, tol: float = 1e-5) -> CriterionResult:
    spreads = {}
    for n, r, k, size, m in KERNEL_CASES:
        _, kern = _kernel_case(n, r, k, size, m, rng)
        bits = kern.odd_part().support()[0].bits
        ratios = np.array([q_integral(kern, z)[bits] / q_closed(kern, z)[bits] for z in _grid(n, rng)])
        spreads[f"n={n},r={r},k={k},|I|={size},m={kern.m:.6g}"] = float(np.max(np.abs(ratios / ratios[0] - 1)))
    worst = max(spreads.values())
    return CriterionResult(7, "integral and closed kernel agree up to a constant", worst <= tol, worst, tol, spreads)


def gamma0_machinery(rng: np.random.Generator, tol: float = 1e-8, mass: float = 0.99) -> CriterionResult:
    worst_inv = worst_per = 0.0
    worst_mass = 1.0
    for n, r, k, size, m in KERNEL_CASES + ((2, 1, 6, 1, None),):
        gamma, kern = _kernel_case(n, r, k, size, m, rng)
        lox = kern.lox
        q = kernel_function(kern)
        for z in _grid(n, rng, 10):
            a, b = slash(q, gamma, k)(z), q(z)
            worst_inv = max(worst_inv, (a - b).norm() / max(1e-300, b.norm()))
        w0i = lox.w0.inv()
        for _ in range(5):
            t = float(rng.uniform(-2, 2))
            w = random_m_element(n, r, rng)
            a = screen_h(q, k, lox, t + lox.t0, w)
            b = screen_h(q, k, lox, t, w0i @ w)
            worst_per = max(worst_per, (a - b).norm() / max(1e-300, b.norm()))
        spectrum = fourier_coefficients(lambda t: screen_h(q, k, lox, t), lox, kern.I, k, abs(kern.m) + 2)
        worst_mass = min(worst_mass, spectrum.mass_fraction(kern.I.bits, kern.m))
    worst = max(worst_inv, worst_per)
    passed = worst <= tol and worst_mass >= mass
    return CriterionResult(8, "invariance, screening periodicity and spectral concentration", passed, worst, tol,
                           {"slash-invariance": worst_inv, "periodicity": worst_per, "min-mass-fraction": worst_mass})


def random_admissible_series(rng: np.random.Generator, modes: int = 10) -> tuple[FourierSpectrum, float]:
    t0 = float(rng.uniform(0.5, 2.0))
    nu = float(rng.uniform())
    C = float(rng.uniform(0.5, 3.0))
    span = math.ceil(4 * C * t0) + modes
    js = [j for j in range(math.floor(nu) - span, math.ceil(nu) + span + 1)
          if abs((j - nu) / t0) >= C]
    chosen = rng.choice(len(js), size=modes, replace=False)
    coeffs = {(0, (js[i] - nu) / t0): complex(rng.normal(), rng.normal()) for i in chosen}
    return FourierSpectrum(t0, {0: nu}, coeffs, 0), C


def reverse_bernstein_bound(rng: np.random.Generator, cases: int = 100) -> CriterionResult:
    violations = 0
    worst = 0.0
    for _ in range(cases):
        spectrum, C = random_admissible_series(rng)
        ratio = bernstein_sup_ratio(spectrum, reverse_bernstein(spectrum, C))
        rel = ratio / bernstein_constant(C)
        worst = max(worst, rel)
        violations += rel > 1
    return CriterionResult(9, "reverse Bernstein sup-norm bound", violations == 0, worst, 1.0,
                           {"violations": violations, "cases": cases})


def reproducing_constant(quad: Quadrature = Quadrature(64, 64), tol: float = 1e-3) -> CriterionResult:
    fs = {
        "1": SuperFunction.scalar(lambda z: 1.0, 1),
        "z": SuperFunction.scalar(lambda z: z[0], 1),
        "z^2": SuperFunction.scalar(lambda z: z[0] ** 2, 1),
    }
    ws = {"0": [0.0], "0.3": [0.3], "0.5i": [0.5j]}
    I = SubsetIndex.empty(0)
    values = {}
    skipped = []
    for fname, f in fs.items():
        for wname, w in ws.items():
            try:
                values[f"f={fname},w={wname}"] = reproducing_check(np.array(w, dtype=complex), I, 3, f, quad)
            except ValueError:
                skipped.append(f"f={fname},w={wname}")
    arr = np.array(list(values.values()))
    spread = float(np.max(np.abs(arr / arr[0] - 1)))
    return CriterionResult(10, "reproducing constant is independent of f and w", spread <= tol, spread, tol,
                           {"constant": complex(arr[0]), "skipped (f(w) = 0)": skipped})


def poincare_truncation(L: int = 6, k: int = 8) -> CriterionResult:
    detail = {}
    ok = True
    worst = 0.0
    for r, phases in ((0, None), (1, (0.3, 0.7))):
        gens = desk_generators(r, phases)
        lox = classify_element(gens[0]).data
        cosets = coset_enumerate(gens, lox, L)
        I = SubsetIndex.of(range(1, r + 1), r)
        ms = frequency_lattice(lox, I, k, 2.0)
        kern = PoincareKernel(lox, I, float(ms[np.argmin(np.abs(ms))]), k)
        z = np.array([0.1 + 0.2j])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            pv = poincare_series(kern, cosets, z)
        shells = pv.shell_norms
        mono = all(b < a for a, b in zip(shells[2:], shells[3:]))
        inv = max((poincare_translate(kern, cosets, g, z) - pv.value).norm() for g in gens)
        ratio = inv / shells[-1]
        worst = max(worst, ratio)
        ok = ok and mono and ratio <= 1
        detail[f"r={r}"] = {"shell_norms": shells, "monotone-from-2": mono, "invariance": inv}
    return CriterionResult(11, "truncated Poincare series: shell decay and invariance", ok, worst, 1.0, detail)


CRITERIA: dict[int, Callable[[np.random.Generator], CriterionResult]] = {
    1: cocycle_and_slash,
    2: delta_law,
    3: heisenberg_law,
    4: geodesic_profile,
    5: root_structure,
    6: closing_certificates,
    7: kernel_equivalence,
    8: gamma0_machinery,
    9: reverse_bernstein_bound,
    10: lambda rng: reproducing_constant(),
    11: lambda rng: poincare_truncation(),
}


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng([seed, number])
    start = time.perf_counter()
    res = CRITERIA[number](rng)
    res.seconds = time.perf_counter() - start
    log.info(res.line())
    return res


def run_all(seed: int = 0, numbers=None) -> list[CriterionResult]:
    return [run_criterion(i, seed) for i in (numbers or sorted(CRITERIA))]

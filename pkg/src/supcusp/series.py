"""Fourier screening along closed geodesics and relative Poincare series.

For a regular loxodromic gamma0 = g a_t0 w0 g^-1, functions invariant under
<gamma0> restrict along t -> g a_t to twisted-periodic functions whose
frequencies live on the lattice (1/t0)(Z - nu_I).  The kernel q pairs with one
such frequency m; summing its slashes over <gamma0>\\Gamma gives the relative
Poincare series.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .domain import (
    GroupElement,
    Quadrature,
    SuperFunction,
    as_ball_point,
    jordan_delta,
    lift,
    mobius,
    petersson_pair,
    slash,
)
from .structure import LoxodromicData, a_t, is_in_M, word_ball
from .superalg import Multivector, SubsetIndex, minor_action, subsets_of_size, tr_I

log = logging.getLogger(__name__)

LATTICE_TOL = 1e-10


# --------------------------------------------------------------------- lattice


def frequency_offset(lox: LoxodromicData, I: SubsetIndex, k: int) -> float:
    """nu_I = (k + |I|) chi + tr_I D, reduced to [0, 1)."""
    nu = math.fsum([(k + I.size) * lox.chi, tr_I(lox.phase, I)]) % 1.0
    return 0.0 if nu >= 1.0 - 1e-13 else nu


def lattice_residual(m: float, t0: float, nu: float) -> float:
    """Distance of m t0 + nu from the nearest integer."""
    x = m * t0 + nu
    return abs(x - round(x))


def frequency_lattice(lox: LoxodromicData, I: SubsetIndex, k: int, C: float) -> np.ndarray:
    """All m = (j - nu_I)/t0 with |m| < C, sorted."""
    if C <= 0:
        raise ValueError("window half-width C must be positive")
    nu = frequency_offset(lox, I, k)
    t0 = lox.t0
    lo = math.ceil(nu - C * t0) - 1
    hi = math.floor(nu + C * t0) + 1
    ms = [(j - nu) / t0 for j in range(lo, hi + 1)]
    return np.array(sorted(m for m in ms if abs(m) < C))


# -------------------------------------------------------------------- spectrum


@dataclass
class FourierSpectrum:
    """Coefficients b_{I,m} of t -> h_I(t) = sum_m b_{I,m} e^(2 pi i m t)."""

    t0: float
    offsets: dict  # bits -> nu_I
    coeffs: dict = field(default_factory=dict)  # (bits, m) -> complex
    r: int = 0

    def __post_init__(self):
        for (bits, m) in self.coeffs:
            nu = self.offsets[bits]
            if lattice_residual(m, self.t0, nu) > LATTICE_TOL * max(1.0, abs(m * self.t0)):
                raise ValueError(f"frequency {m} is off the lattice for I={bits}")

    def frequencies(self, bits: Optional[int] = None) -> list[float]:
        return sorted(m for (b, m) in self.coeffs if bits is None or b == bits)

    def component(self, bits: int) -> dict:
        return {m: c for (b, m), c in self.coeffs.items() if b == bits}

    def evaluate(self, bits: int, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for m, c in self.component(bits).items():
            out += c * np.exp(2j * np.pi * m * t)
        return out

    def mass_fraction(self, bits: int, m0: float, tol: float = 1e-9) -> float:
        comp = self.component(bits)
        total = math.fsum(abs(c) ** 2 for c in comp.values())
        if total == 0:
            return 0.0
        at = math.fsum(abs(c) ** 2 for m, c in comp.items() if abs(m - m0) <= tol)
        return at / total

    def to_json(self) -> dict:
        return {
            "t0": self.t0,
            "r": self.r,
            "offsets": {json.dumps(list(SubsetIndex(b, self.r).elements())): nu for b, nu in self.offsets.items()},
            "coeffs": [
                {"I": list(SubsetIndex(b, self.r).elements()), "m": m, "re": c.real, "im": c.imag}
                for (b, m), c in sorted(self.coeffs.items())
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "FourierSpectrum":
        r = int(obj.get("r", 0))
        offsets = {SubsetIndex.of(json.loads(key), r).bits: float(nu) for key, nu in obj["offsets"].items()}
        coeffs = {
            (SubsetIndex.of(row["I"], r).bits, float(row["m"])): complex(row["re"], row["im"]) for row in obj["coeffs"]
        }
        return cls(float(obj["t0"]), offsets, coeffs, r)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["I", "m", "re", "im"])
        for (b, m), c in sorted(self.coeffs.items()):
            w.writerow([json.dumps(list(SubsetIndex(b, self.r).elements())), fmt17(m), fmt17(c.real), fmt17(c.imag)])
        return buf.getvalue()


def fmt17(x: float) -> str:
    return f"{x:.16e}"


# ------------------------------------------------------------------- screening


def screen_h(f: SuperFunction, k: int, lox: LoxodromicData, t: float, w: Optional[GroupElement] = None) -> Multivector:
    """h(t, w) = f~(g a_t w) for w in M."""
    n, r = lox.n, lox.r
    if w is None:
        w = GroupElement.identity(n, r)
    elif not is_in_M(w):
        raise ValueError("w must lie in M")
    return lift(f, lox.g @ a_t(t, n, r) @ w, k)


def fourier_coefficients(
    h: Callable[[float], Multivector],
    lox: LoxodromicData,
    I: SubsetIndex,
    k: int,
    C: float,
    quad_points: Optional[int] = None,
    check_points: Sequence[float] = (0.1234, 0.5, 1.7),
    check_tol: float = 1e-8,
) -> FourierSpectrum:
    """b_{I,m} = (1/t0) int_0^t0 h_I(t) e^(-2 pi i m t) dt for all lattice m in (-C, C).

    The integrand is t0-periodic, so the trapezoid rule converges spectrally.
    """
    t0 = lox.t0
    nu = frequency_offset(lox, I, k)
    twist = cmath.exp(-2j * math.pi * nu)
    for t in check_points:
        a, b = h(t + t0)[I.bits], twist * h(t)[I.bits]
        if abs(a - b) > check_tol * max(1.0, abs(a), abs(b)):
            raise ValueError(
                f"h(t + t0) != exp(-2 pi i nu_I) h(t) at t={t}: |diff| = {abs(a - b):.3e}; "
                "input is not invariant under the loxodromic element"
            )
    Q = max(int(quad_points or 0), math.ceil(16 * (C * t0 + 1)))
    ts = t0 * np.arange(Q) / Q
    vals = np.array([h(t)[I.bits] for t in ts])
    coeffs = {}
    for m in frequency_lattice(lox, I, k, C):
        coeffs[(I.bits, float(m))] = complex(np.mean(vals * np.exp(-2j * np.pi * m * ts)))
    return FourierSpectrum(t0, {I.bits: nu}, coeffs, lox.r)


def reverse_bernstein(spectrum: FourierSpectrum, C: float) -> FourierSpectrum:
    """Termwise antiderivative s_m / (2 pi i m) of a series with all |m| >= C."""
    for (_, m) in spectrum.coeffs:
        if abs(m) < C:
            raise ValueError(f"frequency {m} lies inside the excluded window |m| < {C}")
    coeffs = {(b, m): c / (2j * math.pi * m) for (b, m), c in spectrum.coeffs.items()}
    return FourierSpectrum(spectrum.t0, dict(spectrum.offsets), coeffs, spectrum.r)


def bernstein_sup_ratio(spectrum: FourierSpectrum, antideriv: FourierSpectrum, grid: int = 512) -> float:
    """max over I of sup|antiderivative| / sup|series| on a uniform grid of [0, t0)."""
    ts = spectrum.t0 * np.arange(grid) / grid
    worst = 0.0
    for bits in spectrum.offsets:
        top = np.max(np.abs(spectrum.evaluate(bits, ts)))
        if top == 0:
            continue
        worst = max(worst, float(np.max(np.abs(antideriv.evaluate(bits, ts))) / top))
    return worst


def bernstein_constant(C: float) -> float:
    return 6 / (math.pi * C)


# ---------------------------------------------------------------------- kernel


@dataclass(frozen=True, eq=False)
class PoincareKernel:
    lox: LoxodromicData
    I: SubsetIndex
    m: float
    k: int

    def __post_init__(self):
        nu = frequency_offset(self.lox, self.I, self.k)
        if lattice_residual(self.m, self.lox.t0, nu) > LATTICE_TOL * max(1.0, abs(self.m * self.lox.t0)):
            raise ValueError(f"m = {self.m} is not on the frequency lattice (offset {nu})")
        if self.k + self.I.size < 2 * self.lox.n + 1:
            raise ValueError(f"need k + |I| >= 2n + 1 = {2 * self.lox.n + 1}, got {self.k + self.I.size}")

    @property
    def N(self) -> int:
        return self.k + self.I.size

    def odd_part(self) -> Multivector:
        return minor_action(self.lox.g.E.conj().T, self.I)

    def to_json(self) -> dict:
        return {"lox": self.lox.to_json(), "I": list(self.I.elements()), "m": self.m, "k": self.k}

    @classmethod
    def from_json(cls, obj) -> "PoincareKernel":
        lox = LoxodromicData.from_json(obj["lox"])
        return cls(lox, SubsetIndex.of(obj["I"], lox.r), float(obj["m"]), int(obj["k"]))


def q_closed(kern: PoincareKernel, z) -> Multivector:
    """Closed form in terms of the axis endpoints X+-, principal branches throughout."""
    lox = kern.lox
    z = as_ball_point(z, lox.n)
    v = mobius(lox.g.inv(), z)
    N = kern.N
    dp = jordan_delta(z, lox.Xplus)
    dm = jordan_delta(z, lox.Xminus)
    ratio = (1 + v[0]) / (1 - v[0])
    val = dp ** (-N / 2) * dm ** (-N / 2) * cmath.exp(1j * math.pi * kern.m * cmath.log(ratio))
    if not cmath.isfinite(val):
        raise OverflowError(f"q overflows at z={z} for k={kern.k}")
    return kern.odd_part() * val


_GL_CACHE: dict = {}


def _composite_gauss_legendre(a: float, b: float, panels: int, order: int = 16):
    key = (a, b, panels, order)
    if key not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        _GL_CACHE[key] = (nodes, weights)
    return _GL_CACHE[key]


def _q_integrand(kern: PoincareKernel, z: np.ndarray, t: np.ndarray) -> np.ndarray:
    g = kern.lox.g
    sh, ch = np.sinh(t), np.cosh(t)
    den = g.c[0] * sh + g.d * ch  # 1 / j(g a_t, 0)
    pts = (np.outer(sh, g.A[:, 0]) + np.outer(ch, g.b)) / den[:, None]
    delta = 1 - pts.conj() @ z
    N = kern.N
    return np.exp(2j * np.pi * kern.m * t) * delta ** (-N) * np.conj(1 / den) ** N


@dataclass(frozen=True)
class QuadratureReport:
    tmax: float
    nodes: int
    tail_estimate: float


def q_integral(
    kern: PoincareKernel, z, tmax: float = 20.0, quad_points: int = 1280, tail_tol: float = 1e-8
) -> Multivector:
    """Truncated integral over [-tmax, tmax] by composite 16-point Gauss-Legendre."""
    value, report = q_integral_report(kern, z, tmax, quad_points)
    if report.tail_estimate > tail_tol * max(1e-300, value.norm()):
        raise ValueError(f"tail estimate {report.tail_estimate:.3e} exceeds tolerance; raise tmax")
    return value


def q_integral_report(kern: PoincareKernel, z, tmax: float = 20.0, quad_points: int = 1280):
    z = as_ball_point(z, kern.lox.n)
    panels = max(1, quad_points // 16)
    t, w = _composite_gauss_legendre(-tmax, tmax, panels)
    vals = _q_integrand(kern, z, t)
    total = complex(np.sum(w * vals))
    ends = np.abs(_q_integrand(kern, z, np.array([-tmax, tmax])))
    # the integrand decays like e^(-N|t|), so each tail is about |integrand(end)|/N
    tail = float(np.sum(ends)) / kern.N
    return kern.odd_part() * total, QuadratureReport(tmax, t.shape[0], tail)


def kernel_function(kern: PoincareKernel, form: str = "closed", **kw) -> SuperFunction:
    if form == "closed":
        fn = lambda z: q_closed(kern, z)  # noqa: E731
    elif form == "integral":
        fn = lambda z: q_integral(kern, z, **kw)  # noqa: E731
    else:
        raise ValueError(f"unknown kernel form {form!r}")
    return SuperFunction(fn, kern.lox.n, kern.lox.r, degree=kern.I.size, weight=kern.k, label=f"q[{form}]")


# ---------------------------------------------------------------------- cosets


class CosetAmbiguityError(RuntimeError):
    """Two different powers of gamma0 matched the same coset comparison."""


@dataclass(frozen=True, eq=False)
class CosetRep:
    word: tuple
    matrix: GroupElement

    @property
    def length(self) -> int:
        return len(self.word)


def _coset_features(gamma: GroupElement, lox: LoxodromicData) -> np.ndarray:
    gi = gamma.inv()
    return np.concatenate([_homog(gi.gprime, lox.Xplus), _homog(gi.gprime, lox.Xminus)])


def _homog(M: np.ndarray, X: np.ndarray) -> np.ndarray:
    v = M @ np.append(X, 1.0)
    return v[:-1] / v[-1]


def coset_enumerate(
    generators: Sequence[GroupElement],
    lox: LoxodromicData,
    L: int,
    j_max: int = 64,
    tol: float = 1e-8,
    feature_tol: float = 1e-6,
) -> list[CosetRep]:
    """Shortest-word representatives of <gamma0>\\Gamma within the word ball of radius L.

    Two words share a coset iff gamma1 gamma2^-1 is a power gamma0^j with |j| <= j_max.
    Candidates are found through gamma^-1 X+-, which is constant on cosets.
    """
    gamma0 = lox.gamma()
    powers = {0: GroupElement.identity(lox.n, lox.r)}
    for j in range(1, j_max + 1):
        powers[j] = powers[j - 1] @ gamma0
    g0i = gamma0.inv()
    for j in range(1, j_max + 1):
        powers[-j] = powers[-j + 1] @ g0i
    stack = {j: p.block_matrix() for j, p in powers.items()}

    reps: list[CosetRep] = []
    feats: list[np.ndarray] = []
    for word, el in word_ball(generators, L):
        f = _coset_features(el, lox)
        if feats:
            dist = np.max(np.abs(np.array(feats) - f[None, :]), axis=1)
            cand = np.nonzero(dist <= feature_tol)[0]
        else:
            cand = []
        duplicate = False
        for ci in cand:
            delta = (el @ reps[ci].matrix.inv()).block_matrix()
            matches = [
                j for j, P in stack.items() if np.linalg.norm(delta - P) <= tol * max(1.0, np.linalg.norm(P))
            ]
            if len(matches) > 1:
                raise CosetAmbiguityError(f"powers {matches} all match; tolerance {tol} is misconfigured")
            if matches:
                duplicate = True
                break
        if not duplicate:
            reps.append(CosetRep(word, el))
            feats.append(f)
    return reps


def shell_sizes(cosets: Sequence[CosetRep]) -> list[int]:
    L = max(c.length for c in cosets)
    out = [0] * (L + 1)
    for c in cosets:
        out[c.length] += 1
    return out


# -------------------------------------------------------------------- Poincare


@dataclass(frozen=True, eq=False)
class PoincareValue:
    value: Multivector
    shell_norms: list  # sum of |term| over the cosets of each word length
    terms: int


def _fsum_multivectors(vals: Sequence[Multivector], r: int) -> Multivector:
    if not vals:
        return Multivector.zero(r)
    C = np.array([v.coeffs for v in vals])
    re = [math.fsum(col) for col in C.real.T]
    im = [math.fsum(col) for col in C.imag.T]
    return Multivector(r, np.array(re) + 1j * np.array(im))


def poincare_series(
    kern: PoincareKernel, cosets: Sequence[CosetRep], z, form: str = "closed", divergence_window: int = 3
) -> PoincareValue:
    """sum over cosets of (q|_gamma)(z), with compensated summation and per-shell norms."""
    q = kernel_function(kern, form)
    z = as_ball_point(z, kern.lox.n)
    terms = []
    L = max((c.length for c in cosets), default=0)
    shells = [[] for _ in range(L + 1)]
    for c in cosets:
        val = slash(q, c.matrix, kern.k)(z)
        terms.append(val)
        shells[c.length].append(val.norm())
    shell_norms = [math.fsum(s) for s in shells]
    tail = shell_norms[-divergence_window:]
    if len(tail) == divergence_window and all(b >= a for a, b in zip(tail, tail[1:])):
        warnings.warn(
            "shell norms did not decrease over the last shells; k may be too small or the group not discrete",
            RuntimeWarning,
            stacklevel=2,
        )
    return PoincareValue(_fsum_multivectors(terms, kern.lox.r), shell_norms, len(terms))


def poincare_translate(kern: PoincareKernel, cosets: Sequence[CosetRep], gamma: GroupElement, z) -> Multivector:
    """(Phi_L |_gamma)(z) for the truncated series Phi_L."""
    q = kernel_function(kern)
    z = as_ball_point(z, kern.lox.n)
    terms = [slash(q, c.matrix @ gamma, kern.k)(z) for c in cosets]
    return _fsum_multivectors(terms, kern.lox.r)


# ---------------------------------------------------------------- reproducing


def reproducing_kernel(w, I: SubsetIndex, k: int, n: int) -> SuperFunction:
    """z -> Delta(z, w)^(-k-|I|) zeta^I."""
    w = as_ball_point(w, n)
    N = k + I.size
    return SuperFunction.monomial(lambda z: jordan_delta(z, w) ** (-N), I, n, I.r, label="reproducing kernel")


def reproducing_check(w, I: SubsetIndex, k: int, f: SuperFunction, quad: Quadrature = Quadrature()) -> complex:
    """(kernel_w, f) / f_I(w); the same constant for every f and w when the kernel reproduces."""
    w = as_ball_point(w, f.n)
    fw = f(w)[I.bits]
    if abs(fw) < 1e-8 * max(1.0, f(w).norm()):
        raise ValueError("f_I(w) vanishes; choose another evaluation point")
    K = reproducing_kernel(w, I, k, f.n)
    return petersson_pair(K, f, k, quad) / fw


def all_subsets(r: int) -> list[SubsetIndex]:
    return [SubsetIndex(b, r) for s in range(r + 1) for b in subsets_of_size(r, s)]

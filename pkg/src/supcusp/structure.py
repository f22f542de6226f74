"""Structure theory of G = sS(U(n,1) x U(r)).

Covers the split torus a_t, the su(1,1) embedding, the root-space splitting of
the Lie algebra, the NAK decomposition and the classification of elements by
the spectrum of their (n+1)-block.

Root spaces are read off from matrix entries after conjugating by the partial
Cayley matrix R, where a_t becomes diag(e^t, 1, ..., 1, e^-t).  Rows/columns
carry the levels +1 (index 0), 0 (middle), -1 (index n) and an entry in
position (i, j) has root level(i) - level(j).
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .cayley import HeisenbergElement, cayley_R, cayley_R_inv, cayley_to_H
from .domain import (
    GroupElement,
    MembershipError,
    form_J,
    fractional_linear,
    mobius,
    vector_from_json,
    vector_to_json,
)
from .superalg import DiagonalPhase

log = logging.getLogger(__name__)

EIG_TOL = 1e-8
UNDECIDABLE_BAND = 1e-4
COND_SEMISIMPLE = 1e4
COND_DEFECTIVE = 1e8
# size-2 Jordan blocks on the unit circle give cond ~ 1/sqrt(machine eps)
COND_DEFECTIVE_UNIT = 1e6
ROOTS = (-2, -1, 0, 1, 2)


# ------------------------------------------------------------------ Lie algebra


class LieAlgebraElement:
    """Pair (X, Y) with X in u(n,1), Y in u(r) and tr X = tr Y."""

    __slots__ = ("X", "Y")

    def __init__(self, X, Y=None):
        X = np.array(X, dtype=complex)
        if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] < 2:
            raise ValueError("X must be square of size n+1 >= 2")
        if Y is None or np.size(Y) == 0:
            Y = np.zeros((0, 0), dtype=complex)
        else:
            Y = np.array(Y, dtype=complex, ndmin=2)
        X.flags.writeable = False
        Y.flags.writeable = False
        self.X = X
        self.Y = Y

    @property
    def n(self) -> int:
        return self.X.shape[0] - 1

    @property
    def r(self) -> int:
        return self.Y.shape[0]

    @property
    def xi(self) -> np.ndarray:
        """Block-diagonal (n+1+r)-square matrix."""
        return sla.block_diag(self.X, self.Y) if self.r else self.X.copy()

    @classmethod
    def zero(cls, n: int, r: int = 0) -> "LieAlgebraElement":
        return cls(np.zeros((n + 1, n + 1)), np.zeros((r, r)))

    @classmethod
    def a_generator(cls, n: int, r: int = 0) -> "LieAlgebraElement":
        """Derivative of a_t at t = 0."""
        X = np.zeros((n + 1, n + 1), dtype=complex)
        X[0, n] = X[n, 0] = 1
        return cls(X, np.zeros((r, r)))

    def residuals(self) -> dict:
        J = form_J(self.n)
        return {
            "u(n,1)": float(np.linalg.norm(self.X.conj().T @ J + J @ self.X)),
            "u(r)": float(np.linalg.norm(self.Y.conj().T + self.Y)) if self.r else 0.0,
            "trace": float(abs(np.trace(self.X) - np.trace(self.Y))),
        }

    def check(self, tol: float = 1e-10) -> None:
        res = self.residuals()
        if max(res.values()) > tol:
            raise MembershipError(res, tol)

    def _like(self, other: "LieAlgebraElement") -> None:
        if other.X.shape != self.X.shape or other.Y.shape != self.Y.shape:
            raise ValueError("Lie algebra elements of different shape")

    def __add__(self, other):
        if not isinstance(other, LieAlgebraElement):
            return NotImplemented
        self._like(other)
        return LieAlgebraElement(self.X + other.X, self.Y + other.Y)

    def __sub__(self, other):
        if not isinstance(other, LieAlgebraElement):
            return NotImplemented
        self._like(other)
        return LieAlgebraElement(self.X - other.X, self.Y - other.Y)

    def __neg__(self):
        return LieAlgebraElement(-self.X, -self.Y)

    def __mul__(self, s):
        if isinstance(s, LieAlgebraElement):
            return NotImplemented
        s = float(s)  # real Lie algebra
        return LieAlgebraElement(s * self.X, s * self.Y)

    __rmul__ = __mul__

    def bracket(self, other: "LieAlgebraElement") -> "LieAlgebraElement":
        self._like(other)
        return LieAlgebraElement(self.X @ other.X - other.X @ self.X, self.Y @ other.Y - other.Y @ self.Y)

    def Ad(self, g: GroupElement) -> "LieAlgebraElement":
        """g xi g^-1."""
        gi = g.inv()
        return LieAlgebraElement(g.gprime @ self.X @ gi.gprime, g.E @ self.Y @ gi.E)

    def exp(self) -> GroupElement:
        Y = sla.expm(self.Y) if self.r else np.zeros((0, 0), dtype=complex)
        return GroupElement(sla.expm(self.X), Y)

    @classmethod
    def log(cls, g: GroupElement) -> "LieAlgebraElement":
        """Principal matrix logarithm; meaningful for g near the identity."""
        X = sla.logm(g.gprime)
        Y = sla.logm(g.E) if g.r else np.zeros((0, 0))
        return cls(X, Y)

    def to_vector(self) -> np.ndarray:
        """Real coordinates; 0.5 * dot of two such vectors is the trace inner product."""
        return np.concatenate([self.X.real.ravel(), self.X.imag.ravel(), self.Y.real.ravel(), self.Y.imag.ravel()])

    @classmethod
    def from_vector(cls, v: np.ndarray, n: int, r: int) -> "LieAlgebraElement":
        m = (n + 1) ** 2
        X = (v[:m] + 1j * v[m : 2 * m]).reshape(n + 1, n + 1)
        Y = (v[2 * m : 2 * m + r * r] + 1j * v[2 * m + r * r :]).reshape(r, r)
        return cls(X, Y)

    def norm(self) -> float:
        return math.sqrt(max(inner(self, self), 0.0))

    def allclose(self, other: "LieAlgebraElement", atol: float = 1e-12) -> bool:
        self._like(other)
        return bool(np.allclose(self.X, other.X, atol=atol, rtol=0) and np.allclose(self.Y, other.Y, atol=atol, rtol=0))

    def __repr__(self) -> str:
        return f"LieAlgebraElement(n={self.n}, r={self.r}, norm={self.norm():.4g})"


def inner(xi: LieAlgebraElement, eta: LieAlgebraElement) -> float:
    """0.5 Re tr(xi* eta) summed over both blocks."""
    return 0.5 * float(np.vdot(xi.X, eta.X).real + np.vdot(xi.Y, eta.Y).real)


def _project_u_n1(X: np.ndarray) -> np.ndarray:
    J = form_J(X.shape[0] - 1)
    return 0.5 * (X - J @ X.conj().T @ J)


def random_lie_element(n: int, r: int, rng: np.random.Generator, scale: float = 1.0) -> LieAlgebraElement:
    """A random element of the Lie algebra, entries of size ~scale."""
    X = _project_u_n1(rng.normal(size=(n + 1, n + 1)) + 1j * rng.normal(size=(n + 1, n + 1)))
    Y = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
    Y = 0.5 * (Y - Y.conj().T)
    # balance the traces: both are imaginary; shift X by a multiple of i*1
    gap = np.trace(Y) - np.trace(X)
    X = X + gap / (n + 1) * np.eye(n + 1)
    return LieAlgebraElement(scale * X, scale * Y)


def random_group_element(n: int, r: int, rng: np.random.Generator, scale: float = 1.0) -> GroupElement:
    return random_lie_element(n, r, rng, scale).exp()


# ----------------------------------------------------------------- root spaces


def _levels(n: int) -> np.ndarray:
    lev = np.zeros(n + 1, dtype=int)
    lev[0] = 1
    lev[n] = -1
    return lev


@lru_cache(maxsize=None)
def _root_masks(n: int) -> dict:
    lev = _levels(n)
    alpha = lev[:, None] - lev[None, :]
    return {a: (alpha == a) for a in ROOTS}


@dataclass(frozen=True, eq=False)
class RootComponents:
    """Components of a Lie algebra element along a, m and the root spaces g^alpha."""

    a_part: LieAlgebraElement
    m_part: LieAlgebraElement
    g_plus1: LieAlgebraElement
    g_minus1: LieAlgebraElement
    g_plus2: LieAlgebraElement
    g_minus2: LieAlgebraElement
    a_coefficient: float = 0.0

    def by_root(self) -> dict:
        return {
            -2: self.g_minus2,
            -1: self.g_minus1,
            0: self.a_part + self.m_part,
            1: self.g_plus1,
            2: self.g_plus2,
        }

    def total(self) -> LieAlgebraElement:
        return self.a_part + self.m_part + self.g_plus1 + self.g_minus1 + self.g_plus2 + self.g_minus2

    def neutral(self) -> LieAlgebraElement:
        """T^0 = a + m."""
        return self.a_part + self.m_part

    def contracting(self) -> LieAlgebraElement:
        """T^- : positive roots (contracted by the forward flow)."""
        return self.g_plus1 + self.g_plus2

    def expanding(self) -> LieAlgebraElement:
        """T^+ : negative roots."""
        return self.g_minus1 + self.g_minus2

    def present_roots(self, atol: float = 1e-12) -> set:
        out = {a for a, part in self.by_root().items() if part.norm() > atol}
        return out


def _from_R_basis(Xp: np.ndarray) -> np.ndarray:
    n = Xp.shape[0] - 1
    return cayley_R_inv(n) @ Xp @ cayley_R(n)


def root_split(xi: LieAlgebraElement) -> RootComponents:
    """Split xi by the eigenvalues of Ad(a_t) through the entry pattern in the R-basis."""
    n, r = xi.n, xi.r
    R = cayley_R(n)
    Xp = R @ xi.X @ R.T
    masks = _root_masks(n)
    zero_Y = np.zeros((r, r), dtype=complex)

    def part(a):
        return LieAlgebraElement(_from_R_basis(np.where(masks[a], Xp, 0)), zero_Y)

    X0p = np.where(masks[0], Xp, 0)
    x = 0.5 * float((X0p[0, 0] - X0p[n, n]).real)
    Dp = np.zeros_like(Xp)
    Dp[0, 0] = 1
    Dp[n, n] = -1
    a_part = LieAlgebraElement(_from_R_basis(x * Dp), zero_Y)
    m_part = LieAlgebraElement(_from_R_basis(X0p - x * Dp), xi.Y)
    return RootComponents(a_part, m_part, part(1), part(-1), part(2), part(-2), a_coefficient=x)


@lru_cache(maxsize=None)
def _basis_vectors(n: int, r: int) -> dict:
    m = (n + 1) ** 2
    dim = 2 * m + 2 * r * r
    spanning = []
    for i in range(n + 1):
        for j in range(n + 1):
            for c in (1.0, 1j):
                E = np.zeros((n + 1, n + 1), dtype=complex)
                E[i, j] = c
                spanning.append(LieAlgebraElement(_project_u_n1(E), np.zeros((r, r))).to_vector())
    for i in range(r):
        for j in range(r):
            for c in (1.0, 1j):
                E = np.zeros((r, r), dtype=complex)
                E[i, j] = c
                spanning.append(LieAlgebraElement(np.zeros((n + 1, n + 1)), 0.5 * (E - E.conj().T)).to_vector())
    S = np.array(spanning).reshape(-1, dim)
    # remove the direction violating tr X = tr Y; its normal (i 1, -i 1) lies in u(n,1) + u(r)
    normal = LieAlgebraElement(1j * np.eye(n + 1), -1j * np.eye(r)).to_vector()
    normal /= np.linalg.norm(normal)
    S = S - np.outer(S @ normal, normal)
    out = {}
    for key in ("a", "m", 1, -1, 2, -2):
        vecs = []
        for v in S:
            comps = root_split(LieAlgebraElement.from_vector(v, n, r))
            sel = {
                "a": comps.a_part,
                "m": comps.m_part,
                1: comps.g_plus1,
                -1: comps.g_minus1,
                2: comps.g_plus2,
                -2: comps.g_minus2,
            }[key]
            vecs.append(sel.to_vector())
        V = np.array(vecs)
        if V.size == 0:
            out[key] = np.zeros((0, dim))
            continue
        _, s, Vt = np.linalg.svd(V, full_matrices=False)
        rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0)))
        # rows are Euclidean-orthonormal; rescale so 0.5*dot is the identity
        out[key] = math.sqrt(2.0) * Vt[:rank]
    return out


def lie_basis(n: int, r: int = 0) -> dict:
    """Inner-product-orthonormal bases {"a", "m", 1, -1, 2, -2} -> list of LieAlgebraElement."""
    return {k: [LieAlgebraElement.from_vector(v, n, r) for v in V] for k, V in _basis_vectors(n, r).items()}


def basis_matrix(n: int, r: int, keys: Sequence) -> np.ndarray:
    """Stack of real coordinate rows for the requested components."""
    vecs = _basis_vectors(n, r)
    return np.concatenate([vecs[k] for k in keys], axis=0)


# ----------------------------------------------------------- explicit elements


def a_t(t: float, n: int, r: int = 0) -> GroupElement:
    g = np.eye(n + 1, dtype=complex)
    g[0, 0] = g[n, n] = math.cosh(t)
    g[0, n] = g[n, 0] = math.sinh(t)
    return GroupElement(g, np.eye(r))


def rho_embed(m, n: int, r: int = 0, tol: float = 1e-12) -> GroupElement:
    """Place a 2x2 unimodular matrix on rows/columns {0, n}."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if abs(np.linalg.det(m) - 1) > tol:
        raise ValueError(f"det m = {np.linalg.det(m):.6g}, expected 1")
    g = np.eye(n + 1, dtype=complex)
    g[0, 0], g[0, n], g[n, 0], g[n, n] = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    return GroupElement(g, np.eye(r))


def weyl_representative(n: int, r: int = 0) -> GroupElement:
    """An element of K normalizing A that acts on it by t -> -t."""
    d = np.ones(n + 1, dtype=complex)
    d[0] = 1j
    d[n] = -1j
    return GroupElement(np.diag(d), np.eye(r))


def m_element(eps: complex, u, E=None) -> GroupElement:
    """The element of M given by diag(eps, u, eps | E) in the R-basis; needs eps^2 det u = det E."""
    u = np.atleast_2d(np.asarray(u, dtype=complex)) if np.size(u) else np.zeros((0, 0), dtype=complex)
    n = u.shape[0] + 1
    gp = np.zeros((n + 1, n + 1), dtype=complex)
    gp[0, 0] = gp[n, n] = eps
    gp[1:n, 1:n] = u
    E = np.zeros((0, 0)) if E is None else np.asarray(E, dtype=complex)
    return GroupElement(cayley_R_inv(n) @ gp @ cayley_R(n), E)


def m_residual(w: GroupElement) -> float:
    """Distance of w from M: commutator with the A-direction plus failure to fix 0."""
    n = w.n
    Rg = cayley_R(n) @ w.gprime @ cayley_R_inv(n)
    lev = _levels(n)
    off = lev[:, None] != lev[None, :]
    return float(np.linalg.norm(Rg[off]) + abs(Rg[0, 0] - Rg[n, n]))


def is_in_M(w: GroupElement, tol: float = 1e-10) -> bool:
    return m_residual(w) <= tol


def am_normalizer_residual(h: GroupElement) -> float:
    """How far Ad_h moves a + m out of itself (0 iff h normalizes the Lie algebra of AM)."""
    basis = lie_basis(h.n, h.r)
    worst = 0.0
    for xi in basis["a"] + basis["m"]:
        c = root_split(xi.Ad(h))
        off = c.g_plus1 + c.g_minus1 + c.g_plus2 + c.g_minus2
        worst = max(worst, off.norm())
    return worst


# ------------------------------------------------------------------ Iwasawa


@dataclass(frozen=True, eq=False)
class IwasawaTriple:
    n_part: GroupElement
    a_part: float
    k_part: GroupElement
    heisenberg: HeisenbergElement

    def product(self) -> GroupElement:
        return self.n_part @ a_t(self.a_part, self.n_part.n, self.n_part.r) @ self.k_part


def iwasawa_decompose(g: GroupElement) -> IwasawaTriple:
    n, r = g.n, g.r
    w = cayley_to_H(mobius(g, np.zeros(n)))
    u = w[1:]
    lam = float(w[0].imag)
    e2t = float(w[0].real - 0.5 * np.vdot(u, u).real)
    t = 0.5 * math.log(e2t)
    heis = HeisenbergElement(lam, u)
    npart = heis.to_group(r)
    k = (npart @ a_t(t, n, r)).inv() @ g
    return IwasawaTriple(npart, t, k, heis)


# ----------------------------------------------------------- classification


class ElementKind(Enum):
    NOT_LOXODROMIC = "not-loxodromic"
    IRREGULAR_LOXODROMIC = "irregular-loxodromic"
    REGULAR_LOXODROMIC = "regular-loxodromic"
    BOUNDARY_UNDECIDABLE = "boundary-undecidable"


@dataclass(frozen=True, eq=False)
class LoxodromicData:
    """gamma = g a_t0 w0 g^-1 with w0 in M and the E-block of w0 diagonal."""

    g: GroupElement
    t0: float
    w0: GroupElement
    phase: DiagonalPhase
    Xplus: np.ndarray
    Xminus: np.ndarray

    @property
    def E0(self) -> np.ndarray:
        return np.diag(np.diag(self.w0.E))

    @property
    def D(self) -> tuple:
        return self.phase.d

    @property
    def chi(self) -> float:
        return self.phase.chi

    @property
    def n(self) -> int:
        return self.g.n

    @property
    def r(self) -> int:
        return self.g.r

    def gamma(self) -> GroupElement:
        return self.g @ a_t(self.t0, self.n, self.r) @ self.w0 @ self.g.inv()

    def residuals(self, gamma: Optional[GroupElement] = None) -> dict:
        out = {
            "w0-in-M": m_residual(self.w0),
            "E0-diagonal": float(np.linalg.norm(self.w0.E - self.E0)),
            "exp(2 pi i D)": float(np.linalg.norm(self.phase.E0() - self.E0)) if self.r else 0.0,
        }
        if gamma is not None:
            out["reconstruction"] = self.gamma().distance_to(gamma)
        return out

    def to_json(self) -> dict:
        return {
            "g": self.g.to_json(),
            "t0": self.t0,
            "w0": self.w0.to_json(),
            "D": list(self.phase.d),
            "chi": self.phase.chi,
            "Xplus": vector_to_json(self.Xplus),
            "Xminus": vector_to_json(self.Xminus),
        }

    @classmethod
    def from_json(cls, obj) -> "LoxodromicData":
        g = GroupElement.from_json(obj["g"])
        w0 = GroupElement.from_json(obj["w0"])
        return cls(
            g=g,
            t0=float(obj["t0"]),
            w0=w0,
            phase=DiagonalPhase(tuple(float(x) for x in obj.get("D", [])), float(obj["chi"])),
            Xplus=vector_from_json(obj["Xplus"]),
            Xminus=vector_from_json(obj["Xminus"]),
        )


@dataclass(frozen=True, eq=False)
class Classification:
    kind: ElementKind
    data: Optional[LoxodromicData] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_regular(self) -> bool:
        return self.kind is ElementKind.REGULAR_LOXODROMIC


def _j_orthonormal_complement(vp: np.ndarray, vm: np.ndarray, J: np.ndarray) -> np.ndarray:
    """J-orthonormal basis of the J-complement of span(v+, v-), built from the standard basis."""
    n1 = J.shape[0]
    P = np.array([vp.conj() @ J, vm.conj() @ J])
    # projector onto the complement along span(v+, v-): x - V (P V)^-1 P x
    V = np.stack([vp, vm], axis=1)
    proj = np.eye(n1) - V @ np.linalg.solve(P @ V, P)
    cols = []
    for i in range(1, n1 - 1):
        x = proj[:, i].copy()
        for c in cols:
            x = x - (c.conj() @ J @ x) * c
        x = x / math.sqrt((x.conj() @ J @ x).real)
        cols.append(x)
    if len(cols) != n1 - 2:  # pragma: no cover - guarded by loop bounds
        raise RuntimeError("complement construction failed")
    return np.stack(cols, axis=1) if cols else np.zeros((n1, 0), dtype=complex)


def _unit_circle_kind(gp: np.ndarray, lam: np.ndarray, V: np.ndarray) -> tuple[ElementKind, dict]:
    J = form_J(gp.shape[0] - 1)
    cond = float(np.linalg.cond(V))
    diag = {"eigvec-cond": cond}
    if cond > COND_DEFECTIVE_UNIT:
        diag["reason"] = "non-semisimple (parabolic)"
        return ElementKind.NOT_LOXODROMIC, diag
    # an elliptic element lies in (a conjugate of) AM exactly when an eigenspace
    # containing a timelike vector also contains a spacelike one
    used = np.zeros(lam.shape[0], dtype=bool)
    for i in range(lam.shape[0]):
        if used[i]:
            continue
        cluster = np.abs(lam - lam[i]) < 1e-6
        used |= cluster
        Vc = V[:, cluster]
        H = Vc.conj().T @ J @ Vc
        ev = np.linalg.eigvalsh(0.5 * (H + H.conj().T))
        if ev.min() < 0 and Vc.shape[1] >= 2 and ev.max() > 0:
            diag["reason"] = "elliptic with degenerate timelike eigenspace"
            return ElementKind.IRREGULAR_LOXODROMIC, diag
    diag["reason"] = "elliptic, fixed point only"
    return ElementKind.NOT_LOXODROMIC, diag


def classify_element(gamma: GroupElement, eig_tol: float = EIG_TOL, band: float = UNDECIDABLE_BAND) -> Classification:
    """Classify gamma by the spectrum of its (n+1)-block; build axis data when regular."""
    gp = np.asarray(gamma.gprime)
    n, r = gamma.n, gamma.r
    lam, V = np.linalg.eig(gp)
    logmod = np.log(np.abs(lam))
    ip, im = int(np.argmax(logmod)), int(np.argmin(logmod))
    top = float(logmod[ip])
    diagnostics = {"max-log-modulus": top}
    if top < eig_tol:
        kind, extra = _unit_circle_kind(gp, lam, V)
        diagnostics.update(extra)
        return Classification(kind, None, diagnostics)
    if top < band:
        # A Jordan block of size m splits unit eigenvalues by ~ eps^(1/m), which lands
        # here.  Such blocks have nearly parallel eigenvectors; a genuine short
        # translation keeps its two isotropic eigenvectors well apart.
        cond = float(np.linalg.cond(V))
        diagnostics["eigvec-cond"] = cond
        if cond > COND_DEFECTIVE:
            diagnostics["reason"] = "non-semisimple (parabolic)"
            return Classification(ElementKind.NOT_LOXODROMIC, None, diagnostics)
        if cond > COND_SEMISIMPLE:
            diagnostics["reason"] = (
                f"largest |log|lambda|| = {top:.3e} lies in [{eig_tol:g}, {band:g}) and the eigenvector "
                f"condition number {cond:.2e} separates neither case"
            )
            return Classification(ElementKind.BOUNDARY_UNDECIDABLE, None, diagnostics)

    J = form_J(n)
    vp = V[:, ip] / np.linalg.norm(V[:, ip])
    vm = V[:, im] / np.linalg.norm(V[:, im])
    s = vm.conj() @ J @ vp
    vm = vm * (-1 / np.conj(s))  # now vm* J vp = -1
    # balance the A-ambiguity (v+, v-) -> (c v+, v-/c) by equal Euclidean norms
    c = math.sqrt(np.linalg.norm(vm) / np.linalg.norm(vp))
    vp, vm = vp * c, vm / c
    mid = _j_orthonormal_complement(vp, vm, J)

    # E-block: unitary Schur form gives E_gamma = U T U* with T diagonal
    if r:
        T, U = sla.schur(np.asarray(gamma.E), output="complex")
        detU = np.linalg.det(U)
    else:
        U = np.zeros((0, 0), dtype=complex)
        detU = 1.0

    def frame(phase):
        f_p, f_m = phase * vp, phase * vm
        G = np.empty((n + 1, n + 1), dtype=complex)
        G[:, 0] = (f_p - f_m) / math.sqrt(2)
        G[:, 1:n] = mid
        G[:, n] = (f_p + f_m) / math.sqrt(2)
        return G

    G1 = frame(1.0)
    half = np.sqrt(detU / np.linalg.det(G1))
    candidates = [frame(half), frame(-half)]
    # pick the sign that keeps the {0, n} block closest to the identity
    G = max(candidates, key=lambda M: (M[0, 0] + M[n, n]).real)
    g = GroupElement(G, U)

    t0 = top
    h = g.inv() @ gamma @ g
    w0 = a_t(-t0, n, r) @ h
    Rw = cayley_R(n) @ w0.gprime @ cayley_R_inv(n)
    eps = complex(Rw[n, n])
    phase = DiagonalPhase.from_phases(np.diag(w0.E), 1 / eps)
    e1 = np.zeros(n, dtype=complex)
    e1[0] = 1
    data = LoxodromicData(
        g=g,
        t0=t0,
        w0=w0,
        phase=phase,
        Xplus=fractional_linear(G, e1),
        Xminus=fractional_linear(G, -e1),
    )
    diagnostics.update(data.residuals(gamma))
    if diagnostics["w0-in-M"] > 1e-8:
        log.warning("w0 is %.2e away from M; spectrum may be degenerate", diagnostics["w0-in-M"])
    return Classification(ElementKind.REGULAR_LOXODROMIC, data, diagnostics)


def translation_length(gamma: GroupElement) -> float:
    """max log|lambda| over the (n+1)-block spectrum (t0 for regular loxodromic elements)."""
    return float(np.max(np.log(np.abs(np.linalg.eigvals(gamma.gprime)))))


# ----------------------------------------------------------------- word balls


def _inverse_index(i: int) -> int:
    return -i


def word_ball(generators: Sequence[GroupElement], L: int) -> list[tuple[tuple[int, ...], GroupElement]]:
    """Reduced words of length <= L in the generators and their inverses, breadth first.

    Letter +k means generator k-1, letter -k its inverse.
    """
    if not generators:
        raise ValueError("need at least one generator")
    letters = {}
    for i, s in enumerate(generators, start=1):
        letters[i] = s
        letters[-i] = s.inv()
    ident = GroupElement.identity(generators[0].n, generators[0].r)
    out = [((), ident)]
    frontier = deque(out)
    for _ in range(L):
        nxt = deque()
        for word, el in frontier:
            for a, s in letters.items():
                if word and word[-1] == _inverse_index(a):
                    continue
                item = (word + (a,), el @ s)
                nxt.append(item)
                out.append(item)
        frontier = nxt
    return out


@dataclass(frozen=True, eq=False)
class PrimitiveRoot:
    root: GroupElement
    nu: int
    word: tuple
    proven_primitive: bool = False  # only a finite word ball was searched


def primitive_root(
    gamma: GroupElement,
    generators: Sequence[GroupElement],
    max_power: int = 4,
    max_word_length: int = 4,
    tol: float = 1e-9,
) -> PrimitiveRoot:
    """Search the word ball for delta with delta^nu = gamma, nu >= 2, minimal translation length."""
    cls = classify_element(gamma)
    if not cls.is_regular:
        raise ValueError(f"primitive_root needs a regular loxodromic element, got {cls.kind.value}")
    t_gamma = cls.data.t0
    best = None
    for word, delta in word_ball(generators, max_word_length):
        if not word:
            continue
        t_delta = translation_length(delta)
        if t_delta < UNDECIDABLE_BAND:
            continue
        ratio = t_gamma / t_delta
        nu = int(round(ratio))
        if nu < 2 or nu > max_power or abs(ratio - nu) > 1e-6 * nu:
            continue
        for cand, w in ((delta, word), (delta.inv(), tuple(-a for a in reversed(word)))):
            if (cand**nu).distance_to(gamma) <= tol * max(1.0, np.linalg.norm(gamma.gprime)):
                if best is None or t_delta < best[0] - 1e-12:
                    best = (t_delta, cand, nu, w)
                break
    if best is None:
        return PrimitiveRoot(gamma, 1, ())
    return PrimitiveRoot(best[1], best[2], best[3])

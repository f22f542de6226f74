"""Unbounded realization H = {Re w1 > |w2|^2 / 2} and the Heisenberg group.

The partial Cayley matrix R maps the ball onto H.  On H the group
N' = R N R^-1 acts by pseudo-translations n'_{lam,u}, and the sesqui-polynomial
Delta'(z, w) = z1 + conj(w1) - w2* z2 replaces the Jordan triple determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .domain import GroupElement, fractional_linear, jordan_delta, vector_to_json

SQRT2 = math.sqrt(2.0)


def cayley_R(n: int) -> np.ndarray:
    """The partial Cayley matrix (real orthogonal, det 1)."""
    R = np.eye(n + 1, dtype=complex)
    c = 1 / SQRT2
    R[0, 0] = c
    R[0, n] = c
    R[n, 0] = -c
    R[n, n] = c
    return R


def cayley_R_inv(n: int) -> np.ndarray:
    return cayley_R(n).T.copy()


def in_H(w, tol: float = 1e-12) -> bool:
    w = np.asarray(w, dtype=complex)
    return bool(w[0].real - 0.5 * np.vdot(w[1:], w[1:]).real > tol * (1 + abs(w[0])))


def on_boundary_H(w, tol: float = 1e-12) -> bool:
    w = np.asarray(w, dtype=complex)
    return bool(abs(w[0].real - 0.5 * np.vdot(w[1:], w[1:]).real) <= tol * (1 + abs(w[0])))


def cayley_to_H(z) -> np.ndarray:
    """w = R z: w1 = (1 + z1)/(1 - z1), w2 = sqrt(2) z2/(1 - z1)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if abs(1 - z[0]) < 1e-300:
        raise ZeroDivisionError("z1 = 1 is the pole of the Cayley transform")
    return fractional_linear(cayley_R(z.shape[0]), z)


def cayley_to_B(w) -> np.ndarray:
    """z = R^-1 w: z1 = (w1 - 1)/(w1 + 1), z2 = sqrt(2) w2/(1 + w1)."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    return fractional_linear(cayley_R_inv(w.shape[0]), w)


def j_R(z) -> complex:
    """j(R, z) = sqrt(2)/(1 - z1)."""
    return SQRT2 / (1 - complex(np.atleast_1d(z)[0]))


def j_R_inv(w) -> complex:
    """j(R^-1, w) = sqrt(2)/(1 + w1)."""
    return SQRT2 / (1 + complex(np.atleast_1d(w)[0]))


def delta_prime(z, w) -> complex:
    """Delta'(z, w) = z1 + conj(w1) - w2* z2."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    return complex(z[0] + np.conj(w[0]) - np.vdot(w[1:], z[1:]))


def delta_prime_via_ball(z, w) -> complex:
    """Delta'(z, w) computed by transport: Delta(R^-1 z, R^-1 w) j(R^-1, z)^-1 conj(j(R^-1, w))^-1."""
    return jordan_delta(cayley_to_B(z), cayley_to_B(w)) / j_R_inv(z) / np.conj(j_R_inv(w))


def a_prime(t: float, n: int) -> np.ndarray:
    """R a_t R^-1 = diag(e^t, 1_(n-1), e^-t)."""
    d = np.ones(n + 1, dtype=complex)
    d[0] = math.exp(t)
    d[n] = math.exp(-t)
    return np.diag(d)


# ------------------------------------------------------------------ Heisenberg


@dataclass(frozen=True, eq=False)
class HeisenbergElement:
    """n'_{lam, u} with lam real and u in C^(n-1)."""

    lam: float
    u: np.ndarray

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.u, dtype=complex)).copy()
        u.flags.writeable = False
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "u", u)

    @property
    def n(self) -> int:
        return self.u.shape[0] + 1

    def matrix(self) -> np.ndarray:
        n = self.n
        M = np.eye(n + 1, dtype=complex)
        M[0, 1:n] = self.u.conj()
        M[0, n] = 1j * self.lam + 0.5 * np.vdot(self.u, self.u)
        M[1:n, n] = self.u
        return M

    @classmethod
    def from_matrix(cls, M: np.ndarray) -> "HeisenbergElement":
        n = M.shape[0] - 1
        return cls(float(M[0, n].imag), M[1:n, n])

    def inverse(self) -> "HeisenbergElement":
        return HeisenbergElement(-self.lam, -self.u)

    def to_group(self, r: int = 0) -> GroupElement:
        """The element R^-1 n' R of N inside G (with E = 1)."""
        n = self.n
        return GroupElement(cayley_R_inv(n) @ self.matrix() @ cayley_R(n), np.eye(r))

    def close_to(self, other: "HeisenbergElement", tol: float = 1e-12) -> bool:
        return abs(self.lam - other.lam) <= tol and bool(np.allclose(self.u, other.u, atol=tol, rtol=0))

    def __repr__(self) -> str:
        return f"HeisenbergElement(lam={self.lam:.6g}, u={self.u})"


def heisenberg_mul(a: HeisenbergElement, b: HeisenbergElement) -> HeisenbergElement:
    """n'_{lam,u} n'_{mu,v} = n'_{lam + mu + Im(u* v), u + v}."""
    if a.n != b.n:
        raise ValueError("Heisenberg elements of different dimension")
    return HeisenbergElement(a.lam + b.lam + float(np.vdot(a.u, b.u).imag), a.u + b.u)


def heisenberg_act(a: HeisenbergElement, w) -> np.ndarray:
    """w -> (w1 + u* w2 + i lam + u*u/2, w2 + u)."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    out = np.empty_like(w)
    out[0] = w[0] + np.vdot(a.u, w[1:]) + 1j * a.lam + 0.5 * np.vdot(a.u, a.u)
    out[1:] = w[1:] + a.u
    return out


# ------------------------------------------------------------------- geodesics


@dataclass(frozen=True, eq=False)
class GeodesicH:
    """Geodesic through e^(2u) e1 with initial direction fixed by (y, s), y^2 + s*s = 1."""

    u: float
    y: float
    s: np.ndarray

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.s, dtype=complex)).copy()
        s.flags.writeable = False
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "y", float(self.y))
        resid = abs(self.y**2 + np.vdot(s, s).real - 1)
        if resid > 1e-12:
            raise ValueError(f"y^2 + s*s = 1 violated by {resid:.3e}")

    @property
    def n(self) -> int:
        return self.s.shape[0] + 1

    def to_json(self) -> dict:
        return {"u": self.u, "y": self.y, "s": vector_to_json(self.s)}


def geodesic_point(geo: GeodesicH, t: float) -> np.ndarray:
    tau = math.tanh(t)
    y = geo.y
    den = 1 + y**2 * tau**2
    eu = math.exp(geo.u)
    w = np.empty(geo.n, dtype=complex)
    w[0] = eu * eu * (1 - y**2 * tau**2 + 2j * y * tau) / den
    w[1:] = eu * SQRT2 * tau * (1 + 1j * y * tau) * geo.s / den
    return w


def geodesic_point_by_transport(geo: GeodesicH, t: float) -> np.ndarray:
    """a'_u R k a_t 0, where k in K' has first column (iy, s)."""
    n = geo.n
    z = math.tanh(t) * np.concatenate([[1j * geo.y], geo.s])
    return fractional_linear(a_prime(geo.u, n), cayley_to_H(z))


def delta_prime_profile(geo: GeodesicH, t: float) -> float:
    """Delta'(w_t, w_t) = 2 e^(2u) (1 - tanh^2 t)/(1 + y^2 tanh^2 t)."""
    tau2 = math.tanh(t) ** 2
    return 2 * math.exp(2 * geo.u) * (1 - tau2) / (1 + geo.y**2 * tau2)


def delta_prime_profile_alt(geo: GeodesicH, t: float) -> float:
    """The same profile written as 8 e^(2u)/((1 + y^2)(e^2t + e^-2t) + 2 s*s)."""
    ss = np.vdot(geo.s, geo.s).real
    return 8 * math.exp(2 * geo.u) / ((1 + geo.y**2) * (math.exp(2 * t) + math.exp(-2 * t)) + 2 * ss)


class EscapeKind(Enum):
    TO_INFINITY = "to-infinity"
    TWO_BOUNDARY_POINTS = "two-boundary-points"


@dataclass(frozen=True)
class EscapeResult:
    kind: EscapeKind
    direction: int  # +1: w_t -> oo as t -> +oo, -1: as t -> -oo, 0 otherwise
    t_star: Optional[float]  # maximiser of the Delta' profile (two-boundary case)
    law_residual: Optional[float]  # sup |profile(t) / (profile(0) e^(2 dir t)) - 1| (to-infinity case)
    profile: Callable[[float], float]


def geodesic_in_H(g: GroupElement) -> Callable[[float], np.ndarray]:
    """t -> R g a_t 0."""
    M = cayley_R(g.n) @ g.gprime

    def w(t: float) -> np.ndarray:
        n = g.n
        v = np.zeros(n + 1, dtype=complex)
        v[0] = math.sinh(t)
        v[n] = math.cosh(t)
        x = M @ v
        return x[:n] / x[n]

    return w


def _golden_max(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2


def escape_classification(
    g: GroupElement,
    tol: float = 1e-10,
    sample_ts=(-3.0, -1.0, -0.25, 0.5, 1.5, 3.0),
) -> EscapeResult:
    """Decide whether t -> R g a_t 0 runs to infinity or joins two points of dH."""
    n = g.n
    e1 = np.zeros(n, dtype=complex)
    e1[0] = 1
    w = geodesic_in_H(g)

    def profile(t: float) -> float:
        p = w(t)
        return delta_prime(p, p).real

    ends = {+1: fractional_linear(g.gprime, e1), -1: fractional_linear(g.gprime, -e1)}
    for direction, X in ends.items():
        if np.linalg.norm(X - e1) < 1e-8:
            p0 = profile(0.0)
            resid = max(abs(profile(t) / (p0 * math.exp(2 * direction * t)) - 1) for t in sample_ts)
            return EscapeResult(EscapeKind.TO_INFINITY, direction, None, resid, profile)
    # unimodal profile: find a bracketing window by doubling, then golden section
    lo, hi = -1.0, 1.0
    while profile(lo) > profile(lo + 0.5):
        lo *= 2
    while profile(hi) > profile(hi - 0.5):
        hi *= 2
    t_star = _golden_max(profile, lo, hi, tol)
    return EscapeResult(EscapeKind.TWO_BOUNDARY_POINTS, 0, t_star, None, profile)

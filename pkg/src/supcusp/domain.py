"""The bounded realization: the group G, its action on the ball, weights and pairings.

G consists of block pairs (g', E) with g' in U(n, 1) for the form
J = diag(1_n, -1), E in U(r) and det g' = det E.  It acts on the super
ball by (z; zeta) -> ((Az + b)/(cz + d); E zeta/(cz + d)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import roots_jacobi

from .superalg import Multivector, odd_substitute, subsets_of_size

# tolerance ladder
TOL_EXACT = 1e-12
TOL_MATRIX = 1e-10
TOL_CHAIN = 1e-9
TOL_QUAD = 1e-6


class MembershipError(ValueError):
    """Raised when matrices fail the defining relations of G."""

    def __init__(self, diagnostics: dict[str, float], tol: float):
        self.diagnostics = diagnostics
        self.tol = tol
        parts = ", ".join(f"{k}={v:.3e}" for k, v in diagnostics.items() if v > tol)
        super().__init__(f"not an element of G (tol {tol:g}): {parts}")


class OutsideBallError(ValueError):
    pass


def form_J(n: int) -> np.ndarray:
    J = np.eye(n + 1)
    J[n, n] = -1.0
    return J


def _complex_matrix(M) -> np.ndarray:
    return np.array(M, dtype=complex, ndmin=2) if np.size(M) else np.zeros((0, 0), dtype=complex)


@dataclass(frozen=True, eq=False)
class GroupElement:
    """An element (g', E) of G.  Construct through :func:`check_membership` to validate."""

    gprime: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        gp = np.array(self.gprime, dtype=complex)
        E = np.array(self.E, dtype=complex).reshape(np.shape(self.E) if np.size(self.E) else (0, 0))
        gp.flags.writeable = False
        E.flags.writeable = False
        object.__setattr__(self, "gprime", gp)
        object.__setattr__(self, "E", E)

    @property
    def n(self) -> int:
        return self.gprime.shape[0] - 1

    @property
    def r(self) -> int:
        return self.E.shape[0]

    @classmethod
    def identity(cls, n: int, r: int = 0) -> "GroupElement":
        return cls(np.eye(n + 1, dtype=complex), np.eye(r, dtype=complex))

    @property
    def A(self) -> np.ndarray:
        return self.gprime[: self.n, : self.n]

    @property
    def b(self) -> np.ndarray:
        return self.gprime[: self.n, self.n]

    @property
    def c(self) -> np.ndarray:
        return self.gprime[self.n, : self.n]

    @property
    def d(self) -> complex:
        return complex(self.gprime[self.n, self.n])

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if not isinstance(other, GroupElement):
            return NotImplemented
        if (self.n, self.r) != (other.n, other.r):
            raise ValueError("group elements of different shapes")
        return GroupElement(self.gprime @ other.gprime, self.E @ other.E)

    def inv(self) -> "GroupElement":
        J = form_J(self.n)
        return GroupElement(J @ self.gprime.conj().T @ J, self.E.conj().T)

    def __pow__(self, k: int) -> "GroupElement":
        k = int(k)
        base = self if k >= 0 else self.inv()
        out = GroupElement.identity(self.n, self.r)
        for _ in range(abs(k)):
            out = out @ base
        return out

    def distance_to(self, other: "GroupElement") -> float:
        """Frobenius distance of the block matrices (not the Riemannian distance)."""
        return float(
            math.hypot(np.linalg.norm(self.gprime - other.gprime), np.linalg.norm(self.E - other.E))
        )

    def block_matrix(self) -> np.ndarray:
        m = self.n + 1
        out = np.zeros((m + self.r, m + self.r), dtype=complex)
        out[:m, :m] = self.gprime
        out[m:, m:] = self.E
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "gprime": matrix_to_json(self.gprime),
            "E": matrix_to_json(self.E),
        }

    @classmethod
    def from_json(cls, obj, validate: bool = True, tol: float = TOL_MATRIX) -> "GroupElement":
        n, r = int(obj["n"]), int(obj["r"])
        gp = matrix_from_json(obj["gprime"], (n + 1, n + 1))
        E = matrix_from_json(obj["E"], (r, r))
        if validate:
            return check_membership(gp, E, tol=tol)
        return cls(gp, E)

    def __repr__(self) -> str:
        return f"GroupElement(n={self.n}, r={self.r})"


def matrix_to_json(M: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(M, dtype=complex)]


def matrix_from_json(obj, shape: tuple[int, int]) -> np.ndarray:
    if shape[0] == 0:
        return np.zeros((0, 0), dtype=complex)
    arr = np.array(obj, dtype=float)
    if arr.shape != (*shape, 2):
        raise ValueError(f"expected matrix of shape {shape} as [re, im] pairs, got {arr.shape[:-1]}")
    return arr[..., 0] + 1j * arr[..., 1]


def vector_to_json(v) -> list:
    return [[float(x.real), float(x.imag)] for x in np.asarray(v, dtype=complex)]


def vector_from_json(obj) -> np.ndarray:
    arr = np.array(obj, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def membership_residuals(gprime, E) -> dict[str, float]:
    gp = np.asarray(gprime, dtype=complex)
    E = _complex_matrix(E) if np.size(E) else np.zeros((0, 0), dtype=complex)
    n = gp.shape[0] - 1
    J = form_J(n)
    r = E.shape[0]
    return {
        "J-residual": float(np.linalg.norm(gp.conj().T @ J @ gp - J)),
        "E-unitarity": float(np.linalg.norm(E.conj().T @ E - np.eye(r))) if r else 0.0,
        "det-balance": float(abs(np.linalg.det(gp) - (np.linalg.det(E) if r else 1.0))),
    }


def check_membership(gprime, E=None, tol: float = TOL_MATRIX) -> GroupElement:
    """Validate raw blocks and return a :class:`GroupElement`.

    Raises :class:`MembershipError` listing each violated relation with its residual.
    """
    gp = np.asarray(gprime, dtype=complex)
    if gp.ndim != 2 or gp.shape[0] != gp.shape[1] or gp.shape[0] < 2:
        raise ValueError(f"gprime must be square of size n+1 >= 2, got {gp.shape}")
    if E is None or np.size(E) == 0:
        E = np.zeros((0, 0), dtype=complex)
    E = np.asarray(E, dtype=complex)
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise ValueError(f"E must be square, got {E.shape}")
    res = membership_residuals(gp, E)
    if any(v > tol for v in res.values()):
        raise MembershipError(res, tol)
    return GroupElement(gp, E)


def as_ball_point(z, n: Optional[int] = None, strict: bool = True) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.ndim != 1:
        raise ValueError("ball points are 1-d complex vectors")
    if n is not None and z.shape[0] != n:
        raise ValueError(f"expected a point of C^{n}, got length {z.shape[0]}")
    if strict and np.vdot(z, z).real >= 1.0:
        raise OutsideBallError(f"|z|^2 = {np.vdot(z, z).real:.6g} >= 1")
    return z


def fractional_linear(M: np.ndarray, z: np.ndarray) -> np.ndarray:
    """(Az + b)/(cz + d) for an arbitrary (n+1)x(n+1) block matrix M."""
    n = M.shape[0] - 1
    den = M[n, :n] @ z + M[n, n]
    if abs(den) < 1e-14:
        raise OutsideBallError(f"|cz + d| = {abs(den):.3e}: point numerically outside the domain")
    return (M[:n, :n] @ z + M[:n, n]) / den


def mobius(g: GroupElement, z) -> np.ndarray:
    """Body part of the action: g(z) = (Az + b)(cz + d)^(-1)."""
    z = as_ball_point(z, g.n, strict=False)
    return fractional_linear(g.gprime, z)


def cocycle(g: GroupElement, z) -> complex:
    """j(g, z) = (cz + d)^(-1)."""
    z = as_ball_point(z, g.n, strict=False)
    den = complex(g.c @ z + g.d)
    if abs(den) < 1e-14:
        raise OutsideBallError(f"|cz + d| = {abs(den):.3e}: point numerically outside the ball")
    return 1.0 / den


def jordan_delta(z, w) -> complex:
    """Delta(z, w) = 1 - w* z."""
    return complex(1.0 - np.vdot(np.asarray(w, dtype=complex), np.asarray(z, dtype=complex)))


def invariant_volume_density(z) -> float:
    """Delta(z, z)^(-(n+1)), density of the G-invariant volume w.r.t. Lebesgue measure."""
    z = as_ball_point(z)
    return float(jordan_delta(z, z).real ** (-(z.shape[0] + 1)))


@dataclass(frozen=True)
class SuperFunction:
    """A Lambda(C^r)-valued function on the ball, given by a pure evaluator.

    ``degree`` marks a pure-degree function (all values supported on |I| = degree);
    ``weight`` is an optional hint of the automorphy weight it was built for.
    """

    fn: Callable[[np.ndarray], Multivector]
    n: int
    r: int = 0
    degree: Optional[int] = None
    weight: Optional[int] = None
    label: str = field(default="", compare=False)

    def __call__(self, z) -> Multivector:
        val = self.fn(np.asarray(z, dtype=complex))
        if not isinstance(val, Multivector):
            val = Multivector.scalar(complex(val), self.r)
        return val

    def component(self, I, z) -> complex:
        return self(z)[I]

    @classmethod
    def scalar(cls, fn: Callable[[np.ndarray], complex], n: int, r: int = 0, **kw) -> "SuperFunction":
        return cls.monomial(fn, 0, n, r, **kw)

    @classmethod
    def monomial(cls, fn: Callable[[np.ndarray], complex], I, n: int, r: int, **kw) -> "SuperFunction":
        """The function fn(z) * zeta^I."""
        basis = Multivector.basis(I, r)
        deg = kw.pop("degree", None)
        if deg is None:
            deg = next(iter(basis.degrees()))
        return cls(lambda z: basis * complex(fn(z)), n, r, degree=deg, **kw)


def slash(f: SuperFunction, g: GroupElement, k: int) -> SuperFunction:
    """Weight-k slash: (f|_g)(z) = sum_I f_I(gz) (E zeta)^I j(g, z)^(k+|I|)."""
    if (f.n, f.r) != (g.n, g.r):
        raise ValueError(f"function on B^({f.n}|{f.r}) slashed by element of shape ({g.n}|{g.r})")
    E = g.E

    def evaluate(z):
        j = cocycle(g, z)
        val = f(mobius(g, z))
        return odd_substitute(val, E, j) * j**k

    return SuperFunction(evaluate, f.n, f.r, degree=f.degree, weight=k, label=f"{f.label}|g")


def lift(f: SuperFunction, g: GroupElement, k: int) -> Multivector:
    """f~(g) = (f|_g)(0; eta)."""
    return slash(f, g, k)(np.zeros(g.n, dtype=complex))


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class Quadrature:
    """Polar tensor grid on the ball: ``radial`` Gauss nodes per radial factor, ``angular`` per angle."""

    radial: int = 64
    angular: int = 64

    def to_json(self) -> dict:
        return {"radial": self.radial, "angular": self.angular}

    @classmethod
    def from_json(cls, obj) -> "Quadrature":
        return cls(int(obj["radial"]), int(obj["angular"]))


def _simplex_rule(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Points (P x n) on {x >= 0, sum x = 1} and weights for dx_1..dx_(n-1), by stick breaking."""
    pts = np.ones((1, 0))
    rest = np.ones(1)
    wts = np.ones(1)
    for i in range(n - 1):
        # u_i carries the Jacobian factor (1 - u_i)^(n-2-i)
        xu, wu = roots_jacobi(m, n - 2 - i, 0)
        u = (xu + 1) / 2
        wu = wu / 2 ** (n - 1 - i)
        pts = np.concatenate(
            [np.repeat(pts, m, axis=0), (rest[:, None] * u[None, :]).reshape(-1, 1)], axis=1
        )
        rest = (rest[:, None] * (1 - u)[None, :]).reshape(-1)
        wts = (wts[:, None] * wu[None, :]).reshape(-1)
    return np.column_stack([pts, rest]), wts


def ball_quadrature(n: int, quad: Quadrature, weight_exponent: float = 0.0):
    """Nodes z (N x n) and weights w with sum w f(z) ~ int_B f(z) Delta(z,z)^lam dV.

    With s_i = |z_i|^2 the volume is 2^-n ds dtheta.  The s-simplex is written
    s = sigma * x, x on the unit simplex; sigma carries (1 - sigma)^lam sigma^(n-1)
    and is integrated by Gauss-Jacobi, the angles by the trapezoid rule.
    """
    lam = float(weight_exponent)
    if lam <= -1:
        raise ValueError(f"Delta^{lam} is not integrable on the ball")
    m = quad.radial
    xs, ws = roots_jacobi(m, lam, n - 1)
    sig = (xs + 1) / 2
    wsig = ws / 2 ** (lam + n)
    simplex, wsimp = _simplex_rule(n, m)
    theta = 2 * np.pi * np.arange(quad.angular) / quad.angular
    ang = np.stack(np.meshgrid(*([theta] * n), indexing="ij"), axis=-1).reshape(-1, n)
    phases = np.exp(1j * ang)
    radii = np.sqrt(sig[:, None, None] * simplex[None, :, :]).reshape(-1, n)
    wrad = (wsig[:, None] * wsimp[None, :]).reshape(-1)
    nodes = (radii[:, None, :] * phases[None, :, :]).reshape(-1, n)
    wang = (2 * np.pi / quad.angular) ** n / 2**n
    weights = np.repeat(wrad, phases.shape[0]) * wang
    return nodes, weights


class DivergentPairingError(ValueError):
    pass


def petersson_pair(f: SuperFunction, h: SuperFunction, k: int, quad: Quadrature = Quadrature()) -> complex:
    """sum_I int_B conj(f_I) h_I Delta(z,z)^(k+|I|-(n+1)) dV, over the trivial group."""
    if (f.n, f.r) != (h.n, h.r):
        raise ValueError("functions on different super balls")
    n, r = f.n, f.r
    if f.degree is not None and h.degree is not None and f.degree != h.degree:
        return 0j
    deg = f.degree if f.degree is not None else h.degree
    degrees = [deg] if deg is not None else list(range(r + 1))
    for rho in degrees:
        lam = k + rho - (n + 1)
        if lam <= -1:
            raise DivergentPairingError(
                f"weight exponent k+|I|-(n+1) = {lam} <= -1 for |I| = {rho}: integral diverges"
            )
    total = 0j
    for rho in degrees:
        lam = k + rho - (n + 1)
        nodes, weights = ball_quadrature(n, quad, lam)
        bits = list(subsets_of_size(r, rho))
        acc = np.zeros(len(bits), dtype=complex)
        for z, w in zip(nodes, weights):
            fc = f(z).coeffs[bits]
            hc = h(z).coeffs[bits]
            acc += w * np.conj(fc) * hc
        total += complex(acc.sum())
    return total

"""The flow g -> g a_t on G, its stable/unstable/neutral splitting and orbit closing.

Tangent vectors are identified with Lie algebra elements by left translation.
Positive root spaces are contracted by the forward flow (T^-), negative root
spaces expanded (T^+), and a + m is neutral (T^0).  Distances are measured in
the logarithmic chart, which agrees with the left-invariant Riemannian distance
to second order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .domain import GroupElement, fractional_linear
from .structure import (
    LieAlgebraElement,
    a_t,
    basis_matrix,
    classify_element,
    inner,
    m_residual,
    root_split,
)

log = logging.getLogger(__name__)

CHART_RADIUS = 0.5
DEFAULT_T1 = 1.0
DEFAULT_DELTA = 0.1
# slack for comparing a bound ratio against 1 when both sides agree to rounding
RATIO_SLACK = 1e-9


class OutOfChartError(ValueError):
    """The two points are too far apart for the logarithmic chart."""


def flow(g: GroupElement, t: float) -> GroupElement:
    return g @ a_t(t, g.n, g.r)


def inner_product(xi: LieAlgebraElement, eta: LieAlgebraElement) -> float:
    """0.5 Re tr(xi* eta); the A-generator has norm 1 and the root spaces are orthogonal."""
    return inner(xi, eta)


def log_chart(g: GroupElement, h: GroupElement) -> LieAlgebraElement:
    """log(g^-1 h) as a Lie algebra element, or OutOfChartError."""
    q = g.inv() @ h
    with np.errstate(all="ignore"):
        X = sla.logm(q.gprime)
        Y = sla.logm(q.E) if q.r else np.zeros((0, 0))
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise OutOfChartError("matrix logarithm did not converge")
    xi = LieAlgebraElement(X, Y)
    if xi.norm() > CHART_RADIUS:
        raise OutOfChartError(f"points are {xi.norm():.3g} apart, chart radius is {CHART_RADIUS}")
    return xi


def local_distance(g: GroupElement, h: GroupElement) -> float:
    return log_chart(g, h).norm()


def expansion_ratio(g: GroupElement, nu: LieAlgebraElement, t: float) -> float:
    """d(g exp(nu) a_t, g a_t) / d(g exp(nu), g); about e^(-alpha t) for nu in g^alpha."""
    gn = g @ nu.exp()
    return local_distance(flow(gn, t), flow(g, t)) / local_distance(gn, g)


# ------------------------------------------------------------------- constants


@dataclass(frozen=True)
class HyperbolicConstants:
    T1: float
    C1: float
    eps1: float
    delta: float

    def to_json(self) -> dict:
        return {"T1": self.T1, "C1": self.C1, "eps1": self.eps1, "delta": self.delta}


def constants(T1: float = DEFAULT_T1, delta: float = DEFAULT_DELTA) -> HyperbolicConstants:
    if T1 <= 0 or delta <= 0:
        raise ValueError("T1 and delta must be positive")
    q = 1 - math.exp(-T1 / 2)
    C1 = max(math.exp(1.5 * T1) / q, math.exp(2 * T1))
    eps1 = min(delta * q / (math.exp(T1) + 1), T1 / C1)
    return HyperbolicConstants(T1, C1, eps1, delta)


# --------------------------------------------------------------------- closing


@dataclass(frozen=True, eq=False)
class ClosingResult:
    z: GroupElement
    t0: float
    w: GroupElement
    residual: float
    bound_ratios: dict
    epsilon: float
    consts: HyperbolicConstants
    converged: bool
    iterations: int
    degenerate: bool = False
    notes: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        if not self.converged or self.epsilon > self.consts.eps1:
            return False
        if any("withheld" in n for n in self.notes):
            return False
        return all(v <= 1 + RATIO_SLACK for v in self.bound_ratios.values())

    @property
    def status(self) -> str:
        if not self.converged:
            return "failed"
        return "certified" if self.certified else "uncertified"

    def to_json(self) -> dict:
        return {
            "z": self.z.to_json(),
            "t0": self.t0,
            "w": self.w.to_json(),
            "residual": self.residual,
            "epsilon": self.epsilon,
            "constants": self.consts.to_json(),
            "bound_ratios": dict(self.bound_ratios),
            "converged": self.converged,
            "iterations": self.iterations,
            "degenerate": self.degenerate,
            "certified": self.certified,
            "status": self.status,
            "notes": list(self.notes),
        }


def _ratio(achieved: float, allowed: float) -> float:
    if allowed > 0:
        return achieved / allowed
    return 0.0 if achieved <= 1e-14 else math.inf


def _closing_residual(gamma: GroupElement, z: GroupElement, t0: float, w: GroupElement) -> GroupElement:
    return z.inv() @ gamma @ z @ a_t(-t0, z.n, z.r) @ w.inv()


def _as_real(q: GroupElement) -> np.ndarray:
    d = q.gprime - np.eye(q.n + 1)
    e = q.E - np.eye(q.r)
    return np.concatenate([d.real.ravel(), d.imag.ravel(), e.real.ravel(), e.imag.ravel()])


def shadow_times(T: float) -> list[float]:
    return [0.0, T / 4, T / 2, 3 * T / 4, T]


def close_orbit(
    x: GroupElement,
    gamma: GroupElement,
    T: float,
    tol: float = 1e-12,
    T1: float = DEFAULT_T1,
    delta: float = DEFAULT_DELTA,
    max_iter: int = 100,
    fd_step: float = 1e-7,
) -> ClosingResult:
    """Find z near x, t0 near T and w in M near 1 with gamma z = z a_t0 w.

    Gauss-Newton in the coordinates (nu^-, nu^+, t0, mu) with z = x exp(nu^- + nu^+)
    and w = exp(mu), seeded at (0, 0, T, 0).  The bounds are evaluated afterwards.
    """
    n, r = x.n, x.r
    consts = constants(T1, delta)
    eps = local_distance(gamma @ x, flow(x, T))
    notes = []
    if eps > consts.eps1:
        notes.append(f"epsilon {eps:.3e} exceeds eps1 {consts.eps1:.3e}; certificate withheld")

    if gamma.distance_to(GroupElement.identity(n, r)) <= 1e-12 and T < T1:
        # trivial branch: only gamma = 1 closes up at times below T1, and then T <= eps
        ratios = {"Anosov-ii-T<=eps": _ratio(T, eps)}
        return ClosingResult(
            x, 0.0, GroupElement.identity(n, r), 0.0, ratios, eps, consts, True, 0, degenerate=True, notes=notes
        )
    if T < T1:
        notes.append(f"T = {T:g} is below T1 = {T1:g}; certificate withheld")

    B_trans = basis_matrix(n, r, [1, 2, -1, -2])
    B_m = basis_matrix(n, r, ["m"])
    k_trans, k_m = B_trans.shape[0], B_m.shape[0]

    def unpack(p):
        nu = LieAlgebraElement.from_vector(p[:k_trans] @ B_trans, n, r) if k_trans else LieAlgebraElement.zero(n, r)
        t0 = p[k_trans]
        mu = LieAlgebraElement.from_vector(p[k_trans + 1 :] @ B_m, n, r) if k_m else LieAlgebraElement.zero(n, r)
        return x @ nu.exp(), t0, mu.exp(), nu, mu

    def F(p):
        z, t0, w, _, _ = unpack(p)
        return _as_real(_closing_residual(gamma, z, t0, w))

    p = np.zeros(k_trans + 1 + k_m)
    p[k_trans] = T
    res = F(p)
    it = 0
    converged = np.linalg.norm(res) <= tol
    while not converged and it < max_iter:
        it += 1
        Jac = np.empty((res.shape[0], p.shape[0]))
        for i in range(p.shape[0]):
            e = np.zeros_like(p)
            e[i] = fd_step
            Jac[:, i] = (F(p + e) - F(p - e)) / (2 * fd_step)
        step = np.linalg.lstsq(Jac, -res, rcond=None)[0]
        p = p + step
        new = F(p)
        log.debug("closing iteration %d: residual %.3e, step %.3e", it, np.linalg.norm(new), np.linalg.norm(step))
        stalled = np.linalg.norm(step) <= 1e-15 * (1 + np.linalg.norm(p))
        res = new
        converged = np.linalg.norm(res) <= tol or (stalled and np.linalg.norm(res) <= 1e3 * tol)
        if stalled and not converged:
            break
    z, t0, w, nu, mu = unpack(p)
    residual = float(np.linalg.norm(_closing_residual(gamma, z, t0, w).block_matrix() - np.eye(n + 1 + r)))
    if not converged:
        notes.append(f"no convergence after {it} iterations (residual {residual:.3e})")

    C1e = consts.C1 * eps
    ratios = {"Anosov-i-t0w": _ratio(math.hypot(t0 - T, mu.norm()), C1e)}
    for tau in shadow_times(T):
        d = local_distance(flow(x, tau), flow(z, tau))
        ratios[f"Anosov-i-shadow-{tau:g}"] = _ratio(d, C1e * (math.exp(-tau) + math.exp(-(T - tau))))
    return ClosingResult(z, float(t0), w, residual, ratios, eps, consts, bool(converged), it, notes=notes)


# ------------------------------------------------------------------ axis oracle


@dataclass(frozen=True, eq=False)
class AxisOracle:
    """Exact axis of a regular loxodromic element from its eigenvectors."""

    g: GroupElement
    t0: float
    w0: GroupElement
    Xplus: np.ndarray
    Xminus: np.ndarray

    def coset_distance(self, z: GroupElement) -> float:
        """Distance of z from g A M, measured by where z sends the axis endpoints +-e1."""
        e1 = np.zeros(z.n, dtype=complex)
        e1[0] = 1
        return float(
            max(
                np.linalg.norm(fractional_linear(z.gprime, e1) - self.Xplus),
                np.linalg.norm(fractional_linear(z.gprime, -e1) - self.Xminus),
            )
        )


def axis_oracle(gamma: GroupElement) -> AxisOracle:
    cls = classify_element(gamma)
    if not cls.is_regular:
        raise ValueError(f"axis oracle needs a regular loxodromic element, got {cls.kind.value}")
    d = cls.data
    return AxisOracle(d.g, d.t0, d.w0, d.Xplus, d.Xminus)


def splitting_components(xi: LieAlgebraElement) -> dict:
    """{"T0", "T-", "T+"} components of a tangent vector."""
    c = root_split(xi)
    return {"T0": c.neutral(), "T-": c.contracting(), "T+": c.expanding()}


def w_in_M(w: GroupElement, tol: float = 1e-10) -> bool:
    return m_residual(w) <= tol

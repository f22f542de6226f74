"""Planted test data: loxodromic elements with known axes and the desk lattice.

The desk lattice is the image in G (n = 1) of a subgroup of SU(1,1) generated
by Cayley conjugates of two hyperbolic integer matrices.  Its discreteness is
assumed from the arithmetic origin, not proven here.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .domain import GroupElement, SuperFunction, mobius, vector_to_json
from .dynamics import flow, local_distance
from .structure import LieAlgebraElement, a_t, basis_matrix, m_element, random_group_element, rho_embed
from .superalg import Multivector, SubsetIndex

DESK_MATRICES = (
    np.array([[2, 1], [1, 1]], dtype=complex),
    np.array([[1, 1], [1, 2]], dtype=complex),
)
_W = np.array([[1, -1j], [1, 1j]], dtype=complex)


def su11_from_sl2r(M: np.ndarray) -> np.ndarray:
    """W M W^-1, the Cayley conjugate of an SL(2,R) matrix into SU(1,1)."""
    return _W @ M @ np.linalg.inv(_W)


def desk_generators(r: int = 0, phases: Optional[tuple[float, ...]] = None) -> list[GroupElement]:
    """Generators of the desk lattice for n = 1.

    With r = 1 and phases theta_i the i-th generator is (e^(i theta) g', e^(2 i theta)),
    which keeps det g' = det E.
    """
    if r not in (0, 1):
        raise ValueError("the desk lattice is provided for r in {0, 1}")
    gens = []
    for i, M in enumerate(DESK_MATRICES):
        g = rho_embed(su11_from_sl2r(M), 1, r)
        if r == 1:
            theta = 0.0 if phases is None else phases[i]
            g = GroupElement(np.exp(1j * theta) * g.gprime, np.array([[np.exp(2j * theta)]]))
        gens.append(g)
    return gens


def random_m_element(n: int, r: int, rng: np.random.Generator, scale: float = 1.0) -> GroupElement:
    """diag(eps, u, eps | E) with random diagonal phases and eps^2 det u = det E."""
    u = np.diag(np.exp(1j * scale * rng.normal(size=n - 1))) if n > 1 else np.zeros((0, 0))
    E = sla.expm(_random_skew(r, rng) * scale) if r else np.zeros((0, 0))
    du = np.linalg.det(u) if n > 1 else 1.0
    dE = np.linalg.det(E) if r else 1.0
    eps = np.sqrt(complex(dE / du))
    return m_element(eps, u, E)


def _random_skew(r: int, rng) -> np.ndarray:
    A = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
    return 0.5 * (A - A.conj().T)


def small_m_element(n: int, r: int, rng: np.random.Generator, size: float) -> GroupElement:
    """exp(mu) for a random mu in m with |mu| = size."""
    B = basis_matrix(n, r, ["m"])
    if B.shape[0] == 0:
        return GroupElement.identity(n, r)
    c = rng.normal(size=B.shape[0])
    c *= size / np.linalg.norm(c)
    return LieAlgebraElement.from_vector(c @ B, n, r).exp()


@dataclass(frozen=True, eq=False)
class PlantedClosing:
    gamma: GroupElement
    x: GroupElement
    T: float
    h: GroupElement
    w0: GroupElement
    epsilon: float

    def to_json(self, tol: float = 1e-12) -> dict:
        return {"gamma": self.gamma.to_json(), "x": self.x.to_json(), "T": self.T, "tol": tol}


def planted_closing_case(
    n: int,
    r: int,
    T: float,
    rng: np.random.Generator,
    perturbation: float = 1e-4,
    conj_scale: float = 0.5,
) -> PlantedClosing:
    """gamma = h a_T w0 h^-1 and x = h exp(nu) with |nu| <= perturbation and epsilon <= perturbation.

    The flow amplifies the expanding part of nu by up to e^(2T), so nu is shrunk
    until d(gamma x, x a_T) is itself at most ``perturbation``.
    """
    h = random_group_element(n, r, rng, conj_scale)
    w0 = small_m_element(n, r, rng, 0.3 * perturbation)
    gamma = h @ a_t(T, n, r) @ w0 @ h.inv()
    B = basis_matrix(n, r, [1, 2, -1, -2, "a", "m"])
    c = rng.normal(size=B.shape[0])
    c *= perturbation / np.linalg.norm(c)
    nu = LieAlgebraElement.from_vector(c @ B, n, r)
    for _ in range(5):
        x = h @ nu.exp()
        eps = local_distance(gamma @ x, flow(x, T))
        if eps <= perturbation:
            break
        nu = (0.9 * perturbation / eps) * nu
    return PlantedClosing(gamma, x, T, h, w0, eps)


def planted_loxodromic(
    n: int, r: int, t0: float, rng: np.random.Generator, conj_scale: float = 0.5
) -> tuple[GroupElement, GroupElement, GroupElement]:
    """(gamma, h, w0) with gamma = h a_t0 w0 h^-1 and a random w0 in M."""
    h = random_group_element(n, r, rng, conj_scale)
    w0 = random_m_element(n, r, rng)
    return h @ a_t(t0, n, r) @ w0 @ h.inv(), h, w0


def random_polynomial_superfunction(n: int, r: int, rng: np.random.Generator, degree: int = 2) -> SuperFunction:
    """sum_I p_I(z) zeta^I with random complex polynomials p_I of total degree <= degree."""
    exps = [e for e in itertools.product(range(degree + 1), repeat=n) if sum(e) <= degree]
    C = (rng.normal(size=(1 << r, len(exps))) + 1j * rng.normal(size=(1 << r, len(exps)))) / len(exps)
    E = np.array(exps)

    def fn(z):
        mono = np.prod(np.asarray(z, dtype=complex)[None, :] ** E, axis=1)
        return Multivector(r, C @ mono)

    return SuperFunction(fn, n, r, label="random polynomial")


def random_ball_point(n: int, rng: np.random.Generator, max_radius: float = 0.9) -> np.ndarray:
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return z * (max_radius * rng.uniform() ** (1 / (2 * n)) / np.linalg.norm(z))


# ----------------------------------------------------------------- data files

DATA_FILES = ("planted_loxodromic.json", "closing_experiments.json", "desk_lattice.json", "kernel.json")


def load_data(name: str) -> dict:
    """Read one of the shipped JSON data files."""
    return json.loads(resources.files("supcusp").joinpath("data", name).read_text())


def build_data_files(seed: int = 7) -> dict:
    """Deterministically regenerate the contents of the shipped data files."""
    # imported here: series depends on structure, which this module also feeds
    from .series import PoincareKernel, frequency_lattice
    from .structure import classify_element

    rng = np.random.default_rng(seed)
    elements = []
    for n, r, t0 in ((1, 0, 0.7), (1, 1, 1.3), (2, 0, 0.7), (2, 1, 2.0), (2, 2, 1.1)):
        gamma, h, _ = planted_loxodromic(n, r, t0, rng)
        e1 = np.zeros(n, dtype=complex)
        e1[0] = 1
        elements.append(
            {
                "gamma": gamma.to_json(),
                "expected": {
                    "t0": t0,
                    "Xplus": vector_to_json(mobius(h, e1)),
                    "Xminus": vector_to_json(mobius(h, -e1)),
                },
            }
        )
    experiments = []
    for n, r, T in ((1, 0, 1.5), (1, 1, 2.0), (2, 0, 2.5), (2, 1, 1.2)):
        experiments.append(planted_closing_case(n, r, T, rng).to_json())
    # a deliberately coarse perturbation: epsilon exceeds eps1, so no certificate
    experiments.append(planted_closing_case(1, 0, 1.2, rng, perturbation=0.02).to_json())

    gens = desk_generators(0)
    lox = classify_element(gens[0]).data
    I = SubsetIndex.empty(0)
    ms = frequency_lattice(lox, I, 8, 2.0)
    desk = {
        "generators": [g.to_json() for g in gens],
        "kernel": PoincareKernel(lox, I, float(ms[np.argmin(np.abs(ms))]), 8).to_json(),
        "L": 5,
        "points": [vector_to_json(np.array([0.1 + 0.2j])), vector_to_json(np.array([-0.3 + 0.05j]))],
    }

    gamma, _, _ = planted_loxodromic(1, 1, 0.9, rng)
    lox = classify_element(gamma).data
    I = SubsetIndex.of([1], 1)
    ms = frequency_lattice(lox, I, 8, 3.0)
    kernel = PoincareKernel(lox, I, float(ms[np.argmin(np.abs(ms - 1.0))]), 8).to_json()
    kernel["C"] = 3.0
    kernel["points"] = [vector_to_json(random_ball_point(1, rng, 0.8)) for _ in range(6)]
    return {
        "planted_loxodromic.json": {"elements": elements},
        "closing_experiments.json": {"experiments": experiments},
        "desk_lattice.json": desk,
        "kernel.json": kernel,
    }


def write_data_files(directory, seed: int = 7) -> None:
    for name, content in build_data_files(seed).items():
        with open(f"{directory}/{name}", "w") as fh:
            json.dump(content, fh, indent=1)
            fh.write("\n")

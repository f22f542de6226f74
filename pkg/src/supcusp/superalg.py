"""Coefficient arithmetic in the exterior algebra of C^r.

Basis monomials zeta^I are indexed by subsets I of {1..r}, stored as
bitmasks (bit i-1 set <=> i in I).  A :class:`Multivector` keeps the full
dense coefficient vector of length 2**r, so r is capped at 16.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

MAX_R = 16


def _check_r(r: int) -> None:
    if not 0 <= r <= MAX_R:
        raise ValueError(f"r must lie in [0, {MAX_R}], got {r}")


@dataclass(frozen=True)
class SubsetIndex:
    """A subset I of {1..r} as a bitmask."""

    bits: int
    r: int

    def __post_init__(self):
        _check_r(self.r)
        if not 0 <= self.bits < (1 << self.r):
            raise ValueError(f"bits {self.bits} out of range for r={self.r}")

    @classmethod
    def of(cls, elements: Iterable[int], r: int) -> "SubsetIndex":
        bits = 0
        for i in elements:
            if not 1 <= i <= r:
                raise ValueError(f"index {i} not in 1..{r}")
            bits |= 1 << (i - 1)
        return cls(bits, r)

    @classmethod
    def empty(cls, r: int) -> "SubsetIndex":
        return cls(0, r)

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    def elements(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.r) if self.bits >> i & 1)

    def __len__(self) -> int:
        return self.size

    def __or__(self, other: "SubsetIndex") -> "SubsetIndex":
        _same_r(self, other)
        return SubsetIndex(self.bits | other.bits, self.r)

    def isdisjoint(self, other: "SubsetIndex") -> bool:
        _same_r(self, other)
        return not self.bits & other.bits

    def __repr__(self) -> str:
        return f"SubsetIndex({set(self.elements()) or '{}'}, r={self.r})"


def _same_r(a: SubsetIndex, b: SubsetIndex) -> None:
    if a.r != b.r:
        raise ValueError(f"subset indices for different r ({a.r} vs {b.r})")


def _bits_of(I, r: int) -> int:
    if isinstance(I, SubsetIndex):
        if I.r != r:
            raise ValueError(f"subset index for r={I.r} used with r={r}")
        return I.bits
    if isinstance(I, (int, np.integer)):
        if not 0 <= I < (1 << r):
            raise ValueError(f"bits {I} out of range for r={r}")
        return int(I)
    return SubsetIndex.of(I, r).bits


def wedge_sign(I: SubsetIndex, J: SubsetIndex) -> int:
    """Sign of zeta^I wedge zeta^J relative to zeta^(I u J); 0 on overlap."""
    _same_r(I, J)
    if I.bits & J.bits:
        return 0
    # count pairs (i in I, j in J) with i > j
    inversions = 0
    for j in J.elements():
        inversions += (I.bits >> j).bit_count()
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def subsets_of_size(r: int, size: int) -> tuple[int, ...]:
    """Bitmasks of all size-element subsets of {1..r}, in lexicographic order."""
    out = []
    for combo in itertools.combinations(range(r), size):
        out.append(sum(1 << i for i in combo))
    return tuple(out)


def _positions(bits: int, r: int) -> list[int]:
    return [i for i in range(r) if bits >> i & 1]


class Multivector:
    """Element of the exterior algebra Lambda(C^r), sum of c_I zeta^I."""

    __slots__ = ("r", "_c")

    def __init__(self, r: int, coeffs=None):
        _check_r(r)
        if coeffs is None:
            c = np.zeros(1 << r, dtype=complex)
        elif isinstance(coeffs, Mapping):
            c = np.zeros(1 << r, dtype=complex)
            for key, val in coeffs.items():
                c[_bits_of(key, r)] = val
        else:
            c = np.array(coeffs, dtype=complex)
            if c.shape != (1 << r,):
                raise ValueError(f"expected {1 << r} coefficients, got shape {c.shape}")
        c.flags.writeable = False
        self.r = r
        self._c = c

    @classmethod
    def zero(cls, r: int) -> "Multivector":
        return cls(r)

    @classmethod
    def basis(cls, I, r: int, value: complex = 1.0) -> "Multivector":
        c = np.zeros(1 << r, dtype=complex)
        c[_bits_of(I, r)] = value
        return cls(r, c)

    @classmethod
    def scalar(cls, value: complex, r: int = 0) -> "Multivector":
        return cls.basis(0, r, value)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    def __getitem__(self, I) -> complex:
        return complex(self._c[_bits_of(I, self.r)])

    def support(self, atol: float = 0.0) -> list[SubsetIndex]:
        idx = np.nonzero(np.abs(self._c) > atol)[0]
        return [SubsetIndex(int(b), self.r) for b in idx]

    def degrees(self, atol: float = 0.0) -> set[int]:
        return {I.size for I in self.support(atol)}

    def degree_part(self, rho: int) -> "Multivector":
        c = np.zeros_like(self._c)
        for b in subsets_of_size(self.r, rho):
            c[b] = self._c[b]
        return Multivector(self.r, c)

    def norm(self) -> float:
        return mv_norm(self)

    def _other(self, other) -> np.ndarray:
        if not isinstance(other, Multivector):
            return NotImplemented
        if other.r != self.r:
            raise ValueError(f"multivectors for different r ({self.r} vs {other.r})")
        return other._c

    def __add__(self, other):
        c = self._other(other)
        if c is NotImplemented:
            return c
        return Multivector(self.r, self._c + c)

    def __sub__(self, other):
        c = self._other(other)
        if c is NotImplemented:
            return c
        return Multivector(self.r, self._c - c)

    def __neg__(self):
        return Multivector(self.r, -self._c)

    def __mul__(self, scalar):
        if isinstance(scalar, Multivector):
            return NotImplemented
        return Multivector(self.r, self._c * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Multivector(self.r, self._c / complex(scalar))

    def allclose(self, other: "Multivector", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        return np.allclose(self._c, self._other(other), atol=atol, rtol=rtol)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.r == other.r and np.array_equal(self._c, other._c)

    __hash__ = None

    def __repr__(self) -> str:
        terms = [f"{self._c[I.bits]:.6g}*z{list(I.elements())}" for I in self.support()]
        return f"Multivector(r={self.r}: {' + '.join(terms) or '0'})"

    def to_json(self) -> dict:
        coeff = {}
        for I in self.support():
            v = self._c[I.bits]
            coeff[json.dumps(list(I.elements()))] = [v.real, v.imag]
        return {"r": self.r, "coeff": coeff}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Multivector":
        r = int(obj["r"])
        c = np.zeros(1 << r, dtype=complex)
        for key, (re, im) in obj.get("coeff", {}).items():
            c[SubsetIndex.of(json.loads(key), r).bits] = complex(re, im)
        return cls(r, c)


def mv_norm(a: Multivector) -> float:
    """Norm from the canonical scalar product: sqrt(sum |c_I|^2)."""
    return float(np.linalg.norm(a.coeffs))


def _warn_if_not_unitary(E: np.ndarray, tol: float = 1e-10) -> None:
    if E.size and np.linalg.norm(E.conj().T @ E - np.eye(E.shape[0])) > tol:
        warnings.warn("matrix is not unitary to 1e-10", RuntimeWarning, stacklevel=3)


def _minors_row(E: np.ndarray, bits: int, r: int) -> tuple[tuple[int, ...], np.ndarray]:
    rows = _positions(bits, r)
    cols_list = subsets_of_size(r, len(rows))
    if not rows:
        return cols_list, np.ones(1, dtype=complex)
    subs = np.stack([E[np.ix_(rows, _positions(cb, r))] for cb in cols_list])
    return cols_list, np.linalg.det(subs)


def minor_action(E, I) -> Multivector:
    """Expand (E zeta)^I = sum_J det(E[I, J]) zeta^J, with (E zeta)_i = sum_j E_ij zeta_j.

    Rows of the minor are the members of I, columns range over J with |J| = |I|.
    """
    E = np.asarray(E, dtype=complex)
    r = E.shape[0]
    if E.shape != (r, r):
        raise ValueError("E must be square")
    _warn_if_not_unitary(E)
    bits = _bits_of(I, r)
    cols, minors = _minors_row(E, bits, r)
    c = np.zeros(1 << r, dtype=complex)
    c[list(cols)] = minors
    return Multivector(r, c)


def exterior_power_matrix(E) -> np.ndarray:
    """Matrix P with P[I, J] = det(E[I, J]) on equal-size subsets, zero elsewhere.

    Substituting zeta -> E zeta in a Multivector a yields coefficients a.coeffs @ P.
    """
    E = np.asarray(E, dtype=complex)
    r = E.shape[0]
    P = np.zeros((1 << r, 1 << r), dtype=complex)
    for size in range(r + 1):
        for bits in subsets_of_size(r, size):
            cols, minors = _minors_row(E, bits, r)
            P[bits, list(cols)] = minors
    return P


def odd_substitute(a: Multivector, E, factor: complex = 1.0) -> Multivector:
    """Substitute zeta -> factor * E zeta in a."""
    E = np.asarray(E, dtype=complex)
    if E.shape != (a.r, a.r):
        raise ValueError(f"E has shape {E.shape}, multivector has r={a.r}")
    scale = np.array([factor ** b.bit_count() for b in range(1 << a.r)], dtype=complex)
    c = a.coeffs * scale
    if a.r == 0:
        return Multivector(0, c)
    return Multivector(a.r, c @ exterior_power_matrix(E))


@dataclass(frozen=True)
class DiagonalPhase:
    """Diagonal logarithm D of E0 = exp(2 pi i D) together with chi, j(w0) = exp(2 pi i chi).

    Entries are canonical representatives in [0, 1).
    """

    d: tuple[float, ...]
    chi: float

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(_canonical(x) for x in self.d))
        object.__setattr__(self, "chi", _canonical(self.chi))

    @property
    def r(self) -> int:
        return len(self.d)

    @classmethod
    def from_phases(cls, E0_diag, j_w0: complex) -> "DiagonalPhase":
        d = [math.atan2(z.imag, z.real) / (2 * math.pi) for z in np.asarray(E0_diag, dtype=complex)]
        chi = math.atan2(complex(j_w0).imag, complex(j_w0).real) / (2 * math.pi)
        return cls(tuple(d), chi)

    def E0(self) -> np.ndarray:
        return np.diag(np.exp(2j * np.pi * np.array(self.d, dtype=float)))

    def to_json(self) -> dict:
        return {"D": list(self.d), "chi": self.chi}


def _canonical(x: float) -> float:
    y = float(x) % 1.0
    # values within rounding of 1 fold back to 0
    return 0.0 if y >= 1.0 - 1e-15 else y


def tr_I(D: DiagonalPhase, I) -> float:
    """Sum of d_j over j in I."""
    bits = _bits_of(I, D.r)
    return math.fsum(D.d[i] for i in _positions(bits, D.r))

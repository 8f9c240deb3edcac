"""Finite-dimensional classical phase space.

Real picture: Darboux coordinates (q, p) in R^{2n}, laid out as the
concatenation (q_1..q_n, p_1..p_n).  Complex picture: z = (q + i p)/sqrt(2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT2 = np.sqrt(2.0)


def _readonly(a, dtype):
    a = np.array(a, dtype=dtype, copy=True).reshape(-1)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PhasePoint:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = _readonly(self.q, float)
        p = _readonly(self.p, float)
        if q.shape != p.shape:
            raise ValueError(f"q and p lengths differ: {q.size} vs {p.size}")
        if q.size == 0:
            raise ValueError("phase point needs at least one mode")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("phase point entries must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.size

    def as_vector(self) -> np.ndarray:
        """Real 2n-vector in (q, p) layout."""
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, v) -> "PhasePoint":
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.size % 2:
            raise ValueError("real phase-space vector must have even length")
        n = v.size // 2
        return cls(v[:n], v[n:])

    def norm_squared(self) -> float:
        return 0.5 * float(np.dot(self.q, self.q) + np.dot(self.p, self.p))


@dataclass(frozen=True, eq=False)
class ComplexPoint:
    z: np.ndarray

    def __post_init__(self):
        z = _readonly(self.z, complex)
        if z.size == 0:
            raise ValueError("complex point needs at least one mode")
        if not np.all(np.isfinite(z)):
            raise ValueError("complex point entries must be finite")
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.z.size


def complexify(pt: PhasePoint) -> ComplexPoint:
    return ComplexPoint((pt.q + 1j * pt.p) / SQRT2)


def decomplexify(cp: ComplexPoint) -> PhasePoint:
    return PhasePoint(SQRT2 * cp.z.real, SQRT2 * cp.z.imag)


def pairings(u: PhasePoint, v: PhasePoint) -> tuple[float, float, complex]:
    """Return (euclidean, symplectic, hermitian) pairings of two points.

    euclid = 1/2 sum(q_u q_v + p_u p_v)
    sympl  = sum(q_u p_v - q_v p_u)
    herm   = sum(conj(z_u) z_v)

    These satisfy Re(herm) == euclid and 2 Im(herm) == sympl.
    """
    if u.n != v.n:
        raise ValueError(f"dimension mismatch: {u.n} vs {v.n}")
    euclid = 0.5 * float(np.dot(u.q, v.q) + np.dot(u.p, v.p))
    sympl = float(np.dot(u.q, v.p) - np.dot(v.q, u.p))
    herm = complex(np.vdot(complexify(u).z, complexify(v).z))
    return euclid, sympl, herm

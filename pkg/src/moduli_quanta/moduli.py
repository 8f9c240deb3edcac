"""Complex structures on R^{2n} and the coset O(2n)/U(n).

All real 2n x 2n matrices act on vectors in (q, p) layout.  The reference
structure J0 is multiplication by i in the coordinates z = (q + i p)/sqrt(2),
which sends (q, p) to (-p, q).

A real-linear map O acts in complex coordinates as

    w = R z + S conj(z)

and is holomorphic exactly when S = 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalValidationError

INVARIANT_TOL = 1e-12
DEFAULT_TOL = 1e-10


def _max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def _square(a, name):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")


def _even_square(a, name):
    _square(a, name)
    if a.shape[0] % 2:
        raise ValueError(f"{name} must be 2n x 2n, got {a.shape}")


@dataclass(frozen=True, eq=False)
class ComplexStructure:
    J: np.ndarray
    tol: float = INVARIANT_TOL

    def __post_init__(self):
        J = _frozen(self.J, float)
        _even_square(J, "J")
        eye = np.eye(J.shape[0])
        res = max(_max_abs(J @ J + eye), _max_abs(J.T @ J - eye))
        if res > self.tol:
            raise NumericalValidationError(
                f"not an orthogonal complex structure (residual {res:.3e})", res)
        object.__setattr__(self, "J", J)

    @property
    def n(self) -> int:
        return self.J.shape[0] // 2


@dataclass(frozen=True, eq=False)
class OrthogonalMap:
    O: np.ndarray
    tol: float = INVARIANT_TOL

    def __post_init__(self):
        O = _frozen(self.O, float)
        _even_square(O, "O")
        res = _max_abs(O.T @ O - np.eye(O.shape[0]))
        if res > self.tol:
            raise NumericalValidationError(f"matrix is not orthogonal (residual {res:.3e})", res)
        object.__setattr__(self, "O", O)

    @property
    def n(self) -> int:
        return self.O.shape[0] // 2

    def __matmul__(self, other: "OrthogonalMap") -> "OrthogonalMap":
        # products of tolerance-valid maps accumulate round-off; loosen accordingly
        return OrthogonalMap(self.O @ other.O, tol=max(self.tol, other.tol) * 10)


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    U: np.ndarray
    tol: float = INVARIANT_TOL

    def __post_init__(self):
        U = _frozen(self.U, complex)
        _square(U, "U")
        res = _max_abs(U.conj().T @ U - np.eye(U.shape[0]))
        if res > self.tol:
            raise NumericalValidationError(f"matrix is not unitary (residual {res:.3e})", res)
        object.__setattr__(self, "U", U)

    @property
    def n(self) -> int:
        return self.U.shape[0]


@dataclass(frozen=True, eq=False)
class RSBlocks:
    """Complex blocks of a real-linear map, w = R z + S conj(z).

    ``kind`` selects which quadratic conditions the pair is meant to obey:
    "orthogonal" (RR^+ + SS^+ = I, RS^T + SR^T = 0) or "symplectic"
    (RR^+ - SS^+ = I, RS^T - SR^T = 0).  The conditions are checked at
    construction unless ``check=False``.
    """

    R: np.ndarray
    S: np.ndarray
    kind: str = "orthogonal"
    check: bool = True
    tol: float = INVARIANT_TOL

    def __post_init__(self):
        if self.kind not in ("orthogonal", "symplectic"):
            raise ValueError(f"unknown kind {self.kind!r}")
        R = _frozen(self.R, complex)
        S = _frozen(self.S, complex)
        _square(R, "R")
        if R.shape != S.shape:
            raise ValueError(f"R and S shapes differ: {R.shape} vs {S.shape}")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "S", S)
        if self.check:
            res = derived_residual(R, S, self.kind)
            if res > self.tol:
                raise NumericalValidationError(
                    f"(R, S) violate the {self.kind} conditions (residual {res:.3e})", res)

    @property
    def n(self) -> int:
        return self.R.shape[0]


def reference_structure(n: int) -> ComplexStructure:
    """J0: (q, p) -> (-p, q)."""
    if n < 1:
        raise ValueError("n must be positive")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return ComplexStructure(np.block([[zero, -eye], [eye, zero]]))


def embed_unitary(U: UnitaryMatrix) -> OrthogonalMap:
    """A + iB  ->  [[A, B], [-B, A]].

    In complex coordinates the image acts as z -> conj(U) z, so
    ``extract_rs(embed_unitary(U))`` returns R = conj(U), S = 0.
    """
    A, B = U.U.real, U.U.imag
    return OrthogonalMap(np.block([[A, B], [-B, A]]))


def pushforward(O: OrthogonalMap, J: ComplexStructure) -> ComplexStructure:
    if O.n != J.n:
        raise ValueError(f"dimension mismatch: {O.n} vs {J.n}")
    Jp = O.O @ J.J @ O.O.T
    return ComplexStructure(Jp, tol=max(J.tol, O.tol) * 10)


def extract_rs(O: OrthogonalMap) -> RSBlocks:
    """Complex blocks of a real map in (q, p) layout.

    With O = [[a, b], [c, d]]:
        R = ((a + d) + i (c - b)) / 2
        S = ((a - d) + i (c + b)) / 2
    """
    return rs_from_real(O.O, kind="orthogonal", check=False)


def rs_from_real(M, kind: str = "orthogonal", check: bool = True) -> RSBlocks:
    M = np.asarray(M, dtype=float)
    _even_square(M, "M")
    n = M.shape[0] // 2
    a, b = M[:n, :n], M[:n, n:]
    c, d = M[n:, :n], M[n:, n:]
    R = 0.5 * ((a + d) + 1j * (c - b))
    S = 0.5 * ((a - d) + 1j * (c + b))
    return RSBlocks(R, S, kind=kind, check=check)


def rs_to_real(rs: RSBlocks) -> np.ndarray:
    """Inverse of :func:`rs_from_real`."""
    R, S = rs.R, rs.S
    a = (R + S).real
    d = (R - S).real
    c = (R + S).imag
    b = (S - R).imag
    return np.block([[a, b], [c, d]])


def derived_residual(R, S, kind: str = "orthogonal") -> float:
    sign = 1.0 if kind == "orthogonal" else -1.0
    n = R.shape[0]
    first = R @ R.conj().T + sign * (S @ S.conj().T) - np.eye(n)
    second = R @ S.T + sign * (S @ R.T)
    return max(_max_abs(first), _max_abs(second))


def literal_residual(R, S) -> float:
    """Residual of the coefficient conditions as they are usually printed,

        sum_j R[j,m] conj(R[j,n]) + S[j,n] conj(S[j,m]) = delta_mn
        sum_j R[j,m] conj(S[j,n]) = 0 = sum_j S[j,m] conj(R[j,n])

    The second line is stronger than real orthogonality requires.
    """
    n = R.shape[0]
    first = R.T @ R.conj() + S.conj().T @ S - np.eye(n)
    second = R.T @ S.conj()
    third = S.T @ R.conj()
    return max(_max_abs(first), _max_abs(second), _max_abs(third))


def rs_residuals(rs: RSBlocks) -> tuple[float, float]:
    """Return (derived_res, literal_res); the two are never combined."""
    return derived_residual(rs.R, rs.S, rs.kind), literal_residual(rs.R, rs.S)


def commutes_with_reference(O: OrthogonalMap, tol: float = DEFAULT_TOL) -> bool:
    J0 = reference_structure(O.n).J
    return _max_abs(O.O @ J0 - J0 @ O.O) <= tol


def is_holomorphic(O: OrthogonalMap, tol: float = DEFAULT_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _max_abs(extract_rs(O).S) <= tol


def structure_to_map(J: ComplexStructure) -> OrthogonalMap:
    """An orthogonal O with O J0 O^T = J.

    Columns are an orthonormal basis (u_1..u_n, J u_1..J u_n) built greedily
    from the standard basis; the span of the chosen vectors is J-invariant,
    so Gram-Schmidt against it keeps each new pair orthonormal.
    """
    n = J.n
    dim = 2 * n
    cols_u, cols_ju = [], []
    basis = np.zeros((dim, 0))
    for k in range(dim):
        if len(cols_u) == n:
            break
        v = np.zeros(dim)
        v[k] = 1.0
        for _ in range(2):
            v = v - basis @ (basis.T @ v)
        norm = np.linalg.norm(v)
        if norm < 1e-8:
            continue
        u = v / norm
        ju = J.J @ u
        cols_u.append(u)
        cols_ju.append(ju)
        basis = np.column_stack([basis, u, ju])
    if len(cols_u) != n:
        raise NumericalValidationError("could not build a J-adapted basis")
    O = np.column_stack(cols_u + cols_ju)
    return OrthogonalMap(O, tol=max(J.tol, INVARIANT_TOL) * 100)


def structures_equal(J1: ComplexStructure, J2: ComplexStructure, tol: float = DEFAULT_TOL) -> bool:
    if J1.n != J2.n:
        raise ValueError(f"dimension mismatch: {J1.n} vs {J2.n}")
    return _max_abs(J1.J - J2.J) <= tol


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _haar_qr(g):
    # sign-fixed QR: make diag(R) positive so the distribution is Haar
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_orthogonal(n: int, seed) -> OrthogonalMap:
    """Haar-distributed element of O(2n)."""
    if n < 1:
        raise ValueError("n must be positive")
    g = _rng(seed).standard_normal((2 * n, 2 * n))
    return OrthogonalMap(_haar_qr(g))


def random_unitary(n: int, seed) -> UnitaryMatrix:
    """Haar-distributed element of U(n)."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = _rng(seed)
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    return UnitaryMatrix(_haar_qr(g))


def random_symplectic_rs(n: int, seed, max_squeeze: float = 0.5) -> RSBlocks:
    """Random bosonic Bogoliubov blocks from the polar form

        R = U cosh(r) W^+,  S = U sinh(r) W^T

    with U, W Haar unitaries and squeezing parameters r uniform in
    [0, max_squeeze].
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = _rng(seed)
    U = random_unitary(n, rng).U
    W = random_unitary(n, rng).U
    r = rng.uniform(0.0, max_squeeze, size=n)
    R = (U * np.cosh(r)) @ W.conj().T
    S = (U * np.sinh(r)) @ W.T
    return RSBlocks(R, S, kind="symplectic")


def pair_rotation_rs(theta: float) -> RSBlocks:
    """Two-mode orthogonal-type block R = cos(theta) I, S = sin(theta) [[0, 1], [-1, 0]]."""
    c, s = np.cos(theta), np.sin(theta)
    return RSBlocks(c * np.eye(2), s * np.array([[0.0, 1.0], [-1.0, 0.0]]), kind="orthogonal")


def single_mode_squeeze_rs(r: float) -> RSBlocks:
    return RSBlocks([[np.cosh(r)]], [[np.sinh(r)]], kind="symplectic")

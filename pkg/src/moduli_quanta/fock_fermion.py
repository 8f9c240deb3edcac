"""Exact fermionic Fock space of n modes (dimension 2^n).

Single-mode basis (|0>, |1>) with c = [[0, 1], [0, 0]]; mode 1 is the most
significant tensor factor and carries no sign string.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy import sparse

from .errors import ResourceBudgetError
from .moduli import RSBlocks

DEFAULT_MAX_MODES = 12

_LOWER = sparse.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
_SIGN = sparse.csr_matrix(np.diag([1.0, -1.0]))
_EYE = sparse.identity(2, format="csr")


@dataclass(frozen=True, eq=False)
class FermionFock:
    n: int
    max_modes: int = DEFAULT_MAX_MODES

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.n > self.max_modes:
            raise ResourceBudgetError(2 ** self.n, 2 ** self.max_modes)

    @property
    def dim(self) -> int:
        return 2 ** self.n

    @cached_property
    def annihilators(self) -> tuple[sparse.csr_matrix, ...]:
        ops = []
        for j in range(self.n):
            op = sparse.identity(1, format="csr")
            for l in range(self.n):
                factor = _SIGN if l < j else (_LOWER if l == j else _EYE)
                op = sparse.kron(op, factor, format="csr")
            ops.append(op)
        return tuple(ops)

    @cached_property
    def creators(self) -> tuple[sparse.csr_matrix, ...]:
        return tuple(c.T.tocsr() for c in self.annihilators)

    @cached_property
    def occupations(self) -> np.ndarray:
        idx = np.arange(self.dim)
        shifts = np.arange(self.n - 1, -1, -1)
        return (idx[:, None] >> shifts[None, :]) & 1

    @cached_property
    def number_operator(self) -> sparse.csr_matrix:
        return sparse.diags(self.occupations.sum(axis=1).astype(float), format="csr")

    def vacuum(self) -> "FermionState":
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return FermionState(self, v)


def build_fermion_fock(n: int, max_modes: int = DEFAULT_MAX_MODES) -> FermionFock:
    return FermionFock(n, max_modes)


@dataclass(frozen=True, eq=False)
class FermionState:
    fock: FermionFock
    vector: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.vector, dtype=complex, copy=True).reshape(-1)
        if v.size != self.fock.dim:
            raise ValueError(f"vector length {v.size} != dim {self.fock.dim}")
        if not np.all(np.isfinite(v)):
            raise ValueError("state has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def expectation(self, op) -> complex:
        return complex(np.vdot(self.vector, op @ self.vector))

    def parity_weights(self) -> tuple[float, float]:
        """Probability weight in the (even, odd) total-number sectors."""
        odd = self.fock.occupations.sum(axis=1) % 2 == 1
        w = np.abs(self.vector) ** 2 / self.norm ** 2
        return float(w[~odd].sum()), float(w[odd].sum())


def anticommutator(A, B):
    return A @ B + B @ A


def car_residual(ops) -> float:
    """max |{B_j, B_l^+} - delta_jl| and |{B_j, B_l}| over all pairs."""
    worst = 0.0
    n = len(ops)
    for j in range(n):
        for l in range(n):
            ab = anticommutator(ops[j], ops[l].conj().T).toarray()
            if j == l:
                ab -= np.eye(ab.shape[0])
            aa = anticommutator(ops[j], ops[l]).toarray()
            worst = max(worst, float(np.max(np.abs(ab))), float(np.max(np.abs(aa))))
    return worst


def bogoliubov_operators(fock: FermionFock, rs: RSBlocks) -> list[sparse.csr_matrix]:
    """B_j = sum_m R[j, m] c_m + S[j, m] c_m^+."""
    c, cd = fock.annihilators, fock.creators
    ops = []
    for j in range(fock.n):
        B = sparse.csr_matrix((fock.dim, fock.dim), dtype=complex)
        for m in range(fock.n):
            if rs.R[j, m] != 0:
                B = B + rs.R[j, m] * c[m]
            if rs.S[j, m] != 0:
                B = B + rs.S[j, m] * cd[m]
        ops.append(B.tocsr())
    return ops


@dataclass(frozen=True, eq=False)
class FermionVacuum:
    """Joint kernel of the transformed annihilators.

    ``state`` is None when the kernel is not one-dimensional; ``kernel_dim``
    then says what was found.
    """

    state: FermionState | None
    kernel_dim: int
    car_residual: float
    mean_old_quanta: float | None

    @property
    def degenerate(self) -> bool:
        return self.kernel_dim != 1


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > 1e-12 * np.max(np.abs(v))))
    return v * (abs(v[k]) / v[k])


def fermion_bogoliubov_vacuum(fock: FermionFock, rs: RSBlocks,
                              rcond: float = 1e-10) -> FermionVacuum:
    if rs.kind != "orthogonal":
        raise ValueError("fermionic Bogoliubov blocks must be of orthogonal kind")
    if rs.n != fock.n:
        raise ValueError(f"mode count mismatch: {rs.n} vs {fock.n}")
    Bs = bogoliubov_operators(fock, rs)
    residual = car_residual(Bs)
    stacked = sparse.vstack(Bs).toarray()
    kernel = scipy.linalg.null_space(stacked, rcond=rcond)
    dim = kernel.shape[1]
    if dim != 1:
        return FermionVacuum(None, dim, residual, None)
    psi = kernel[:, 0]
    # the kernel lies in one parity sector; clear round-off in the other
    odd = fock.occupations.sum(axis=1) % 2 == 1
    if np.sum(np.abs(psi[odd]) ** 2) < 0.5:
        psi[odd] = 0.0
    else:
        psi[~odd] = 0.0
    psi = _fix_phase(psi / np.linalg.norm(psi))
    state = FermionState(fock, psi)
    mean = state.expectation(fock.number_operator).real
    return FermionVacuum(state, 1, residual, mean)


def pairing_state(fock: FermionFock, Z: np.ndarray) -> FermionState:
    """exp(1/2 sum_jk Z[j,k] c_j^+ c_k^+)|0> for antisymmetric Z, unnormalized."""
    cd = fock.creators
    P = sparse.csr_matrix((fock.dim, fock.dim), dtype=complex)
    for j in range(fock.n):
        for k in range(fock.n):
            if j != k and Z[j, k] != 0:
                P = P + 0.5 * Z[j, k] * (cd[j] @ cd[k])
    term = fock.vacuum().vector.copy()
    total = term.copy()
    for order in range(1, fock.n // 2 + 1):
        term = (P @ term) / order
        total += term
    return FermionState(fock, total)


def pairing_matrix(rs: RSBlocks) -> np.ndarray:
    """Z with B_j exp(1/2 c^+ Z c^+)|0> = 0, namely Z = -R^{-1} S."""
    return -np.linalg.solve(rs.R, rs.S)


@dataclass(frozen=True)
class CrossCheck:
    overlap_error: float | None
    condition_number: float
    note: str = ""

    @property
    def skipped(self) -> bool:
        return self.overlap_error is None


def thouless_crosscheck(fock: FermionFock, rs: RSBlocks, max_condition: float = 1e12,
                        min_singular: float = 1e-10) -> CrossCheck:
    """Compare the null-space vacuum with the pairing-exponential construction."""
    sv = np.linalg.svd(rs.R, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    # |R| <= 1 for valid blocks, so a tiny singular value means singular R
    if sv[-1] < min_singular or cond > max_condition:
        return CrossCheck(None, cond, f"skipped: R is singular (smallest singular value {sv[-1]:.3e})")
    vac = fermion_bogoliubov_vacuum(fock, rs)
    if vac.degenerate:
        return CrossCheck(None, cond, f"skipped: kernel dimension {vac.kernel_dim}")
    phi = pairing_state(fock, pairing_matrix(rs))
    overlap = abs(np.vdot(vac.state.vector, phi.vector)) / phi.norm
    return CrossCheck(float(1.0 - overlap), cond)

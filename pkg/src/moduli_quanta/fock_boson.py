"""Truncated multimode bosonic Fock space.

Basis states |k_1 ... k_n> with 0 <= k_j <= M, ordered lexicographically with
mode 1 most significant (the ``np.kron`` convention).  Coherent states are not
renormalized after truncation: their norm deficit is a diagnostic.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.special import roots_laguerre

from .errors import CutoffError, ResourceBudgetError
from .moduli import RSBlocks

BUDGET_ENV = "MODULI_QUANTA_MAX_DIM"
DEFAULT_MAX_DIM = 200_000


def max_dim() -> int:
    """Hilbert-space dimension budget, overridable through the environment."""
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else DEFAULT_MAX_DIM


def _single_mode_annihilator(M: int) -> sparse.csr_matrix:
    return sparse.diags(np.sqrt(np.arange(1, M + 1, dtype=float)), 1,
                        shape=(M + 1, M + 1), format="csr")


@dataclass(frozen=True, eq=False)
class BosonFock:
    n: int
    M: int

    def __post_init__(self):
        if self.n < 1 or self.M < 1:
            raise ValueError("need n >= 1 and M >= 1")
        budget = max_dim()
        if self.dim > budget:
            raise ResourceBudgetError(self.dim, budget)

    @property
    def dim(self) -> int:
        return (self.M + 1) ** self.n

    @cached_property
    def annihilators(self) -> tuple[sparse.csr_matrix, ...]:
        a1 = _single_mode_annihilator(self.M)
        eye = sparse.identity(self.M + 1, format="csr")
        ops = []
        for j in range(self.n):
            op = sparse.identity(1, format="csr")
            for l in range(self.n):
                op = sparse.kron(op, a1 if l == j else eye, format="csr")
            ops.append(op)
        return tuple(ops)

    @cached_property
    def creators(self) -> tuple[sparse.csr_matrix, ...]:
        return tuple(a.conj().T.tocsr() for a in self.annihilators)

    @cached_property
    def occupations(self) -> np.ndarray:
        """Integer array (dim, n) of the occupation numbers of each basis state."""
        grids = np.indices((self.M + 1,) * self.n).reshape(self.n, -1)
        return grids.T.copy()

    @cached_property
    def number_operator(self) -> sparse.csr_matrix:
        return sparse.diags(self.occupations.sum(axis=1).astype(float), format="csr")

    @cached_property
    def interior(self) -> np.ndarray:
        """Indices of basis states with every occupation below the cutoff."""
        return np.flatnonzero(np.all(self.occupations < self.M, axis=1))

    def quadrature(self, j: int):
        """Position and momentum operators (a + a^+)/sqrt2, (a - a^+)/(i sqrt2)."""
        a, ad = self.annihilators[j], self.creators[j]
        return (a + ad) / math.sqrt(2), (a - ad) / (1j * math.sqrt(2))

    def basis_state(self, occ) -> "BosonState":
        occ = tuple(int(k) for k in occ)
        if len(occ) != self.n or any(k < 0 or k > self.M for k in occ):
            raise ValueError(f"occupation {occ} outside the truncated space")
        idx = 0
        for k in occ:
            idx = idx * (self.M + 1) + k
        vec = np.zeros(self.dim, dtype=complex)
        vec[idx] = 1.0
        return BosonState(self, vec)

    def vacuum(self) -> "BosonState":
        return self.basis_state((0,) * self.n)


def build_fock(n: int, M: int) -> BosonFock:
    return BosonFock(n, M)


@dataclass(frozen=True, eq=False)
class BosonState:
    fock: BosonFock
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

    def top_weight(self) -> float:
        """Probability weight on basis states with some occupation at the cutoff."""
        occ = self.fock.occupations
        mask = np.any(occ == self.fock.M, axis=1)
        return float(np.sum(np.abs(self.vector[mask]) ** 2)) / self.norm ** 2


def coherent_coefficients(z: complex, M: int) -> np.ndarray:
    """exp(-|z|^2/2) z^k / sqrt(k!) for k = 0..M."""
    c = np.empty(M + 1, dtype=complex)
    c[0] = math.exp(-0.5 * abs(z) ** 2)
    for k in range(1, M + 1):
        c[k] = c[k - 1] * z / math.sqrt(k)
    return c


def coherent_state(fock: BosonFock, z) -> BosonState:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.size != fock.n:
        raise ValueError(f"need {fock.n} amplitudes, got {z.size}")
    vec = np.ones(1, dtype=complex)
    for zj in z:
        vec = np.kron(vec, coherent_coefficients(zj, fock.M))
    return BosonState(fock, vec)


def eigen_residuals(state: BosonState, z) -> np.ndarray:
    """||(a_l - z_l)|psi>|| for each mode l."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    v = state.vector
    return np.array([np.linalg.norm(a @ v - zl * v)
                     for a, zl in zip(state.fock.annihilators, z)])


def coherent_tail(z: complex, M: int) -> float:
    """Closed form of ||(a - z)|z>|| for one truncated mode: |z| |<M|z>|."""
    r = abs(z)
    if r == 0.0:
        return 0.0
    log = -0.5 * r * r + (M + 1) * math.log(r) - 0.5 * math.lgamma(M + 1)
    return math.exp(log)


@dataclass(frozen=True)
class QuadratureRule:
    """Per-mode polar rule for integrals against d^2z/pi.

    Radial nodes are Gauss-Laguerre abscissae in s = |z|^2 (weight e^{-s}),
    angular nodes are a uniform grid of ``angular`` points.
    """

    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    angular: int

    def __post_init__(self):
        if np.any(np.asarray(self.radial_weights) <= 0):
            raise ValueError("radial weights must be positive")
        if self.angular < 2 or self.angular % 2:
            raise ValueError("angular node count must be even and >= 2")

    @classmethod
    def gauss_laguerre(cls, radial: int, angular: int) -> "QuadratureRule":
        s, w = roots_laguerre(radial)
        return cls(s, w, angular)

    def nodes(self):
        """Complex nodes z and weights W with sum W f(z) ~ int d^2z/pi e^{-|z|^2} f(z).

        d^2z = r dr dphi = ds dphi / 2, so W = w_s / (2 pi) * (2 pi / L) = w_s / L.
        """
        phi = 2 * np.pi * np.arange(self.angular) / self.angular
        r = np.sqrt(self.radial_nodes)
        z = (r[:, None] * np.exp(1j * phi)[None, :]).reshape(-1)
        W = np.repeat(self.radial_weights / self.angular, self.angular)
        return z, W


def _bargmann_monomials(z: np.ndarray, K: int) -> np.ndarray:
    """V[k, g] = z_g^k / sqrt(k!) for k = 0..K."""
    V = np.empty((K + 1, z.size), dtype=complex)
    V[0] = 1.0
    for k in range(1, K + 1):
        V[k] = V[k - 1] * z / math.sqrt(k)
    return V


def single_mode_resolution(rule: QuadratureRule, K: int) -> np.ndarray:
    """Matrix of int d^2z/pi <j|z><z|k> for j, k <= K.

    <j|z><z|k> = e^{-|z|^2} z^j conj(z)^k / sqrt(j! k!); the Gaussian factor
    is the Laguerre weight.
    """
    z, W = rule.nodes()
    V = _bargmann_monomials(z, K)
    return (V * W) @ V.conj().T


def resolution_check(fock: BosonFock, rule: QuadratureRule, K: int) -> float:
    """Max deviation from the identity of the quadrature of |z><z| on occupations <= K.

    The product rule across modes factorizes, so the n-mode matrix is the
    Kronecker power of the single-mode one.
    """
    if K < 0 or 2 * K > fock.M:
        raise ValueError(f"need 0 <= K <= M/2 (K={K}, M={fock.M})")
    one = single_mode_resolution(rule, K)
    full = np.ones((1, 1), dtype=complex)
    for _ in range(fock.n):
        full = np.kron(full, one)
    return float(np.max(np.abs(full - np.eye(full.shape[0]))))


def bargmann_pairing(f: BosonState, g: BosonState) -> complex:
    """<f|g> as the coefficient inner product.

    On the truncated span this equals the Gaussian-weighted integral of
    conj(f(z)) g(z) over C^n; see :func:`bargmann_integral`.
    """
    if f.fock is not g.fock and (f.fock.n, f.fock.M) != (g.fock.n, g.fock.M):
        raise ValueError("states live in different Fock spaces")
    return complex(np.vdot(f.vector, g.vector))


def bargmann_integral(f: BosonState, g: BosonState, rule: QuadratureRule) -> complex:
    """Quadrature of int prod(d^2z/pi) e^{-|z|^2} conj(f(z)) g(z).

    f(z) = sum_k f_k prod_j z_j^{k_j} / sqrt(k_j!) is the Bargmann function of
    the state.  Cost grows as (nodes per mode)^n; intended for n <= 2 with
    modest rules.
    """
    if (f.fock.n, f.fock.M) != (g.fock.n, g.fock.M):
        raise ValueError("states live in different Fock spaces")
    n, M = f.fock.n, f.fock.M
    z, W = rule.nodes()
    V = _bargmann_monomials(z, M)
    F = f.vector.reshape((M + 1,) * n)
    G = g.vector.reshape((M + 1,) * n)
    for _ in range(n):
        # contract the leading occupation axis; node axes accumulate at the end
        F = np.tensordot(F, V, axes=([0], [0]))
        G = np.tensordot(G, V, axes=([0], [0]))
    weight = np.ones(1)
    for _ in range(n):
        weight = np.multiply.outer(weight, W).reshape(-1)
    return complex(np.sum(weight * np.conj(F.reshape(-1)) * G.reshape(-1)))


def bogoliubov_operators(fock: BosonFock, rs: RSBlocks) -> list[sparse.csr_matrix]:
    """B_j = sum_m R[j, m] a_m + S[j, m] a_m^+."""
    a, ad = fock.annihilators, fock.creators
    ops = []
    for j in range(fock.n):
        B = sparse.csr_matrix((fock.dim, fock.dim), dtype=complex)
        for m in range(fock.n):
            if rs.R[j, m] != 0:
                B = B + rs.R[j, m] * a[m]
            if rs.S[j, m] != 0:
                B = B + rs.S[j, m] * ad[m]
        ops.append(B.tocsr())
    return ops


@dataclass(frozen=True, eq=False)
class BogoliubovVacuum:
    state: BosonState
    ccr_residual: float
    mean_old_quanta: float
    annihilation_residual: float
    leakage: float
    crosscheck_error: float | None = None
    crosscheck_note: str = ""


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > 1e-12 * np.max(np.abs(v))))
    return v * (abs(v[k]) / v[k])


def bogoliubov_vacuum(fock: BosonFock, rs: RSBlocks, crosscheck: bool = False,
                      leakage_tol: float = 1e-8) -> BogoliubovVacuum:
    """State annihilated by the symplectic-type modes B_j.

    Computed as the right singular vector of the stacked B matrices with the
    smallest singular value, searched separately in the even and odd
    total-number sectors.  Raises :class:`CutoffError` if the result puts
    more than ``leakage_tol`` of its weight on the truncation edge.
    """
    if rs.kind != "symplectic":
        raise ValueError("bosonic Bogoliubov blocks must be of symplectic kind")
    if rs.n != fock.n:
        raise ValueError(f"mode count mismatch: {rs.n} vs {fock.n}")
    Bs = bogoliubov_operators(fock, rs)
    stacked = sparse.vstack(Bs).tocsc()
    # every B_j flips total-number parity, so the kernel sits in one sector
    parity = fock.occupations.sum(axis=1) % 2
    best = None
    for sector in (0, 1):
        cols = np.flatnonzero(parity == sector)
        _, sv, vh = np.linalg.svd(stacked[:, cols].toarray(), full_matrices=False)
        if best is None or sv[-1] < best[0]:
            best = (sv[-1], cols, vh[-1].conj())
    _, cols, sub = best
    psi = np.zeros(fock.dim, dtype=complex)
    psi[cols] = sub
    psi = _fix_phase(psi)
    state = BosonState(fock, psi)

    leakage = state.top_weight()
    if leakage > leakage_tol:
        raise CutoffError(f"cutoff M={fock.M} too small: edge weight {leakage:.3e}", leakage)

    inner = fock.interior
    ccr = 0.0
    for j, Bj in enumerate(Bs):
        for l, Bl in enumerate(Bs):
            comm = (Bj @ Bl.conj().T - Bl.conj().T @ Bj).toarray()
            comm[np.diag_indices_from(comm)] -= 1.0 if j == l else 0.0
            ccr = max(ccr, float(np.max(np.abs(comm[np.ix_(inner, inner)]))))

    annihilation = max(float(np.linalg.norm(B @ psi)) for B in Bs)
    mean = state.expectation(fock.number_operator).real

    err, note = None, ""
    if crosscheck:
        err, note = pairing_crosscheck(fock, rs, state)
    return BogoliubovVacuum(state, ccr, mean, annihilation, leakage, err, note)


def pairing_state(fock: BosonFock, Z: np.ndarray) -> BosonState:
    """exp(1/2 sum_jk Z[j,k] a_j^+ a_k^+)|0>, unnormalized.

    The exponent raises total occupation by two and every path to a state
    below the cutoff stays below it, so the truncated Taylor series is exact
    on the truncated space.
    """
    ad = fock.creators
    P = sparse.csr_matrix((fock.dim, fock.dim), dtype=complex)
    for j in range(fock.n):
        for k in range(fock.n):
            if Z[j, k] != 0:
                P = P + 0.5 * Z[j, k] * (ad[j] @ ad[k])
    term = fock.vacuum().vector.copy()
    total = term.copy()
    for order in range(1, fock.n * fock.M // 2 + 1):
        term = (P @ term) / order
        if not np.any(term):
            break
        total += term
    return BosonState(fock, total)


def pairing_crosscheck(fock: BosonFock, rs: RSBlocks, state: BosonState,
                       max_condition: float = 1e12,
                       min_singular: float = 1e-10) -> tuple[float | None, str]:
    """1 - |<psi|phi>| against the closed-form pairing vacuum with Z = -R^{-1} S."""
    sv = np.linalg.svd(rs.R, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if sv[-1] < min_singular or cond > max_condition:
        return None, f"skipped: R is singular (condition number {cond:.3e})"
    Z = -np.linalg.solve(rs.R, rs.S)
    phi = pairing_state(fock, Z)
    overlap = abs(np.vdot(state.vector, phi.vector)) / (state.norm * phi.norm)
    return float(1.0 - overlap), f"condition number {cond:.3e}"

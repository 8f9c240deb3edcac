"""Classical bosonic matrix model at finite N.

Nine Hermitian N x N matrices X^mu with velocities V^mu and Lagrangian

    L = (1/(2R)) tr( sum_mu (V^mu)^2 + sum_{mu>nu} [X^mu, X^nu]^2 ).

Energy (velocity form):

    E = (1/(2R)) [ tr sum (V^mu)^2 - tr sum_{mu>nu} [X^mu, X^nu]^2 ]

The commutator of two Hermitian matrices is anti-Hermitian, so the second
term is nonnegative.  Equations of motion (independent of R):

    d^2 X^mu / dt^2 = - sum_nu [[X^mu, X^nu], X^nu]
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NumericalValidationError
from .phase_space import PhasePoint

D = 9


def hermitize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def _hermiticity_error(A: np.ndarray) -> float:
    return float(np.max(np.abs(A - np.conj(np.swapaxes(A, -1, -2))))) if A.size else 0.0


@dataclass(frozen=True, eq=False)
class MatrixConfig:
    """Positions X and velocities V, each of shape (9, N, N)."""

    X: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    R11: float = 1.0

    def __post_init__(self):
        X = np.array(self.X, dtype=complex, copy=True)
        V = np.array(self.V, dtype=complex, copy=True)
        if X.ndim != 3 or X.shape[0] != D or X.shape[1] != X.shape[2]:
            raise ValueError(f"X must have shape (9, N, N), got {X.shape}")
        if V.shape != X.shape:
            raise ValueError(f"V shape {V.shape} != X shape {X.shape}")
        if not self.R11 > 0:
            raise ValueError("R11 must be positive")
        for name, A in (("X", X), ("V", V)):
            err = _hermiticity_error(A)
            if err > 1e-12:
                raise NumericalValidationError(f"{name} is not Hermitian (error {err:.3e})", err)
        X, V = hermitize(X), hermitize(V)
        X.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "V", V)

    @property
    def N(self) -> int:
        return self.X.shape[1]

    @property
    def P_minus(self) -> float:
        """Light-cone momentum N / R11."""
        return self.N / self.R11

    @classmethod
    def zeros(cls, N: int, R11: float = 1.0) -> "MatrixConfig":
        z = np.zeros((D, N, N), dtype=complex)
        return cls(z, z, R11)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "R11": self.R11,
            "X": {"re": self.X.real.tolist(), "im": self.X.imag.tolist()},
            "V": {"re": self.V.real.tolist(), "im": self.V.imag.tolist()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MatrixConfig":
        def arr(part):
            return np.asarray(part["re"], dtype=float) + 1j * np.asarray(part["im"], dtype=float)

        return cls(arr(d["X"]), arr(d["V"]), float(d.get("R11", 1.0)))


def random_hermitian(N: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return hermitize(g)


def random_config(N: int, seed, scale: float = 1.0, R11: float = 1.0) -> MatrixConfig:
    """Random config with each X^mu, V^mu of Frobenius norm ``scale``."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    X = np.stack([random_hermitian(N, rng) for _ in range(D)])
    V = np.stack([random_hermitian(N, rng) for _ in range(D)])
    X *= scale / np.linalg.norm(X, axis=(1, 2))[:, None, None]
    V *= scale / np.linalg.norm(V, axis=(1, 2))[:, None, None]
    return MatrixConfig(X, V, R11)


@dataclass(frozen=True, eq=False)
class LieBasis:
    """Trace-orthonormal Hermitian basis of the N x N matrices, tr(T_a T_b) = delta_ab.

    Order: for each pair j < k the symmetric and antisymmetric off-diagonal
    generators, then the N-1 traceless diagonal ones, then I/sqrt(N).  For
    N = 2 this is (sigma_1, sigma_2, sigma_3, I) / sqrt(2).
    """

    N: int
    T: np.ndarray = field(repr=False)

    @cached_property
    def structure_constants(self) -> np.ndarray:
        """f[a, b, c] with [T_a, T_b] = i sum_c f[a, b, c] T_c (real, antisymmetric)."""
        comm = np.einsum("aij,bjk->abik", self.T, self.T)
        comm = comm - np.swapaxes(comm, 0, 1)
        f = -1j * np.einsum("abij,cji->abc", comm, self.T)
        return f.real

    @property
    def gram(self) -> np.ndarray:
        return np.einsum("aij,bji->ab", self.T, self.T)

    def coefficients(self, A: np.ndarray) -> np.ndarray:
        """Real coefficients tr(A T_a) of Hermitian A (works on stacks of matrices)."""
        return np.einsum("...ij,aji->...a", A, self.T).real

    def reconstruct(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("...a,aij->...ij", np.asarray(coeffs, dtype=complex), self.T)


def build_basis(N: int) -> LieBasis:
    if N < 2:
        raise ValueError("N must be >= 2")
    mats = []
    s = 1.0 / math.sqrt(2.0)
    for j in range(N):
        for k in range(j + 1, N):
            sym = np.zeros((N, N), dtype=complex)
            sym[j, k] = sym[k, j] = s
            anti = np.zeros((N, N), dtype=complex)
            anti[j, k], anti[k, j] = -1j * s, 1j * s
            mats += [sym, anti]
    for l in range(1, N):
        diag = np.zeros(N)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(diag / math.sqrt(l * (l + 1))).astype(complex))
    mats.append(np.eye(N, dtype=complex) / math.sqrt(N))
    return LieBasis(N, np.stack(mats))


def _commutators(X: np.ndarray) -> np.ndarray:
    """C[mu, nu] = [X^mu, X^nu]."""
    XY = np.matmul(X[:, None], X[None, :])
    return XY - np.swapaxes(XY, 0, 1)


def potential(X: np.ndarray, R11: float = 1.0) -> float:
    C = _commutators(X)
    iu = np.triu_indices(X.shape[0], 1)
    sq = np.einsum("kij,kji->", C[iu], C[iu])
    return float(-sq.real) / (2.0 * R11)


def kinetic(V: np.ndarray, R11: float = 1.0) -> float:
    return float(np.einsum("kij,kji->", V, V).real) / (2.0 * R11)


def energy(cfg: MatrixConfig) -> float:
    return kinetic(cfg.V, cfg.R11) + potential(cfg.X, cfg.R11)


def force(X: np.ndarray, sign: float = -1.0) -> np.ndarray:
    """Acceleration sign * sum_nu [[X^mu, X^nu], X^nu].

    sign = -1 is the one that conserves energy; the other is kept only so
    tests can show it does not.
    """
    C = _commutators(X)
    CX = np.matmul(C, X[None, :])
    XC = np.matmul(X[None, :], C)
    return sign * (CX - XC).sum(axis=1)


def gauss_charge(cfg: MatrixConfig) -> np.ndarray:
    XV = np.matmul(cfg.X, cfg.V)
    return (XV - np.matmul(cfg.V, cfg.X)).sum(axis=0)


def gauss_constraint(cfg: MatrixConfig) -> float:
    """Frobenius norm of G = sum_mu [X^mu, V^mu]."""
    return float(np.linalg.norm(gauss_charge(cfg)))


def trace_x2(X: np.ndarray) -> float:
    return float(np.einsum("kij,kji->", X, X).real)


@dataclass
class Trajectory:
    final: MatrixConfig
    steps: list[int]
    times: list[float]
    energy: list[float]
    trace_x2: list[float]
    gauss_norm: list[float]
    gauss_charge_drift: float = 0.0

    def rows(self):
        return zip(self.steps, self.times, self.energy, self.trace_x2, self.gauss_norm)

    def relative_energy_drift(self) -> float:
        e0 = self.energy[0]
        return max(abs(e - e0) for e in self.energy) / abs(e0)


_CBRT2 = 2.0 ** (1.0 / 3.0)
# Yoshida's symmetric triple-jump: three leapfrog substeps of these fractions of dt
SCHEMES = {
    "leapfrog": (1.0,),
    "yoshida4": (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2)),
}


def evolve(cfg: MatrixConfig, dt: float, steps: int, stride: int = 1,
           force_sign: float = -1.0, scheme: str = "yoshida4") -> Trajectory:
    """Integrate with kick-drift-kick leapfrog substeps.

    ``scheme="leapfrog"`` is one substep per step (second order);
    ``"yoshida4"`` composes three (fourth order, still symplectic and
    time-reversible).  Observables are sampled every ``stride`` steps and at
    the final step.
    """
    if dt < 0 or not math.isfinite(dt):
        raise ValueError("dt must be finite and nonnegative")
    if steps < 0 or stride < 1:
        raise ValueError("steps must be >= 0 and stride >= 1")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {sorted(SCHEMES)}")
    substeps = [w * dt for w in SCHEMES[scheme]]
    X = np.array(cfg.X)
    V = np.array(cfg.V)
    R = cfg.R11
    G0 = gauss_charge(cfg)
    traj = Trajectory(cfg, [], [], [], [], [])
    drift = 0.0

    def sample(k, X, V):
        nonlocal drift
        c = MatrixConfig(X, V, R)
        traj.steps.append(k)
        traj.times.append(k * dt)
        traj.energy.append(energy(c))
        traj.trace_x2.append(trace_x2(X))
        traj.gauss_norm.append(gauss_constraint(c))
        drift = max(drift, float(np.linalg.norm(gauss_charge(c) - G0)))
        return c

    last = sample(0, X, V)
    F = force(X, force_sign)
    for k in range(1, steps + 1):
        # blow-ups are caught by the finiteness check below
        with np.errstate(over="ignore", invalid="ignore"):
            for h in substeps:
                V = V + 0.5 * h * F
                X = hermitize(X + h * V)
                F = force(X, force_sign)
                V = hermitize(V + 0.5 * h * F)
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(V))):
            raise NumericalValidationError(f"non-finite state at step {k}", float("nan"))
        if k % stride == 0 or k == steps:
            last = sample(k, X, V)
    traj.final = last
    traj.gauss_charge_drift = drift
    return traj


def time_reversal_error(cfg: MatrixConfig, dt: float, steps: int,
                        scheme: str = "yoshida4") -> float:
    """Max-entry distance from the start after evolving forward, flipping V, and evolving back."""
    stride = max(steps, 1)
    fwd = evolve(cfg, dt, steps, stride=stride, scheme=scheme).final
    back = evolve(MatrixConfig(fwd.X, -fwd.V, cfg.R11), dt, steps, stride=stride,
                  scheme=scheme).final
    return max(float(np.max(np.abs(back.X - cfg.X))), float(np.max(np.abs(back.V + cfg.V))))


def to_phase_point(cfg: MatrixConfig, basis: LieBasis) -> PhasePoint:
    """Flatten to n = 9 N^2 Darboux pairs, index (mu major, a minor).

    q = tr(X^mu T_a), p = tr(V^mu T_a) / R11.
    """
    if basis.N != cfg.N:
        raise ValueError(f"basis is for N={basis.N}, config has N={cfg.N}")
    q = basis.coefficients(cfg.X).reshape(-1)
    p = (basis.coefficients(cfg.V) / cfg.R11).reshape(-1)
    return PhasePoint(q, p)

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

from moduli_quanta import matrix_model as mm
from moduli_quanta.errors import NumericalValidationError
from moduli_quanta.phase_space import pairings

S1 = np.array([[0, 1], [1, 0]], complex)
S2 = np.array([[0, -1j], [1j, 0]], complex)
S3 = np.array([[1, 0], [0, -1]], complex)


def config(N=2, **mats):
    X = np.zeros((9, N, N), complex)
    V = np.zeros((9, N, N), complex)
    for key, m in mats.items():
        (X if key[0] == "X" else V)[int(key[1:]) - 1] = m
    return X, V


class TestBasis:
    def test_pauli(self):
        b = mm.build_basis(2)
        npt.assert_allclose(b.T, np.stack([S1, S2, S3, np.eye(2)]) / np.sqrt(2), atol=1e-15)
        npt.assert_allclose(b.gram, np.eye(4), atol=1e-15)

    @pytest.mark.parametrize("N", [2, 3, 4, 5])
    def test_orthonormal_and_complete(self, N, rng):
        b = mm.build_basis(N)
        assert b.T.shape[0] == N * N
        assert np.max(np.abs(b.gram - np.eye(N * N))) <= 1e-12
        npt.assert_allclose(b.T, np.conj(np.swapaxes(b.T, 1, 2)))
        A = mm.random_hermitian(N, rng)
        assert np.max(np.abs(b.reconstruct(b.coefficients(A)) - A)) <= 1e-12

    def test_structure_constants(self):
        b = mm.build_basis(2)
        f = b.structure_constants
        # [s1/sqrt2, s2/sqrt2] = i sqrt2 (s3/sqrt2)
        assert f[0, 1, 2] == pytest.approx(np.sqrt(2))
        npt.assert_allclose(f, -np.swapaxes(f, 0, 1), atol=1e-15)
        comm = b.T[0] @ b.T[1] - b.T[1] @ b.T[0]
        npt.assert_allclose(comm, 1j * np.einsum("c,cij->ij", f[0, 1], b.T), atol=1e-15)

    def test_needs_n_2(self):
        with pytest.raises(ValueError):
            mm.build_basis(1)


class TestEnergy:
    def test_zero(self):
        assert mm.energy(mm.MatrixConfig.zeros(3)) == 0

    def test_commutator_example(self):
        X, V = config(X1=S3, X2=S1)
        assert mm.energy(mm.MatrixConfig(X, V, 1.0)) == pytest.approx(4.0, abs=1e-14)

    def test_kinetic_example(self):
        X, V = config(V1=S1)
        assert mm.energy(mm.MatrixConfig(X, V, 1.0)) == pytest.approx(1.0, abs=1e-15)

    def test_radius_scaling(self):
        X, V = config(X1=S3, X2=S1, V3=S2)
        e1 = mm.energy(mm.MatrixConfig(X, V, 1.0))
        assert mm.energy(mm.MatrixConfig(X, V, 4.0)) == pytest.approx(e1 / 4)
        assert mm.MatrixConfig(X, V, 4.0).P_minus == 0.5

    @given(st.integers(2, 4), st.integers(0, 2**32 - 1))
    def test_potential_nonnegative(self, N, seed):
        cfg = mm.random_config(N, seed)
        assert mm.potential(cfg.X) >= 0

    def test_rejects_non_hermitian(self):
        X, V = config(X1=np.array([[0, 1], [0, 0]], complex))
        with pytest.raises(NumericalValidationError):
            mm.MatrixConfig(X, V)


class TestGauss:
    def test_zero_velocity(self):
        cfg = mm.random_config(3, 0)
        assert mm.gauss_constraint(mm.MatrixConfig(cfg.X, np.zeros_like(cfg.V))) == 0

    def test_proportional_velocity(self):
        cfg = mm.random_config(3, 1)
        assert mm.gauss_constraint(mm.MatrixConfig(cfg.X, 0.7 * cfg.X)) <= 1e-15

    def test_force_is_gauge_covariant(self, rng):
        # sum_mu [X^mu, F^mu] = 0 keeps the Gauss charge fixed under kicks
        X = mm.random_config(3, 2).X
        F = mm.force(X)
        G = sum(X[m] @ F[m] - F[m] @ X[m] for m in range(9))
        assert np.max(np.abs(G)) <= 1e-13


class TestEvolve:
    def test_zero_steps(self):
        cfg = mm.random_config(2, 3)
        traj = mm.evolve(cfg, 1e-3, 0)
        npt.assert_array_equal(traj.final.X, cfg.X)
        npt.assert_array_equal(traj.final.V, cfg.V)

    def test_zero_dt(self):
        cfg = mm.random_config(2, 3)
        traj = mm.evolve(cfg, 0.0, 5)
        npt.assert_array_equal(traj.final.X, cfg.X)

    @pytest.mark.parametrize("scheme", ["leapfrog", "yoshida4"])
    def test_free_flight(self, scheme, rng):
        X, V = config(N=3, X4=mm.random_hermitian(3, rng), V4=mm.random_hermitian(3, rng))
        cfg = mm.MatrixConfig(X, V)
        traj = mm.evolve(cfg, 1e-2, 200, stride=50, scheme=scheme)
        npt.assert_allclose(traj.final.X, X + 2.0 * V, atol=1e-12)
        npt.assert_allclose(traj.final.V, V, atol=1e-15)

    def test_force_sign_is_pinned(self):
        # exact flow: dE/dt = tr(V . (A + grad U)) must vanish, so the
        # acceleration has to be minus the potential gradient; check by finite differences
        cfg = mm.random_config(2, 4)
        X = np.array(cfg.X)
        rng = np.random.default_rng(0)
        D = np.stack([mm.random_hermitian(2, rng) for _ in range(9)])
        h = 1e-6
        grad_dir = (mm.potential(X + h * D) - mm.potential(X - h * D)) / (2 * h)
        for sign, conserving in ((-1.0, True), (1.0, False)):
            F = mm.force(X, sign)
            power = np.einsum("kij,kji->", D, F).real + grad_dir
            assert (abs(power) < 1e-6) == conserving

    def test_wrong_sign_fails_conservation(self):
        cfg = mm.random_config(2, 5, scale=0.3)
        good = mm.evolve(cfg, 1e-3, 2000, stride=100, force_sign=-1.0)
        assert good.relative_energy_drift() <= 1e-10
        try:
            bad = mm.evolve(cfg, 1e-3, 2000, stride=100, force_sign=1.0)
            assert bad.relative_energy_drift() > 1e-3
        except NumericalValidationError:
            pass

    def test_leapfrog_error_is_second_order(self):
        cfg = mm.random_config(2, 6, scale=1 / 3)
        drifts = [mm.evolve(cfg, dt, int(2 / dt), stride=10, scheme="leapfrog").relative_energy_drift()
                  for dt in (4e-3, 2e-3)]
        assert drifts[0] / drifts[1] == pytest.approx(4.0, rel=0.15)

    def test_yoshida_error_is_fourth_order(self):
        cfg = mm.random_config(2, 6, scale=1.0)
        drifts = [mm.evolve(cfg, dt, int(1 / dt), stride=5, scheme="yoshida4").relative_energy_drift()
                  for dt in (2e-2, 1e-2)]
        assert drifts[0] / drifts[1] == pytest.approx(16.0, rel=0.25)

    @settings(max_examples=5)
    @given(st.sampled_from([2, 3]), st.integers(0, 1000))
    def test_conservation_short(self, N, seed):
        cfg = mm.random_config(N, seed)
        traj = mm.evolve(cfg, 1e-3, 1000, stride=50)
        assert traj.relative_energy_drift() <= 1e-8
        assert traj.gauss_charge_drift <= 1e-10
        assert mm.time_reversal_error(cfg, 1e-3, 500) <= 1e-9

    def test_two_matrix_orbit(self):
        rng = np.random.default_rng(8)
        X, V = config(X1=mm.random_hermitian(2, rng), X2=mm.random_hermitian(2, rng),
                      V1=mm.random_hermitian(2, rng), V2=mm.random_hermitian(2, rng))
        X /= np.linalg.norm(X)
        V /= np.linalg.norm(V)
        traj = mm.evolve(mm.MatrixConfig(X, V), 1e-3, 10_000, stride=100)
        assert traj.relative_energy_drift() <= 1e-8
        assert max(traj.trace_x2) < 10  # bounded

    def test_sampling_stride(self):
        traj = mm.evolve(mm.random_config(2, 0), 1e-3, 25, stride=10)
        assert traj.steps == [0, 10, 20, 25]
        assert len(list(traj.rows())) == 4

    def test_non_finite_abort(self):
        cfg = mm.random_config(2, 0, scale=50.0)
        with pytest.raises(NumericalValidationError, match="step"):
            mm.evolve(cfg, 1.0, 50)

    def test_bad_arguments(self):
        cfg = mm.random_config(2, 0)
        with pytest.raises(ValueError):
            mm.evolve(cfg, -1.0, 5)
        with pytest.raises(ValueError):
            mm.evolve(cfg, 1e-3, 5, scheme="rk4")


class TestPhasePoint:
    def test_zero(self):
        pt = mm.to_phase_point(mm.MatrixConfig.zeros(2), mm.build_basis(2))
        assert pt.n == 36 and not np.any(pt.as_vector())

    def test_isometry(self):
        basis = mm.build_basis(2)
        for seed in range(20):
            cfg = mm.random_config(2, seed, R11=1.7)
            pt = mm.to_phase_point(cfg, basis)
            trace_norm = 0.5 * (mm.trace_x2(cfg.X) + mm.trace_x2(cfg.V / cfg.R11))
            assert abs(pt.norm_squared() - trace_norm) <= 1e-12

    def test_linear_isometry_on_pairs(self):
        basis = mm.build_basis(3)
        a, b = mm.random_config(3, 1), mm.random_config(3, 2)
        pa, pb = mm.to_phase_point(a, basis), mm.to_phase_point(b, basis)
        euclid = pairings(pa, pb)[0]
        trace = 0.5 * (np.einsum("kij,kji->", a.X, b.X) + np.einsum("kij,kji->", a.V, b.V)).real
        assert euclid == pytest.approx(trace, abs=1e-12)

    def test_ordering(self):
        X, V = config(X2=S3 / np.sqrt(2))
        pt = mm.to_phase_point(mm.MatrixConfig(X, V), mm.build_basis(2))
        assert np.flatnonzero(pt.q).tolist() == [1 * 4 + 2]

    def test_mismatch(self):
        with pytest.raises(ValueError):
            mm.to_phase_point(mm.MatrixConfig.zeros(3), mm.build_basis(2))

    def test_json_round_trip(self):
        cfg = mm.random_config(3, 9, R11=2.0)
        back = mm.MatrixConfig.from_dict(cfg.to_dict())
        npt.assert_array_equal(back.X, cfg.X)
        npt.assert_array_equal(back.V, cfg.V)
        assert back.R11 == 2.0

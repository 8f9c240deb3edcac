import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, strategies as st

from moduli_quanta import fock_fermion as ff
from moduli_quanta import moduli as md
from moduli_quanta.errors import ResourceBudgetError


def anti(A, B):
    return (A @ B + B @ A).toarray()


class TestCAR:
    def test_single_mode(self):
        f = ff.build_fermion_fock(1)
        npt.assert_array_equal(f.annihilators[0].toarray(), [[0, 1], [0, 0]])
        npt.assert_array_equal(anti(f.annihilators[0], f.creators[0]), np.eye(2))

    def test_two_modes_anticommute(self):
        f = ff.build_fermion_fock(2)
        c1, c2 = f.annihilators
        assert not np.any(anti(c1, c2))

    def test_dimension(self):
        assert ff.build_fermion_fock(3).dim == 8

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_car_exact(self, n):
        f = ff.build_fermion_fock(n)
        for j in range(n):
            for l in range(n):
                npt.assert_array_equal(anti(f.annihilators[j], f.creators[l]),
                                       np.eye(f.dim) * (j == l))
                assert not np.any(anti(f.annihilators[j], f.annihilators[l]))

    def test_bound(self):
        with pytest.raises(ResourceBudgetError):
            ff.build_fermion_fock(13)
        assert ff.build_fermion_fock(13, max_modes=13).dim == 8192

    def test_number_operator(self):
        f = ff.build_fermion_fock(3)
        N = sum(cd @ c for c, cd in zip(f.annihilators, f.creators)).toarray()
        npt.assert_array_equal(N, f.number_operator.toarray())


def ground_state_oracle(fock, rs):
    """Lowest eigenvector of sum_j B_j^+ B_j, which is zero exactly on the vacuum."""
    Bs = [B.toarray() for B in ff.bogoliubov_operators(fock, rs)]
    H = sum(B.conj().T @ B for B in Bs)
    w, v = np.linalg.eigh(H)
    return w, v[:, 0]


class TestVacuum:
    def test_identity(self):
        f = ff.build_fermion_fock(3)
        vac = ff.fermion_bogoliubov_vacuum(f, md.RSBlocks(np.eye(3), np.zeros((3, 3))))
        npt.assert_allclose(vac.state.vector, f.vacuum().vector, atol=1e-15)
        assert vac.mean_old_quanta == 0

    @pytest.mark.parametrize("theta", [np.pi / 4, np.pi / 2, 0.3, 1.1])
    def test_pair_rotation(self, theta):
        f = ff.build_fermion_fock(2)
        vac = ff.fermion_bogoliubov_vacuum(f, md.pair_rotation_rs(theta))
        c, s = np.cos(theta), np.sin(theta)
        # basis |00>, |01>, |10>, |11>; sign fixed by the exact kernel (and the oracle below)
        expected = np.array([c, 0, 0, -s])
        expected = expected * np.sign(expected[np.argmax(np.abs(expected) > 1e-12)])
        npt.assert_allclose(vac.state.vector, expected, atol=1e-14)
        assert vac.mean_old_quanta == pytest.approx(2 * s ** 2, abs=1e-12)
        assert vac.car_residual <= 1e-15

    def test_full_rotation_gives_filled_pair(self):
        f = ff.build_fermion_fock(2)
        vac = ff.fermion_bogoliubov_vacuum(f, md.pair_rotation_rs(np.pi / 2))
        assert abs(abs(vac.state.vector[3]) - 1) <= 1e-15
        assert vac.mean_old_quanta == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_against_ground_state_oracle(self, n):
        for seed in range(10):
            rs = md.extract_rs(md.random_orthogonal(n, seed))
            f = ff.build_fermion_fock(n)
            vac = ff.fermion_bogoliubov_vacuum(f, rs)
            w, psi = ground_state_oracle(f, rs)
            assert abs(w[0]) <= 1e-12 and w[1] >= 0.5
            assert abs(abs(np.vdot(psi, vac.state.vector)) - 1) <= 1e-12
            N = f.number_operator.toarray()
            oracle_quanta = np.vdot(psi, N @ psi).real
            assert vac.mean_old_quanta == pytest.approx(oracle_quanta, abs=1e-12)
            # promoted after the brute-force check above
            assert vac.mean_old_quanta == pytest.approx(np.trace(rs.S @ rs.S.conj().T).real, abs=1e-12)

    @given(st.integers(2, 4), st.integers(0, 2**32 - 1))
    def test_parity_and_car(self, n, seed):
        rs = md.extract_rs(md.random_orthogonal(n, seed))
        vac = ff.fermion_bogoliubov_vacuum(ff.build_fermion_fock(n), rs)
        even, odd = vac.state.parity_weights()
        assert min(even, odd) == 0.0
        assert vac.car_residual <= 1e-12
        # the vacuum is in the odd sector exactly for the det = -1 component
        det = np.linalg.det(md.rs_to_real(rs))
        assert (odd > 0.5) == (det < 0)

    @given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.booleans())
    def test_quanta_vanish_iff_holomorphic(self, n, seed, unitary):
        if unitary:
            U = md.random_unitary(n, seed).U
            rs = md.RSBlocks(U, np.zeros((n, n)))
        else:
            rs = md.extract_rs(md.random_orthogonal(n, seed))
        vac = ff.fermion_bogoliubov_vacuum(ff.build_fermion_fock(n), rs)
        assert (vac.mean_old_quanta <= 1e-12) == (np.max(np.abs(rs.S)) <= 1e-12)

    def test_degenerate_kernel_is_reported(self):
        f = ff.build_fermion_fock(2)
        rs = md.RSBlocks(np.diag([1.0, 0.0]), np.zeros((2, 2)), check=False)
        vac = ff.fermion_bogoliubov_vacuum(f, rs)
        assert vac.degenerate and vac.kernel_dim == 2 and vac.state is None
        assert vac.car_residual == pytest.approx(1.0)

    def test_wrong_kind(self):
        with pytest.raises(ValueError):
            ff.fermion_bogoliubov_vacuum(ff.build_fermion_fock(1), md.single_mode_squeeze_rs(0.3))


class TestThouless:
    def test_identity(self):
        cc = ff.thouless_crosscheck(ff.build_fermion_fock(2), md.RSBlocks(np.eye(2), np.zeros((2, 2))))
        assert cc.overlap_error == 0.0

    def test_pair_rotation(self):
        cc = ff.thouless_crosscheck(ff.build_fermion_fock(2), md.pair_rotation_rs(0.3))
        assert abs(cc.overlap_error) <= 1e-12

    def test_sign_convention_on_two_modes(self):
        # Z = -R^{-1} S; for the pair rotation Z_12 = -tan(theta) and the pairing
        # state is |00> - tan(theta)|11>, the same sign as the exact kernel
        theta = 0.3
        f = ff.build_fermion_fock(2)
        rs = md.pair_rotation_rs(theta)
        Z = ff.pairing_matrix(rs)
        assert Z[0, 1] == pytest.approx(-np.tan(theta))
        phi = ff.pairing_state(f, Z).vector
        npt.assert_allclose(phi, [1, 0, 0, -np.tan(theta)], atol=1e-15)
        # opposite sign convention fails
        wrong = ff.pairing_state(f, -Z).vector
        vac = ff.fermion_bogoliubov_vacuum(f, rs).state.vector
        assert 1 - abs(np.vdot(vac, wrong)) / np.linalg.norm(wrong) > 0.1

    def test_random_four_mode(self):
        f = ff.build_fermion_fock(4)
        done = 0
        for seed in range(100):
            cc = ff.thouless_crosscheck(f, md.extract_rs(md.random_orthogonal(4, seed)))
            if not cc.skipped:
                done += 1
                assert abs(cc.overlap_error) <= 1e-10
        assert done >= 30

    def test_singular_r_skipped(self):
        f = ff.build_fermion_fock(2)
        cc = ff.thouless_crosscheck(f, md.pair_rotation_rs(np.pi / 2))
        assert cc.skipped and "singular" in cc.note

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from gatemc.qcore import (
    Statevector,
    apply_one_qubit,
    apply_two_qubit,
    haar_unitary,
    is_unitary,
)
from oracles import embed_one, embed_two

X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT_01 = np.eye(4, dtype=complex)[[0, 3, 2, 1]]  # control q0 (low bit), target q1


class TestStatevector:
    def test_length_and_norm(self, rng):
        s = Statevector.random(5, rng)
        assert s.amplitudes.shape == (32,)
        assert abs(s.norm_squared() - 1) < 1e-12

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            Statevector(3, np.ones(4))

    def test_plus_state(self):
        np.testing.assert_allclose(Statevector.plus(2).amplitudes, 0.5)


class TestHaar:
    @pytest.mark.parametrize("dim", [2, 4])
    def test_unitary(self, dim, rng):
        u = haar_unitary(dim, rng)
        assert np.abs(u.conj().T @ u - np.eye(dim)).max() < 1e-12
        assert abs(abs(np.linalg.det(u)) - 1) < 1e-10

    def test_read_only(self, rng):
        u = haar_unitary(2, rng)
        with pytest.raises(ValueError):
            u[0, 0] = 1

    @pytest.mark.parametrize("dim", [1, 3, 8])
    def test_rejects_bad_dim(self, dim, rng):
        with pytest.raises(ValueError):
            haar_unitary(dim, rng)

    def test_first_moment(self, rng):
        n = 100_000
        samples = np.array([haar_unitary(2, rng)[0, 0] for _ in range(n)])
        x = np.abs(samples) ** 2
        # |U_00|^2 is uniform on [0, 1] for U(2): mean 1/2, sd 1/sqrt(12)
        assert abs(x.mean() - 0.5) < 5 * x.std(ddof=1) / np.sqrt(n)

    def test_without_phase_fix_is_not_haar(self, rng):
        # plain QR leaves a real R diagonal and biases the eigenphases
        phases = []
        for _ in range(20_000):
            g = rng.standard_normal((2, 2, 2))
            q, _ = np.linalg.qr(g[0] + 1j * g[1])
            phases.extend(np.angle(np.linalg.eigvals(q)))
        assert sps.kstest(phases, sps.uniform(-np.pi, 2 * np.pi).cdf).pvalue < 0.01


class TestGates:
    def test_x_flips_low_bit(self):
        s = apply_one_qubit(Statevector.zeros(2), X, 0)
        np.testing.assert_array_equal(s.amplitudes, [0, 1, 0, 0])

    def test_identity_bit_exact(self, rng):
        s = Statevector.random(3, rng)
        before = s.amplitudes.copy()
        apply_one_qubit(s, np.eye(2), 1)
        apply_two_qubit(s, np.eye(4), (1, 2))
        np.testing.assert_array_equal(s.amplitudes, before)

    def test_hadamard_twice(self, rng):
        s = Statevector.random(2, rng)
        before = s.amplitudes.copy()
        apply_one_qubit(s, H, 1)
        np.testing.assert_allclose(s.amplitudes, embed_one(H, 1, 2) @ before, atol=1e-12)
        apply_one_qubit(s, H, 1)
        np.testing.assert_allclose(s.amplitudes, before, atol=1e-12)

    def test_cnot(self):
        s = apply_two_qubit(Statevector.basis(2, 0b01), CNOT_01, (0, 1))
        np.testing.assert_array_equal(s.amplitudes, Statevector.basis(2, 0b11).amplitudes)

    def test_random_two_qubit_vs_dense(self, rng):
        s = Statevector.random(4, rng)
        g = haar_unitary(4, rng)
        ref = embed_two(g, 1, 4) @ s.amplitudes
        np.testing.assert_allclose(apply_two_qubit(s, g, (1, 2)).amplitudes, ref, atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_dense_equivalence_all_positions(self, n, rng):
        for q in range(n):
            s = Statevector.random(n, rng)
            g = haar_unitary(2, rng)
            ref = embed_one(g, q, n) @ s.amplitudes
            assert np.abs(apply_one_qubit(s, g, q).amplitudes - ref).max() < 1e-12
        for q in range(n - 1):
            s = Statevector.random(n, rng)
            g = haar_unitary(4, rng)
            ref = embed_two(g, q, n) @ s.amplitudes
            assert np.abs(apply_two_qubit(s, g, (q, q + 1)).amplitudes - ref).max() < 1e-12

    def test_target_out_of_range(self):
        with pytest.raises(IndexError):
            apply_one_qubit(Statevector.zeros(2), X, 2)

    @pytest.mark.parametrize("pair", [(0, 2), (1, 0), (2, 3)])
    def test_bad_pair(self, pair):
        with pytest.raises((ValueError, IndexError)):
            apply_two_qubit(Statevector.zeros(3), np.eye(4), pair)

    def test_long_sequence_preserves_norm(self, rng):
        s = Statevector.random(5, rng)
        ones = [haar_unitary(2, rng) for _ in range(50)]
        twos = [haar_unitary(4, rng) for _ in range(50)]
        for k in range(10_000):
            if k % 2:
                apply_one_qubit(s, ones[k % 50], k % 5)
            else:
                q = k % 4
                apply_two_qubit(s, twos[k % 50], (q, q + 1))
        assert abs(s.norm_squared() - 1) < 1e-9


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(2, 5), data=st.data())
def test_gate_norm_property(seed, n, data):
    rng = np.random.default_rng(seed)
    s = Statevector.random(n, rng)
    q = data.draw(st.integers(0, n - 2))
    apply_two_qubit(s, haar_unitary(4, rng), (q, q + 1))
    apply_one_qubit(s, haar_unitary(2, rng), data.draw(st.integers(0, n - 1)))
    assert abs(s.norm_squared() - 1) < 1e-12


def test_is_unitary():
    assert is_unitary(H)
    assert not is_unitary(2 * H)

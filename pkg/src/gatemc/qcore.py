"""Statevector storage, in-place gate kernels and Haar-random unitaries.

Qubit 0 is the least-significant bit of the basis-state index.  A
two-qubit gate acting on the pair ``(q, q + 1)`` uses the same ordering
inside its 4x4 block: local index ``b_q + 2 * b_{q+1}``.
"""
from __future__ import annotations

import numba as nb
import numpy as np

__all__ = [
    "Statevector",
    "haar_unitary",
    "apply_one_qubit",
    "apply_two_qubit",
    "is_unitary",
]


class Statevector:
    """Complex amplitudes of an ``n_qubits`` register.

    Gate functions update :attr:`amplitudes` in place and return the same
    object, so calls can be chained.
    """

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes=None):
        if n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {n_qubits}")
        dim = 1 << n_qubits
        if amplitudes is None:
            amplitudes = np.zeros(dim, dtype=np.complex128)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.array(amplitudes, dtype=np.complex128)
            if amplitudes.shape != (dim,):
                raise ValueError(
                    f"expected {dim} amplitudes for {n_qubits} qubits, got shape {amplitudes.shape}"
                )
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    @classmethod
    def zeros(cls, n_qubits: int) -> "Statevector":
        """The computational basis state ``|0...0>``."""
        return cls(n_qubits)

    @classmethod
    def plus(cls, n_qubits: int) -> "Statevector":
        """The product state ``|+...+>``."""
        dim = 1 << n_qubits
        return cls(n_qubits, np.full(dim, dim ** -0.5, dtype=np.complex128))

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "Statevector":
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def random(cls, n_qubits: int, rng: np.random.Generator) -> "Statevector":
        """Normalized state with iid complex Gaussian amplitudes (uniform on the sphere)."""
        dim = 1 << n_qubits
        g = rng.standard_normal((2, dim))
        amps = g[0] + 1j * g[1]
        return cls(n_qubits, amps / np.linalg.norm(amps))

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def __repr__(self):
        return f"Statevector(n_qubits={self.n_qubits})"


def is_unitary(u, atol: float = 1e-12) -> bool:
    u = np.asarray(u)
    return bool(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() < atol)


# ---------------------------------------------------------------------------
# numba kernels (hot path of the sampler)
# ---------------------------------------------------------------------------

@nb.njit(cache=True)
def _kernel_one(psi, g, q):
    s = 1 << q
    for i in range(psi.shape[0]):
        if i & s:
            continue
        j = i | s
        a = psi[i]
        b = psi[j]
        psi[i] = g[0, 0] * a + g[0, 1] * b
        psi[j] = g[1, 0] * a + g[1, 1] * b


@nb.njit(cache=True)
def _kernel_two(psi, g, q):
    s0 = 1 << q
    s1 = s0 << 1
    m = s0 | s1
    for i in range(psi.shape[0]):
        if i & m:
            continue
        i1 = i | s0
        i2 = i | s1
        i3 = i | m
        a0 = psi[i]
        a1 = psi[i1]
        a2 = psi[i2]
        a3 = psi[i3]
        psi[i] = g[0, 0] * a0 + g[0, 1] * a1 + g[0, 2] * a2 + g[0, 3] * a3
        psi[i1] = g[1, 0] * a0 + g[1, 1] * a1 + g[1, 2] * a2 + g[1, 3] * a3
        psi[i2] = g[2, 0] * a0 + g[2, 1] * a1 + g[2, 2] * a2 + g[2, 3] * a3
        psi[i3] = g[3, 0] * a0 + g[3, 1] * a1 + g[3, 2] * a2 + g[3, 3] * a3


@nb.njit(cache=True)
def _kernel_layers(psi, ones, twos, pair_starts, n_layers):
    for _ in range(n_layers):
        for q in range(ones.shape[0]):
            _kernel_one(psi, ones[q], q)
        for k in range(twos.shape[0]):
            _kernel_two(psi, twos[k], pair_starts[k])


@nb.njit(cache=True)
def _kernel_pauli_sum(psi, flips, signs, phases):
    # sum_t phase_t * <psi| P_t |psi>, with P_t|i> ~ (-1)^{|i & sign|} |i ^ flip>
    total = 0j
    for t in range(flips.shape[0]):
        f = flips[t]
        s = signs[t]
        acc = 0j
        for i in range(psi.shape[0]):
            p = i & s
            odd = False
            while p:
                odd = not odd
                p &= p - 1
            v = np.conj(psi[i ^ f]) * psi[i]
            if odd:
                acc -= v
            else:
                acc += v
        total += phases[t] * acc
    return total


@nb.njit(cache=True)
def _kernel_circuit_expectation(psi0, ones, twos, pair_starts, n_layers, flips, signs, phases):
    psi = psi0.copy()
    _kernel_layers(psi, ones, twos, pair_starts, n_layers)
    return _kernel_pauli_sum(psi, flips, signs, phases)


@nb.njit(cache=True)
def _kernel_haar(g, dim):
    # g: 2*dim*dim standard normals, real parts first
    n2 = dim * dim
    z = np.empty((dim, dim), dtype=np.complex128)
    c = np.sqrt(0.5)
    for k in range(n2):
        z[k // dim, k % dim] = c * (g[k] + 1j * g[n2 + k])
    q, r = np.linalg.qr(z)
    for j in range(dim):
        d = r[j, j]
        a = abs(d)
        ph = d / a if a > 0.0 else 1.0 + 0j
        for i in range(dim):
            q[i, j] *= ph
    return q


@nb.njit(cache=True)
def _kernel_hermitian(g, dim):
    # g: dim*dim standard normals -> N(0,1) real diagonal, E|h_ij|^2 = 1 off-diagonal
    h = np.empty((dim, dim), dtype=np.complex128)
    c = np.sqrt(0.5)
    k = dim
    for i in range(dim):
        h[i, i] = g[i]
        for j in range(i + 1, dim):
            v = c * (g[k] + 1j * g[k + 1])
            k += 2
            h[i, j] = v
            h[j, i] = np.conj(v)
    return h


@nb.njit(cache=True)
def _kernel_close_step(u, g, eps):
    """exp(i * eps * H) @ u for H built from the normals in g."""
    w, v = np.linalg.eigh(_kernel_hermitian(g, u.shape[0]))
    d = np.exp(1j * eps * w)
    return ((v * d) @ np.conj(v.T)) @ u.copy()


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a Haar-distributed ``dim x dim`` unitary (``dim`` in {2, 4}).

    A complex Ginibre matrix is QR-decomposed and each column of ``Q`` is
    multiplied by the phase of the matching diagonal entry of ``R``;
    without that phase fix the distribution is not Haar.

    The returned array is read-only.
    """
    if dim not in (2, 4):
        raise ValueError(f"dim must be 2 or 4, got {dim}")
    u = _kernel_haar(rng.standard_normal(2 * dim * dim), dim)
    u.flags.writeable = False
    return u


def _check_gate(gate, dim):
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} gate, got shape {gate.shape}")
    return gate


def apply_one_qubit(state: Statevector, gate, target: int) -> Statevector:
    """Apply a 2x2 gate to qubit ``target`` in place."""
    gate = _check_gate(gate, 2)
    if not 0 <= target < state.n_qubits:
        raise IndexError(f"target {target} out of range for {state.n_qubits} qubits")
    _kernel_one(state.amplitudes, gate, target)
    return state


def apply_two_qubit(state: Statevector, gate, targets) -> Statevector:
    """Apply a 4x4 gate to the adjacent pair ``targets = (q, q + 1)`` in place."""
    gate = _check_gate(gate, 4)
    q, q1 = targets
    if q1 != q + 1:
        raise ValueError(f"two-qubit gates act on adjacent pairs (q, q+1), got {tuple(targets)}")
    if q < 0 or q1 >= state.n_qubits:
        raise IndexError(f"pair {tuple(targets)} out of range for {state.n_qubits} qubits")
    _kernel_two(state.amplitudes, gate, q)
    return state

"""Brick-layer circuit ansatz.

One layer holds ``n`` single-qubit gates, followed by two-qubit gates on the
even pairs ``(0,1), (2,3), ...`` and then on the odd pairs ``(1,2), (3,4),
...``.  A circuit is the same layer applied ``n_layers`` times.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .qcore import (
    Statevector,
    _kernel_close_step,
    _kernel_haar,
    _kernel_hermitian,
    _kernel_layers,
    haar_unitary,
)

__all__ = [
    "Sublayer",
    "GateAddress",
    "Layer",
    "init_layer",
    "apply_layer",
    "apply_circuit",
    "random_address",
    "propose_gate",
    "layer_to_text",
    "layer_from_text",
]


class Sublayer(enum.Enum):
    ONE_QUBIT = "one_qubit"
    EVEN_PAIR = "even_pair"
    ODD_PAIR = "odd_pair"


def _sublayer_sizes(n_qubits):
    return n_qubits, n_qubits // 2, (n_qubits - 1) // 2


@dataclass(frozen=True)
class GateAddress:
    sublayer: Sublayer
    position: int

    def slot(self, n_qubits: int) -> int:
        """Flat index: one-qubit gates first, then even pairs, then odd pairs."""
        n1, ne, no = _sublayer_sizes(n_qubits)
        if self.sublayer is Sublayer.ONE_QUBIT:
            offset, size = 0, n1
        elif self.sublayer is Sublayer.EVEN_PAIR:
            offset, size = n1, ne
        else:
            offset, size = n1 + ne, no
        if not 0 <= self.position < size:
            raise IndexError(f"{self} out of range for {n_qubits} qubits")
        return offset + self.position

    def validate(self, n_qubits: int) -> None:
        self.slot(n_qubits)

    @classmethod
    def from_slot(cls, slot: int, n_qubits: int) -> "GateAddress":
        n1, ne, no = _sublayer_sizes(n_qubits)
        if slot < 0 or slot >= n1 + ne + no:
            raise IndexError(f"slot {slot} out of range for {n_qubits} qubits")
        if slot < n1:
            return cls(Sublayer.ONE_QUBIT, slot)
        if slot < n1 + ne:
            return cls(Sublayer.EVEN_PAIR, slot - n1)
        return cls(Sublayer.ODD_PAIR, slot - n1 - ne)


class Layer:
    """Gates of one layer, stored as two read-only stacks.

    ``ones[i]`` acts on qubit ``i``; ``twos`` holds the even-pair gates
    followed by the odd-pair gates, and ``pair_starts[k]`` is the lower
    qubit of ``twos[k]``.
    """

    __slots__ = ("n_qubits", "ones", "twos", "pair_starts")

    def __init__(self, ones, twos):
        ones = np.array(ones, dtype=np.complex128)
        twos = np.array(twos, dtype=np.complex128).reshape(-1, 4, 4)
        n = ones.shape[0]
        if n < 2:
            raise ValueError(f"a layer needs at least 2 qubits, got {n}")
        if ones.shape != (n, 2, 2) or twos.shape[0] != n - 1:
            raise ValueError(
                f"expected {n} one-qubit and {n - 1} two-qubit gates, "
                f"got shapes {ones.shape} and {twos.shape}"
            )
        ones.flags.writeable = False
        twos.flags.writeable = False
        self.n_qubits = n
        self.ones = ones
        self.twos = twos
        self.pair_starts = _pair_starts(n)

    @property
    def one_qubit(self):
        return list(self.ones)

    @property
    def even_pairs(self):
        return list(self.twos[: self.n_qubits // 2])

    @property
    def odd_pairs(self):
        return list(self.twos[self.n_qubits // 2:])

    @property
    def n_slots(self) -> int:
        return 2 * self.n_qubits - 1

    def gate(self, addr: GateAddress) -> np.ndarray:
        slot = addr.slot(self.n_qubits)
        if slot < self.n_qubits:
            return self.ones[slot]
        return self.twos[slot - self.n_qubits]

    def replace(self, addr: GateAddress, gate) -> "Layer":
        """Copy of this layer with one gate swapped out."""
        slot = addr.slot(self.n_qubits)
        ones, twos = self.ones, self.twos
        if slot < self.n_qubits:
            ones = ones.copy()
            ones[slot] = gate
            ones.flags.writeable = False
        else:
            twos = twos.copy()
            twos[slot - self.n_qubits] = gate
            twos.flags.writeable = False
        new = object.__new__(Layer)
        new.n_qubits, new.ones, new.twos, new.pair_starts = self.n_qubits, ones, twos, self.pair_starts
        return new

    def __eq__(self, other):
        if not isinstance(other, Layer):
            return NotImplemented
        return np.array_equal(self.ones, other.ones) and np.array_equal(self.twos, other.twos)

    def __repr__(self):
        return f"Layer(n_qubits={self.n_qubits})"


def _pair_starts(n_qubits):
    return np.array(list(range(0, n_qubits - 1, 2)) + list(range(1, n_qubits - 1, 2)), dtype=np.int64)


def init_layer(n_qubits: int, mode: str = "identity", rng: np.random.Generator | None = None) -> Layer:
    """Build a layer of identity gates (``mode="identity"``) or Haar samples (``"random"``)."""
    if n_qubits < 2:
        raise ValueError(f"n_qubits must be >= 2, got {n_qubits}")
    if mode == "identity":
        ones = np.broadcast_to(np.eye(2, dtype=np.complex128), (n_qubits, 2, 2))
        twos = np.broadcast_to(np.eye(4, dtype=np.complex128), (n_qubits - 1, 4, 4))
    elif mode == "random":
        if rng is None:
            raise ValueError("random initialization needs an rng")
        ones = [haar_unitary(2, rng) for _ in range(n_qubits)]
        twos = [haar_unitary(4, rng) for _ in range(n_qubits - 1)]
    else:
        raise ValueError(f"unknown init mode {mode!r}")
    return Layer(ones, twos)


def _check_match(state, layer):
    if state.n_qubits != layer.n_qubits:
        raise ValueError(f"state has {state.n_qubits} qubits, layer has {layer.n_qubits}")


def apply_layer(state: Statevector, layer: Layer) -> Statevector:
    """Apply one layer in place: one-qubit gates, even pairs, then odd pairs."""
    _check_match(state, layer)
    _kernel_layers(state.amplitudes, layer.ones, layer.twos, layer.pair_starts, 1)
    return state


def apply_circuit(state: Statevector, layer: Layer, n_layers: int) -> Statevector:
    """Apply ``layer`` ``n_layers`` times in place."""
    _check_match(state, layer)
    if n_layers < 1:
        raise ValueError(f"n_layers must be >= 1, got {n_layers}")
    _kernel_layers(state.amplitudes, layer.ones, layer.twos, layer.pair_starts, n_layers)
    return state


def random_address(n_qubits: int, rng: np.random.Generator) -> GateAddress:
    """Uniform draw over the ``2 * n_qubits - 1`` gate slots of a layer."""
    if n_qubits < 2:
        raise ValueError(f"n_qubits must be >= 2, got {n_qubits}")
    return GateAddress.from_slot(int(rng.integers(2 * n_qubits - 1)), n_qubits)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Real N(0,1) diagonal, standard complex Gaussian off-diagonal entries."""
    return _kernel_hermitian(rng.standard_normal(dim * dim), dim)


def propose_gate(layer: Layer, addr: GateAddress, mode: str = "fresh",
                 step: float | None = None, rng: np.random.Generator | None = None) -> Layer:
    """Return a copy of ``layer`` with the gate at ``addr`` redrawn.

    ``mode="fresh"`` draws an independent Haar unitary.  ``mode="close"``
    left-multiplies the current gate by ``exp(i * step * H)`` for a random
    Hermitian ``H``; since ``H`` and ``-H`` are equally likely the move is
    symmetric.
    """
    current = layer.gate(addr)
    dim = current.shape[0]
    if mode == "fresh":
        new = _kernel_haar(rng.standard_normal(2 * dim * dim), dim)
    elif mode == "close":
        if step is None or not step > 0:
            raise ValueError(f"close proposals need a positive step, got {step}")
        new = _kernel_close_step(current, rng.standard_normal(dim * dim), step)
    else:
        raise ValueError(f"unknown proposal mode {mode!r}")
    return layer.replace(addr, new)


def layer_to_text(layer: Layer) -> str:
    """Flat record: ``n_qubits`` then every matrix entry as ``re im``, row-major, in slot order."""
    entries = np.concatenate([layer.ones.ravel(), layer.twos.ravel()])
    parts = [str(layer.n_qubits)]
    parts += [f"{z.real:.17g} {z.imag:.17g}" for z in entries]
    return "\n".join(parts) + "\n"


def layer_from_text(text: str) -> Layer:
    tokens = text.split()
    n = int(tokens[0])
    vals = np.array([float(t) for t in tokens[1:]])
    n_ones, n_twos = 4 * n, 16 * (n - 1)
    if vals.size != 2 * (n_ones + n_twos):
        raise ValueError(f"layer record for {n} qubits has {vals.size} numbers, expected {2 * (n_ones + n_twos)}")
    z = vals[0::2] + 1j * vals[1::2]
    return Layer(z[:n_ones].reshape(n, 2, 2), z[n_ones:].reshape(n - 1, 4, 4))

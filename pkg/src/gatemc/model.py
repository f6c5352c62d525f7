"""Pauli-string observables, the transverse-field Ising chain and its exact solution.

Pauli strings are written with character ``i`` acting on qubit ``i``, so
``"ZZII"`` is ``Z_0 Z_1`` on four qubits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .qcore import Statevector, _kernel_one, _kernel_pauli_sum

__all__ = [
    "PauliString",
    "Observable",
    "IsingParams",
    "DegenerateGroundStateError",
    "ising_hamiltonian",
    "magnetization",
    "expectation",
    "shot_estimate",
    "shot_estimate_groups",
    "ground_state",
    "ground_state_expectation",
    "parse_observable",
    "format_observable",
]

MAX_DENSE_QUBITS = 12
DEGENERACY_GAP = 1e-9
IMAG_TOLERANCE = 1e-8

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


class DegenerateGroundStateError(ValueError):
    """The lowest eigenvalue is degenerate, so ground-state expectations are basis dependent."""


@dataclass(frozen=True)
class PauliString:
    ops: str
    coefficient: float = 1.0

    def __post_init__(self):
        ops = self.ops.upper()
        if not ops or set(ops) - set("IXYZ"):
            raise ValueError(f"invalid Pauli string {self.ops!r}")
        if not np.isfinite(self.coefficient):
            raise ValueError(f"coefficient must be finite, got {self.coefficient}")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @property
    def n_qubits(self) -> int:
        return len(self.ops)

    def mask(self, letters: str) -> int:
        return sum(1 << i for i, c in enumerate(self.ops) if c in letters)

    def to_dense(self) -> np.ndarray:
        # qubit 0 is the least-significant bit, i.e. the rightmost Kronecker factor
        out = np.ones((1, 1), dtype=np.complex128)
        for c in self.ops:
            out = np.kron(_PAULI[c], out)
        return self.coefficient * out


@dataclass(frozen=True)
class Observable:
    """Real-weighted sum of Pauli strings on a common register."""

    terms: tuple
    name: str = field(default="observable", compare=False)

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("an observable needs at least one term")
        sizes = {t.n_qubits for t in terms}
        if len(sizes) != 1:
            raise ValueError(f"terms act on different register sizes: {sorted(sizes)}")
        object.__setattr__(self, "terms", terms)

    @property
    def n_qubits(self) -> int:
        return self.terms[0].n_qubits

    @cached_property
    def compiled(self):
        """``(flips, signs, phases)`` arrays consumed by the expectation kernel."""
        flips = np.array([t.mask("XY") for t in self.terms], dtype=np.int64)
        signs = np.array([t.mask("ZY") for t in self.terms], dtype=np.int64)
        phases = np.array(
            [t.coefficient * 1j ** t.ops.count("Y") for t in self.terms], dtype=np.complex128
        )
        return flips, signs, phases

    def to_dense(self) -> np.ndarray:
        return sum(t.to_dense() for t in self.terms)


@dataclass(frozen=True)
class IsingParams:
    n_qubits: int
    h_x: float

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError(f"n_qubits must be >= 2, got {self.n_qubits}")
        if self.h_x < 0:
            raise ValueError(f"h_x must be non-negative, got {self.h_x}")


def _single(n, letter, sites):
    ops = ["I"] * n
    for s in sites:
        ops[s] = letter
    return "".join(ops)


def ising_hamiltonian(p: IsingParams) -> Observable:
    """Open-chain transverse-field Ising model ``-sum Z_i Z_{i+1} - h_x sum X_i``.

    Field terms are omitted when ``h_x == 0``.
    """
    n = p.n_qubits
    terms = [PauliString(_single(n, "Z", (i, i + 1)), -1.0) for i in range(n - 1)]
    if p.h_x != 0:
        terms += [PauliString(_single(n, "X", (i,)), -p.h_x) for i in range(n)]
    return Observable(tuple(terms), name="energy")


def magnetization(n_qubits: int) -> Observable:
    """Transverse magnetization ``sum_i X_i``."""
    if n_qubits < 1:
        raise ValueError(f"n_qubits must be >= 1, got {n_qubits}")
    return Observable(
        tuple(PauliString(_single(n_qubits, "X", (i,)), 1.0) for i in range(n_qubits)),
        name="magnetization",
    )


def _real_part(value: complex) -> float:
    if abs(value.imag) > IMAG_TOLERANCE:
        raise ValueError(f"expectation has imaginary part {value.imag:.3g}; observable is not Hermitian")
    return float(value.real)


def expectation(state: Statevector, obs: Observable) -> float:
    """Exact ``<psi|obs|psi>``."""
    if state.n_qubits != obs.n_qubits:
        raise ValueError(f"state has {state.n_qubits} qubits, observable has {obs.n_qubits}")
    return _real_part(_kernel_pauli_sum(state.amplitudes, *obs.compiled))


def _measurement_groups(obs):
    groups = {"Z": [], "X": []}
    constant = 0.0
    for t in obs.terms:
        letters = set(t.ops) - {"I"}
        if not letters:
            constant += t.coefficient
        elif letters == {"Z"}:
            groups["Z"].append(t)
        elif letters == {"X"}:
            groups["X"].append(t)
        else:
            raise ValueError(
                f"term {t.ops} is not diagonal in a single Z or X product basis; "
                "only single-basis grouping is supported"
            )
    return constant, groups


def shot_estimate_groups(state: Statevector, obs: Observable, shots_per_basis: int,
                         rng: np.random.Generator) -> dict:
    """Per-group ``(mean, stderr)`` from simulated projective measurements.

    Terms are split into an all-Z and an all-X group; each group gets
    ``shots_per_basis`` shots.  Identity terms are returned under ``"I"``
    with zero error.
    """
    if shots_per_basis < 2:
        raise ValueError(f"shots_per_basis must be >= 2, got {shots_per_basis}")
    if state.n_qubits != obs.n_qubits:
        raise ValueError(f"state has {state.n_qubits} qubits, observable has {obs.n_qubits}")
    constant, groups = _measurement_groups(obs)
    out = {}
    if constant:
        out["I"] = (constant, 0.0)
    outcomes = np.arange(1 << state.n_qubits)
    for basis, terms in groups.items():
        if not terms:
            continue
        amps = state.amplitudes
        if basis == "X":
            amps = amps.copy()
            for q in range(state.n_qubits):
                _kernel_one(amps, _HADAMARD, q)
        probs = np.abs(amps) ** 2
        counts = rng.multinomial(shots_per_basis, probs / probs.sum())
        values = np.zeros(outcomes.size)
        for t in terms:
            parity = (np.bitwise_count(outcomes & t.mask(basis)) & 1).astype(np.int64)
            values += t.coefficient * (1 - 2 * parity)
        n = shots_per_basis
        mean = counts @ values / n
        var = counts @ (values - mean) ** 2 / (n - 1)
        out[basis] = (float(mean), float(np.sqrt(var / n)))
    return out


def shot_estimate(state: Statevector, obs: Observable, shots_per_basis: int,
                  rng: np.random.Generator) -> tuple[float, float]:
    """Shot-noise estimate of ``<obs>``: summed group means, errors in quadrature."""
    groups = shot_estimate_groups(state, obs, shots_per_basis, rng)
    mean = sum(m for m, _ in groups.values())
    err = np.sqrt(sum(e * e for _, e in groups.values()))
    return float(mean), float(err)


def _spectrum(obs):
    if obs.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(
            f"dense diagonalization limited to {MAX_DENSE_QUBITS} qubits, got {obs.n_qubits}"
        )
    return np.linalg.eigh(obs.to_dense())


def ground_state(obs: Observable) -> tuple[float, Statevector]:
    """Lowest eigenvalue and a normalized eigenvector, by dense diagonalization."""
    w, v = _spectrum(obs)
    return float(w[0]), Statevector(obs.n_qubits, v[:, 0])


def ground_state_expectation(h: Observable, obs: Observable) -> float:
    """``<gs|obs|gs>`` for the ground state of ``h``; raises if that state is degenerate."""
    if h.n_qubits != obs.n_qubits:
        raise ValueError(f"hamiltonian has {h.n_qubits} qubits, observable has {obs.n_qubits}")
    w, v = _spectrum(h)
    if w.size > 1 and w[1] - w[0] <= DEGENERACY_GAP:
        raise DegenerateGroundStateError(
            f"ground state is degenerate (gap {w[1] - w[0]:.3g}); <obs> depends on the basis"
        )
    gs = v[:, 0]
    return _real_part(complex(gs.conj() @ obs.to_dense() @ gs))


def parse_observable(text: str, name: str = "observable") -> Observable:
    """Parse ``coeff PAULI`` lines; blank lines and ``#`` comments are ignored."""
    terms = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'coeff PAULI_STRING', got {line!r}")
        terms.append(PauliString(parts[1], float(parts[0])))
    return Observable(tuple(terms), name=name)


def format_observable(obs: Observable) -> str:
    return "".join(f"{t.coefficient!r} {t.ops}\n" for t in obs.terms)

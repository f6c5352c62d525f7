"""Metropolis chain over the gates of a repeated brick layer.

Each step picks a gate slot uniformly, proposes a replacement, evaluates
the energy of the proposed circuit on the initial state and accepts with
probability ``min(1, exp(-beta * dE))``.  A sweep is ``n (n - 1)`` steps.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .ansatz import Layer, init_layer, propose_gate, random_address
from .model import Observable, _real_part, magnetization, shot_estimate
from .qcore import Statevector, _kernel_circuit_expectation, _kernel_layers

__all__ = [
    "ChainConfig",
    "ChainState",
    "ChainRecord",
    "make_rng",
    "accept_move",
    "circuit_energy",
    "init_chain",
    "metropolis_step",
    "sweep",
    "run_chain",
    "write_chain_csv",
    "read_chain_csv",
    "write_metadata",
    "read_metadata",
]

_PROPOSAL_MODES = ("fresh", "close")
_INIT_MODES = ("identity", "random")
_INITIAL_STATES = ("plus", "zeros")
_EXPECTATION_MODES = ("exact", "shots")


@dataclass(frozen=True)
class ChainConfig:
    n_qubits: int = 4
    n_layers: int = 6
    beta: float = 1.0
    n_sweeps: int = 1000
    measure_interval: int = 10
    proposal_mode: str = "fresh"
    close_step: float = 0.1
    init_mode: str = "identity"
    initial_state: str = "plus"
    seed: int = 0
    expectation_mode: str = "exact"
    shots: int = 1000

    def __post_init__(self):
        for name in ("n_qubits", "n_layers", "n_sweeps", "measure_interval"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_qubits < 2:
            raise ValueError(f"n_qubits must be >= 2, got {self.n_qubits}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        for name, allowed in (("proposal_mode", _PROPOSAL_MODES), ("init_mode", _INIT_MODES),
                              ("initial_state", _INITIAL_STATES),
                              ("expectation_mode", _EXPECTATION_MODES)):
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        if self.proposal_mode == "close" and not self.close_step > 0:
            raise ValueError(f"close_step must be positive, got {self.close_step}")
        if self.expectation_mode == "shots" and self.shots < 2:
            raise ValueError(f"shots must be >= 2, got {self.shots}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    @property
    def steps_per_sweep(self) -> int:
        return self.n_qubits * (self.n_qubits - 1)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ChainConfig":
        return cls(**d)


@dataclass
class ChainState:
    layer: Layer
    current_energy: float
    psi0: np.ndarray
    proposals: int = 0
    accepts: int = 0

    @property
    def acceptance_rate(self) -> float:
        return self.accepts / self.proposals if self.proposals else 0.0


@dataclass
class ChainRecord:
    rows: list
    acceptance_rate: float
    config: ChainConfig
    columns: tuple = ("sweep", "energy", "magnetization")
    proposals: int = 0
    meta: dict = field(default_factory=dict)
    final_layer: Layer | None = None

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) stream; one per chain."""
    return np.random.Generator(np.random.Philox(seed))


def accept_move(delta_e: float, beta: float, rng: np.random.Generator) -> bool:
    """Metropolis rule.  Downhill moves are accepted without consuming a random number."""
    if delta_e <= 0:
        return True
    return rng.random() < math.exp(-beta * delta_e)


def _initial_amplitudes(cfg):
    if cfg.initial_state == "plus":
        return Statevector.plus(cfg.n_qubits).amplitudes
    return Statevector.zeros(cfg.n_qubits).amplitudes


def _circuit_state(layer, psi0, n_layers):
    psi = psi0.copy()
    _kernel_layers(psi, layer.ones, layer.twos, layer.pair_starts, n_layers)
    return Statevector(layer.n_qubits, psi)


def circuit_energy(layer: Layer, psi0: np.ndarray, h: Observable, n_layers: int) -> float:
    """Exact ``<psi0| U^dag h U |psi0>`` with ``U = layer ** n_layers``."""
    value = _kernel_circuit_expectation(
        psi0, layer.ones, layer.twos, layer.pair_starts, n_layers, *h.compiled
    )
    return _real_part(value)


def _evaluate(layer, psi0, obs, cfg, rng):
    if cfg.expectation_mode == "exact":
        return circuit_energy(layer, psi0, obs, cfg.n_layers)
    state = _circuit_state(layer, psi0, cfg.n_layers)
    return shot_estimate(state, obs, cfg.shots, rng)[0]


def init_chain(cfg: ChainConfig, h: Observable, rng: np.random.Generator) -> ChainState:
    if h.n_qubits != cfg.n_qubits:
        raise ValueError(f"hamiltonian has {h.n_qubits} qubits, config has {cfg.n_qubits}")
    layer = init_layer(cfg.n_qubits, cfg.init_mode, rng)
    psi0 = _initial_amplitudes(cfg)
    return ChainState(layer, _evaluate(layer, psi0, h, cfg, rng), psi0)


def metropolis_step(chain: ChainState, h: Observable, cfg: ChainConfig,
                    rng: np.random.Generator, energy=None) -> bool:
    """One proposal plus accept/reject.  Returns whether it was accepted.

    ``energy`` optionally replaces the circuit evaluation; it is called with
    the proposed layer and must return its energy.
    """
    addr = random_address(cfg.n_qubits, rng)
    proposal = propose_gate(chain.layer, addr, cfg.proposal_mode, cfg.close_step, rng)
    if energy is None:
        e_new = _evaluate(proposal, chain.psi0, h, cfg, rng)
    else:
        e_new = energy(proposal)
    chain.proposals += 1
    if accept_move(e_new - chain.current_energy, cfg.beta, rng):
        chain.layer = proposal
        chain.current_energy = e_new
        chain.accepts += 1
        return True
    return False


def sweep(chain: ChainState, h: Observable, cfg: ChainConfig, rng: np.random.Generator,
          energy=None) -> int:
    """``n (n - 1)`` Metropolis steps; returns the number accepted."""
    return sum(metropolis_step(chain, h, cfg, rng, energy) for _ in range(cfg.steps_per_sweep))


def run_chain(cfg: ChainConfig, h: Observable, extra_obs=None) -> ChainRecord:
    """Run ``cfg.n_sweeps`` sweeps and record observables every ``measure_interval`` sweeps.

    Rows are ``(sweep, <h>, <obs_1>, ...)`` on the circuit as it stands after
    that sweep.  The result depends only on ``cfg`` (including its seed).
    """
    if extra_obs is None:
        extra_obs = [magnetization(cfg.n_qubits)]
    rng = make_rng(cfg.seed)
    chain = init_chain(cfg, h, rng)
    rows = []
    for s in range(1, cfg.n_sweeps + 1):
        sweep(chain, h, cfg, rng)
        if s % cfg.measure_interval:
            continue
        if cfg.expectation_mode == "exact":
            e = chain.current_energy
        else:
            e = _evaluate(chain.layer, chain.psi0, h, cfg, rng)
        extras = [_evaluate(chain.layer, chain.psi0, o, cfg, rng) for o in extra_obs]
        rows.append((s, e, *extras))
    meta = {"final_energy": chain.current_energy, "accepts": chain.accepts}
    if cfg.expectation_mode == "shots":
        meta["physical_shots_per_evaluation"] = _group_count(h) * cfg.shots
    record = ChainRecord(
        rows=rows,
        acceptance_rate=chain.acceptance_rate,
        config=cfg,
        columns=("sweep", "energy", *(o.name for o in extra_obs)),
        proposals=chain.proposals,
        meta=meta,
        final_layer=chain.layer,
    )
    return record


def _group_count(obs):
    letters = {frozenset(set(t.ops) - {"I"}) for t in obs.terms}
    return len(letters - {frozenset()})


def write_chain_csv(record: ChainRecord, path) -> None:
    lines = [",".join(record.columns)]
    for s, *vals in record.rows:
        lines.append(",".join([str(s)] + [f"{v:.17g}" for v in vals]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_chain_csv(path) -> tuple[tuple, np.ndarray]:
    """Return ``(columns, data)`` with one row per measurement."""
    text = Path(path).read_text().splitlines()
    if not text:
        raise ValueError(f"{path}: empty chain file")
    columns = tuple(text[0].split(","))
    if columns[:2] != ("sweep", "energy"):
        raise ValueError(f"{path}: unexpected header {text[0]!r}")
    data = np.array([[float(x) for x in line.split(",")] for line in text[1:] if line],
                    dtype=float).reshape(-1, len(columns))
    return columns, data


def write_metadata(record: ChainRecord, path) -> None:
    payload = {
        "config": record.config.to_dict(),
        "acceptance_rate": record.acceptance_rate,
        "proposals": record.proposals,
        "columns": list(record.columns),
        **record.meta,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_metadata(path) -> dict:
    return json.loads(Path(path).read_text())

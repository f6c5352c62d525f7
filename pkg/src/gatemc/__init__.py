"""Metropolis sampling of quantum-circuit gates and extrapolation of low-energy observables."""

__version__ = "0.1.0"

from .qcore import Statevector, apply_one_qubit, apply_two_qubit, haar_unitary
from .ansatz import (
    GateAddress,
    Layer,
    Sublayer,
    apply_circuit,
    apply_layer,
    init_layer,
    propose_gate,
    random_address,
)
from .model import (
    IsingParams,
    Observable,
    PauliString,
    expectation,
    ground_state,
    ground_state_expectation,
    ising_hamiltonian,
    magnetization,
    shot_estimate,
)
from .sampler import ChainConfig, ChainRecord, metropolis_step, run_chain, sweep
from .stats import SeriesEstimate, bin_size_scan, estimate_series, jackknife, trim_equilibration
from .extrapolate import FitModel, FitPoint, FitResult, asymptote_budget, fit, fit_range_scan, format_report

"""
Exact ground state of the four-site Ising chain
===============================================

Dense diagonalization gives the reference values every sampled run is
compared against.  Sweeping the transverse field shows the crossover from
the ordered (ZZ-dominated) to the polarized (X-dominated) regime.
"""
import numpy as np

from gatemc import IsingParams, ground_state, ground_state_expectation, ising_hamiltonian, magnetization

n = 4
m_op = magnetization(n)

# the two fields used throughout the demos
for hx in (1.5, 0.25):
    h = ising_hamiltonian(IsingParams(n, hx))
    e0, _ = ground_state(h)
    print(f"h_x = {hx:<5} E0 = {e0: .6f}   <M> = {ground_state_expectation(h, m_op):.6f}")

# gap between the two lowest levels: small gaps mean slow equilibration at low temperature
print("\n  h_x      E0       <M>      gap")
for hx in np.linspace(0.1, 2.0, 8):
    h = ising_hamiltonian(IsingParams(n, hx))
    w = np.linalg.eigvalsh(h.to_dense())
    m = ground_state_expectation(h, m_op)
    print(f"{hx:5.2f}  {w[0]:8.4f}  {m:7.4f}  {w[1] - w[0]:.2e}")

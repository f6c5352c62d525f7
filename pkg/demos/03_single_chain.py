"""
One Metropolis chain
====================

A single chain at beta = 8 for the h_x = 3/2 chain.  We watch the energy
relax toward equilibrium, then bin the trimmed series and read off the
jackknife error once it stops growing with the bin size.
"""
from gatemc import ChainConfig, IsingParams, bin_size_scan, ground_state, ising_hamiltonian, jackknife, run_chain, trim_equilibration

h = ising_hamiltonian(IsingParams(4, 1.5))
e0, _ = ground_state(h)

cfg = ChainConfig(n_qubits=4, n_layers=6, beta=8.0, n_sweeps=20000, measure_interval=10,
                  proposal_mode="close", close_step=0.1, seed=3)
record = run_chain(cfg, h)
energy = record.column("energy")

print(f"acceptance rate {record.acceptance_rate:.3f}, {len(energy)} measurements")
for lo in range(0, len(energy), len(energy) // 10):
    print(f"  sweeps {int(record.rows[lo][0]):5d}+  <E> = {energy[lo:lo + len(energy) // 10].mean(): .4f}")
print(f"lowest recorded energy {energy.min():.4f}, exact ground state {e0:.4f}")

trimmed = trim_equilibration(energy, "auto")
chosen, errors = bin_size_scan(trimmed, return_errors=True)
print("\nbin size  jackknife error")
for size, err in errors.items():
    print(f"{size:8d}  {err:.5f}{'  <- chosen' if size == chosen else ''}")
est = jackknife(trimmed, chosen)
print(f"\nE(beta=8) = {est.mean:.4f} +/- {est.error:.4f}")

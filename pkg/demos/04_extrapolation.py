"""
Extrapolating to zero temperature
=================================

Chains at increasing beta approach the ground state only as 1/beta.  A
short scan (far fewer sweeps than the full acceptance runs, so expect
larger errors) is fitted with the three forms and the spread between fits
and fit ranges becomes the systematic error.
"""
import warnings

from gatemc import (
    ChainConfig,
    FitPoint,
    IsingParams,
    asymptote_budget,
    estimate_series,
    fit,
    fit_range_scan,
    format_report,
    ground_state,
    ising_hamiltonian,
    run_chain,
)

warnings.simplefilter("ignore")  # short series rarely reach a saturated bin size

h = ising_hamiltonian(IsingParams(4, 1.5))
e0, _ = ground_state(h)

points = []
for i, beta in enumerate([1, 2, 4, 8, 16, 32]):
    cfg = ChainConfig(beta=beta, n_sweeps=4000, measure_interval=5, proposal_mode="close",
                      close_step=0.1, seed=100 + i)
    est = estimate_series(run_chain(cfg, h).column("energy"))
    points.append(FitPoint(beta, est.mean, est.error))
    print(f"beta {beta:3d}: E = {est.mean: .4f} +/- {est.error:.4f}")

window = [p for p in points if p.beta >= 4]
primary = fit(window, "inverse")
variants = fit_range_scan(window, "inverse", 3)[1:] + [fit(window, "power"), fit(window, "quadratic")]
budget = asymptote_budget(primary, variants)
print()
print(format_report(primary, variants, budget, label="energy, beta >= 4"))
print(f"exact E0 = {e0:.4f}; deviation {abs(budget.central - e0) / budget.total_error:.1f} total errors")

print("\nresidual of the primary fit:")
for p, r in zip(points, [p.value - primary(p.beta) for p in points]):
    print(f"  beta {p.beta:4.0f}  {r:+.4f}")

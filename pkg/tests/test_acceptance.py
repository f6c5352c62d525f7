"""End-to-end acceptance criteria.

Each numbered criterion records a PASS/FAIL line that is printed in the
terminal summary.  The two full-size scans (about six minutes on one core)
are run once per session.
"""
import dataclasses
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.stats as sps

from conftest import ACCEPTANCE_REPORT
from oracles import ar1

from gatemc.cli import (
    analyze_manifest,
    cmd_oracle,
    fit_observable,
    load_config,
    read_estimates,
    run_scan,
)
from gatemc.extrapolate import FitPoint, asymptote_budget, fit
from gatemc.model import (
    IsingParams,
    expectation,
    ground_state,
    ising_hamiltonian,
    shot_estimate,
)
from gatemc.qcore import Statevector, haar_unitary
from gatemc.sampler import ChainConfig, init_chain, make_rng, metropolis_step, read_chain_csv
from gatemc.stats import bin_size_scan, jackknife

pytestmark = pytest.mark.acceptance

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
EXACT = {
    1.5: {"energy": -6.50, "magnetization": 3.66},
    0.25: {"energy": -3.10, "magnetization": 0.814},
}


def record(n, ok, detail):
    prev_ok, prev_detail = ACCEPTANCE_REPORT.get(n, (True, ""))
    ACCEPTANCE_REPORT[n] = (prev_ok and bool(ok), f"{prev_detail}; {detail}" if prev_detail else detail)
    assert ok, detail


@pytest.fixture(scope="session")
def scans(tmp_path_factory):
    """Run, analyze and fit both full-size configs; returns per-h_x results."""
    out = {}
    for hx, name in ((1.5, "hx1.5.ini"), (0.25, "hx0.25.ini")):
        scan = load_config(CONFIGS / name)
        assert scan.h_x == hx
        scan = dataclasses.replace(scan, output_dir=tmp_path_factory.mktemp(f"scan_{hx}"))
        start = time.perf_counter()
        manifest = run_scan(scan)
        estimates = analyze_manifest(manifest)
        fits = {}
        for obs in scan.observables:
            s = scan.fits[obs]
            fits[obs] = fit_observable(estimates, obs, s.model, s.min_points, s.beta_min)
        out[hx] = {
            "scan": scan,
            "estimates": read_estimates(estimates),
            "fits": fits,
            "wall": time.perf_counter() - start,
        }
    return out


# 1 ---------------------------------------------------------------------------

def test_c01_oracle(capsys):
    for hx, ref in EXACT.items():
        start = time.perf_counter()
        assert cmd_oracle(4, hx) == 0
        elapsed = time.perf_counter() - start
        lines = capsys.readouterr().out.splitlines()
        e0 = float(lines[0].split("=")[1])
        m = float(lines[1].split("=")[1])
        ok = (
            f"{e0:.2f}" == f"{ref['energy']:.2f}"
            and f"{m:.{3 if hx == 0.25 else 2}f}" == f"{ref['magnetization']:.{3 if hx == 0.25 else 2}f}"
            and elapsed < 1.0
        )
        record(1, ok, f"h_x={hx}: E0={e0:.6f} <M>={m:.6f} in {elapsed:.2f}s")


# 2-4 -------------------------------------------------------------------------

def _check_asymptote(n, scans, hx, obs, max_total=None):
    primary, _, budget, _ = scans[hx]["fits"][obs]
    exact = EXACT[hx][obs]
    dev = abs(budget.central - exact)
    ok = dev <= 3 * budget.total_error
    detail = (
        f"h_x={hx} {obs}: {budget.central:.4f} +/- {budget.total_error:.4f} "
        f"({primary.model.value}, chi2/dof {primary.chi2_dof:.2f}) vs {exact}, "
        f"{dev / budget.total_error:.2f} total errors"
    )
    if max_total is not None:
        ok = ok and budget.total_error <= max_total
        detail += f", total error {'<=' if budget.total_error <= max_total else '>'} {max_total}"
    record(n, ok, detail)


def test_c02_energy_three_halves(scans):
    _check_asymptote(2, scans, 1.5, "energy", max_total=0.3)


def test_c03_magnetization_three_halves(scans):
    _check_asymptote(3, scans, 1.5, "magnetization")


@pytest.mark.parametrize("obs", ["energy", "magnetization"])
def test_c04_quarter_field(scans, obs):
    _check_asymptote(4, scans, 0.25, obs)


# 5 ---------------------------------------------------------------------------

def test_c05_variational_floor(scans):
    for hx, res in scans.items():
        scan = res["scan"]
        e0, _ = ground_state(scan.hamiltonian())
        out = Path(scan.output_dir)
        energies = np.concatenate(
            [read_chain_csv(p)[1][:, 1] for p in sorted(out.glob("beta_*.csv"))]
        )
        below = int(np.sum(energies < e0 - 1e-9))
        record(5, below == 0, f"h_x={hx}: {energies.size} energies, {below} below E0={e0:.6f}, min {energies.min():.6f}")


# 6 ---------------------------------------------------------------------------

def test_c06_acceptance_law():
    h = ising_hamiltonian(IsingParams(4, 1.5))
    cfg = ChainConfig(beta=math.log(2))
    rng = make_rng(2024)
    chain = init_chain(cfg, h, rng)
    n = 10_000
    uphill = sum(metropolis_step(chain, h, cfg, rng, energy=lambda _: chain.current_energy + 1.0) for _ in range(n))
    sigma = math.sqrt(0.25 / n)
    ok_up = abs(uphill / n - 0.5) < 5 * sigma
    flat = sum(metropolis_step(chain, h, cfg, rng, energy=lambda _: chain.current_energy) for _ in range(n))
    down = sum(metropolis_step(chain, h, cfg, rng, energy=lambda _: chain.current_energy - 0.1) for _ in range(n))
    record(6, ok_up and flat == n and down == n,
           f"dE=+1: {uphill / n:.4f} ({(uphill / n - 0.5) / sigma:+.2f} sigma); dE=0: {flat}/{n}; dE<0: {down}/{n}")


# 7 ---------------------------------------------------------------------------

@pytest.mark.parametrize("dim", [2, 4])
def test_c07_haar(dim):
    rng = np.random.default_rng(777 + dim)
    eye = np.eye(dim)
    worst = max(np.abs(u.conj().T @ u - eye).max() for u in (haar_unitary(dim, rng) for _ in range(10_000)))

    n = 100_000
    x = np.array([abs(haar_unitary(dim, rng)[0, 0]) ** 2 for _ in range(n)])
    z = (x.mean() - 1 / dim) / (x.std(ddof=1) / math.sqrt(n))

    phases = np.concatenate([np.angle(np.linalg.eigvals(haar_unitary(dim, rng))) for _ in range(5_000)])
    # eigenphases of a Haar unitary are marginally uniform on (-pi, pi]
    p = sps.kstest(phases, sps.uniform(-np.pi, 2 * np.pi).cdf).pvalue

    record(7, worst < 1e-12 and abs(z) < 5 and p > 0.01,
           f"U({dim}): max |U^H U - I| {worst:.1e}, E|U00|^2 {z:+.2f} sigma, KS p {p:.3f}")


# 8 ---------------------------------------------------------------------------

def test_c08_statistics():
    rng = np.random.default_rng(88)
    ratios = [jackknife(rng.standard_normal(10_000), 1).error / 0.01 for _ in range(20)]
    ok_iid = all(abs(r - 1) < 0.1 for r in ratios)
    chosen = bin_size_scan(ar1(100_000, 0.9, rng))
    const = jackknife(np.full(1000, 2.5), 8).error
    record(8, ok_iid and chosen >= 16 and const == 0.0,
           f"iid error/(sigma/sqrt N) in [{min(ratios):.3f}, {max(ratios):.3f}]; AR(1) bin size {chosen}; constant error {const}")


# 9 ---------------------------------------------------------------------------

def test_c09_fits():
    betas = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
    inv = [FitPoint(b, 2.5 / b - 6.5, 0.01) for b in betas]
    quad = [FitPoint(b, 1.0 / b - 0.7 / b ** 2 + 3.66, 0.01) for b in betas]
    r_inv, r_quad = fit(inv, "inverse"), fit(quad, "quadratic")
    lin_err = max(
        abs(r_inv.params["A"] - 2.5), abs(r_inv.params["B"] + 6.5),
        abs(r_quad.params["D"] - 1.0), abs(r_quad.params["E"] + 0.7), abs(r_quad.params["F"] - 3.66),
    )
    c = fit(inv, "power").params["C"]
    budget = asymptote_budget(r_inv, [dataclasses.replace(r_inv, params={"A": 0.0, "B": -6.44})])
    ok_budget = math.isclose(budget.syst_error, abs(-6.44 + 6.5), rel_tol=1e-12) and budget.total_error == math.hypot(
        budget.stat_error, budget.syst_error
    )
    record(9, lin_err < 1e-9 and abs(c - 1) < 1e-4 and ok_budget,
           f"linear recovery error {lin_err:.1e}; power C = {c:.7f}; budget syst {budget.syst_error:.4f} total {budget.total_error:.4f}")


# 10 --------------------------------------------------------------------------

def test_c10_shot_estimator():
    rng = np.random.default_rng(1010)
    h = ising_hamiltonian(IsingParams(4, 1.5))
    state = Statevector.random(4, rng)
    exact = expectation(state, h)
    ratios = [shot_estimate(state, h, 4000, rng)[1] / shot_estimate(state, h, 1000, rng)[1] for _ in range(100)]
    hits = 0
    for _ in range(100):
        mean, err = shot_estimate(state, h, 1000, rng)
        hits += abs(mean - exact) < 4 * err
    ratio = float(np.mean(ratios))
    record(10, 0.4 <= ratio <= 0.6 and hits >= 95, f"stderr ratio at 4x shots {ratio:.3f}; coverage {hits}/100 at 4 stderr")


# 11 --------------------------------------------------------------------------

def test_c11_determinism(tmp_path):
    base = load_config(CONFIGS / "hx1.5.ini")
    short = dataclasses.replace(base.base, n_sweeps=2000)
    trees = []
    for workers in (1, 4):
        scan = dataclasses.replace(base, base=short, output_dir=tmp_path / f"w{workers}")
        estimates = analyze_manifest(run_scan(scan, workers=workers))
        for obs in scan.observables:
            fit_observable(estimates, obs, "inverse", None, 0.0)
        trees.append({p.name: p.read_bytes() for p in sorted(Path(scan.output_dir).iterdir())})
    same = trees[0] == trees[1]
    record(11, same, f"{len(trees[0])} output files compared at workers 1 and 4: {'byte-identical' if same else 'DIFFER'}")


# properties of the acceptance runs ---------------------------------------------

def _by_obs(res, obs):
    rows = sorted((r for r in res["estimates"] if r["observable"] == obs), key=lambda r: r["beta"])
    return [r["beta"] for r in rows], [r["mean"] for r in rows], [r["error"] for r in rows]


@pytest.mark.parametrize("hx", [1.5, 0.25])
def test_energy_monotone_in_beta(scans, hx):
    _, mean, err = _by_obs(scans[hx], "energy")
    for i in range(len(mean) - 1):
        assert mean[i + 1] <= mean[i] + 2 * math.hypot(err[i], err[i + 1])


@pytest.mark.parametrize("hx", [1.5, 0.25])
def test_acceptance_rate_decays(scans, hx):
    manifest = json.loads((Path(scans[hx]["scan"].output_dir) / "manifest.json").read_text())
    rates = [e["acceptance_rate"] for e in manifest["entries"]]
    assert all(r2 <= r1 + 0.01 for r1, r2 in zip(rates, rates[1:])), rates


@pytest.mark.parametrize("hx", [1.5, 0.25])
def test_estimates_respect_floor(scans, hx):
    e0, _ = ground_state(scans[hx]["scan"].hamiltonian())
    for beta, mean, err in zip(*_by_obs(scans[hx], "energy")):
        assert mean >= e0 - 1e-9
        assert mean + 3 * err >= e0


def test_beta8_consistent_with_neighbours(scans):
    betas, mean, _ = _by_obs(scans[1.5], "energy")
    i = betas.index(8.0)
    # A / beta + B through the two neighbouring points
    b1, b2 = betas[i - 1], betas[i + 1]
    a = (mean[i - 1] - mean[i + 1]) / (1 / b1 - 1 / b2)
    predicted = a / 8.0 + mean[i + 1] - a / b2
    assert abs(mean[i] - predicted) < 0.3


def test_quarter_field_energy_error_is_systematic(scans):
    _, _, budget, _ = scans[0.25]["fits"]["energy"]
    assert budget.syst_error > budget.stat_error

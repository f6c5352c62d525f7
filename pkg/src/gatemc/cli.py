"""Command-line driver: ``run``, ``analyze``, ``fit``, ``oracle`` and ``pipeline``.

Exit codes: 0 success, 2 bad config, 3 I/O failure, 4 missing or corrupt
series, 5 too few points for a fit, 6 singular fit, 7 degenerate ground
state.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .ansatz import layer_to_text
from .extrapolate import (
    FitError,
    FitModel,
    FitPoint,
    asymptote_budget,
    fit,
    fit_range_scan,
    format_report,
)
from .model import (
    DegenerateGroundStateError,
    IsingParams,
    format_observable,
    ground_state,
    ground_state_expectation,
    ising_hamiltonian,
    magnetization,
    parse_observable,
)
from .sampler import ChainConfig, run_chain, write_chain_csv, write_metadata
from .stats import estimate_series

__all__ = [
    "ScanConfig",
    "FitSettings",
    "load_config",
    "cmd_run",
    "cmd_analyze",
    "cmd_fit",
    "cmd_oracle",
    "cmd_pipeline",
    "main",
]

WORKERS_ENV = "GATEMC_WORKERS"
ESTIMATE_HEADER = ("beta", "observable", "mean", "error", "bin_size", "n_bins", "n_discarded")
DEFAULT_BETAS = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SERIES = 4
EXIT_POINTS = 5
EXIT_SINGULAR = 6
EXIT_DEGENERATE = 7


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FitSettings:
    model: str = "inverse"
    beta_min: float = 0.0
    min_points: int | None = None


@dataclass(frozen=True)
class ScanConfig:
    base: ChainConfig
    betas: tuple = DEFAULT_BETAS
    h_x: float = 1.0
    observables: tuple = ("energy", "magnetization")
    output_dir: Path = Path("runs")
    workers: int = 1
    hamiltonian_file: Path | None = None
    n_discard: object = "auto"
    fits: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.betas:
            raise ConfigError("betas must be nonempty")
        if any(b <= 0 for b in self.betas):
            raise ConfigError(f"betas must be positive, got {self.betas}")
        if any(b2 <= b1 for b1, b2 in zip(self.betas, self.betas[1:])):
            raise ConfigError(f"betas must be strictly ascending, got {self.betas}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.observables[:1] != ("energy",):
            raise ConfigError("the first observable must be 'energy'")

    def hamiltonian(self):
        if self.hamiltonian_file is not None:
            return parse_observable(Path(self.hamiltonian_file).read_text(), name="energy")
        return ising_hamiltonian(IsingParams(self.base.n_qubits, self.h_x))

    def chain_config(self, index: int) -> ChainConfig:
        return replace(self.base, beta=self.betas[index], seed=self.base.seed + index)


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def load_config(path) -> ScanConfig:
    """Parse an INI-style config with ``[model]``, ``[chain]``, ``[scan]``, ``[output]`` and ``[fit.*]`` sections."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        model = parser["model"] if parser.has_section("model") else {}
        chain = parser["chain"] if parser.has_section("chain") else {}
        scan = parser["scan"] if parser.has_section("scan") else {}
        output = parser["output"] if parser.has_section("output") else {}

        kw = {}
        if "n_qubits" in model:
            kw["n_qubits"] = int(model["n_qubits"])
        for key in ("n_layers", "n_sweeps", "measure_interval", "seed", "shots"):
            if key in chain:
                kw[key] = int(chain[key])
        if "close_step" in chain:
            kw["close_step"] = float(chain["close_step"])
        for key in ("proposal_mode", "init_mode", "initial_state", "expectation_mode"):
            if key in chain:
                kw[key] = chain[key].strip().lower()
        base = ChainConfig(**kw)

        ham = model.get("hamiltonian_file")
        if ham:
            ham = Path(ham)
            if not ham.is_absolute():
                ham = path.parent / ham
        out = Path(output.get("dir", "runs"))
        if not out.is_absolute():
            out = path.parent / out
        n_discard = scan.get("n_discard", "auto").strip()
        fits = {}
        for section in parser.sections():
            if section.startswith("fit."):
                s = parser[section]
                fits[section[4:]] = FitSettings(
                    model=FitModel(s.get("model", "inverse").strip()).value,
                    beta_min=float(s.get("beta_min", 0)),
                    min_points=int(s["min_points"]) if "min_points" in s else None,
                )
        return ScanConfig(
            base=base,
            betas=_floats(scan["betas"]) if "betas" in scan else DEFAULT_BETAS,
            h_x=float(model.get("h_x", 1.0)),
            observables=tuple(x.strip() for x in scan.get("observables", "energy, magnetization").split(",")),
            output_dir=out,
            workers=int(scan.get("workers", 1)),
            hamiltonian_file=ham or None,
            n_discard=n_discard if n_discard == "auto" else int(n_discard),
            fits=fits,
        )
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _extra_observables(scan, n_qubits):
    extra = []
    for name in scan.observables[1:]:
        if name != "magnetization":
            raise ConfigError(f"unknown observable {name!r}")
        extra.append(magnetization(n_qubits))
    return extra


def _run_one(job):
    cfg, h, extra, stem, out_dir = job
    record = run_chain(cfg, h, extra)
    out_dir = Path(out_dir)
    write_chain_csv(record, out_dir / f"{stem}.csv")
    write_metadata(record, out_dir / f"{stem}.json")
    (out_dir / f"{stem}.layer").write_text(layer_to_text(record.final_layer))
    return record.acceptance_rate


def _worker_count(scan):
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return scan.workers


def run_scan(scan: ScanConfig, workers: int | None = None) -> Path:
    """Run one chain per beta and write the per-beta files plus ``manifest.json``.

    The manifest holds no timing so that reruns are byte-identical; see
    :func:`cmd_run` for the wall-time report.
    """
    try:
        h = scan.hamiltonian()
    except ValueError as exc:
        raise ConfigError(f"bad hamiltonian file {scan.hamiltonian_file}: {exc}") from exc
    if h.n_qubits != scan.base.n_qubits:
        raise ConfigError(f"hamiltonian acts on {h.n_qubits} qubits, chain has {scan.base.n_qubits}")
    extra = _extra_observables(scan, scan.base.n_qubits)
    out = Path(scan.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(scan.chain_config(i), h, extra, f"beta_{i:02d}", str(out)) for i in range(len(scan.betas))]
    workers = workers or _worker_count(scan)
    if workers == 1:
        rates = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rates = list(pool.map(_run_one, jobs))
    (out / "hamiltonian.txt").write_text(format_observable(h))
    manifest = {
        "version": __version__,
        "n_qubits": scan.base.n_qubits,
        "h_x": scan.h_x,
        "observables": list(scan.observables),
        "n_discard": scan.n_discard,
        "hamiltonian": "hamiltonian.txt",
        "entries": [
            {
                "beta": cfg.beta,
                "seed": cfg.seed,
                "csv": f"{stem}.csv",
                "metadata": f"{stem}.json",
                "layer": f"{stem}.layer",
                "acceptance_rate": rate,
            }
            for (cfg, _, _, stem, _), rate in zip(jobs, rates)
        ],
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def analyze_manifest(manifest_path) -> Path:
    """Trim, bin and jackknife every (beta, observable) series into ``estimates.csv``."""
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    root = manifest_path.parent
    rows = []
    for entry in manifest["entries"]:
        csv_path = root / entry["csv"]
        if not csv_path.exists():
            raise FileNotFoundError(f"missing series for beta={entry['beta']}: {csv_path}")
        with open(csv_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            data = [row for row in reader if row]
        if header is None or header[0] != "sweep":
            raise ValueError(f"{csv_path}: bad header {header}")
        for name in manifest["observables"]:
            if name not in header:
                raise ValueError(f"{csv_path}: no column {name!r}")
            col = header.index(name)
            series = np.array([float(r[col]) for r in data])
            if not np.all(np.isfinite(series)):
                raise ValueError(f"{csv_path}: non-finite values in {name}")
            est = estimate_series(series, manifest.get("n_discard", "auto"))
            rows.append((entry["beta"], name, est))
    out = root / "estimates.csv"
    lines = [",".join(ESTIMATE_HEADER)]
    for beta, name, e in rows:
        lines.append(
            f"{beta:.17g},{name},{e.mean:.17g},{e.error:.17g},{e.bin_size},{e.n_bins},{e.n_discarded}"
        )
    out.write_text("\n".join(lines) + "\n")
    return out


def read_estimates(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != ESTIMATE_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            {
                "beta": float(r["beta"]),
                "observable": r["observable"],
                "mean": float(r["mean"]),
                "error": float(r["error"]),
                "bin_size": int(r["bin_size"]),
                "n_bins": int(r["n_bins"]),
                "n_discarded": int(r["n_discarded"]),
            }
            for r in reader
        ]


def _alternate_models(model):
    # every other fit form counts toward the fit-choice systematic
    return [m for m in FitModel if m is not model]


def fit_observable(estimates_path, observable: str, model="inverse", min_points: int | None = None,
                   beta_min: float = 0.0):
    """Primary fit, range-scan and alternate-model variants, and the error budget.

    Returns ``(primary, variants, budget, report_text)`` and writes
    ``fit_<observable>.json`` / ``.txt`` next to the estimates file.
    """
    estimates_path = Path(estimates_path)
    rows = read_estimates(estimates_path)
    all_betas = sorted({r["beta"] for r in rows})
    mine = [r for r in rows if r["observable"] == observable]
    have = sorted(r["beta"] for r in mine)
    if have != all_betas:
        missing = sorted(set(all_betas) - set(have))
        raise LookupError(f"observable {observable!r} missing at beta {missing}")
    model = FitModel(model)
    if min_points is None:
        min_points = model.n_params + 1
    points = [FitPoint(r["beta"], r["mean"], r["error"]) for r in mine if r["beta"] >= beta_min]
    if len(points) <= model.n_params or len(points) < min_points:
        raise ValueError(
            f"{len(points)} points with beta >= {beta_min} are too few for a {model.value} fit "
            f"with min_points={min_points}"
        )
    scan = fit_range_scan(points, model, min_points)
    primary, variants = scan[0], scan[1:]
    for alt in _alternate_models(model):
        if len(points) > alt.n_params:
            variants.append(fit(points, alt))
    if not variants:
        raise ValueError("no variant fits available for a systematic error; lower min_points")
    budget = asymptote_budget(primary, variants)
    report = format_report(primary, variants, budget, label=f"observable {observable}")
    stem = estimates_path.parent / f"fit_{observable}"
    payload = {
        "observable": observable,
        "primary": primary.to_dict(),
        "variants": [v.to_dict() for v in variants],
        "budget": budget.to_dict(),
    }
    Path(f"{stem}.json").write_text(json.dumps(payload, indent=2) + "\n")
    Path(f"{stem}.txt").write_text(report)
    return primary, variants, budget, report


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def cmd_run(config_path, workers: int | None = None) -> int:
    try:
        scan = load_config(config_path)
    except ConfigError as exc:
        _err(exc)
        return EXIT_CONFIG
    start = time.perf_counter()
    try:
        path = run_scan(scan, workers)
    except ConfigError as exc:
        _err(exc)
        return EXIT_CONFIG
    except OSError as exc:
        _err(exc)
        return EXIT_IO
    print(f"wrote {path} (wall time {time.perf_counter() - start:.1f} s)")
    return EXIT_OK


def cmd_analyze(manifest_path) -> int:
    try:
        path = analyze_manifest(manifest_path)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        _err(exc)
        return EXIT_SERIES
    print(f"wrote {path}")
    return EXIT_OK


def cmd_fit(estimates_path, observable: str, model: str = "inverse", min_points: int | None = None,
            beta_min: float = 0.0) -> int:
    try:
        _, _, _, report = fit_observable(estimates_path, observable, model, min_points, beta_min)
    except (OSError, LookupError) as exc:
        _err(exc)
        return EXIT_SERIES
    except FitError as exc:
        _err(exc)
        return EXIT_SINGULAR
    except ValueError as exc:
        _err(exc)
        return EXIT_POINTS
    print(report, end="")
    return EXIT_OK


def cmd_oracle(n_qubits: int, h_x: float) -> int:
    if not 2 <= n_qubits <= 12:
        _err(f"n_qubits must be in [2, 12], got {n_qubits}")
        return EXIT_CONFIG
    h = ising_hamiltonian(IsingParams(n_qubits, h_x))
    e0, _ = ground_state(h)
    print(f"E0 = {e0!r}")
    try:
        m = ground_state_expectation(h, magnetization(n_qubits))
    except DegenerateGroundStateError as exc:
        _err(exc)
        return EXIT_DEGENERATE
    print(f"<M> = {m!r}")
    return EXIT_OK


def cmd_pipeline(config_path, workers: int | None = None) -> int:
    """``run`` + ``analyze`` + ``fit`` for every observable with a ``[fit.<name>]`` section."""
    try:
        scan = load_config(config_path)
    except ConfigError as exc:
        _err(exc)
        return EXIT_CONFIG
    code = cmd_run(config_path, workers)
    if code:
        return code
    code = cmd_analyze(Path(scan.output_dir) / "manifest.json")
    if code:
        return code
    for name in scan.observables:
        s = scan.fits.get(name, FitSettings())
        code = cmd_fit(Path(scan.output_dir) / "estimates.csv", name, s.model, s.min_points, s.beta_min)
        if code:
            return code
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gatemc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one chain per beta")
    r.add_argument("config")
    r.add_argument("--workers", type=int)

    a = sub.add_parser("analyze", help="jackknife estimates from a run manifest")
    a.add_argument("manifest")

    f = sub.add_parser("fit", help="extrapolate one observable to beta -> infinity")
    f.add_argument("estimates")
    f.add_argument("--observable", required=True)
    f.add_argument("--model", choices=[m.value for m in FitModel], default="inverse")
    f.add_argument("--min-points", type=int, default=None,
                   help="smallest fit-range suffix (default: parameter count + 1)")
    f.add_argument("--beta-min", type=float, default=0.0)

    o = sub.add_parser("oracle", help="exact ground-state energy and magnetization")
    o.add_argument("--qubits", type=int, required=True)
    o.add_argument("--hx", type=float, required=True)

    pl = sub.add_parser("pipeline", help="run + analyze + fit")
    pl.add_argument("config")
    pl.add_argument("--workers", type=int)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.workers)
    if args.command == "analyze":
        return cmd_analyze(args.manifest)
    if args.command == "fit":
        return cmd_fit(args.estimates, args.observable, args.model, args.min_points, args.beta_min)
    if args.command == "oracle":
        return cmd_oracle(args.qubits, args.hx)
    return cmd_pipeline(args.config, args.workers)


if __name__ == "__main__":
    sys.exit(main())

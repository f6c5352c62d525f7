"""Weighted least-squares fits in 1/beta and the beta -> infinity asymptote.

Three forms are supported::

    inverse    A / beta + B
    power      A / beta**C + B
    quadratic  D / beta + E / beta**2 + F

The constant term (B or F) is the asymptote.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FitError",
    "FitModel",
    "FitPoint",
    "FitResult",
    "AsymptoteBudget",
    "fit",
    "fit_range_scan",
    "asymptote_budget",
    "format_report",
]

POWER_GRID = np.geomspace(0.1, 4.0, 40)
GOLDEN_RTOL = 1e-6
GOLDEN_MAXITER = 200
SINGULAR_COND = 1e13


class FitError(RuntimeError):
    """Singular normal equations or a refinement that failed to converge."""


class FitModel(enum.Enum):
    INVERSE = "inverse"
    POWER = "power"
    QUADRATIC = "quadratic"

    @property
    def param_names(self) -> tuple:
        return {
            FitModel.INVERSE: ("A", "B"),
            FitModel.POWER: ("A", "B", "C"),
            FitModel.QUADRATIC: ("D", "E", "F"),
        }[self]

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    @property
    def constant_name(self) -> str:
        return "F" if self is FitModel.QUADRATIC else "B"


@dataclass(frozen=True)
class FitPoint:
    beta: float
    value: float
    error: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.error > 0:
            raise ValueError(f"error must be positive (weights are 1/error^2), got {self.error}")


@dataclass
class FitResult:
    model: FitModel
    params: dict
    covariance: np.ndarray
    chi2: float
    dof: int
    betas: tuple = field(default=())

    @property
    def chi2_dof(self) -> float:
        return self.chi2 / self.dof

    @property
    def asymptote(self) -> float:
        return self.params[self.model.constant_name]

    @property
    def asymptote_stat_error(self) -> float:
        i = self.model.param_names.index(self.model.constant_name)
        return float(np.sqrt(self.covariance[i, i]))

    def param_errors(self) -> dict:
        return dict(zip(self.model.param_names, np.sqrt(np.diag(self.covariance))))

    def __call__(self, beta):
        return _evaluate(self.model, self.params, np.asarray(beta, dtype=float))

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "params": self.params,
            "param_errors": {k: float(v) for k, v in self.param_errors().items()},
            "covariance": self.covariance.tolist(),
            "chi2": self.chi2,
            "dof": self.dof,
            "chi2_dof": self.chi2_dof,
            "asymptote": self.asymptote,
            "asymptote_stat_error": self.asymptote_stat_error,
            "betas": list(self.betas),
        }


@dataclass(frozen=True)
class AsymptoteBudget:
    central: float
    stat_error: float
    syst_error: float

    @property
    def total_error(self) -> float:
        return math.hypot(self.stat_error, self.syst_error)

    def to_dict(self) -> dict:
        return {
            "central": self.central,
            "stat_error": self.stat_error,
            "syst_error": self.syst_error,
            "total_error": self.total_error,
        }


def _evaluate(model, p, beta):
    if model is FitModel.INVERSE:
        return p["A"] / beta + p["B"]
    if model is FitModel.POWER:
        return p["A"] * beta ** -p["C"] + p["B"]
    return p["D"] / beta + p["E"] / beta ** 2 + p["F"]


def _arrays(points):
    b = np.array([p.beta for p in points], dtype=float)
    y = np.array([p.value for p in points], dtype=float)
    w = 1.0 / np.array([p.error for p in points], dtype=float) ** 2
    return b, y, w


def _solve_weighted(x, y, w):
    """Weighted normal equations.  Returns (coefficients, inverse normal matrix, chi2)."""
    normal = x.T @ (w[:, None] * x)
    rhs = x.T @ (w * y)
    if not np.all(np.isfinite(normal)) or np.linalg.cond(normal) > SINGULAR_COND:
        raise FitError("singular normal equations (duplicate or degenerate beta values?)")
    coef = np.linalg.solve(normal, rhs)
    r = y - x @ coef
    return coef, np.linalg.inv(normal), float(np.sum(w * r * r))


def _power_subproblem(b, y, w, c):
    x = np.column_stack([b ** -c, np.ones_like(b)])
    return _solve_weighted(x, y, w)


def _golden(f, lo, hi):
    g = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - g * (hi - lo), lo + g * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(GOLDEN_MAXITER):
        if hi - lo <= GOLDEN_RTOL * abs(lo + hi) / 2:
            return (lo + hi) / 2
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = f(x2)
    raise FitError(f"golden-section refinement did not converge in {GOLDEN_MAXITER} iterations")


def _fit_power(b, y, w):
    chi2 = [_power_subproblem(b, y, w, c)[2] for c in POWER_GRID]
    k = int(np.argmin(chi2))
    lo = POWER_GRID[max(k - 1, 0)]
    hi = POWER_GRID[min(k + 1, len(POWER_GRID) - 1)]
    c = _golden(lambda c: _power_subproblem(b, y, w, c)[2], lo, hi)
    (a, const), _, chi2_min = _power_subproblem(b, y, w, c)
    # Gauss-Newton curvature in (A, B, C)
    bc = b ** -c
    jac = np.column_stack([bc, np.ones_like(b), -a * bc * np.log(b)])
    curv = jac.T @ (w[:, None] * jac)
    if np.linalg.cond(curv) > SINGULAR_COND:
        raise FitError("singular curvature matrix in power-law fit")
    return {"A": float(a), "B": float(const), "C": float(c)}, np.linalg.inv(curv), chi2_min


def fit(points, model) -> FitResult:
    """Minimize ``sum((value - f(beta))**2 / error**2)`` for one of the three forms.

    Linear forms are solved in closed form.  The power law scans ``C`` over a
    logarithmic grid on [0.1, 4] and refines the best grid point by
    golden-section search.  The covariance is the inverse curvature of chi^2/2.
    """
    model = FitModel(model)
    points = list(points)
    if len(points) <= model.n_params:
        raise ValueError(f"{model.value} fit needs more than {model.n_params} points, got {len(points)}")
    b, y, w = _arrays(points)
    if len(np.unique(b)) != len(b):
        raise FitError("duplicate beta values")
    if model is FitModel.POWER:
        params, cov, chi2 = _fit_power(b, y, w)
    else:
        cols = [1 / b, np.ones_like(b)] if model is FitModel.INVERSE else [1 / b, 1 / b ** 2, np.ones_like(b)]
        coef, cov, chi2 = _solve_weighted(np.column_stack(cols), y, w)
        params = {n: float(v) for n, v in zip(model.param_names, coef)}
    return FitResult(model, params, cov, chi2, len(points) - model.n_params, tuple(sorted(b)))


def fit_range_scan(points, model, min_points: int) -> list:
    """Fit every suffix of the beta-sorted points with at least ``min_points`` points.

    The first result uses all points; each following one drops the next
    smallest beta.
    """
    model = FitModel(model)
    if min_points <= model.n_params:
        raise ValueError(f"min_points must exceed the {model.n_params} parameters of {model.value}")
    pts = sorted(points, key=lambda p: p.beta)
    if len(pts) < min_points:
        raise ValueError(f"only {len(pts)} points, fewer than min_points={min_points}")
    return [fit(pts[start:], model) for start in range(len(pts) - min_points + 1)]


def asymptote_budget(primary: FitResult, variants) -> AsymptoteBudget:
    """Central value and statistical error from ``primary``; systematic = max shift over ``variants``."""
    variants = list(variants)
    if not variants:
        raise ValueError("need at least one variant fit for the systematic error")
    central = primary.asymptote
    syst = max(abs(v.asymptote - central) for v in variants)
    return AsymptoteBudget(central, primary.asymptote_stat_error, float(syst))


def format_report(primary: FitResult, variants, budget: AsymptoteBudget, label: str = "") -> str:
    lines = []
    if label:
        lines.append(label)
    lines.append(f"model      {primary.model.value}")
    lines.append(f"betas      {', '.join(f'{b:g}' for b in primary.betas)}")
    errs = primary.param_errors()
    for name in primary.model.param_names:
        lines.append(f"  {name} = {primary.params[name]: .6g} +/- {errs[name]:.3g}")
    lines.append(f"chi2/dof   {primary.chi2_dof:.4g}  (dof {primary.dof})")
    for v in variants:
        lines.append(
            f"  variant {v.model.value:<9} betas {v.betas[0]:g}..{v.betas[-1]:g}: "
            f"asymptote {v.asymptote:.6g}  chi2/dof {v.chi2_dof:.3g}"
        )
    lines.append(
        f"asymptote  {budget.central:.6g} +/- {budget.stat_error:.3g} (stat) "
        f"+/- {budget.syst_error:.3g} (syst) = +/- {budget.total_error:.3g} (total)"
    )
    return "\n".join(lines) + "\n"

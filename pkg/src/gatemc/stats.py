"""Equilibration cut, binning and leave-one-bin-out jackknife errors."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SeriesEstimate",
    "BinSizeWarning",
    "trim_equilibration",
    "jackknife",
    "bin_size_scan",
    "estimate_series",
]

SATURATION_TOLERANCE = 0.05
MIN_SCAN_BINS = 16
MIN_SCAN_LENGTH = 64


class BinSizeWarning(UserWarning):
    """The jackknife error never levelled off over the scanned bin sizes."""


@dataclass(frozen=True)
class SeriesEstimate:
    mean: float
    error: float
    bin_size: int
    n_bins: int
    n_discarded: int = 0


def trim_equilibration(series, n_discard="auto") -> np.ndarray:
    """Drop the first ``n_discard`` samples; ``"auto"`` drops the first 20%."""
    series = np.asarray(series, dtype=float)
    if n_discard == "auto":
        n_discard = len(series) // 5
    if not 0 <= n_discard < len(series):
        raise ValueError(f"cannot discard {n_discard} of {len(series)} samples")
    return series[n_discard:]


def _bin_means(series, bin_size):
    n_bins = len(series) // bin_size
    return series[: n_bins * bin_size].reshape(n_bins, bin_size).mean(axis=1)


def jackknife(series, bin_size: int = 1) -> SeriesEstimate:
    """Mean and single-elimination jackknife error of the mean.

    The series is cut into ``len // bin_size`` bins (the tail remainder is
    dropped) and each bin is left out in turn.
    """
    series = np.asarray(series, dtype=float)
    if bin_size < 1:
        raise ValueError(f"bin_size must be >= 1, got {bin_size}")
    n = len(series) // bin_size
    if n < 2:
        raise ValueError(f"need at least 2 complete bins, got {n} (length {len(series)}, bin size {bin_size})")
    bins = _bin_means(series, bin_size)
    mean = bins.mean()
    if np.ptp(bins) == 0:
        return SeriesEstimate(float(mean), 0.0, bin_size, n)
    loo = (bins.sum() - bins) / (n - 1)
    err = np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2))
    return SeriesEstimate(float(mean), float(err), bin_size, n)


def bin_size_scan(series, return_errors: bool = False):
    """Pick the bin size at which the jackknife error stops growing.

    Bin sizes 1, 2, 4, ... are tried while at least 16 bins remain.  The
    smallest size whose error differs by less than 5% from the next doubling
    is returned.  If none qualifies the largest scanned size is returned and
    a :class:`BinSizeWarning` is issued.
    """
    series = np.asarray(series, dtype=float)
    if len(series) < MIN_SCAN_LENGTH:
        raise ValueError(f"bin size scan needs at least {MIN_SCAN_LENGTH} samples, got {len(series)}")
    sizes = []
    b = 1
    while len(series) // b >= MIN_SCAN_BINS:
        sizes.append(b)
        b *= 2
    errors = [jackknife(series, s).error for s in sizes]
    chosen = None
    for s, e, e_next in zip(sizes, errors, errors[1:]):
        if e == e_next or (e > 0 and abs(e_next - e) / e < SATURATION_TOLERANCE):
            chosen = s
            break
    if chosen is None:
        chosen = sizes[-1]
        warnings.warn(
            f"jackknife error did not saturate up to bin size {chosen}", BinSizeWarning, stacklevel=2
        )
    if return_errors:
        return chosen, dict(zip(sizes, errors))
    return chosen


def estimate_series(series, n_discard="auto") -> SeriesEstimate:
    """Trim, scan bin sizes and jackknife at the chosen size."""
    raw = np.asarray(series, dtype=float)
    trimmed = trim_equilibration(raw, n_discard)
    bin_size = bin_size_scan(trimmed)
    est = jackknife(trimmed, bin_size)
    return SeriesEstimate(est.mean, est.error, est.bin_size, est.n_bins, len(raw) - len(trimmed))

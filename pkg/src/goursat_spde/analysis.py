"""Post-processing of computed fields: errors, peaks, plan-view masks, covariances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .grid import ScalarField

RELATIVE_FLOOR = 1e-12
DEFAULT_PROMINENCE = 0.10


@dataclass(frozen=True, eq=False)
class ErrorReport:
    max_abs_rel_error: float
    argmax_site: tuple[float, float]
    error_field: ScalarField | None = None


def relative_error(*, numeric: ScalarField, exact: ScalarField, keep_field: bool = False) -> ErrorReport:
    """Pointwise |numeric - exact| / max(|exact|, floor) and its maximum.

    Keyword-only so the exact field cannot end up as the numerator by accident.
    """
    if numeric.spec != exact.spec:
        raise ValueError(f"grid mismatch: {numeric.spec} vs {exact.spec}")
    err = np.abs(numeric.values - exact.values) / np.maximum(np.abs(exact.values), RELATIVE_FLOOR)
    k = np.unravel_index(np.nanargmax(err), err.shape)
    return ErrorReport(
        max_abs_rel_error=float(err[k]),
        argmax_site=numeric.spec.coord(*k),
        error_field=ScalarField(numeric.spec, err) if keep_field else None,
    )


def count_peaks(values, min_prominence: float | None = None, relative: bool = True) -> int:
    """Number of interior local maxima with at least the given prominence.

    With ``relative=True`` (default) ``min_prominence`` is a fraction of the
    slice range, defaulting to 10%; otherwise it is absolute. Flat-topped
    maxima count once.
    """
    y = np.asarray(values, dtype=float)
    if y.ndim != 1 or y.size < 3:
        raise ValueError("need a 1-d sequence of at least 3 values")
    if min_prominence is None:
        min_prominence = DEFAULT_PROMINENCE
        relative = True
    threshold = min_prominence * float(np.ptp(y)) if relative else float(min_prominence)
    if np.ptp(y) == 0:
        return 0
    peaks, _ = find_peaks(y, prominence=max(threshold, np.finfo(float).tiny))
    return int(peaks.size)


def threshold_indicator(field: ScalarField, a: float) -> np.ndarray:
    """1 where the field is at least ``a``, 0 elsewhere (NaN counts as below)."""
    with np.errstate(invalid="ignore"):
        return (field.values >= a).astype(np.int8)


def sheet_covariance(w_p, w_q) -> float:
    """Sample covariance (n - 1 denominator) of paired per-trial values."""
    w_p = np.asarray(w_p, dtype=float)
    w_q = np.asarray(w_q, dtype=float)
    if w_p.shape != w_q.shape or w_p.ndim != 1:
        raise ValueError("need two equal-length 1-d samples")
    if w_p.size < 2:
        raise ValueError(f"need at least 2 trials, got {w_p.size}")
    return float(np.cov(w_p, w_q, ddof=1)[0, 1])


def sheet_covariance_exact(sigma: float, p, q) -> float:
    """sigma^2 min(x_p, x_q) min(t_p, t_q)."""
    return sigma**2 * min(p[0], q[0]) * min(p[1], q[1])

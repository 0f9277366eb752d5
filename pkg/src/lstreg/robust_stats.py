"""Median, MAD and residual outlyingness.

MAD is the raw median of absolute deviations (no 1.4826 consistency
factor).  When at least ``(n + 1) // 2`` entries are exactly equal the MAD
is defined to be 1, so that a majority of identical values, which sit at
the deepest position, gets outlyingness 0 instead of 0/0.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation, DegenerateScaleError


def _as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise ContractViolation("empty input")
    return v


def _median_of_sorted(s: np.ndarray) -> float:
    n = s.shape[0]
    m = n // 2
    if n % 2:
        return float(s[m])
    return float((s[m - 1] + s[m]) / 2)


def _max_multiplicity_sorted(s: np.ndarray) -> int:
    if s.shape[0] == 1:
        return 1
    # run boundaries of equal values in the sorted vector
    change = np.flatnonzero(s[1:] != s[:-1])
    bounds = np.concatenate(([0], change + 1, [s.shape[0]]))
    return int(np.diff(bounds).max())


def median(v) -> float:
    """Middle order statistic; mean of the two middle ones for even length."""
    v = _as_vector(v)
    n = v.shape[0]
    m = n // 2
    if n % 2:
        return float(np.partition(v, m)[m])
    part = np.partition(v, (m - 1, m))
    return float((part[m - 1] + part[m]) / 2)


def majority_identical(v) -> bool:
    """True when at least ``(n + 1) // 2`` entries are exactly equal."""
    s = np.sort(_as_vector(v))
    return _max_multiplicity_sorted(s) >= (s.shape[0] + 1) // 2


def _center_scale(v: np.ndarray) -> tuple[float, float, bool]:
    s = np.sort(v)
    n = s.shape[0]
    med = _median_of_sorted(s)
    if _max_multiplicity_sorted(s) >= (n + 1) // 2:
        return med, 1.0, True
    dev = np.sort(np.abs(v - med))
    return med, _median_of_sorted(dev), False


def mad(v) -> float:
    """Median absolute deviation from the median, with the majority rule."""
    _, scale, _ = _center_scale(_as_vector(v))
    return scale


def outlyingness(v, beta=None) -> np.ndarray:
    """``|v_i - median(v)| / mad(v)`` for every entry.

    ``beta`` is only attached to a :class:`DegenerateScaleError` so the
    caller can tell which candidate produced the zero scale.
    """
    v = _as_vector(v)
    med, scale, _ = _center_scale(v)
    if scale == 0.0:
        raise DegenerateScaleError(
            "MAD is zero but no majority of identical values", beta=beta)
    return np.abs(v - med) / scale

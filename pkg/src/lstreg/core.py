"""Shared domain types: datasets, fits and residual evaluation.

Coefficient vectors are plain 1-d float arrays of length ``p`` with the
intercept in slot 0 and the slopes after it.  Row indices are 0-based.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import ContractViolation

METHODS = ("LS", "LST", "LTS")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n`` observations ``(x_i, y_i)`` with ``x_i`` of length ``p - 1``.

    Arrays are copied and made read-only, so a Dataset can be shared freely
    between workers.
    """

    X: np.ndarray
    y: np.ndarray
    design: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or y.ndim != 1:
            raise ContractViolation("X must be 2-d (n, p-1) and y 1-d (n,)")
        if X.shape[0] != y.shape[0]:
            raise ContractViolation(
                f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if y.shape[0] < 1:
            raise ContractViolation("a dataset needs at least one row")
        if X.shape[1] < 1:
            raise ContractViolation("at least one predictor is required (p >= 2)")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ContractViolation("dataset values must be finite")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        W = np.empty((X.shape[0], X.shape[1] + 1))
        W[:, 0] = 1.0
        W[:, 1:] = X
        object.__setattr__(self, "design", _frozen(W))

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[Sequence[float], float]]) -> "Dataset":
        """Build from ``[(x, y), ...]`` pairs; scalar ``x`` means one predictor."""
        if len(rows) == 0:
            raise ContractViolation("a dataset needs at least one row")
        xs = [np.atleast_1d(np.asarray(x, dtype=float)) for x, _ in rows]
        widths = {len(x) for x in xs}
        if len(widths) != 1:
            raise ContractViolation("all predictor vectors must share one length")
        return cls(np.vstack(xs), np.array([y for _, y in rows], dtype=float))

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1] + 1

    def subset(self, index) -> "Dataset":
        index = np.asarray(index)
        return Dataset(self.X[index], self.y[index])

    def digest(self) -> str:
        """Content hash, used to check that replications draw fresh data."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.X).tobytes())
        h.update(np.ascontiguousarray(self.y).tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.X.shape == other.X.shape
                and np.array_equal(self.X, other.X)
                and np.array_equal(self.y, other.y))

    __hash__ = None


def check_beta(d: Dataset, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (d.p,):
        raise ContractViolation(
            f"coefficient vector has shape {beta.shape}, expected ({d.p},)")
    if not np.isfinite(beta).all():
        raise ContractViolation("coefficient vector must be finite")
    return beta


def residuals(d: Dataset, beta) -> np.ndarray:
    """``r_i = y_i - (1, x_i) . beta`` for every row."""
    beta = check_beta(d, beta)
    return d.y - d.design @ beta


@dataclass(frozen=True, eq=False)
class TrimmedFit:
    """A fitted coefficient vector with the rows it was fitted on.

    ``objective`` is the sum of squared residuals of ``beta`` over
    ``retained``.  ``diagnostics`` carries method-specific counters.
    """

    beta: np.ndarray
    retained: np.ndarray
    objective: float
    method: str
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ContractViolation(f"unknown method tag {self.method!r}")
        object.__setattr__(self, "beta", _frozen(self.beta))
        retained = np.array(self.retained, dtype=np.intp, copy=True)
        retained.setflags(write=False)
        object.__setattr__(self, "retained", retained)
        object.__setattr__(self, "objective", float(self.objective))

    def recompute_objective(self, d: Dataset) -> float:
        r = residuals(d, self.beta)[self.retained]
        return float(r @ r)

    def summary(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "beta": [float(b) for b in self.beta],
            "objective": self.objective,
            "retained_size": int(self.retained.size),
            "retained": [int(i) for i in self.retained],
            "diagnostics": dict(self.diagnostics),
        }

"""Least squares on all rows or on a subset of rows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, TrimmedFit
from .errors import ContractViolation

# singular values below RCOND * s_max count as zero
RCOND = 1e-10


@dataclass(frozen=True, eq=False)
class LsSolution:
    beta: np.ndarray
    ss: float
    rank_deficient: bool
    rank: int


def solve_ls(W: np.ndarray, y: np.ndarray) -> LsSolution:
    """SVD-based solve of ``min ||y - W b||``; minimum-norm if rank deficient."""
    beta, _, rank, _ = np.linalg.lstsq(W, y, rcond=RCOND)
    r = y - W @ beta
    return LsSolution(beta=beta, ss=float(r @ r),
                      rank_deficient=bool(rank < W.shape[1]), rank=int(rank))


def ls_fit(d: Dataset, subset=None) -> LsSolution:
    """Fit by least squares on the rows in ``subset`` (all rows if None)."""
    if subset is None:
        return solve_ls(d.design, d.y)
    subset = np.asarray(subset, dtype=np.intp)
    if subset.size == 0:
        raise ContractViolation("least squares needs a non-empty subset")
    return solve_ls(d.design[subset], d.y[subset])


def ls_estimate(d: Dataset) -> TrimmedFit:
    """The LS comparator packaged like the robust fits."""
    sol = ls_fit(d)
    return TrimmedFit(beta=sol.beta, retained=np.arange(d.n), objective=sol.ss,
                      method="LS", diagnostics={"rank_deficient": sol.rank_deficient})

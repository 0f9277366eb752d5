"""Least trimmed squares comparator.

Random elemental starts followed by concentration steps: fit, keep the
``h`` rows with the smallest squared residuals, refit on them.  All starts
advance together as one batch of small least-squares problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Dataset, TrimmedFit, check_beta, residuals
from .errors import ConfigurationError, ContractViolation, DegenerateDesignError
from .ols import RCOND

MAX_REDRAWS = 100


def default_h(n: int, p: int) -> int:
    return min(n, (n + p + 1) // 2)


def _check_h(n: int, h: int) -> None:
    if not (-(-n // 2) <= h <= n):
        raise ContractViolation(f"h={h} outside [ceil(n/2), n] = [{-(-n // 2)}, {n}]")


@dataclass(frozen=True)
class LtsConfig:
    h: Optional[int] = None
    starts: int = 500
    csteps: int = 10
    seed: Optional[int] = None

    def __post_init__(self):
        if self.starts < 1:
            raise ConfigurationError(f"starts must be >= 1, got {self.starts}")
        if self.csteps < 1:
            raise ConfigurationError(f"csteps must be >= 1, got {self.csteps}")

    def coverage(self, n: int, p: int) -> int:
        h = default_h(n, p) if self.h is None else int(self.h)
        try:
            _check_h(n, h)
        except ContractViolation as exc:
            raise ConfigurationError(str(exc)) from None
        return h


def lts_objective(d: Dataset, beta, h: int) -> float:
    """Sum of the ``h`` smallest squared residuals."""
    _check_h(d.n, h)
    r2 = residuals(d, check_beta(d, beta)) ** 2
    return float(np.partition(r2, h - 1)[:h].sum())


def _batched_ls(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm least squares for a stack ``A[s] x = b[s]`` via SVD."""
    pinv = np.linalg.pinv(A, rcond=RCOND)
    return np.einsum("spm,sm->sp", pinv, b)


def _smallest_h(W: np.ndarray, y: np.ndarray, B: np.ndarray, h: int) -> np.ndarray:
    r2 = (y[None, :] - B @ W.T) ** 2
    idx = np.argpartition(r2, h - 1, axis=1)[:, :h]
    return np.sort(idx, axis=1)


def concentration_step(d: Dataset, beta, h: int) -> tuple[np.ndarray, np.ndarray]:
    """One concentration step from ``beta``; returns (new beta, kept rows)."""
    _check_h(d.n, h)
    beta = check_beta(d, beta)
    idx = _smallest_h(d.design, d.y, beta[None, :], h)
    new = _batched_ls(d.design[idx], d.y[idx])[0]
    return new, idx[0]


def _elemental_starts(W, y, starts, rng):
    n, p = W.shape
    idx = np.argsort(rng.random((starts, n)), axis=1)[:, :p]
    for _ in range(MAX_REDRAWS):
        sv = np.linalg.svd(W[idx], compute_uv=False)
        bad = sv[:, -1] <= RCOND * sv[:, 0]
        if not bad.any():
            break
        idx[bad] = np.argsort(rng.random((int(bad.sum()), n)), axis=1)[:, :p]
    else:
        raise DegenerateDesignError(
            f"{int(bad.sum())} elemental subsets still singular after {MAX_REDRAWS} redraws")
    return _batched_ls(W[idx], y[idx])


def lts_fit(d: Dataset, cfg: LtsConfig = LtsConfig(),
            rng: Optional[np.random.Generator] = None) -> TrimmedFit:
    """Multi-start concentration search for the LTS fit.

    Each start fits a random ``p``-subset exactly, then runs up to
    ``cfg.csteps`` concentration steps, stopping early once no start's kept
    set changes.  The start with the smallest trimmed objective wins, ties
    going to the lowest start index.
    """
    n, p = d.n, d.p
    if n <= p:
        raise ContractViolation(f"LTS needs n > p, got n={n}, p={p}")
    h = cfg.coverage(n, p)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    W, y = d.design, d.y

    B = _elemental_starts(W, y, cfg.starts, rng)
    kept = _smallest_h(W, y, B, h)
    steps = 0
    for steps in range(1, cfg.csteps + 1):
        B = _batched_ls(W[kept], y[kept])
        new_kept = _smallest_h(W, y, B, h)
        stable = np.array_equal(new_kept, kept)
        kept = new_kept
        if stable:
            break

    r = y[kept] - np.einsum("shp,sp->sh", W[kept], B)
    obj = np.einsum("sh,sh->s", r, r)
    best = int(np.argmin(obj))
    return TrimmedFit(
        beta=B[best], retained=kept[best], objective=obj[best], method="LTS",
        diagnostics={"h": h, "starts": cfg.starts, "csteps_run": steps,
                     "winning_start": best})

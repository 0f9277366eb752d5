"""Least squares of depth-trimmed residuals (LST).

A residual is kept when its outlyingness ``|r_i - med(r)| / MAD(r)`` is at
most ``alpha``.  The estimator minimizes the sum of squares of the kept
residuals.  The search builds ``2 + 4p`` candidate coefficient vectors
from one random pair of rows, trims the data with each candidate, refits
least squares on the kept rows and keeps the refit with the smallest
residual sum of squares.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Dataset, TrimmedFit, residuals
from .errors import (AllCandidatesSkippedError, ConfigurationError,
                     ContractViolation, DegenerateScaleError,
                     UnsampleableDesignError)
from .ols import ls_fit
from .robust_stats import outlyingness

DEFAULT_ALPHA = 2.5
DEFAULT_DELTA = 0.5


@dataclass(frozen=True)
class LstConfig:
    alpha: float = DEFAULT_ALPHA
    delta: float = DEFAULT_DELTA
    restarts: int = 1
    seed: Optional[int] = None
    # re-trim with the refit until the kept set stops changing; off by default
    iterate: bool = False
    max_iter: int = 50

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ConfigurationError(f"alpha must be >= 1, got {self.alpha}")
        if not (self.delta > 0 and np.isfinite(self.delta)):
            raise ConfigurationError(f"delta must be positive, got {self.delta}")
        if self.restarts < 1:
            raise ConfigurationError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")

    def validate_for(self, n: int) -> None:
        if self.restarts > n * (n - 1) // 2:
            raise ConfigurationError(
                f"restarts={self.restarts} exceeds n(n-1)/2={n * (n - 1) // 2}")


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Candidate coefficient vectors, one per row of ``betas``.

    Rows 0 and 1 are the base vectors (intercept 0 and 1); then come the
    ``+delta``/``-delta`` perturbations of every coordinate of base 0,
    followed by those of base 1.
    """

    betas: np.ndarray
    pair: tuple[int, int]
    component: int

    def __len__(self):
        return self.betas.shape[0]


def index_set(d: Dataset, beta, alpha: float) -> np.ndarray:
    """Rows whose residual outlyingness under ``beta`` is at most ``alpha``."""
    if not alpha >= 1:
        raise ContractViolation(f"alpha must be >= 1, got {alpha}")
    o = outlyingness(residuals(d, beta), beta=beta)
    return np.flatnonzero(o <= alpha)


def objective_q(d: Dataset, beta, alpha: float) -> float:
    """Sum of squared residuals over the depth-retained rows."""
    r = residuals(d, beta)
    keep = index_set(d, beta, alpha)
    return float(r[keep] @ r[keep])


def _sample_pair(X: np.ndarray, rng: np.random.Generator) -> tuple[int, int, int]:
    n = X.shape[0]
    total = n * (n - 1) // 2
    if np.all(X == X[0]):
        raise UnsampleableDesignError(
            "all predictor rows are identical; no slope can be formed")
    tried = set()
    while len(tried) < total:
        i, j = (int(t) for t in rng.choice(n, size=2, replace=False))
        key = (min(i, j), max(i, j))
        if key in tried:
            continue
        tried.add(key)
        differ = np.flatnonzero(X[i] != X[j])
        if differ.size:
            return i, j, int(differ[0])
    raise UnsampleableDesignError(
        f"no row pair with a differing predictor after {total} attempts")


def candidate_betas(d: Dataset, rng: np.random.Generator,
                    delta: float = DEFAULT_DELTA) -> CandidateSet:
    """Build the ``2 + 4p`` candidates from one random pair of rows.

    The pair ``(i, j)`` differs in predictor ``k``; both base vectors carry
    the slope ``(y_i - y_j) / (x_ik - x_jk)`` in that coordinate so that
    ``r_i = r_j`` under either of them.
    """
    if d.n <= 2:
        raise ContractViolation(f"candidate construction needs n > 2, got n={d.n}")
    i, j, k = _sample_pair(d.X, rng)
    p = d.p
    slope = (d.y[i] - d.y[j]) / (d.X[i, k] - d.X[j, k])
    base0 = np.zeros(p)
    base0[k + 1] = slope
    base1 = base0.copy()
    base1[0] = 1.0

    steps = np.zeros((2 * p, p))
    for l in range(p):
        steps[2 * l, l] = delta
        steps[2 * l + 1, l] = -delta
    betas = np.vstack([base0, base1, base0 + steps, base1 + steps])
    return CandidateSet(betas=betas, pair=(i, j), component=k)


def distinct_rows(d: Dataset) -> np.ndarray:
    """Mask selecting the first occurrence of every distinct ``(x, y)`` row."""
    z = np.column_stack([d.X, d.y])
    _, first = np.unique(z, axis=0, return_index=True)
    mask = np.zeros(d.n, dtype=bool)
    mask[first] = True
    return mask


# residual ties are judged up to this multiple of the residuals' magnitude
TIE_RTOL = 1e-10


def has_ties(r: np.ndarray, scale: float = 0.0) -> bool:
    """True when two of the given residuals agree to within rounding error.

    Ties are judged on residual values rather than on outlyingness: for
    even ``n`` the two central residuals are always equidistant from their
    averaged median, and that mirror tie carries no information.  ``scale``
    is the magnitude of the terms the residuals were computed from.
    """
    s = np.sort(r)
    return bool(np.any(s[1:] - s[:-1] <= TIE_RTOL * scale))


def _trim(d: Dataset, beta, alpha: float, distinct: np.ndarray):
    """Kept rows for ``beta``, or None when the candidate must be skipped.

    Duplicated observations share a residual under every ``beta``, so only
    one copy of each takes part in the tie check.
    """
    r = d.y - d.design @ beta
    try:
        o = outlyingness(r, beta=beta)
    except DegenerateScaleError:
        return None, "scale"
    kept = o <= alpha
    scale = max(1.0, float(np.abs(d.y).max() + np.abs(d.design).max() * np.abs(beta).sum()))
    if has_ties(r[kept & distinct], scale):
        return None, "tie"
    return np.flatnonzero(kept), None


def _refit(d: Dataset, keep: np.ndarray, cfg: LstConfig, distinct: np.ndarray):
    sol = ls_fit(d, keep)
    if not cfg.iterate:
        return sol, keep
    for _ in range(cfg.max_iter):
        new_keep, _ = _trim(d, sol.beta, cfg.alpha, distinct)
        if new_keep is None or np.array_equal(new_keep, keep):
            break
        keep = new_keep
        sol = ls_fit(d, keep)
    return sol, keep


def lst_fit(d: Dataset, cfg: LstConfig = LstConfig(),
            rng: Optional[np.random.Generator] = None) -> TrimmedFit:
    """Run the candidate search ``cfg.restarts`` times and keep the best refit.

    Candidates under which two distinct kept observations have equal
    residuals are skipped, as are candidates with a degenerate residual scale.  ``rng``
    overrides ``cfg.seed`` when given.
    """
    if d.n <= 2:
        raise ContractViolation(f"LST needs n > 2, got n={d.n}")
    cfg.validate_for(d.n)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)

    distinct = distinct_rows(d)
    best = None
    best_ss = np.inf
    skipped = {"tie": 0, "scale": 0}
    evaluated = 0
    for restart in range(cfg.restarts):
        cands = candidate_betas(d, rng, cfg.delta)
        for c, beta in enumerate(cands.betas):
            keep, reason = _trim(d, beta, cfg.alpha, distinct)
            if keep is None:
                skipped[reason] += 1
                continue
            evaluated += 1
            sol, keep = _refit(d, keep, cfg, distinct)
            if sol.ss < best_ss:
                best_ss = sol.ss
                best = (sol, keep, restart, c)

    if best is None:
        raise AllCandidatesSkippedError(
            f"all {cfg.restarts * (2 + 4 * d.p)} candidates were skipped "
            f"(ties: {skipped['tie']}, zero scale: {skipped['scale']})")
    sol, keep, restart, c = best
    return TrimmedFit(
        beta=sol.beta, retained=keep, objective=sol.ss, method="LST",
        diagnostics={
            "evaluated": evaluated,
            "skipped_ties": skipped["tie"],
            "skipped_scale": skipped["scale"],
            "winning_restart": restart,
            "winning_candidate": c,
            "rank_deficient": sol.rank_deficient,
        })


"""Monte-Carlo comparison of LS, LST and LTS.

Every replication draws its data and its estimator randomness from
``SeedSequence(seed, spawn_key=(rep, stream))``, so replication ``rep`` is
reproducible on its own and the order in which replications run does not
matter.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import METHODS, Dataset, TrimmedFit
from .errors import ConfigurationError, LstRegError
from .lst import LstConfig, lst_fit
from .lts import LtsConfig, lts_fit
from .ols import ls_estimate

log = logging.getLogger(__name__)

DESIGNS = ("iid", "equicorrelated")
MAX_FAILURE_RATE = 0.01
NA = "NA"

_DATA_STREAM = 0
_CONTAMINATION_STREAM = 1


class StudyAborted(LstRegError):
    """More than 1% of replications failed for some method."""


@dataclass(frozen=True)
class SimulationScenario:
    """One Monte-Carlo cell.

    With ``beta0=None`` the estimates are compared against the zero vector.
    In that case an ``equicorrelated`` design draws the whole ``(x, y)``
    vector from N(0, Sigma) with unit variances and correlation ``rho``,
    and an ``iid`` design uses ``x ~ N(0, I)`` and ``y = e``.  With a given
    ``beta0`` the predictors follow the design and
    ``y = (1, x) . beta0 + e`` with standard normal errors.

    ``point`` is the full ``(x, y)`` replacement vector used for
    contamination; ``None`` means ``(c, ..., c, -c)`` with ``c = 7``.
    """

    n: int
    p: int
    design: str = "equicorrelated"
    rho: float = 0.9
    beta0: Optional[tuple[float, ...]] = None
    rate: float = 0.0
    point: Optional[tuple[float, ...]] = None
    replications: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise ConfigurationError(f"design must be one of {DESIGNS}, got {self.design!r}")
        if self.p < 2:
            raise ConfigurationError(f"p must be >= 2, got {self.p}")
        if self.n < 1:
            raise ConfigurationError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.rate < 0.5:
            raise ConfigurationError(f"contamination rate must be in [0, 0.5), got {self.rate}")
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")
        if self.beta0 is not None:
            object.__setattr__(self, "beta0", tuple(float(b) for b in self.beta0))
            if len(self.beta0) != self.p:
                raise ConfigurationError(f"beta0 has length {len(self.beta0)}, expected p={self.p}")
        if self.point is not None:
            object.__setattr__(self, "point", tuple(float(b) for b in self.point))
            if len(self.point) != self.p:
                raise ConfigurationError(f"replacement point has length {len(self.point)}, expected p={self.p}")
        if self.design == "equicorrelated":
            dim = self.p if self.beta0 is None else self.p - 1
            _cholesky(dim, self.rho)

    @property
    def reference(self) -> np.ndarray:
        return np.zeros(self.p) if self.beta0 is None else np.asarray(self.beta0)

    @property
    def replacement(self) -> np.ndarray:
        if self.point is not None:
            return np.asarray(self.point)
        return outlier_point(self.p, 7.0)

    @property
    def re_mode(self) -> str:
        return "svar" if self.beta0 is None else "emse"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["beta0"] = None if self.beta0 is None else list(self.beta0)
        out["point"] = list(self.replacement)
        return out


def outlier_point(p: int, c: float) -> np.ndarray:
    """``(c, ..., c, -c)`` of length ``p``."""
    pt = np.full(p, float(c))
    pt[-1] = -c
    return pt


def _cholesky(dim: int, rho: float) -> np.ndarray:
    sigma = np.full((dim, dim), float(rho))
    np.fill_diagonal(sigma, 1.0)
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise ConfigurationError(
            f"equicorrelation rho={rho} is not positive definite in dimension {dim}") from None


def _stream(seed: int, rep: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep, stream)))


def _normal(rng, n, dim, design, rho):
    g = rng.standard_normal((n, dim))
    if design == "equicorrelated" and dim > 1:
        return g @ _cholesky(dim, rho).T
    return g


def generate_sample(s: SimulationScenario, rep: int) -> Dataset:
    """Clean data for replication ``rep``."""
    rng = _stream(s.seed, rep, _DATA_STREAM)
    if s.beta0 is None:
        if s.design == "equicorrelated":
            z = _normal(rng, s.n, s.p, s.design, s.rho)
            return Dataset(z[:, :-1], z[:, -1])
        x = rng.standard_normal((s.n, s.p - 1))
        return Dataset(x, rng.standard_normal(s.n))
    x = _normal(rng, s.n, s.p - 1, s.design, s.rho)
    e = rng.standard_normal(s.n)
    beta0 = np.asarray(s.beta0)
    return Dataset(x, beta0[0] + x @ beta0[1:] + e)


def contamination_count(n: int, rate: float) -> int:
    # rounding guards against 0.1 * 30 -> 3.0000000000000004 -> 4
    return math.ceil(round(n * rate, 9))


def contaminate(d: Dataset, rate: float, point, rng: np.random.Generator) -> Dataset:
    """Replace ``ceil(n * rate)`` random rows by ``point`` (x part, then y)."""
    if not 0 <= rate < 1:
        raise ConfigurationError(f"contamination rate must be in [0, 1), got {rate}")
    point = np.asarray(point, dtype=float)
    if point.shape != (d.p,):
        raise ConfigurationError(f"replacement point must have length p={d.p}")
    m = contamination_count(d.n, rate)
    if m == 0:
        return d
    rows = rng.choice(d.n, size=m, replace=False)
    X = d.X.copy()
    y = d.y.copy()
    X[rows] = point[:-1]
    y[rows] = point[-1]
    return Dataset(X, y)


def replicate_dataset(s: SimulationScenario, rep: int) -> Dataset:
    d = generate_sample(s, rep)
    if s.rate > 0:
        d = contaminate(d, s.rate, s.replacement, _stream(s.seed, rep, _CONTAMINATION_STREAM))
    return d


@dataclass(frozen=True)
class MethodConfigs:
    lst: LstConfig = LstConfig()
    lts: LtsConfig = LtsConfig()


def fit_method(method: str, d: Dataset, configs: MethodConfigs = MethodConfigs(),
               rng: Optional[np.random.Generator] = None) -> TrimmedFit:
    if method == "LS":
        return ls_estimate(d)
    if method == "LST":
        return lst_fit(d, configs.lst, rng)
    if method == "LTS":
        return lts_fit(d, configs.lts, rng)
    raise ConfigurationError(f"unknown method {method!r}; choose from {METHODS}")


def _method_rng(seed: int, rep: int, method: str) -> np.random.Generator:
    return _stream(seed, rep, 2 + METHODS.index(method))


def _run_reps(args):
    datasets_fn, seed, reps, methods, configs = args
    out = []
    for rep in reps:
        d = datasets_fn(rep)
        ests, times, errors = {}, {}, {}
        for m in methods:
            rng = _method_rng(seed, rep, m)
            t0 = time.perf_counter()
            try:
                ests[m] = np.asarray(fit_method(m, d, configs, rng).beta)
            except LstRegError as exc:
                ests[m] = None
                errors[m] = f"{type(exc).__name__}: {exc}"
            times[m] = time.perf_counter() - t0
        out.append((rep, ests, times, errors))
    return out


@dataclass
class MetricsRow:
    method: str
    emse: float
    svar: float
    total_time_seconds: float
    re: float
    failures: int = 0


@dataclass
class MetricsTable:
    rows: list[MetricsRow]

    def row(self, method: str) -> MetricsRow:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def __iter__(self):
        return iter(self.rows)

    @staticmethod
    def _fmt(v: float, digits: int = 4) -> str:
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return NA
        return f"{v:.{digits}f}"

    def records(self) -> list[dict]:
        return [{"method": r.method, "EMSE": self._fmt(r.emse), "SVAR": self._fmt(r.svar),
                 "TT": self._fmt(r.total_time_seconds), "RE": self._fmt(r.re),
                 "failures": str(r.failures)} for r in self.rows]

    def to_csv(self, include_time: bool = True) -> str:
        cols = ["method", "EMSE", "SVAR", "TT", "RE", "failures"]
        if not include_time:
            cols.remove("TT")
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(self.records())
        return buf.getvalue()

    def to_text(self) -> str:
        recs = self.records()
        cols = ["method", "EMSE", "SVAR", "TT", "RE"]
        widths = {c: max(len(c), *(len(r[c]) for r in recs)) for c in cols}
        lines = ["  ".join(c.rjust(widths[c]) for c in cols)]
        lines += ["  ".join(r[c].rjust(widths[c]) for c in cols) for r in recs]
        return "\n".join(lines)


def emse(estimates: np.ndarray, reference) -> float:
    """Mean squared distance of the estimates from ``reference``."""
    dev = estimates - np.asarray(reference)[None, :]
    return float(np.einsum("ij,ij->", dev, dev) / estimates.shape[0])


def svar(estimates: np.ndarray) -> float:
    """Squared distance from the mean estimate, divided by ``R - 1``."""
    R = estimates.shape[0]
    if R < 2:
        return float("nan")
    dev = estimates - estimates.mean(axis=0)
    return float(np.einsum("ij,ij->", dev, dev) / (R - 1))


def _ratio(num: float, den: float) -> float:
    if math.isnan(num) or math.isnan(den):
        return float("nan")
    if den == 0:
        return 1.0 if num == 0 else float("inf")
    return num / den


def metrics_table(estimates: dict[str, np.ndarray], reference, re_mode: str,
                  times: dict[str, float], failures: Optional[dict[str, int]] = None
                  ) -> MetricsTable:
    """Aggregate per-method estimates (rows = replications) into metrics.

    ``re_mode`` picks the dispersion used for relative efficiency against
    LS: ``"svar"`` or ``"emse"``.  ``reference=None`` uses each method's
    own mean estimate, as for repeated fits of one real dataset.
    """
    failures = failures or {}
    stats = {}
    for m, est in estimates.items():
        ref = est.mean(axis=0) if reference is None else reference
        stats[m] = (emse(est, ref), svar(est))
    rows = []
    for m, (e, v) in stats.items():
        if "LS" in stats:
            key = 0 if re_mode == "emse" else 1
            re = _ratio(stats["LS"][key], (e, v)[key])
        else:
            re = float("nan")
        rows.append(MetricsRow(m, e, v, times.get(m, 0.0), re, failures.get(m, 0)))
    return MetricsTable(rows)


@dataclass
class StudyResult:
    table: MetricsTable
    estimates: dict[str, np.ndarray]
    reference: Optional[np.ndarray]
    errors: list[tuple[int, str, str]] = field(default_factory=list)

    def squared_deviations(self) -> dict[str, np.ndarray]:
        """Per-replication ``||beta_hat - reference||^2`` for each method."""
        out = {}
        for m, est in self.estimates.items():
            ref = est.mean(axis=0) if self.reference is None else self.reference
            out[m] = ((est - ref[None, :]) ** 2).sum(axis=1)
        return out


class _ScenarioData:
    def __init__(self, s):
        self.s = s

    def __call__(self, rep):
        return replicate_dataset(self.s, rep)


class _FixedData:
    def __init__(self, d):
        self.d = d

    def __call__(self, rep):
        return self.d


def _check_methods(methods):
    methods = tuple(methods)
    for m in methods:
        if m not in METHODS:
            raise ConfigurationError(f"unknown method {m!r}; choose from {METHODS}")
    if len(set(methods)) != len(methods):
        raise ConfigurationError("methods must not repeat")
    return methods


def _execute(datasets_fn, seed, R, methods, configs, workers):
    reps = list(range(R))
    if workers <= 1 or R == 1:
        results = _run_reps((datasets_fn, seed, reps, methods, configs))
    else:
        chunks = [reps[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_reps, [(datasets_fn, seed, c, methods, configs)
                                         for c in chunks if c])
            results = [r for part in parts for r in part]
    results.sort(key=lambda t: t[0])

    times = {m: 0.0 for m in methods}
    errors = []
    raw = {m: [] for m in methods}
    for rep, ests, tms, errs in results:
        for m in methods:
            times[m] += tms[m]
            raw[m].append(ests[m])
        errors.extend((rep, m, msg) for m, msg in errs.items())

    failures = {m: sum(e is None for e in raw[m]) for m in methods}
    for m, k in failures.items():
        if k > MAX_FAILURE_RATE * R:
            first = next(e for e in errors if e[1] == m)
            raise StudyAborted(
                f"{m} failed on {k} of {R} replications (first: rep {first[0]}: {first[2]})")
    for rep, m, msg in errors:
        log.warning("replication %d: %s failed: %s", rep, m, msg)
    estimates = {m: np.array([e for e in raw[m] if e is not None]) for m in methods}
    return estimates, times, failures, errors


def run_study(s: SimulationScenario, methods: Sequence[str] = METHODS,
              configs: MethodConfigs = MethodConfigs(), workers: int = 1) -> StudyResult:
    """Generate, contaminate and fit ``s.replications`` datasets.

    Timing covers only the fits.  Failed fits are left out of that method's
    metrics and counted in ``MetricsRow.failures``; more than 1% failures
    for any method raises :class:`StudyAborted`.
    """
    methods = _check_methods(methods)
    estimates, times, failures, errors = _execute(
        _ScenarioData(s), s.seed, s.replications, methods, configs, workers)
    table = metrics_table(estimates, s.reference, s.re_mode, times, failures)
    return StudyResult(table=table, estimates=estimates, reference=s.reference,
                       errors=errors)


def repeat_fits(d: Dataset, methods: Sequence[str] = METHODS, replications: int = 1000,
                seed: int = 0, configs: MethodConfigs = MethodConfigs(),
                workers: int = 1) -> StudyResult:
    """Fit one dataset ``replications`` times with fresh estimator randomness.

    EMSE is taken around each method's mean estimate and RE is the EMSE
    ratio against LS, so a method that always returns the same fit has
    EMSE 0 and, when LS does too, RE 1.
    """
    methods = _check_methods(methods)
    estimates, times, failures, errors = _execute(
        _FixedData(d), seed, replications, methods, configs, workers)
    table = metrics_table(estimates, None, "emse", times, failures)
    return StudyResult(table=table, estimates=estimates, reference=None, errors=errors)

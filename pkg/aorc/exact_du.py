"""Exact rejection-count distribution and FDR of step-up procedures under Dirac-uniform configurations.

Under a Dirac-uniform configuration the n₁ false-null p-values are 0 and the n₀ true-null
p-values are i.i.d. uniform. A step-up procedure always rejects the zeros, so

    R = n₁ + max{i ≤ n₀ : U_{(i)} ≤ α_{n₁+i:n}}    (max ∅ = 0),

and the law of R follows from boundary non-crossing probabilities of uniform order
statistics. Both directions of the computation are dynamic programs over the count
N(t) of uniforms at or below a bound, with binomial transition kernels evaluated as
log-pmfs. Kernels are truncated to a band outside which the binomial tail is
below double precision.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view
from scipy import stats

from .curves import CriticalValues, RejectionCurveSpec, critical_values, eval_q_bar, ratio_condition_holds
from .errors import ExactEngineError, SizeCapError
from .stepwise import ProcedureKind, StepKind

log = logging.getLogger(__name__)

MAX_EXACT_N = 2000
PMF_TOLERANCE = 1e-10

# binomial tails beyond mean + 10·sd + 12 are below 1e-20
_BAND_SIGMAS = 10.0
_BAND_MARGIN = 12


@dataclass(frozen=True)
class DuConfig:
    """n hypotheses of which n0 are true nulls with uniform p-values; the rest have p ≡ 0."""

    n: int
    n0: int

    def __post_init__(self):
        if self.n < 1:
            raise ExactEngineError(f"n must be a positive integer, got {self.n}")
        if not 0 <= self.n0 <= self.n:
            raise ExactEngineError(f"n0 must lie in 0..{self.n}, got {self.n0}")

    @property
    def n1(self) -> int:
        return self.n - self.n0

    @property
    def zeta(self) -> float:
        return self.n0 / self.n


@dataclass(frozen=True)
class RejectionPmf:
    """probs[k] = P(R = k) for k = 0..n."""

    probs: npt.NDArray[np.float64] = field(repr=False)
    config: DuConfig
    critvals: CriticalValues = field(repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.size != self.config.n + 1:
            raise ExactEngineError(f"pmf needs {self.config.n + 1} entries, got {probs.size}")
        if np.any(probs < 0.0) or abs(math.fsum(probs) - 1.0) > PMF_TOLERANCE:
            raise ExactEngineError("rejection pmf is not a probability vector")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def mean(self) -> float:
        return math.fsum(self.probs * np.arange(self.probs.size))

    @property
    def fdr(self) -> float:
        """E[V/(R ∨ 1)] with V = R − n₁."""
        return _fdr_from_probs(self.probs, self.config.n1)


@dataclass(frozen=True)
class ScanRow:
    n0: int
    exact_fdr: float
    bound: float


@dataclass(frozen=True)
class WorstCaseScan:
    """Exact FDR over every n₀ for one curve; du_least_favorable reports the ratio condition."""

    spec: RejectionCurveSpec
    n: int
    rows: tuple[ScanRow, ...]
    n0_star: int
    fdr_star: float
    du_least_favorable: bool

    @property
    def table(self) -> list[tuple[int, float]]:
        return [(row.n0, row.exact_fdr) for row in self.rows]


def _band(trials: int, prob: float) -> int:
    mean = trials * prob
    return min(trials, math.ceil(mean + _BAND_SIGMAS * math.sqrt(mean) + _BAND_MARGIN))


def _check_bounds(d: npt.NDArray[np.float64]) -> None:
    if np.any(np.isnan(d)) or np.any(d < 0.0) or np.any(d > 1.0):
        raise ExactEngineError("bounds must lie in [0, 1]")
    if np.any(np.diff(d) < 0.0):
        raise ExactEngineError("bounds must be nondecreasing")


def _check_size(n: int) -> None:
    if n > MAX_EXACT_N:
        raise SizeCapError(f"exact engine supports n <= {MAX_EXACT_N}, got n={n}; use Monte Carlo instead")


def _add_binomial(state: npt.NDArray[np.float64], m: int, prob: float, size: int) -> npt.NDArray[np.float64]:
    """Move from N(d_{j-1}) to N(d_j) and keep the states 0..size-1.

    Each of the m - s uniforms above d_{j-1} falls below d_j with probability `prob`.
    """
    width = min(_band(m, prob), size - 1)
    padded = np.concatenate([np.zeros(width), state, np.zeros(max(0, size - state.size))])
    windows = sliding_window_view(padded, width + 1)[:size]

    t = np.arange(size)[:, None]
    a = width - np.arange(width + 1)[None, :]
    s = t - a
    logw = stats.binom.logpmf(a, m - s, prob)
    # entries with s < 0 pair with zero padding and stay finite
    weights = np.exp(logw)
    return (windows * weights).sum(axis=1)


def _thin(state: npt.NDArray[np.float64], keep: float) -> npt.NDArray[np.float64]:
    """Move from N(b_i) to N(b_{i-1}): every uniform below b_i stays below b_{i-1} with probability `keep`."""
    if keep >= 1.0:
        return state
    if keep <= 0.0:
        return np.array([math.fsum(state)])
    size = state.size
    width = min(size - 1, _band(size - 1, 1.0 - keep))
    windows = sliding_window_view(np.concatenate([state, np.zeros(width)]), width + 1)

    t = np.arange(size)[:, None]
    d = np.arange(width + 1)[None, :]
    logw = stats.binom.logpmf(d, t + d, 1.0 - keep)
    weights = np.exp(logw)
    return (windows * weights).sum(axis=1)


def noncrossing_prob(bounds: npt.ArrayLike, m: int | None = None) -> float:
    """P(U_{(j)} > d_j for all j = 1..m) for m i.i.d. uniform order statistics."""
    d = np.asarray(bounds, dtype=float).ravel()
    m = d.size if m is None else m
    if d.size != m:
        raise ExactEngineError(f"expected {m} bounds, got {d.size}")
    _check_bounds(d)
    if m == 0:
        return 1.0
    if d[-1] >= 1.0:
        return 0.0
    state = np.ones(1)
    previous = 0.0
    for j in range(1, m + 1):
        current = float(d[j - 1])
        if current > previous:
            state = _add_binomial(state, m, (current - previous) / (1.0 - previous), j)
            previous = current
        else:
            state = state[:j]
        if not state.any():
            return 0.0
    return min(1.0, math.fsum(state))


def _step_up_cdf(bounds: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """cdf[k] = P(R' <= k) for R' = max{i : U_{(i)} <= b_i} over len(bounds) uniforms."""
    m = bounds.size
    cdf = np.ones(m + 1)
    if m == 0:
        return cdf
    state = stats.binom.pmf(np.arange(m + 1), m, bounds[-1])
    for i in range(m, 0, -1):
        # U_{(i)} > b_i  <=>  N(b_i) <= i - 1
        state = state[:i]
        cdf[i - 1] = math.fsum(state)
        if i == 1 or cdf[i - 1] == 0.0:
            cdf[: i - 1] = 0.0
            break
        upper = bounds[i - 1]
        state = _thin(state, bounds[i - 2] / upper if upper > 0.0 else 1.0)
    return cdf


def _du_probs(values: npt.NDArray[np.float64], n0: int) -> npt.NDArray[np.float64]:
    n = values.size
    n1 = n - n0
    cdf = _step_up_cdf(values[n1:])
    probs = np.zeros(n + 1)
    probs[n1:] = np.clip(np.diff(cdf, prepend=0.0), 0.0, None)
    return probs


def _du_probs_task(args: tuple[npt.NDArray[np.float64], int]) -> npt.NDArray[np.float64]:
    return _du_probs(*args)


def _fdr_from_probs(probs: npt.NDArray[np.float64], n1: int) -> float:
    k = np.arange(probs.size)
    return math.fsum(probs * (k - n1) / np.maximum(k, 1))


def su_rejection_pmf(c: CriticalValues, cfg: DuConfig) -> RejectionPmf:
    """Exact law of the step-up rejection count R under a Dirac-uniform configuration."""
    if c.n != cfg.n:
        raise ExactEngineError(f"critical values for n={c.n} do not match configuration n={cfg.n}")
    _check_size(cfg.n)
    return RejectionPmf(probs=_du_probs(c.values, cfg.n0), config=cfg, critvals=c)


def exact_du_fdr_su(c: CriticalValues, cfg: DuConfig) -> float:
    """Exact FDR E[V/(R ∨ 1)] of the step-up procedure, with V = R − n₁."""
    return su_rejection_pmf(c, cfg).fdr


def _bound_from_probs(q_bar: npt.NDArray[np.float64], shifted: npt.NDArray[np.float64], n0: int, n: int) -> float:
    return n0 / n * math.fsum(q_bar * shifted)


def fdr_upper_bound(c: CriticalValues, spec: RejectionCurveSpec, cfg: DuConfig) -> float:
    """(n₀/n)·E q̄(R/n), the expectation taken with one true null moved to a Dirac zero."""
    if cfg.n0 == 0:
        raise ExactEngineError("the FDR bound needs at least one true null")
    shifted = su_rejection_pmf(c, DuConfig(cfg.n, cfg.n0 - 1))
    q_bar = np.asarray(eval_q_bar(spec, np.arange(cfg.n + 1) / cfg.n))
    return _bound_from_probs(q_bar, shifted.probs, cfg.n0, cfg.n)


def _probs_table(c: CriticalValues, workers: int) -> list[npt.NDArray[np.float64]]:
    tasks = [(c.values, n0) for n0 in range(c.n + 1)]
    if workers <= 1:
        return [_du_probs_task(task) for task in tasks]
    chunksize = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_du_probs_task, tasks, chunksize=chunksize))


def worst_case_scan(
    spec: RejectionCurveSpec,
    n: int,
    kind: ProcedureKind | None = None,
    workers: int = 1,
) -> WorstCaseScan:
    """Exact step-up FDR under Dirac-uniform for every n₀ ∈ {0..n}, and its maximum.

    Dirac-uniform configurations are least favorable when α_{i:n}/i is nondecreasing; the
    scan is still computed when that fails, and `du_least_favorable` is False.
    """
    if kind is not None and kind.kind != StepKind.SU:
        raise ExactEngineError(f"exact Dirac-uniform scans support step-up only, not {kind.label()}")
    _check_size(n)
    c = critical_values(spec, n)
    lfc = ratio_condition_holds(c)
    if not lfc:
        log.warning("α_{i:n}/i is not nondecreasing for %s: DU not proven least favorable", spec.variant.value)

    log.info("Scanning n0 = 0..%d for %s", n, spec.variant.value)
    table = _probs_table(c, workers)
    q_bar = np.asarray(eval_q_bar(spec, np.arange(n + 1) / n))

    rows = []
    for n0, probs in enumerate(table):
        bound = _bound_from_probs(q_bar, table[n0 - 1], n0, n) if n0 > 0 else 0.0
        rows.append(ScanRow(n0=n0, exact_fdr=_fdr_from_probs(probs, n - n0), bound=bound))

    fdrs = np.array([row.exact_fdr for row in rows])
    star = int(np.argmax(fdrs))
    return WorstCaseScan(
        spec=spec,
        n=n,
        rows=tuple(rows),
        n0_star=star,
        fdr_star=float(fdrs[star]),
        du_least_favorable=lfc,
    )

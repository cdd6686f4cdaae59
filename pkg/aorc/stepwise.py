"""Step-up (SU), step-down (SD) and step-up-down (SUD) decision procedures."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import numpy.typing as npt

from .curves import CriticalValues, RejectionCurveSpec, eval_r
from .errors import ProcedureError


@dataclass(frozen=True)
class PValueSample:
    """Observed p-values in their original order."""

    values: npt.NDArray[np.float64] = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.size == 0:
            raise ProcedureError("no p-values")
        if np.any(np.isnan(values)) or np.any(values < 0.0) or np.any(values > 1.0):
            raise ProcedureError("p-values must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def ordered(self) -> npt.NDArray[np.float64]:
        """Order statistics p_{1:n} ≤ … ≤ p_{n:n}."""
        return np.sort(self.values, kind="stable")


class StepKind(str, Enum):
    SU = "su"
    SD = "sd"
    SUD = "sud"


@dataclass(frozen=True)
class ProcedureKind:
    """SU, SD, or SUD of parameter λ ∈ [0, 1]."""

    kind: StepKind
    lam: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", StepKind(self.kind))
        if self.kind == StepKind.SUD:
            if self.lam is None or not 0.0 <= self.lam <= 1.0:
                raise ProcedureError(f"SUD procedures need lambda in [0, 1], got {self.lam}")
        elif self.lam is not None:
            raise ProcedureError(f"lambda only applies to SUD procedures, not {self.kind.value}")

    @classmethod
    def su(cls) -> "ProcedureKind":
        return cls(StepKind.SU)

    @classmethod
    def sd(cls) -> "ProcedureKind":
        return cls(StepKind.SD)

    @classmethod
    def sud(cls, lam: float) -> "ProcedureKind":
        return cls(StepKind.SUD, lam)

    def label(self) -> str:
        return f"sud({self.lam:g})" if self.kind == StepKind.SUD else self.kind.value


@dataclass(frozen=True)
class Decision:
    """Outcome of a stepwise procedure; threshold is None when nothing is rejected."""

    rejected: npt.NDArray[np.bool_] = field(repr=False)
    n_rejected: int
    threshold: float | None
    m_index: int

    def summary(self) -> dict[str, float | int | None]:
        return {"R": self.n_rejected, "threshold": self.threshold, "m_index": self.m_index}


def lambda_index(lam: float, c: CriticalValues) -> int:
    """λ_n = inf{j : α_{j:n} ≥ λ}, with inf ∅ = n."""
    if not 0.0 <= lam <= 1.0:
        raise ProcedureError(f"lambda must lie in [0, 1], got {lam}")
    hits = np.flatnonzero(c.values >= lam)
    return int(hits[0]) + 1 if hits.size else c.n


def _start_index(kind: ProcedureKind, c: CriticalValues) -> int:
    if kind.kind == StepKind.SU:
        return c.n
    if kind.kind == StepKind.SD:
        return 1
    return lambda_index(kind.lam, c)


def select_index(ordered: npt.NDArray[np.float64], c: CriticalValues, start: int) -> int:
    """m_n of an SUD procedure of order `start` on sorted p-values; 0 encodes sup ∅."""
    below = ordered <= c.values
    if below[start - 1]:
        # step down from λ_n: extend while p_{i:n} ≤ α_{i:n}
        failures = np.flatnonzero(~below[start - 1 :])
        return c.n if failures.size == 0 else start - 1 + int(failures[0])
    # step up below λ_n: largest j < λ_n with p_{j:n} ≤ α_{j:n}
    hits = np.flatnonzero(below[: start - 1])
    return int(hits[-1]) + 1 if hits.size else 0


def decide(p: PValueSample, c: CriticalValues, kind: ProcedureKind) -> Decision:
    """Run an SU, SD or SUD procedure and reject every p_i ≤ α_{m_n:n}."""
    if c.n != p.n:
        raise ProcedureError(f"{p.n} p-values but {c.n} critical values")
    m_index = select_index(p.ordered(), c, _start_index(kind, c))
    if m_index == 0:
        return Decision(rejected=np.zeros(p.n, dtype=bool), n_rejected=0, threshold=None, m_index=0)
    threshold = c.at(m_index)
    rejected = p.values <= threshold
    return Decision(rejected=rejected, n_rejected=int(rejected.sum()), threshold=threshold, m_index=m_index)


def crossing_points(p: PValueSample, spec: RejectionCurveSpec) -> list[float]:
    """Ordered p-values where the ecdf sits on or above r and falls below it at the next value.

    Diagnostic only: decide() is the authoritative selector.
    """
    ordered = p.ordered()
    distinct = np.unique(ordered)
    ecdf = np.searchsorted(ordered, distinct, side="right") / p.n
    above = ecdf >= np.asarray(eval_r(spec, distinct))
    next_below = np.append(~above[1:], True)
    return [float(t) for t in distinct[above & next_below]]


def _truth_array(decision: Decision, truth: npt.ArrayLike) -> npt.NDArray[np.bool_]:
    truth = np.asarray(truth, dtype=bool)
    if truth.shape != decision.rejected.shape:
        raise ProcedureError(f"truth has {truth.size} entries for {decision.rejected.size} decisions")
    return truth


def false_rejections(decision: Decision, truth: npt.ArrayLike) -> int:
    """V, the number of rejected true nulls."""
    return int(np.count_nonzero(decision.rejected & _truth_array(decision, truth)))


def fdp(decision: Decision, truth: npt.ArrayLike) -> float:
    """False discovery proportion V/(R ∨ 1)."""
    v = false_rejections(decision, truth)
    return v / max(decision.n_rejected, 1)


def power_proportion(decision: Decision, truth: npt.ArrayLike) -> float:
    """Proportion (R − V)/(n₁ ∨ 1) of false nulls rejected."""
    truth = _truth_array(decision, truth)
    n1 = int(np.count_nonzero(~truth))
    v = false_rejections(decision, truth)
    return (decision.n_rejected - v) / max(n1, 1)

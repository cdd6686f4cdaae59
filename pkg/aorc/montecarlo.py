"""Monte Carlo estimation of FDR and power under configurable data-generating models.

Replication i draws from its own generator seeded by (seed, i), so results do not depend
on how replications are split across worker processes. Chunks are merged in replication
order and reduced with exact summation.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from .curves import CriticalValues, RejectionCurveSpec, critical_values
from .errors import SimulationError
from .stepwise import PValueSample, ProcedureKind, decide, false_rejections

log = logging.getLogger(__name__)

DEFAULT_MU = 2.0
DEFAULT_RHO = 0.1
CHUNK_SIZE = 1000
SEED_MAX = 2**64 - 1


class ModelKind(str, Enum):
    DU = "du"
    SHIFT = "shift"
    EQUICORR = "equicorr"


@dataclass(frozen=True)
class DataModel:
    """Dirac-uniform, independent normal shift, or equicorrelated normal shift."""

    kind: ModelKind
    n0: int
    mu: float = DEFAULT_MU
    rho: float = DEFAULT_RHO

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.n0 < 0:
            raise SimulationError(f"n0 must be nonnegative, got {self.n0}")
        if self.kind != ModelKind.DU and not self.mu > 0.0:
            raise SimulationError(f"mu must be positive, got {self.mu}")
        if self.kind == ModelKind.EQUICORR and not 0.0 <= self.rho < 1.0:
            raise SimulationError(f"rho must lie in [0, 1), got {self.rho}")

    @classmethod
    def dirac_uniform(cls, n0: int) -> "DataModel":
        return cls(ModelKind.DU, n0)

    @classmethod
    def normal_shift(cls, n0: int, mu: float = DEFAULT_MU) -> "DataModel":
        return cls(ModelKind.SHIFT, n0, mu=mu)

    @classmethod
    def equicorrelated(cls, n0: int, mu: float = DEFAULT_MU, rho: float = DEFAULT_RHO) -> "DataModel":
        return cls(ModelKind.EQUICORR, n0, mu=mu, rho=rho)


class McEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean_fdp: float = Field(ge=0.0, le=1.0)
    mean_power: float = Field(ge=0.0, le=1.0)
    se_fdp: float = Field(ge=0.0)
    se_power: float = Field(ge=0.0)
    reps: int = Field(ge=1)
    seed: int = Field(ge=0, le=SEED_MAX)


class PowerComparison(BaseModel):
    """Paired power difference A − B on common random numbers, with a 95% normal interval."""

    model_config = ConfigDict(frozen=True)

    power_a: float
    power_b: float
    mean_diff: float
    se_diff: float
    ci_low: float
    ci_high: float
    reps: int
    seed: int


@dataclass(frozen=True)
class ReplicationRecords:
    """Per-replication rejection counts, false rejections, FDP and power, in replication order."""

    r: npt.NDArray[np.int64] = field(repr=False)
    v: npt.NDArray[np.int64] = field(repr=False)
    fdp: npt.NDArray[np.float64] = field(repr=False)
    power: npt.NDArray[np.float64] = field(repr=False)

    @property
    def reps(self) -> int:
        return int(self.r.size)


def replication_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for replication `index` of a run seeded with `seed`."""
    if not 0 <= seed <= SEED_MAX:
        raise SimulationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _draw(model: DataModel, n: int, rng: np.random.Generator) -> tuple[PValueSample, npt.NDArray[np.bool_]]:
    truth = np.zeros(n, dtype=bool)
    truth[: model.n0] = True
    if model.kind == ModelKind.DU:
        p = np.zeros(n)
        p[: model.n0] = rng.random(model.n0)
    else:
        z = rng.standard_normal(n)
        if model.kind == ModelKind.EQUICORR:
            z = math.sqrt(model.rho) * rng.standard_normal() + math.sqrt(1.0 - model.rho) * z
        z[model.n0 :] += model.mu
        p = stats.norm.sf(z)
    return PValueSample(np.clip(p, 0.0, 1.0)), truth


def generate(model: DataModel, n: int, seed: int, index: int) -> tuple[PValueSample, npt.NDArray[np.bool_]]:
    """One dataset: p-values and the true-null indicator (true nulls come first)."""
    if n < 1 or model.n0 > n:
        raise SimulationError(f"model with n0={model.n0} cannot generate n={n} hypotheses")
    return _draw(model, n, replication_rng(seed, index))


def _record(decision_r: int, v: int, n0: int, n: int) -> tuple[float, float]:
    fdp = v / max(decision_r, 1)
    power = (decision_r - v) / max(n - n0, 1)
    return fdp, power


def _replicate_chunk(
    args: tuple[DataModel, CriticalValues, ProcedureKind, int, int, int, int],
) -> npt.NDArray[np.float64]:
    model, c, kind, n, seed, start, stop = args
    out = np.empty((stop - start, 4))
    for row, index in enumerate(range(start, stop)):
        p, truth = _draw(model, n, replication_rng(seed, index))
        decision = decide(p, c, kind)
        v = false_rejections(decision, truth)
        out[row] = (decision.n_rejected, v, *_record(decision.n_rejected, v, model.n0, n))
    return out


def _compare_chunk(
    args: tuple[DataModel, CriticalValues, CriticalValues, ProcedureKind, int, int, int, int],
) -> npt.NDArray[np.float64]:
    model, c_a, c_b, kind, n, seed, start, stop = args
    out = np.empty((stop - start, 2))
    for row, index in enumerate(range(start, stop)):
        p, truth = _draw(model, n, replication_rng(seed, index))
        for col, c in enumerate((c_a, c_b)):
            decision = decide(p, c, kind)
            v = false_rejections(decision, truth)
            out[row, col] = _record(decision.n_rejected, v, model.n0, n)[1]
    return out


def _run_chunks(task, tasks: list[tuple], workers: int) -> npt.NDArray[np.float64]:
    if workers <= 1 or len(tasks) == 1:
        parts = [task(args) for args in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, tasks))
    return np.concatenate(parts, axis=0)


def _chunk_bounds(reps: int) -> list[tuple[int, int]]:
    return [(start, min(start + CHUNK_SIZE, reps)) for start in range(0, reps, CHUNK_SIZE)]


def _check_run(model: DataModel, n: int, reps: int, seed: int) -> None:
    if reps < 1:
        raise SimulationError(f"reps must be at least 1, got {reps}")
    if n < 1 or model.n0 > n:
        raise SimulationError(f"model with n0={model.n0} cannot generate n={n} hypotheses")
    if not 0 <= seed <= SEED_MAX:
        raise SimulationError(f"seed must be a 64-bit unsigned integer, got {seed}")


def replicate(
    model: DataModel,
    c: CriticalValues,
    kind: ProcedureKind,
    n: int,
    reps: int,
    seed: int,
    workers: int = 1,
) -> ReplicationRecords:
    """Run `reps` independent datasets through one procedure."""
    _check_run(model, n, reps, seed)
    tasks = [(model, c, kind, n, seed, start, stop) for start, stop in _chunk_bounds(reps)]
    table = _run_chunks(_replicate_chunk, tasks, workers)
    return ReplicationRecords(
        r=table[:, 0].astype(np.int64),
        v=table[:, 1].astype(np.int64),
        fdp=table[:, 2],
        power=table[:, 3],
    )


def _mean_and_se(values: npt.NDArray[np.float64]) -> tuple[float, float]:
    mean = math.fsum(values) / values.size
    if values.size == 1:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(values.size))


def estimate(
    model: DataModel,
    spec: RejectionCurveSpec,
    kind: ProcedureKind,
    n: int,
    reps: int,
    seed: int,
    workers: int = 1,
    records: ReplicationRecords | None = None,
) -> McEstimate:
    """Mean FDP and mean power over `reps` replications, with standard errors."""
    if records is None:
        log.info("Simulating %d replications of %s/%s with n=%d", reps, spec.variant.value, kind.label(), n)
        records = replicate(model, critical_values(spec, n), kind, n, reps, seed, workers)
    mean_fdp, se_fdp = _mean_and_se(records.fdp)
    mean_power, se_power = _mean_and_se(records.power)
    if mean_fdp > spec.alpha + 3.0 * se_fdp:
        log.warning("Estimated FDR %.5f exceeds alpha=%g under the %s model", mean_fdp, spec.alpha, model.kind.value)
    return McEstimate(
        mean_fdp=mean_fdp,
        mean_power=mean_power,
        se_fdp=se_fdp,
        se_power=se_power,
        reps=records.reps,
        seed=seed,
    )


def compare_power(
    model: DataModel,
    spec_a: RejectionCurveSpec,
    spec_b: RejectionCurveSpec,
    kind: ProcedureKind,
    n: int,
    reps: int,
    seed: int,
    workers: int = 1,
) -> PowerComparison:
    """Paired power comparison of two curves evaluated on identical datasets."""
    _check_run(model, n, reps, seed)
    c_a, c_b = critical_values(spec_a, n), critical_values(spec_b, n)
    tasks = [(model, c_a, c_b, kind, n, seed, start, stop) for start, stop in _chunk_bounds(reps)]
    table = _run_chunks(_compare_chunk, tasks, workers)

    diff = table[:, 0] - table[:, 1]
    mean_diff, se_diff = _mean_and_se(diff)
    z = float(stats.norm.ppf(0.975))
    return PowerComparison(
        power_a=math.fsum(table[:, 0]) / reps,
        power_b=math.fsum(table[:, 1]) / reps,
        mean_diff=mean_diff,
        se_diff=se_diff,
        ci_low=mean_diff - z * se_diff,
        ci_high=mean_diff + z * se_diff,
        reps=reps,
        seed=seed,
    )

import logging
import os
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .curves import KAPPA_VARIANTS, CurveVariant, RejectionCurveSpec, kappa_for_xstar
from .errors import CurveError, DomainError, InputFileError
from .montecarlo import ModelKind
from .stepwise import ProcedureKind, StepKind

WORKERS_ENV = "AORC_WORKERS"


def _default_workers() -> int:
    value = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(value))
    except ValueError as e:
        raise DomainError(f"{WORKERS_ENV} must be an integer, got {value!r}") from e


@dataclass
class Settings:
    alpha: float = 0.05
    workers: int = field(default_factory=_default_workers)
    exact_max_n: int = 2000
    calibration_tol: float = 1e-3
    mu: float = 2.0
    rho: float = 0.1
    log_level: str = "WARNING"

    def __post_init__(self):
        if not isinstance(logging.getLevelName(self.log_level), int):
            raise ValueError(f"log_level must be DEBUG, INFO, WARNING, ERROR or CRITICAL, got {self.log_level!r}")

    @classmethod
    def load(cls, config_path: str | Path) -> "Settings":
        """Load settings from a YAML file; missing keys keep their defaults."""
        try:
            with open(config_path) as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise InputFileError(f"settings file {config_path} is not valid YAML: {e}") from e
        if not isinstance(data, dict):
            raise DomainError(f"settings file {config_path} must contain a mapping")
        defaults = cls.default()
        try:
            return cls(
                alpha=float(data.get("alpha", defaults.alpha)),
                workers=int(data.get("workers", defaults.workers)),
                exact_max_n=int(data.get("exact_max_n", defaults.exact_max_n)),
                calibration_tol=float(data.get("calibration_tol", defaults.calibration_tol)),
                mu=float(data.get("mu", defaults.mu)),
                rho=float(data.get("rho", defaults.rho)),
                log_level=str(data.get("log_level", defaults.log_level)).upper(),
            )
        except (TypeError, ValueError) as e:
            raise DomainError(f"settings file {config_path} has an invalid value: {e}") from e

    @classmethod
    def default(cls) -> "Settings":
        """Create default settings."""
        return cls()

    def save(self, path: str | Path):
        """Save settings to a YAML file."""
        with open(path, "w") as f:
            yaml.safe_dump(asdict(self), f)


class Command(str, Enum):
    DECIDE = "decide"
    CRITVALS = "critvals"
    EXACT_FDR = "exact-fdr"
    CALIBRATE = "calibrate"
    SIMULATE = "simulate"
    ASYMPTOTICS = "asymptotics"
    CURVE_TABLE = "curve-table"
    COMPARE_POWER = "compare-power"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class CurveOptions(BaseModel):
    """Curve selection as spelled on the command line."""

    model_config = ConfigDict(frozen=True)

    curve: CurveVariant = CurveVariant.AORC
    alpha: float = Field(0.05, gt=0.0, lt=1.0)
    kappa: float | None = None
    xstar: float | None = None
    beta: float | None = None

    @model_validator(mode="after")
    def _one_kappa_source(self) -> "CurveOptions":
        if self.kappa is not None and self.xstar is not None:
            raise ValueError("give either --kappa or --xstar, not both")
        return self

    def to_spec(self, n: int | None = None) -> RejectionCurveSpec:
        return build_curve(self.curve, self.alpha, self.kappa, self.xstar, self.beta, n)


class RunConfig(BaseModel):
    """Everything one CLI invocation needs."""

    model_config = ConfigDict(frozen=True)

    command: Command
    curve: CurveOptions = CurveOptions()
    baseline: CurveOptions | None = None
    kind: StepKind = StepKind.SU
    lam: float | None = Field(None, ge=0.0, le=1.0)
    n: int | None = Field(None, ge=1)
    n0: int | None = Field(None, ge=0)
    scan: bool = False
    model: ModelKind = ModelKind.DU
    mu: float = 2.0
    rho: float = 0.1
    reps: int = Field(1, ge=1)
    seed: int | None = Field(None, ge=0, le=2**64 - 1)
    tol: float = Field(1e-3, gt=0.0)
    check_beta: float | None = Field(None, ge=0.0)
    points: int = Field(101, ge=2)
    zetas: list[float] | None = None
    input_path: Path | None = None
    output_path: Path | None = None
    summary_path: Path | None = None
    extra_path: Path | None = None
    output_format: OutputFormat = OutputFormat.CSV
    workers: int = Field(1, ge=1)
    exact_max_n: int = Field(2000, ge=1)

    @model_validator(mode="after")
    def _check_command(self) -> "RunConfig":
        if self.kind == StepKind.SUD and self.lam is None:
            raise ValueError("--kind sud needs --lambda")
        if self.kind != StepKind.SUD and self.lam is not None:
            raise ValueError("--lambda only applies to --kind sud")
        if self.command in (Command.SIMULATE, Command.COMPARE_POWER):
            if self.seed is None:
                raise ValueError(f"{self.command.value} needs an explicit --seed")
            if self.n is None or self.n0 is None:
                raise ValueError(f"{self.command.value} needs --n and --n0")
        if self.command == Command.COMPARE_POWER and self.baseline is None:
            raise ValueError("compare-power needs a baseline curve")
        if self.command in (Command.CRITVALS, Command.EXACT_FDR, Command.CALIBRATE) and self.n is None:
            raise ValueError(f"{self.command.value} needs --n")
        if self.command == Command.EXACT_FDR and self.scan == (self.n0 is not None):
            raise ValueError("exact-fdr needs exactly one of --n0 and --scan")
        if self.command == Command.DECIDE and self.input_path is None:
            raise ValueError("decide needs a p-value file")
        if self.n is not None and self.n0 is not None and self.n0 > self.n:
            raise ValueError(f"n0={self.n0} exceeds n={self.n}")
        if self.zetas is not None and any(not 0.0 <= z <= 1.0 for z in self.zetas):
            raise ValueError("zeta values must lie in [0, 1]")
        return self

    @classmethod
    def build(cls, **values) -> "RunConfig":
        """Validate a configuration, turning validation failures into domain errors."""
        try:
            return cls(**values)
        except ValidationError as e:
            messages = "; ".join(_describe(err) for err in e.errors())
            raise DomainError(messages) from e

    def procedure(self) -> ProcedureKind:
        return ProcedureKind(self.kind, self.lam)

    def curve_spec(self, n: int | None = None) -> RejectionCurveSpec:
        return self.curve.to_spec(n if n is not None else self.n)

    def baseline_spec(self, n: int | None = None) -> RejectionCurveSpec:
        if self.baseline is None:
            raise DomainError("no baseline curve configured")
        return self.baseline.to_spec(n if n is not None else self.n)


def _describe(err: dict) -> str:
    where = ".".join(str(part) for part in err["loc"])
    message = err["msg"].removeprefix("Value error, ")
    return f"{where}: {message}" if where else message


def build_curve(
    curve: CurveVariant | str,
    alpha: float,
    kappa: float | None = None,
    xstar: float | None = None,
    beta: float | None = None,
    n: int | None = None,
) -> RejectionCurveSpec:
    """Map CLI curve vocabulary to a RejectionCurveSpec; --xstar resolves κ for adjusted curves."""
    variant = CurveVariant(curve)
    if xstar is not None:
        if variant not in (CurveVariant.ADJUSTED_H1, CurveVariant.ADJUSTED_H2):
            raise CurveError(f"--xstar only applies to adjusted curves, not {variant.value}")
        kappa = kappa_for_xstar(variant, alpha, xstar)
    if kappa is not None and variant not in KAPPA_VARIANTS:
        raise CurveError(f"--kappa does not apply to the {variant.value} curve")
    if variant == CurveVariant.BETA_ADJUSTED:
        return RejectionCurveSpec(variant, alpha, beta=beta, n=n)
    if beta is not None:
        raise CurveError(f"--beta does not apply to the {variant.value} curve")
    return RejectionCurveSpec(variant, alpha, kappa=kappa)

"""Finite-n calibration of the β-adjusted critical values α_{i:n} = iα/(n + β − i(1 − α)).

For these critical values α_{i:n}/i increases in i, so Dirac-uniform configurations are
least favorable for the step-up procedure and the exact worst case over n₀ decides whether
a given β controls the FDR. The smallest such β is located by bisection; the search relies on
the worst-case FDR being nonincreasing in β, which is checked on every evaluated point.
"""

import logging

from pydantic import BaseModel, ConfigDict, Field

from .curves import Alpha, RejectionCurveSpec, check_alpha
from .errors import CalibrationError, DomainError
from .exact_du import worst_case_scan

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-3
MONOTONICITY_SLACK = 1e-12
MAX_DOUBLINGS = 60


class CalibrationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta_star: float = Field(ge=0.0)
    worst_n0: int
    achieved_max_fdr: float
    tolerance: float
    n: int
    alpha: float
    trace: list[tuple[float, float]] = Field(default_factory=list)
    checked_beta: float | None = None
    checked_max_fdr: float | None = None


def max_du_fdr(beta: float, n: int, alpha: Alpha, workers: int = 1) -> tuple[float, int]:
    """Largest exact Dirac-uniform FDR over n₀ of the β-adjusted step-up procedure, and its n₀."""
    scan = worst_case_scan(RejectionCurveSpec.beta_adjusted(alpha, beta, n), n, workers=workers)
    return scan.fdr_star, scan.n0_star


def _check_trace(trace: list[tuple[float, float]]) -> None:
    ordered = sorted(trace)
    for (beta_lo, fdr_lo), (beta_hi, fdr_hi) in zip(ordered, ordered[1:]):
        if fdr_hi > fdr_lo + MONOTONICITY_SLACK:
            raise CalibrationError(
                f"worst-case FDR increases from {fdr_lo:.10g} at beta={beta_lo:.10g} "
                f"to {fdr_hi:.10g} at beta={beta_hi:.10g}; bisection is not valid",
                trace=ordered,
            )


def calibrate_beta(
    n: int,
    alpha: Alpha,
    tol: float = DEFAULT_TOLERANCE,
    workers: int = 1,
    check_beta: float | None = None,
) -> CalibrationResult:
    """Smallest β (within tol) whose β-adjusted step-up procedure has worst-case DU FDR ≤ α."""
    alpha = check_alpha(alpha)
    if not tol > 0.0:
        raise DomainError(f"tolerance must be positive, got {tol}")

    trace: list[tuple[float, float]] = []
    worst: dict[float, int] = {}

    def evaluate(beta: float) -> float:
        fdr, n0 = max_du_fdr(beta, n, alpha, workers)
        trace.append((beta, fdr))
        worst[beta] = n0
        log.info("beta=%.6g max DU FDR=%.8g (n0=%d)", beta, fdr, n0)
        return fdr

    if evaluate(0.0) <= alpha:
        lo = hi = 0.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(MAX_DOUBLINGS):
            if evaluate(hi) <= alpha:
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise CalibrationError(f"no beta up to {hi:g} controls the FDR at {alpha}", trace=trace)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if evaluate(mid) <= alpha:
                hi = mid
            else:
                lo = mid

    _check_trace(trace)
    checked_fdr = None
    if check_beta is not None:
        checked_fdr = max_du_fdr(check_beta, n, alpha, workers)[0]
        log.info("beta=%.6g reaches max DU FDR %.8g", check_beta, checked_fdr)

    return CalibrationResult(
        beta_star=hi,
        worst_n0=worst[hi],
        achieved_max_fdr=dict(trace)[hi],
        tolerance=tol,
        n=n,
        alpha=alpha,
        trace=trace,
        checked_beta=check_beta,
        checked_max_fdr=checked_fdr,
    )


def adjusted_curve(result: CalibrationResult) -> RejectionCurveSpec:
    """The β-adjusted curve (1 + β/n)·f_α belonging to a calibration result."""
    return RejectionCurveSpec.beta_adjusted(result.alpha, result.beta_star, result.n)

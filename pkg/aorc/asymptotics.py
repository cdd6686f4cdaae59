"""Closed forms of the Dirac-uniform asymptotic model.

With a limiting proportion ζ of true nulls the ecdf of the p-values converges to
F_∞(t|ζ) = (1 − ζ) + ζt. A procedure with critical value function ρ rejects a limiting
proportion r* given by the smallest solution of F_∞(ρ(t)|ζ) = t, and its limiting FDR is
ζ·q(r*).
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .curves import Alpha, CurveVariant, RejectionCurveSpec, check_alpha, eval_q, eval_rho, q_at_zero
from .errors import CurveError, DomainError

log = logging.getLogger(__name__)

ROOT_GRID_POINTS = 10_000
ROOT_XTOL = 1e-12


@dataclass(frozen=True)
class AsymptoticModel:
    zeta: float
    alpha: Alpha

    def __post_init__(self):
        if not 0.0 <= self.zeta <= 1.0:
            raise DomainError(f"zeta must lie in [0, 1], got {self.zeta}")
        check_alpha(self.alpha)


@dataclass(frozen=True)
class AsymptoticRow:
    zeta: float
    t_zeta: float
    r_star: float
    limiting_fdr: float
    g: float | None


def f_infinity(t: float, m: AsymptoticModel) -> float:
    """Limiting ecdf F_∞(t|ζ) = (1 − ζ) + ζt."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    return (1.0 - m.zeta) + m.zeta * t


def t_zeta(m: AsymptoticModel) -> float:
    """Threshold at which the limiting FDR of rejecting {p ≤ t} is exactly α."""
    zeta, alpha = m.zeta, m.alpha
    if zeta >= 1.0:
        return 0.0
    if zeta < alpha:
        return 1.0
    return alpha * (1.0 - zeta) / (zeta * (1.0 - alpha))


def limiting_fdr_at_threshold(t: float, m: AsymptoticModel) -> float:
    """FDR_ζ(t) = tζ / ((1 − ζ) + tζ); 0 when the denominator vanishes."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    denominator = (1.0 - m.zeta) + t * m.zeta
    return 0.0 if denominator == 0.0 else t * m.zeta / denominator


def zeta_star(kappa: float, alpha: Alpha) -> float:
    """ζ*(κ) = α/(κ(1 − α) + α), above which the truncated procedure exhausts α."""
    alpha = check_alpha(alpha)
    if not 0.0 < kappa <= 1.0:
        raise DomainError(f"kappa must lie in (0, 1], got {kappa}")
    return alpha / (kappa * (1.0 - alpha) + alpha)


def _check_alpha_match(spec: RejectionCurveSpec, m: AsymptoticModel) -> None:
    if spec.alpha != m.alpha:
        raise DomainError(f"curve alpha {spec.alpha} does not match model alpha {m.alpha}")


def solve_r_star(spec: RejectionCurveSpec, m: AsymptoticModel) -> float:
    """Smallest fixed point of t ↦ F_∞(ρ(t)|ζ) on [0, 1]."""
    _check_alpha_match(spec, m)
    zeta = m.zeta

    def gap(t: float) -> float:
        return t - (1.0 - zeta) - zeta * float(eval_rho(spec, t))

    grid = np.linspace(0.0, 1.0, ROOT_GRID_POINTS + 1)
    gaps = grid - (1.0 - zeta) - zeta * np.asarray(eval_rho(spec, grid))
    hits = np.flatnonzero(gaps >= 0.0)
    if hits.size == 0:
        # gap(1) = ζ(1 − ρ(1)) ≥ 0, so only rounding can land here
        return 1.0
    first = int(hits[0])
    if first == 0 or gaps[first] == 0.0:
        return float(grid[first])
    return float(optimize.bisect(gap, grid[first - 1], grid[first], xtol=ROOT_XTOL))


def limiting_fdr_of_procedure(spec: RejectionCurveSpec, m: AsymptoticModel) -> float:
    """Limiting FDR ζ·q(r*); ζ·q(0) when r* = 0."""
    r_star = solve_r_star(spec, m)
    if r_star == 0.0:
        return m.zeta * q_at_zero(spec)
    return m.zeta * float(eval_q(spec, r_star))


def level_function_g(spec: RejectionCurveSpec, zeta: float) -> float:
    """FDR level function g(ζ) the procedure controls asymptotically."""
    if not 0.0 <= zeta <= 1.0:
        raise DomainError(f"zeta must lie in [0, 1], got {zeta}")
    alpha = spec.alpha
    if spec.variant == CurveVariant.SIMES:
        return zeta * alpha
    if spec.variant in (CurveVariant.BETA_ADJUSTED, CurveVariant.AORC):
        return min(alpha, zeta)
    if spec.variant == CurveVariant.TRUNCATED:
        kappa = spec.kappa
        if zeta >= zeta_star(kappa, alpha):
            return alpha
        return zeta * kappa / (1.0 - zeta + zeta * kappa)
    raise CurveError(f"no level function is available for the {spec.variant.value} curve")


def asymptotic_table(spec: RejectionCurveSpec, zetas: list[float]) -> list[AsymptoticRow]:
    """Rows (ζ, t_ζ, r*, limiting FDR, g(ζ)) over a grid of ζ values."""
    rows = []
    for zeta in zetas:
        model = AsymptoticModel(zeta=zeta, alpha=spec.alpha)
        try:
            g = level_function_g(spec, zeta)
        except CurveError:
            g = None
        rows.append(
            AsymptoticRow(
                zeta=zeta,
                t_zeta=t_zeta(model),
                r_star=solve_r_star(spec, model),
                limiting_fdr=limiting_fdr_of_procedure(spec, model),
                g=g,
            )
        )
    log.info("Evaluated %d asymptotic rows for %s", len(rows), spec.variant.value)
    return rows

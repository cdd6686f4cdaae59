"""Rejection curves, critical value functions and the ratio q(x) = ρ(x)/x.

The asymptotically optimal rejection curve (AORC) is

    f_α(t) = t / (t(1 − α) + α),   t ∈ [0, 1],

and every procedure in this package is driven by a critical value function ρ, the
inverse view of a rejection curve: the i-th critical value for n hypotheses is
α_{i:n} = ρ(i/n). The curve family covers the Simes line, the AORC itself, the two
adjusted AORC variants that reach 1 before t = 1, the truncated AORC and the
β-adjusted finite-n modification.

All functions accept a float or a numpy array and return the same kind.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, TypeAlias

import numpy as np
import numpy.typing as npt

from .errors import CurveError

Alpha: TypeAlias = float
ArrayOrFloat: TypeAlias = float | npt.NDArray[np.float64]

RATIO_TOLERANCE = 1e-12


class CurveVariant(str, Enum):
    """Members of the rejection curve family."""

    SIMES = "simes"
    AORC = "aorc"
    ADJUSTED_H1 = "adjusted-h1"
    ADJUSTED_H2 = "adjusted-h2"
    TRUNCATED = "truncated"
    BETA_ADJUSTED = "beta-adjusted"


KAPPA_VARIANTS = (CurveVariant.ADJUSTED_H1, CurveVariant.ADJUSTED_H2, CurveVariant.TRUNCATED)


def check_alpha(alpha: float) -> Alpha:
    """Validate a target FDR level."""
    if not 0.0 < alpha < 1.0:
        raise CurveError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


@dataclass(frozen=True)
class RejectionCurveSpec:
    """A parameterized member of the rejection curve family."""

    variant: CurveVariant
    alpha: Alpha
    kappa: float | None = None
    beta: float | None = None
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", CurveVariant(self.variant))
        check_alpha(self.alpha)
        if self.variant in KAPPA_VARIANTS:
            if self.kappa is None or not 0.0 < self.kappa < 1.0:
                raise CurveError(f"{self.variant.value} curve needs kappa in (0, 1), got {self.kappa}")
        elif self.variant == CurveVariant.BETA_ADJUSTED:
            if self.beta is None or self.beta < 0.0 or not np.isfinite(self.beta):
                raise CurveError(f"beta-adjusted curve needs a finite beta >= 0, got {self.beta}")
            if self.n is None or self.n < 1:
                raise CurveError(f"beta-adjusted curve needs n >= 1, got {self.n}")

    @classmethod
    def simes(cls, alpha: Alpha) -> "RejectionCurveSpec":
        return cls(CurveVariant.SIMES, alpha)

    @classmethod
    def aorc(cls, alpha: Alpha) -> "RejectionCurveSpec":
        return cls(CurveVariant.AORC, alpha)

    @classmethod
    def adjusted_h1(cls, alpha: Alpha, kappa: float) -> "RejectionCurveSpec":
        return cls(CurveVariant.ADJUSTED_H1, alpha, kappa=kappa)

    @classmethod
    def adjusted_h2(cls, alpha: Alpha, kappa: float) -> "RejectionCurveSpec":
        return cls(CurveVariant.ADJUSTED_H2, alpha, kappa=kappa)

    @classmethod
    def truncated(cls, alpha: Alpha, kappa: float) -> "RejectionCurveSpec":
        return cls(CurveVariant.TRUNCATED, alpha, kappa=kappa)

    @classmethod
    def beta_adjusted(cls, alpha: Alpha, beta: float, n: int) -> "RejectionCurveSpec":
        return cls(CurveVariant.BETA_ADJUSTED, alpha, beta=beta, n=n)

    @property
    def beta_over_n(self) -> float:
        if self.variant != CurveVariant.BETA_ADJUSTED:
            return 0.0
        return self.beta / self.n

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"curve": self.variant.value, "alpha": self.alpha}
        if self.kappa is not None:
            data["kappa"] = self.kappa
        if self.beta is not None:
            data["beta"] = self.beta
            data["n"] = self.n
        return data


@dataclass(frozen=True)
class CriticalValues:
    """The vector α_{1:n} ≤ … ≤ α_{n:n} induced by a curve; values[i - 1] = α_{i:n}."""

    values: npt.NDArray[np.float64] = field(repr=False)
    source: RejectionCurveSpec
    n: int

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size != self.n:
            raise CurveError(f"expected {self.n} critical values, got shape {values.shape}")
        if np.any(values <= 0.0) or np.any(values > 1.0):
            raise CurveError("critical values must lie in (0, 1]")
        if np.any(np.diff(values) < 0.0):
            raise CurveError("critical values must be nondecreasing")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.n

    def at(self, i: int) -> float:
        """The 1-based critical value α_{i:n}."""
        return float(self.values[i - 1])


def _as_unit_array(x: ArrayOrFloat, name: str) -> tuple[npt.NDArray[np.float64], bool]:
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise CurveError(f"{name} must lie in [0, 1]")
    return arr, arr.ndim == 0


def _restore(out: npt.NDArray[np.float64], scalar: bool) -> ArrayOrFloat:
    return float(out) if scalar else out


def _f(t: npt.NDArray[np.float64], alpha: float) -> npt.NDArray[np.float64]:
    # t(1 − α) + α written as t + α(1 − t) so that f_α(1) == 1 exactly
    return t / (t + alpha * (1.0 - t))


def _f_inv(x: npt.NDArray[np.float64], alpha: float) -> npt.NDArray[np.float64]:
    return alpha * x / (alpha * x + (1.0 - x))


def _f_prime(t: npt.NDArray[np.float64] | float, alpha: float) -> npt.NDArray[np.float64] | float:
    return alpha / (t * (1.0 - alpha) + alpha) ** 2


def eval_f_alpha(t: ArrayOrFloat, alpha: Alpha) -> ArrayOrFloat:
    """The AORC f_α(t) = t/(t(1 − α) + α)."""
    alpha = check_alpha(alpha)
    arr, scalar = _as_unit_array(t, "t")
    return _restore(_f(arr, alpha), scalar)


def eval_f_alpha_inv(x: ArrayOrFloat, alpha: Alpha) -> ArrayOrFloat:
    """The AORC critical value function f_α⁻¹(x) = αx/(1 − (1 − α)x) = 1 − f_α(1 − x)."""
    alpha = check_alpha(alpha)
    arr, scalar = _as_unit_array(x, "x")
    return _restore(_f_inv(arr, alpha), scalar)


def f_alpha_prime(t: ArrayOrFloat, alpha: Alpha) -> ArrayOrFloat:
    """Derivative f_α′(t) = α/(t(1 − α) + α)²."""
    alpha = check_alpha(alpha)
    arr, scalar = _as_unit_array(t, "t")
    return _restore(np.asarray(_f_prime(arr, alpha)), scalar)


def eval_rho(spec: RejectionCurveSpec, x: ArrayOrFloat) -> ArrayOrFloat:
    """Critical value function ρ of the curve, evaluated at ecdf level x."""
    arr, scalar = _as_unit_array(x, "x")
    a = spec.alpha
    variant = spec.variant

    if variant == CurveVariant.SIMES:
        out = a * arr
    elif variant == CurveVariant.AORC:
        out = _f_inv(arr, a)
    elif variant == CurveVariant.ADJUSTED_H1:
        junction = float(_f(np.asarray(spec.kappa), a))
        slope = _f_prime(spec.kappa, a)
        out = np.where(arr <= junction, _f_inv(arr, a), spec.kappa + (arr - junction) / slope)
    elif variant == CurveVariant.ADJUSTED_H2:
        junction = float(_f(np.asarray(spec.kappa), a))
        # h₂ is the ray through the origin with slope f_α(κ)/κ
        out = np.where(arr <= junction, _f_inv(arr, a), arr * spec.kappa / junction)
    elif variant == CurveVariant.TRUNCATED:
        out = np.minimum(_f_inv(arr, a), spec.kappa)
    else:
        out = arr * a / (arr * a + (1.0 - arr) + spec.beta_over_n)

    return _restore(np.clip(out, 0.0, 1.0), scalar)


def eval_r(spec: RejectionCurveSpec, t: ArrayOrFloat) -> ArrayOrFloat:
    """Rejection curve r(t) = inf{x : ρ(x) ≥ t}; +inf past the saturation level of ρ."""
    arr, scalar = _as_unit_array(t, "t")
    a = spec.alpha
    variant = spec.variant

    if variant == CurveVariant.SIMES:
        out = arr / a
    elif variant == CurveVariant.AORC:
        out = _f(arr, a)
    elif variant == CurveVariant.ADJUSTED_H1:
        k = spec.kappa
        h1 = _f_prime(k, a) * (arr - k) + float(_f(np.asarray(k), a))
        out = np.where(arr <= k, _f(arr, a), h1)
    elif variant == CurveVariant.ADJUSTED_H2:
        k = spec.kappa
        out = np.where(arr <= k, _f(arr, a), arr * float(_f(np.asarray(k), a)) / k)
    elif variant == CurveVariant.TRUNCATED:
        out = np.where(arr <= spec.kappa, _f(arr, a), np.inf)
    else:
        top = a / (a + spec.beta_over_n)
        out = np.where(arr <= top, (1.0 + spec.beta_over_n) * _f(np.minimum(arr, top), a), np.inf)

    return _restore(np.asarray(out, dtype=float), scalar)


def critical_values(spec: RejectionCurveSpec, n: int) -> CriticalValues:
    """Critical values α_{i:n} = ρ(i/n), i = 1..n."""
    if n < 1:
        raise CurveError(f"n must be a positive integer, got {n}")
    if spec.variant == CurveVariant.BETA_ADJUSTED and spec.n != n:
        raise CurveError(f"beta-adjusted curve was built for n={spec.n}, not n={n}")
    grid = np.arange(1, n + 1, dtype=float) / n
    return CriticalValues(values=eval_rho(spec, grid), source=spec, n=n)


def q_at_zero(spec: RejectionCurveSpec) -> float:
    """Right limit of q(x) = ρ(x)/x at x = 0."""
    return spec.alpha / (1.0 + spec.beta_over_n)


def eval_q(spec: RejectionCurveSpec, x: ArrayOrFloat) -> ArrayOrFloat:
    """q(x) = ρ(x)/x, with q(0) the analytic right limit."""
    arr, scalar = _as_unit_array(x, "x")
    rho = np.asarray(eval_rho(spec, arr))
    out = np.full(arr.shape, q_at_zero(spec))
    np.divide(rho, arr, out=out, where=arr > 0.0)
    return _restore(out, scalar)


def eval_q_bar(spec: RejectionCurveSpec, x: ArrayOrFloat) -> ArrayOrFloat:
    """Least isotonic majorant q̄(x) = max_{0 ≤ t ≤ x} q(t)."""
    arr, scalar = _as_unit_array(x, "x")
    if spec.variant == CurveVariant.TRUNCATED:
        # q increases up to the kink f_α(κ) and decreases as κ/x afterwards
        kink = float(_f(np.asarray(spec.kappa), spec.alpha))
        arr = np.minimum(arr, kink)
    return _restore(np.asarray(eval_q(spec, arr)), scalar)


def x_star(spec: RejectionCurveSpec) -> float:
    """Abscissa where an adjusted curve reaches 1, or where the truncated ρ saturates."""
    a, k = spec.alpha, spec.kappa
    if spec.variant == CurveVariant.ADJUSTED_H1:
        return k * (1.0 - a) * (2.0 - k) + a
    if spec.variant == CurveVariant.ADJUSTED_H2:
        return k * (1.0 - a) + a
    if spec.variant == CurveVariant.TRUNCATED:
        return float(_f(np.asarray(k), a))
    raise CurveError(f"x_star is not defined for the {spec.variant.value} curve")


def kappa_for_xstar(variant: CurveVariant | str, alpha: Alpha, xstar: float) -> float:
    """Junction κ for which an adjusted curve reaches 1 at x*."""
    variant = CurveVariant(variant)
    alpha = check_alpha(alpha)
    if not alpha < xstar <= 1.0:
        raise CurveError(f"xstar must lie in ({alpha}, 1], got {xstar}")
    c = (xstar - alpha) / (1.0 - alpha)
    if variant == CurveVariant.ADJUSTED_H2:
        return c
    if variant == CurveVariant.ADJUSTED_H1:
        # root in (0, 1] of κ(2 − κ) = c
        return 1.0 - float(np.sqrt(1.0 - c))
    raise CurveError(f"kappa_for_xstar only supports adjusted curves, not {variant.value}")


def ratio_condition_holds(c: CriticalValues) -> bool:
    """Whether α_{i:n}/i is nondecreasing in i."""
    ratios = c.values / np.arange(1, c.n + 1)
    return bool(np.all(np.diff(ratios) >= -RATIO_TOLERANCE * ratios[1:]))

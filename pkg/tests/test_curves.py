"""Tests for rejection curves and critical value functions."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from aorc.curves import (
    CriticalValues,
    CurveVariant,
    RejectionCurveSpec,
    critical_values,
    eval_f_alpha,
    eval_f_alpha_inv,
    eval_q,
    eval_q_bar,
    eval_r,
    eval_rho,
    f_alpha_prime,
    kappa_for_xstar,
    q_at_zero,
    ratio_condition_holds,
    x_star,
)
from aorc.errors import CurveError, DomainError

ALPHA = 0.05
KAPPA_2 = 0.45 / 0.95
GRID = np.linspace(0.0, 1.0, 1001)


def family(alpha: float = ALPHA, n: int = 100) -> list[RejectionCurveSpec]:
    return [
        RejectionCurveSpec.simes(alpha),
        RejectionCurveSpec.aorc(alpha),
        RejectionCurveSpec.adjusted_h1(alpha, 0.5),
        RejectionCurveSpec.adjusted_h2(alpha, KAPPA_2),
        RejectionCurveSpec.truncated(alpha, KAPPA_2),
        RejectionCurveSpec.beta_adjusted(alpha, 1.76, n),
    ]


def test_f_alpha_examples():
    """Test the AORC at its endpoints and at t_ζ for ζ = 1/2."""
    assert eval_f_alpha(0.0, ALPHA) == 0.0
    assert eval_f_alpha(1.0, ALPHA) == 1.0
    assert eval_f_alpha(1 / 19, ALPHA) == pytest.approx(10 / 19, abs=1e-12)


def test_f_alpha_inverse_examples():
    """Test the AORC critical value function."""
    assert eval_f_alpha_inv(1.0, ALPHA) == 1.0
    assert eval_f_alpha_inv(0.5, ALPHA) == pytest.approx(0.025 / 0.525, abs=1e-12)
    assert eval_f_alpha_inv(0.3, 0.1) == pytest.approx(1.0 - eval_f_alpha(0.7, 0.1), abs=1e-12)


@pytest.mark.parametrize("alpha", [0.01, 0.05, 0.1, 0.5])
def test_symmetry_and_round_trip(alpha):
    """Test f⁻¹(t) = 1 − f(1 − t) and f(f⁻¹(x)) = x on a grid."""
    assert_allclose(eval_f_alpha_inv(GRID, alpha), 1.0 - eval_f_alpha(1.0 - GRID, alpha), rtol=0, atol=1e-12)
    assert_allclose(eval_f_alpha(eval_f_alpha_inv(GRID, alpha), alpha), GRID, rtol=0, atol=1e-12)


def test_f_alpha_prime_matches_difference_quotient():
    """Test the closed-form derivative against a central difference."""
    t, h = 0.3, 1e-6
    numeric = (eval_f_alpha(t + h, ALPHA) - eval_f_alpha(t - h, ALPHA)) / (2 * h)
    assert f_alpha_prime(t, ALPHA) == pytest.approx(numeric, rel=1e-6)


def test_domain_errors():
    """Test arguments outside [0, 1] and invalid levels."""
    with pytest.raises(CurveError):
        eval_f_alpha(1.5, ALPHA)
    with pytest.raises(CurveError):
        eval_f_alpha_inv(-0.1, ALPHA)
    with pytest.raises(CurveError):
        eval_rho(RejectionCurveSpec.aorc(ALPHA), float("nan"))
    with pytest.raises(DomainError):
        RejectionCurveSpec.aorc(1.0)


@pytest.mark.parametrize(
    "variant,kwargs",
    [
        (CurveVariant.ADJUSTED_H1, {}),
        (CurveVariant.TRUNCATED, {"kappa": 1.0}),
        (CurveVariant.BETA_ADJUSTED, {"beta": -1.0, "n": 10}),
        (CurveVariant.BETA_ADJUSTED, {"beta": 1.0}),
    ],
)
def test_invalid_curve_parameters(variant, kwargs):
    """Test that κ and β are validated per variant."""
    with pytest.raises(CurveError):
        RejectionCurveSpec(variant, ALPHA, **kwargs)


def test_rho_examples():
    """Test ρ for the Simes line, the truncated curve and the adjusted curve h₂."""
    assert eval_rho(RejectionCurveSpec.simes(ALPHA), 0.4) == pytest.approx(0.02)
    assert eval_rho(RejectionCurveSpec.truncated(ALPHA, 0.5), 0.99) == pytest.approx(0.5)
    assert eval_rho(RejectionCurveSpec.adjusted_h2(ALPHA, KAPPA_2), 1.0) == pytest.approx(0.5, abs=1e-12)


def test_rho_is_nondecreasing_and_starts_at_zero():
    """Test monotonicity of every ρ in the family."""
    for spec in family():
        rho = eval_rho(spec, GRID)
        assert rho[0] == 0.0
        assert np.all(np.diff(rho) >= 0.0), spec.variant


def test_simes_below_aorc():
    """Test ρ_Simes < ρ_AORC on (0, 1)."""
    inner = GRID[1:-1]
    assert np.all(eval_rho(RejectionCurveSpec.simes(ALPHA), inner) < eval_rho(RejectionCurveSpec.aorc(ALPHA), inner))


def test_family_dominated_by_aorc():
    """Test ρ ≤ f_α⁻¹ for every curve in the family."""
    bound = eval_f_alpha_inv(GRID, ALPHA)
    for spec in family():
        assert np.all(eval_rho(spec, GRID) <= bound + 1e-15), spec.variant


def test_adjusted_h1_joins_smoothly():
    """Test value and slope continuity of h₁ at the junction κ."""
    spec = RejectionCurveSpec.adjusted_h1(ALPHA, 0.5)
    h = 1e-7
    assert eval_r(spec, 0.5) == pytest.approx(eval_f_alpha(0.5, ALPHA), abs=1e-12)
    right_slope = (eval_r(spec, 0.5 + h) - eval_r(spec, 0.5)) / h
    assert right_slope == pytest.approx(f_alpha_prime(0.5, ALPHA), rel=1e-5)


def test_adjusted_h2_joins_continuously():
    """Test value continuity of h₂ at the junction κ."""
    spec = RejectionCurveSpec.adjusted_h2(ALPHA, 0.5)
    assert eval_r(spec, 0.5) == pytest.approx(eval_f_alpha(0.5, ALPHA), abs=1e-12)
    junction = eval_f_alpha(0.5, ALPHA)
    assert eval_rho(spec, junction) == pytest.approx(0.5, abs=1e-12)


def test_rejection_curve_inverts_rho():
    """Test r(ρ(x)) = x below the saturation level of ρ."""
    grid = np.linspace(0.0, 0.9, 91)
    for spec in family():
        x = grid
        if spec.variant == CurveVariant.TRUNCATED:
            x = grid[grid <= eval_f_alpha(spec.kappa, ALPHA)]
        assert_allclose(eval_r(spec, eval_rho(spec, x)), x, atol=1e-10)


def test_rejection_curve_is_infinite_past_saturation():
    """Test r = +∞ beyond the largest value of a truncated ρ."""
    spec = RejectionCurveSpec.truncated(ALPHA, 0.5)
    assert eval_r(spec, 0.6) == np.inf
    assert eval_r(RejectionCurveSpec.simes(ALPHA), 0.5) == pytest.approx(10.0)


def test_critical_values_aorc():
    """Test the AORC critical values iα/(n − i(1 − α)) for n = 5."""
    c = critical_values(RejectionCurveSpec.aorc(ALPHA), 5)
    assert_allclose(c.values, [0.0123456790, 0.0322580645, 0.0697674419, 0.1666666667, 1.0], atol=1e-10)
    assert c.at(5) == 1.0
    assert len(c) == 5


def test_critical_values_simes():
    """Test the Simes critical values iα/n."""
    c = critical_values(RejectionCurveSpec.simes(ALPHA), 4)
    assert_allclose(c.values, [0.0125, 0.025, 0.0375, 0.05], rtol=0, atol=1e-15)


def test_critical_values_beta_adjusted():
    """Test iα/(n + β − i(1 − α)) for β = 1.76 and n = 100."""
    c = critical_values(RejectionCurveSpec.beta_adjusted(ALPHA, 1.76, 100), 100)
    assert c.at(100) == pytest.approx(5 / 6.76, abs=1e-12)
    assert c.at(50) == pytest.approx(2.5 / 54.26, abs=1e-12)


def test_critical_values_errors():
    """Test n = 0 and a β-adjusted curve used with a different n."""
    with pytest.raises(CurveError):
        critical_values(RejectionCurveSpec.aorc(ALPHA), 0)
    with pytest.raises(CurveError):
        critical_values(RejectionCurveSpec.beta_adjusted(ALPHA, 1.0, 10), 20)


def test_critical_values_are_read_only():
    """Test that critical values cannot be modified after construction."""
    c = critical_values(RejectionCurveSpec.aorc(ALPHA), 3)
    with pytest.raises(ValueError):
        c.values[0] = 0.5


def test_critical_values_validation():
    """Test that decreasing or out-of-range vectors are rejected."""
    spec = RejectionCurveSpec.simes(ALPHA)
    with pytest.raises(CurveError):
        CriticalValues(values=np.array([0.2, 0.1]), source=spec, n=2)
    with pytest.raises(CurveError):
        CriticalValues(values=np.array([0.0, 0.1]), source=spec, n=2)


def test_q_examples():
    """Test q(x) = ρ(x)/x for the Simes line, the AORC and the truncated curve."""
    assert eval_q(RejectionCurveSpec.simes(0.1), 0.7) == pytest.approx(0.1)
    assert eval_q(RejectionCurveSpec.aorc(ALPHA), 0.5) == pytest.approx(0.05 / (1 - 0.95 * 0.5))
    assert eval_q(RejectionCurveSpec.truncated(ALPHA, 0.5), 1.0) == pytest.approx(0.5)


def test_q_at_zero():
    """Test the analytic right limit of q at 0."""
    for spec in family():
        expected = ALPHA / (1 + 1.76 / 100) if spec.variant == CurveVariant.BETA_ADJUSTED else ALPHA
        assert q_at_zero(spec) == pytest.approx(expected)
        assert eval_q(spec, 0.0) == pytest.approx(expected)
        assert eval_q(spec, 1e-9) == pytest.approx(expected, rel=1e-6)


def test_q_bar_examples():
    """Test the isotonic majorant at the AORC and at the truncated kink."""
    assert eval_q_bar(RejectionCurveSpec.aorc(ALPHA), 0.5) == pytest.approx(0.0952381, abs=1e-7)
    assert eval_q_bar(RejectionCurveSpec.truncated(ALPHA, 0.5), 1.0) == pytest.approx(0.525)
    for spec in family():
        assert eval_q_bar(spec, 0.0) == eval_q(spec, 0.0)


def test_q_bar_is_isotonic_majorant():
    """Test q̄ ≥ q and q̄ nondecreasing; q̄ = q where q is itself nondecreasing."""
    for spec in family():
        q = eval_q(spec, GRID)
        q_bar = eval_q_bar(spec, GRID)
        assert np.all(q_bar >= np.maximum.accumulate(q) - 1e-15)
        assert np.all(np.diff(q_bar) >= -1e-15)
        if spec.variant != CurveVariant.TRUNCATED:
            assert_allclose(q_bar, q, atol=1e-12)


def test_x_star_examples():
    """Test where the adjusted curves reach 1."""
    assert x_star(RejectionCurveSpec.adjusted_h1(ALPHA, 0.5)) == pytest.approx(0.7625)
    assert x_star(RejectionCurveSpec.adjusted_h2(ALPHA, 0.5)) == pytest.approx(0.525)
    assert x_star(RejectionCurveSpec.adjusted_h2(ALPHA, KAPPA_2)) == pytest.approx(0.5)
    assert x_star(RejectionCurveSpec.truncated(ALPHA, 0.5)) == pytest.approx(0.5 / 0.525)
    with pytest.raises(CurveError):
        x_star(RejectionCurveSpec.aorc(ALPHA))


def test_x_star_is_where_adjusted_curves_reach_one():
    """Test r(x*) = 1 and ρ(1) = x* for both adjusted curves."""
    for spec in (RejectionCurveSpec.adjusted_h1(ALPHA, 0.3), RejectionCurveSpec.adjusted_h2(ALPHA, 0.3)):
        assert eval_r(spec, x_star(spec)) == pytest.approx(1.0, abs=1e-12)
        assert eval_rho(spec, 1.0) == pytest.approx(x_star(spec), abs=1e-12)


def test_kappa_for_xstar():
    """Test the inversion of the x* formulas."""
    assert kappa_for_xstar(CurveVariant.ADJUSTED_H2, ALPHA, 0.5) == pytest.approx(0.4736842, abs=1e-7)
    assert kappa_for_xstar(CurveVariant.ADJUSTED_H1, ALPHA, 0.5) == pytest.approx(0.2745190, abs=1e-7)
    assert kappa_for_xstar("adjusted-h2", ALPHA, 1.0) == 1.0
    for variant in (CurveVariant.ADJUSTED_H1, CurveVariant.ADJUSTED_H2):
        kappa = kappa_for_xstar(variant, ALPHA, 0.6)
        assert x_star(RejectionCurveSpec(variant, ALPHA, kappa=kappa)) == pytest.approx(0.6, abs=1e-12)


def test_kappa_for_xstar_errors():
    """Test unattainable x* and unsupported variants."""
    with pytest.raises(CurveError):
        kappa_for_xstar(CurveVariant.ADJUSTED_H2, ALPHA, 0.01)
    with pytest.raises(CurveError):
        kappa_for_xstar(CurveVariant.TRUNCATED, ALPHA, 0.5)


@pytest.mark.parametrize("n", [1, 2, 7, 50, 200])
def test_ratio_condition(n):
    """Test that α_{i:n}/i is nondecreasing except for the truncated curve."""
    for spec in family(n=n):
        c = critical_values(spec, n)
        if spec.variant != CurveVariant.TRUNCATED:
            assert ratio_condition_holds(c), spec.variant


def test_ratio_condition_fails_for_truncated():
    """Test that a flat tail breaks the ratio condition."""
    c = critical_values(RejectionCurveSpec.truncated(ALPHA, 0.3), 100)
    assert not ratio_condition_holds(c)


def test_to_dict():
    """Test the serialisable form of a curve."""
    assert RejectionCurveSpec.aorc(ALPHA).to_dict() == {"curve": "aorc", "alpha": ALPHA}
    assert RejectionCurveSpec.beta_adjusted(ALPHA, 1.76, 100).to_dict() == {
        "curve": "beta-adjusted",
        "alpha": ALPHA,
        "beta": 1.76,
        "n": 100,
    }

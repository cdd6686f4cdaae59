"""Tests for the Dirac-uniform asymptotic model."""

import numpy as np
import pytest

from aorc.asymptotics import (
    AsymptoticModel,
    asymptotic_table,
    f_infinity,
    level_function_g,
    limiting_fdr_at_threshold,
    limiting_fdr_of_procedure,
    solve_r_star,
    t_zeta,
    zeta_star,
)
from aorc.curves import RejectionCurveSpec, eval_rho
from aorc.errors import CurveError, DomainError

ALPHA = 0.05
KAPPA_2 = 0.45 / 0.95


def model(zeta: float) -> AsymptoticModel:
    return AsymptoticModel(zeta=zeta, alpha=ALPHA)


def test_model_validation():
    """Test ζ and α ranges."""
    with pytest.raises(DomainError):
        AsymptoticModel(zeta=1.5, alpha=ALPHA)
    with pytest.raises(DomainError):
        AsymptoticModel(zeta=0.5, alpha=0.0)


def test_f_infinity():
    """Test the limiting ecdf."""
    assert f_infinity(0.0, model(0.3)) == pytest.approx(0.7)
    assert f_infinity(1.0, model(0.8)) == pytest.approx(1.0)
    assert f_infinity(1 / 19, model(0.5)) == pytest.approx(10 / 19)
    with pytest.raises(DomainError):
        f_infinity(1.1, model(0.5))


def test_t_zeta():
    """Test the threshold with limiting FDR exactly α."""
    assert t_zeta(model(0.5)) == pytest.approx(1 / 19)
    assert t_zeta(model(0.02)) == 1.0
    assert t_zeta(model(1.0)) == 0.0


def test_limiting_fdr_at_threshold():
    """Test FDR_ζ(t) at t_ζ, at 1 and for ζ = 0."""
    m = model(0.5)
    assert limiting_fdr_at_threshold(t_zeta(m), m) == pytest.approx(ALPHA)
    assert limiting_fdr_at_threshold(1.0, model(0.3)) == pytest.approx(0.3)
    assert limiting_fdr_at_threshold(0.4, model(0.0)) == 0.0
    assert limiting_fdr_at_threshold(0.0, model(1.0)) == 0.0


@pytest.mark.parametrize("zeta", [0.06, 0.2, 0.5, 0.9])
def test_limiting_fdr_at_t_zeta_is_alpha(zeta):
    """Test FDR_ζ(t_ζ) = α for ζ ∈ [α, 1)."""
    m = model(zeta)
    assert limiting_fdr_at_threshold(t_zeta(m), m) == pytest.approx(ALPHA, abs=1e-12)


def test_zeta_star():
    """Test ζ*(κ) = α/(κ(1 − α) + α)."""
    assert zeta_star(KAPPA_2, ALPHA) == pytest.approx(0.1)
    assert zeta_star(1.0, ALPHA) == pytest.approx(0.05)
    assert zeta_star(1e-12, ALPHA) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(DomainError):
        zeta_star(0.0, ALPHA)


def test_r_star_aorc():
    """Test r* = f_α(t_ζ) = (1 − ζ)/(1 − α) for the AORC."""
    assert solve_r_star(RejectionCurveSpec.aorc(ALPHA), model(0.5)) == pytest.approx(10 / 19, abs=1e-10)


def test_r_star_without_true_nulls():
    """Test that ζ = 0 forces full rejection."""
    for spec in (RejectionCurveSpec.aorc(ALPHA), RejectionCurveSpec.truncated(ALPHA, KAPPA_2)):
        assert solve_r_star(spec, model(0.0)) == pytest.approx(1.0)


def test_r_star_truncated_below_zeta_star():
    """Test the smallest fixed point 1 − ζ + ζκ of the truncated curve for ζ < ζ*."""
    spec = RejectionCurveSpec.truncated(ALPHA, KAPPA_2)
    r_star = solve_r_star(spec, model(0.05))
    assert r_star == pytest.approx(1 - 0.05 + 0.05 * KAPPA_2, abs=1e-10)
    assert r_star == pytest.approx(f_infinity(float(eval_rho(spec, r_star)), model(0.05)), abs=1e-10)


def test_r_star_is_smallest_fixed_point():
    """Test that no point below r* solves t = F_∞(ρ(t))."""
    spec = RejectionCurveSpec.adjusted_h1(ALPHA, 0.3)
    m = model(0.4)
    r_star = solve_r_star(spec, m)
    below = np.linspace(0.0, r_star, 500, endpoint=False)
    gap = below - (1 - m.zeta) - m.zeta * eval_rho(spec, below)
    assert np.all(gap < 0.0)
    assert r_star == pytest.approx(1 - m.zeta + m.zeta * float(eval_rho(spec, r_star)), abs=1e-10)


def test_r_star_curve_alpha_mismatch():
    """Test that the curve and model levels must agree."""
    with pytest.raises(DomainError):
        solve_r_star(RejectionCurveSpec.aorc(0.1), model(0.5))


def test_limiting_fdr_of_procedure():
    """Test the limiting FDR of the AORC and the truncated curve."""
    assert limiting_fdr_of_procedure(RejectionCurveSpec.aorc(ALPHA), model(0.5)) == pytest.approx(ALPHA, abs=1e-9)
    truncated = RejectionCurveSpec.truncated(ALPHA, KAPPA_2)
    assert limiting_fdr_of_procedure(truncated, model(0.05)) == pytest.approx(0.0243243, abs=1e-7)
    assert limiting_fdr_of_procedure(RejectionCurveSpec.aorc(ALPHA), model(0.0)) == 0.0


@pytest.mark.parametrize("zeta", [0.05, 0.2, 0.5, 0.8, 0.99])
def test_aorc_exhausts_alpha(zeta):
    """Test that the AORC attains limiting FDR α for every ζ ∈ [α, 1)."""
    assert limiting_fdr_of_procedure(RejectionCurveSpec.aorc(ALPHA), model(zeta)) == pytest.approx(ALPHA, abs=1e-8)


@pytest.mark.parametrize("zeta", [0.1, 0.3, 0.7, 1.0])
def test_simes_limiting_fdr(zeta):
    """Test the Simes limit ζα."""
    assert limiting_fdr_of_procedure(RejectionCurveSpec.simes(ALPHA), model(zeta)) == pytest.approx(zeta * ALPHA)


def test_level_function_g():
    """Test g(ζ) for the Simes line, the β-adjusted and the truncated curve."""
    assert level_function_g(RejectionCurveSpec.simes(ALPHA), 0.4) == pytest.approx(0.02)
    assert level_function_g(RejectionCurveSpec.beta_adjusted(ALPHA, 1.76, 100), 0.03) == pytest.approx(0.03)
    assert level_function_g(RejectionCurveSpec.truncated(ALPHA, KAPPA_2), 0.5) == pytest.approx(ALPHA)
    assert level_function_g(RejectionCurveSpec.aorc(ALPHA), 0.6) == pytest.approx(ALPHA)
    with pytest.raises(CurveError):
        level_function_g(RejectionCurveSpec.adjusted_h2(ALPHA, KAPPA_2), 0.5)


def test_truncated_g_matches_limiting_fdr():
    """Test that g of the truncated curve equals its limiting FDR below ζ*."""
    spec = RejectionCurveSpec.truncated(ALPHA, KAPPA_2)
    for zeta in (0.02, 0.05, 0.08):
        assert level_function_g(spec, zeta) == pytest.approx(limiting_fdr_of_procedure(spec, model(zeta)), abs=1e-9)


def test_asymptotic_table():
    """Test table rows and the blank g of unsupported curves."""
    rows = asymptotic_table(RejectionCurveSpec.aorc(ALPHA), [0.0, 0.5, 1.0])
    assert [row.zeta for row in rows] == [0.0, 0.5, 1.0]
    assert rows[1].r_star == pytest.approx(10 / 19, abs=1e-10)
    assert rows[1].g == pytest.approx(ALPHA)
    blank = asymptotic_table(RejectionCurveSpec.adjusted_h1(ALPHA, 0.3), [0.5])
    assert blank[0].g is None

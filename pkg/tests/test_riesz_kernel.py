import numpy as np
import pytest

from brokenline.broken_line import Dimensions
from brokenline.riesz_kernel import (NearDiagonalError, RayDesign, appendix_check, entry_kind, fit_exponent,
                                     low_energy_table, riesz_kernel, riesz_parts, tl_ray)

DIMS = Dimensions(1.5, 3.0)
POINTS = [(2.0, 5.0), (-3.0, 4.0), (-6.0, -2.5), (7.0, -1.5), (1.5, 40.0), (30.0, 2.0)]


@pytest.mark.parametrize("x,y", POINTS)
def test_split_adds_up(x, y):
    tol = 1e-9
    parts = riesz_parts(DIMS, x, y, tol)
    total = parts["TL"] + parts["TH"] + parts["KL"]
    assert abs(parts["FULL"] - total) <= 2e2 * tol * max(1.0, abs(parts["FULL"]))


def test_kl_vanishes_across_the_junction():
    assert riesz_kernel(DIMS, -3.0, 4.0, "KL") == 0.0


def test_near_diagonal_rejected():
    with pytest.raises(NearDiagonalError):
        riesz_kernel(DIMS, 5.0, 5.0 + 1e-6)
    with pytest.raises(NearDiagonalError):
        riesz_kernel(DIMS, 1.0, 1.0, "TL")
    with pytest.raises(ValueError):
        riesz_kernel(DIMS, 0.5, 3.0)
    with pytest.raises(ValueError):
        riesz_kernel(DIMS, 2.0, 3.0, "XX")


def test_fit_exponent_recovers_power():
    t = np.geomspace(10, 1e4, 30)
    f = fit_exponent(np.column_stack([t, 3.0 * t**-1.5]))
    assert f.slope == pytest.approx(-1.5, abs=1e-12) and f.r2 == pytest.approx(1.0)


def test_fit_exponent_with_noise():
    rng = np.random.default_rng(0)
    t = np.geomspace(10, 1e4, 40)
    v = t**-2.0 * (1 + 0.01 * rng.standard_normal(t.size))
    assert fit_exponent(np.column_stack([t, v])).slope == pytest.approx(-2.0, abs=0.01)


def test_fit_exponent_flat_and_errors():
    t = np.geomspace(1, 10, 10)
    assert fit_exponent(np.column_stack([t, np.full_like(t, 2.0)])).slope == 0.0
    with pytest.raises(ValueError):
        fit_exponent(np.column_stack([t[:5], t[:5]]))
    with pytest.raises(ValueError):
        fit_exponent(np.column_stack([t, -t]))
    with pytest.raises(ValueError):
        fit_exponent(np.column_stack([t, t]), window=(5, 5))


def test_tl_x_slope_in_q4():
    ray = tl_ray(DIMS, "Q4", np.geomspace(1e2, 1e4, 10), 1e9, True)
    assert fit_exponent(ray).slope == pytest.approx(-2.0, abs=0.1)


def test_table_shapes_and_kinds():
    for dims in [(1.5, 1.8), (1.5, 2.0), (1.5, 3.0), (2.5, 3.5)]:
        t = low_energy_table(Dimensions(*dims))
        assert set(t) == {"Q1", "Q2", "Q3", "Q4"}
        assert all(set(v) == {"x_small", "x_large"} for v in t.values())
    assert entry_kind(DIMS, "Q1", "x_small") == "envelope"
    assert entry_kind(DIMS, "Q4", "x_large") == "two-sided"
    assert entry_kind(Dimensions(1.5, 2.0), "Q2", "x_large") == "envelope"


@pytest.mark.parametrize("q,regime", [("Q2", "x_small"), ("Q4", "x_large"), ("Q1", "x_large")])
def test_appendix_examples(q, regime):
    res = appendix_check(DIMS, q, regime, design=RayDesign(points=10))
    assert res.ok(), (res.x_fit.slope, res.y_fit.slope, res.predicted)


def test_appendix_rejects_bad_labels():
    with pytest.raises(ValueError):
        appendix_check(DIMS, "Q5", "x_small")

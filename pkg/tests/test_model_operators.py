import math

import numpy as np
import pytest

from brokenline.broken_line import Dimensions, build_grid, lp_norm
from brokenline.model_operators import (CounterexampleSpec, HHParams, counterexample, counterexample_image,
                                        hh_apply, hh_kernel_apply, hlp_norm_integral, ij_exponent, ij_integral,
                                        radial_grid, selector, th_kernel_matrix, th_model_apply, tij_envelope)
from brokenline.riesz_kernel import fit_exponent


def test_r1_indicator_example():
    g = radial_grid(8.0, 6000, scheme="linear")
    P = HHParams(2.0, 1.0, 1.0, 1.0, 3.0, 3.0)
    out = hh_apply(P, "R1", g.indicator(2.0, 4.0), g)
    assert out[0] == pytest.approx(6.0, rel=2e-3)
    x = g.r[np.argmin(np.abs(g.r - 3.0))]
    assert out[np.argmin(np.abs(g.r - 3.0))] == pytest.approx((16 - x * x) / 2 / x**2, rel=5e-3)


def test_r2_of_zero():
    g = radial_grid(100.0, 64)
    assert np.all(hh_apply(HHParams(1, 1, 1, 1, 2, 2), "R2", np.zeros(64), g) == 0)
    with pytest.raises(ValueError):
        hh_apply(HHParams(1, 1, 1, 1, 2, 2), "R3", np.zeros(64), g)


def test_adjoint_relation():
    g = radial_grid(1e3, 500)
    P = HHParams(1.3, 0.7, 2.1, 0.4, 1.5, 3.0)
    rng = np.random.default_rng(5)
    f, h = rng.random((2, 500))
    lhs = np.sum(g.weights(P.n2) * hh_apply(P, "R1", f, g) * h)
    rhs = np.sum(g.weights(P.n1) * f * hh_apply(P.adjoint(), "R2", h, g))
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_kernel_apply_samples_each_pair_once():
    g = radial_grid(10.0, 40)
    P = HHParams(1.0, 2.0, 0.5, 0.5, 2.0, 2.0)
    f = np.ones(40)
    assert np.allclose(hh_kernel_apply(P, f, g), hh_apply(P, "R1", f, g) + hh_apply(P, "R2", f, g, strict=True))


def test_strong_range():
    P = HHParams(2.0, 1.0, 2.0, 0.0, 3.0, 3.0)
    lo, hi = P.strong_range()
    assert lo == 1.5 and hi == 1.5
    assert not P.strong_type(1.5)
    with pytest.raises(ValueError):
        HHParams(-1, 0, 0, 0, 2, 2)


def _model_kernel(d1):
    return lambda x: np.where(x <= 1, x ** (1 - d1), x ** (-d1))


def test_hlp_finite_case():
    res = hlp_norm_integral(_model_kernel(1.5), 1.5, 1.5, 1.5, delta=1.5)
    assert res.converged and res.value == pytest.approx(4.0, rel=1e-6)


def test_hlp_divergence_flag():
    res = hlp_norm_integral(_model_kernel(1.5), 3.0, 1.5, 1.5)
    assert not res.converged


def test_hlp_closed_form_two():
    # n2/p - 1 = 0, so the weight is trivial
    res = hlp_norm_integral(lambda x: np.where(x >= 1, x**-2.0, 1.0), 2.0, 2.0, 2.0, delta=2.0)
    assert res.converged and res.value == pytest.approx(2.0, rel=1e-6)
    with pytest.raises(ValueError):
        hlp_norm_integral(np.ones_like, 2.0, 2.0, 2.0, delta=3.0)


def test_th_kernel_symmetry_and_corner():
    g = radial_grid(50.0, 200)
    K = th_kernel_matrix(1.2, 1.2, 1.0, g)
    assert np.max(np.abs(K - K.T)) <= 1e-10 * np.max(np.abs(K))
    assert np.all(np.isfinite(K)) and K[0, 0] > 0
    f = np.ones(200)
    assert np.allclose(th_model_apply(1.2, 1.2, 1.0, 2.0, 2.0, f, g), K @ (g.weights(2.0) * f))
    with pytest.raises(ValueError):
        th_kernel_matrix(0.0, 1.0, 1.0, g)


def test_selector():
    assert [selector(1, 2), selector(2, 1), selector(1, 1), selector(2, 2)] == ["A", "A", "C", "B"]
    with pytest.raises(ValueError):
        selector(3, 1)


def test_tij_envelope_values():
    d = Dimensions(1.5, 3.0)
    assert tij_envelope(d, 1, 1, 2.0) == pytest.approx(-0.75)
    assert tij_envelope(d, 2, 1, 2.0) == pytest.approx(-0.75 - 1.5)
    assert tij_envelope(d, 1, 2, 2.0) == pytest.approx(-1.5)
    assert tij_envelope(d, 1, 2, 6.0) == pytest.approx(-2.0)
    assert tij_envelope(d, 2, 2, 6.0) == pytest.approx(-3.5)
    assert tij_envelope(d, 1, 2, 3.0, eps=0.1) == pytest.approx(-2.0 + 0.1)
    d4 = Dimensions(2.5, 3.5)
    assert tij_envelope(d4, 2, 2, 2.0) == pytest.approx(2 - 3.5 - 1.75)
    assert tij_envelope(d4, 2, 2, 50.0) == pytest.approx(-3.5)


def test_tij_envelope_eps_constraint():
    d = Dimensions(1.5, 3.0)
    with pytest.raises(ValueError):
        tij_envelope(d, 1, 2, 3.0, eps=1.5)
    with pytest.raises(ValueError):
        tij_envelope(d, 2, 2, 3.0, eps=0.6)
    with pytest.raises(ValueError):
        tij_envelope(d, 1, 1, 1.0)


@pytest.mark.parametrize("d_j,q", [(1.5, 2.0), (3.0, 2.0), (3.0, 6.0)])
def test_ij_slopes(d_j, q):
    lam = np.geomspace(1e-3, 1e-1, 12)
    fit = fit_exponent(np.column_stack([lam, [ij_integral(d_j, t, q) for t in lam]]))
    assert fit.slope == pytest.approx(ij_exponent(d_j, q), abs=0.05)


def test_ij_domain():
    with pytest.raises(ValueError):
        ij_integral(3.0, 2.0, 2.0)


def test_counterexample_defaults_and_invariant():
    assert CounterexampleSpec(Dimensions(1.5, 3.0), 10.0).beta == 1.0
    assert CounterexampleSpec(Dimensions(2.5, 3.5), 10.0).beta == 1.5
    with pytest.raises(ValueError):
        CounterexampleSpec(Dimensions(2.0, 3.0), 10.0)
    with pytest.raises(ValueError):
        CounterexampleSpec(Dimensions(1.5, 3.0), 10.0, beta=1.5)


def test_counterexample_image_growth():
    d = Dimensions(1.5, 3.0)
    for R in (10.0, 1e4):
        assert counterexample_image(CounterexampleSpec(d, R)) == pytest.approx(math.log(1 + math.log(R)), rel=1e-9)
    assert counterexample_image(CounterexampleSpec(d, math.exp(math.e - 1))) == pytest.approx(1.0, rel=1e-9)


def test_counterexample_samples():
    d = Dimensions(1.5, 3.0)
    g = build_grid(d, 1e6, 4000)
    f = counterexample(CounterexampleSpec(d, 1e6), g)
    assert np.all(f.values[g.side > 0] == 0)
    assert lp_norm(f, 3) == pytest.approx(2 ** (-1 / 3), rel=0.01)
    with pytest.raises(ValueError):
        counterexample(CounterexampleSpec(d, 1e7), g)

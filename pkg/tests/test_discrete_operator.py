import warnings

import numpy as np
import pytest

from brokenline.discrete_operator import (KernelComponentWarning, ResolventCalculus, assemble, gradient, riesz_apply,
                                 spectral)
from brokenline.broken_line import Dimensions, GridFunction, build_grid, lp_norm
from brokenline.riesz_kernel import fit_exponent, riesz_kernel

ALL_DIMS = [Dimensions(1.5, 1.8), Dimensions(1.5, 2.0), Dimensions(1.5, 3.0), Dimensions(2.5, 3.5)]


def smooth(g, c=3.0):
    return g.sample(lambda x: np.exp(-np.log(np.abs(x) / c) ** 2) * (1 + 0.3 * np.sign(x)))


@pytest.fixture(scope="module")
def small():
    g = build_grid(Dimensions(1.5, 3.0), 50.0, 300)
    op = assemble(g)
    return g, op, spectral(op)


def test_integration_by_parts(small):
    g, op, _ = small
    rng = np.random.default_rng(1)
    u, v = rng.standard_normal((2, op.size))
    lhs = op.node_inner(op.apply(u), v)
    rhs = op.edge_inner(gradient(op, u).values, gradient(op, v).values)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_spectrum_and_reconstruction(small):
    _, op, sd = small
    assert sd.eigenvalues.min() >= 0
    assert sd.reconstruction_error() <= 1e-10
    rng = np.random.default_rng(2)
    for _ in range(5):
        u = rng.standard_normal(op.size)
        rq = op.node_inner(op.apply(u), u) / op.node_inner(u, u)
        assert sd.eigenvalues[0] * (1 - 1e-10) <= rq <= sd.eigenvalues[-1] * (1 + 1e-10)


def test_half_powers_compose(small):
    g, op, sd = small
    f = smooth(g)
    twice = sd.apply_power(0.5, sd.apply_power(0.5, f))
    direct = op.apply_laplacian(f)
    assert np.max(np.abs(twice.values - direct.values)) <= 1e-8 * np.max(np.abs(direct.values))
    back = sd.apply_power(0.5, sd.apply_power(-0.5, f))
    proj = op.project(f)
    assert np.max(np.abs(back.values - proj.values)) <= 1e-8


@pytest.mark.parametrize("dims", ALL_DIMS, ids=str)
@pytest.mark.parametrize("R", [50.0, 200.0])
def test_riesz_isometry(dims, R):
    g = build_grid(dims, R, 2000)
    op = assemble(g)
    sd = spectral(op)
    f = op.project(smooth(g))
    grad = riesz_apply(sd, op, f)
    assert lp_norm(grad, 2) / lp_norm(f, 2) == pytest.approx(1.0, abs=1e-10)


def test_gradient_of_abs_x():
    g = build_grid(Dimensions(1.5, 3.0), 20.0, 200)
    op = assemble(g)
    slopes = gradient(op, g.sample(np.abs)).values
    inner = slice(1, -1)
    assert np.allclose(np.abs(slopes[inner]), 1.0)
    assert np.all(slopes[: len(slopes) // 2][1:] < 0) and np.all(slopes[len(slopes) // 2:][:-1] > 0)
    nodes = gradient(op, g.sample(np.abs), nodes=True)
    assert isinstance(nodes, GridFunction)


@pytest.mark.parametrize("s", [-0.5, -0.25, 0.5])
def test_calculi_agree(small, s):
    g, op, sd = small
    rc = ResolventCalculus(op)
    f = smooth(g)
    a = sd.apply_power(s, f).values
    b = rc.apply_power(s, f).values
    assert np.max(np.abs(a - b)) <= 1e-8 * np.max(np.abs(a))


def test_calculus_limits(small):
    g, op, sd = small
    rc = ResolventCalculus(op)
    with pytest.raises(ValueError):
        rc.apply_power(-1.5, smooth(g))
    with pytest.raises(ValueError):
        sd.apply_power(-1.0, smooth(g))
    f = smooth(g)
    assert np.array_equal(rc.apply_power(1, f).values, op.apply_laplacian(f).values)


def test_kernel_warning_not_raised_for_positive_operator(small):
    g, _, sd = small
    with warnings.catch_warnings():
        warnings.simplefilter("error", KernelComponentWarning)
        sd.apply_power(-0.5, smooth(g))


def test_resolvent_column_is_positive(small):
    _, op, _ = small
    col = op.resolvent_column(0.5, 4.0)
    assert np.all(col.values[1:-1] >= 0)


def test_assemble_rejects_edge_grids(small):
    _, op, _ = small
    with pytest.raises(ValueError):
        assemble(op.edge_grid)


def test_far_field_matches_kernel():
    # a bump near 100 on the positive side; far away the discrete transform follows the kernel
    dims = Dimensions(1.5, 3.0)
    g = build_grid(dims, 1e5, 4000)
    op = assemble(g)
    rc = ResolventCalculus(op)
    bump = g.sample(lambda x: np.where(x > 0, np.exp(-(np.log(np.abs(x) / 100.0) / 0.05) ** 2), 0.0))
    edges = riesz_apply(rc, op, bump)
    ex = op.edge_x
    for sign in (1, -1):
        sel = (np.abs(ex) > 2e3) & (np.abs(ex) < 1e4) & (np.sign(ex) == sign)
        got = fit_exponent(np.column_stack([np.abs(ex[sel]), np.abs(edges.values[sel])])).slope
        probe = np.geomspace(2e3, 1e4, 8)
        want = fit_exponent(np.column_stack([probe, [abs(riesz_kernel(dims, sign * t, 100.0)) for t in probe]])).slope
        assert got == pytest.approx(want, abs=0.1), sign

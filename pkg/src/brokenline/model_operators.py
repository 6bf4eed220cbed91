"""Model integral operators on truncated half-lines ``[1, R]``.

* Hardy-Hilbert pair ``R1, R2`` of the two-branch power kernel
  ``x^-a y^-b`` (``x <= y``) / ``x^-a' y^-b'`` (``x > y``), evaluated with
  suffix/prefix sums;
* the multiplicative-convolution integral deciding ``L^p`` bounds of
  homogeneous kernels;
* the high-energy model kernel ``x^-a y^-b exp(-c (x+y-2)/min) / (x+y-2)``;
* the reverse-Riesz operators ``T_ij`` and the integrals ``I_j(lam)``;
* the counterexample family for the critical exponent.

Functions on a half-line are plain arrays sampled on a :class:`RadialGrid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate as sp_integrate

from . import quadrature as quad
from .broken_line import NEG, POS, Dimensions, Grid, GridFunction, hat_weights
from .resolvent import scaled_coefficients
from .specfun import profile_scaled


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Radii ``1 = r_0 < ... < r_{N-1} = R``; weights are per measure power."""

    r: np.ndarray

    @property
    def R(self) -> float:
        return float(self.r[-1])

    def weights(self, n: float) -> np.ndarray:
        return self._cache.setdefault(float(n), hat_weights(n, self.r))

    @cached_property
    def _cache(self) -> dict:
        return {}

    def indicator(self, lo: float, hi: float) -> np.ndarray:
        return ((self.r >= lo) & (self.r <= hi)).astype(float)


def radial_grid(R: float, points: int, scheme: str = "log") -> RadialGrid:
    if not R > 1 or points < 16:
        raise ValueError("need R > 1 and at least 16 points")
    r = np.geomspace(1.0, R, points) if scheme == "log" else np.linspace(1.0, R, points)
    r[0], r[-1] = 1.0, R
    return RadialGrid(r)


# ---------------------------------------------------------------- R1 / R2


@dataclass(frozen=True)
class HHParams:
    alpha: float
    beta: float
    alpha_p: float
    beta_p: float
    n1: float
    n2: float

    def __post_init__(self):
        if min(self.alpha, self.beta, self.alpha_p, self.beta_p) < 0:
            raise ValueError("kernel exponents must be nonnegative")
        if not (self.n1 > 1 and self.n2 > 1):
            raise ValueError("measure powers must exceed 1")

    def strong_range(self) -> tuple:
        """Open ``p``-interval of the strong-type criterion (empty if the two
        side conditions fail for every ``p`` in it)."""
        lo = self.n2 / min(self.n2, self.alpha_p) if self.alpha_p > 0 else math.inf
        gap = self.n1 - self.beta
        hi = self.n1 / gap if gap > 0 else math.inf
        return lo, hi

    def strong_type(self, p: float) -> bool:
        lo, hi = self.strong_range()
        d = self.n2 - self.n1
        return (lo < p < hi and p * (self.alpha + self.beta - self.n1) > d
                and p * (self.alpha_p + self.beta_p - self.n1) > d)

    def adjoint(self) -> "HHParams":
        """Parameters making ``R2`` equal the adjoint of ``R1``."""
        return HHParams(self.alpha, self.beta, self.beta, self.alpha, self.n2, self.n1)


def hh_apply(params: HHParams, which: str, f, grid: RadialGrid, strict: bool = False) -> np.ndarray:
    """``R1 f`` (suffix sums) or ``R2 f`` (prefix sums), O(N).

    Both sums include the diagonal node, which keeps the discrete adjoint
    relation exact; ``strict=True`` drops it from ``R2`` so that
    ``R1 + R2`` samples the full kernel once.
    """
    f = np.asarray(f, dtype=float)
    r = grid.r
    w = grid.weights(params.n1)
    if which == "R1":
        s = (w * r ** -params.beta * f)[::-1].cumsum()[::-1]
        return r ** -params.alpha * s
    if which == "R2":
        terms = w * r ** -params.beta_p * f
        s = terms.cumsum()
        if strict:
            s = s - terms
        return r ** -params.alpha_p * s
    raise ValueError("which must be 'R1' or 'R2'")


def hh_kernel_apply(params: HHParams, f, grid: RadialGrid) -> np.ndarray:
    return hh_apply(params, "R1", f, grid) + hh_apply(params, "R2", f, grid, strict=True)


# ---------------------------------------------------------------- homogeneous kernels


@dataclass(frozen=True)
class HLPResult:
    value: float
    converged: bool
    partial: tuple  # partial integrals over [e^-T, e^T], T doubling


def hlp_norm_integral(kernel, p: float, n1: float, n2: float, delta: float | None = None,
                      rel_tol: float = 1e-6, spans=(8, 16, 32, 64, 128, 256)) -> HLPResult:
    """``int_0^inf K(x, 1) x^{n2/p - 1} dx`` with a Cauchy divergence test.

    ``kernel`` is a vectorised callable ``x -> K(x, 1)``.  In ``t = log x``
    the partial integrals over ``[-T, T]`` are compared across doubling
    ``T``; the result is flagged divergent when they keep moving.
    """
    if not p > 1:
        raise ValueError("p must exceed 1")
    expected = n2 / p + n1 * (1.0 - 1.0 / p)
    if delta is not None and abs(delta - expected) > 1e-9 * max(1.0, expected):
        raise ValueError(f"delta must equal n2/p + n1/p' = {expected}")
    s = n2 / p

    def g(t):
        x = np.exp(t)
        return kernel(x) * x**s

    partial = []
    prev_T = 0.0
    total = 0.0
    for T in spans:
        for a, b in ((-T, -prev_T), (prev_T, T)):
            total += quad.integrate(g, a, b, rel_tol=1e-10, breakpoints=np.arange(a, b, 1.0)[1:]).value
        partial.append(total)
        prev_T = T
    last = abs(partial[-1] - partial[-2])
    before = abs(partial[-2] - partial[-3])
    converged = bool(np.isfinite(total) and last <= rel_tol * abs(total) and last <= before + 1e-300)
    return HLPResult(float(partial[-1]), converged, tuple(partial))


# ---------------------------------------------------------------- high-energy model kernel


def th_kernel_matrix(a: float, b: float, c: float, grid: RadialGrid) -> np.ndarray:
    """Kernel samples; the singular corner ``x = y = 1`` gets its cell average."""
    if min(a, b, c) <= 0:
        raise ValueError("a, b, c must be positive")
    r = grid.r
    x, y = r[:, None], r[None, :]
    s = x + y - 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        K = x**-a * y**-b * np.exp(-c * s / np.minimum(x, y)) / s
    # average of 1/(s + t) over [0, h]^2 is 2 log 2 / h; the exponential is 1 there
    h = 0.5 * (r[1] - r[0])
    K[0, 0] = 2.0 * math.log(2.0) / h
    return K


def th_model_apply(a: float, b: float, c: float, n1: float, n2: float, f, grid: RadialGrid,
                   matrix: np.ndarray | None = None) -> np.ndarray:
    """``int K(x, y) f(y) dmu_1(y)`` by dense matrix application (``n2`` only
    enters when norms are taken on the output)."""
    K = th_kernel_matrix(a, b, c, grid) if matrix is None else matrix
    return K @ (grid.weights(n1) * np.asarray(f, dtype=float))


# ---------------------------------------------------------------- reverse-Riesz operators


def _k_profile(d: float, t):
    """``k_d(t)`` with its exponential restored (underflows cleanly)."""
    t = np.asarray(t, dtype=float)
    return profile_scaled(d, t).k * np.exp(-t)


def selector(i: int, j: int) -> str:
    if (i, j) in ((1, 2), (2, 1)):
        return "A"
    if (i, j) == (1, 1):
        return "C"
    if (i, j) == (2, 2):
        return "B"
    raise ValueError("i and j must be 1 or 2")


def low_coefficient(dims: Dimensions, which: str, lam):
    """Unscaled ``A``, ``B`` or ``C`` for ``lam <= 1``."""
    sc = scaled_coefficients(dims, lam)
    return getattr(sc, which) * np.exp(2.0 * np.asarray(lam))


@dataclass(frozen=True)
class TijResult:
    values: GridFunction
    error: float
    converged: bool


def tij_apply(dims: Dimensions, i: int, j: int, g: GridFunction, tol: float = 1e-8,
              lam_min: float | None = None) -> TijResult:
    """``|x| int_0^1 lam^2 F k_i(lam|x|) int k_j(lam|y|) g dmu(y) dlam`` on side ``i``.

    The ``y``-integral is the grid quadrature; the ``lam``-integral runs in
    ``u = log lam`` over ``[log lam_min, 0]`` with vector-valued adaptive
    Gauss-Kronrod (``scipy.integrate.quad_vec``).
    """
    grid = g.grid
    side_i = NEG if i == 1 else POS
    side_j = NEG if j == 1 else POS
    di, dj = dims.d(side_i), dims.d(side_j)
    which = selector(i, j)
    on_i = grid.side == side_i
    on_j = grid.side == side_j
    xi = grid.radius[on_i]
    yj = grid.radius[on_j]
    gw = grid.weights[on_j] * g.values[on_j]
    lam_min = lam_min if lam_min is not None else 1e-6 / grid.R

    def integrand(u):
        lam = math.exp(u)
        H = float(np.dot(_k_profile(dj, lam * yj), gw))
        F = float(low_coefficient(dims, which, lam))
        return lam**3 * F * H * _k_profile(di, lam * xi)

    res, err = sp_integrate.quad_vec(integrand, math.log(lam_min), 0.0, epsrel=tol, norm="max",
                                     points=list(np.arange(math.ceil(math.log(lam_min)), 0.0, 2.0)),
                                     limit=2000)
    out = np.zeros(len(grid))
    out[on_i] = xi * res
    scale = max(float(np.abs(res).max()), 1e-300)
    return TijResult(GridFunction(grid, out), float(err), bool(err <= max(tol * scale * 10, 1e-300)))


def tij_envelope(dims: Dimensions, i: int, j: int, q: float, eps: float = 0.05) -> float:
    """Predicted ``|x|``-exponent of the pointwise bound on ``T_ij g`` for ``g``
    in ``L^{q'}``.

    At the critical ``q = d/(d-2)`` the bound loses ``|x|^eps``.  In case 3
    ``eps`` must stay below ``(d2-d1)/q'`` for ``(1,2)`` and below ``2-d1``
    for ``(2,2)``; a value violating that raises ``ValueError``.
    """
    selector(i, j)
    if not (q > 1 and eps > 0):
        raise ValueError("need q > 1 and eps > 0")
    d1, d2 = dims.d1, dims.d2
    qp = q / (q - 1.0)
    case = dims.case()
    di = d1 if i == 1 else d2
    dj = d1 if j == 1 else d2
    if case in (1, 2) or (case == 3 and j == 1):
        # |k_i| <= 1 near zero: |x|^{-d_j/q'} on side 1, one more factor |x|^{d1-d2} on side 2
        return -dj / qp + (0.0 if i == 1 else d1 - d2)
    crit = dj / (dj - 2.0)
    on_crit = math.isclose(q, crit, rel_tol=1e-12)
    if case == 3:
        if on_crit:
            limit = (d2 - d1) / qp if i == 1 else 2.0 - d1
            if not eps < limit:
                raise ValueError(f"eps must be below {limit:g} here")
        shift = 0.0 if i == 1 else d1 - d2
        if q < crit and not on_crit:
            return -d2 / qp + shift
        if on_crit:
            return (-d2 / qp if i == 1 else -2.0) + eps + shift
        return -2.0 + shift
    if on_crit:
        return 2.0 - di - dj / qp + eps
    if q < crit:
        return 2.0 - di - dj / qp
    return -di


def ij_integral(d_j: float, lam: float, q: float, tol: float = 1e-10) -> float:
    """``I_j(lam) = [int_1^inf k_j(lam y)^q y^{d_j - 1} dy]^{1/q}``.

    Computed as ``lam^{-d_j/q} [int_lam^inf k(t)^q t^{d_j-1} dt]^{1/q}``.
    """
    if not (0 < lam <= 1 and q > 1):
        raise ValueError("need 0 < lam <= 1 and q > 1")

    def h(t):
        return _k_profile(d_j, t) ** q * t ** (d_j - 1.0)

    head = quad.integrate(h, lam, 1.0, rel_tol=tol, breakpoints=quad.log_panels(lam, 1.0, 2)).value
    tail = quad.integrate_tail(h, 1.0, q, rel_tol=tol, growth=max(d_j, 1.0), scale=head).value
    return lam ** (-d_j / q) * (head + tail) ** (1.0 / q)


def ij_exponent(d_j: float, q: float) -> float:
    """Predicted small-``lam`` exponent of ``I_j``."""
    if d_j <= 2 or q < d_j / (d_j - 2.0):
        return -d_j / q
    return 2.0 - d_j


# ---------------------------------------------------------------- counterexample


@dataclass(frozen=True)
class CounterexampleSpec:
    dims: Dimensions
    R: float
    beta: float | None = None
    p0: float | None = None

    def __post_init__(self):
        d1 = self.dims.d1
        if self.beta is None:
            if d1 == 2:
                raise ValueError("no default beta when d1 = 2")
            object.__setattr__(self, "beta", 1.0 if d1 < 2 else d1 - 1.0)
        if self.p0 is None:
            object.__setattr__(self, "p0", self.dims.p0)
        if not self.beta < d1:
            raise ValueError("beta must be below d1")
        if not self.R > 1:
            raise ValueError("R must exceed 1")


def counterexample_profile(spec: CounterexampleSpec, r):
    r = np.asarray(r, dtype=float)
    return r ** (spec.beta - spec.dims.d1) / (1.0 + np.log(r))


def counterexample(spec: CounterexampleSpec, grid: Grid) -> GridFunction:
    """``|y|^{beta - d1} / (1 + log|y|)`` on the ``d1`` ray up to ``R``, zero elsewhere."""
    if grid.R < spec.R:
        raise ValueError("grid does not reach R")
    r = grid.radius
    on = (grid.side == NEG) & (r <= spec.R)
    vals = np.where(on, counterexample_profile(spec, np.where(on, r, 1.0)), 0.0)
    return GridFunction(grid, vals)


def counterexample_image(spec: CounterexampleSpec, x: float = 1.0, tol: float = 1e-10) -> float:
    """``int_x^R y^{-beta} f(y) y^{d1 - 1} dy``, by quadrature in ``t = log y``."""
    d1 = spec.dims.d1

    def h(t):
        y = np.exp(t)
        return y ** (d1 - spec.beta) * counterexample_profile(spec, y)

    return quad.integrate(h, math.log(x), math.log(spec.R), rel_tol=tol).value

"""The broken line ``(-inf, -1] U [1, inf)``, its measure and sampled functions.

The measure is ``|r|^{d1-1} dr`` on the negative ray and ``r^{d2-1} dr`` on
the positive ray.  Grids are truncated at radius ``R`` and carry lumped
quadrature weights (exact integrals of the piecewise-linear hat functions
against the density), so every norm below is a weighted sum.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

NEG, POS = -1, 1

# 5-point Gauss-Legendre on [0, 1] for per-cell density integrals
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class Dimensions:
    d1: float
    d2: float

    def __post_init__(self):
        if not (self.d1 > 1 and self.d2 >= self.d1):
            raise ValueError(f"need 1 < d1 <= d2, got ({self.d1}, {self.d2})")
        if max(self.d1, self.d2) > 20:
            raise ValueError("dimensions above 20 are not supported")

    @property
    def d_star(self) -> float:
        return min(self.d1, self.d2)

    @property
    def p0(self) -> float:
        ds = self.d_star
        return max(ds, ds / (ds - 1.0))

    def d(self, side: int) -> float:
        return self.d1 if side == NEG else self.d2

    def case(self) -> int:
        """Which of the four configurations of the pair (1-based)."""
        d1, d2 = self.d1, self.d2
        if d2 < 2:
            return 1
        if d2 == 2 and d1 < 2:
            return 2
        if d1 < 2 < d2:
            return 3
        if d1 > 2:
            return 4
        raise ValueError(f"dimension pair {d1, d2} is outside the four model cases")


@dataclass(frozen=True)
class BrokenPoint:
    side: int
    radius: float

    def __post_init__(self):
        if self.side not in (NEG, POS):
            raise ValueError("side must be -1 or +1")
        if not self.radius >= 1.0:
            raise ValueError("radius must be >= 1")

    @property
    def coordinate(self) -> float:
        return self.side * self.radius

    @classmethod
    def from_coordinate(cls, x: float) -> "BrokenPoint":
        if abs(x) < 1.0:
            raise ValueError("|x| must be >= 1 on the broken line")
        return cls(POS if x > 0 else NEG, abs(x))


def density(dims: Dimensions, x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, np.abs(x) ** (dims.d1 - 1.0), np.abs(x) ** (dims.d2 - 1.0))


def side_mass(d: float, a: float, b: float) -> float:
    """``int_a^b r^{d-1} dr``."""
    return (b**d - a**d) / d


def cell_integrals(d: float, r: np.ndarray):
    """Per-cell integrals of ``r^{d-1}`` times the rising/falling hat halves.

    Returns ``(rise, fall, whole)`` for the cells ``[r_k, r_{k+1}]``:
    ``rise`` weights the right node, ``fall`` the left node.
    """
    a, b = r[:-1], r[1:]
    h = b - a
    t = _GL_X[None, :]
    pts = a[:, None] + h[:, None] * t
    dens = pts ** (d - 1.0)
    rise = h * ((dens * t) @ _GL_W)
    fall = h * ((dens * (1.0 - t)) @ _GL_W)
    return rise, fall, rise + fall


def hat_weights(d: float, r: np.ndarray) -> np.ndarray:
    """Lumped weights ``int phi_k r^{d-1} dr`` of the hat functions on ``r``."""
    rise, fall, _ = cell_integrals(d, r)
    w = np.zeros_like(r)
    w[:-1] += fall
    w[1:] += rise
    return w


@dataclass(frozen=True, eq=False)
class Grid:
    """Sample points on the truncated broken line with quadrature weights.

    ``x`` holds signed coordinates in ascending order.  Node grids contain
    both ``-1`` and ``+1``; edge grids (from :mod:`brokenline.discrete_operator`) hold
    edge midpoints with edge measures as weights.
    """

    dims: Dimensions
    R: float
    x: np.ndarray
    weights: np.ndarray
    scheme: str = "log"
    kind: str = "nodes"

    def __post_init__(self):
        if self.x.shape != self.weights.shape:
            raise ValueError("nodes and weights differ in length")
        self.x.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return len(self.x)

    @property
    def side(self):
        return np.where(self.x < 0, NEG, POS)

    @property
    def radius(self):
        return np.abs(self.x)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def points(self):
        return [BrokenPoint(int(s), float(r)) for s, r in zip(self.side, self.radius)]

    def sample(self, fn) -> "GridFunction":
        """Evaluate ``fn`` (vectorised over signed coordinates) on the nodes."""
        return GridFunction(self, np.asarray(fn(self.x), dtype=float))

    def indicator(self, lo: float, hi: float) -> "GridFunction":
        """Indicator of the signed-coordinate interval ``[lo, hi]``."""
        return GridFunction(self, ((self.x >= lo) & (self.x <= hi)).astype(float))

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(len(self)))


def build_grid(dims: Dimensions, R: float, nodes_per_side: int, scheme: str = "log") -> Grid:
    """Nodes at radii ``1 = r_0 < ... < r_{n-1} = R`` on each ray."""
    if not R > 1:
        raise ValueError("truncation R must exceed 1")
    if nodes_per_side < 16:
        raise ValueError("need at least 16 nodes per side")
    if scheme == "log":
        r = np.geomspace(1.0, R, nodes_per_side)
    elif scheme == "uniform":
        r = np.linspace(1.0, R, nodes_per_side)
    else:
        raise ValueError(f"unknown grid scheme {scheme!r}")
    r[0], r[-1] = 1.0, R
    xs, ws = [], []
    for side in (NEG, POS):
        w = hat_weights(dims.d(side), r)
        if side == NEG:
            xs.append(-r[::-1])
            ws.append(w[::-1])
        else:
            xs.append(r)
            ws.append(w)
    return Grid(dims, float(R), np.concatenate(xs), np.concatenate(ws), scheme)


def exact_mass(dims: Dimensions, R: float) -> float:
    return side_mass(dims.d1, 1.0, R) + side_mass(dims.d2, 1.0, R)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.x.shape:
            raise ValueError("values do not match the grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def __add__(self, other):
        return self.with_values(self.values + _vals(other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other))

    def __mul__(self, other):
        return self.with_values(self.values * _vals(other))

    __rmul__ = __mul__

    def __abs__(self):
        return self.with_values(np.abs(self.values))

    def inner(self, other: "GridFunction") -> float:
        return float(np.sum(self.grid.weights * self.values * _vals(other)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["side", "radius", "weight", "value"])
        for s, r, wt, v in zip(self.grid.side, self.grid.radius, self.grid.weights, self.values):
            w.writerow([int(s), repr(float(r)), repr(float(wt)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, dims: Dimensions, R: float | None = None) -> "GridFunction":
        rows = list(csv.DictReader(io.StringIO(text)))
        x = np.array([int(r["side"]) * float(r["radius"]) for r in rows])
        wts = np.array([float(r["weight"]) for r in rows])
        vals = np.array([float(r["value"]) for r in rows])
        order = np.argsort(x, kind="stable")
        grid = Grid(dims, float(R if R is not None else np.abs(x).max()), x[order], wts[order])
        return cls(grid, vals[order])


def _vals(other):
    return other.values if isinstance(other, GridFunction) else other


def weighted_lp(values, weights, p: float) -> float:
    """``(sum w |v|^p)^{1/p}``, scaled by the maximum to avoid overflow."""
    if p < 1:
        raise ValueError("p must be >= 1")
    a = np.abs(np.asarray(values, dtype=float))
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    m = a.max() if a.size else 0.0
    if m == 0:
        return 0.0
    return float(m * np.sum(np.asarray(weights) * (a / m) ** p) ** (1.0 / p))


def lp_norm(f: GridFunction, p: float) -> float:
    return weighted_lp(f.values, f.grid.weights, p)


def distribution_function(f: GridFunction, s: float) -> float:
    """Measure of ``{|f| > s}``."""
    if not s > 0:
        raise ValueError("level must be positive")
    return float(f.grid.weights[np.abs(f.values) > s].sum())


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous nonincreasing step function: ``values[k]`` on
    ``[breaks[k], breaks[k+1])`` and zero beyond ``breaks[-1]``."""

    breaks: np.ndarray
    values: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breaks, t, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.values))
        out = np.zeros(t.shape)
        out[inside] = self.values[idx[inside]]
        return out

    def measure_above(self, s: float) -> float:
        k = np.count_nonzero(self.values > s)
        return float(self.breaks[k])


def rearrangement(values, weights) -> StepFunction:
    a = np.abs(np.asarray(values, dtype=float))
    w = np.asarray(weights, dtype=float)
    keep = (a > 0) & (w > 0)
    a, w = a[keep], w[keep]
    order = np.argsort(-a, kind="stable")
    breaks = np.concatenate([[0.0], np.cumsum(w[order])])
    return StepFunction(breaks, a[order])


def decreasing_rearrangement(f: GridFunction) -> StepFunction:
    return rearrangement(f.values, f.grid.weights)


def weighted_lorentz(values, weights, p: float, q: float) -> float:
    """``||f||_{(p,q)}`` from the exact step rearrangement of weighted samples."""
    if not (p > 0 and q > 0):
        raise ValueError("Lorentz exponents must be positive")
    step = rearrangement(values, weights)
    v, t = step.values, step.breaks
    if v.size == 0:
        return 0.0
    if math.isinf(q):
        if math.isinf(p):
            return float(v[0])
        return float(np.max(v * t[1:] ** (1.0 / p)))
    if math.isinf(p):
        return math.inf
    a = q / p
    lo, hi = t[:-1], t[1:]
    # hi^a - lo^a without cancellation for thin steps
    safe = np.where(lo > 0, lo, 1.0)
    incr = np.where(lo > 0, safe**a * np.expm1(a * np.log1p((hi - lo) / safe)), hi**a)
    m = v[0]
    total = np.sum((v / m) ** q * incr) / a
    return float(m * total ** (1.0 / q))


def lorentz_norm(f: GridFunction, p: float, q: float) -> float:
    return weighted_lorentz(f.values, f.grid.weights, p, q)

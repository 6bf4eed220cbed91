"""Experiments that turn boundedness statements into measurable verdicts.

Verdict rules (fixed, recorded in every report):

* ``bounded-stable``: the largest relative change between ratios at
  consecutive truncations is at most ``DRIFT_LIMIT``;
* ``growth-witness``: ratios strictly increase along the sweep and a linear
  fit against the designated regressor reaches ``r2 >= R2_LIMIT``;
* ``inconclusive``: anything else.
"""

from __future__ import annotations

import math
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from .discrete_operator import ResolventCalculus, assemble, gradient
from .broken_line import NEG, POS, Dimensions, GridFunction, build_grid, weighted_lorentz, weighted_lp
from .model_operators import (CounterexampleSpec, HHParams, counterexample, hh_apply,
                              hh_kernel_apply, radial_grid, th_kernel_matrix)

DRIFT_LIMIT = 0.10
R2_LIMIT = 0.9
VERDICTS = ("bounded-stable", "growth-witness", "inconclusive")

REGRESSORS = {
    "loglog": lambda R: np.log1p(np.log(R)),
    "log": np.log,
}


@dataclass
class ProbeReport:
    experiment: str
    dims: tuple
    p: float
    q: float | None
    R: tuple
    ratios: tuple
    verdict: str
    fit_slope: float = math.nan
    fit_r2: float = math.nan
    seed: int = 0
    n_nodes: int = 0
    wall_ms: float = 0.0
    mode: str = "bounded"
    diagnostics: dict = field(default_factory=dict)

    def rows(self, timing: bool = False):
        q = "" if self.q is None else self.q
        for R, ratio in zip(self.R, self.ratios):
            yield {
                "experiment": self.experiment, "d1": self.dims[0], "d2": self.dims[1], "p": self.p,
                "q": q, "R": R, "n_nodes": self.n_nodes, "sup_ratio": ratio, "verdict": self.verdict,
                "fit_slope": self.fit_slope, "fit_r2": self.fit_r2, "seed": self.seed,
                "wall_ms": round(self.wall_ms) if timing else 0,
            }


REPORT_COLUMNS = ("experiment", "d1", "d2", "p", "q", "R", "n_nodes", "sup_ratio", "verdict",
                  "fit_slope", "fit_r2", "seed", "wall_ms")


def max_drift(ratios) -> float:
    r = np.asarray(ratios, dtype=float)
    if len(r) < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(r)) / r[:-1]))


def growth_fit(Rs, ratios, regressor: str = "loglog"):
    x = REGRESSORS[regressor](np.asarray(Rs, dtype=float))
    y = np.asarray(ratios, dtype=float)
    slope, icpt = np.polyfit(x, y, 1)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - slope * x - icpt) ** 2)) / ss_tot if ss_tot > 0 else 0.0
    return float(slope), r2


def classify(Rs, ratios, mode: str = "bounded", regressor: str = "loglog"):
    """Return ``(verdict, slope, r2)`` by the fixed rules above."""
    r = np.asarray(ratios, dtype=float)
    if not np.all(np.isfinite(r)):
        return "inconclusive", math.nan, math.nan
    slope, r2 = growth_fit(Rs, r, regressor) if len(r) >= 3 else (math.nan, math.nan)
    increasing = bool(np.all(np.diff(r) > 0))
    grows = increasing and len(r) >= 3 and r2 >= R2_LIMIT
    stable = max_drift(r) <= DRIFT_LIMIT
    order = (("growth-witness", grows), ("bounded-stable", stable)) if mode == "growth" else \
        (("bounded-stable", stable), ("growth-witness", grows))
    for name, ok in order:
        if ok:
            return name, slope, r2
    return "inconclusive", slope, r2


def cell_seed(seed: int, *key) -> int:
    """Deterministic per-cell seed from the run seed and a key."""
    tag = zlib.crc32(repr(key).encode())
    return int(np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32, tag]).generate_state(1)[0])


# ---------------------------------------------------------------- function families


def _bump(side, center, width):
    def fn(x):
        x = np.asarray(x, dtype=float)
        s = (np.log(np.maximum(np.abs(x), 1.0)) - math.log(center)) / width
        return np.where((np.sign(x) == side) & (np.abs(s) < 1), (1 - s * s) ** 2, 0.0)

    return fn


def _tail(side, gamma, s0, r_max):
    def fn(x):
        x = np.asarray(x, dtype=float)
        r = np.abs(x)
        v = np.where(np.sign(x) == side, r ** -gamma, 0.0)
        return v * junction_cutoff(r) * outer_cutoff(r, r_max) if s0 else v

    return fn


def _union(pieces, ramp):
    def fn(x):
        x = np.asarray(x, dtype=float)
        t = np.log(np.maximum(np.abs(x), 1.0))
        out = np.zeros_like(x)
        for side, a, b in pieces:
            if ramp > 0:
                v = np.clip(np.minimum(t - math.log(a), math.log(b) - t) / ramp + 0.5, 0.0, 1.0)
            else:
                v = ((t >= math.log(a)) & (t <= math.log(b))).astype(float)
            out = np.maximum(out, np.where(np.sign(x) == side, v, 0.0))
        return out

    return fn


def junction_cutoff(r):
    """Smooth factor vanishing at radius 1 (turns a function into an S_0 sample)."""
    r = np.asarray(r, dtype=float)
    return -np.expm1(-((r - 1.0) / 0.5) ** 2)


def outer_cutoff(r, r_max):
    """C^1 step from 1 (below ``r_max/4``) to 0 (at ``r_max``), linear in ``log r``."""
    t = np.clip((math.log(r_max) - np.log(np.asarray(r, dtype=float))) / math.log(4.0), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def random_sets(rng, count: int, r_max: float, max_pieces: int = 3, sides=(NEG, POS)):
    """Finite unions of intervals with log-uniform endpoints in ``[1, r_max]``."""
    sets = []
    for _ in range(count):
        pieces = []
        for _ in range(int(rng.integers(1, max_pieces + 1))):
            side = int(rng.choice(sides))
            a, b = np.sort(np.exp(rng.uniform(0.0, math.log(r_max), 2)))
            if b / a < 1.05:
                b = a * 1.05
            pieces.append((side, float(a), float(min(b, r_max))))
        sets.append(pieces)
    return sets


def default_family(dims: Dimensions, seed: int, p_min: float, r_max: float,
                   sizes=(20, 20, 10), s0: bool = False, tail_rule=None):
    """Seeded test family: bumps, admissible power tails, interval unions.

    Tails ``|x|^{-gamma}`` use ``gamma = d (1 + u) / p_min`` with
    ``u`` in ``[0.5, 2]``, so they lie in every ``L^p`` with ``p >= p_min``.
    ``s0=True`` makes every member compactly supported away from the
    junction: tails get :func:`junction_cutoff` and :func:`outer_cutoff`,
    indicator edges become ramps of width 0.1 in ``log r``.  ``tail_rule(side, rng)``
    overrides the tail exponent.
    """
    rng = np.random.default_rng(seed)
    n_bump, n_tail, n_set = sizes
    out = []
    for _ in range(n_bump):
        side = int(rng.choice((NEG, POS)))
        c = math.exp(rng.uniform(math.log(2.0), math.log(r_max / 2)))
        w = rng.uniform(0.1, 0.6)
        out.append(("bump", _bump(side, c, w)))
    for _ in range(n_tail):
        side = int(rng.choice((NEG, POS)))
        if tail_rule is None:
            gamma = dims.d(side) * (1.0 + rng.uniform(0.5, 2.0)) / p_min
        else:
            gamma = tail_rule(side, rng)
        out.append(("tail", _tail(side, gamma, s0, r_max)))
    for pieces in random_sets(rng, n_set, r_max):
        out.append(("set", _union(pieces, 0.1 if s0 else 0.0)))
    return out


def sample_family(family, op):
    """Columns of free-node vectors for every family member."""
    g = op.grid
    return np.column_stack([op.to_vector(g.sample(fn)) for _, fn in family])


# ---------------------------------------------------------------- discrete operator context


@dataclass
class OperatorContext:
    op: object
    calc: ResolventCalculus

    @classmethod
    def build(cls, dims: Dimensions, R: float, nodes: int, scheme: str = "log"):
        op = assemble(build_grid(dims, R, nodes, scheme))
        return cls(op, ResolventCalculus(op))

    def node_norms(self, V, p):
        return np.array([weighted_lp(V[:, k], self.op.mass, p) for k in range(V.shape[1])])

    def edge_norms(self, E, p):
        return np.array([weighted_lp(E[:, k], self.op.edge_measure, p) for k in range(E.shape[1])])

    def slopes(self, V):
        return gradient(self.op, V)


def _timer():
    t0 = time.perf_counter()
    return lambda: 1e3 * (time.perf_counter() - t0)


# ---------------------------------------------------------------- Hardy


def log_tent(dims: Dimensions, R: float):
    """``min(log|x|, log R - log|x|)`` on the ``d_*`` ray."""
    side = NEG if dims.d1 <= dims.d2 else POS

    def fn(x):
        x = np.asarray(x, dtype=float)
        t = np.log(np.maximum(np.abs(x), 1.0))
        return np.where(np.sign(x) == side, np.minimum(t, math.log(R) - t), 0.0)

    return fn


def hardy_tail(d: float, p: float, rng) -> float:
    """Tail exponent just above the Hardy threshold ``(d - p)/p``, where
    ``|x|^{-gamma}`` has ratio ``1/gamma`` (close to the sharp constant)."""
    base = (d - p) / p if d > p else 0.5
    return base * (1.0 + rng.uniform(0.05, 1.0))


def hardy_probe(dims: Dimensions, p: float, R_list, nodes: int = 2000, seed: int = 0,
                sizes=(20, 20, 10), witness: bool = False) -> ProbeReport:
    """Sup over an ``S_0`` family of ``||f/|x| ||_p / ||f'||_p`` per ``R``.

    ``witness=True`` replaces the family by the log-tent at each ``R``.
    """
    clock = _timer()
    s = cell_seed(seed, "hardy", dims, p)
    ratios = []
    for R in R_list:
        op = assemble(build_grid(dims, R, nodes))
        if witness:
            fams = [("tent", log_tent(dims, R))]
        else:
            fams = default_family(dims, s, p, min(R_list) / 2, sizes, s0=True,
                                  tail_rule=lambda side, rng: hardy_tail(dims.d(side), p, rng))
        V = sample_family(fams, op)
        E = gradient(op, V)
        x = np.abs(op.node_x)[:, None]
        num = np.array([weighted_lp(V[:, k] / x[:, 0], op.mass, p) for k in range(V.shape[1])])
        den = np.array([weighted_lp(E[:, k], op.edge_measure, p) for k in range(E.shape[1])])
        ratios.append(float(np.max(num / den)))
    mode = "growth" if witness else "bounded"
    verdict, slope, r2 = classify(R_list, ratios, mode, "log")
    bound = max(p / (dims.d(side) - p) for side in (NEG, POS)) if p < dims.d_star else math.inf
    return ProbeReport("hardy", (dims.d1, dims.d2), p, None, tuple(R_list), tuple(ratios), verdict,
                       slope, r2, s, nodes, clock(), mode, {"constant": bound})


# ---------------------------------------------------------------- Riesz transform


def riesz_lp_probe(dims: Dimensions, p_list, R_list, nodes: int = 4000, seed: int = 0,
                   sizes=(20, 20, 10)):
    """``sup_f ||grad L^{-1/2} f||_p / ||f||_p`` for every ``p`` and ``R``."""
    clock = _timer()
    s = cell_seed(seed, "riesz-lp", dims)
    fam = default_family(dims, s, min(p_list), min(R_list) / 2, sizes)
    table = {p: [] for p in p_list}
    for R in R_list:
        ctx = OperatorContext.build(dims, R, nodes)
        V = sample_family(fam, ctx.op)
        E = ctx.slopes(ctx.calc.inverse_power(0.5, V))
        for p in p_list:
            table[p].append(float(np.max(ctx.edge_norms(E, p) / ctx.node_norms(V, p))))
    wall = clock()
    out = []
    for p in p_list:
        verdict, slope, r2 = classify(R_list, table[p])
        out.append(ProbeReport("riesz-lp", (dims.d1, dims.d2), p, None, tuple(R_list), tuple(table[p]),
                               verdict, slope, r2, s, nodes, wall / len(p_list)))
    return out


def riesz_counterexample_probe(dims: Dimensions, R_list, nodes: int = 4000, beta=None,
                               p: float | None = None) -> ProbeReport:
    """Ratio at the critical exponent for the truncated counterexample."""
    clock = _timer()
    p = dims.p0 if p is None else p
    ratios = []
    for R in R_list:
        ctx = OperatorContext.build(dims, R, nodes)
        spec = CounterexampleSpec(dims, R, beta)
        v = ctx.op.to_vector(counterexample(spec, ctx.op.grid))
        e = ctx.slopes(ctx.calc.inverse_power(0.5, v)).values
        ratios.append(weighted_lp(e, ctx.op.edge_measure, p) / weighted_lp(v, ctx.op.mass, p))
    verdict, slope, r2 = classify(R_list, ratios, "growth", "loglog")
    return ProbeReport("riesz-lp", (dims.d1, dims.d2), p, None, tuple(R_list), tuple(ratios), verdict,
                       slope, r2, 0, nodes, clock(), "growth", {"beta": spec.beta})


def restricted_weak_probe(dims: Dimensions, R_list, nodes: int = 4000, seed: int = 0,
                          count: int = 30, p: float | None = None) -> ProbeReport:
    """``sup_E ||grad L^{-1/2} chi_E||_{(p,inf)} / ||chi_E||_{(p,1)}`` per ``R``.

    The same sets (radii below ``min(R)/2``) are used at every ``R``; the
    strong-norm ratio at ``p`` on the same sets is kept as a diagnostic.
    """
    clock = _timer()
    p = dims.p0 if p is None else p
    s = cell_seed(seed, "riesz-endpoint", dims)
    sets = random_sets(np.random.default_rng(s), count, min(R_list) / 2)
    fam = [("set", _union(pieces, 0.0)) for pieces in sets]
    ratios, spread = [], []
    for R in R_list:
        ctx = OperatorContext.build(dims, R, nodes)
        V = sample_family(fam, ctx.op)
        E = ctx.slopes(ctx.calc.inverse_power(0.5, V))
        lor = np.array([weighted_lorentz(E[:, k], ctx.op.edge_measure, p, math.inf)
                        / weighted_lorentz(V[:, k], ctx.op.mass, p, 1.0) for k in range(V.shape[1])])
        strong = ctx.edge_norms(E, p) / ctx.node_norms(V, p)
        ratios.append(float(lor.max()))
        spread.append((float(lor.max() / lor.min()), float(strong.max() / strong.min())))
    verdict, slope, r2 = classify(R_list, ratios)
    return ProbeReport("riesz-endpoint", (dims.d1, dims.d2), p, p, tuple(R_list), tuple(ratios), verdict,
                       slope, r2, s, nodes, clock(), "bounded", {"spread_lorentz_vs_strong": spread})


def reverse_riesz_probe(dims: Dimensions, p_list, R_list, nodes: int = 4000, seed: int = 0,
                        sizes=(20, 20, 10)):
    """``sup_f ||L^{1/2} f||_p / ||grad f||_p`` over an ``S_0`` family."""
    clock = _timer()
    s = cell_seed(seed, "reverse-riesz", dims)
    fam = default_family(dims, s, min(p_list), min(R_list) / 2, sizes, s0=True)
    table = {p: [] for p in p_list}
    for R in R_list:
        ctx = OperatorContext.build(dims, R, nodes)
        V = sample_family(fam, ctx.op)
        H = ctx.calc.inverse_power(0.5, ctx.op.apply(V))
        E = ctx.slopes(V)
        for p in p_list:
            table[p].append(float(np.max(ctx.node_norms(H, p) / ctx.edge_norms(E, p))))
    wall = clock()
    out = []
    for p in p_list:
        verdict, slope, r2 = classify(R_list, table[p])
        diag = {"diagnostic_only": bool(abs(p - dims.d_star) < 1e-12 and dims.d_star < 2)}
        out.append(ProbeReport("reverse-riesz", (dims.d1, dims.d2), p, None, tuple(R_list), tuple(table[p]),
                               verdict, slope, r2, s, nodes, wall / len(p_list), "bounded", diag))
    return out


def duality_identity_probe(dims: Dimensions, R: float, nodes: int = 2000, seed: int = 0,
                           pairs: int = 20) -> ProbeReport:
    """Max relative defect of ``<L^{1/2} f, g> = <G f, G L^{-1/2} g>`` over random pairs."""
    clock = _timer()
    s = cell_seed(seed, "duality", dims, R)
    ctx = OperatorContext.build(dims, R, nodes)
    op = ctx.op
    fam = default_family(dims, s, 2.0, R / 2, (pairs, pairs, 0))
    V = sample_family(fam, op)
    F, Gm = V[:, :pairs], V[:, pairs:2 * pairs]
    half = ctx.calc.inverse_power(0.5, op.apply(F))
    inv = ctx.calc.inverse_power(0.5, Gm)
    gf, gi = gradient(op, F), gradient(op, inv)
    defects = []
    for k in range(pairs):
        lhs = op.node_inner(half[:, k], Gm[:, k])
        rhs = op.edge_inner(gf[:, k], gi[:, k])
        scale = math.sqrt(op.edge_inner(gf[:, k], gf[:, k]) * op.edge_inner(gi[:, k], gi[:, k]))
        defects.append(abs(lhs - rhs) / scale)
    # f = g: both sides equal ||L^{1/4} f||^2
    quarter = ctx.calc.apply_power(0.25, F[:, 0])
    self_gap = abs(op.node_inner(half[:, 0], F[:, 0]) - op.node_inner(quarter, quarter))
    self_gap /= op.node_inner(quarter, quarter)
    worst = float(max(defects))
    verdict = "bounded-stable" if worst <= 1e-10 else "inconclusive"
    return ProbeReport("duality", (dims.d1, dims.d2), 2.0, None, (R,), (worst,), verdict, math.nan,
                       math.nan, s, nodes, clock(), "identity",
                       {"self_pair_gap": float(self_gap), "excluded": 0})


# ---------------------------------------------------------------- model-operator sweeps


def _radial_family(rng, n_power, p, r_max, sizes=(20, 20, 10)):
    """Bumps, tails inside ``L^p(r^{n-1} dr)`` and indicator unions on ``[1, R]``."""
    fam = []
    n_bump, n_tail, n_set = sizes
    for _ in range(n_bump):
        c = math.exp(rng.uniform(math.log(2.0), math.log(r_max / 2)))
        w = rng.uniform(0.1, 0.6)
        fam.append(lambda r, c=c, w=w: np.clip(1 - ((np.log(r) - math.log(c)) / w) ** 2, 0, None) ** 2)
    for _ in range(n_tail):
        gamma = n_power * (1.0 + rng.uniform(0.5, 2.0)) / p
        fam.append(lambda r, g=gamma: r ** -g)
    for pieces in random_sets(rng, n_set, r_max, sides=(POS,)):
        fam.append(lambda r, pc=pieces: np.max([(r >= a) & (r <= b) for _, a, b in pc], axis=0).astype(float))
    return fam


def hh_strong_probe(params: HHParams, p: float, R_list, per_decade: int = 400, seed: int = 0,
                    sizes=(20, 20, 10), witness: str | None = None) -> ProbeReport:
    """``sup ||K f||_{p, mu2} / ||f||_{p, mu1}`` for the two-branch kernel.

    ``witness`` selects a single divergent input instead of the family:
    ``"upper"`` uses ``y^{-n1/p} / (1 + log y)``, ``"lower"`` the indicator
    of ``[1, 2]``.
    """
    clock = _timer()
    s = cell_seed(seed, "hh-strong", params, p)
    ratios = []
    for R in R_list:
        g = radial_grid(R, max(64, int(per_decade * math.log10(R))))
        if witness == "upper":
            fam = [lambda r: r ** (-params.n1 / p) / (1 + np.log(r))]
        elif witness == "lower":
            fam = [lambda r: (r <= 2).astype(float)]
        else:
            fam = _radial_family(np.random.default_rng(s), params.n1, p, min(R_list) / 2, sizes)
        w1, w2 = g.weights(params.n1), g.weights(params.n2)
        best = 0.0
        for fn in fam:
            f = fn(g.r)
            best = max(best, weighted_lp(hh_kernel_apply(params, f, g), w2, p) / weighted_lp(f, w1, p))
        ratios.append(best)
    mode = "growth" if witness else "bounded"
    regressor = "log" if witness == "lower" else "loglog"
    verdict, slope, r2 = classify(R_list, ratios, mode, regressor)
    return ProbeReport("hh-strong", (params.n1, params.n2), p, None, tuple(R_list), tuple(ratios),
                       verdict, slope, r2, s, 0, clock(), mode,
                       {"params": params, "in_range": params.strong_type(p), "witness": witness})


def r2_threshold(params: HHParams, p: float) -> float:
    """Smallest target exponent ``q`` of the restricted weak bound for ``R2``."""
    pp = p / (p - 1.0)
    if params.beta_p > 0 and pp >= params.n1 / params.beta_p:
        return params.n2 / params.alpha_p
    return params.n2 / (params.alpha_p + params.beta_p - params.n1 / pp)


def log_shape(rng, max_pieces: int = 3, max_span: float = math.inf):
    """``(t, [(lo, hi), ...])``: union of intervals in ``log r`` starting at 0
    (widths and gaps in ``[0.05, 2]``) and a relative anchor ``t``.

    Shapes longer than ``max_span`` are shrunk to fit, so every set lies
    inside ``[1, R]`` for all ``R >= e^max_span``.
    """
    pieces, pos = [], 0.0
    for _ in range(int(rng.integers(1, max_pieces + 1))):
        width = rng.uniform(0.05, 2.0)
        pieces.append((pos, pos + width))
        pos += width + rng.uniform(0.05, 2.0)
    span = pieces[-1][1]
    if span > max_span:
        pieces = [(lo * max_span / span, hi * max_span / span) for lo, hi in pieces]
    return float(rng.uniform()), pieces


ENDPOINT_MARGIN = 2.0


def hh_endpoint_probe(params: HHParams, which: str, R_list, per_decade: int = 400, seed: int = 0,
                      count: int = 30, p: float | None = None, q: float | None = None,
                      target: str = "weak") -> ProbeReport:
    """Indicator ratios ``||R chi_E||_{(q, inf)} / ||chi_E||_{(p, 1)}``.

    For ``R1`` the defaults are ``p = n1/(n1 - beta)``, ``q = n2/alpha``; for
    ``R2`` the two-branch threshold.  ``target="lorentz"`` measures
    ``(p, 1) -> (p, 1)`` instead.  Each set is a fixed shape in ``log r``
    (see :func:`log_shape`) translated to a relative position of
    ``[e^margin, R]``.  Sets closer to 1 lose part of the ``x^{-alpha}`` tail
    below them, which depresses their ratio, so ``margin`` (2 in ``log r``
    once ``min R > e^4``) keeps the sup from creeping up with ``R``.
    """
    clock = _timer()
    if which == "R1":
        p = params.n1 / (params.n1 - params.beta) if p is None else p
        q = params.n2 / params.alpha if q is None else q
    else:
        if p is None:
            raise ValueError("R2 endpoint needs p")
        q = r2_threshold(params, p) if q is None else q
    s = cell_seed(seed, "hh-endpoint", params, which, target)
    rng = np.random.default_rng(s)
    margin = ENDPOINT_MARGIN if math.log(min(R_list)) > 4.0 else 0.0
    room = math.log(min(R_list)) - margin
    shapes = [log_shape(rng, max_span=0.5 * room) for _ in range(count)]
    ratios = []
    for R in R_list:
        g = radial_grid(R, max(64, int(per_decade * math.log10(R))))
        w1, w2 = g.weights(params.n1), g.weights(params.n2)
        best = 0.0
        for t, pieces in shapes:
            span = pieces[-1][1]
            start = margin + t * max(math.log(R) - margin - span, 0.0)
            chi = np.zeros_like(g.r)
            for lo, hi in pieces:
                chi = np.maximum(chi, g.indicator(math.exp(start + lo), math.exp(start + min(hi, span))))
            out = hh_apply(params, which, chi, g)
            num = weighted_lorentz(out, w2, p, 1.0) if target == "lorentz" else \
                weighted_lorentz(out, w2, q, math.inf)
            best = max(best, num / weighted_lorentz(chi, w1, p, 1.0))
        ratios.append(best)
    verdict, slope, r2 = classify(R_list, ratios)
    return ProbeReport("hh-endpoint", (params.n1, params.n2), p, q if target == "weak" else p,
                       tuple(R_list), tuple(ratios), verdict, slope, r2, s, 0, clock(), "bounded",
                       {"which": which, "target": target})


def th_model_probe(a: float, b: float, c: float, n1: float, n2: float, p: float, R_list,
                   per_decade: int = 300, seed: int = 0) -> ProbeReport:
    """Norm ratio of the high-energy model kernel on a small seeded family."""
    clock = _timer()
    s = cell_seed(seed, "th-model", a, b, c, p)
    ratios = []
    for R in R_list:
        g = radial_grid(R, max(64, int(per_decade * math.log10(R))))
        K = th_kernel_matrix(a, b, c, g)
        w1, w2 = g.weights(n1), g.weights(n2)
        fam = [lambda r: (r <= 2).astype(float)] + _radial_family(
            np.random.default_rng(s), n1, p, min(R_list) / 2, (4, 4, 2))
        best = 0.0
        for fn in fam:
            f = fn(g.r)
            best = max(best, weighted_lp(K @ (w1 * f), w2, p) / weighted_lp(f, w1, p))
        ratios.append(best)
    verdict, slope, r2 = classify(R_list, ratios)
    return ProbeReport("th-model", (n1, n2), p, None, tuple(R_list), tuple(ratios), verdict, slope, r2,
                       s, 0, clock(), "bounded", {"a": a, "b": b, "c": c})

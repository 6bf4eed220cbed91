"""Acceptance suite: one test and one printed PASS/FAIL line per criterion."""

import math

import numpy as np
import pytest

from brokenline import probes
from brokenline.config import parse_config
from brokenline.discrete_operator import assemble, gradient, riesz_apply, spectral
from brokenline.experiments import (CANONICAL_DIMS, REPORT, appendix_rows, coefficient_asymptotic_rows,
                                    hh_blocks, hh_endpoint_rows, resolvent_check_rows, symmetry_defect,
                                    th_model_rows, tij_rows)
from brokenline.broken_line import Dimensions, build_grid, lorentz_norm, lp_norm, weighted_lorentz, weighted_lp
from brokenline.quadrature import integrate_to_infinity
from brokenline.resolvent import resolvent_kernel
from brokenline.specfun import asymptotic_slopes, bessel_i, bessel_k, profile_wronskian

ALL_DIMS = [Dimensions(*d) for d in CANONICAL_DIMS.values()]


@pytest.fixture
def verdict(capsys):
    def report(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return report


def cfg_for(dims, **extra):
    text = f"[dims]\nd1 = {dims[0]}\nd2 = {dims[1]}\n"
    for section, body in extra.items():
        text += f"[{section}]\n{body}\n"
    return parse_config(text, env={})


def as_reports(rows):
    return [dict(zip(REPORT, r)) for r in rows]


def test_criterion_01_special_functions(verdict):
    x = np.geomspace(0.01, 50, 400)
    e_i = np.max(np.abs(bessel_i(0.5, x) / (np.sqrt(2 / (np.pi * x)) * np.sinh(x)) - 1))
    e_k = np.max(np.abs(bessel_k(0.5, x) / (np.sqrt(np.pi / (2 * x)) * np.exp(-x)) - 1))
    r = np.geomspace(1e-2, 30, 200)
    e_w = max(np.max(np.abs(profile_wronskian(d, r) / r ** (1 - d) - 1)) for d in (1.2, 1.5, 2, 2.5, 3, 3.7))
    e_a = max(abs(got - want) for d in (1.5, 2.0, 3.0) for _, _, want, got in asymptotic_slopes(d))
    ok = e_i <= 1e-10 and e_k <= 1e-10 and e_w <= 1e-8 and e_a <= 0.05
    verdict(1, ok, f"half-order {max(e_i, e_k):.1e}, Wronskian {e_w:.1e}, exponent fits {e_a:.3f}")


def test_criterion_02_resolvent_kernel(verdict):
    rows = list(resolvent_check_rows(cfg_for((1.5, 3.0))))
    rng = np.random.default_rng(11)
    sym = max(symmetry_defect(d, lam, rng) for d in ALL_DIMS for lam in (0.3, 1.0, 3.0))
    bad = [r for r in rows if not r[-1]]
    verdict(2, not bad and sym <= 1e-8, f"{len(rows)} checks, {len(bad)} failing, symmetry {sym:.1e}")


def test_criterion_03_coefficient_asymptotics(verdict):
    rows = list(coefficient_asymptotic_rows(cfg_for((1.5, 3.0))))
    worst_a = max(abs(r[5] - r[4]) for r in rows if r[3] == "A")
    worst_env = max(r[6] for r in rows if r[3] != "A")
    verdict(3, all(r[-1] for r in rows), f"A slope error {worst_a:.3f}, B/C envelope drift {worst_env:.3f}")


def test_criterion_04_appendix_tables(verdict):
    rows = list(appendix_rows(cfg_for((1.5, 3.0))))
    bad = [r[:5] for r in rows if not r[-1]]
    verdict(4, len(rows) == 32 and not bad, f"{len(rows)} fits, failing {bad}")


def _column_error(dims, lam, n):
    g = build_grid(dims, 50.0, n)
    op = assemble(g)
    worst = 0.0
    for x0 in (-5.0, 3.0, 10.0):
        col = op.resolvent_column(lam, x0)
        xs = op.node_x[int(np.argmin(np.abs(op.node_x - x0)))]
        sel = (np.abs(g.x) > 1.5) & (np.abs(g.x) < 25) & (np.abs(np.abs(g.x) - abs(xs)) > 0.5)
        ref = resolvent_kernel(dims, lam, g.x[sel], xs)
        keep = ref > 1e-12 * ref.max()
        worst = max(worst, float(np.max(np.abs(col.values[sel][keep] - ref[keep]) / ref[keep])))
    return worst


def test_criterion_05_discrete_vs_analytic(verdict):
    dims = Dimensions(1.5, 3.0)
    errs = {lam: (_column_error(dims, lam, 2000), _column_error(dims, lam, 4000)) for lam in (0.3, 1.0, 3.0)}
    ratios = [a / b for a, b in errs.values()]
    q = integrate_to_infinity(lambda t: 1.0 / (4.0 + t * t), 0.0, rel_tol=1e-12).value
    ok = all(b <= 0.05 for _, b in errs.values()) and min(ratios) >= 3.5 and abs(q - math.pi / 4) <= 1e-10
    verdict(5, ok, f"max rel error {max(b for _, b in errs.values()):.1e}, refinement ratios "
                   f"{', '.join(f'{r:.2f}' for r in ratios)}, pi/4 error {abs(q - math.pi / 4):.1e}")


def test_criterion_06_discrete_identities(verdict):
    ibp = iso = comp = 0.0
    for dims in ALL_DIMS:
        g = build_grid(dims, 200.0, 2000)
        op = assemble(g)
        sd = spectral(op)
        rng = np.random.default_rng(4)
        u, v = rng.standard_normal((2, op.size))
        lhs = op.node_inner(op.apply(u), v)
        ibp = max(ibp, abs(lhs - op.edge_inner(gradient(op, u).values, gradient(op, v).values)) / abs(lhs))
        f = op.project(g.sample(lambda x: np.exp(-np.log(np.abs(x) / 4) ** 2) * (1 + 0.4 * np.sign(x))))
        iso = max(iso, abs(lp_norm(riesz_apply(sd, op, f), 2) / lp_norm(f, 2) - 1))
        lf = op.apply_laplacian(f).values
        comp = max(comp, np.max(np.abs(sd.apply_power(0.5, sd.apply_power(0.5, f)).values - lf)) / np.max(np.abs(lf)))
    dual = probes.duality_identity_probe(Dimensions(1.5, 3.0), 200.0, 2000).ratios[0]
    ok = ibp <= 1e-10 and dual <= 1e-10 and iso <= 1e-8 and comp <= 1e-8
    verdict(6, ok, f"parts {ibp:.1e}, duality {dual:.1e}, isometry {iso:.1e}, half-power square {comp:.1e}")


def test_criterion_07_hardy(verdict):
    Rs = (1e2, 1e4, 1e6)
    sharp = probes.hardy_probe(Dimensions(3.0, 3.5), 2.0, Rs, 2000)
    inside = probes.hardy_probe(Dimensions(1.5, 3.0), 1.2, Rs, 2000)
    witness = probes.hardy_probe(Dimensions(1.5, 3.0), 1.5, Rs, 2000, witness=True)
    growing = all(b > a for a, b in zip(witness.ratios, witness.ratios[1:]))
    ok = max(sharp.ratios) <= 2.04 and inside.verdict == "bounded-stable" and growing
    verdict(7, ok, f"(3,3.5) p=2 sup {max(sharp.ratios):.4f}; p=1.2 {inside.verdict}; "
                   f"p=1.5 witness {', '.join(f'{r:.3f}' for r in witness.ratios)}")


def test_criterion_08_riesz_positive_range(verdict):
    Rs = (1250.0, 2500.0, 5000.0, 1e4)
    reps = probes.riesz_lp_probe(Dimensions(1.5, 3.0), (1.3, 2.0, 2.5), Rs, 4000)
    reps += probes.riesz_lp_probe(Dimensions(2.5, 3.5), (1.5, 2.0), Rs, 4000)
    detail = "; ".join(f"{r.dims} p={r.p}: drift {probes.max_drift(r.ratios):.3f}" for r in reps)
    verdict(8, all(r.verdict == "bounded-stable" for r in reps), detail)


def test_criterion_09_riesz_counterexample(verdict):
    Rs = (1e2, 1e3, 1e4, 1e6)
    first = probes.riesz_counterexample_probe(Dimensions(1.5, 3.0), Rs, 4000, beta=1.0)
    second = probes.riesz_counterexample_probe(Dimensions(2.5, 3.5), Rs, 4000, beta=1.5)
    inc = [all(b > a for a, b in zip(r.ratios, r.ratios[1:])) for r in (first, second)]
    ok = all(inc) and first.fit_r2 >= 0.9
    verdict(9, ok, f"(1.5,3) {', '.join(f'{v:.3f}' for v in first.ratios)} r2 {first.fit_r2:.3f}; "
                   f"(2.5,3.5) {', '.join(f'{v:.3f}' for v in second.ratios)}")


def test_criterion_10_restricted_weak(verdict):
    rep = probes.restricted_weak_probe(Dimensions(1.5, 3.0), (1e2, 1e4), 4000, count=30)
    drift = probes.max_drift(rep.ratios)
    verdict(10, rep.verdict == "bounded-stable" and drift <= 0.10,
            f"sup ratios {', '.join(f'{v:.4f}' for v in rep.ratios)}, drift {drift:.3f}")


def test_criterion_11_reverse_riesz(verdict):
    Rs = (1250.0, 2500.0, 5000.0, 1e4)
    reps = probes.reverse_riesz_probe(Dimensions(1.5, 3.0), (1.2, 2.0, 5.0), Rs, 4000)
    reps += probes.reverse_riesz_probe(Dimensions(2.5, 3.5), (1.5, 2.0, 4.0), Rs, 4000)
    at_two = max(abs(v - 1) for r in reps if r.p == 2.0 for v in r.ratios)
    ok = all(r.verdict == "bounded-stable" for r in reps) and at_two <= 1e-8
    verdict(11, ok, f"{sum(r.verdict == 'bounded-stable' for r in reps)}/{len(reps)} stable, "
                    f"p=2 deviation from 1: {at_two:.1e}")


def _lorentz_identities():
    g = build_grid(Dimensions(1.5, 3.0), 10.0, 400)
    chi = g.indicator(1.0, 2.0)
    m = float(g.weights[(g.x >= 1) & (g.x <= 2)].sum())
    worst = 0.0
    for p, q in ((1.5, 1.0), (2.0, 1.0), (3.0, 2.0), (4.0, 6.0)):
        worst = max(worst, abs(lorentz_norm(chi, p, q) / ((p / q) ** (1 / q) * m ** (1 / p)) - 1))
    worst = max(worst, abs(lorentz_norm(chi, 3.0, math.inf) / m ** (1 / 3) - 1))
    rng = np.random.default_rng(2)
    for _ in range(20):
        v, w = rng.exponential(1.0, 50), rng.uniform(0.1, 3.0, 50)
        p = rng.uniform(1.1, 5.0)
        worst = max(worst, abs(weighted_lorentz(v, w, p, p) / weighted_lp(v, w, p) - 1))
    return worst


def _strong_sweep(cfg):
    """Interior exponents stay bounded, the witnesses at the range ends grow."""
    per = cfg.get("hh", "per_decade")
    results = []
    for params in hh_blocks(cfg.dims).values():
        lo, hi = params.strong_range()
        top = min(hi, 8.0)
        for frac in (0.2, 0.5, 0.8):
            rep = probes.hh_strong_probe(params, lo + frac * (top - lo), cfg.R_doubling, per, cfg.seed, cfg.family)
            results.append(rep.verdict == "bounded-stable")
        ends = [("upper", hi)] if math.isfinite(hi) else []
        ends += [("lower", lo)] if lo > 1 else []
        for kind, p in ends:
            rep = probes.hh_strong_probe(params, p, cfg.R_growth, per, witness=kind)
            results.append(rep.verdict == "growth-witness")
    return all(results), len(results)


def test_criterion_12_model_machinery(verdict):
    cfg = cfg_for((1.5, 3.0))
    strong_ok, n_strong = _strong_sweep(cfg)
    endpoint = as_reports(hh_endpoint_rows(cfg))
    th = as_reports(th_model_rows(cfg))
    tij = list(tij_rows(cfg))
    lor = _lorentz_identities()
    groups = {
        f"strong ({n_strong} sweeps)": strong_ok,
        "endpoint": all(r["verdict"] == "bounded-stable" for r in endpoint),
        "th-model": all(r["verdict"] == "bounded-stable" for r in th),
        f"T_ij/I_j ({len(tij)} fits)": all(r[-1] for r in tij),
        "lorentz": lor <= 1e-6,
    }
    verdict(12, all(groups.values()), ", ".join(f"{k} {'ok' if v else 'FAIL'}" for k, v in groups.items())
            + f", Lorentz error {lor:.1e}")

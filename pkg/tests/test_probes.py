import math

import numpy as np
import pytest

from brokenline import probes
from brokenline.broken_line import Dimensions
from brokenline.model_operators import HHParams


def test_classify_stable():
    assert probes.classify([1e2, 1e3, 1e4], [1.0, 1.05, 1.08])[0] == "bounded-stable"


def test_classify_growth():
    R = [1e2, 1e3, 1e4, 1e6]
    ratios = [1.0 + math.log1p(math.log(r)) for r in R]
    verdict, slope, r2 = probes.classify(R, ratios)
    assert verdict == "growth-witness" and slope == pytest.approx(1.0) and r2 == pytest.approx(1.0)


def test_classify_inconclusive():
    assert probes.classify([1, 2, 3], [1.0, 2.0, 1.0])[0] == "inconclusive"
    assert probes.classify([1, 2, 3], [1.0, math.nan, 1.0])[0] == "inconclusive"


def test_classify_growth_mode_prefers_growth():
    R = [1e2, 1e3, 1e4, 1e6]
    ratios = [1.0, 1.01, 1.02, 1.04]
    assert probes.classify(R, ratios)[0] == "bounded-stable"
    assert probes.classify(R, ratios, mode="growth")[0] == "growth-witness"


def test_max_drift():
    assert probes.max_drift([2.0, 2.2, 2.2]) == pytest.approx(0.1)
    assert probes.max_drift([3.0]) == 0.0


def test_cell_seed_is_deterministic():
    a = probes.cell_seed(7, "x", 1.5)
    assert a == probes.cell_seed(7, "x", 1.5)
    assert a != probes.cell_seed(8, "x", 1.5) and a != probes.cell_seed(7, "y", 1.5)


def test_duality_identity():
    rep = probes.duality_identity_probe(Dimensions(1.5, 3.0), 200.0, nodes=1000, pairs=5)
    assert rep.ratios[0] <= 1e-10 and rep.verdict == "bounded-stable"
    assert rep.diagnostics["self_pair_gap"] <= 1e-8


def test_report_rows():
    rep = probes.ProbeReport("x", (1.5, 3.0), 2.0, None, (1.0, 2.0), (0.5, 0.6), "bounded-stable")
    rows = list(rep.rows())
    assert len(rows) == 2 and tuple(rows[0]) == probes.REPORT_COLUMNS and rows[0]["q"] == ""


def test_hh_strong_probe_stable_inside_range():
    P = HHParams(2.0, 2.5, 3.0, 1.0, 3.0, 3.0)
    lo, hi = P.strong_range()
    p = 0.5 * (lo + min(hi, 8.0))
    assert P.strong_type(p)
    rep = probes.hh_strong_probe(P, p, [1e2, 1e3, 1e4], per_decade=200, seed=1)
    assert rep.verdict == "bounded-stable"


def test_log_shape_respects_span():
    rng = np.random.default_rng(0)
    for _ in range(20):
        t, pieces = probes.log_shape(rng, max_span=1.0)
        assert 0 <= t < 1
        span = max(b for _, b in pieces) - min(a for a, _ in pieces)
        assert span <= 1.0 + 1e-12

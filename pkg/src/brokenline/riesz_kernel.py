"""Riesz transform kernel ``(2/pi) int_0^inf d/dx K_lam(x, y) dlam``.

Split as ``FULL = TL + TH + KL``:

* ``TL``: kk part of the kernel over ``[0, 1/min(|x|, |y|)]``,
* ``TH``: kk part over ``[1/min(|x|, |y|), inf)``,
* ``KL``: kl part over ``[0, inf)``.

``FULL`` is integrated as one piece (kk + kl together), so the split
identity is a genuine cross-check and not a sum by construction.

The module also carries the low-energy exponent tables and the ray fits
used to compare ``TL`` with them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from .broken_line import Dimensions
from .resolvent import kernel_terms

PARTS = ("TL", "TH", "KL", "FULL")
TWO_OVER_PI = 2.0 / math.pi


class NearDiagonalError(ValueError):
    pass


def _integrand(dims, x, y, which):
    def f(lam):
        kk, kl = kernel_terms(dims, lam, x, y, dx=True)
        if which == "kk":
            return kk
        if which == "kl":
            return kl
        return kk + kl

    return f


def _low(f, upper, lower_hint, tol, scale=None):
    brk = quad.log_panels(upper * 1e-8, upper, per_decade=1)
    if lower_hint is not None and 0 < lower_hint < upper:
        brk = np.sort(np.concatenate([brk, [lower_hint]]))
    res = quad.integrate(f, 0.0, upper, rel_tol=tol, abs_tol=0.0 if scale is None else tol * scale,
                         breakpoints=brk)
    return res


def riesz_kernel(dims: Dimensions, x: float, y: float, part: str = "FULL", tol: float = 1e-9,
                 delta_min: float | None = None) -> float:
    """Value of one part of the Riesz kernel at the off-diagonal point ``(x, y)``."""
    if part not in PARTS:
        raise ValueError(f"unknown part {part!r}")
    if abs(x) < 1 or abs(y) < 1:
        raise ValueError("points must satisfy |x| >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    rx, ry = abs(x), abs(y)
    same = (x > 0) == (y > 0)
    if rx + ry - 2.0 <= 0:
        raise NearDiagonalError("x and y both sit at the junction")
    if part in ("KL", "FULL") and same:
        dmin = 1e-3 * ry if delta_min is None else delta_min
        if abs(x - y) < dmin:
            raise NearDiagonalError(f"|x - y| < {dmin:g}: kl tail is not integrable there")
    split = 1.0 / min(rx, ry)
    far = 1.0 / max(rx, ry)
    c_kk = rx + ry - 2.0
    c_kl = abs(rx - ry)

    if part == "TL":
        val = _low(_integrand(dims, x, y, "kk"), split, far, tol).value
    elif part == "TH":
        val = quad.integrate_tail(_integrand(dims, x, y, "kk"), split, c_kk, rel_tol=tol).value
    elif part == "KL":
        if not same:
            return 0.0
        f = _integrand(dims, x, y, "kl")
        head = _low(f, split, far, tol).value
        val = head + quad.integrate_tail(f, split, c_kl, rel_tol=tol, scale=head).value
    else:
        f = _integrand(dims, x, y, "full")
        head = _low(f, split, far, tol).value
        rate = min(c_kk, c_kl) if same else c_kk
        val = head + quad.integrate_tail(f, split, rate, rel_tol=tol, scale=head).value
    return TWO_OVER_PI * val


def riesz_parts(dims: Dimensions, x: float, y: float, tol: float = 1e-9) -> dict:
    return {p: riesz_kernel(dims, x, y, p, tol) for p in PARTS}


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r2: float
    window: tuple

    def __post_init__(self):
        if not 0.0 <= self.r2 <= 1.0 + 1e-12:
            raise ValueError("r2 outside [0, 1]")


def fit_exponent(samples, window=None) -> ExponentFit:
    """Least-squares line through ``(log t, log |v|)`` for ``(t, v)`` samples."""
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("samples must be (coordinate, magnitude) pairs")
    if window is None:
        window = (float(pts[:, 0].min()), float(pts[:, 0].max()))
    lo, hi = window
    if not hi > lo:
        raise ValueError("degenerate fit window")
    sel = pts[(pts[:, 0] >= lo) & (pts[:, 0] <= hi)]
    if len(sel) < 8:
        raise ValueError("need at least 8 samples inside the window")
    if np.any(sel[:, 0] <= 0) or np.any(sel[:, 1] <= 0):
        raise ValueError("coordinates and magnitudes must be positive")
    lx, ly = np.log(sel[:, 0]), np.log(sel[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-300 else max(0.0, 1.0 - ss_res / ss_tot)
    if ss_tot <= 1e-24 * max(len(ly), 1):
        slope = 0.0
    return ExponentFit(float(slope), float(intercept), float(min(r2, 1.0)), (lo, hi))


# Low-energy bounds as (x exponent, y exponent), built from the general
# estimate for int_0^{1/min} lam F(lam) k_i'(lam|x|) k_j(lam|y|) dlam with
# |F| ~ lam^gamma:
#   |x| <= |y|:  |x|^{1-d_i} |y|^{d_i-3-gamma}
#   |x| >= |y|:  |x|^{-gamma-2}                  (d_j <= 2)
#                |x|^{d_j-4-gamma} |y|^{2-d_j}   (d_j > 2)
# Case 2 entries with a logarithm carry an epsilon.
def low_energy_table(dims: Dimensions, eps: float = 0.05) -> dict:
    d1, d2 = dims.d1, dims.d2
    case = dims.case()
    if case == 1:
        t = {
            "Q1": {"x_small": (1 - d2, d1 - d2 - 1), "x_large": (d1 - 2 * d2, 0.0)},
            "Q2": {"x_small": (1 - d1, d1 - d2 - 1), "x_large": (-d2, 0.0)},
            "Q3": {"x_small": (1 - d1, -1.0), "x_large": (-d1, 0.0)},
            "Q4": {"x_small": (1 - d2, -1.0), "x_large": (-d2, 0.0)},
        }
    elif case == 2:
        t = {
            "Q1": {"x_small": (-1.0, d1 - 3), "x_large": (d1 - 4 + eps, -eps)},
            "Q2": {"x_small": (1 - d1, d1 - 3), "x_large": (-2 + eps, -eps)},
            "Q3": {"x_small": (1 - d1, -1.0), "x_large": (-d1, 0.0)},
            "Q4": {"x_small": (-1.0, -1.0), "x_large": (-2.0, 0.0)},
        }
    elif case == 3:
        t = {
            "Q1": {"x_small": (1 - d2, d1 - d2 - 1), "x_large": (d1 - d2 - 2, 2 - d2)},
            "Q2": {"x_small": (1 - d1, d1 - d2 - 1), "x_large": (-2.0, 2 - d2)},
            "Q3": {"x_small": (1 - d1, -1.0), "x_large": (-d1, 0.0)},
            "Q4": {"x_small": (1 - d2, -1.0), "x_large": (-d2, 0.0)},
        }
    else:
        t = {
            "Q1": {"x_small": (1 - d2, 1 - d2), "x_large": (-d2, 2 - d2)},
            "Q2": {"x_small": (1 - d1, 1 - d2), "x_large": (-d1, 2 - d2)},
            "Q3": {"x_small": (1 - d1, 1 - d1), "x_large": (-d1, 2 - d1)},
            "Q4": {"x_small": (1 - d2, 1 - d1), "x_large": (-d2, 2 - d1)},
        }
    return t


def entry_kind(dims: Dimensions, quadrant: str, regime: str) -> str:
    """``"two-sided"`` where ``A > 0`` fixes the sign, else ``"envelope"``."""
    if quadrant in ("Q1", "Q3"):
        return "envelope"
    if dims.case() == 2 and quadrant == "Q2" and regime == "x_large":
        return "envelope"
    return "two-sided"


_SIGNS = {"Q1": (1, 1), "Q2": (-1, 1), "Q3": (-1, -1), "Q4": (1, -1)}


@dataclass(frozen=True)
class RayDesign:
    """Where the two rays sit: ``near`` is the small coordinate range, ``far``
    the fixed large coordinate (and vice versa for the other ray)."""

    near: tuple = (1e2, 1e4)
    far: float = 1e9
    anchor: float = 1e2
    points: int = 12


@dataclass(frozen=True)
class AppendixResult:
    quadrant: str
    regime: str
    x_fit: ExponentFit
    y_fit: ExponentFit
    predicted: tuple
    kind: str
    tolerance: float = 0.1

    def ok(self) -> bool:
        px, py = self.predicted
        if self.kind == "two-sided":
            return (abs(self.x_fit.slope - px) <= self.tolerance
                    and abs(self.y_fit.slope - py) <= self.tolerance)
        return self.x_fit.slope <= px + self.tolerance and self.y_fit.slope <= py + self.tolerance


def tl_ray(dims, quadrant, moving, fixed, moving_is_x, tol=1e-8):
    sx, sy = _SIGNS[quadrant]
    out = []
    for m in moving:
        x, y = (m, fixed) if moving_is_x else (fixed, m)
        out.append((m, abs(riesz_kernel(dims, sx * x, sy * y, "TL", tol))))
    return out


def appendix_check(dims: Dimensions, quadrant: str, regime: str, eps: float = 0.05,
                   design: RayDesign | None = None, tol: float = 1e-8) -> AppendixResult:
    """Fit x- and y-exponents of ``TL`` along two rays in one regime.

    ``x_small`` (``|x| <= |y|``): x moves over ``design.near`` at
    ``|y| = design.far``; y moves over ``design.near`` scaled up past
    ``design.far / design.near[1]`` at ``|x| = design.anchor``.
    ``x_large`` mirrors this with the roles of x and y swapped.
    """
    design = design or RayDesign()
    if quadrant not in _SIGNS or regime not in ("x_small", "x_large"):
        raise ValueError("bad quadrant or regime")
    lo, hi = design.near
    ray = np.geomspace(lo, hi, design.points)
    far_ray = np.geomspace(design.far / (hi / lo), design.far, design.points)
    if regime == "x_small":
        xs = tl_ray(dims, quadrant, ray, design.far, True, tol)
        ys = tl_ray(dims, quadrant, far_ray, design.anchor, False, tol)
    else:
        xs = tl_ray(dims, quadrant, far_ray, design.anchor, True, tol)
        ys = tl_ray(dims, quadrant, ray, design.far, False, tol)
    predicted = low_energy_table(dims, eps)[quadrant][regime]
    return AppendixResult(quadrant, regime, fit_exponent(xs), fit_exponent(ys), tuple(predicted),
                          entry_kind(dims, quadrant, regime))

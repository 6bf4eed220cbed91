"""Exact kernel of ``(Delta + lambda^2)^{-1}`` on the broken line.

With profiles ``l_i, k_i`` of the end ``i`` (1 = negative ray, 2 = positive
ray) the kernel against ``dmu`` is, for ``y >= 1``::

    A k1(lam|x|) k2(lam y)                                     x <= -1
    B k2(lam y) k2(lam x) + lam^{d2-2} k2(lam max) l2(lam min)   x >= 1

and symmetrically (``C``, ``d1``) for ``y <= -1``.  ``A, B, C`` come from the
matching conditions ``f(-1) = f(1)``, ``f'(-1) = f'(1)``::

    A = -1 / (lam [k1 k2]'(lam))
    B = -lam^{d2-2} [k1 l2]'(lam) / [k1 k2]'(lam)
    C = -lam^{d1-2} [k2 l1]'(lam) / [k1 k2]'(lam)

The ``kl`` coefficients ``v_i`` are 1: the Wronskian ``l'k - k'l = r^{1-d}``
then gives the Green's-function jump ``-|y|^{1-d_i}``.

All three coefficients grow like ``e^{2 lam}``; internally they are carried
as ``e^{-2 lam} A`` etc. and recombined with the decaying profiles so that
nothing overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .broken_line import NEG, POS, Dimensions
from .specfun import profile_scaled

LAMBDA_GUARD = 300.0
QUADRANTS = ("Q1", "Q2", "Q3", "Q4")


@dataclass(frozen=True)
class ScaledCoefficients:
    """``e^{-2 lam}`` times ``A, B, C`` (arrays over ``lam``)."""

    lam: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray


@dataclass(frozen=True)
class ResolventCoefficients:
    lam: float
    A: float
    B: float
    C: float
    v1: float = 1.0
    v2: float = 1.0


def scaled_coefficients(dims: Dimensions, lam) -> ScaledCoefficients:
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("lambda must be positive")
    p1 = profile_scaled(dims.d1, lam)
    p2 = profile_scaled(dims.d2, lam)
    # derivatives of products at lam, exponentials stripped
    dkk = p1.dk * p2.k + p1.k * p2.dk  # e^{2 lam} [k1 k2]'
    dkl2 = p1.dk * p2.l + p1.k * p2.dl  # [k1 l2]'
    dkl1 = p2.dk * p1.l + p2.k * p1.dl  # [k2 l1]'
    A = -1.0 / (lam * dkk)
    B = -(lam ** (dims.d2 - 2.0)) * dkl2 / dkk
    C = -(lam ** (dims.d1 - 2.0)) * dkl1 / dkk
    return ScaledCoefficients(lam, A, B, C)


def coefficients(dims: Dimensions, lam: float) -> ResolventCoefficients:
    lam = float(lam)
    if lam > LAMBDA_GUARD:
        raise OverflowError("coefficients overflow beyond lambda = 300; use scaled_coefficients")
    sc = scaled_coefficients(dims, lam)
    g = math.exp(2.0 * lam)
    return ResolventCoefficients(lam, float(sc.A) * g, float(sc.B) * g, float(sc.C) * g)


def quadrant(x, y):
    """Quadrant label(s) of ``(x, y)``."""
    x = np.asarray(x)
    y = np.asarray(y)
    lab = np.where(x > 0, np.where(y > 0, "Q1", "Q4"), np.where(y > 0, "Q2", "Q3"))
    return str(lab) if lab.ndim == 0 else lab


def _check_points(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(x) < 1) or np.any(np.abs(y) < 1):
        raise ValueError("points must satisfy |x| >= 1")
    return np.broadcast_arrays(x, y)


def kernel_terms(dims: Dimensions, lam, x, y, dx=False):
    """``(kk, kl)`` parts of the resolvent kernel, or of its x-derivative.

    ``lam``, ``x``, ``y`` broadcast together.  Exponential factors are
    recombined in log space, so large ``lam * |x|`` gives clean zeros.
    """
    lam = np.asarray(lam, dtype=float)
    x, y = _check_points(x, y)
    lam, x, y = np.broadcast_arrays(lam, x, y)
    shape = lam.shape
    lam, x, y = lam.ravel(), x.ravel(), y.ravel()
    rx, ry = np.abs(x), np.abs(y)
    sx = np.where(x > 0, POS, NEG)
    sy = np.where(y > 0, POS, NEG)
    kk = np.zeros_like(lam)
    kl = np.zeros_like(lam)
    sc = scaled_coefficients(dims, lam)
    for side in (NEG, POS):
        d = dims.d(side)
        on_x = sx == side
        if not on_x.any():
            continue
        px = profile_scaled(d, lam[on_x] * rx[on_x])
        kx = px.dk * lam[on_x] * sx[on_x] if dx else px.k
        lx = px.dl * lam[on_x] * sx[on_x] if dx else px.l
        # kk part: y on the other side (coefficient A) or the same side (B or C)
        same = sy[on_x] == side
        d_other = dims.d(-side)
        d_y = np.where(same, d, d_other)
        ky = np.empty(on_x.sum())
        ly = np.empty(on_x.sum())
        for dd in np.unique(d_y):
            m = d_y == dd
            py = profile_scaled(dd, lam[on_x][m] * ry[on_x][m])
            ky[m], ly[m] = py.k, py.l
        F = np.where(same, sc.B[on_x] if side == POS else sc.C[on_x], sc.A[on_x])
        expo = -lam[on_x] * (rx[on_x] + ry[on_x] - 2.0)
        kk[on_x] = F * kx * ky * np.exp(expo)
        # kl part lives only on the diagonal blocks
        near = rx[on_x] <= ry[on_x]
        lam_pow = lam[on_x] ** (d - 2.0)
        val = np.where(near, ky * lx, ly * kx) * np.exp(-lam[on_x] * np.abs(rx[on_x] - ry[on_x]))
        kl[on_x] = np.where(same, lam_pow * val, 0.0)
    return kk.reshape(shape), kl.reshape(shape)


def resolvent_kernel(dims: Dimensions, lam, x, y, part: str = "full"):
    """Kernel of ``(Delta + lam^2)^{-1}`` against ``dmu``; ``part`` in
    ``{"full", "kk", "kl"}``."""
    kk, kl = kernel_terms(dims, lam, x, y)
    if part == "kk":
        out = kk
    elif part == "kl":
        out = kl
    elif part == "full":
        out = kk + kl
    else:
        raise ValueError(f"unknown kernel part {part!r}")
    return float(out) if np.ndim(out) == 0 else out


def resolvent_dx(dims: Dimensions, lam, x, y, part: str = "full"):
    """x-derivative of the kernel (one-sided at ``x = y``: the ``|x| <= |y|`` branch)."""
    kk, kl = kernel_terms(dims, lam, x, y, dx=True)
    out = {"kk": kk, "kl": kl, "full": kk + kl}[part]
    return float(out) if np.ndim(out) == 0 else out


def csv_rows(dims: Dimensions, lams, xs, ys):
    rows = []
    for lam in lams:
        for x in xs:
            for y in ys:
                kk, kl = kernel_terms(dims, lam, x, y)
                rows.append((lam, x, y, float(kk), float(kl), float(kk + kl)))
    return rows

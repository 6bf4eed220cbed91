"""Modified Bessel functions of real order and the radial profiles l_d, k_d.

The radial ODE ``f'' + (d-1)/r f' = f`` has the positive solutions

    l_d(r) = r^{1-d/2} I_{d/2-1}(r)      (regular at 0, grows like e^r)
    k_d(r) = r^{1-d/2} K_{|d/2-1|}(r)    (decays like e^{-r})

with Wronskian ``l' k - k' l = r^{1-d}``.  Their derivatives reduce to
``l' = r^{1-d/2} I_{d/2}`` and ``k' = -r^{1-d/2} K_{d/2}``, which avoids the
cancellation of the raw product rule near ``r = 0``.

Raw Bessel values come from :mod:`scipy.special` (Amos / Cephes).  Scaled
variants (``e^{-x} I``, ``e^{x} K``) are what the kernel code uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

EXP_GUARD = 700.0
MAX_ORDER = 10.0
D_TWO_TOL = 1e-12


class BesselDomainError(ValueError):
    pass


def _check_order(nu):
    nu = np.asarray(nu, dtype=float)
    if not np.all(np.isfinite(nu)) or np.any(np.abs(nu) >= MAX_ORDER):
        raise BesselDomainError(f"order out of range: |nu| must be < {MAX_ORDER}")
    return nu


def _check_arg(x, allow_zero=False):
    x = np.asarray(x, dtype=float)
    bad = x < 0 if allow_zero else x <= 0
    if np.any(bad) or np.any(np.isnan(x)):
        raise BesselDomainError("argument must be positive")
    return x


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def bessel_i(nu, x, derivative=False):
    """I_nu(x) for real ``nu`` (negative orders allowed) and ``x >= 0``.

    ``derivative=True`` returns ``I_nu'(x) = I_{nu+1}(x) + (nu/x) I_nu(x)``.
    Raises ``OverflowError`` for ``x > 700``; use :func:`bessel_i_scaled`.
    """
    nu = _check_order(nu)
    x = _check_arg(x, allow_zero=not derivative)
    if np.any(x > EXP_GUARD):
        raise OverflowError("bessel_i: argument beyond exp range, use bessel_i_scaled")
    if derivative:
        out = special.iv(nu + 1.0, x) + nu / x * special.iv(nu, x)
    else:
        out = special.iv(nu, x)
    return _scalar(out)


def bessel_k(nu, x, derivative=False):
    """K_nu(x) for ``x > 0``; ``K_{-nu} = K_nu``.

    ``derivative=True`` returns ``K_nu'(x) = -K_{nu+1}(x) + (nu/x) K_nu(x)``.
    """
    nu = np.abs(_check_order(nu))
    x = _check_arg(x)
    if derivative:
        out = -special.kv(nu + 1.0, x) + nu / x * special.kv(nu, x)
    else:
        out = special.kv(nu, x)
    return _scalar(out)


def bessel_i_scaled(nu, x):
    """``e^{-x} I_nu(x)``."""
    nu = _check_order(nu)
    x = _check_arg(x, allow_zero=True)
    return _scalar(special.ive(nu, x))


def bessel_k_scaled(nu, x):
    """``e^{x} K_nu(x)``."""
    nu = np.abs(_check_order(nu))
    x = _check_arg(x)
    return _scalar(special.kve(nu, x))


def _half_dim(d):
    d = float(d)
    if not np.isfinite(d) or d <= 1.0:
        raise BesselDomainError(f"dimension must be > 1, got {d}")
    if abs(d - 2.0) < D_TWO_TOL:
        d = 2.0
    return d


@dataclass(frozen=True)
class ProfileValues:
    """``l, k`` and their derivatives at ``r``; arrays when ``r`` is an array."""

    r: np.ndarray | float
    l: np.ndarray | float
    k: np.ndarray | float
    dl: np.ndarray | float
    dk: np.ndarray | float


def profile(d, r) -> ProfileValues:
    d = _half_dim(d)
    r = _check_arg(r)
    if np.any(r > EXP_GUARD):
        raise OverflowError("profile: argument beyond exp range, use profile_scaled")
    a = 1.0 - d / 2.0
    pref = r**a
    l = pref * special.iv(d / 2.0 - 1.0, r)
    dl = pref * special.iv(d / 2.0, r)
    k = pref * special.kv(abs(d / 2.0 - 1.0), r)
    dk = -pref * special.kv(d / 2.0, r)
    return ProfileValues(_scalar(r), _scalar(l), _scalar(k), _scalar(dl), _scalar(dk))


def profile_scaled(d, r) -> ProfileValues:
    """Profiles with exponentials stripped: ``l = e^r * l~``, ``k = e^{-r} * k~``.

    The same scaling applies to ``dl`` and ``dk``.
    """
    d = _half_dim(d)
    r = _check_arg(r)
    a = 1.0 - d / 2.0
    pref = r**a
    l = pref * special.ive(d / 2.0 - 1.0, r)
    dl = pref * special.ive(d / 2.0, r)
    k = pref * special.kve(abs(d / 2.0 - 1.0), r)
    dk = -pref * special.kve(d / 2.0, r)
    return ProfileValues(_scalar(r), _scalar(l), _scalar(k), _scalar(dl), _scalar(dk))


def profile_wronskian(d, r):
    """``l'(r) k(r) - k'(r) l(r)``; equals ``r^{1-d}`` analytically."""
    pv = profile_scaled(d, r)
    return _scalar(pv.dl * pv.k - pv.dk * pv.l)


def spot_rows(orders, args):
    """Rows ``(nu, x, I, K, I', K')`` for the CLI spot check."""
    rows = []
    for nu in orders:
        for x in args:
            rows.append((
                nu, x,
                bessel_i(nu, x), bessel_k(nu, x),
                bessel_i(nu, x, derivative=True), bessel_k(nu, x, derivative=True),
            ))
    return rows


def _slope(t, v):
    return float(np.polyfit(np.log(t), np.log(np.abs(v)), 1)[0])


def asymptotic_slopes(d, small=(1e-6, 1e-3), large=(5.0, 30.0), large_derivative=(30.0, 300.0),
                      points: int = 40):
    """Predicted and fitted log-log slopes of ``l, k, l', k'``.

    Near zero the raw profiles are fitted; at infinity the exponential is
    stripped first, leaving ``r^{(1-d)/2}`` for all four.  The derivatives
    carry Bessel order ``d/2``, whose ``1/r`` correction is larger, so they
    are fitted over ``large_derivative``.  For ``d = 2`` the
    ``k`` row fits ``k`` against ``log(1/r)`` (predicted slope 1).
    Rows are ``(quantity, regime, predicted, fitted)``.
    """
    d = _half_dim(d)
    rs = np.geomspace(*small, points)
    pv = profile_scaled(d, rs)
    e = np.exp(-rs)
    rows = [("l", "small", 0.0, _slope(rs, pv.l / e)), ("dl", "small", 1.0, _slope(rs, pv.dl / e))]
    k = pv.k * e
    if d == 2.0:
        rows.append(("k", "small", 1.0, _slope(-np.log(rs), k)))
    else:
        rows.append(("k", "small", min(2.0 - d, 0.0), _slope(rs, k)))
    rows.append(("dk", "small", 1.0 - d, _slope(rs, pv.dk * e)))
    for names, window in ((("l", "k"), large), (("dl", "dk"), large_derivative)):
        rl = np.geomspace(*window, points)
        pl = profile_scaled(d, rl)
        for name in names:
            rows.append((name, "large", (1.0 - d) / 2.0, _slope(rl, getattr(pl, name))))
    return rows

"""Truncated matrix model of the broken-line Laplacian.

The grid's ``-1`` and ``+1`` nodes are glued into one vertex, ``+-R`` carry
Dirichlet conditions, so the free nodes form a chain::

    -R | -r_{n-2} ... -r_1  J  r_1 ... r_{n-2} | R

``G`` maps node values to edge slopes, ``W`` holds edge measures and ``M``
the lumped node masses.  ``L = M^{-1} G^T W G`` is exactly the P1 finite
element Laplacian with mass lumping, so ``<L f, g>_M = <G f, G g>_W`` holds
to rounding.

Two functional calculi are provided:

* :class:`SpectralDecomposition` (dense eigensolve of the symmetrised
  tridiagonal matrix), for moderate sizes;
* :class:`ResolventCalculus`, which evaluates ``L^{-a}`` through
  ``(sin(pi a)/pi) int_0^inf t^{-a} (L + t)^{-1} dt`` with trapezoid nodes in
  ``log t`` and a positive-arithmetic tridiagonal sweep.  It keeps full
  relative accuracy on the lowest modes, which matters once ``R`` is large.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse

from .broken_line import Grid, GridFunction, cell_integrals


class KernelComponentWarning(UserWarning):
    pass


class EigenSolveError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    grid: Grid
    free: np.ndarray  # grid index of each free node (junction: index of -1)
    node_x: np.ndarray
    mass: np.ndarray
    edge_x: np.ndarray
    edge_len: np.ndarray
    edge_measure: np.ndarray
    edge_grid: Grid
    junction: int  # position of the glued vertex among free nodes

    @property
    def size(self) -> int:
        return len(self.mass)

    @property
    def conductance(self) -> np.ndarray:
        return self.edge_measure / self.edge_len**2

    def gradient_matrix(self):
        """Sparse ``(edges x free nodes)`` slope map."""
        n = self.size
        e = np.arange(n + 1)
        inv = 1.0 / self.edge_len
        rows = np.concatenate([e[1:], e[:-1]])
        cols = np.concatenate([np.arange(n), np.arange(n)])
        vals = np.concatenate([-inv[1:], inv[:-1]])
        return sparse.csr_matrix((vals, (rows, cols)), shape=(n + 1, n))

    def stiffness_bands(self):
        c = self.conductance
        return c[:-1] + c[1:], -c[1:-1]

    def symmetric_bands(self):
        """Diagonal and off-diagonal of ``M^{-1/2} K M^{-1/2}``."""
        diag, off = self.stiffness_bands()
        s = np.sqrt(self.mass)
        return diag / self.mass, off / (s[:-1] * s[1:])

    # conversions between grid functions and free-node vectors
    def to_vector(self, f: GridFunction | np.ndarray) -> np.ndarray:
        vals = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)
        if vals.shape[0] == self.size:
            return np.array(vals, dtype=float)
        g = self.grid
        v = vals[self.free].astype(float)
        jm, jp = self.free[self.junction], self.free[self.junction] + 1
        wm, wp = g.weights[jm], g.weights[jp]
        v[self.junction] = (wm * vals[jm] + wp * vals[jp]) / (wm + wp)
        return v

    def to_grid(self, v: np.ndarray) -> GridFunction:
        v = np.asarray(v, dtype=float)
        out = np.zeros((len(self.grid),) + v.shape[1:])
        out[self.free] = v
        out[self.free[self.junction] + 1] = v[self.junction]
        return GridFunction(self.grid, out)

    def project(self, f: GridFunction) -> GridFunction:
        """Continuous-at-junction, zero-at-``+-R`` version of ``f``."""
        return self.to_grid(self.to_vector(f))

    def apply(self, v: np.ndarray) -> np.ndarray:
        diag, off = self.stiffness_bands()
        out = diag[:, None] * _cols(v)
        out[:-1] += off[:, None] * _cols(v)[1:]
        out[1:] += off[:, None] * _cols(v)[:-1]
        return _uncols(out / self.mass[:, None], v)

    def apply_laplacian(self, f: GridFunction) -> GridFunction:
        return self.to_grid(self.apply(self.to_vector(f)))

    def node_inner(self, u, v) -> float:
        return float(np.sum(self.mass * u * v))

    def edge_inner(self, a, b) -> float:
        return float(np.sum(self.edge_measure * a * b))

    def shifted_solve(self, shifts, rhs) -> np.ndarray:
        """Solve ``(L + s) u = rhs`` for every shift ``s`` (broadcast on axis 0)."""
        return chain_solve(self.conductance, self.mass, np.atleast_1d(shifts), rhs)

    def resolvent_column(self, lam: float, x: float) -> GridFunction:
        """``(L + lam^2)^{-1}`` applied to the discrete point mass at ``x``."""
        i = int(np.argmin(np.abs(self.node_x - x)))
        b = np.zeros(self.size)
        b[i] = 1.0 / self.mass[i]
        u = self.shifted_solve([lam * lam], b)[0]
        return self.to_grid(u)


def _cols(v):
    v = np.asarray(v, dtype=float)
    return v[:, None] if v.ndim == 1 else v


def _uncols(out, like):
    return out[:, 0] if np.ndim(like) == 1 else out


def assemble(grid: Grid) -> OperatorMatrix:
    """Glue ``+-1``, impose Dirichlet at ``+-R``, build masses and edges."""
    n = len(grid) // 2
    if n < 3 or grid.kind != "nodes" or not (grid.x[n - 1] == -1.0 and grid.x[n] == 1.0):
        raise ValueError("assemble needs a node grid from build_grid")
    r = grid.x[n:]
    free = np.concatenate([np.arange(1, n), np.arange(n + 1, 2 * n - 1)])
    junction = n - 2
    mass = grid.weights[free].copy()
    mass[junction] += grid.weights[n]
    node_x = grid.x[free].copy()
    node_x[junction] = 1.0
    edges_x, lens, meas = [], [], []
    for d, sgn in ((grid.dims.d1, -1.0), (grid.dims.d2, 1.0)):
        _, _, whole = cell_integrals(d, r)
        mid = 0.5 * (r[:-1] + r[1:])
        h = np.diff(r)
        if sgn < 0:
            edges_x.append(-mid[::-1])
            lens.append(h[::-1])
            meas.append(whole[::-1])
        else:
            edges_x.append(mid)
            lens.append(h)
            meas.append(whole)
    edge_x = np.concatenate(edges_x)
    edge_measure = np.concatenate(meas)
    edge_grid = Grid(grid.dims, grid.R, edge_x, edge_measure.copy(), grid.scheme, kind="edges")
    return OperatorMatrix(grid, free, node_x, mass, edge_x, np.concatenate(lens), edge_measure,
                          edge_grid, junction)


def chain_solve(cond, mass, shifts, rhs):
    """Solve ``(M^{-1} K + s) u = rhs`` for a Dirichlet chain.

    ``cond`` holds the ``n + 1`` edge conductances (first and last lead to
    the grounded ends).  Elimination tracks the conductance to ground of the
    already-eliminated part, ``a_{i+1} = m s + c a_i / (c + a_i)``, so every
    pivot is a sum of positive terms.  ``shifts`` has shape ``(S,)``, ``rhs``
    ``(n,)`` or ``(n, k)``; the result has shape ``(S, n)`` or ``(S, n, k)``.
    """
    c = np.asarray(cond, dtype=float)
    m = np.asarray(mass, dtype=float)
    s = np.asarray(shifts, dtype=float)
    b = np.asarray(rhs, dtype=float)
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    n = len(m)
    # K u + s M u = M rhs
    mb = m[:, None] * b
    piv = np.empty((n, len(s)))
    fwd = np.empty((n, len(s), b.shape[1]))
    a = c[0] + m[0] * s
    piv[0] = c[1] + a
    fwd[0] = np.broadcast_to(mb[0], fwd[0].shape)
    for i in range(1, n):
        a = m[i] * s + c[i] * a / (c[i] + a)
        piv[i] = c[i + 1] + a
        fwd[i] = mb[i] + (c[i] / piv[i - 1])[:, None] * fwd[i - 1]
    u = np.empty_like(fwd)
    u[-1] = fwd[-1] / piv[-1][:, None]
    for i in range(n - 2, -1, -1):
        u[i] = (fwd[i] + c[i + 1] * u[i + 1]) / piv[i][:, None]
    u = np.moveaxis(u, 0, 1)
    return u[..., 0] if vec else u


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    op: OperatorMatrix
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # M-orthonormal, in node coordinates
    floor: float

    @property
    def symmetric_vectors(self):
        return self.eigenvectors * np.sqrt(self.op.mass)[:, None]

    def reconstruction_error(self) -> float:
        diag, off = self.op.symmetric_bands()
        S = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
        U = self.symmetric_vectors
        return float(np.linalg.norm(S - (U * self.eigenvalues) @ U.T) / np.linalg.norm(S))

    def apply_power(self, s: float, f, return_excluded=False):
        """``L^s f`` via ``V diag(lam^s) V^T M``.

        For ``s < 0`` eigenvalues below the numerical floor are dropped; a
        :class:`KernelComponentWarning` fires when the dropped part of ``f``
        exceeds ``1e-8`` of its norm.
        """
        if s < -0.5 - 1e-12:
            raise ValueError("powers below -1/2 are not supported")
        op = self.op
        grid_input = isinstance(f, GridFunction)
        v = op.to_vector(f)
        coef = self.eigenvectors.T @ (op.mass[:, None] * _cols(v))
        lam = self.eigenvalues
        keep = lam > self.floor if s < 0 else np.ones_like(lam, dtype=bool)
        excluded = int(np.count_nonzero(~keep))
        if excluded:
            dropped = np.linalg.norm(coef[~keep])
            if dropped > 1e-8 * max(np.linalg.norm(coef), 1e-300):
                warnings.warn(f"{excluded} near-kernel modes carry {dropped:.3g} of the input",
                              KernelComponentWarning, stacklevel=2)
        powered = np.zeros_like(lam)
        powered[keep] = np.abs(lam[keep]) ** s
        out = _uncols(self.eigenvectors @ (powered[:, None] * coef), v)
        res = op.to_grid(out) if grid_input else out
        return (res, excluded) if return_excluded else res


def spectral(op: OperatorMatrix) -> SpectralDecomposition:
    diag, off = op.symmetric_bands()
    try:
        lam, U = linalg.eigh_tridiagonal(diag, off)
    except linalg.LinAlgError as exc:
        raise EigenSolveError(str(exc)) from exc
    V = U / np.sqrt(op.mass)[:, None]
    floor = 1e-12 * float(np.abs(lam).max())
    resid = np.abs(diag * U[:, 0] + np.concatenate([off * U[1:, 0], [0]])
                   + np.concatenate([[0], off * U[:-1, 0]]) - lam[0] * U[:, 0]).max()
    if not np.isfinite(resid) or resid > 1e-6 * float(np.abs(lam).max()):
        raise EigenSolveError(f"eigensolve residual {resid:.3g}")
    return SpectralDecomposition(op, lam, V, floor)


class ResolventCalculus:
    """Fractional powers of ``L`` through resolvent integrals.

    ``L^{-a} = (sin(pi a)/pi) int e^{(1-a)u} (L + e^u)^{-1} du`` for
    ``0 < a < 1``, trapezoid rule in ``u`` with step ``h``; the integrand is
    analytic in the strip ``|Im u| < pi`` so the error is about
    ``exp(-2 pi^2 / h)``.
    """

    def __init__(self, op: OperatorMatrix, h: float = 0.5, tail: float = 40.0, chunk: int = 24):
        self.op = op
        self.h = h
        self.tail = tail
        self.chunk = chunk
        diag, off = op.symmetric_bands()
        self.upper = float(np.max(diag + np.abs(np.concatenate([off, [0]]))
                                  + np.abs(np.concatenate([[0], off]))))
        self.lower = self._lower_bound()

    def _lower_bound(self) -> float:
        # 1 / trace(L^{-1}) <= smallest eigenvalue; diag of K^{-1} by one solve per column is
        # too costly, so bound trace(L^{-1}) <= sum_i <e_i, L^{-1} 1> / ... via L^{-1} 1 (positive)
        ones = np.ones(self.op.size)
        u = self.op.shifted_solve([0.0], ones)[0]
        # L^{-1} has positive entries: lambda_min^{-1} <= max row sum = max_i (L^{-1} 1)_i
        return 1.0 / float(u.max())

    def nodes(self, a: float):
        lo = math.log(self.lower) - self.tail / (1.0 - a)
        hi = math.log(self.upper) + self.tail / a
        u = np.arange(lo, hi + self.h, self.h)
        w = self.h * math.sin(math.pi * a) / math.pi * np.exp((1.0 - a) * u)
        return np.exp(u), w

    def inverse_power(self, a: float, v: np.ndarray) -> np.ndarray:
        if not 0 < a < 1:
            raise ValueError("fractional order must lie in (0, 1)")
        t, w = self.nodes(a)
        out = np.zeros(_cols(v).shape)
        for k in range(0, len(t), self.chunk):
            sol = self.op.shifted_solve(t[k:k + self.chunk], _cols(v))
            out += np.tensordot(w[k:k + self.chunk], sol, axes=(0, 0))
        return _uncols(out, v)

    def apply_power(self, s: float, f):
        """``L^s f`` for ``s`` in ``(-1, 1]`` (``s = 0, 1`` exact)."""
        op = self.op
        grid_input = isinstance(f, GridFunction)
        v = op.to_vector(f)
        if s == 0:
            out = v
        elif s == 1:
            out = op.apply(v)
        elif -1 < s < 0:
            out = self.inverse_power(-s, v)
        elif 0 < s < 1:
            out = self.inverse_power(1.0 - s, op.apply(v))
        else:
            raise ValueError("power outside (-1, 1]")
        return op.to_grid(out) if grid_input else out


def apply_power(calc, s: float, f):
    return calc.apply_power(s, f)


def gradient(op: OperatorMatrix, f, nodes: bool = False):
    """Edge slopes of ``f`` (``GridFunction`` on ``op.edge_grid``).

    ``nodes=True`` interpolates to the grid nodes with the second-order
    weighted average of the two adjacent slopes (one-sided at ``+-1`` and
    ``+-R``).
    """
    v = op.to_vector(f)
    vc = _cols(v)
    full = np.zeros((op.size + 2,) + vc.shape[1:])
    full[1:-1] = vc
    slopes = (full[1:] - full[:-1]) / op.edge_len[:, None]
    slopes = _uncols(slopes, v)
    if not nodes:
        return GridFunction(op.edge_grid, slopes) if np.ndim(slopes) == 1 else slopes
    return _node_gradient(op, slopes)


def _node_gradient(op: OperatorMatrix, slopes):
    g = op.grid
    n = len(g) // 2
    h = op.edge_len
    out = np.zeros(len(g))
    # grid node k sits between edges k-1 and k, except across the junction
    e_left = np.arange(-1, 2 * n - 1)
    e_left[n:] -= 1
    e_right = e_left + 1
    e_right[n - 1] = -1
    e_left[n] = -1
    e_right[-1] = -1
    for k in range(len(g)):
        a, b = e_left[k], e_right[k]
        if a >= 0 and b >= 0:
            out[k] = (h[b] * slopes[a] + h[a] * slopes[b]) / (h[a] + h[b])
        else:
            out[k] = slopes[a if a >= 0 else b]
    return GridFunction(g, out)


def riesz_apply(calc, op: OperatorMatrix, f):
    """Edge values of ``grad L^{-1/2} f``."""
    return gradient(op, calc.apply_power(-0.5, op.to_vector(f)))

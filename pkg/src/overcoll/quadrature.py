"""Composite Gauss panels with geometric grading toward a target parameter.

The engine integrates  int K(s, t) g(t) dt  over [0, 1) for many targets s at
once.  Panels far from s use a fixed Gauss rule; panels within one panel width
of s are replaced by a rule graded geometrically toward s (or toward the
panel end nearest to s), which handles logarithmic singularities and kinks.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import _kernels


@lru_cache(maxsize=None)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = _gl(int(n))
    return x.copy(), w.copy()


def make_panels(breaks, max_width=None):
    """Split the sorted breakpoints ``breaks`` (which must include 0 and 1)
    into panels no wider than ``max_width``."""
    breaks = np.unique(np.asarray(breaks, dtype=float))
    lo, hi = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        k = 1 if max_width is None else max(1, int(np.ceil((b - a) / max_width - 1e-12)))
        e = np.linspace(a, b, k + 1)
        lo.append(e[:-1])
        hi.append(e[1:])
    return np.concatenate(lo), np.concatenate(hi)


def panel_nodes(lo, hi, n):
    x, w = gauss_legendre(n)
    h = (hi - lo)[:, None]
    return lo[:, None] + h * x, h * w


class Density:
    """Local evaluator: ``local(t)`` gives (column indices, values) per node."""

    def __init__(self, local, ncols):
        self.local = local
        self.ncols = ncols

    @classmethod
    def function(cls, g):
        def local(t):
            v = np.asarray(g(t), dtype=complex) * np.ones(t.shape)
            return np.zeros(t.shape + (1,), dtype=np.int64), v[..., None]
        return cls(local, 1)

    @classmethod
    def spline(cls, space):
        return cls(space.local, space.N)

    def dense(self, t):
        idx, vals = self.local(t)
        out = np.zeros((t.size, self.ncols), dtype=complex)
        rows = np.repeat(np.arange(t.size), idx.shape[-1])
        return _kernels.scatter_add(out, rows, idx.reshape(-1), vals.reshape(-1))


def graded_rule(a, b, s, n=16, sigma=0.25, levels=20):
    """Nodes/weights on [a, b] graded toward s (arrays of equal length).

    ``s`` may lie outside [a, b].  Intervals are the geometric layers
    s +- H*[sigma^{j+1}, sigma^j] clipped to the panel, with H the distance from
    s to the far panel end.  Returns flat (pair index, node, weight, offset)
    arrays, where offset = node - s is formed without the rounding of the
    node itself (near s that rounding would dominate a log kernel).
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    s = np.asarray(s, float)
    H = np.maximum(b - s, s - a)
    r = sigma ** np.arange(levels + 1)
    inner = np.concatenate([r[1:], [0.0]])
    # right of s then left of s, relative to s; shape (pairs, 2*(levels+1))
    lo = np.concatenate([H[:, None] * inner, -H[:, None] * r], axis=1)
    hi = np.concatenate([H[:, None] * r, -H[:, None] * inner], axis=1)
    lo = np.maximum(lo, (a - s)[:, None])
    hi = np.minimum(hi, (b - s)[:, None])
    length = hi - lo
    keep = length > 0
    pair = np.broadcast_to(np.arange(len(a))[:, None], lo.shape)[keep]
    lo = lo[keep]
    length = length[keep]
    x, w = gauss_legendre(n)
    offset = (lo[:, None] + length[:, None] * x).reshape(-1)
    wts = (length[:, None] * w).reshape(-1)
    pair = np.repeat(pair, n)
    ok = offset != 0.0
    pair, offset, wts = pair[ok], offset[ok], wts[ok]
    return pair, s[pair] + offset, wts, offset


class PanelIntegrator:
    """Boundary integrals  int_0^1 K(s, t) g(t) dt  for targets s on the curve.

    ``kernel(s, t, diff=None)`` must broadcast and already include the speed
    factor; near the target it receives diff = s - t computed exactly.
    ``breaks`` are forced panel ends (knots, corners, 0 and 1).
    """

    def __init__(self, breaks, n=16, max_width=1 / 64, near_factor=1.0,
                 sigma=0.25, levels=20, chunk=256):
        self.lo, self.hi = make_panels(np.concatenate([[0.0, 1.0], np.asarray(breaks, float)]), max_width)
        self.n = n
        self.near_factor = near_factor
        self.sigma = sigma
        self.levels = levels
        self.chunk = chunk
        self.nodes, self.weights = panel_nodes(self.lo, self.hi, n)

    def near_pairs(self, s):
        """Rows, panels and unwrapped targets for all near (target, panel) pairs."""
        s = np.asarray(s, float)
        width = self.hi - self.lo
        best = np.full((len(s), len(self.lo)), np.inf)
        shift = np.zeros_like(best)
        for sh in (-1.0, 0.0, 1.0):
            ss = s[:, None] + sh
            dist = np.maximum(np.maximum(self.lo - ss, ss - self.hi), 0.0)
            better = dist < best
            best = np.where(better, dist, best)
            shift = np.where(better, sh, shift)
        near = best < self.near_factor * width
        rows, pans = np.nonzero(near)
        return rows, pans, s[rows] + shift[rows, pans], near

    def apply(self, kernel, s, density: Density):
        """Matrix with one row per target and ``density.ncols`` columns."""
        s = np.asarray(s, float).ravel()
        out = np.zeros((len(s), density.ncols), dtype=complex)
        base = density.dense(self.nodes.reshape(-1))
        T = self.nodes.reshape(-1)
        W = self.weights.reshape(-1)
        node_panel = np.repeat(np.arange(len(self.lo)), self.n)
        for start in range(0, len(s), self.chunk):
            sl = slice(start, min(start + self.chunk, len(s)))
            sc = s[sl]
            rows, pans, s_unw, near = self.near_pairs(sc)
            far = ~near[:, node_panel]
            # move masked nodes out of the way so the kernel never sees t == s
            tt = np.where(far, T[None, :], np.mod(sc[:, None] + 0.5, 1.0))
            kv = kernel(sc[:, None], tt) * W[None, :]
            kv[~far] = 0.0
            block = kv @ base
            if len(rows):
                pair, t, w, off = graded_rule(self.lo[pans], self.hi[pans], s_unw,
                                              self.n, self.sigma, self.levels)
                kw = kernel(s_unw[pair], t, -off) * w
                idx, vals = density.local(t)
                c = idx.shape[-1]
                _kernels.scatter_add(block, np.repeat(rows[pair], c), idx.reshape(-1),
                                     (kw[:, None] * vals).reshape(-1))
            out[sl] = block
        return out


def offcurve_nodes(curve, breaks, target_dist, n=16, max_width=1 / 64):
    """Panels fine enough that each panel's arclength is below ``target_dist``."""
    lo, hi = make_panels(np.concatenate([[0.0, 1.0], np.asarray(breaks, float)]), max_width)
    t, w = panel_nodes(lo, hi, n)
    arclen = np.sum(w * curve.speed(t), axis=1)
    k = np.maximum(1, np.ceil(arclen / target_dist)).astype(int)
    if np.all(k == 1):
        return t.reshape(-1), w.reshape(-1)
    los, his = [], []
    for a, b, kk in zip(lo, hi, k):
        e = np.linspace(a, b, kk + 1)
        los.append(e[:-1])
        his.append(e[1:])
    t, w = panel_nodes(np.concatenate(los), np.concatenate(his), n)
    return t.reshape(-1), w.reshape(-1)

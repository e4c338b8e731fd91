"""Collocation grids, periodic trapezoid weights and discrete inner products."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGrid, LengthMismatch
from .spectral import FourierVector, sobolev_norm

DEDUP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CollocationGrid:
    points: np.ndarray
    weights: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)

    @property
    def M(self):
        return len(self.points)

    def describe(self):
        return {"kind": self.kind, "M": self.M, **self.params}


def periodic_weights(points):
    """w_m = (x_{m+1} - x_{m-1}) / 2 with periodic wraparound."""
    x = np.asarray(points, dtype=float)
    if len(x) == 1:
        return np.ones(1)
    nxt = np.roll(x, -1)
    nxt[-1] += 1.0
    prv = np.roll(x, 1)
    prv[0] -= 1.0
    return (nxt - prv) / 2.0


def _finish(points, kind, params, min_points=1):
    x = np.sort(np.mod(np.asarray(points, dtype=float), 1.0))
    # points that wrapped to exactly 1.0 after rounding
    x[x >= 1.0] = 0.0
    x = np.sort(x)
    if len(x) > 1:
        gaps = np.diff(np.concatenate([x, [x[0] + 1.0]]))
        keep = np.ones(len(x), dtype=bool)
        keep[1:] = np.diff(x) > DEDUP_TOL
        if gaps[-1] <= DEDUP_TOL and keep.sum() > 1:
            keep[-1] = False
        x = x[keep]
    if len(x) < min_points:
        raise DegenerateGrid(f"{len(x)} distinct points left, need {min_points}")
    w = periodic_weights(x)
    if len(x) > 1 and np.any(w <= 0):
        raise DegenerateGrid("zero gap between collocation points")
    x.setflags(write=False)
    w.setflags(write=False)
    return CollocationGrid(x, w, kind, dict(params))


def equispaced(M, shift=0.0):
    if M < 1:
        raise DegenerateGrid("M must be at least 1")
    return _finish(shift + np.arange(M) / M, "equispaced", {"shift": float(shift)})


def refined(N, J):
    """xi_j = j/J refinement of the uniform mesh: points (l + j/J)/N."""
    if N < 1 or J < 1:
        raise DegenerateGrid("N and J must be at least 1")
    l = np.arange(1, N + 1)[:, None]
    j = np.arange(1, J + 1)[None, :]
    return _finish(((l + j / J) / N).ravel(), "refined", {"N": int(N), "J": int(J)})


def offset(N, M, delta=0.5):
    """{delta/N + m/M : m = 1..M} reduced mod 1."""
    if N < 1 or M < 1:
        raise DegenerateGrid("N and M must be at least 1")
    m = np.arange(1, M + 1)
    return _finish(delta / N + m / M, "offset", {"N": int(N), "delta": float(delta)})


def random(M, seed, min_points=1):
    """M uniform points from numpy's PCG64 generator seeded with ``seed``."""
    if seed is None:
        raise ValueError("random grids need an explicit seed")
    if M < 1:
        raise DegenerateGrid("M must be at least 1")
    rng = np.random.default_rng(int(seed))
    return _finish(rng.random(M), "random", {"seed": int(seed)}, min_points=min_points)


def from_points(points, min_points=1):
    return _finish(points, "custom", {}, min_points=min_points)


def make_grid(kind, **params) -> CollocationGrid:
    kind = kind.lower()
    if kind == "equispaced":
        return equispaced(params["M"], params.get("shift", 0.0))
    if kind == "refined":
        return refined(params["N"], params["J"])
    if kind == "offset":
        return offset(params["N"], params["M"], params.get("delta", 0.5))
    if kind == "random":
        return random(params["M"], params.get("seed"), params.get("min_points", 1))
    if kind == "custom":
        return from_points(params["points"])
    raise ValueError(f"unknown grid kind {kind!r}")


def discrete_inner_product(f, g, grid: CollocationGrid):
    """sum_m w_m conj(f(x_m)) g(x_m)."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape[0] != grid.M or g.shape[0] != grid.M:
        raise LengthMismatch(f"samples of length {f.shape[0]}, {g.shape[0]} for a grid of {grid.M}")
    return complex(np.sum(grid.weights * np.conj(f) * g))


def max_spacing(grid) -> float:
    x = grid.points if isinstance(grid, CollocationGrid) else np.sort(np.mod(np.asarray(grid, float), 1.0))
    if len(x) == 1:
        return 1.0
    return float(np.max(np.diff(np.concatenate([x, [x[0] + 1.0]]))))


def expected_max_spacing(M):
    """Mean of the largest gap of M uniform random points on the circle."""
    if M < 2:
        return 1.0
    return float(np.sum(1.0 / np.arange(1, M)) / (M - 1))


@dataclass
class QuadratureReport:
    E: float
    worst_pair: tuple
    r: float
    s: float


def quadrature_error_report(grid: CollocationGrid, probes, r, s) -> QuadratureReport:
    """Empirical sup over probe pairs of
    |<g,f> - <g,f>_M| / (|f|_r |g|_s + |f|_s |g|_r).

    ``probes`` is a sequence of FourierVector.  The result is a lower bound on
    the quadrature error constant of the grid.
    """
    probes = list(probes)
    K = max(p.K for p in probes)
    C = np.stack([p.rebanded(K).coeffs for p in probes])
    x = grid.points
    S = C @ np.exp(2j * np.pi * np.outer(np.arange(-K, K + 1), x))
    exact = np.conj(C) @ C.T
    disc = (np.conj(S) * grid.weights) @ S.T
    nr = np.array([sobolev_norm(p, r) for p in probes])
    ns = np.array([sobolev_norm(p, s) for p in probes])
    denom = np.outer(ns, nr) + np.outer(nr, ns)
    ratio = np.abs(exact - disc) / denom
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return QuadratureReport(float(ratio[i, j]), (int(i), int(j)), float(r), float(s))


def mode_probes(modes, K=None):
    modes = list(modes)
    K = max(abs(m) for m in modes) if K is None else K
    return [FourierVector.from_modes(K, {m: 1.0}) for m in modes]

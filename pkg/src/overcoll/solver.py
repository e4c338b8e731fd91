"""Assembly and solution of the oversampled collocation systems.

The least-squares solve minimizes ||W^{1/2}(G a - f)||_2 through a pivoted QR
factorization of W^{1/2} G.  The normal equations G^H W G a = G^H W f are the
same problem mathematically, but forming them squares the condition number.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .basis import SplineSpace
from .colloc import CollocationGrid
from .errors import ConditionWarning, RankDeficient, SingularSystem
from .operators import OperatorSpec, layer_matrix
from .quadrature import make_panels, panel_nodes

LEAST_SQUARES = "least_squares"
MODIFIED = "modified"
SQUARE = "square_collocation"

COND_WARN = 1e10


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    G: np.ndarray
    W: np.ndarray
    rhs: np.ndarray
    method: str = LEAST_SQUARES
    B: np.ndarray | None = None
    points: np.ndarray | None = None

    def __post_init__(self):
        M, N = self.G.shape
        if self.W.shape != (M,) or self.rhs.shape != (M,):
            raise ValueError("W and rhs must have one entry per row of G")
        if np.any(self.W <= 0):
            raise ValueError("weights must be positive")
        if self.B is not None and self.B.shape != self.G.shape:
            raise ValueError("B must have the same shape as G")
        if self.method == SQUARE and M != N:
            raise ValueError("square collocation needs M == N")

    @property
    def shape(self):
        return self.G.shape


@dataclass
class Solution:
    coefficients: np.ndarray
    cond: float
    residual: float
    rank: int
    method: str = LEAST_SQUARES
    info: dict = field(default_factory=dict)


def _samples(data, x):
    if callable(data):
        return np.asarray(data(x), dtype=complex) * np.ones(len(x))
    data = np.asarray(data, dtype=complex)
    if data.shape != (len(x),):
        raise ValueError("data samples do not match the grid")
    return data


def assemble(spec: OperatorSpec, curve, space: SplineSpace, grid: CollocationGrid, data,
             with_B=False, method=LEAST_SQUARES, **kw) -> DiscreteSystem:
    """Collocation matrix G[m, n] = (V phi_n)(x_m), weights and data samples."""
    x = grid.points
    G = layer_matrix(spec, curve, space, x, **kw)
    bad = ~np.isfinite(G)
    if np.any(bad):
        m, n = np.argwhere(bad)[0]
        from .errors import QuadratureNotConverged
        raise QuadratureNotConverged(f"non-finite matrix entry at (m={m}, n={n})", location=(int(m), int(n)))
    B = space.matrix(x).astype(complex) if (with_B or method == MODIFIED) else None
    return DiscreteSystem(G, np.asarray(grid.weights, float), _samples(data, x), method, B, x)


def solve_least_squares(sys: DiscreteSystem, rank_tol=None, cond_warn=COND_WARN) -> Solution:
    sw = np.sqrt(sys.W)
    A = sw[:, None] * sys.G
    b = sw * sys.rhs
    M, N = A.shape
    if M < N:
        raise RankDeficient(f"{M} rows cannot determine {N} unknowns", rank=M)
    Q, R, piv = sla.qr(A, mode="economic", pivoting=True)
    # rank from the singular values of R; its diagonal can overestimate them
    sv = np.linalg.svd(R, compute_uv=False)
    tol = (max(M, N) * np.finfo(float).eps) if rank_tol is None else rank_tol
    rank = int(np.sum(sv > tol * sv[0])) if sv[0] > 0 else 0
    if rank < N:
        raise RankDeficient(f"numerical rank {rank} < {N}", rank=rank)
    y = sla.solve_triangular(R, Q.conj().T @ b)
    a = np.empty(N, dtype=complex)
    a[piv] = y
    cond = float(sv[0] / sv[-1])
    if cond > cond_warn:
        warnings.warn(f"least-squares condition estimate {cond:.3e}", ConditionWarning, stacklevel=2)
    res = float(np.linalg.norm(A @ a - b))
    return Solution(a, cond, res, rank, sys.method)


def solve_square(sys: DiscreteSystem, cond_warn=COND_WARN) -> Solution:
    if sys.G.shape[0] != sys.G.shape[1]:
        raise ValueError("square collocation needs M == N")
    return solve_least_squares(sys, cond_warn=cond_warn)


def solve_modified(sys: DiscreteSystem, cond_limit=1e14, cond_warn=COND_WARN) -> Solution:
    """Solve B^H W G a = B^H W f."""
    if sys.B is None:
        raise ValueError("the modified method needs B")
    BW = sys.B.conj().T * sys.W
    A = BW @ sys.G
    rhs = BW @ sys.rhs
    sv = np.linalg.svd(A, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularSystem(f"modified system condition {cond:.3e}")
    if cond > cond_warn:
        warnings.warn(f"modified system condition estimate {cond:.3e}", ConditionWarning, stacklevel=2)
    try:
        a = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    sw = np.sqrt(sys.W)
    res = float(np.linalg.norm(sw * (sys.G @ a - sys.rhs)))
    return Solution(a, cond, res, A.shape[0], MODIFIED)


def solve(sys: DiscreteSystem) -> Solution:
    if sys.method == MODIFIED:
        return solve_modified(sys)
    if sys.method == SQUARE:
        return solve_square(sys)
    return solve_least_squares(sys)


def galerkin_nodes(space: SplineSpace, curve=None, per_panel=32, max_width=None):
    """Composite Gauss nodes on the knot cells (split at corners) and weights
    for the parameter-domain L^2 inner product."""
    breaks = [0.0, 1.0] + list(space.breaks)
    if curve is not None:
        breaks += list(curve.corners)
    lo, hi = make_panels(np.array(breaks), max_width)
    t, w = panel_nodes(lo, hi, per_panel)
    return t.ravel(), w.ravel()


def _galerkin_system(spec, curve, space, data, per_panel, max_width, **kw):
    t, w = galerkin_nodes(space, curve, per_panel, max_width)
    G = layer_matrix(spec, curve, space, t, **kw)
    B = space.matrix(t).astype(complex)
    return DiscreteSystem(G, w, _samples(data, t), MODIFIED, B, t)


def solve_galerkin(spec: OperatorSpec, curve, space: SplineSpace, data, per_panel=32,
                   max_width=None, **kw) -> Solution:
    """Galerkin:  <chi, V u> = <chi, f>  for all chi in the spline space."""
    sol = solve_modified(_galerkin_system(spec, curve, space, data, per_panel, max_width, **kw))
    sol.method = "galerkin"
    return sol


def solve_bubnov_galerkin(spec: OperatorSpec, curve, space: SplineSpace, data, per_panel=32,
                          max_width=None, **kw) -> Solution:
    """Continuous least squares:  <V chi, V u> = <V chi, f>."""
    sys = _galerkin_system(spec, curve, space, data, per_panel, max_width, **kw)
    sol = solve_least_squares(DiscreteSystem(sys.G, sys.W, sys.rhs, LEAST_SQUARES, None, sys.points))
    sol.method = "bubnov_galerkin"
    return sol

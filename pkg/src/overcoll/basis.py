"""Periodic spline spaces, the psi_mu basis and H^s projections.

Basis functions are 0-indexed: phi_n is the degree-d periodic B-spline
supported on knots x_n .. x_{n+d+1} (indices mod N, one period added on wrap),
normalized to a partition of unity.  On the uniform mesh x_n = n/N this is
phi_n(t) = B_d(N t - n) with B_d the cardinal B-spline on [0, d+1].
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import IllConditionedWarning, IndexOutOfLambda
from .quadrature import gauss_legendre
from .spectral import FourierVector, _weights


def bspline_hat(omega, d):
    """Fourier transform of the cardinal B-spline of degree d on [0, d+1]."""
    omega = np.asarray(omega, dtype=float)
    return np.exp(-1j * np.pi * omega * (d + 1)) * np.sinc(omega) ** (d + 1)


class SplineSpace:
    def __init__(self, knots, degree):
        knots = np.asarray(knots, dtype=float)
        if knots.ndim != 1 or len(knots) < 1:
            raise ValueError("knots must be a nonempty 1D array")
        if knots[0] < 0 or knots[-1] >= 1 or np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing in [0, 1)")
        degree = int(degree)
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        N = len(knots)
        if N < degree + 1:
            raise ValueError("need at least d+1 knots for a periodic spline space")
        self.knots = knots
        self.degree = degree
        self.N = N
        gaps = np.diff(np.concatenate([knots, [knots[0] + 1.0]]))
        self.h = float(gaps.max())
        self.rho = float(gaps.max() / gaps.min())
        j = np.arange(-degree, N + degree + 1)
        self._ext = knots[j % N] + np.floor_divide(j, N)
        self.uniform = bool(knots[0] == 0.0 and np.allclose(knots, np.arange(N) / N, rtol=0, atol=1e-14))

    @classmethod
    def uniform_mesh(cls, N, degree):
        return cls(np.arange(N) / N, degree)

    @property
    def d(self):
        return self.degree

    @property
    def l(self):
        return self.degree + 1

    @property
    def m_reg(self):
        return self.degree

    @property
    def breaks(self):
        return self.knots.copy()

    def local(self, t):
        """Indices and values of the d+1 nonzero basis functions at each t."""
        t = np.asarray(t, dtype=float)
        shape = t.shape
        tt = np.mod(t.ravel(), 1.0)
        cell = np.searchsorted(self.knots, tt, side="right") - 1
        wrap = cell < 0
        cell = np.where(wrap, self.N - 1, cell)
        tt = np.where(wrap, tt + 1.0, tt)
        vals = _kernels.bspline_local(tt, cell, self._ext, self.degree)
        idx = (cell[:, None] - self.degree + np.arange(self.degree + 1)) % self.N
        return idx.reshape(shape + (self.degree + 1,)), vals.reshape(shape + (self.degree + 1,))

    def matrix(self, t):
        """Dense collocation matrix B[i, n] = phi_n(t_i)."""
        t = np.asarray(t, dtype=float).ravel()
        idx, vals = self.local(t)
        out = np.zeros((len(t), self.N))
        np.add.at(out, (np.repeat(np.arange(len(t)), self.degree + 1), idx.ravel()), vals.ravel())
        return out

    def eval_bspline(self, n, t):
        if not 0 <= n < self.N:
            raise IndexError(f"basis index {n} out of range 0..{self.N - 1}")
        return self.matrix(t)[:, n].reshape(np.shape(t))

    def evaluate(self, coeffs, t):
        t = np.asarray(t, dtype=float)
        idx, vals = self.local(t)
        return np.sum(np.asarray(coeffs)[idx] * vals, axis=-1)

    def fourier_matrix(self, K):
        """F[m + K, n] = Fourier coefficient m of phi_n."""
        m = np.arange(-K, K + 1)
        if self.uniform:
            n = np.arange(self.N)
            return (np.exp(-2j * np.pi * np.outer(m, n) / self.N)
                    * bspline_hat(m / self.N, self.degree)[:, None] / self.N)
        ng = int(np.ceil(2 * np.pi * K * self.h)) + self.degree + 16
        x, w = gauss_legendre(ng)
        lo = self.knots
        hi = np.concatenate([self.knots[1:], [1.0]])
        pieces = [(lo, hi)]
        if self.knots[0] > 0:
            pieces.append((np.array([0.0]), np.array([self.knots[0]])))
        t = np.concatenate([(a[:, None] + (b - a)[:, None] * x).ravel() for a, b in pieces])
        wt = np.concatenate([((b - a)[:, None] * w).ravel() for a, b in pieces])
        B = self.matrix(t)
        E = np.exp(-2j * np.pi * np.outer(m, t)) * wt
        return E @ B

    def fourier(self, coeffs, K) -> FourierVector:
        return FourierVector(self.fourier_matrix(K) @ np.asarray(coeffs, dtype=complex))

    def describe(self):
        return {"N": self.N, "degree": self.degree, "uniform": self.uniform, "h": self.h, "rho": self.rho}


def eval_bspline(space: SplineSpace, n, t):
    return space.eval_bspline(n, t)


def spline_fourier(space: SplineSpace, coeffs, K) -> FourierVector:
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (space.N,):
        raise ValueError(f"expected {space.N} coefficients, got shape {coeffs.shape}")
    return space.fourier(coeffs, K)


@dataclass(frozen=True)
class PsiBasisSpec:
    """The psi_mu basis of the uniform degree-d spline space of dimension N."""

    N: int
    d: int
    L_psi: int = 64
    Lambda_N: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.N < 1 or self.d < 0:
            raise ValueError("need N >= 1 and d >= 0")
        lam = np.arange(-((self.N - 1) // 2), self.N // 2 + 1)
        object.__setattr__(self, "Lambda_N", lam)

    def check(self, mu):
        mu = int(mu)
        if not (-self.N / 2 < mu <= self.N / 2):
            raise IndexOutOfLambda(f"mode {mu} not in Lambda_N for N={self.N}")
        return mu

    def tail_bound(self, mu):
        """Bound on sum_{|l| > L_psi} |mu/(mu + l N)|^{d+1}."""
        if mu == 0:
            return 0.0
        d = self.d
        return 2.0 * (abs(mu) / self.N) ** (d + 1) * (self.L_psi - 0.5) ** (-d) / max(d, 1)

    def space(self):
        return SplineSpace.uniform_mesh(self.N, self.d)

    def bspline_coeffs(self, mu):
        """B-spline coefficients of psi_mu on the uniform mesh."""
        mu = self.check(mu)
        n = np.arange(self.N)
        return np.exp(2j * np.pi * mu * n / self.N) / bspline_hat(mu / self.N, self.d)

    def to_bspline(self):
        """Matrix whose column j holds the B-spline coefficients of psi_{Lambda_N[j]}."""
        return np.stack([self.bspline_coeffs(mu) for mu in self.Lambda_N], axis=1)

    def from_bspline(self, coeffs):
        """psi coefficients of a spline: its Fourier coefficients at Lambda_N."""
        K = self.N // 2 + 1
        f = self.space().fourier(coeffs, K)
        return f[self.Lambda_N]


def eval_psi(spec: PsiBasisSpec, mu, x, method="spline"):
    """psi_mu(x).

    ``method="spline"`` evaluates the exact B-spline expansion;
    ``method="series"`` sums the Fourier series over |l| <= L_psi aliasing
    blocks (error at most ``spec.tail_bound(mu)``).
    """
    mu = spec.check(mu)
    x = np.asarray(x, dtype=float)
    if mu == 0:
        return np.ones(x.shape, dtype=complex)
    if method == "spline":
        return spec.space().evaluate(spec.bspline_coeffs(mu), x)
    if method != "series":
        raise ValueError("method must be 'spline' or 'series'")
    l = np.arange(-spec.L_psi, spec.L_psi + 1)
    k = mu + l * spec.N
    c = (mu / k) ** (spec.d + 1)
    return _kernels.fourier_synth(c.astype(complex), k.astype(float), x.ravel()).reshape(x.shape)


def psi_fourier(coeffs, N, d, K) -> FourierVector:
    """Fourier coefficients on band K of sum_mu c_mu psi_mu.

    ``coeffs`` is ordered like Lambda_N.  At k = mu + l N the coefficient is
    c_mu (mu/k)^{d+1}; modes in Lambda_N are reproduced exactly.
    """
    lam = np.arange(-((N - 1) // 2), N // 2 + 1)
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != lam.shape:
        raise ValueError(f"expected {N} psi coefficients")
    m = np.arange(-K, K + 1)
    out = np.zeros(2 * K + 1, dtype=complex)
    res = np.mod(m, N)
    for mu, cm in zip(lam, c):
        if mu == 0:
            out[K] += cm
            continue
        sel = res == mu % N
        out[sel] += cm * (mu / m[sel]) ** (d + 1)
    return FourierVector(out)


def hs_projection(target: FourierVector, space: SplineSpace, s, band=None,
                  cond_bound=1e12, return_info=False):
    """Coefficients of the H^s-orthogonal projection of ``target`` onto ``space``.

    The weighted least-squares problem in Fourier space is solved by SVD,
    which avoids squaring the condition number the way a Gram solve would.
    """
    K = target.K if band is None else int(band)
    F = space.fourier_matrix(K)
    t = target.rebanded(K).coeffs
    w = np.sqrt(_weights(np.arange(-K, K + 1), s))
    A = w[:, None] * F
    a, _, _, sv = np.linalg.lstsq(A, w * t, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if cond > cond_bound:
        warnings.warn(f"H^{s} projection system condition {cond:.3e} exceeds {cond_bound:.1e}",
                      IllConditionedWarning, stacklevel=2)
    if return_info:
        return a, {"cond": cond, "band": K}
    return a

"""Closed-form references.

Exact error coefficients of oversampled collocation on refined equispaced
grids for the model operator, the lattice sums behind them, the trapezoidal
aliasing error, circle reference densities and manufactured exterior data.

Notation: p = d + 1 - 2 alpha, y = mu / N, xi_j = j / J, and
s_l(y) = sigma_l |y / (l + y)|^p.  The usual statement of these sums takes
sigma_l = 1; the exact expansion of psi_mu carries sigma_l = sgn(y) sgn(l) for
even d, which is what ``signed=True`` selects.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import hankel1, jv, zeta

from . import _kernels
from .basis import bspline_hat, psi_fourier
from .errors import NearResonantMode, SingularSystem, SourceOutside
from .operators import OperatorSpec, circle_symbol, greens_kernel, pseudodiff_symbol
from .spectral import FourierVector

DEFAULT_L = 10_000


def _p(d, two_alpha):
    p = d + 1 - two_alpha
    if not p > 1:
        raise ValueError("need d + 1 - 2 alpha > 1 for convergent lattice sums")
    return float(p)


def lattice_tail_bound(y, p, L):
    """Bound on sum_{|l| > L} |y/(l+y)|^p for |y| <= 1/2."""
    return 2.0 * abs(y) ** p * (L - 0.5) ** (1.0 - p) / (p - 1.0)


def omega(xi, y, d, two_alpha, L=DEFAULT_L, signed=False, return_tail=False):
    """Omega(xi, y) = sum_{0<|l|<=L} s_l(y) e^{2 pi i l xi}, by direct summation."""
    if abs(y) > 0.5:
        raise ValueError("need |y| <= 1/2")
    p = _p(d, two_alpha)
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    if y == 0:
        val = np.zeros(xi_arr.shape, dtype=complex)
        tail = 0.0
    else:
        pre = abs(y) ** p * (np.sign(y) if signed else 1.0)
        val = pre * _kernels.lattice_sum(xi_arr, y, p, int(L), signed)
        tail = lattice_tail_bound(y, p, L)
    val = val.reshape(np.shape(xi)) if np.ndim(xi) else complex(val[0])
    return (val, tail) if return_tail else val


def _hplus(r, y, J, p):
    """sum over l > 0 with l = r (mod J) of (l + y)^{-p}."""
    l0 = np.mod(r, J)
    l0 = np.where(l0 == 0, J, l0)
    return J ** (-p) * zeta(p, (l0 + y) / J)


def class_sums(y, J, d, two_alpha, signed=False):
    """T_r = sum_{l = r (mod J), l != 0} s_l(y) for r = 0..J-1 (exact)."""
    p = _p(d, two_alpha)
    r = np.arange(J)
    if y == 0:
        return np.zeros(J)
    plus = _hplus(r, y, J, p)
    minus = _hplus(-r, -y, J, p)
    if signed:
        return abs(y) ** p * np.sign(y) * (plus - minus)
    return abs(y) ** p * (plus + minus)


def omega_grid(y, J, d, two_alpha, signed=False):
    """Omega(xi_j, y) for xi_j = j/J, j = 0..J-1, via Hurwitz zeta class sums."""
    T = class_sums(y, J, d, two_alpha, signed)
    j = np.arange(J)
    return np.exp(2j * np.pi * np.outer(j, np.arange(J)) / J) @ T


def stability_D(y, J, d, two_alpha, L=DEFAULT_L, form="simplified", signed=False, method="zeta"):
    """D(y).

    ``form="simplified"``: 1 + mean|Omega_j|^2 + 2 sum_{J | l, l != 0} s_l.
    ``form="average"``: mean |1 + Omega_j|^2 (the defining expression).
    ``method="direct"`` uses truncated lattice sums instead of zeta values.
    """
    Om = _omega_values(y, J, d, two_alpha, L, signed, method)
    if form == "average":
        return float(np.mean(np.abs(1.0 + Om) ** 2))
    S = _first_term(y, J, d, two_alpha, L, signed, method)
    return float(1.0 + np.mean(np.abs(Om) ** 2) + 2.0 * S)


def error_E(y, J, d, two_alpha, L=DEFAULT_L, signed=False, method="zeta"):
    """E(y) = sum_{J | l, l != 0} s_l + mean |Omega_j|^2."""
    Om = _omega_values(y, J, d, two_alpha, L, signed, method)
    return float(_first_term(y, J, d, two_alpha, L, signed, method) + np.mean(np.abs(Om) ** 2))


def error_E_first_term(y, J, d, two_alpha, signed=False):
    return float(_first_term(y, J, d, two_alpha, DEFAULT_L, signed, "zeta"))


def _omega_values(y, J, d, two_alpha, L, signed, method):
    if method == "zeta":
        return omega_grid(y, J, d, two_alpha, signed)
    return omega(np.arange(J) / J, y, d, two_alpha, L, signed)


def _first_term(y, J, d, two_alpha, L, signed, method):
    if method == "zeta":
        return float(class_sums(y, J, d, two_alpha, signed)[0])
    if y == 0:
        return 0.0
    p = _p(d, two_alpha)
    l = np.arange(1, L // max(J, 1) + 1) * J
    pos = np.abs(l + y) ** (-p)
    neg = np.abs(-l + y) ** (-p)
    if signed:
        return float(abs(y) ** p * np.sign(y) * np.sum(pos - neg))
    return float(abs(y) ** p * np.sum(pos + neg))


@dataclass
class ModelProblem:
    """Model operator of order two_alpha, splines of degree d on N uniform cells,
    refined equispaced collocation with M = J N points, exact density u_true."""

    d: int
    two_alpha: float
    N: int
    J: int
    u_true: FourierVector
    L: int = DEFAULT_L
    signed: bool | None = None

    def __post_init__(self):
        if not self.d > self.two_alpha:
            raise ValueError("consistency needs d > 2 alpha")
        if self.N < 1 or self.J < 1:
            raise ValueError("N and J must be positive")
        if self.signed is None:
            self.signed = self.d % 2 == 0
        # zeta-based sums are exact; the direct-sum tail is reported for reference
        self.tail = lattice_tail_bound(0.5, _p(self.d, self.two_alpha), self.L)

    @property
    def M(self):
        return self.J * self.N

    @property
    def Lambda(self):
        return np.arange(-((self.N - 1) // 2), self.N // 2 + 1)


@dataclass
class ErrorCoefficients:
    mu: np.ndarray
    error: np.ndarray           # a_mu - u_mu
    leading: np.ndarray         # -(E/D) u_mu  (0 at mu = 0)
    remainder: np.ndarray       # R_N(mu)      (Z_N at mu = 0)
    D: np.ndarray
    E: np.ndarray
    Z: complex

    def as_dict(self):
        return {int(m): complex(e) for m, e in zip(self.mu, self.error)}


def exact_error_coeffs(problem: ModelProblem) -> ErrorCoefficients:
    """a_mu - u_mu for mu in Lambda_N from the closed-form error expansion."""
    P = problem
    u = P.u_true
    K = u.K
    mus = P.Lambda
    err = np.zeros(len(mus), dtype=complex)
    lead = np.zeros(len(mus), dtype=complex)
    rem = np.zeros(len(mus), dtype=complex)
    Ds = np.ones(len(mus))
    Es = np.zeros(len(mus))
    # mu = 0: aliasing of multiples of M
    nM = np.arange(-(K // P.M), K // P.M + 1) * P.M
    nM = nM[nM != 0]
    Z = complex(np.sum(pseudodiff_symbol(nM, P.two_alpha) * u[nM]))
    for i, mu in enumerate(mus):
        if mu == 0:
            err[i] = rem[i] = Z
            continue
        y = mu / P.N
        T = class_sums(y, P.J, P.d, P.two_alpha, P.signed)
        Om = np.exp(2j * np.pi * np.outer(np.arange(P.J), np.arange(P.J)) / P.J) @ T
        mean_sq = float(np.mean(np.abs(Om) ** 2))
        D = 1.0 + mean_sq + 2.0 * T[0]
        E = T[0] + mean_sq
        if D <= 1e-12:
            # only the signed sums can reach 0: even d, y = 1/2, J = 1
            raise SingularSystem(f"D({y}) = {D:.1e}: the collocation system is singular at mu={mu}")
        kmax = (K + abs(mu)) // P.N
        k = np.arange(-kmax, kmax + 1)
        k = k[(k != 0) & (np.abs(mu + k * P.N) <= K)]
        n = mu + k * P.N
        ratio = np.abs(n / mu) ** P.two_alpha
        weight = (np.mod(k, P.J) == 0).astype(float) + T[np.mod(k, P.J)]
        R = np.sum(ratio * u[n] * weight) / D
        Ds[i] = D
        Es[i] = E
        lead[i] = -(E / D) * u[mu]
        rem[i] = R
        err[i] = lead[i] + R
    return ErrorCoefficients(mus, err, lead, rem, Ds, Es, Z)


def explicit_solution_coeffs(problem: ModelProblem) -> np.ndarray:
    """a_mu from the unsimplified solution formula (average over xi_j of the
    aliased data against 1 + conj(Omega)), as an independent check of
    ``exact_error_coeffs``."""
    P = problem
    u = P.u_true
    K = u.K
    out = np.zeros(len(P.Lambda), dtype=complex)
    xi = np.arange(1, P.J + 1) / P.J
    for i, mu in enumerate(P.Lambda):
        kmax = (K + abs(mu)) // P.N
        k = np.arange(-kmax, kmax + 1)
        k = k[np.abs(mu + k * P.N) <= K]
        n = mu + k * P.N
        phase = np.exp(2j * np.pi * np.outer(xi, k))
        if mu == 0:
            vals = pseudodiff_symbol(n, P.two_alpha) * u[n]
            out[i] = np.mean(phase @ vals)
            continue
        y = mu / P.N
        T = class_sums(y, P.J, P.d, P.two_alpha, P.signed)
        j = np.arange(1, P.J + 1)
        Om = np.exp(2j * np.pi * np.outer(j, np.arange(P.J)) / P.J) @ T
        D = float(np.mean(np.abs(1.0 + Om) ** 2))
        vals = np.abs(n / mu) ** P.two_alpha * u[n]
        out[i] = np.mean((phase @ vals) * (1.0 + np.conj(Om))) / D
    return out


def psi_norm_weights(N, d, t, mus):
    """sum_{k = mu (N)} [k]^{2t} |mu/k|^{2(d+1)}: the H^t norm^2 of psi_mu."""
    q = 2.0 * (d + 1) - 2.0 * t
    if not q > 1:
        raise ValueError("need 2(d+1) - 2t > 1")
    out = np.ones(len(mus))
    for i, mu in enumerate(mus):
        if mu == 0:
            continue
        y = abs(mu) / N
        out[i] = abs(mu) ** (2 * (d + 1)) * N ** (-q) * (zeta(q, y) + zeta(q, 1 - y))
    return out


def psi_error_norm(errors: ErrorCoefficients, N, d, t):
    """H^t norm of sum_mu e_mu psi_mu assembled from per-mode weights."""
    w = psi_norm_weights(N, d, t, errors.mu)
    return float(np.sqrt(np.sum(w * np.abs(errors.error) ** 2)))


def low_freq_projection(f: FourierVector, N, d=None):
    """psi coefficients of P_N f: the Fourier coefficients of f on Lambda_N."""
    lam = np.arange(-((N - 1) // 2), N // 2 + 1)
    return dict(zip(lam.tolist(), f[lam].tolist()))


def psi_synthesis(coeffs, N, d, K) -> FourierVector:
    """Fourier coefficients (band K) of sum_mu c_mu psi_mu; ``coeffs`` is a
    mapping mu -> c_mu or an array ordered like Lambda_N."""
    if isinstance(coeffs, dict):
        lam = np.arange(-((N - 1) // 2), N // 2 + 1)
        coeffs = [coeffs.get(int(m), 0.0) for m in lam]
    return psi_fourier(coeffs, N, d, K)


def aliasing_error(f: FourierVector, M) -> complex:
    """int f - Q_M[f] = -sum_{j != 0} f_{jM} for the M-point trapezoid rule."""
    j = np.arange(1, f.K // M + 1) * M
    return complex(-(np.sum(f[j]) + np.sum(f[-j])))


def trapezoid(f: FourierVector, M) -> complex:
    """Q_M[f] by direct summation of the samples."""
    return complex(np.mean(f.synthesize(np.arange(M) / M)))


def plane_wave_trace(k, radius=1.0, theta=0.0, K=None, tol=1e-17) -> FourierVector:
    """Fourier coefficients of exp(i k x . (cos theta, sin theta)) on a circle:
    i^m J_m(kR) e^{-i m theta}."""
    if K is None:
        K = int(np.ceil(abs(k) * radius)) + 10
        while abs(jv(K, k * radius)) > tol:
            K += 5
    m = np.arange(-K, K + 1)
    return FourierVector((1j) ** np.mod(m, 4) * jv(m, k * radius) * np.exp(-1j * m * theta))


def circle_reference(spec: OperatorSpec, radius, data: FourierVector, rel_tol=1e-17,
                     floor=1e-12) -> FourierVector:
    """Density u with V u = data on a circle: u_m = f_m / lambda_m."""
    m = data.modes
    lam = circle_symbol(spec, m, radius)
    keep = np.abs(data.coeffs) > rel_tol * np.max(np.abs(data.coeffs))
    small = keep & (np.abs(lam) < floor)
    if np.any(small):
        bad = int(m[np.argmax(small)])
        raise NearResonantMode(f"|lambda_{bad}| below {floor}", mode=bad)
    out = np.zeros_like(data.coeffs)
    out[keep] = data.coeffs[keep] / lam[keep]
    return FourierVector(out)


def circle_single_layer_field(spec: OperatorSpec, radius, density: FourierVector, x):
    """Single layer potential of a Fourier density on a circle centred at the
    origin, evaluated at the point x off the circle."""
    x = np.asarray(x, dtype=float)
    rho = float(np.hypot(x[0], x[1]))
    th = float(np.arctan2(x[1], x[0]))
    keep = density.coeffs != 0
    m = density.modes[keep]
    am = np.abs(m)
    lo, hi = sorted((spec.k * radius, spec.k * rho))
    with np.errstate(over="ignore", invalid="ignore"):
        radial = jv(am, lo) * hankel1(am, hi)
    # J_m underflows and Y_m overflows together at large order, where
    # J_m(a) H_m(b) ~ -(i / (pi m)) (a / b)^m
    bad = ~np.isfinite(radial)
    radial[bad] = -1j / (np.pi * am[bad]) * (lo / hi) ** am[bad]
    return complex(np.sum(0.5j * np.pi * radius * radial * density.coeffs[keep] * np.exp(1j * m * th)))


def _symbol_tail(spec: OperatorSpec, radius):
    """(c, p) pairs with lambda_n ~ sum c |n|^{-p} for large |n| (same for +-n)."""
    if not spec.helmholtz:
        return [(1.0, -spec.two_alpha)]
    x = spec.k * radius
    if spec.kind == "single_layer":
        # R / (2 sqrt(n^2 - x^2)) times the Debye correction 1 + x^2 / (2 n^4)
        return [(radius / 2, 1.0), (radius * x ** 2 / 4, 3.0),
                (radius * (3 * x ** 4 / 16 + x ** 2 / 4), 5.0)]
    sg = spec.normal_sign
    return [(0.5, 0.0), (sg * x ** 2 / 4, 3.0), (sg * 3 * x ** 4 / 8, 5.0)]


def _class_tail(q, M, K, s, odd):
    """sum over n = q (mod M), |n| > K of sgn(n)^odd |n|^{-s}."""
    n1 = K + 1 + (q - K - 1) % M
    m1 = K + 1 + (-q - K - 1) % M
    neg = -1.0 if odd else 1.0
    return M ** (-s) * (zeta(s, n1 / M) + neg * zeta(s, m1 / M))


def circle_psi_solution(spec: OperatorSpec, radius, data: FourierVector, N, d,
                        method="least_squares", J=1, K=None):
    """Closed-form trial coefficients on a circle with N uniform cells.

    Every operator on a circle is a Fourier multiplier, so with the psi basis
    the Galerkin, Bubnov-Galerkin and equispaced least-squares (M = J N
    points m / M) systems decouple into one equation per mode mu.  Lattice
    sums run to |n| <= K; the rest uses the large-order expansion of the
    symbol summed with Hurwitz zeta.  Returns (psi coefficients ordered like
    Lambda_N, B-spline coefficients).
    """
    from .basis import PsiBasisSpec

    psi = PsiBasisSpec(N, d)
    lam_idx = psi.Lambda_N
    M = J * N
    if K is None:
        K = max(4096, 8 * M, data.K)
    K = max(int(K), data.K)
    n = np.arange(-K, K + 1)
    lam = circle_symbol(spec, n, radius)
    f = data.rebanded(K).coeffs
    tail = _symbol_tail(spec, radius)
    q = d + 1
    out = np.zeros(N, dtype=complex)
    for i, mu in enumerate(lam_idx):
        if mu == 0:
            # psi_0 = 1; least squares sees every mode aliased onto 0 (mod M)
            f0 = np.sum(f[np.mod(n, M) == 0]) if method == "least_squares" else f[K]
            out[i] = f0 / lam[K]
            continue
        sel = np.mod(n - mu, N) == 0
        nn = n[sel]
        ph = (mu / nn) ** q
        if method == "galerkin":
            den = np.sum(ph * ph * lam[sel])
            den += sum(c * mu ** (2 * q) * _class_tail(mu, N, K, p + 2 * q, False) for c, p in tail)
            out[i] = np.sum(ph * f[sel]) / den
        elif method == "bubnov_galerkin":
            den = np.sum(np.abs(lam[sel] * ph) ** 2)
            den += sum(np.real(c1 * np.conj(c2)) * mu ** (2 * q) *
                       _class_tail(mu, N, K, p1 + p2 + 2 * q, False)
                       for c1, p1 in tail for c2, p2 in tail)
            out[i] = np.sum(np.conj(lam[sel] * ph) * f[sel]) / den
        elif method == "least_squares":
            res = np.mod(nn, M)
            A = np.bincount(res, weights=(lam[sel] * ph).real, minlength=M) \
                + 1j * np.bincount(res, weights=(lam[sel] * ph).imag, minlength=M)
            F = np.bincount(np.mod(n, M), weights=f.real, minlength=M) \
                + 1j * np.bincount(np.mod(n, M), weights=f.imag, minlength=M)
            cls = np.mod(mu + N * np.arange(J), M)
            A = A[cls] + np.array([sum(c * mu ** q * _class_tail(r, M, K, p + q, q % 2 == 1)
                                       for c, p in tail) for r in cls])
            out[i] = np.vdot(A, F[cls]) / np.vdot(A, A)
        else:
            raise ValueError(f"unknown method {method!r}")
    return out, psi.to_bspline() @ out


def manufactured_exterior_solution(curve, k, source):
    """Data G(z(t), source) and exact exterior field G(x, source)."""
    source = np.asarray(source, dtype=float)
    if not curve.contains(source):
        raise SourceOutside(f"source {source.tolist()} is not inside the curve")
    spec = OperatorSpec("single_layer", k=k)

    def data(t):
        return greens_kernel(spec, curve.point(t), source)

    def field(x):
        return greens_kernel(spec, np.asarray(x, dtype=float), source)

    return data, field


def plane_wave(k, theta=0.0):
    """exp(i k (cos theta x1 + sin theta x2)) as a function of points."""
    d = np.array([np.cos(theta), np.sin(theta)])

    def f(x):
        return np.exp(1j * k * (np.asarray(x, dtype=float) @ d))

    return f


def model_density(K, decay=4.0, seed=0):
    """u_m = (1 + |m|)^{-decay} e^{i theta_m} with fixed pseudo-random phases."""
    m = np.arange(-K, K + 1)
    theta = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, len(m))
    return FourierVector((1.0 + np.abs(m)) ** (-decay) * np.exp(1j * theta))


__all__ = [
    "ModelProblem", "ErrorCoefficients", "omega", "omega_grid", "class_sums", "stability_D",
    "error_E", "error_E_first_term", "exact_error_coeffs", "explicit_solution_coeffs",
    "psi_error_norm", "psi_norm_weights", "low_freq_projection", "psi_synthesis",
    "aliasing_error", "trapezoid", "plane_wave_trace", "circle_reference",
    "circle_single_layer_field", "manufactured_exterior_solution", "plane_wave",
    "model_density", "lattice_tail_bound", "bspline_hat", "circle_psi_solution",
]

"""Truncated Fourier series on [0, 1) and the Sobolev norms built on them.

Coefficients follow f_hat[m] = int_0^1 exp(-2 pi i m t) f(t) dt and are stored
for m = -K..K.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InsufficientResolution


@dataclass(frozen=True, eq=False)
class FourierVector:
    coeffs: np.ndarray
    real_valued: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or len(c) % 2 != 1:
            raise ValueError("coeffs must be a 1D array of odd length 2K+1")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if self.real_valued and not np.allclose(c, np.conj(c[::-1]), rtol=0,
                                                atol=1e-12 * max(1.0, np.max(np.abs(c)))):
            raise ValueError("real_valued set but coefficients are not conjugate symmetric")

    @property
    def K(self) -> int:
        return (len(self.coeffs) - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def __getitem__(self, m):
        m = np.asarray(m)
        out = np.zeros(m.shape, dtype=complex)
        ok = np.abs(m) <= self.K
        out[ok] = self.coeffs[m[ok] + self.K]
        return out if out.ndim else complex(out)

    @classmethod
    def zeros(cls, K):
        return cls(np.zeros(2 * K + 1, dtype=complex))

    @classmethod
    def from_modes(cls, K, modes):
        """``modes`` maps mode index to coefficient."""
        c = np.zeros(2 * K + 1, dtype=complex)
        for m, v in modes.items():
            if abs(m) > K:
                raise ValueError(f"mode {m} outside band {K}")
            c[m + K] += v
        return cls(c)

    @classmethod
    def from_function(cls, fn, K):
        """Coefficients from a function of the mode index (vectorized)."""
        m = np.arange(-K, K + 1)
        return cls(np.asarray(fn(m), dtype=complex) * np.ones(len(m)))

    def truncate(self, K):
        return self.rebanded(K)

    def rebanded(self, K):
        """Same function on band K, zero padded or truncated."""
        out = np.zeros(2 * K + 1, dtype=complex)
        k = min(K, self.K)
        out[K - k:K + k + 1] = self.coeffs[self.K - k:self.K + k + 1]
        return FourierVector(out)

    def _aligned(self, other):
        K = max(self.K, other.K)
        return self.rebanded(K).coeffs, other.rebanded(K).coeffs, K

    def __add__(self, other):
        a, b, _ = self._aligned(other)
        return FourierVector(a + b)

    def __sub__(self, other):
        a, b, _ = self._aligned(other)
        return FourierVector(a - b)

    def __neg__(self):
        return FourierVector(-self.coeffs)

    def __mul__(self, scalar):
        return FourierVector(self.coeffs * scalar)

    __rmul__ = __mul__

    def synthesize(self, x):
        """Evaluate the trigonometric polynomial at arbitrary points."""
        x = np.asarray(x, dtype=float)
        return _kernels.fourier_synth(self.coeffs, self.modes, x)

    def samples(self, Q):
        """Values at the Q equispaced points j/Q, via FFT when Q > 2K."""
        if Q <= 2 * self.K:
            return self.synthesize(np.arange(Q) / Q)
        buf = np.zeros(Q, dtype=complex)
        m = self.modes
        buf[m % Q] = self.coeffs
        return np.fft.ifft(buf) * Q


def fourier_coefficients(f, K, oversample=2) -> FourierVector:
    """Trapezoidal-rule Fourier coefficients on ``Q >= oversample*(2K+1)`` points.

    ``f`` is called once with the array of sample points.
    """
    if oversample < 2:
        raise InsufficientResolution("oversample factor must be at least 2")
    Q = int(np.ceil(oversample * (2 * K + 1)))
    x = np.arange(Q) / Q
    vals = np.asarray(f(x), dtype=complex) * np.ones(Q)
    c = np.fft.fft(vals) / Q
    m = np.arange(-K, K + 1)
    return FourierVector(c[m % Q])


def _weights(m, s):
    am = np.abs(m).astype(float)
    w = np.ones_like(am)
    nz = am != 0
    w[nz] = am[nz] ** (2.0 * s)
    return w


def sobolev_norm(f: FourierVector, s: float) -> float:
    """(|f_0|^2 + sum_{m != 0} |m|^{2s} |f_m|^2)^{1/2} over the stored band."""
    w = _weights(f.modes, s)
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def sobolev_tail(f: FourierVector, s: float, fraction=0.25) -> float:
    """Norm contribution of the outermost ``fraction`` of the band.

    A rough indicator of how much the truncation to the stored band may hide.
    """
    m = f.modes
    cut = max(1, int(np.floor((1 - fraction) * f.K)))
    sel = np.abs(m) > cut
    w = _weights(m[sel], s)
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs[sel]) ** 2)))


def duality_pairing(f: FourierVector, g: FourierVector) -> complex:
    """sum_m conj(f_m) g_m over the common band."""
    K = min(f.K, g.K)
    a = f.coeffs[f.K - K:f.K + K + 1]
    b = g.coeffs[g.K - K:g.K + K + 1]
    return complex(np.vdot(a, b))


def sobolev_inner(f: FourierVector, g: FourierVector, s: float) -> complex:
    K = min(f.K, g.K)
    m = np.arange(-K, K + 1)
    a = f.coeffs[f.K - K:f.K + K + 1]
    b = g.coeffs[g.K - K:g.K + K + 1]
    return complex(np.sum(_weights(m, s) * np.conj(a) * b))

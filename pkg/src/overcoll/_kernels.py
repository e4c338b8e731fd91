"""Hot loops, each with a numba version and a numpy fallback.

The public names at the bottom pick one implementation at import time
according to ``_accel.USE_NUMBA``.  Both versions stay importable so the
benchmark and the tests can compare them.
"""
import numpy as np

from ._accel import USE_NUMBA, try_njit


# periodic B-splines, Cox-de Boor on an extended knot vector

def bspline_local_numpy(t, cell, ext, d):
    """Nonzero B-spline values at ``t``.

    ``ext[j + d]`` holds knot ``j`` for ``j`` in ``[-d, N + d]`` and ``t`` lies in
    ``[ext[cell + d], ext[cell + d + 1])``.  Column ``r`` of the result belongs to
    basis function ``cell - d + r``.
    """
    t = np.asarray(t, dtype=float)
    c = np.asarray(cell, dtype=np.int64) + d
    vals = np.zeros(t.shape + (d + 1,))
    vals[..., 0] = 1.0
    left = np.zeros(t.shape + (d + 1,))
    right = np.zeros(t.shape + (d + 1,))
    for j in range(1, d + 1):
        left[..., j] = t - ext[c + 1 - j]
        right[..., j] = ext[c + j] - t
        saved = np.zeros(t.shape)
        for r in range(j):
            temp = vals[..., r] / (right[..., r + 1] + left[..., j - r])
            vals[..., r] = saved + right[..., r + 1] * temp
            saved = left[..., j - r] * temp
        vals[..., j] = saved
    return vals


@try_njit
def bspline_local_numba(t, cell, ext, d):
    n = t.shape[0]
    vals = np.zeros((n, d + 1))
    left = np.zeros(d + 1)
    right = np.zeros(d + 1)
    for i in range(n):
        c = cell[i] + d
        x = t[i]
        vals[i, 0] = 1.0
        for j in range(1, d + 1):
            left[j] = x - ext[c + 1 - j]
            right[j] = ext[c + j] - x
            saved = 0.0
            for r in range(j):
                temp = vals[i, r] / (right[r + 1] + left[j - r])
                vals[i, r] = saved + right[r + 1] * temp
                saved = left[j - r] * temp
            vals[i, j] = saved
    return vals


# lattice sums  sum_{0<|l|<=L} w_l |l+y|^{-p} e^{2 pi i l xi}

def lattice_sum_numpy(xi, y, p, L, signed):
    xi = np.asarray(xi, dtype=float)
    out = np.zeros(xi.shape, dtype=complex)
    chunk = 4096
    for start in range(1, L + 1, chunk):
        l = np.arange(start, min(start + chunk, L + 1), dtype=float)
        pos = np.abs(l + y) ** (-p)
        neg = np.abs(-l + y) ** (-p)
        if signed:
            neg = -neg
        ph = np.exp(2j * np.pi * np.multiply.outer(xi, l))
        out += ph @ pos + np.conj(ph) @ neg
    return out


@try_njit
def lattice_sum_numba(xi, y, p, L, signed):
    out = np.zeros(xi.shape[0], dtype=np.complex128)
    for i in range(xi.shape[0]):
        step = np.exp(2j * np.pi * xi[i])
        ph = step
        acc = 0.0 + 0.0j
        for l in range(1, L + 1):
            pos = abs(l + y) ** (-p)
            neg = abs(-l + y) ** (-p)
            if signed:
                neg = -neg
            acc += ph * pos + np.conj(ph) * neg
            ph *= step
            if l % 64 == 0:
                # refresh the phase to stop drift from repeated products
                ph = np.exp(2j * np.pi * xi[i] * (l + 1))
        out[i] = acc
    return out


# direct Fourier synthesis  sum_k c_k e^{2 pi i k x}; the phase k x is reduced
# mod 1 first so large k x does not cost digits in exp

def fourier_synth_numpy(coeffs, modes, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    chunk = max(1, 2_000_000 // max(1, len(modes)))
    flat = x.ravel()
    res = out.ravel()
    for s in range(0, flat.size, chunk):
        xs = flat[s:s + chunk]
        res[s:s + chunk] = np.exp(2j * np.pi * np.mod(np.multiply.outer(xs, modes), 1.0)) @ coeffs
    return res.reshape(x.shape)


@try_njit
def fourier_synth_numba(coeffs, modes, x):
    out = np.zeros(x.shape[0], dtype=np.complex128)
    for i in range(x.shape[0]):
        acc = 0.0 + 0.0j
        for j in range(modes.shape[0]):
            ph = modes[j] * x[i]
            acc += coeffs[j] * np.exp(2j * np.pi * (ph - np.floor(ph)))
        out[i] = acc
    return out


# complex scatter-add into a dense matrix

def scatter_add_numpy(out, rows, cols, vals):
    n, m = out.shape
    flat = rows.astype(np.int64) * m + cols.astype(np.int64)
    out += (np.bincount(flat, weights=vals.real, minlength=n * m)
            + 1j * np.bincount(flat, weights=vals.imag, minlength=n * m)).reshape(n, m)
    return out


@try_njit
def scatter_add_numba(out, rows, cols, vals):
    for i in range(rows.shape[0]):
        out[rows[i], cols[i]] += vals[i]
    return out


def bspline_local(t, cell, ext, d):
    t = np.ascontiguousarray(t, dtype=float)
    if USE_NUMBA and t.ndim == 1:
        return bspline_local_numba(t, np.ascontiguousarray(cell, dtype=np.int64),
                                   np.ascontiguousarray(ext, dtype=float), int(d))
    return bspline_local_numpy(t, cell, ext, d)


def lattice_sum(xi, y, p, L, signed=False):
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if USE_NUMBA:
        return lattice_sum_numba(np.ascontiguousarray(xi), float(y), float(p), int(L), bool(signed))
    return lattice_sum_numpy(xi, float(y), float(p), int(L), bool(signed))


def fourier_synth(coeffs, modes, x):
    x = np.asarray(x, dtype=float)
    coeffs = np.ascontiguousarray(coeffs, dtype=complex)
    modes = np.ascontiguousarray(modes, dtype=float)
    if USE_NUMBA:
        flat = np.ascontiguousarray(x.ravel())
        return fourier_synth_numba(coeffs, modes, flat).reshape(x.shape)
    return fourier_synth_numpy(coeffs, modes, x)


def scatter_add(out, rows, cols, vals):
    rows = np.ascontiguousarray(rows, dtype=np.int64).ravel()
    cols = np.ascontiguousarray(cols, dtype=np.int64).ravel()
    vals = np.ascontiguousarray(vals, dtype=complex).ravel()
    if USE_NUMBA:
        return scatter_add_numba(out, rows, cols, vals)
    return scatter_add_numpy(out, rows, cols, vals)

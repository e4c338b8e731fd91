"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Both versions are called directly, so the OVERCOLL_DISABLE_NUMBA flag does
not matter here.  The first numba call (compilation) is excluded.
"""
import argparse
import timeit

import numpy as np

from overcoll import _kernels
from overcoll._accel import HAVE_NUMBA
from overcoll.basis import SplineSpace


def cases(rng):
    space = SplineSpace.uniform_mesh(256, 3)
    t = rng.random(200_000)
    cell = np.searchsorted(space.knots, t, side="right") - 1
    ext = space._ext
    xi = np.arange(8) / 8
    K = 256
    coeffs = rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)
    modes = np.arange(-K, K + 1).astype(float)
    x = rng.random(4096)
    out = np.zeros((512, 512), dtype=complex)
    rows = rng.integers(0, 512, 400_000)
    cols = rng.integers(0, 512, 400_000)
    vals = rng.standard_normal(400_000).astype(complex)
    return {
        "bspline_local d=3, 2e5 points": (
            lambda: _kernels.bspline_local_numpy(t, cell, ext, 3),
            lambda: _kernels.bspline_local_numba(t, cell, ext, 3)),
        "lattice_sum J=8, L=1e5": (
            lambda: _kernels.lattice_sum_numpy(xi, 0.3, 3.0, 100_000, True),
            lambda: _kernels.lattice_sum_numba(xi, 0.3, 3.0, 100_000, True)),
        "fourier_synth K=256, 4096 points": (
            lambda: _kernels.fourier_synth_numpy(coeffs, modes, x),
            lambda: _kernels.fourier_synth_numba(coeffs, modes, x)),
        "scatter_add 4e5 entries": (
            lambda: _kernels.scatter_add_numpy(out, rows, cols, vals),
            lambda: _kernels.scatter_add_numba(out, rows, cols, vals)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':36s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, (f_np, f_nb) in cases(rng).items():
        a = f_np()
        b = f_nb()  # compiles
        diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if "scatter" not in name else 0.0
        t_np = min(timeit.repeat(f_np, number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(f_nb, number=1, repeat=args.repeat)) * 1e3
        print(f"{name:36s} {t_np:10.2f} {t_nb:10.2f} {t_np / t_nb:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()

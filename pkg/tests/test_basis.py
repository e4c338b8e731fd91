import warnings

import numpy as np
import pytest

from overcoll.basis import (PsiBasisSpec, SplineSpace, eval_bspline, eval_psi, hs_projection,
                            psi_fourier, spline_fourier)
from overcoll.errors import IllConditionedWarning, IndexOutOfLambda
from overcoll.spectral import FourierVector, fourier_coefficients, sobolev_norm


def random_mesh(N, seed):
    rng = np.random.default_rng(seed)
    # jittered uniform mesh keeps rho bounded
    return np.sort((np.arange(N) + 0.8 * rng.random(N)) / N)


def kink_target(t0, K=2 ** 12):
    """|sin(pi (t - t0))|: in H^{3/2 - eps}, kink at t0."""
    m = np.arange(-K, K + 1)
    return FourierVector(2 / (np.pi * (1 - 4.0 * m ** 2)) * np.exp(-2j * np.pi * m * t0))


def fitted_slope(Ns, errs):
    return np.polyfit(np.log(Ns), np.log(errs), 1)[0]


# -- SplineSpace -------------------------------------------------------------

@pytest.mark.parametrize("d", [0, 1, 2, 3])
@pytest.mark.parametrize("uniform", [True, False])
def test_partition_of_unity(d, uniform):
    N = 13
    space = SplineSpace.uniform_mesh(N, d) if uniform else SplineSpace(random_mesh(N, d), d)
    t = np.random.default_rng(7).random(1000)
    assert np.max(np.abs(space.matrix(t).sum(axis=1) - 1)) <= 1e-12


def test_hat_is_one_at_its_node():
    space = SplineSpace.uniform_mesh(4, 1)
    # phi_0 rises on [0, 1/4] and peaks at the second knot of its support
    assert eval_bspline(space, 0, 0.25) == pytest.approx(1.0, abs=1e-15)
    assert eval_bspline(space, 0, np.array([0.0, 0.5, 0.75])) == pytest.approx(0.0, abs=1e-15)
    for n in range(4):
        assert eval_bspline(space, n, (n + 1) / 4 % 1) == pytest.approx(1.0, abs=1e-15)


def test_quadratic_knot_value_against_convolution():
    # B_2 = 1_[0,1] * 1_[0,1] * 1_[0,1], built by discrete convolution
    n = 4000
    box = np.ones(n) / n
    b2 = np.convolve(np.convolve(box, box), box) * n
    x = (np.arange(len(b2)) + 1.5) / n   # centres of the three-fold sums
    N = 10
    space = SplineSpace.uniform_mesh(N, 2)
    t = np.array([0.03, 0.1, 0.17, 0.2, 0.25])
    for n_idx in (0, 1):
        got = eval_bspline(space, n_idx, t)
        want = np.interp(N * t - n_idx, x, b2, left=0.0, right=0.0)
        assert np.allclose(got, want, atol=2e-3)
    # at a knot exactly two splines are nonzero, each 1/2
    row = space.matrix(np.array([0.3]))[0]
    assert sorted(row[row > 1e-14]) == pytest.approx([0.5, 0.5], abs=1e-14)


def test_space_dimension_and_quasiuniformity():
    knots = random_mesh(20, 3)
    space = SplineSpace(knots, 2)
    t = np.random.default_rng(0).random(400)
    assert np.linalg.matrix_rank(space.matrix(t)) == 20
    gaps = np.diff(np.append(knots, knots[0] + 1))
    assert space.h == pytest.approx(gaps.max())
    assert gaps.max() <= space.rho * gaps.min() * (1 + 1e-12)
    assert (space.l, space.m_reg) == (3, 2)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_coefficient_decay(d):
    space = SplineSpace.uniform_mesh(8, d)
    a = np.random.default_rng(d).standard_normal(8)
    f = space.fourier(a, 4096)
    m = np.arange(1, 4097)
    scaled = np.abs(f[m]) * m ** (d + 1)
    # bounded, so the element sits in H^{d + 1/2 - eps}
    assert scaled[-2048:].max() <= 2 * scaled[:2048].max()


def test_rejects_bad_knots():
    with pytest.raises(ValueError):
        SplineSpace([0.0, 0.5, 0.5], 1)
    with pytest.raises(ValueError):
        SplineSpace([0.0, 1.0], 0)
    with pytest.raises(ValueError):
        SplineSpace([0.0, 0.5], 2)


# -- spline_fourier ----------------------------------------------------------

@pytest.mark.parametrize("d", [0, 1, 3])
def test_fourier_of_ones_is_constant(d):
    space = SplineSpace.uniform_mesh(12, d)
    f = spline_fourier(space, np.ones(12), 40)
    expect = np.zeros(81)
    expect[40] = 1
    assert np.max(np.abs(f.coeffs - expect)) <= 1e-12
    f2 = spline_fourier(SplineSpace(random_mesh(12, 1), d), np.ones(12), 40)
    assert np.max(np.abs(f2.coeffs - expect)) <= 1e-12


def test_single_hat_closed_form():
    N, K = 8, 50
    f = spline_fourier(SplineSpace.uniform_mesh(N, 1), np.eye(N)[0], K)
    m = np.arange(-K, K + 1).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        # second derivative of the hat is N(delta_0 - 2 delta_{1/N} + delta_{2/N})
        want = -N * (1 - np.exp(-2j * np.pi * m / N)) ** 2 / (4 * np.pi ** 2 * m ** 2)
    want[K] = 1 / N
    assert np.max(np.abs(f.coeffs - want)) <= 1e-14


def test_quadrature_path_matches_closed_form():
    # a shifted uniform mesh takes the quadrature branch
    N, d, K, shift = 9, 2, 30, 0.013
    a = np.random.default_rng(1).standard_normal(N)
    shifted = SplineSpace(np.arange(N) / N + shift, d)
    assert not shifted.uniform
    m = np.arange(-K, K + 1)
    want = SplineSpace.uniform_mesh(N, d).fourier(a, K).coeffs * np.exp(-2j * np.pi * m * shift)
    assert np.max(np.abs(shifted.fourier(a, K).coeffs - want)) <= 1e-13


def test_wrong_coefficient_count():
    with pytest.raises(ValueError):
        spline_fourier(SplineSpace.uniform_mesh(4, 1), np.ones(5), 8)


@pytest.mark.parametrize("N,d", [(8, 1), (7, 2), (6, 3)])
def test_psi_recurrence(N, d):
    spec = PsiBasisSpec(N, d)
    c = np.random.default_rng(N).standard_normal(N) + 1j * np.random.default_rng(d).standard_normal(N)
    coeffs = spec.to_bspline() @ c
    K = 10 * N
    f = spec.space().fourier(coeffs, K)
    for mu in spec.Lambda_N:
        if mu == 0:
            continue
        k = np.arange(-K, K + 1)
        k = k[(k - mu) % N == 0]
        lhs = k.astype(float) ** (d + 1) * f[k]
        rhs = float(mu) ** (d + 1) * f[mu]
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, abs(rhs))
    # and it agrees with the direct series coefficients
    assert np.max(np.abs(f.coeffs - psi_fourier(c, N, d, K).coeffs)) <= 1e-12


# -- psi basis ---------------------------------------------------------------

@pytest.mark.parametrize("N", [1, 2, 7, 8])
def test_lambda_size(N):
    lam = PsiBasisSpec(N, 1).Lambda_N
    assert len(lam) == N
    assert np.all(lam > -N / 2) and np.all(lam <= N / 2)


def test_psi_zero_is_one():
    x = np.linspace(0, 1, 17, endpoint=False)
    for method in ("spline", "series"):
        assert np.allclose(eval_psi(PsiBasisSpec(6, 2), 0, x, method=method), 1.0, atol=1e-15)


@pytest.mark.parametrize("d", [1, 2])
def test_psi_quasi_periodicity(d):
    N = 8
    spec = PsiBasisSpec(N, d)
    x = np.random.default_rng(2).random(50)
    for mu in spec.Lambda_N:
        base = eval_psi(spec, mu, x)
        for n in (1, 3):
            shifted = eval_psi(spec, mu, x + n / N)
            assert np.allclose(shifted, np.exp(2j * np.pi * mu * n / N) * base, atol=1e-12)


def test_psi_value_pi_squared_over_four():
    # partial sums over odd |k| <= 2L-1, Richardson in 1/L removes the leading tail
    def partial(L):
        k = np.arange(1, 2 * L, 2, dtype=float)
        return 2 * np.sum(1 / k[::-1] ** 2)

    L = 4096
    s1, s2, s4 = partial(L), partial(2 * L), partial(4 * L)
    rich = (8 * s4 - 6 * s2 + s1) / 3
    assert rich == pytest.approx(np.pi ** 2 / 4, abs=1e-11)
    spec = PsiBasisSpec(2, 1)
    assert eval_psi(spec, 1, 0.0).real == pytest.approx(rich, abs=1e-11)
    series = eval_psi(spec, 1, 0.0, method="series")
    assert abs(series - rich) <= spec.tail_bound(1)


@pytest.mark.parametrize("N,d", [(8, 1), (9, 2), (6, 3)])
def test_psi_series_matches_spline(N, d):
    spec = PsiBasisSpec(N, d)
    x = np.linspace(0, 1, 31)
    for mu in spec.Lambda_N:
        a = eval_psi(spec, mu, x, method="spline")
        b = eval_psi(spec, mu, x, method="series")
        assert np.max(np.abs(a - b)) <= spec.tail_bound(mu) + 1e-13


def test_psi_out_of_lambda():
    spec = PsiBasisSpec(8, 1)
    with pytest.raises(IndexOutOfLambda):
        eval_psi(spec, -4, 0.1)
    with pytest.raises(IndexOutOfLambda):
        eval_psi(spec, 5, 0.1)
    with pytest.raises(ValueError):
        eval_psi(spec, 1, 0.1, method="bogus")


def test_psi_bspline_roundtrip():
    spec = PsiBasisSpec(10, 2)
    c = np.random.default_rng(4).standard_normal(10) + 0j
    assert np.allclose(spec.from_bspline(spec.to_bspline() @ c), c, atol=1e-12)


# -- hs_projection -----------------------------------------------------------

@pytest.mark.parametrize("s", [0.0, -1.0, -4.0, 1.0])
def test_projection_idempotent(s):
    space = SplineSpace.uniform_mesh(12, 1)
    a = np.random.default_rng(5).standard_normal(12)
    target = space.fourier(a, 200)
    assert np.max(np.abs(hs_projection(target, space, s) - a)) <= 1e-10


@pytest.mark.parametrize("d", [1, 2])
def test_projection_mode_rate(d):
    Ns = [8, 16, 32, 64]
    target = FourierVector.from_modes(1024, {1: 1.0})
    errs = []
    for N in Ns:
        space = SplineSpace.uniform_mesh(N, d)
        a = hs_projection(target, space, 0.0)
        errs.append(sobolev_norm(space.fourier(a, 1024) - target, 0.0))
    assert fitted_slope(Ns, errs) == pytest.approx(-(d + 1), abs=0.3)


def test_projection_negative_order_rate():
    # smooth target, d = 1, s = -4: the error falls like N^{s - (d+1)}
    Ns = [16, 32, 64, 128]
    target = fourier_coefficients(lambda t: np.exp(np.sin(2 * np.pi * t)), 1024)
    errs = []
    for N in Ns:
        space = SplineSpace.uniform_mesh(N, 1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IllConditionedWarning)
            a = hs_projection(target, space, -4.0)
        errs.append(sobolev_norm(space.fourier(a, 1024) - target, -4.0))
    assert fitted_slope(Ns, errs) == pytest.approx(-6.0, abs=0.5)


@pytest.mark.parametrize("t,rate", [(0.0, -1.5), (-1.0, -2.5)])
def test_approximation_property(t, rate):
    # |sin pi(x - t0)| has smoothness 3/2; averaging over kink positions
    # removes the dependence on where the kink falls relative to the mesh
    Ns = [16, 32, 64, 128]
    t0s = np.random.default_rng(1).random(16)
    targets = [kink_target(t0) for t0 in t0s]
    errs = []
    for N in Ns:
        space = SplineSpace.uniform_mesh(N, 1)
        sq = [sobolev_norm(space.fourier(hs_projection(g, space, t), g.K) - g, t) ** 2
              for g in targets]
        errs.append(np.sqrt(np.mean(sq)))
    assert fitted_slope(Ns, errs) == pytest.approx(rate, abs=0.3)


def test_inverse_property():
    rng = np.random.default_rng(11)
    consts = []
    for N in [8, 16, 32, 64, 128]:
        space = SplineSpace.uniform_mesh(N, 1)
        worst = 0.0
        for _ in range(5):
            f = space.fourier(rng.standard_normal(N), 16 * N)
            worst = max(worst, sobolev_norm(f, 0.0) / sobolev_norm(f, -1.0))
        consts.append(worst * space.h)
    assert max(consts) <= 10 * min(consts)


def test_projection_reports_conditioning():
    space = SplineSpace.uniform_mesh(32, 1)
    target = FourierVector.from_modes(256, {3: 1.0})
    with pytest.warns(IllConditionedWarning):
        hs_projection(target, space, -4.0, cond_bound=10.0)
    _, info = hs_projection(target, space, 0.0, return_info=True)
    assert info["band"] == 256 and info["cond"] > 1

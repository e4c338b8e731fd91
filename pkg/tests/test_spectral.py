import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overcoll.basis import SplineSpace, bspline_hat
from overcoll.errors import InsufficientResolution
from overcoll.spectral import FourierVector, duality_pairing, fourier_coefficients, sobolev_norm


def mode(K, m, c=1.0):
    return FourierVector.from_modes(K, {m: c})


def random_vector(seed, K):
    rng = np.random.default_rng(seed)
    return FourierVector(rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1))


def test_single_mode_coefficients():
    f = fourier_coefficients(lambda x: np.exp(2j * np.pi * x), 4)
    expect = np.zeros(9)
    expect[5] = 1.0
    assert np.allclose(f.coeffs, expect, atol=1e-14)


def test_constant_coefficients():
    f = fourier_coefficients(lambda x: np.ones_like(x), 2)
    assert np.allclose(f.coeffs, [0, 0, 1, 0, 0], atol=1e-15)


def test_hat_coefficient_against_closed_form():
    space = SplineSpace.uniform_mesh(4, 1)
    a = np.zeros(4)
    a[0] = 1.0
    # the kink makes the trapezoid rule converge slowly; use many samples
    f = fourier_coefficients(lambda x: space.evaluate(a, x), 4, oversample=4096)
    closed = bspline_hat(4 / 4, 1) / 4
    assert abs(f[4] - closed) < 1e-10
    f2 = fourier_coefficients(lambda x: space.evaluate(a, x), 8, oversample=4096)
    m = np.arange(-8, 9)
    assert np.allclose(f2.coeffs, bspline_hat(m / 4, 1) / 4, atol=1e-10)


def test_oversample_below_two_raises():
    with pytest.raises(InsufficientResolution):
        fourier_coefficients(np.cos, 4, oversample=1.5)


def test_sobolev_norm_examples():
    assert sobolev_norm(mode(3, 0, 3.0), -2.5) == pytest.approx(3.0)
    assert sobolev_norm(mode(3, 2), -1) == pytest.approx(0.5)
    assert sobolev_norm(mode(3, 1), 2) == pytest.approx(1.0)


def test_duality_pairing_examples():
    assert duality_pairing(mode(2, 1), mode(2, 1)) == pytest.approx(1.0)
    assert duality_pairing(mode(2, 1), mode(2, 2)) == 0
    assert duality_pairing(mode(2, 1, 1j), mode(2, 1)) == pytest.approx(-1j)


def test_duality_pairing_truncates_to_common_band():
    f = random_vector(0, 6)
    g = random_vector(1, 3)
    assert duality_pairing(f, g) == pytest.approx(np.vdot(f.rebanded(3).coeffs, g.coeffs))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 40))
def test_parseval(seed, K):
    f = random_vector(seed, K)
    assert sobolev_norm(f, 0) ** 2 == pytest.approx(duality_pairing(f, f).real, rel=1e-13)
    assert abs(duality_pairing(f, f).imag) < 1e-12 * sobolev_norm(f, 0) ** 2


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-4, 4), st.floats(0, 3))
def test_norm_nondecreasing_in_s(seed, s, ds):
    f = random_vector(seed, 12)
    assert sobolev_norm(f, s + ds) >= sobolev_norm(f, s) * (1 - 1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 64))
def test_analysis_inverts_synthesis(seed, K):
    f = random_vector(seed, K)
    g = fourier_coefficients(f.synthesize, K)
    assert np.max(np.abs(g.coeffs - f.coeffs)) < 1e-12 * max(1.0, np.max(np.abs(f.coeffs))) * K


def test_samples_agree_with_synthesis():
    f = random_vector(5, 10)
    for Q in (8, 21, 64):
        assert np.allclose(f.samples(Q), f.synthesize(np.arange(Q) / Q), atol=1e-12)


def test_real_valued_flag_checked():
    c = np.array([1.0, 2.0, 1.0], dtype=complex)
    FourierVector(c, real_valued=True)
    with pytest.raises(ValueError):
        FourierVector(np.array([1.0, 2.0, 3.0j]), real_valued=True)


def test_even_length_rejected():
    with pytest.raises(ValueError):
        FourierVector(np.zeros(4))


def test_indexing_outside_band_is_zero():
    f = mode(3, -2, 5.0)
    assert f[-2] == 5.0 and f[7] == 0
    assert np.allclose(f[np.array([-2, 0, 9])], [5.0, 0, 0])


def test_arithmetic_aligns_bands():
    f = mode(2, 1) + mode(5, 4)
    assert f.K == 5 and f[1] == 1 and f[4] == 1
    assert (2 * f - f)[4] == 1

import numpy as np
import pytest
from scipy.special import hankel1, jv

from overcoll.basis import SplineSpace
from overcoll.errors import CoincidentPoints, PointTooCloseToBoundary
from overcoll.geometry import Circle, Kite, pentagon
from overcoll.operators import (BoundaryKernel, OperatorSpec, apply_pseudodiff, apply_to_function,
                                boundary_apply, circle_symbol, field_eval, field_matrix,
                                field_of_function, greens_kernel, layer_matrix)
from overcoll.oracle import circle_reference, circle_single_layer_field, plane_wave_trace
from overcoll.spectral import FourierVector, sobolev_norm

SL = OperatorSpec("single_layer", k=4.2)
DL_EXT = OperatorSpec("double_layer", k=3.0, side="exterior")
DL_INT = OperatorSpec("double_layer", k=5.0, side="interior")


def _dyadic(levels, h):
    return h * 0.5 ** np.arange(levels, 0, -1)


def brute_force(kernel, s, g, panels=4000, n=8, levels=40, corners=()):
    """int_0^1 kernel(s, t) g(t) dt by plain composite Gauss-Legendre over
    t = s + off, off in [-1/2, 1/2].  No kernel splitting: panels touching
    off = 0 (and any corner) are cut dyadically instead."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = (x + 1) / 2
    w = w / 2
    h = 1.0 / panels
    right = np.concatenate([_dyadic(levels, h), h * np.arange(1, panels // 2 + 1)])
    ends = [-right[::-1], [0.0], right]
    for c in corners:
        oc = (c - s + 0.5) % 1.0 - 0.5
        ends += [oc + _dyadic(levels, h), [oc], oc - _dyadic(levels, h)]
    ends = np.unique(np.clip(np.concatenate(ends), -0.5, 0.5))
    lo, wid = ends[:-1], np.diff(ends)
    off = (lo[:, None] + wid[:, None] * x).ravel()
    wt = (wid[:, None] * w).ravel()
    # t stays unwrapped so that t and diff = s - t agree
    t = s + off
    return np.sum(kernel(s, t, -off) * wt * g(t))


def spline_density(space, coeffs):
    return lambda t: space.evaluate(coeffs, t)


# -- model operator ------------------------------------------------------------

def test_pseudodiff_examples():
    const = FourierVector.from_modes(4, {0: 2.5})
    for ta in (-1.0, 0.5, -3.0):
        assert np.allclose(apply_pseudodiff(const, ta).coeffs, const.coeffs)
    one = FourierVector.from_modes(4, {1: 1.0})
    assert np.allclose(apply_pseudodiff(one, -1.0).coeffs, one.coeffs)
    two = FourierVector.from_modes(4, {2: 1.0, -2: 1.0})
    assert np.allclose(apply_pseudodiff(two, -1.0).coeffs, 0.5 * two.coeffs)


@pytest.mark.parametrize("m", [-7, -1, 1, 3, 40])
@pytest.mark.parametrize("two_alpha", [-1.0, -2.0, 1.0])
def test_pseudodiff_isometry(m, two_alpha):
    f = FourierVector.from_modes(64, {m: 1.3 - 0.2j})
    a = two_alpha / 2
    for s in (-2.0, 0.0, 0.5):
        assert sobolev_norm(apply_pseudodiff(f, two_alpha), s - a) == pytest.approx(
            sobolev_norm(f, s + a), rel=1e-13)


@pytest.mark.parametrize("two_alpha", [-1.0, -2.0])
@pytest.mark.parametrize("m", [0, 1, 5, -12])
def test_real_space_kernels_match_symbol(two_alpha, m):
    spec = OperatorSpec("pseudodiff", two_alpha=two_alpha)
    x = np.array([0.0, 0.137, 0.5, 0.91])
    g = lambda t: np.exp(2j * np.pi * m * t)
    got = apply_to_function(spec, None, g, x)
    want = apply_pseudodiff(FourierVector.from_modes(abs(m) + 1, {m: 1.0}), two_alpha).synthesize(x)
    assert np.max(np.abs(got - want)) <= 1e-12


def test_model_layer_matrix_routes_agree():
    # order -1: real-space log kernel vs Fourier synthesis on a wide band
    space = SplineSpace.uniform_mesh(12, 1)
    x = np.random.default_rng(0).random(9)
    real = layer_matrix(OperatorSpec("model", two_alpha=-1.0), None, space, x)
    spec_near = OperatorSpec("model", two_alpha=-1.0)
    K = 8192
    F = space.fourier_matrix(K) * np.where(np.arange(-K, K + 1) == 0, 1.0,
                                           1.0 / np.maximum(np.abs(np.arange(-K, K + 1)), 1))[:, None]
    spectral = np.exp(2j * np.pi * np.outer(x, np.arange(-K, K + 1))) @ F
    assert spec_near.two_alpha == -1.0
    assert np.max(np.abs(real - spectral)) <= 1e-7


# -- Green's function ------------------------------------------------------------

def test_greens_kernel_table_value():
    spec = OperatorSpec("single_layer", k=1.0)
    G = greens_kernel(spec, np.array([1.0, 0.0]), np.array([0.0, 0.0]))
    J0, Y0 = 0.7651976866, 0.0882569642   # standard tables
    assert G.real == pytest.approx(-Y0 / 4, abs=1e-10)
    assert G.imag == pytest.approx(J0 / 4, abs=1e-10)


def test_greens_kernel_log_singularity():
    k = 2.0
    spec = OperatorSpec("single_layer", k=k)
    limit = 0.25j - (np.log(k / 2) + np.euler_gamma) / (2 * np.pi)
    prev = None
    for r in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]:
        v = greens_kernel(spec, np.array([r, 0.0]), np.zeros(2)) + np.log(r) / (2 * np.pi)
        assert abs(v - limit) <= 2 * r ** 2 * abs(np.log(r)) + 1e-12
        if prev is not None:
            assert abs(v - limit) <= abs(prev - limit) + 1e-15
        prev = v


def test_greens_kernel_errors():
    with pytest.raises(CoincidentPoints):
        greens_kernel(SL, np.zeros(2), np.zeros(2))
    with pytest.raises(ValueError):
        greens_kernel(DL_EXT, np.ones(2), np.zeros(2))
    with pytest.raises(ValueError):
        greens_kernel(OperatorSpec("model", two_alpha=-1), np.ones(2), np.zeros(2))


def test_double_layer_kernel_on_straight_edge():
    curve = pentagon()
    kern = BoundaryKernel(DL_EXT, curve)
    c = curve.corners
    a, b = c[0], c[1]
    s = a + 0.5 * (b - a)
    for eps in [1e-2, 1e-4, 1e-6, 1e-8]:
        # same edge: x - y is parallel to the edge, so the kernel vanishes
        assert abs(kern(s, s + eps * (b - a), -eps * (b - a))) <= 1e-12


def test_double_layer_normal_derivative():
    # dG/dn_y against a centred finite difference in y
    spec = OperatorSpec("double_layer", k=2.5)
    x = np.array([0.4, -0.3])
    y = np.array([1.1, 0.7])
    n = np.array([0.6, 0.8])
    single = OperatorSpec("single_layer", k=2.5)
    h = 1e-5
    fd = (greens_kernel(single, x, y + h * n) - greens_kernel(single, x, y - h * n)) / (2 * h)
    assert greens_kernel(spec, x, y, n) == pytest.approx(fd, rel=1e-8)


def test_operator_spec_validation():
    assert SL.two_alpha == -1.0 and DL_EXT.two_alpha == 0.0
    with pytest.raises(ValueError):
        OperatorSpec("single_layer", k=1.0, two_alpha=0.0)
    with pytest.raises(ValueError):
        OperatorSpec("single_layer", k=0.0)
    with pytest.raises(ValueError):
        OperatorSpec("pseudodiff")
    with pytest.raises(ValueError):
        OperatorSpec("hypersingular", k=1.0)
    assert OperatorSpec("HelmholtzDoubleLayerPlusHalfIdentity", k=1.0).kind == "double_layer"
    assert DL_INT.normal_sign == -1.0


# -- circle symbol -----------------------------------------------------------------

@pytest.mark.parametrize("spec", [SL, DL_EXT, DL_INT], ids=["SL", "DLext", "DLint"])
def test_circle_symbol_symmetry(spec):
    m = np.arange(1, 80)
    assert np.allclose(circle_symbol(spec, m), circle_symbol(spec, -m), rtol=1e-14, atol=0)


@pytest.mark.parametrize("spec", [SL, DL_EXT, DL_INT], ids=["SL", "DLext", "DLint"])
@pytest.mark.parametrize("m", [0, 1, 4, 9])
def test_circle_symbol_against_dense_quadrature(spec, m):
    for radius in (1.0, 0.7):
        curve = Circle(radius)
        kern = BoundaryKernel(spec, curve)
        s = 0.21
        g = lambda t: np.exp(2j * np.pi * m * t)
        want = brute_force(kern, s, g) / g(s)
        if spec.kind == "double_layer":
            want += 0.5
        assert circle_symbol(spec, m, radius) == pytest.approx(want, abs=1e-8)


def test_circle_symbol_single_layer_decay():
    lam = lambda m: abs(circle_symbol(SL, m))
    for m in (32, 64, 200):
        assert lam(2 * m) / lam(m) == pytest.approx(0.5, rel=0.05)


def test_circle_symbol_large_orders_finite():
    m = np.array([500, 2000, 10000])
    for spec in (SL, DL_EXT):
        v = circle_symbol(spec, m)
        assert np.all(np.isfinite(v))
    assert np.allclose(circle_symbol(SL, m) * 2 * m, 1.0, rtol=1e-3)


# -- boundary_apply ----------------------------------------------------------------

@pytest.mark.parametrize("spec", [SL, DL_EXT, DL_INT], ids=["SL", "DLext", "DLint"])
def test_boundary_apply_circle_modes(spec):
    curve = Circle(1.0)
    x = np.array([0.0, 0.3, 0.77])
    for m in (0, 2, -5):
        g = lambda t: np.exp(2j * np.pi * m * t)
        got = apply_to_function(spec, curve, g, x)
        assert np.allclose(got, circle_symbol(spec, m) * g(x), atol=1e-8, rtol=0)


@pytest.mark.parametrize("spec,curve", [(SL, Kite()), (DL_INT, Kite()), (SL, Circle(1.3)),
                                        (OperatorSpec("double_layer", k=10.0), pentagon()),
                                        (OperatorSpec("single_layer", k=10.0), pentagon())],
                         ids=["SL-kite", "DL-kite", "SL-circle", "DL-pentagon", "SL-pentagon"])
def test_boundary_apply_against_brute_force(spec, curve):
    rng = np.random.default_rng(3)
    kern = BoundaryKernel(spec, curve)
    space = SplineSpace.uniform_mesh(10, 2)
    for _ in range(20 if curve.smooth else 6):
        coeffs = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        s = rng.random()
        if len(curve.corners) and np.min(np.abs(curve.corners - s)) < 0.02:
            s += 0.05
        got = boundary_apply(spec, curve, space, coeffs, np.array([s]), check=False)[0]
        g = spline_density(space, coeffs)
        want = brute_force(kern, s, g, corners=curve.corners)
        if spec.kind == "double_layer":
            want += 0.5 * g(np.array(s))
        assert abs(got - want) <= 1e-6 * max(1.0, abs(want))


def test_boundary_apply_is_linear():
    curve = Kite()
    space = SplineSpace.uniform_mesh(8, 1)
    rng = np.random.default_rng(2)
    a, b = rng.standard_normal(8), rng.standard_normal(8) * 1j
    x = rng.random(5)
    va = boundary_apply(DL_INT, curve, space, a, x)
    vb = boundary_apply(DL_INT, curve, space, b, x)
    vab = boundary_apply(DL_INT, curve, space, 2 * a - 3 * b, x)
    assert np.max(np.abs(vab - (2 * va - 3 * vb))) <= 1e-12 * np.max(np.abs(vab))


def test_boundary_apply_model_operator():
    spec = OperatorSpec("pseudodiff", two_alpha=-1.0)
    space = SplineSpace.uniform_mesh(8, 1)
    a = np.random.default_rng(5).standard_normal(8)
    x = np.array([0.05, 0.5])
    got = boundary_apply(spec, None, space, a, x)
    assert np.allclose(got, layer_matrix(spec, None, space, x) @ a, atol=1e-12)


def test_laplace_like_double_layer_constant():
    # small k: (1/2) I + D on the constant tends to the Gauss value 1 from the interior side
    spec = OperatorSpec("double_layer", k=1e-4, side="interior")
    v = apply_to_function(spec, Kite(), lambda t: np.ones_like(t), np.array([0.1, 0.4, 0.8]))
    assert np.allclose(v, 1.0, atol=1e-6)
    ext = OperatorSpec("double_layer", k=1e-4, side="exterior")
    v = apply_to_function(ext, Kite(), lambda t: np.ones_like(t), np.array([0.1, 0.4, 0.8]))
    assert np.allclose(v, 0.0, atol=1e-6)


# -- field evaluation ----------------------------------------------------------------

def test_zero_density_field():
    space = SplineSpace.uniform_mesh(8, 1)
    assert field_eval(SL, Kite(), space, np.zeros(8), np.array([3.0, 0.0])) == 0


def test_field_standoff():
    space = SplineSpace.uniform_mesh(8, 1)
    with pytest.raises(PointTooCloseToBoundary):
        field_matrix(SL, Circle(1.0), space, np.array([[1.05, 0.0]]))


def test_circle_field_against_bessel_series():
    curve = Circle(1.0)
    data = plane_wave_trace(SL.k, 1.0, 0.0)
    u = circle_reference(SL, 1.0, data)
    for p in ([0.3, 0.0], [2.0, 1.0], [-0.4, 0.5]):
        want = circle_single_layer_field(SL, 1.0, u, p)
        got = field_of_function(SL, curve, u.synthesize, np.array(p))
        assert abs(got - want) <= 1e-10 * max(1.0, abs(want))
    # inside, the single layer field reproduces the incident plane wave
    assert circle_single_layer_field(SL, 1.0, u, [0.3, 0.0]) == pytest.approx(np.exp(1j * SL.k * 0.3),
                                                                               abs=1e-10)


def test_circle_field_of_spline_density():
    from overcoll.basis import hs_projection
    data = plane_wave_trace(SL.k, 1.0, 0.0)
    u = circle_reference(SL, 1.0, data).rebanded(512)
    space = SplineSpace.uniform_mesh(128, 3)
    coeffs = hs_projection(u, space, 0.0)
    got = field_eval(SL, Circle(1.0), space, coeffs, np.array([0.3, 0.0]))
    assert abs(got - np.exp(1j * SL.k * 0.3)) <= 1e-6


def test_bessel_field_single_mode():
    # one mode: (i pi R / 2) J_m(k rho) H_m(k R) e^{i m theta} inside
    u = FourierVector.from_modes(3, {3: 1.0})
    p = np.array([0.2, 0.3])
    rho, th = np.hypot(*p), np.arctan2(p[1], p[0])
    want = 0.5j * np.pi * jv(3, SL.k * rho) * hankel1(3, SL.k) * np.exp(3j * th)
    assert circle_single_layer_field(SL, 1.0, u, p) == pytest.approx(want, rel=1e-13)

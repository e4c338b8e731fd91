"""Helmholtz layer operators, the model pseudo-differential operator and
field evaluation.

Kernels for boundary integrals are written as functions of parameter pairs
(s, t) and include the speed |z'(t)|, so that
(V g)(z(s)) = int_0^1 kernel(s, t) g(t) dt.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import j0, j1, jv, jvp, y0, y1, yv, yvp

from .basis import SplineSpace
from .errors import CoincidentPoints, PointTooCloseToBoundary, QuadratureNotConverged
from .geometry import BoundaryCurve
from .quadrature import Density, PanelIntegrator, gauss_legendre, offcurve_nodes
from .spectral import FourierVector

SINGLE_LAYER = "single_layer"
DOUBLE_LAYER = "double_layer"        # (1/2) I + D
PSEUDODIFF = "pseudodiff"

_ALIASES = {
    "single_layer": SINGLE_LAYER, "helmholtzsinglelayer": SINGLE_LAYER, "sl": SINGLE_LAYER,
    "double_layer": DOUBLE_LAYER, "helmholtzdoublelayerplushalfidentity": DOUBLE_LAYER,
    "dl": DOUBLE_LAYER,
    "pseudodiff": PSEUDODIFF, "pseudodifferential": PSEUDODIFF, "model": PSEUDODIFF,
}


@dataclass(frozen=True)
class OperatorSpec:
    """Operator choice.

    ``side`` says where the field lives: "exterior" or "interior".  The double
    layer normal points into that region, which makes (1/2) I + D the
    boundary limit of the double layer field from that side.
    """

    kind: str
    k: float = 0.0
    two_alpha: float | None = None
    side: str = "exterior"

    def __post_init__(self):
        kind = _ALIASES.get(str(self.kind).lower().replace("-", "_").replace(" ", ""))
        if kind is None:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        expected = {SINGLE_LAYER: -1.0, DOUBLE_LAYER: 0.0}.get(kind)
        if expected is not None:
            if self.two_alpha is None:
                object.__setattr__(self, "two_alpha", expected)
            elif float(self.two_alpha) != expected:
                raise ValueError(f"{kind} has order 2*alpha = {expected}, got {self.two_alpha}")
            if not self.k > 0:
                raise ValueError("wavenumber must be positive for Helmholtz operators")
        elif self.two_alpha is None:
            raise ValueError("two_alpha is required for the pseudo-differential operator")
        object.__setattr__(self, "two_alpha", float(self.two_alpha))
        if self.side not in ("exterior", "interior"):
            raise ValueError("side must be 'exterior' or 'interior'")

    @property
    def helmholtz(self):
        return self.kind != PSEUDODIFF

    @property
    def normal_sign(self):
        return 1.0 if self.side == "exterior" else -1.0

    def describe(self):
        return {"kind": self.kind, "k": self.k, "two_alpha": self.two_alpha, "side": self.side}


def bracket(m):
    """[m] = 1 for m = 0 and |m| otherwise."""
    m = np.abs(np.asarray(m, dtype=float))
    return np.where(m == 0, 1.0, m)


def pseudodiff_symbol(m, two_alpha):
    m = np.asarray(m)
    return np.where(m == 0, 1.0, bracket(m) ** two_alpha)


def apply_pseudodiff(f: FourierVector, two_alpha) -> FourierVector:
    return FourierVector(f.coeffs * pseudodiff_symbol(f.modes, two_alpha))


def _h0(x):
    return j0(x) + 1j * y0(x)


def _h1(x):
    return j1(x) + 1j * y1(x)


def greens_kernel(spec: OperatorSpec, x, y, n_y=None):
    """G(x, y) = (i/4) H0(k|x-y|) or its normal derivative dG/dn_y.

    ``n_y`` is the unit normal at y (needed for the double layer).
    """
    if not spec.helmholtz:
        raise ValueError("greens_kernel needs a Helmholtz operator")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    r = np.hypot(diff[..., 0], diff[..., 1])
    if np.any(r == 0):
        raise CoincidentPoints("x and y coincide")
    kr = spec.k * r
    if spec.kind == SINGLE_LAYER:
        return 0.25j * _h0(kr)
    if n_y is None:
        raise ValueError("double layer kernel needs the normal at y")
    n_y = np.asarray(n_y, dtype=float)
    return 0.25j * spec.k * _h1(kr) * np.sum(diff * n_y, axis=-1) / r


class BoundaryKernel:
    """kernel(s, t) for a Helmholtz operator on a curve (speed included)."""

    def __init__(self, spec: OperatorSpec, curve: BoundaryCurve):
        self.spec = spec
        self.curve = curve

    def __call__(self, s, t, diff=None):
        c = self.curve.chord(s, t, diff)
        r = np.hypot(c[..., 0], c[..., 1])
        kr = self.spec.k * r
        if self.spec.kind == SINGLE_LAYER:
            return 0.25j * _h0(kr) * self.curve.speed(t)
        dz = self.curve.deriv(t)
        # outward normal times speed is (y', -x')
        cn = (c[..., 0] * dz[..., 1] - c[..., 1] * dz[..., 0]) * self.spec.normal_sign
        return 0.25j * self.spec.k * _h1(kr) * cn / r


class LogKernel:
    """1 - log(4 sin^2(pi (s - t))): the model operator of order -1."""

    def __call__(self, s, t, diff=None):
        d = s - t if diff is None else diff
        return 1.0 - np.log(4.0 * np.sin(np.pi * d) ** 2)


class BernoulliKernel:
    """1 + 2 pi^2 B_2({s - t}): the model operator of order -2."""

    def __call__(self, s, t, diff=None):
        x = np.mod(s - t if diff is None else diff, 1.0)
        return 1.0 + 2.0 * np.pi ** 2 * (x * x - x + 1.0 / 6.0)


_REAL_SPACE = {-1.0: LogKernel, -2.0: BernoulliKernel}


def _integrator(spec, curve, space, n=16, max_width=1 / 64):
    breaks = [] if curve is None or not spec.helmholtz else list(curve.corners)
    if space is not None:
        breaks += list(space.breaks)
    if spec.helmholtz:
        # keep panels short compared with the wavelength
        sp = curve.perimeter()
        max_width = min(max_width, 2.0 / max(spec.k * sp, 1.0))
    return PanelIntegrator(breaks, n=n, max_width=max_width)


def layer_matrix(spec: OperatorSpec, curve, space: SplineSpace, x, n=16, band=None):
    """G[i, n] = (V phi_n)(z(x_i)).

    The model operator uses its real-space kernel for orders -1 and -2, the
    identity for order 0, and Fourier synthesis on ``band`` (default 8N)
    otherwise.
    """
    x = np.asarray(x, dtype=float).ravel()
    if spec.helmholtz:
        G = _integrator(spec, curve, space, n=n).apply(BoundaryKernel(spec, curve), x,
                                                       Density.spline(space))
        if spec.kind == DOUBLE_LAYER:
            G += 0.5 * space.matrix(x)
        return G
    ta = spec.two_alpha
    if ta == 0.0:
        return space.matrix(x).astype(complex)
    if ta in _REAL_SPACE:
        return _integrator(spec, None, space, n=n).apply(_REAL_SPACE[ta](), x, Density.spline(space))
    K = 8 * space.N if band is None else int(band)
    F = space.fourier_matrix(K) * pseudodiff_symbol(np.arange(-K, K + 1), ta)[:, None]
    E = np.exp(2j * np.pi * np.outer(x, np.arange(-K, K + 1)))
    return E @ F


def apply_to_function(spec: OperatorSpec, curve, g, x, breaks=(), n=16, band=None):
    """(V g)(z(x)) for a callable density g on [0, 1)."""
    x = np.asarray(x, dtype=float).ravel()
    if spec.helmholtz:
        integ = _integrator(spec, curve, None, n=n)
        if len(breaks):
            integ = PanelIntegrator(np.concatenate([integ.lo, list(breaks)]), n=n,
                                    max_width=integ.hi[0] - integ.lo[0] + 1e-15)
        v = integ.apply(BoundaryKernel(spec, curve), x, Density.function(g))[:, 0]
        if spec.kind == DOUBLE_LAYER:
            v = v + 0.5 * np.asarray(g(x), dtype=complex)
        return v
    ta = spec.two_alpha
    if ta == 0.0:
        return np.asarray(g(x), dtype=complex)
    if ta in _REAL_SPACE:
        integ = PanelIntegrator(list(breaks), n=n)
        return integ.apply(_REAL_SPACE[ta](), x, Density.function(g))[:, 0]
    from .spectral import fourier_coefficients
    K = 256 if band is None else int(band)
    return apply_pseudodiff(fourier_coefficients(g, K, 4), ta).synthesize(x)


def boundary_apply(spec: OperatorSpec, curve, space: SplineSpace, coeffs, x, tol=1e-10,
                   check=True, n=16):
    """(V u)(z(x)) for the spline u = sum coeffs[n] phi_n.

    With ``check`` the result is recomputed with a higher-order rule and
    QuadratureNotConverged is raised when the two differ by more than ``tol``
    (relative to the largest value).
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    v = layer_matrix(spec, curve, space, x, n=n) @ coeffs
    if check and (spec.helmholtz or spec.two_alpha in _REAL_SPACE):
        v2 = layer_matrix(spec, curve, space, x, n=n + 8) @ coeffs
        err = np.abs(v - v2)
        scale = max(np.max(np.abs(v2)), 1e-300)
        if np.max(err) > tol * scale:
            i = int(np.argmax(err))
            raise QuadratureNotConverged(
                f"quadrature difference {err[i] / scale:.2e} at x={np.ravel(x)[i]}", location=i)
        v = v2
    return v


def _bessel_products(n, x):
    """J_n^2, J_n Y_n, J_n J_n' and J_n Y_n' + J_n' Y_n for integer n >= 0.

    Orders up to about x use scipy directly.  Above that the products come
    from the ratios r_n = J_n / J_{n-1} (backward continued fraction) and
    s_n = Y_n / Y_{n-1} (forward recurrence) with the Wronskian
    J_{n+1} Y_n - J_n Y_{n+1} = 2 / (pi x), so nothing over- or underflows.
    """
    n = np.asarray(n, dtype=np.int64)
    n0 = int(x) + 8
    jj = np.zeros(n.shape)
    jy = np.zeros(n.shape)
    jjp = np.zeros(n.shape)
    cross = np.zeros(n.shape)
    low = n < n0
    if np.any(low):
        nl = n[low]
        J, Y, Jp, Yp = jv(nl, x), yv(nl, x), jvp(nl, x), yvp(nl, x)
        jj[low], jy[low], jjp[low], cross[low] = J * J, J * Y, J * Jp, J * Yp + Jp * Y
    if np.any(~low):
        top = int(n.max())
        # s[j] = Y_j / Y_{j-1} for j = n0 .. top + 1
        s = np.empty(top + 2 - n0 + 1)
        s[0] = yv(n0, x) / yv(n0 - 1, x)
        for i in range(1, len(s)):
            j = n0 + i - 1
            s[i] = 2.0 * j / x - 1.0 / s[i - 1]
        # r[j] = J_j / J_{j-1} for j = n0 .. top + 1, from far above
        extra = 40 + int(2 * x)
        r = np.empty(top + 2 - n0 + 1)
        cur = 0.0
        for j in range(top + 1 + extra, n0 - 1, -1):
            cur = 1.0 / (2.0 * j / x - cur)
            if j <= top + 1:
                r[j - n0] = cur
        nh = n[~low]
        i = nh - n0
        p = 2.0 / (np.pi * x * (r[i + 1] - s[i + 1]))
        jy[~low] = p
        cross[~low] = p * (1.0 / s[i] - r[i + 1])
        # J_n^2 and J_n J_n' are far below J_n Y_n here; both underflow harmlessly
        J = jv(nh, x)
        jj[~low] = J * J
        jjp[~low] = J * J * (nh / x - r[i + 1])
    return jj, jy, jjp, cross


def circle_symbol(spec: OperatorSpec, m, radius=1.0):
    """Eigenvalue of the operator on the Fourier mode m over a circle.

    Single layer: (i pi R / 2) J_m(kR) H_m(kR).  Double layer formulation:
    1/2 +- (i pi k R / 4)(J_m H_m' + J_m' H_m), sign + for the exterior side.
    The model operator returns [m]^{2 alpha}.
    """
    m = np.asarray(m)
    if not spec.helmholtz:
        return pseudodiff_symbol(m, spec.two_alpha).astype(complex)
    kr = spec.k * radius
    jj, jy, jjp, cross = _bessel_products(np.abs(m), kr)
    if spec.kind == SINGLE_LAYER:
        return 0.5j * np.pi * radius * (jj + 1j * jy)
    d = 0.25j * np.pi * kr * (2.0 * jjp + 1j * cross)
    return 0.5 + spec.normal_sign * d


def field_matrix(spec: OperatorSpec, curve, space, points, standoff=0.1, n=16, max_width=1 / 64):
    """Rows: field evaluation functionals at ``points`` for each basis function.

    The field is the single layer potential for the single layer operator and
    the double layer potential (normal toward ``spec.side``) otherwise.
    """
    if not spec.helmholtz:
        raise ValueError("field evaluation needs a Helmholtz operator")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rows = []
    for p in pts:
        dist = curve.distance(p)
        if dist < standoff:
            raise PointTooCloseToBoundary(f"point {p.tolist()} is {dist:.3g} from the boundary")
        t, w = offcurve_nodes(curve, list(curve.corners) + list(space.breaks), dist, n=n,
                              max_width=max_width)
        kv = _field_kernel(spec, curve, p, t) * w
        rows.append(kv @ space.matrix(t))
    return np.array(rows)


def _field_kernel(spec, curve, p, t):
    z = curve.point(t)
    diff = p - z
    r = np.hypot(diff[..., 0], diff[..., 1])
    kr = spec.k * r
    if spec.kind == SINGLE_LAYER:
        return 0.25j * _h0(kr) * curve.speed(t)
    dz = curve.deriv(t)
    cn = (diff[..., 0] * dz[..., 1] - diff[..., 1] * dz[..., 0]) * spec.normal_sign
    return 0.25j * spec.k * _h1(kr) * cn / r


def field_eval(spec: OperatorSpec, curve, space, coeffs, x, standoff=0.1):
    """Field of the spline density at the point(s) x (off the boundary)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    v = field_matrix(spec, curve, space, x, standoff=standoff) @ np.asarray(coeffs, dtype=complex)
    return complex(v[0]) if single else v


def field_of_function(spec: OperatorSpec, curve, g, x, standoff=0.1, n=16, max_width=1 / 64):
    """Field of an arbitrary callable density g(t)."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    out = []
    for p in pts:
        dist = curve.distance(p)
        if dist < standoff:
            raise PointTooCloseToBoundary(f"point {p.tolist()} is {dist:.3g} from the boundary")
        t, w = offcurve_nodes(curve, curve.corners, dist, n=n, max_width=max_width)
        out.append(np.sum(_field_kernel(spec, curve, p, t) * w * g(t)))
    out = np.array(out)
    return complex(out[0]) if np.asarray(x).ndim == 1 else out


__all__ = [
    "OperatorSpec", "SINGLE_LAYER", "DOUBLE_LAYER", "PSEUDODIFF", "apply_pseudodiff",
    "greens_kernel", "boundary_apply", "layer_matrix", "apply_to_function", "circle_symbol",
    "field_eval", "field_matrix", "field_of_function", "bracket", "pseudodiff_symbol",
    "gauss_legendre",
]

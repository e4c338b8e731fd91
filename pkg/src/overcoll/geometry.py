"""Closed boundary curves parametrized over the periodic parameter domain [0, 1).

All curves run counterclockwise, so ``normal`` (rotate the tangent clockwise)
is the outward unit normal.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CornerParameter

TWO_PI = 2.0 * np.pi


def _xy(x, y):
    return np.stack(np.broadcast_arrays(x, y), axis=-1)


class BoundaryCurve:
    """Base class.  Subclasses implement ``point``, ``deriv`` and optionally ``chord``."""

    kind = "custom"
    smooth = True

    @property
    def corners(self) -> np.ndarray:
        return np.empty(0)

    def point(self, t):
        raise NotImplementedError

    def deriv(self, t):
        raise NotImplementedError

    def speed(self, t):
        d = self.deriv(t)
        return np.hypot(d[..., 0], d[..., 1])

    def normal(self, t):
        d = self.deriv(t)
        sp = np.hypot(d[..., 0], d[..., 1])
        return _xy(d[..., 1] / sp, -d[..., 0] / sp)

    def chord(self, s, t, diff=None):
        """z(s) - z(t).  Subclasses override this with a cancellation-free form
        that uses ``diff`` = s - t when the caller knows it more accurately
        than the rounded parameters do."""
        return self.point(s) - self.point(t)

    def perimeter(self, n=4096):
        # Gauss-Legendre per smooth piece
        from .quadrature import gauss_legendre
        breaks = np.unique(np.concatenate([[0.0, 1.0], self.corners]))
        x, w = gauss_legendre(32)
        total = 0.0
        for a, b in zip(breaks[:-1], breaks[1:]):
            edges = np.linspace(a, b, max(2, int(np.ceil((b - a) * n / 32)) + 1))
            for lo, hi in zip(edges[:-1], edges[1:]):
                total += (hi - lo) * np.dot(w, self.speed(lo + (hi - lo) * x))
        return float(total)

    def polyline(self, n=4096):
        t = np.arange(n) / n
        if len(self.corners):
            t = np.unique(np.concatenate([t, self.corners]))
        return self.point(t), t

    def contains(self, p) -> bool:
        """Even-odd test against a fine polyline."""
        pts, _ = self.polyline()
        x, y = float(p[0]), float(p[1])
        xa, ya = pts[:, 0], pts[:, 1]
        xb, yb = np.roll(xa, -1), np.roll(ya, -1)
        cross = (ya > y) != (yb > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = xa + (y - ya) * (xb - xa) / (yb - ya)
        return bool(np.count_nonzero(cross & (x < xi)) % 2)

    def distance(self, p) -> float:
        pts, t = self.polyline()
        p = np.asarray(p, dtype=float)
        d2 = np.sum((pts - p) ** 2, axis=1)
        i = int(np.argmin(d2))
        h = 1.0 / len(t)

        def f(s):
            q = self.point(np.array([s % 1.0]))[0]
            return float(np.sum((q - p) ** 2))

        res = minimize_scalar(f, bounds=(t[i] - 2 * h, t[i] + 2 * h), method="bounded",
                              options={"xatol": 1e-13})
        return float(np.sqrt(min(res.fun, d2[i])))

    def describe(self) -> dict:
        return {"kind": self.kind}


class Circle(BoundaryCurve):
    kind = "circle"

    def __init__(self, radius=1.0, center=(0.0, 0.0)):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)

    def point(self, t):
        a = TWO_PI * np.asarray(t, dtype=float)
        return _xy(self.center[0] + self.radius * np.cos(a), self.center[1] + self.radius * np.sin(a))

    def deriv(self, t):
        a = TWO_PI * np.asarray(t, dtype=float)
        r = TWO_PI * self.radius
        return _xy(-r * np.sin(a), r * np.cos(a))

    def chord(self, s, t, diff=None):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        sig = np.pi * (s + t)
        sd = np.sin(np.pi * (s - t if diff is None else diff))
        return _xy(-2 * self.radius * np.sin(sig) * sd, 2 * self.radius * np.cos(sig) * sd)

    def contains(self, p):
        return bool(np.hypot(*(np.asarray(p, float) - self.center)) < self.radius)

    def distance(self, p):
        return float(abs(np.hypot(*(np.asarray(p, float) - self.center)) - self.radius))

    def perimeter(self, n=None):
        return TWO_PI * self.radius

    def describe(self):
        return {"kind": self.kind, "radius": self.radius, "center": self.center.tolist()}


class Kite(BoundaryCurve):
    """z(t) = (-sin 2pi t - cos 4pi t, cos 2pi t)."""

    kind = "kite"

    def point(self, t):
        a = TWO_PI * np.asarray(t, dtype=float)
        return _xy(-np.sin(a) - np.cos(2 * a), np.cos(a))

    def deriv(self, t):
        a = TWO_PI * np.asarray(t, dtype=float)
        return _xy(TWO_PI * (-np.cos(a) + 2 * np.sin(2 * a)), -TWO_PI * np.sin(a))

    def chord(self, s, t, diff=None):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        delta = np.pi * (s - t if diff is None else diff)
        half_sum = np.pi * (s + t)
        sd = np.sin(delta)
        dx = -2 * np.cos(half_sum) * sd + 2 * np.sin(2 * half_sum) * np.sin(2 * delta)
        dy = -2 * np.sin(half_sum) * sd
        return _xy(dx, dy)


class Polygon(BoundaryCurve):
    """Piecewise linear closed curve through ``vertices``.

    Edge ``j`` is traversed at constant speed for parameters in
    ``[breaks[j], breaks[j+1])``.  Default breaks are equally spaced.
    """

    kind = "polygon"
    smooth = False

    def __init__(self, vertices, breaks=None):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("need at least three 2D vertices")
        n = len(v)
        if breaks is None:
            breaks = np.arange(n + 1) / n
        breaks = np.asarray(breaks, dtype=float)
        if len(breaks) != n + 1 or breaks[0] != 0.0 or breaks[-1] != 1.0 or np.any(np.diff(breaks) <= 0):
            raise ValueError("breaks must increase from 0 to 1 with one entry per vertex plus one")
        area2 = np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        if area2 <= 0:
            raise ValueError("vertices must be ordered counterclockwise")
        self.vertices = v
        self.breaks = breaks
        self._edges = np.roll(v, -1, axis=0) - v
        self._rates = self._edges / np.diff(breaks)[:, None]

    @property
    def corners(self):
        return self.breaks[:-1].copy()

    def _edge(self, t):
        t = np.asarray(t, dtype=float)
        turns = np.floor(t)
        tt = t - turns
        j = np.searchsorted(self.breaks, tt, side="right") - 1
        j = np.clip(j, 0, len(self.vertices) - 1)
        return j, tt, turns

    def point(self, t):
        j, tt, _ = self._edge(t)
        return self.vertices[j] + (tt - self.breaks[j])[..., None] * self._rates[j]

    def deriv(self, t):
        j, _, _ = self._edge(t)
        return self._rates[j].copy()

    def chord(self, s, t, diff=None):
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        d = s - t if diff is None else np.broadcast_to(diff, s.shape)
        js, _, ts = self._edge(s)
        jt, _, tt = self._edge(t)
        # same edge, possibly a whole period apart
        same = js == jt
        out = self.point(s) - self.point(t)
        if np.any(same):
            out[same] = (d - ts + tt)[same][:, None] * self._rates[js[same]]
        return out

    def interior_angles(self):
        a = self._edges
        b = np.roll(a, 1, axis=0)
        turn = np.arctan2(b[:, 0] * a[:, 1] - b[:, 1] * a[:, 0], np.sum(a * b, axis=1))
        return np.pi - turn

    def polyline(self, n=4096):
        t = np.arange(n) / n
        t = np.unique(np.concatenate([t, self.corners]))
        return self.point(t), t

    def distance(self, p):
        p = np.asarray(p, dtype=float)
        a = self.vertices
        e = self._edges
        u = np.clip(np.sum((p - a) * e, axis=1) / np.sum(e * e, axis=1), 0.0, 1.0)
        q = a + u[:, None] * e
        return float(np.min(np.hypot(*(q - p).T)))

    def perimeter(self, n=None):
        return float(np.sum(np.hypot(*self._edges.T)))

    def describe(self):
        return {"kind": self.kind, "vertices": self.vertices.tolist(), "breaks": self.breaks.tolist()}


class RegularPolygon(Polygon):
    """Regular polygon with its first vertex on the positive x-axis, counterclockwise."""

    kind = "regular_polygon"

    def __init__(self, sides, circumradius=1.0):
        sides = int(sides)
        if sides < 3:
            raise ValueError("need at least three sides")
        ang = TWO_PI * np.arange(sides) / sides
        self.sides = sides
        self.circumradius = float(circumradius)
        super().__init__(self.circumradius * np.stack([np.cos(ang), np.sin(ang)], axis=1))

    @classmethod
    def with_side(cls, sides, side_length):
        return cls(sides, side_length / (2.0 * np.sin(np.pi / sides)))

    @property
    def side_length(self):
        return 2.0 * self.circumradius * np.sin(np.pi / self.sides)

    def describe(self):
        return {"kind": self.kind, "sides": self.sides, "circumradius": self.circumradius}


def pentagon():
    """Regular pentagon with side length 2 sin(2 pi / 5)."""
    return RegularPolygon.with_side(5, 2.0 * np.sin(2.0 * np.pi / 5.0))


class TabulatedCurve(BoundaryCurve):
    """Smooth curve from equispaced samples z(j/Q), trigonometric interpolation.

    Derivative samples, if given, are used as a consistency check only; the
    interpolant is spectrally accurate for smooth periodic data.
    """

    kind = "tabulated"

    def __init__(self, samples, derivs=None, check_tol=1e-6):
        z = np.asarray(samples, dtype=float)
        if z.ndim != 2 or z.shape[1] != 2 or len(z) < 3:
            raise ValueError("samples must be a (Q, 2) array")
        q = len(z)
        self._q = q
        c = np.fft.fft(z[:, 0] + 1j * z[:, 1]) / q
        m = np.fft.fftfreq(q, 1.0 / q)
        if q % 2 == 0:
            # split the Nyquist mode symmetrically so the interpolant is real
            nyq = q // 2
            c = np.concatenate([c, [c[nyq] / 2]])
            c[nyq] /= 2
            m = np.concatenate([m, [nyq]])
            m[q // 2] = -nyq
        self._c = c
        self._m = m
        if derivs is not None:
            dz = np.asarray(derivs, dtype=float)
            got = self.deriv(np.arange(q) / q)
            if np.max(np.abs(got - dz)) > check_tol * max(1.0, np.max(np.abs(dz))):
                raise ValueError("derivative samples disagree with the interpolated curve")

    def _eval(self, t, order):
        t = np.asarray(t, dtype=float)
        w = self._c * (2j * np.pi * self._m) ** order
        e = np.exp(2j * np.pi * np.multiply.outer(t, self._m))
        v = e @ w
        return _xy(v.real, v.imag)

    def point(self, t):
        return self._eval(t, 0)

    def deriv(self, t):
        return self._eval(t, 1)

    def describe(self):
        return {"kind": self.kind, "samples": self._q}


def parametrize(curve: BoundaryCurve, t):
    return curve.point(t)


def speed(curve: BoundaryCurve, t):
    """|z'(t)|.  Raises CornerParameter at a corner of a piecewise linear curve."""
    t = np.asarray(t, dtype=float)
    c = curve.corners
    if len(c):
        tt = np.mod(t, 1.0)
        if np.any(np.isclose(tt[..., None], c, rtol=0, atol=1e-15)):
            raise CornerParameter("speed is undefined at a corner parameter")
    return curve.speed(t)


def make_curve(spec: dict) -> BoundaryCurve:
    """Build a curve from a config mapping with a ``kind`` key."""
    kind = spec.get("kind", "").lower()
    if kind == "circle":
        return Circle(spec.get("radius", 1.0), spec.get("center", (0.0, 0.0)))
    if kind == "kite":
        return Kite()
    if kind in ("pentagon",):
        return pentagon()
    if kind in ("regular_polygon", "polygon_regular"):
        if "side" in spec:
            return RegularPolygon.with_side(spec["sides"], spec["side"])
        return RegularPolygon(spec["sides"], spec.get("circumradius", 1.0))
    if kind == "polygon":
        return Polygon(spec["vertices"], spec.get("breaks"))
    if kind == "tabulated":
        return TabulatedCurve(spec["samples"], spec.get("derivs"))
    raise ValueError(f"unknown curve kind {kind!r}")

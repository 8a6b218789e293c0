"""Smooth closed boundary curves with level functions and curve geometry.

Every curve is parametrized counterclockwise over t in [0, 1) with the
interior on the left, so the interior unit normal is the +90 degree
rotation of the unit tangent and the signed curvature of a circle of
radius R is +1/R.  Each curve also exposes a level function (positive
inside, zero on the boundary, negative outside) used for grid masking,
cut-cell intersections and reflected-cap containment tests, plus an exact
bounding box used to anchor lattices deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class DomainCurve:
    """Base class: closed parametric boundary curve, interior on the left."""

    name = "curve"

    def point(self, t):
        raise NotImplementedError

    def velocity(self, t):
        raise NotImplementedError

    def acceleration(self, t):
        raise NotImplementedError

    def level(self, p):
        """Level function: > 0 strictly inside, < 0 outside."""
        raise NotImplementedError

    def bbox(self) -> tuple[float, float, float, float]:
        """Exact (xmin, xmax, ymin, ymax)."""
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    # -- derived geometry -------------------------------------------------

    def tangent(self, t):
        v = self.velocity(t)
        speed = np.linalg.norm(v, axis=-1, keepdims=True)
        return v / speed

    def normal(self, t):
        """Interior unit normal (left of the tangent)."""
        tau = self.tangent(t)
        return np.stack([-tau[..., 1], tau[..., 0]], axis=-1)

    def curvature(self, t):
        return curvature(self, t)

    def diameter(self) -> float:
        xmin, xmax, ymin, ymax = self.bbox()
        return math.hypot(xmax - xmin, ymax - ymin)

    def project(self, p) -> tuple[float, np.ndarray, float]:
        """Nearest boundary point: returns (t, foot, distance)."""
        p = np.asarray(p, dtype=float)
        ts = np.arange(2048) / 2048.0
        pts = self.point(ts)
        i = int(np.argmin(np.sum((pts - p) ** 2, axis=-1)))
        lo, hi = (i - 1.5) / 2048.0, (i + 1.5) / 2048.0

        def d2(t):
            q = self.point(np.asarray(t % 1.0)) - p
            return float(q[0] * q[0] + q[1] * q[1])

        inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
        fc, fd = d2(c), d2(d)
        for _ in range(80):
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - inv_phi * (b - a)
                fc = d2(c)
            else:
                a, c, fc = c, d, fd
                d = a + inv_phi * (b - a)
                fd = d2(d)
        t_star = 0.5 * (a + b) % 1.0
        foot = self.point(np.asarray(t_star))
        return t_star, foot, float(np.linalg.norm(foot - p))


def curvature(curve: DomainCurve, t):
    """Signed curvature (x'y'' - y'x'') / |x'|^3; circle of radius R gives +1/R."""
    v = curve.velocity(t)
    a = curve.acceleration(t)
    speed = np.linalg.norm(v, axis=-1)
    if np.any(speed < 1e-14):
        raise ValueError("degenerate parametrization: zero speed")
    cross = v[..., 0] * a[..., 1] - v[..., 1] * a[..., 0]
    return cross / speed**3


class Disk(DomainCurve):
    """Circle of radius R centered at the origin."""

    name = "disk"

    def __init__(self, R: float):
        if R <= 0:
            raise ValueError("disk radius must be positive")
        self.R = float(R)

    def params(self):
        return {"R": self.R}

    def point(self, t):
        ang = TWO_PI * np.asarray(t, dtype=float)
        return self.R * np.stack([np.cos(ang), np.sin(ang)], axis=-1)

    def velocity(self, t):
        ang = TWO_PI * np.asarray(t, dtype=float)
        return self.R * TWO_PI * np.stack([-np.sin(ang), np.cos(ang)], axis=-1)

    def acceleration(self, t):
        ang = TWO_PI * np.asarray(t, dtype=float)
        return -self.R * TWO_PI**2 * np.stack([np.cos(ang), np.sin(ang)], axis=-1)

    def level(self, p):
        p = np.asarray(p, dtype=float)
        return self.R - np.sqrt(p[..., 0] ** 2 + p[..., 1] ** 2)

    def bbox(self):
        return (-self.R, self.R, -self.R, self.R)


class Ellipse(DomainCurve):
    """Axis-aligned ellipse x^2/a^2 + y^2/b^2 = 1."""

    name = "ellipse"

    def __init__(self, a: float, b: float):
        if a <= 0 or b <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        self.a, self.b = float(a), float(b)

    def params(self):
        return {"a": self.a, "b": self.b}

    def point(self, t):
        ang = TWO_PI * np.asarray(t, dtype=float)
        return np.stack([self.a * np.cos(ang), self.b * np.sin(ang)], axis=-1)

    def velocity(self, t):
        ang = TWO_PI * np.asarray(t, dtype=float)
        return TWO_PI * np.stack([-self.a * np.sin(ang), self.b * np.cos(ang)], axis=-1)

    def acceleration(self, t):
        ang = TWO_PI * np.asarray(t, dtype=float)
        return -(TWO_PI**2) * np.stack([self.a * np.cos(ang), self.b * np.sin(ang)], axis=-1)

    def level(self, p):
        p = np.asarray(p, dtype=float)
        return 1.0 - (p[..., 0] / self.a) ** 2 - (p[..., 1] / self.b) ** 2

    def bbox(self):
        return (-self.a, self.a, -self.b, self.b)


class Egg(DomainCurve):
    """Polar oval r(phi) = r0 * (1 + amplitude * cos(phi)); asymmetric in x."""

    name = "egg"

    def __init__(self, amplitude: float, base_radius: float = 1.0):
        if not (0.0 <= amplitude < 0.5):
            raise ValueError("egg amplitude must lie in [0, 0.5)")
        if base_radius <= 0:
            raise ValueError("egg base radius must be positive")
        self.amp = float(amplitude)
        self.r0 = float(base_radius)

    def params(self):
        return {"amplitude": self.amp, "base_radius": self.r0}

    def _radius(self, phi):
        return self.r0 * (1.0 + self.amp * np.cos(phi))

    def point(self, t):
        phi = TWO_PI * np.asarray(t, dtype=float)
        r = self._radius(phi)
        return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)

    def velocity(self, t):
        phi = TWO_PI * np.asarray(t, dtype=float)
        r = self._radius(phi)
        dr = -self.r0 * self.amp * np.sin(phi)
        dx = dr * np.cos(phi) - r * np.sin(phi)
        dy = dr * np.sin(phi) + r * np.cos(phi)
        return TWO_PI * np.stack([dx, dy], axis=-1)

    def acceleration(self, t):
        phi = TWO_PI * np.asarray(t, dtype=float)
        r = self._radius(phi)
        dr = -self.r0 * self.amp * np.sin(phi)
        d2r = -self.r0 * self.amp * np.cos(phi)
        ax = (d2r - r) * np.cos(phi) - 2.0 * dr * np.sin(phi)
        ay = (d2r - r) * np.sin(phi) + 2.0 * dr * np.cos(phi)
        return TWO_PI**2 * np.stack([ax, ay], axis=-1)

    def level(self, p):
        p = np.asarray(p, dtype=float)
        phi = np.arctan2(p[..., 1], p[..., 0])
        return self._radius(phi) - np.sqrt(p[..., 0] ** 2 + p[..., 1] ** 2)

    def bbox(self):
        xmax = self.r0 * (1.0 + self.amp)
        xmin = -self.r0 * (1.0 - self.amp)
        # ymax where d/dphi [r(phi) sin(phi)] = 0: cos(phi) + amp*cos(2 phi) = 0
        lo, hi = 0.5 * math.pi, math.pi
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if math.cos(mid) + self.amp * math.cos(2 * mid) > 0.0:
                lo = mid
            else:
                hi = mid
        phi_star = 0.5 * (lo + hi)
        ymax = self.r0 * (1.0 + self.amp * math.cos(phi_star)) * math.sin(phi_star)
        return (xmin, xmax, -ymax, ymax)


class Stadium(DomainCurve):
    """Two flats of length 2*half_length joined by semicircular caps of given radius.

    C^1 arc-length parametrization; curvature is exactly zero on the flats.
    """

    name = "stadium"

    def __init__(self, half_length: float, radius: float):
        if half_length <= 0 or radius <= 0:
            raise ValueError("stadium parameters must be positive")
        self.L = float(half_length)
        self.rho = float(radius)
        self.perimeter = 4.0 * self.L + TWO_PI * self.rho

    def params(self):
        return {"half_length": self.L, "radius": self.rho}

    def _pieces(self, t):
        s = (np.asarray(t, dtype=float) % 1.0) * self.perimeter
        b1 = math.pi * self.rho          # end of right cap
        b2 = b1 + 2.0 * self.L           # end of top flat
        b3 = b2 + math.pi * self.rho     # end of left cap
        return s, b1, b2, b3

    def point(self, t):
        s, b1, b2, b3 = self._pieces(t)
        x = np.empty_like(s)
        y = np.empty_like(s)
        m = s < b1
        ang = -0.5 * math.pi + s[m] / self.rho
        x[m] = self.L + self.rho * np.cos(ang)
        y[m] = self.rho * np.sin(ang)
        m = (s >= b1) & (s < b2)
        x[m] = self.L - (s[m] - b1)
        y[m] = self.rho
        m = (s >= b2) & (s < b3)
        ang = 0.5 * math.pi + (s[m] - b2) / self.rho
        x[m] = -self.L + self.rho * np.cos(ang)
        y[m] = self.rho * np.sin(ang)
        m = s >= b3
        x[m] = -self.L + (s[m] - b3)
        y[m] = -self.rho
        return np.stack([x, y], axis=-1)

    def velocity(self, t):
        s, b1, b2, b3 = self._pieces(t)
        tx = np.empty_like(s)
        ty = np.empty_like(s)
        m = s < b1
        ang = -0.5 * math.pi + s[m] / self.rho
        tx[m], ty[m] = -np.sin(ang), np.cos(ang)
        m = (s >= b1) & (s < b2)
        tx[m], ty[m] = -1.0, 0.0
        m = (s >= b2) & (s < b3)
        ang = 0.5 * math.pi + (s[m] - b2) / self.rho
        tx[m], ty[m] = -np.sin(ang), np.cos(ang)
        m = s >= b3
        tx[m], ty[m] = 1.0, 0.0
        return self.perimeter * np.stack([tx, ty], axis=-1)

    def acceleration(self, t):
        s, b1, b2, b3 = self._pieces(t)
        ax = np.zeros_like(s)
        ay = np.zeros_like(s)
        coef = self.perimeter**2 / self.rho
        m = s < b1
        ang = -0.5 * math.pi + s[m] / self.rho
        ax[m], ay[m] = -coef * np.cos(ang), -coef * np.sin(ang)
        m = (s >= b2) & (s < b3)
        ang = 0.5 * math.pi + (s[m] - b2) / self.rho
        ax[m], ay[m] = -coef * np.cos(ang), -coef * np.sin(ang)
        return np.stack([ax, ay], axis=-1)

    def level(self, p):
        p = np.asarray(p, dtype=float)
        cx = np.clip(p[..., 0], -self.L, self.L)
        return self.rho - np.sqrt((p[..., 0] - cx) ** 2 + p[..., 1] ** 2)

    def bbox(self):
        return (-(self.L + self.rho), self.L + self.rho, -self.rho, self.rho)


def is_simple(curve: DomainCurve, n: int = 512) -> bool:
    """No self-intersection, checked on an n-segment polyline."""
    ts = np.arange(n) / n
    p = curve.point(ts)
    q = curve.point(((np.arange(n) + 1) % n) / n)
    d = q - p

    def orient(a, b, c):
        return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])

    for i in range(n):
        js = np.arange(i + 2, n if i > 0 else n - 1)
        if len(js) == 0:
            continue
        a = np.broadcast_to(p[i], (len(js), 2))
        b = np.broadcast_to(p[i] + d[i], (len(js), 2))
        c, e = p[js], q[js]
        o1, o2 = orient(a, b, c), orient(a, b, e)
        o3, o4 = orient(c, e, a), orient(c, e, b)
        if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
            return False
    return True


def make_domain(kind: str, **params) -> DomainCurve:
    """Factory used by the experiment configuration layer."""
    kinds = {
        "disk": (Disk, ("R",)),
        "ellipse": (Ellipse, ("a", "b")),
        "egg": (Egg, ("amplitude", "base_radius")),
        "stadium": (Stadium, ("half_length", "radius")),
    }
    if kind not in kinds:
        raise ValueError(f"unknown domain kind {kind!r}")
    cls, allowed = kinds[kind]
    bad = set(params) - set(allowed)
    if bad:
        raise ValueError(f"unexpected {kind} parameters: {sorted(bad)}")
    return cls(**params)

"""High-accuracy radial solutions in a disk.

For radial u the Hessian eigenvalues are u''(r) and u'(r)/r, so the PDE
F(D^2 u, |Du|) + f(u) = 0 closes into a second-order ODE in r.  Because the
extremal operator is strictly increasing in each eigenvalue with slope in
[lambda, Lambda], u'' can be isolated in closed form at every step, and the
boundary problem u(R) = 0 is solved by shooting on the central value u(0).

These profiles are the independent oracle for the 2-D grid solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, NumericsError
from .operators import OperatorSpec


@dataclass(frozen=True)
class SourceSpec:
    """Source term f(u): constant c, or affine a + b*u.

    Affine sources are locally Lipschitz with constant |b|; constant
    sources have Lipschitz constant 0.
    """

    kind: str
    a: float
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "affine"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "constant" and self.b != 0.0:
            raise ValueError("constant source cannot carry a slope")

    @staticmethod
    def constant(c: float) -> "SourceSpec":
        return SourceSpec("constant", float(c))

    @staticmethod
    def affine(a: float, b: float) -> "SourceSpec":
        return SourceSpec("affine", float(a), float(b))

    def value(self, u):
        return self.a + self.b * u

    @property
    def lipschitz(self) -> float:
        return abs(self.b)

    @property
    def nonincreasing(self) -> bool:
        return self.b <= 0.0


@dataclass(frozen=True)
class RadialProfile:
    """Sampled radial solution: values, first and second derivative, c0 = |u'(R)|."""

    R: float
    h: float
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    d2u: np.ndarray
    c0: float

    @property
    def u0(self) -> float:
        return float(self.u[0])

    def interp(self, rq) -> np.ndarray:
        """Cubic-accurate evaluation off the sample grid (local quadratic through 3 nodes)."""
        rq = np.atleast_1d(np.asarray(rq, dtype=float))
        i = np.clip(np.rint(rq / self.h).astype(int), 1, len(self.r) - 2)
        x = (rq - self.r[i]) / self.h
        um, uc, up = self.u[i - 1], self.u[i], self.u[i + 1]
        return uc + 0.5 * x * (up - um) + 0.5 * x * x * (up - 2 * uc + um)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("r,u\n")
            for ri, ui in zip(self.r, self.u):
                fh.write(f"{ri:.12g},{ui:.12g}\n")


def radial_hessian_eigs(u1: float, u2: float, r: float) -> tuple[float, float]:
    """Hessian eigenvalue pair (u'', u'/r) of a radial function at r > 0."""
    if r <= 0.0:
        raise ValueError("r must be positive; at the center use u'' for both eigenvalues")
    return u2, u1 / r


def _second_derivative(spec: OperatorSpec, r: float, u: float, v: float, f: SourceSpec) -> float:
    """Isolate u'' from F(diag(u'', u'/r), |u'|) + f(u) = 0.

    The extremal operator splits over the diagonal entries, so with
    phi(t) = min(lam*t, Lam*t) (minus variant; max for plus) the equation is
    phi(u'') + phi(u'/r) + s*k*|u'| + f(u) = 0 and phi inverts in one branch.
    At r = 0 the second eigenvalue equals u'' (removable singularity), giving
    2*phi(u'') = -c.
    """
    lam, Lam = spec.lam, spec.Lam
    c = spec.grad_sign * spec.k * abs(v) + f.value(u)
    if spec.is_minus:
        def phi(t):
            return lam * t if t >= 0.0 else Lam * t

        def phi_inv(y):
            return y / lam if y >= 0.0 else y / Lam
    else:
        def phi(t):
            return Lam * t if t >= 0.0 else lam * t

        def phi_inv(y):
            return y / Lam if y >= 0.0 else y / lam
    if r <= 0.0:
        return phi_inv(-0.5 * c)
    return phi_inv(-c - phi(v / r))


def _integrate(spec: OperatorSpec, f: SourceSpec, R: float, h: float, u0: float):
    """RK4 march of (u, u') from the center with the closed-form u'' closure."""
    n = int(round(R / h))
    r = h * np.arange(n + 1)
    u = np.empty(n + 1)
    du = np.empty(n + 1)
    d2u = np.empty(n + 1)
    ui, vi = u0, 0.0
    for i in range(n + 1):
        u[i], du[i] = ui, vi
        d2u[i] = _second_derivative(spec, r[i], ui, vi, f)
        if i == n:
            break
        ri = r[i]
        k1u, k1v = vi, d2u[i]
        k2u = vi + 0.5 * h * k1v
        k2v = _second_derivative(spec, ri + 0.5 * h, ui + 0.5 * h * k1u, k2u, f)
        k3u = vi + 0.5 * h * k2v
        k3v = _second_derivative(spec, ri + 0.5 * h, ui + 0.5 * h * k2u, k3u, f)
        k4u = vi + h * k3v
        k4v = _second_derivative(spec, ri + h, ui + h * k3u, k4u, f)
        ui = ui + h * (k1u + 2 * k2u + 2 * k3u + k4u) / 6.0
        vi = vi + h * (k1v + 2 * k2v + 2 * k3v + k4v) / 6.0
    return r, u, du, d2u


def solve_radial(spec: OperatorSpec, f: SourceSpec, R: float, h: float) -> RadialProfile:
    """Shooting solution of the radial problem with u(R) = 0, u'(0) = 0.

    Bisects the central value u(0) inside an ABP-scale bracket
    [0, 10 * R^2 * f(0) / lambda] until |u(R)| <= 1e-10.
    """
    if R <= 0.0:
        raise ValueError("disk radius must be positive")
    if h > R / 100.0:
        raise ValueError("step too coarse: need h <= R/100")

    def end_value(a):
        return _integrate(spec, f, R, h, a)[1][-1]

    lo = 0.0
    f_lo = end_value(lo)
    hi = 10.0 * R * R * max(f.value(0.0), 1e-8) / spec.lam
    f_hi = end_value(hi)
    for _ in range(8):
        if f_hi > 0.0:
            break
        hi *= 2.0
        f_hi = end_value(hi)
    if f_lo > 1e-10 or f_hi < 0.0:
        raise BracketError(
            "shooting bracket not found: no positive radial solution for this operator/source"
        )
    a = lo
    fa = f_lo
    for _ in range(200):
        if abs(fa) <= 1e-10:
            break
        mid = 0.5 * (lo + hi)
        fm = end_value(mid)
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
        a, fa = mid, fm
    else:
        raise NumericsError("central-value bisection did not reach |u(R)| <= 1e-10")

    r, u, du, d2u = _integrate(spec, f, R, h, a)
    if np.any(u[1:-1] <= -1e-9 * max(a, 1.0)):
        raise NumericsError("radial solution is not positive inside the disk")
    return RadialProfile(R=R, h=h, r=r, u=u, du=du, d2u=d2u, c0=abs(float(du[-1])))


def radial_residual(profile: RadialProfile, spec: OperatorSpec, f: SourceSpec) -> float:
    """Max pointwise defect of the radial equation over the sample grid."""
    worst = 0.0
    lam, Lam = spec.lam, spec.Lam
    for i in range(len(profile.r)):
        ri, ui, vi, wi = profile.r[i], profile.u[i], profile.du[i], profile.d2u[i]
        e2 = wi if ri == 0.0 else vi / ri
        if spec.is_minus:
            op = sum(lam * t if t >= 0 else Lam * t for t in (wi, e2))
        else:
            op = sum(Lam * t if t >= 0 else lam * t for t in (wi, e2))
        worst = max(worst, abs(op + spec.grad_sign * spec.k * abs(vi) + f.value(ui)))
    return worst


def closed_form_disk_torsion(lam: float, Lam: float, R: float, h: float | None = None) -> RadialProfile:
    """Exact minus-variant torsion profile u(r) = (R^2 - r^2) / (4 * Lambda).

    Both Hessian eigenvalues are the negative constant -1/(2*Lambda), so the
    minus operator acts as Lambda times the Laplacian and f = 1 balances it.
    """
    if not (0.0 < lam <= Lam):
        raise ValueError("need 0 < lambda <= Lambda")
    if h is None:
        h = R / 256.0
    n = int(round(R / h))
    r = h * np.arange(n + 1)
    u = (R * R - r * r) / (4.0 * Lam)
    du = -r / (2.0 * Lam)
    d2u = np.full(n + 1, -1.0 / (2.0 * Lam))
    return RadialProfile(R=R, h=h, r=r, u=u, du=du, d2u=d2u, c0=R / (2.0 * Lam))

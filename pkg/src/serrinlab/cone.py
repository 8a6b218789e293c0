"""Homogeneity exponents of extremal-operator solutions in planar sectors.

A positive solution of M^-(D^2 Psi) = 0 in the sector of opening theta that
vanishes on the sides has the form Psi = r^beta g(phi).  In the orthonormal
polar frame the Hessian of r^beta g is

    r^(beta-2) * [[beta(beta-1) g, (beta-1) g'], [(beta-1) g', beta g + g'']]

and the operator equation closes into an angular ODE: g'' is the unique root
of the extremal operator in the (2,2) slot, available in closed form because
the operator is piecewise linear and strictly increasing in that entry.
The exponent beta is then found by shooting: integrate g(0)=0, g'(0)=1 and
bisect beta until the first zero of g lands on theta.

decay_rate_fit cross-checks beta against an actual 2-D solve on a truncated
sector, fitting the decay slope of the solution along the bisector ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import BracketError, NumericsError
from .grid import SolveParams, build_masked_grid, sample_field, solve
from .operators import OperatorSpec, SymMat2
from .radial import SourceSpec

BETA_BRACKET = (0.1, 20.0)


@dataclass(frozen=True)
class SectorProblem:
    """Sector of opening theta with a gradient-free extremal operator."""

    theta: float
    spec: OperatorSpec

    def __post_init__(self):
        if not (0.0 < self.theta < 2.0 * math.pi):
            raise ValueError("sector opening must lie in (0, 2*pi)")
        if self.spec.k != 0.0:
            raise ValueError("the sector equation carries no gradient term (k must be 0)")


@dataclass
class BetaResult:
    """Homogeneity exponent with its angular profile and shoot diagnostics."""

    beta: float
    theta: float
    spec: OperatorSpec
    phi: np.ndarray
    g: np.ndarray
    first_zero: float
    bracket_history: list = dataclass_field(default_factory=list)

    def profile_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("phi,g\n")
            for p, gv in zip(self.phi, self.g):
                fh.write(f"{p:.12g},{gv:.12g}\n")


def polar_hessian(beta: float, g: float, g1: float, g2: float, r: float) -> SymMat2:
    """Hessian of r^beta g(phi) in the orthonormal polar frame at radius r > 0."""
    if r <= 0.0:
        raise ValueError("r must be positive")
    f = r ** (beta - 2.0)
    return SymMat2(f * beta * (beta - 1.0) * g, f * (beta - 1.0) * g1, f * (beta * g + g2))


def resolve_g2(beta: float, g: float, g1: float, spec: OperatorSpec) -> float:
    """The unique g'' solving M(polar_hessian) = 0 at r = 1.

    With A = beta(beta-1)g, B = (beta-1)g' and C the (2,2) entry, the zero
    set of the extremal operator on indefinite matrices is
    (A+C) = +/- omega * sqrt((A-C)^2 + 4B^2) with omega = (Lam-lam)/(Lam+lam),
    which solves in closed form; the psd/nsd branches only occur at the zero
    matrix.  The root is unique because the operator is strictly increasing
    in C with slope in [lam, Lam].
    """
    if spec.k != 0.0:
        raise ValueError("resolve_g2 requires a gradient-free operator (k = 0)")
    lam, Lam = spec.lam, spec.Lam
    A = beta * (beta - 1.0) * g
    B = (beta - 1.0) * g1
    if Lam == lam:
        C = -A
    else:
        w = (Lam - lam) / (Lam + lam)
        root = math.sqrt(A * A + (1.0 - w * w) * B * B)
        if spec.is_minus:
            S = 2.0 * w * (root - w * A) / (1.0 - w * w)
        else:
            S = -2.0 * w * (root + w * A) / (1.0 - w * w)
        C = S - A
    return C - beta * g


def _rk4_step(beta: float, spec: OperatorSpec, g: float, v: float, h: float):
    k1g, k1v = v, resolve_g2(beta, g, v, spec)
    g2, v2 = g + 0.5 * h * k1g, v + 0.5 * h * k1v
    k2g, k2v = v2, resolve_g2(beta, g2, v2, spec)
    g3, v3 = g + 0.5 * h * k2g, v + 0.5 * h * k2v
    k3g, k3v = v3, resolve_g2(beta, g3, v3, spec)
    g4, v4 = g + h * k3g, v + h * k3v
    k4g, k4v = v4, resolve_g2(beta, g4, v4, spec)
    return (
        g + h * (k1g + 2.0 * k2g + 2.0 * k3g + k4g) / 6.0,
        v + h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0,
    )


def shoot(beta: float, spec: OperatorSpec, phi_max: float, n_steps: int = 2048,
          record=None) -> float | None:
    """First zero of the angular profile g with g(0)=0, g'(0)=1, or None.

    Fourth-order fixed steps; once the profile turns nonpositive the zero is
    bisected inside the step to 1e-10.
    """
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    h = phi_max / n_steps
    g, v = 0.0, 1.0
    phi = 0.0
    if record is not None:
        record.append((phi, g))
    for i in range(n_steps):
        gn, vn = _rk4_step(beta, spec, g, v, h)
        if i > 0 and gn <= 0.0:
            lo, hi = 0.0, h
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                gm, _ = _rk4_step(beta, spec, g, v, mid)
                if gm > 0.0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 1e-10:
                    break
            return phi + 0.5 * (lo + hi)
        g, v = gn, vn
        phi += h
        if record is not None:
            record.append((phi, g))
    return None


def beta_of_sector(problem: SectorProblem, tol: float = 1e-8) -> BetaResult:
    """Bisect beta in [0.1, 20] until the first zero of g lands on theta.

    The first zero moves down as beta grows (checked on the Laplacian family
    where it equals pi/beta), which orients the bisection.
    """
    theta, spec = problem.theta, problem.spec
    phi_max = min(2.0 * math.pi, 1.5 * theta + 0.3)
    lo, hi = BETA_BRACKET
    z_lo = shoot(lo, spec, phi_max)
    z_hi = shoot(hi, spec, phi_max)
    if z_lo is not None and z_lo <= theta:
        raise BracketError(f"beta bracket [{lo}, {hi}] exhausted from below at theta={theta}")
    if z_hi is None or z_hi > theta:
        raise BracketError(f"beta bracket [{lo}, {hi}] exhausted from above at theta={theta}")
    history = []
    beta = None
    z = None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        z = shoot(mid, spec, phi_max)
        history.append((mid, z if z is not None else math.nan))
        if z is None or z > theta:
            lo = mid
        else:
            hi = mid
        beta = mid
        if z is not None and abs(z - theta) <= tol:
            break
    else:
        raise NumericsError("beta bisection did not converge to the requested tolerance")

    trace = []
    zero = shoot(beta, spec, phi_max, n_steps=8192, record=trace)
    arr = np.array(trace)
    keep = arr[:, 0] <= theta + 1e-12
    phi = arr[keep, 0]
    gv = arr[keep, 1]
    return BetaResult(beta=beta, theta=theta, spec=spec, phi=phi, g=gv,
                      first_zero=float(zero), bracket_history=history)


def beta_limit_sequence(theta: float, lam: float, m_list) -> list[float]:
    """Exponents for the shrinking-ellipticity family Lambda = lam * (1 + 1/m)."""
    betas = []
    for m in m_list:
        if m <= 0:
            raise ValueError("m must be positive")
        spec = OperatorSpec(variant="pucci_minus", lam=lam, Lam=lam * (1.0 + 1.0 / m), k=0.0)
        betas.append(beta_of_sector(SectorProblem(theta=theta, spec=spec)).beta)
    return betas


@dataclass(frozen=True)
class SectorFitParams:
    """Grid controls for the truncated-sector decay fit."""

    h: float = 1.0 / 64
    r_in: float = 0.05
    tol: float = 1e-7
    fit_lo: float = 0.12
    fit_hi: float = 0.7
    n_fit: int = 24


@dataclass
class DecayFit:
    """Log-log decay slope of the sector solution along the bisector."""

    beta: float
    intercept: float
    radii: np.ndarray
    values: np.ndarray


def decay_rate_fit(spec: OperatorSpec, theta: float, params: SectorFitParams | None = None) -> DecayFit:
    """Solve M(D^2 w) = 0 on the truncated sector and fit the decay rate.

    The annular sector r in (r_in, 1), phi in (0, theta) carries the shot
    profile g as Dirichlet data on the outer arc and 0 on the radial sides
    and the inner arc; the slope of log w against log r along the bisector
    estimates the homogeneity exponent.
    """
    if not (0.0 < theta <= math.pi):
        raise ValueError("decay fit supports sector openings in (0, pi]")
    params = params or SectorFitParams()
    base = beta_of_sector(SectorProblem(theta=theta, spec=spec))
    gmax = float(base.g.max())
    prof_phi, prof_g = base.phi, base.g / gmax

    sin_t, cos_t = math.sin(theta), math.cos(theta)
    r_in = params.r_in

    def level(p):
        p = np.asarray(p, dtype=float)
        x, y = p[..., 0], p[..., 1]
        r = np.sqrt(x * x + y * y)
        d_side1 = y
        d_side2 = x * sin_t - y * cos_t
        return np.minimum(np.minimum(r - r_in, 1.0 - r), np.minimum(d_side1, d_side2))

    def boundary_value(pts):
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        r = np.sqrt(x * x + y * y)
        vals = np.zeros(len(pts))
        on_outer = np.abs(1.0 - r) <= 1e-9
        if on_outer.any():
            phi = np.arctan2(y[on_outer], x[on_outer])
            vals[on_outer] = np.interp(phi, prof_phi, prof_g)
        return vals

    xmin = min(0.0, cos_t) - 0.0
    ymax = 1.0 if theta >= 0.5 * math.pi else sin_t
    grid = build_masked_grid(level, (xmin, 1.0, 0.0, ymax), params.h, K=8,
                             boundary_value=boundary_value)
    field = solve(spec, SourceSpec.constant(0.0), grid, SolveParams(tol=params.tol))

    radii = np.geomspace(params.fit_lo, params.fit_hi, params.n_fit)
    half = 0.5 * theta
    pts = np.stack([radii * math.cos(half), radii * math.sin(half)], axis=-1)
    vals = sample_field(field, pts)
    if np.any(vals <= 0.0):
        raise NumericsError("sector solution is not positive along the bisector ray")
    slope, intercept = np.polyfit(np.log(radii), np.log(vals), 1)
    return DecayFit(beta=float(slope), intercept=float(intercept), radii=radii, values=vals)


@dataclass
class IterationBoundReport:
    """Outcome of the dyadic iteration lower bound check."""

    passed: bool
    failed_level: int | None
    ratio: float
    bound: float

    @property
    def slack(self) -> float:
        return self.ratio - self.bound


def iteration_lower_bound(C: float, r1: float, q) -> IterationBoundReport:
    """Check q(r) >= q(2r)(1 - Cr) on dyadic samples and the resulting bound.

    q[i] is the sample at radius r1 / 2^i.  When the recursion hypothesis
    holds at every level, the telescoped product is bounded below by
    exp(-4*C*r1) (factor 2 from ln(1-y) >= -2y on (0, 1/2], factor 2 from
    the geometric radius sum), so q(last) >= exp(-4*C*r1) * q(r1).
    """
    if C < 0.0:
        raise ValueError("C must be nonnegative")
    if not (0.0 < r1 <= 1.0) or abs(math.log2(r1) - round(math.log2(r1))) > 1e-12:
        raise ValueError("r1 must be a dyadic radius 2^-k")
    if C * r1 > 0.5:
        raise ValueError("need C * r1 <= 1/2 for the logarithm inequality")
    q = [float(v) for v in q]
    if len(q) < 2:
        raise ValueError("need at least two dyadic samples")
    if any(v < 0.0 for v in q):
        raise ValueError("q samples must be nonnegative")
    for i in range(1, len(q)):
        r = r1 / 2**i
        if q[i] < q[i - 1] * (1.0 - C * r) * (1.0 - 1e-12) - 1e-300:
            return IterationBoundReport(
                passed=False, failed_level=i, ratio=q[-1] / q[0] if q[0] else math.inf,
                bound=math.exp(-4.0 * C * r1),
            )
    bound = math.exp(-4.0 * C * r1)
    ratio = q[-1] / q[0] if q[0] != 0.0 else math.inf
    ok = q[-1] >= bound * q[0] * (1.0 - 1e-12)
    return IterationBoundReport(passed=ok, failed_level=None, ratio=ratio, bound=bound)

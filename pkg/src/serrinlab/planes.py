"""Moving planes on 2-D domains and the boundary-expansion diagnostics.

For a direction e the plane T_s = {<x, e> = s} slides down from the top
abscissa d0; the critical position s* is the first s where either the
reflected cap leaves the domain (internal tangency) or the plane meets the
boundary orthogonally.  The scan verifies containment on a dense reflected
boundary sample and the strict normal condition <nu, e> < 0 at the
plane/boundary crossings, then sharpens s* by bisection.

Boundary expansions fit a quadratic without constant term to the solution in
the local (tangent, normal) frame at boundary samples; the tangential second
derivative must match -|Du| * kappa (the curvature identity of the
second-order boundary expansion), and the normal second derivative feeds the
sign diagnostic u_nn < 0 for nonincreasing sources.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import DomainCurve, curvature
from .errors import GridError, ReflectionOutsideDomain, SerrinLabError
from .grid import Field, SolveParams, build_grid, solve
from .operators import OperatorSpec
from .radial import SourceSpec

__all__ = [
    "MovingPlaneReport", "BoundaryExpansionReport", "WCompare", "SymmetryVerdict",
    "curvature", "support", "critical_position", "reflect_and_compare",
    "boundary_expansion_check", "gauss_map_measure", "u_nn_check", "symmetry_verdict",
]


@dataclass
class MovingPlaneReport:
    """Critical position of one direction with the reflected-difference extremes."""

    direction: np.ndarray
    d0: float
    s_star: float
    case: str
    witness: np.ndarray | None
    sup_w: float = math.nan
    min_w: float = math.nan
    sup_abs_w: float = math.nan


@dataclass
class WCompare:
    """Extremes of w_s = u(reflected) - u over the cap."""

    sup_abs_w: float
    min_w: float
    sup_w: float
    n_nodes: int


def support(curve: DomainCurve, e, n: int = 4096) -> tuple[float, float]:
    """Maximum of <x, e> over the boundary and the parameter attaining it."""
    e = np.asarray(e, dtype=float)
    ts = np.arange(n) / n
    proj = curve.point(ts) @ e
    i = int(np.argmax(proj))

    def val(t):
        return float(curve.point(np.asarray(t % 1.0)) @ e)

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = (i - 1.5) / n, (i + 1.5) / n
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = val(c), val(d)
    for _ in range(80):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = val(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = val(d)
    t_star = 0.5 * (a + b) % 1.0
    return val(t_star), t_star


def _plane_crossings(curve: DomainCurve, proj: np.ndarray, ts: np.ndarray, e, s: float):
    """Boundary parameters where <x(t), e> = s, bisected from a dense sign scan."""
    n = len(ts)
    diff = proj - s
    out = []
    for i in range(n):
        j = (i + 1) % n
        if diff[i] == 0.0:
            out.append(ts[i])
        elif diff[i] * diff[j] < 0.0:
            lo, hi = ts[i], ts[i] + 1.0 / n
            flo = diff[i]
            for _ in range(55):
                mid = 0.5 * (lo + hi)
                fm = float(curve.point(np.asarray(mid % 1.0)) @ e) - s
                if (fm > 0.0) == (flo > 0.0):
                    lo = mid
                else:
                    hi = mid
            out.append(0.5 * (lo + hi) % 1.0)
    return out


def critical_position(curve: DomainCurve, e, ds: float, n_boundary: int = 2048,
                      refine: float = 1e-9) -> MovingPlaneReport:
    """Scan the plane downward to the critical position and classify the stop.

    At each s the reflected cap must stay inside (checked on n_boundary
    reflected samples against the level function) and the normal condition
    <nu, e> < 0 must hold at the plane crossings; the first failing s is
    bisected to refine * diameter.
    """
    e = np.asarray(e, dtype=float)
    e = e / np.linalg.norm(e)
    diam = curve.diameter()
    if ds > diam / 1000.0:
        raise ValueError("scan step too coarse: need ds <= diameter/1000")
    lvl_tol = 1e-12 * diam
    ts = np.arange(n_boundary) / n_boundary
    pts = curve.point(ts)
    proj = pts @ e
    d0, _ = support(curve, e)
    s_bottom = -support(curve, -e)[0]

    def ok(s: float) -> bool:
        cap = proj > s
        if cap.any():
            refl = pts[cap] + 2.0 * (s - proj[cap])[:, None] * e[None, :]
            if float(np.min(curve.level(refl))) < -lvl_tol:
                return False
        for tc in _plane_crossings(curve, proj, ts, e, s):
            nu = curve.normal(np.asarray(tc))
            if float(nu @ e) >= 0.0:
                return False
        return True

    s_prev = d0
    s = d0 - ds
    while s > s_bottom - ds:
        if not ok(s):
            break
        s_prev = s
        s -= ds
    else:
        raise SerrinLabError("moving plane never reached a critical position (unbounded scan)")

    lo, hi = s, s_prev
    while hi - lo > refine * diam:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    s_star = hi

    # classification: measure both stop indicators at s*
    tangency_tol = 1e-5 * diam
    normal_tol = 1e-4
    cap = proj > s_star + 2.0 * refine * diam
    touch_dist = math.inf
    witness_t = None
    if cap.any():
        refl = pts[cap] + 2.0 * (s_star - proj[cap])[:, None] * e[None, :]
        lv = curve.level(refl)
        order = np.argsort(lv)
        for idx in order[:3]:
            _, foot, dist = curve.project(refl[idx])
            if dist < touch_dist:
                touch_dist = dist
                witness_t = foot
    ortho_val = math.inf
    ortho_point = None
    for tc in _plane_crossings(curve, proj, ts, e, s_star):
        nu = curve.normal(np.asarray(tc))
        v = abs(float(nu @ e))
        if v < ortho_val:
            ortho_val = v
            ortho_point = curve.point(np.asarray(tc))
    tangent_hit = touch_dist <= tangency_tol
    ortho_hit = ortho_val <= normal_tol
    if tangent_hit and ortho_hit:
        case = "both"
        witness = witness_t
    elif ortho_hit:
        case = "orthogonality"
        witness = ortho_point
    else:
        case = "tangency"
        witness = witness_t
    return MovingPlaneReport(direction=e, d0=d0, s_star=s_star, case=case, witness=witness)


def reflect_and_compare(field: Field, e, s: float) -> WCompare:
    """Extremes of w_s over the interior nodes of the cap {<x, e> > s}.

    Reflected points are evaluated with the quadratic-exact field
    interpolation; a reflected point outside the domain mask raises
    ReflectionOutsideDomain (the signal that s < s*).
    """
    e = np.asarray(e, dtype=float)
    e = e / np.linalg.norm(e)
    grid = field.grid
    pts = grid.interior_points()
    proj = pts @ e
    sel = proj > s
    if not sel.any():
        return WCompare(sup_abs_w=0.0, min_w=0.0, sup_w=0.0, n_nodes=0)
    refl = pts[sel] + 2.0 * (s - proj[sel])[:, None] * e[None, :]
    level_fn = getattr(grid, "level_fn", None)
    if level_fn is not None:
        lv = level_fn(refl)
        if float(np.min(lv)) < -1e-9 * max(grid.h, 1.0):
            raise ReflectionOutsideDomain(
                f"reflected point exits the domain mask at s={s} (depth {float(np.min(lv)):.2e})"
            )
    vals_refl = field.sample(refl)
    iy, ix = grid.interior_nodes()
    w = vals_refl - field.values[iy, ix][sel]
    return WCompare(
        sup_abs_w=float(np.max(np.abs(w))),
        min_w=float(np.min(w)),
        sup_w=float(np.max(w)),
        n_nodes=int(sel.sum()),
    )


@dataclass
class BoundaryExpansionReport:
    """Boundary-sample table of the fitted second-order expansion."""

    t: np.ndarray
    points: np.ndarray
    c0: np.ndarray
    mu_tau: np.ndarray
    u_nn: np.ndarray
    a_tau_nu: np.ndarray
    kappa: np.ndarray

    @property
    def c0_mean(self) -> float:
        return float(self.c0.mean())

    @property
    def tangential_residual(self) -> np.ndarray:
        """|mu_tau + c0 * kappa| per sample (curvature identity defect)."""
        return np.abs(self.mu_tau + self.c0 * self.kappa)

    @property
    def max_tangential_residual(self) -> float:
        return float(self.tangential_residual.max())

    @property
    def max_mixed_entry(self) -> float:
        return float(np.abs(self.a_tau_nu).max())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("t,x,y,c0,mu_tau,u_nn,a_tau_nu,kappa\n")
            for i in range(len(self.t)):
                fh.write(
                    f"{self.t[i]:.12g},{self.points[i, 0]:.12g},{self.points[i, 1]:.12g},"
                    f"{self.c0[i]:.12g},{self.mu_tau[i]:.12g},{self.u_nn[i]:.12g},"
                    f"{self.a_tau_nu[i]:.12g},{self.kappa[i]:.12g}\n"
                )


def boundary_expansion_check(field: Field, curve: DomainCurve, samples: int = 64,
                             fit_radius: float | None = None) -> BoundaryExpansionReport:
    """Fit u ~ b_t s + b_n n + mu_tau s^2/2 + a_tn s n + u_nn n^2/2 at boundary samples.

    The fit runs over interior nodes within fit_radius (default 4h) of the
    foot point, weighted by (1 - d/r)^2, in the local (tangent, normal)
    frame; the constant term is pinned to the Dirichlet value 0.
    """
    grid = field.grid
    r = fit_radius if fit_radius is not None else 4.0 * grid.h
    ts = np.arange(samples) / samples
    feet = curve.point(ts)
    taus = curve.tangent(ts)
    nus = curve.normal(ts)
    kappas = curvature(curve, ts)
    nodes = grid.interior_points()
    iy, ix = grid.interior_nodes()
    node_vals = field.values[iy, ix]

    c0 = np.empty(samples)
    mu_tau = np.empty(samples)
    u_nn = np.empty(samples)
    a_tn = np.empty(samples)
    for i in range(samples):
        rel = nodes - feet[i]
        d2 = np.einsum("ij,ij->i", rel, rel)
        keep = d2 < r * r
        if keep.sum() < 5:
            raise GridError(
                f"insufficient nodes for the boundary fit at t={ts[i]:.4f} "
                f"({int(keep.sum())} within {r:.4g})"
            )
        rel = rel[keep]
        s = rel @ taus[i] / r
        n = rel @ nus[i] / r
        w = (1.0 - np.sqrt(d2[keep]) / r) ** 2
        A = np.stack([s, n, 0.5 * s * s, s * n, 0.5 * n * n], axis=-1)
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(A * sw[:, None], node_vals[keep] * sw, rcond=None)
        bs, bn, css, csn, cnn = coef
        c0[i] = math.hypot(bs / r, bn / r)
        mu_tau[i] = css / (r * r)
        a_tn[i] = csn / (r * r)
        u_nn[i] = cnn / (r * r)
    return BoundaryExpansionReport(
        t=ts, points=feet, c0=c0, mu_tau=mu_tau, u_nn=u_nn, a_tau_nu=a_tn, kappa=kappas
    )


def gauss_map_measure(curve: DomainCurve, eps: float, n: int = 8192) -> float:
    """Arc measure on the unit circle of the normal image of {|kappa| <= eps}.

    Computed by the area formula: integrate |kappa| ds over the low-curvature
    set; flat pieces contribute exactly zero.  eps = inf integrates over the
    whole curve (total turning, 2*pi for convex curves).
    """
    if eps < 0.0:
        raise ValueError("curvature threshold must be nonnegative")
    ts = (np.arange(n) + 0.5) / n
    kap = curvature(curve, ts)
    speed = np.linalg.norm(curve.velocity(ts), axis=-1)
    mask = np.abs(kap) <= eps
    if not mask.any():
        return 0.0
    contrib = np.abs(kap[mask]) * speed[mask] / n
    return float(contrib.sum())


@dataclass
class UnnReport:
    """Worst (largest) normal second derivative over boundary samples."""

    worst: float
    values: np.ndarray
    passed: bool


def u_nn_check(field: Field, curve: DomainCurve, samples: int = 64,
               tol_geom: float = 1e-6) -> UnnReport:
    """Check u_nn < 0 at every boundary sample (nonincreasing source assumed).

    Returns the maximum of u_nn over the samples; the check passes iff that
    worst value sits strictly below -tol_geom.
    """
    rep = boundary_expansion_check(field, curve, samples)
    worst = float(rep.u_nn.max())
    return UnnReport(worst=worst, values=rep.u_nn, passed=worst < -tol_geom)


@dataclass
class SymmetryVerdict:
    """Aggregated per-direction moving-planes outcome."""

    verdict: str
    threshold: float
    reports: list

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("e_x,e_y,s_star,case,sup_w,min_w\n")
            for r in self.reports:
                fh.write(
                    f"{r.direction[0]:.12g},{r.direction[1]:.12g},{r.s_star:.12g},"
                    f"{r.case},{r.sup_w:.12g},{r.min_w:.12g}\n"
                )


MIN_DIRECTION_COVERAGE = 4


def symmetry_verdict(curve: DomainCurve, spec: OperatorSpec, f: SourceSpec,
                     n_directions: int, h: float, solve_params: SolveParams | None = None,
                     ds: float | None = None, w_threshold: float | None = None,
                     field: Field | None = None) -> SymmetryVerdict:
    """Run the moving-planes procedure over equally spaced directions.

    The verdict is consistent_with_ball iff every direction yields
    sup |w_{s*}| <= threshold; fewer than MIN_DIRECTION_COVERAGE directions
    can only yield insufficient_coverage.
    """
    if n_directions < 1:
        raise ValueError("need at least one direction")
    solve_params = solve_params or SolveParams()
    if field is None:
        grid = build_grid(curve, h)
        field = solve(spec, f, grid, solve_params)
    ds = ds if ds is not None else curve.diameter() / 2000.0
    threshold = w_threshold if w_threshold is not None else 10.0 * solve_params.tol
    reports = []
    for j in range(n_directions):
        ang = 2.0 * math.pi * j / n_directions
        e = np.array([math.cos(ang), math.sin(ang)])
        try:
            rep = critical_position(curve, e, ds)
            stats = reflect_and_compare(field, e, rep.s_star)
        except SerrinLabError as exc:
            raise SerrinLabError(f"moving planes failed in direction {j} ({ang:.4f} rad): {exc}") from exc
        rep.sup_w = stats.sup_w
        rep.min_w = stats.min_w
        rep.sup_abs_w = stats.sup_abs_w
        reports.append(rep)
    symmetric = all(r.sup_abs_w <= threshold for r in reports)
    if not symmetric:
        verdict = "not_ball"
    elif n_directions < MIN_DIRECTION_COVERAGE:
        verdict = "insufficient_coverage"
    else:
        verdict = "consistent_with_ball"
    return SymmetryVerdict(verdict=verdict, threshold=threshold, reports=reports)

"""Extremal Hessian operators on 2x2 symmetric matrices.

The operator family is F(M, p) = M^-(M) + s*k*p or M^+(M) + s*k*p with
s = +/-1, where M^- and M^+ are the minimal and maximal uniformly elliptic
operators with ellipticity constants 0 < lambda <= Lambda:

    M^-(M) = lambda * sum(mu_i > 0) + Lambda * sum(mu_i < 0)
    M^+(M) = Lambda * sum(mu_i > 0) + lambda * sum(mu_i < 0)

over the eigenvalues mu_i of M.  Everything here is exact closed-form
2-D arithmetic; all values are immutable and all functions pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

VARIANTS = ("pucci_minus", "pucci_plus")


@dataclass(frozen=True)
class SymMat2:
    """Symmetric 2x2 matrix stored as (a11, a12, a22)."""

    a11: float
    a12: float
    a22: float

    @staticmethod
    def diag(d1: float, d2: float) -> "SymMat2":
        return SymMat2(float(d1), 0.0, float(d2))

    @staticmethod
    def zero() -> "SymMat2":
        return SymMat2(0.0, 0.0, 0.0)

    @staticmethod
    def from_array(a) -> "SymMat2":
        a = np.asarray(a, dtype=float)
        if a.shape != (2, 2) or abs(a[0, 1] - a[1, 0]) > 1e-12 * (1.0 + abs(a[0, 1])):
            raise ValueError("expected a symmetric 2x2 array")
        return SymMat2(float(a[0, 0]), 0.5 * float(a[0, 1] + a[1, 0]), float(a[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a12

    def eigenvalues(self) -> tuple[float, float]:
        return eig2(self)

    def __add__(self, other: "SymMat2") -> "SymMat2":
        return SymMat2(self.a11 + other.a11, self.a12 + other.a12, self.a22 + other.a22)

    def __sub__(self, other: "SymMat2") -> "SymMat2":
        return SymMat2(self.a11 - other.a11, self.a12 - other.a12, self.a22 - other.a22)

    def __neg__(self) -> "SymMat2":
        return SymMat2(-self.a11, -self.a12, -self.a22)

    def scaled(self, t: float) -> "SymMat2":
        return SymMat2(t * self.a11, t * self.a12, t * self.a22)


def eig2(m: SymMat2) -> tuple[float, float]:
    """Eigenvalues of a symmetric 2x2 matrix, sorted mu1 <= mu2.

    Closed-form quadratic formula; the discriminant is clamped at zero so
    a double eigenvalue never produces sqrt of a negative roundoff residue.
    """
    mean = 0.5 * (m.a11 + m.a22)
    half_gap = 0.5 * (m.a11 - m.a22)
    disc = half_gap * half_gap + m.a12 * m.a12
    s = math.sqrt(max(disc, 0.0))
    return mean - s, mean + s


def _check_ellipticity(lam: float, Lam: float) -> None:
    if not (0.0 < lam <= Lam):
        raise ValueError(f"ellipticity constants must satisfy 0 < lambda <= Lambda, got ({lam}, {Lam})")


def pucci_minus(m: SymMat2, lam: float, Lam: float) -> float:
    """Minimal extremal operator: lambda on positive eigenvalues, Lambda on negative."""
    _check_ellipticity(lam, Lam)
    mu1, mu2 = eig2(m)
    pos = max(mu1, 0.0) + max(mu2, 0.0)
    neg = max(-mu1, 0.0) + max(-mu2, 0.0)
    return lam * pos - Lam * neg


def pucci_plus(m: SymMat2, lam: float, Lam: float) -> float:
    """Maximal extremal operator; satisfies pucci_plus(M) = -pucci_minus(-M)."""
    _check_ellipticity(lam, Lam)
    mu1, mu2 = eig2(m)
    pos = max(mu1, 0.0) + max(mu2, 0.0)
    neg = max(-mu1, 0.0) + max(-mu2, 0.0)
    return Lam * pos - lam * neg


@dataclass(frozen=True)
class OperatorSpec:
    """Extremal operator F(M, p) = M^{+/-}_{lam,Lam}(M) + grad_sign * k * p.

    grad_sign selects the sign in front of the (nonnegative) gradient term;
    k >= 0 is its coefficient.  F(0, 0) = 0 by construction.
    """

    variant: str = "pucci_minus"
    lam: float = 1.0
    Lam: float = 1.0
    k: float = 0.0
    grad_sign: int = -1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown operator variant {self.variant!r}")
        _check_ellipticity(self.lam, self.Lam)
        if self.k < 0.0:
            raise ValueError("gradient coefficient k must be nonnegative")
        if self.grad_sign not in (-1, 1):
            raise ValueError("grad_sign must be +1 or -1")

    @property
    def is_minus(self) -> bool:
        return self.variant == "pucci_minus"

    def pucci(self, m: SymMat2) -> float:
        if self.is_minus:
            return pucci_minus(m, self.lam, self.Lam)
        return pucci_plus(m, self.lam, self.Lam)


def eval_operator(spec: OperatorSpec, m: SymMat2, p: float) -> float:
    """Evaluate F(M, p) for the extremal family; p = |Du| must be nonnegative."""
    if p < 0.0:
        raise ValueError("gradient magnitude p must be nonnegative")
    return spec.pucci(m) + spec.grad_sign * spec.k * p


def rescale_operator(spec: OperatorSpec, R: float) -> OperatorSpec:
    """Spec of F_R(M, p) = F(R*M, R*p)/R.

    Both the extremal part and the gradient term are positively
    1-homogeneous, so the rescaled operator coincides with the original;
    an equal copy is returned after validating R.
    """
    if R <= 0.0:
        raise ValueError("rescaling factor R must be positive")
    return replace(spec)

"""Large-N phase-space analysis of the model.

The classical Hamiltonian on ``z in [2k-1, 1]`` and ``theta = 4 phi / N`` is

    H = lam z^2 + 2 (alpha - lam) z + lam - 2 alpha + beta + R(z) cos(theta),
    R(z) = sqrt(2 (1 - z)(z + c+)(z + c-)),   c+- = 1 +- 2k.

Fixed points on the theta = 0 and theta = pi lines solve f(z) = +-g(z) with
f(z) = lam z + alpha - lam and g = -R'/2. For k = 0 the edge z = -1 carries
extra fixed points where cos(theta) = 2 lam - alpha.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .exceptions import DomainError
from .model import SemiclassicalCouplings

__all__ = [
    "PhasePoint",
    "FixedPoint",
    "RegionLabel",
    "BoundaryCurve",
    "radical",
    "classical_energy",
    "energy_gradient",
    "hamilton_rhs",
    "energy_hessian",
    "g_value",
    "g_derivative",
    "branch_roots",
    "fixed_points",
    "region_classify",
    "boundary_curves",
    "lambda_zero_crossings",
    "level_curve_grid",
]

PHI0 = "phi0"
PHIPI = "phiPi"
ZBOUNDARY = "zBoundary"

DEGENERATE_DET = 1e-10
_EDGE_TOL = 1e-12


class PhasePoint(NamedTuple):
    z: float
    theta: float


@dataclass(frozen=True)
class FixedPoint:
    z: float
    theta: float  # nan marks a whole-edge extremum at z = -1 (any theta)
    branch: str
    character: str

    @property
    def point(self) -> PhasePoint:
        return PhasePoint(self.z, self.theta)


@dataclass(frozen=True)
class RegionLabel:
    label: str | None
    counts: dict
    ambiguous: bool = False


@dataclass(frozen=True)
class BoundaryCurve:
    samples: np.ndarray = field(repr=False)  # (n, 2) rows of (alpha, lam)
    branch_sign: int
    source: str  # "tangency" or "zBoundaryLine"
    z0: np.ndarray | None = field(default=None, repr=False)

    @property
    def alpha(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def lam(self) -> np.ndarray:
        return self.samples[:, 1]


def _z_min(k: float) -> float:
    return 2.0 * k - 1.0


def _check_k(k: float) -> float:
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise DomainError(f"fractional imbalance must satisfy 0 <= k < 1, got {k}")
    return k


def _radicand(z, k):
    return 2.0 * (1.0 - z) * (z + 1.0 + 2.0 * k) * (z + 1.0 - 2.0 * k)


def _check_domain(z, k, *, closed=True):
    z = np.asarray(z, dtype=float)
    lo = _z_min(k)
    tol = 1e-12
    if closed:
        bad = (z < lo - tol) | (z > 1.0 + tol)
    else:
        bad = (z <= lo) | (z >= 1.0)
    if np.any(bad):
        raise DomainError(f"z outside [{lo}, 1] for k={k}")
    return np.clip(z, lo, 1.0)


def radical(z, k):
    """R(z) = sqrt(2 (1-z)(z+c+)(z+c-)), zero on the domain edges."""
    k = _check_k(k)
    z = _check_domain(z, k)
    return np.sqrt(np.maximum(_radicand(z, k), 0.0))


def classical_energy(z, theta, couplings: SemiclassicalCouplings, k: float):
    lam, alpha, beta = couplings
    r = radical(z, k)
    z = np.asarray(z, dtype=float)
    out = lam * z**2 + 2.0 * (alpha - lam) * z + lam - 2.0 * alpha + beta + r * np.cos(theta)
    return out if out.ndim else float(out)


def _poly_p(z, k):
    # numerator of g: (z-1)(2z+2) + (z+c+)(z+c-)
    return 3.0 * z * z + 2.0 * z - 1.0 - 4.0 * k * k


def g_value(z, k):
    """g(z) = -R'(z)/2.

    Diverges at the edges of the domain for k > 0 (returned as +-inf); for
    k = 0 the limit at z = -1 is finite and equals -1.
    """
    k = _check_k(k)
    z = _check_domain(z, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        if k == 0.0:
            s = np.sqrt(2.0 * (1.0 - z))
            out = (3.0 * z - 1.0) / (2.0 * s)
        else:
            out = _poly_p(z, k) / (2.0 * np.sqrt(np.maximum(_radicand(z, k), 0.0)))
    out = np.where(z >= 1.0, np.inf, out)
    if k > 0.0:
        out = np.where(z <= _z_min(k), -np.inf, out)
    return out if out.ndim else float(out)


def g_derivative(z, k):
    k = _check_k(k)
    z = _check_domain(z, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        if k == 0.0:
            s = np.sqrt(2.0 * (1.0 - z))
            out = (5.0 - 3.0 * z) / (2.0 * s**3)
        else:
            r = np.sqrt(np.maximum(_radicand(z, k), 0.0))
            out = (3.0 * z + 1.0) / r + _poly_p(z, k) ** 2 / (2.0 * r**3)
    out = np.where(z >= 1.0, np.inf, out)
    if k > 0.0:
        out = np.where(z <= _z_min(k), np.inf, out)
    return out if out.ndim else float(out)


def energy_gradient(z, theta, couplings: SemiclassicalCouplings, k: float):
    """(dH/dz, dH/dtheta) at an interior point."""
    lam, alpha, _ = couplings
    k = _check_k(k)
    z = _check_domain(z, k, closed=False)
    f = lam * z + alpha - lam
    dz = 2.0 * (f - g_value(z, k) * np.cos(theta))
    dtheta = -radical(z, k) * np.sin(theta)
    return dz, dtheta


def hamilton_rhs(z, theta, couplings: SemiclassicalCouplings, k: float, n_total: int):
    """Equations of motion (dz/dt, dphi/dt) with theta = 4 phi / N.

    Raises DomainError on the domain edges, where the radical vanishes and
    the phase is ill-defined.
    """
    try:
        dhdz, dhdtheta = energy_gradient(z, theta, couplings, k)
    except DomainError as exc:
        raise DomainError(f"equations of motion are singular on the edge: {exc}") from None
    dz_dt = (4.0 / n_total) * dhdtheta
    dphi_dt = -dhdz
    return dz_dt, dphi_dt


def energy_hessian(z, theta, couplings: SemiclassicalCouplings, k: float) -> np.ndarray:
    """Second derivatives of H in (z, theta) at an interior point."""
    lam = couplings.lam
    k = _check_k(k)
    z = float(_check_domain(z, k, closed=False))
    c, s = math.cos(theta), math.sin(theta)
    hzz = 2.0 * (lam - g_derivative(z, k) * c)
    hzt = 2.0 * g_value(z, k) * s
    htt = -radical(z, k) * c
    return np.array([[hzz, hzt], [hzt, htt]])


def _character(hess: np.ndarray) -> str:
    det = float(np.linalg.det(hess))
    if abs(det) < DEGENERATE_DET:
        return "degenerate"
    if det < 0:
        return "saddle"
    return "minimum" if hess[0, 0] > 0 else "maximum"


def _grid(k: float, n_grid: int) -> np.ndarray:
    lo = _z_min(k)
    span = 1.0 - lo
    eps = _EDGE_TOL * span
    # Chebyshev spacing crowds points against the divergent edges
    s = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, n_grid)))
    z = lo + span * s
    z[0] = lo if k == 0.0 else lo + eps
    z[-1] = 1.0 - eps
    return z


def _g_scalar(z: float, k: float) -> float:
    if k == 0.0:
        return (3.0 * z - 1.0) / (2.0 * math.sqrt(2.0 * (1.0 - z)))
    return _poly_p(z, k) / (2.0 * math.sqrt(_radicand(z, k)))


def _scan_branch(couplings, k, sign, n_grid):
    """Roots of f - sign*g plus a flag for a near-touching without crossing."""
    lam, alpha, _ = couplings
    z = _grid(k, n_grid)
    h = lam * z + alpha - lam - sign * g_value(z, k)

    def fun(x):
        return lam * x + alpha - lam - sign * _g_scalar(x, k)

    roots = []
    for i in np.flatnonzero(h[:-1] * h[1:] <= 0.0):
        a, b = h[i], h[i + 1]
        if a == 0.0:
            # a root on the k = 0 edge belongs to the edge family
            if i > 0 or k > 0.0:
                roots.append(z[i])
        elif b != 0.0:
            r = brentq(fun, z[i], z[i + 1], xtol=1e-14, rtol=8.9e-16, maxiter=200)
            if k > 0.0 or r > z[0] + 1e-12:
                roots.append(r)
    if h[-1] == 0.0:
        roots.append(z[-1])

    inner = h[1:-1]
    a = np.abs(inner)
    local = (a[1:-1] <= a[:-2]) & (a[1:-1] <= a[2:])
    no_cross = (inner[:-2] * inner[1:-1] > 0) & (inner[1:-1] * inner[2:] > 0)
    scale = 1.0 + abs(lam) + abs(alpha)
    touching = bool(np.any(local & no_cross & (a[1:-1] < 1e-6 * scale)))
    return np.array(roots, dtype=float), touching


def branch_roots(
    couplings: SemiclassicalCouplings, k: float, sign: int, n_grid: int = 10_000
) -> np.ndarray:
    """Interior roots of f(z) = sign * g(z), by sign-change bracketing on a
    clustered grid followed by Brent refinement.

    For k = 0 a root sitting exactly on z = -1 is a bifurcation with the edge
    family and is not reported.
    """
    return _scan_branch(couplings, _check_k(k), sign, n_grid)[0]


def _edge_solutions(couplings: SemiclassicalCouplings):
    """theta solutions of cos(theta) = 2 lam - alpha on the k = 0 edge."""
    c = 2.0 * couplings.lam - couplings.alpha
    if abs(abs(c) - 1.0) <= 1e-12:
        return [0.0 if c > 0 else math.pi], "degenerate"
    if abs(c) < 1.0:
        t = math.acos(c)
        return [-t, t], "saddle"
    return [], None


def fixed_points(
    couplings: SemiclassicalCouplings, k: float, n_total: int | None = None, n_grid: int = 10_000
) -> list[FixedPoint]:
    """All fixed points, ordered by branch then z.

    ``n_total`` is accepted for symmetry with the other phase-space calls; the
    fixed-point set in (z, theta) does not depend on it.
    """
    return _fixed_points(couplings, _check_k(k), n_grid)[0]


def _fixed_points(couplings, k, n_grid):
    out = []
    touching = False
    for sign, branch, theta in ((1, PHI0, 0.0), (-1, PHIPI, math.pi)):
        roots, touch = _scan_branch(couplings, k, sign, n_grid)
        touching |= touch
        for z in roots:
            hess = energy_hessian(z, theta, couplings, k)
            out.append(FixedPoint(float(z), theta, branch, _character(hess)))
    if k == 0.0:
        thetas, character = _edge_solutions(couplings)
        for t in thetas:
            out.append(FixedPoint(-1.0, t, ZBOUNDARY, character))
        if not thetas:
            # H varies as 2 (z+1)(alpha - 2 lam + cos theta) off the edge
            q = couplings.alpha - 2.0 * couplings.lam
            out.append(FixedPoint(-1.0, math.nan, ZBOUNDARY, "minimum" if q > 0 else "maximum"))
    return out, touching


_K0_REGIONS = {
    (0, 1, 0): "I",
    (2, 1, 0): "II",
    (1, 1, 2): "III",
    (1, 0, 0): "IV",
    (1, 2, 0): "V",
}
_K_REGIONS = {(1, 1): "A", (3, 1): "B", (1, 3): "C"}


def region_classify(
    couplings: SemiclassicalCouplings, k: float, n_grid: int = 10_000
) -> RegionLabel:
    """Parameter-space region from the number of fixed points per branch.

    Points on (or numerically at) a bifurcation boundary are flagged
    ambiguous and labelled None when the count pattern is unrecognised.
    """
    k = _check_k(k)
    pts, touching = _fixed_points(couplings, k, n_grid)
    n0 = sum(p.branch == PHI0 for p in pts)
    npi = sum(p.branch == PHIPI for p in pts)
    ambiguous = any(p.character == "degenerate" for p in pts)
    ambiguous |= touching
    if k == 0.0:
        nb = sum(p.branch == ZBOUNDARY and not math.isnan(p.theta) for p in pts)
        counts = {PHI0: n0, PHIPI: npi, ZBOUNDARY: nb}
        label = _K0_REGIONS.get((n0, npi, nb))
    else:
        counts = {PHI0: n0, PHIPI: npi}
        label = _K_REGIONS.get((n0, npi))
    if label is None:
        ambiguous = True
    return RegionLabel(label, counts, ambiguous)


def boundary_curves(
    k: float,
    z_grid: Sequence[float] | np.ndarray,
    alpha_range: tuple[float, float] = (-20.0, 20.0),
    n_line: int = 401,
) -> list[BoundaryCurve]:
    """Bifurcation boundaries in the (alpha, lam) plane.

    Tangency of f with +-g at z0 gives lam = +-g'(z0) and
    alpha = +-g(z0) - lam (z0 - 1). For k = 0 the edge family adds the lines
    lam = (alpha + 1)/2 and lam = (alpha - 1)/2, sampled over ``alpha_range``.
    """
    k = _check_k(k)
    z0 = np.asarray(z_grid, dtype=float)
    lo = _z_min(k)
    if np.any(z0 <= lo) or np.any(z0 >= 1.0):
        raise DomainError(f"z_grid must lie strictly inside ({lo}, 1)")
    g = np.asarray(g_value(z0, k), dtype=float)
    dg = np.asarray(g_derivative(z0, k), dtype=float)
    curves = []
    for sign in (1, -1):
        lam = sign * dg
        alpha = sign * g - lam * (z0 - 1.0)
        curves.append(BoundaryCurve(np.column_stack([alpha, lam]), sign, "tangency", z0.copy()))
    if k == 0.0:
        a = np.linspace(alpha_range[0], alpha_range[1], n_line)
        # f(-1) = alpha - 2 lam meets g(-1) = -1 (phi0) or -g(-1) = 1 (phiPi)
        curves.append(BoundaryCurve(np.column_stack([a, (a + 1.0) / 2.0]), 1, "zBoundaryLine"))
        curves.append(BoundaryCurve(np.column_stack([a, (a - 1.0) / 2.0]), -1, "zBoundaryLine"))
    return curves


def lambda_zero_crossings(
    curves: Sequence[BoundaryCurve], alpha_range: tuple[float, float] | None = None
) -> list[float]:
    """alpha values where any boundary curve crosses lam = 0 (linear
    interpolation between samples; samples exactly at lam = 0 count once)."""
    out = []
    for curve in curves:
        a, lam = curve.alpha, curve.lam
        for i in range(len(lam)):
            if lam[i] == 0.0:
                out.append(float(a[i]))
            elif i + 1 < len(lam) and lam[i] * lam[i + 1] < 0.0:
                t = lam[i] / (lam[i] - lam[i + 1])
                out.append(float(a[i] + t * (a[i + 1] - a[i])))
    if alpha_range is not None:
        out = [x for x in out if alpha_range[0] <= x <= alpha_range[1]]
    return sorted(out)


def level_curve_grid(
    couplings: SemiclassicalCouplings, k: float, z_samples, theta_samples
) -> np.ndarray:
    """Classical energy on a (z, theta) grid, shape (len(z), len(theta))."""
    z = np.asarray(z_samples, dtype=float)
    theta = np.asarray(theta_samples, dtype=float)
    return classical_energy(z[:, None], theta[None, :], couplings, k)

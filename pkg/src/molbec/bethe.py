"""Bethe ansatz solution and the mapping onto a one-body Schrodinger problem.

An eigenstate with unnormalised coefficients rho_j defines the polynomial
G(u) = sum_j rho_j u^(m-j), which solves

    (A u^2 + Omega u) G'' + (B u + Omega (J + 1 - u^2)) G' + (Omega m u + C) G = E G.

Its roots obey the Bethe ansatz equations, and E = A m(m-1) + B m + C - Omega sum(u).
The substitution u = (Omega / 2A)(cos(sqrt(A) x) - 1) with psi = exp(f) G(u(x))
turns the ODE into -psi'' + V psi = E psi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import mpmath
import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq
from scipy.special import gammaln

from .exceptions import BetheError, CouplingError, DomainError, SectorError
from .model import AbcCoefficients, ModelParams, Sector, abc_coefficients, diagonal_energies

__all__ = [
    "OdeCoefficients",
    "BetheRoots",
    "SexticPotential",
    "StationaryPoint",
    "CriticalPointReport",
    "FDSpectrum",
    "ode_coefficients",
    "polynomial_g",
    "coefficients_from_state",
    "ode_residual",
    "bae_residuals",
    "energy_from_roots",
    "bethe_roots",
    "u_of_x",
    "gauge_derivative",
    "gauge_exponent",
    "potential_general",
    "potential_general_trig",
    "wavefunction_general",
    "potential_a0",
    "potential_no_scatter",
    "wavefunction_no_scatter",
    "fd_schrodinger",
    "critical_point_analysis",
    "degenerate_quadratic",
    "seed_quadratic",
    "threshold_correction",
    "potential_threshold_mu",
]

POLY_MAX_M = 100


class OdeCoefficients(NamedTuple):
    a: Polynomial
    b: Polynomial
    c: Polynomial


@dataclass(frozen=True)
class BetheRoots:
    roots: np.ndarray
    energy: float
    sector: Sector
    params: ModelParams = field(repr=False)
    max_residual: float = float("nan")

    @property
    def real_fraction(self) -> float:
        """Share of roots with negligible imaginary part (statistics only)."""
        if len(self.roots) == 0:
            return 1.0
        scale = 1.0 + np.abs(self.roots)
        return float(np.mean(np.abs(self.roots.imag) <= 1e-9 * scale))


def ode_coefficients(params: ModelParams, sector: Sector) -> OdeCoefficients:
    a_coef, b_coef, c_coef = abc_coefficients(params, sector)
    om = params.omega
    return OdeCoefficients(
        Polynomial([0.0, om, a_coef]),
        Polynomial([om * (sector.j_imbalance + 1), b_coef, -om]),
        Polynomial([c_coef, om * sector.m]),
    )


def polynomial_g(params: ModelParams, sector: Sector, e: float) -> np.ndarray:
    """Coefficients rho_0..rho_m (rho_0 = 1) of G, highest power first."""
    m, l = sector.m, sector.l
    if m > POLY_MAX_M:
        raise SectorError(f"polynomial_g is limited to m <= {POLY_MAX_M}, got m={m}")
    om = params.omega
    if om == 0.0:
        raise CouplingError("the coefficient recursion divides by Omega")
    u = diagonal_energies(params, sector)
    rho = np.zeros(m + 1)
    rho[0] = 1.0
    if m >= 1:
        rho[1] = (e - u[0]) / om
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(1, m):
            rho[j + 1] = ((e - u[j]) * rho[j] - om * (l + 1 - j) * (m + 1 - j) * rho[j - 1]) / (
                om * (j + 1)
            )
    if not np.all(np.isfinite(rho)):
        big = np.nanmax(np.abs(rho[np.isfinite(rho)]))
        raise BetheError(f"coefficient recursion overflowed (largest finite |rho| = {big:.3e})")
    return rho


def coefficients_from_state(amplitudes: np.ndarray, sector: Sector) -> np.ndarray:
    """Unnormalised coefficients rho_j = psi_j / sqrt((l-j)! (m-j)! j!), scaled
    to unit maximum. Only the ratios matter for the roots of G."""
    j = np.arange(sector.dim)
    logw = 0.5 * (gammaln(sector.l - j + 1) + gammaln(sector.m - j + 1) + gammaln(j + 1))
    psi = np.asarray(amplitudes, dtype=float)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(psi)) - logw
    finite = np.isfinite(logabs)
    if not finite.any():
        raise BetheError("state has no non-zero amplitude")
    logabs -= logabs[finite].max()
    return np.where(finite, np.sign(psi) * np.exp(np.where(finite, logabs, 0.0)), 0.0)


def ode_residual(params: ModelParams, sector: Sector, e: float, rho, u) -> np.ndarray:
    """a G'' + b G' + c G - E G at the points u."""
    ode = ode_coefficients(params, sector)
    g = Polynomial(np.asarray(rho, dtype=float)[::-1])
    u = np.asarray(u)
    return ode.a(u) * g.deriv(2)(u) + ode.b(u) * g.deriv(1)(u) + (ode.c(u) - e) * g(u)


def bae_residuals(roots, params: ModelParams, sector: Sector) -> np.ndarray:
    """b(u_q)/a(u_q) - sum_{p != q} 2/(u_p - u_q) for every root."""
    u = np.asarray(roots, dtype=complex)
    ode = ode_coefficients(params, sector)
    diff = u[None, :] - u[:, None]  # diff[q, p] = u_p - u_q
    np.fill_diagonal(diff, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        return ode.b(u) / ode.a(u) - (2.0 / diff).sum(axis=1)


def energy_from_roots(roots, params: ModelParams, sector: Sector) -> float:
    a_coef, b_coef, c_coef = abc_coefficients(params, sector)
    m = sector.m
    total = complex(np.sum(np.asarray(roots, dtype=complex)))
    return float(a_coef * m * (m - 1) + b_coef * m + c_coef - params.omega * total.real)


def _bae_jacobian(u, ode: OdeCoefficients) -> np.ndarray:
    a, b = ode.a(u), ode.b(u)
    da, db = ode.a.deriv()(u), ode.b.deriv()(u)
    diff = u[None, :] - u[:, None]
    np.fill_diagonal(diff, 1.0)
    inv2 = 2.0 / diff**2
    np.fill_diagonal(inv2, 0.0)
    jac = inv2.astype(complex)
    jac[np.diag_indices_from(jac)] = (db * a - b * da) / a**2 - inv2.sum(axis=1)
    return jac


def _newton_bae(u, params, sector, max_iter=50):
    ode = ode_coefficients(params, sector)
    best = u
    best_res = np.max(np.abs(bae_residuals(u, params, sector)))
    for _ in range(max_iter):
        res = bae_residuals(best, params, sector)
        try:
            step = np.linalg.solve(_bae_jacobian(best, ode), res)
        except np.linalg.LinAlgError:
            break
        trial = best - step
        trial_res = np.max(np.abs(bae_residuals(trial, params, sector)))
        if not np.isfinite(trial_res) or trial_res >= best_res:
            break
        best, best_res = trial, trial_res
        if best_res < 1e-14 * (1.0 + np.max(np.abs(best))):
            break
    return best, best_res


BAE_TOL = 1e-8
_FIELDS = ("u_aa", "u_bb", "u_cc", "u_ab", "u_ac", "u_bc", "mu_a", "mu_b", "mu_c")


def _roots_multiprecision(params: ModelParams, sector: Sector, e: float, dps: int, max_iter=400):
    """Roots of G from a recursion carried out at ``dps`` digits.

    The diagonal energies are rebuilt from the stored parameters at full
    precision so the recursion and the ODE agree exactly; e is re-converged
    on the end-point defect and the roots are found by Aberth iteration,
    seeded from double-precision companion roots.
    """
    l, m = sector.l, sector.m
    with mpmath.workdps(dps):
        p = {f: mpmath.mpf(getattr(params, f)) for f in _FIELDS}
        om = mpmath.mpf(params.omega)
        diag = []
        for j in range(m + 1):
            na, nb, nc = l - j, m - j, j
            diag.append(
                p["u_aa"] * na * na + p["u_bb"] * nb * nb + p["u_cc"] * nc * nc
                + p["u_ab"] * na * nb + p["u_ac"] * na * nc + p["u_bc"] * nb * nc
                + p["mu_a"] * na + p["mu_b"] * nb + p["mu_c"] * nc
            )

        def recursion(en):
            r = [mpmath.mpf(1), (en - diag[0]) / om]
            for j in range(1, m):
                r.append(((en - diag[j]) * r[j] - om * (l + 1 - j) * (m + 1 - j) * r[j - 1]) / (om * (j + 1)))
            return r

        def defect(en):
            r = recursion(en)
            return (diag[m] - en) * r[m] + om * (l - m + 1) * r[m - 1]

        e0 = mpmath.mpf(e)
        en = mpmath.findroot(defect, (e0, e0 + mpmath.mpf(2) ** -30 * (1 + abs(e0))),
                             solver="secant", verify=False)
        rho = recursion(en)
        scale = max(abs(c) for c in rho)
        seed = np.roots([float(c / scale) for c in rho])
        if len(seed) != m:
            radius = float(1 + max(abs(c / rho[0]) for c in rho[1:]))
            seed = radius * np.exp(2j * np.pi * (np.arange(m) + 0.25) / m)
        # a small asymmetric nudge keeps conjugate seeds from locking together
        z = [mpmath.mpc(complex(s)) + mpmath.mpc(0, 1e-9 * (q + 1)) for q, s in enumerate(seed)]
        deriv = [rho[k] * (m - k) for k in range(m)]
        tol = mpmath.mpf(10) ** (-(dps // 2))
        for _ in range(max_iter):
            worst = 0
            for q in range(m):
                ratio = mpmath.polyval(rho, z[q]) / mpmath.polyval(deriv, z[q])
                s = mpmath.fsum(1 / (z[q] - z[k]) for k in range(m) if k != q)
                w = ratio / (1 - ratio * s)
                z[q] -= w
                worst = max(worst, abs(w) / (1 + abs(z[q])))
            if worst < tol:
                break
        return np.array([complex(c) for c in z])


def bethe_roots(
    params: ModelParams,
    sector: Sector,
    e: float,
    coefficients: np.ndarray | None = None,
    refine: bool = True,
) -> BetheRoots:
    """Roots u_q of G for the eigenvalue e.

    Companion-matrix roots of the coefficients (from the recursion unless
    ``coefficients`` is given, e.g. via ``coefficients_from_state``) are
    polished by Newton iteration on the Bethe ansatz equations. When the
    polished residual still exceeds ``BAE_TOL`` the roots are recomputed in
    multiprecision arithmetic.
    """
    if sector.m == 0:
        return BetheRoots(np.zeros(0, dtype=complex), float(e), sector, params, 0.0)
    rho = polynomial_g(params, sector, e) if coefficients is None else np.asarray(coefficients)
    nz = np.flatnonzero(rho)
    if len(nz) == 0 or nz[0] != 0:
        raise BetheError("leading coefficient of G vanishes; degree is below m")
    u = np.roots(rho).astype(complex)
    if len(u) != sector.m:
        raise BetheError(f"expected {sector.m} roots, found {len(u)}")
    if refine:
        u, res = _newton_bae(u, params, sector)
        dps = 60
        while not res <= BAE_TOL and dps <= 240:
            # ill-conditioned monomial form: redo the whole construction at higher precision
            u, res = _newton_bae(_roots_multiprecision(params, sector, e, dps), params, sector)
            dps *= 2
    else:
        res = np.max(np.abs(bae_residuals(u, params, sector)))
    if not np.isfinite(res):
        raise BetheError("Bethe ansatz residuals are not finite after refinement")
    if len(u) > 1:
        gaps = np.abs(u[:, None] - u[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() < 1e-8:
            raise BetheError(f"repeated Bethe roots (separation {gaps.min():.2e})")
    order = np.lexsort((u.imag, u.real))
    return BetheRoots(u[order], float(e), sector, params, float(res))


# --- Schrodinger mapping ----------------------------------------------------


def _on_lattice(t) -> bool:
    """True if any t lies on pi Z, where the mapped potential is singular."""
    t = np.asarray(t, dtype=float)
    k = np.round(t / math.pi)
    return bool(np.any(np.abs(t - k * math.pi) <= 1e-12 * np.maximum(1.0, np.abs(t))))


def _sqrt_a(a_coef: float) -> float:
    if a_coef < 0.0:
        raise CouplingError("the trigonometric mapping needs A >= 0")
    return math.sqrt(a_coef)


def _sin_over(w, x):
    """sin(w x) / w, continuous at w = 0."""
    return x * np.sinc(w * x / np.pi)


def u_of_x(x, a_coef: float, omega: float):
    """u = (Omega / 2A)(cos(sqrt(A) x) - 1) = -(Omega / 4) (2 sin(sqrt(A) x / 2) / sqrt(A))^2,
    which gives -Omega x^2 / 4 at A = 0."""
    w = _sqrt_a(a_coef)
    half = _sin_over(w / 2.0, np.asarray(x, dtype=float))
    return -0.25 * omega * half**2


def _mapping_terms(x, abc: AbcCoefficients, omega: float, sector: Sector):
    """u, u', u'', u''' along x together with f' and f''."""
    a_coef, b_coef, _ = abc
    w = _sqrt_a(a_coef)
    x = np.asarray(x, dtype=float)
    u = u_of_x(x, a_coef, omega)
    cos_t = np.cos(w * x)
    s_over = _sin_over(w, x)
    du = -0.5 * omega * s_over
    d2u = -0.5 * omega * cos_t
    d3u = 0.5 * omega * a_coef * s_over
    b_u = omega * (sector.j_imbalance + 1 - u**2) + b_coef * u
    db_u = -2.0 * omega * u + b_coef
    # b(u) = -u'' - 2 u' f'
    num = -(b_u + d2u)
    den = 2.0 * du
    dnum = -(db_u * du + d3u)
    dden = 2.0 * d2u
    fp = num / den
    fpp = (dnum * den - num * dden) / den**2
    return u, fp, fpp


def gauge_derivative(x, abc: AbcCoefficients, omega: float, sector: Sector):
    """df/dx of the gauge factor exp(f) relating psi and G."""
    return _mapping_terms(x, abc, omega, sector)[1]


def gauge_exponent(x, abc: AbcCoefficients, omega: float, sector: Sector):
    """f(x), fixed by f(pi / (2 sqrt(A))) = 0 (A > 0 only)."""
    a_coef, b_coef, _ = abc
    if a_coef <= 0.0:
        raise CouplingError("gauge_exponent needs A > 0")
    w = math.sqrt(a_coef)
    a32 = a_coef**1.5
    p1 = omega**2 / (4.0 * a32)
    p2 = w * (sector.j_imbalance + 1) - b_coef / (2.0 * w) - omega**2 / (2.0 * a32)
    p3 = -w / 2.0 + omega**2 / (2.0 * a32) + b_coef / (2.0 * w)
    t = w * np.asarray(x, dtype=float)
    if np.any(np.sin(t) <= 0.0):
        raise DomainError("gauge_exponent is defined for 0 < sqrt(A) x < pi")
    return (-p1 * np.cos(t) + p2 * np.log(np.tan(t / 2.0)) + p3 * np.log(np.sin(t))) / w


def potential_general(x, abc: AbcCoefficients, omega: float, sector: Sector):
    """Schrodinger potential V = c(u) + f'' + f'^2 of the exact mapping.

    Evaluated from the mapping relations in sinc form, which stays accurate
    as A -> 0 where the expanded trigonometric form cancels catastrophically.
    """
    x = np.asarray(x, dtype=float)
    w = _sqrt_a(abc.a_coef)
    if _on_lattice(w * x) if w > 0 else np.any(x == 0.0):
        raise DomainError("potential is singular where sin(sqrt(A) x) = 0")
    u, fp, fpp = _mapping_terms(x, abc, omega, sector)
    return omega * sector.m * u + abc.c_coef + fpp + fp**2


def potential_general_trig(x, abc: AbcCoefficients, omega: float, sector: Sector):
    """Expanded trigonometric form of the same potential (A > 0).

    Use for moderate A only: individual terms scale like Omega^4 / A^3.
    """
    a, b, c = abc
    if a <= 0.0:
        raise CouplingError("the trigonometric form needs A > 0")
    l, m = sector.l, sector.m
    jj = l - m
    om2, om4 = omega**2, omega**4
    t = math.sqrt(a) * np.asarray(x, dtype=float)
    s, co = np.sin(t), np.cos(t)
    if _on_lattice(t):
        raise DomainError("potential is singular where sin(sqrt(A) x) = 0")
    const = (
        c
        + om2 / (2 * a) * (l - 2 * m + 2)
        - om4 / (2 * a**3)
        - a / 4
        + b * (0.5 - 3 * om2 / (4 * a**2) - b / (4 * a))
    )
    k_sin2 = om4 / (16 * a**3)
    k_cos = om2 / (2 * a) * (m + om2 / (2 * a**2) + b / (2 * a))
    k_csc2 = (
        3 * a / 4
        + a * (jj + 1) ** 2
        + om4 / (2 * a**3)
        + b * (b / (2 * a) + om2 / a**2)
        - (om2 / a + b) * (jj + 2)
    )
    k_cotcsc = (
        (om2 / a + b) * (jj + 2)
        - 2 * a * (jj + 1)
        - om4 / (2 * a**3)
        - b * (b / (2 * a) + om2 / a**2)
    )
    return const + k_sin2 * s**2 + k_cos * co + k_csc2 / s**2 + k_cotcsc * co / s**2


def wavefunction_general(x, roots: BetheRoots, omega: float):
    """exp(f(x)) prod_p (u(x) - u_p) for the general (A > 0) mapping."""
    abc = abc_coefficients(roots.params, roots.sector)
    u = u_of_x(x, abc.a_coef, omega)
    prod = np.prod(u[..., None] - roots.roots, axis=-1)
    out = np.exp(gauge_exponent(x, abc, omega, roots.sector)) * prod
    return out.real


def potential_a0(x, b_coef: float, c_coef: float, omega: float, n_total: int, j_imbalance: int):
    """A -> 0 limit of the mapped potential.

    V = C - B (J+1)/2 + (J^2 - 1/4)/x^2 + (B^2/16 - Omega^2 (N+2)/8) x^2
        + Omega^2 B x^4 / 32 + Omega^4 x^6 / 256
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("potential_a0 is defined for x > 0")
    n, j = n_total, j_imbalance
    return (
        c_coef
        - b_coef * (j + 1) / 2.0
        + (j * j - 0.25) / x**2
        + (b_coef**2 / 16.0 - omega**2 * (n + 2) / 8.0) * x**2
        + omega**2 * b_coef * x**4 / 32.0
        + omega**4 * x**6 / 256.0
    )


def potential_no_scatter(x, mu: float, omega: float, n_total: int, j_imbalance: int):
    """Potential of H = mu N_c + Omega (a+ b+ c + h.c.) written out directly."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("potential is defined for x > 0")
    n, j = n_total, j_imbalance
    return (
        mu * (n + 1) / 2.0
        + (j * j - 0.25) / x**2
        + (mu**2 - 2.0 * omega**2 * (n + 2)) / 16.0 * x**2
        - mu * omega**2 / 32.0 * x**4
        + omega**4 / 256.0 * x**6
    )


def wavefunction_no_scatter(x, roots: BetheRoots, mu: float, omega: float, j_imbalance: int):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("wavefunction is defined for x > 0")
    prod = np.prod(-omega * x[..., None] ** 2 / 4.0 - roots.roots, axis=-1)
    envelope = x ** (j_imbalance + 0.5) * np.exp(-(omega**2) * x**4 / 64.0 + mu * x**2 / 8.0)
    return (envelope * prod).real


# --- finite-difference cross-check ------------------------------------------


@dataclass(frozen=True)
class FDSpectrum:
    energies: np.ndarray
    x: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)  # columns, psi sampled on x
    decayed: bool = True


def fd_schrodinger(
    potential: Callable[[np.ndarray], np.ndarray],
    length: float,
    n_grid: int = 10_000,
    n_levels: int = 3,
    inverse_square: float | None = None,
) -> FDSpectrum:
    """Lowest eigenvalues of -psi'' + V psi on (0, length] with psi(length) = 0.

    Plain mode: second-order central differences on an even grid, Dirichlet at
    x = 1e-6 * length and at length.

    If ``inverse_square`` (the coefficient a >= -1/4 of a/x^2 inside V) is
    given, that term is split off and the operator is discretised as
    -(1/x)(x chi')' + nu^2/x^2 with psi = sqrt(x) chi and nu^2 = a + 1/4 on a
    cell-centred grid. This stays second-order accurate down to the critical
    a = -1/4, where plain Dirichlet differencing converges only
    logarithmically.
    """
    if n_levels < 1 or n_levels > n_grid:
        raise ValueError("need 1 <= n_levels <= n_grid")
    if inverse_square is None:
        eps = 1e-6 * length
        x = np.linspace(eps, length, n_grid + 2)[1:-1]
        h = x[1] - x[0]
        diag = 2.0 / h**2 + np.asarray(potential(x), dtype=float)
        off = np.full(n_grid - 1, -1.0 / h**2)
    else:
        if inverse_square < -0.25:
            raise CouplingError("inverse-square coefficient below -1/4 has no ground state")
        h = length / (n_grid + 0.5)
        x = (np.arange(1, n_grid + 1) - 0.5) * h
        nu2 = inverse_square + 0.25
        regular = np.asarray(potential(x), dtype=float) - inverse_square / x**2
        diag = 2.0 / h**2 + nu2 / x**2 + regular
        face = x[:-1] + 0.5 * h
        off = -face / (h**2 * np.sqrt(x[:-1] * x[1:]))
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))
    tail = max(1, n_grid // 100)
    peak = np.abs(v).max(axis=0)
    decayed = bool(np.all(np.abs(v[-tail:]).max(axis=0) <= 1e-4 * peak))
    return FDSpectrum(w, x, v, decayed)


# --- sextic potential critical points ----------------------------------------


@dataclass(frozen=True)
class SexticPotential:
    """V(x) = cen/x^2 + quad x^2 + quart x^4 + sext x^6 + offset, x > 0."""

    centrifugal: float
    quadratic: float
    quartic: float
    sextic: float
    offset: float = 0.0

    @classmethod
    def from_a0(cls, b_coef: float, c_coef: float, omega: float, n_total: int, j_imbalance: int):
        """Coefficients of the A = 0 potential (see ``potential_a0``)."""
        return cls(
            j_imbalance**2 - 0.25,
            b_coef**2 / 16.0 - omega**2 * (n_total + 2) / 8.0,
            omega**2 * b_coef / 32.0,
            omega**4 / 256.0,
            c_coef - b_coef * (j_imbalance + 1) / 2.0,
        )

    @classmethod
    def no_scattering(cls, mu: float, omega: float, n_total: int, j_imbalance: int):
        m = (n_total - j_imbalance) // 2
        return cls.from_a0(-mu, m * mu, omega, n_total, j_imbalance)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return (
            self.centrifugal / x**2
            + self.quadratic * x**2
            + self.quartic * x**4
            + self.sextic * x**6
            + self.offset
        )

    def derivative(self, x):
        return (
            -2.0 * self.centrifugal / x**3
            + 2.0 * self.quadratic * x
            + 4.0 * self.quartic * x**3
            + 6.0 * self.sextic * x**5
        )

    def second_derivative(self, x):
        return (
            6.0 * self.centrifugal / x**4
            + 2.0 * self.quadratic
            + 12.0 * self.quartic * x**2
            + 30.0 * self.sextic * x**4
        )

    def _derivative_scale(self, x):
        return (
            abs(2.0 * self.centrifugal / x**3)
            + abs(2.0 * self.quadratic * x)
            + abs(4.0 * self.quartic * x**3)
            + abs(6.0 * self.sextic * x**5)
        )

    def _curvature_scale(self, x):
        return (
            abs(6.0 * self.centrifugal / x**4)
            + abs(2.0 * self.quadratic)
            + abs(12.0 * self.quartic * x**2)
            + abs(30.0 * self.sextic * x**4)
        )


class StationaryPoint(NamedTuple):
    x: float
    value: float
    kind: str  # "minimum", "maximum" or "degenerate"


@dataclass(frozen=True)
class CriticalPointReport:
    points: list
    bifurcation: bool
    degenerate_x: float | None
    critical_quadratic: float | None  # quadratic coupling where a degenerate point forms


def _positive_quadratic_roots(a2: float, a1: float, a0: float) -> list:
    """Positive roots of a2 y^2 + a1 y + a0 (a2 > 0), cancellation-free."""
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0.0:
        return []
    q = -0.5 * (a1 + math.copysign(math.sqrt(disc), a1))
    roots = [q / a2]
    if q != 0.0:
        roots.append(a0 / q)
    return sorted({r for r in roots if r > 0.0})


def _positive_quartic_roots(cen: float, quad: float, quart: float, sext: float) -> list:
    """Positive roots of q(y) = 3D y^4 + 2C y^3 + B y^2 - A.

    q'(y) = 2y (6D y^2 + 3C y + B), so q is monotone between the positive
    roots of that quadratic; each sign change is bracketed and solved. A
    critical value of q that vanishes to rounding is kept as a double root.
    """

    def q(y):
        return ((3.0 * sext * y + 2.0 * quart) * y + quad) * y * y - cen

    def size(y):
        return ((3.0 * sext * y + 2.0 * quart) * y + abs(quad)) * y * y + abs(cen)

    crit = _positive_quadratic_roots(6.0 * sext, 3.0 * quart, quad)
    upper = 1.0 + max(abs(2.0 * quart), abs(quad), abs(cen)) / (3.0 * sext)
    knots = [0.0] + [c for c in crit if c < upper] + [upper]
    found = []
    for lo, hi in zip(knots, knots[1:]):
        qlo, qhi = q(lo), q(hi)
        if qlo == 0.0 and lo > 0.0:
            found.append(lo)
        elif qlo * qhi < 0.0:
            found.append(brentq(q, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=5000))
    for c in crit:
        if abs(q(c)) <= 1e-14 * size(c) and all(abs(c - y) > 1e-10 * c for y in found):
            found.append(c)
    return sorted(found)


def critical_point_analysis(p: SexticPotential, degenerate_tol: float = 1e-8) -> CriticalPointReport:
    """Stationary points of the sextic potential on x >= 0.

    With y = x^2, x^3 V'(x) / 2 = 3D y^4 + 2C y^3 + B y^2 - A, so the
    stationary points are the positive roots of that quartic, located by
    bracketing between its turning points. When A = 0 the
    origin is also stationary (V is even) and becomes degenerate at B = 0.
    """
    if p.quartic <= 0.0 or p.sextic <= 0.0:
        raise CouplingError("critical point analysis assumes positive quartic and sextic terms")
    points = []
    degenerate_x = None
    if p.centrifugal == 0.0:
        kind = "degenerate" if p.quadratic == 0.0 else ("minimum" if p.quadratic > 0 else "maximum")
        points.append(StationaryPoint(0.0, float(p.offset), kind))
        if kind == "degenerate":
            degenerate_x = 0.0
        # V'(x) / 2x = B + 2C y + 3D y^2
        found = _positive_quadratic_roots(3.0 * p.sextic, 2.0 * p.quartic, p.quadratic)
    else:
        found = _positive_quartic_roots(p.centrifugal, p.quadratic, p.quartic, p.sextic)
    for y in sorted(found):
        x = math.sqrt(y)
        curv = float(p.second_derivative(x))
        if abs(curv) <= degenerate_tol * p._curvature_scale(x):
            kind = "degenerate"
            degenerate_x = x
        else:
            kind = "minimum" if curv > 0 else "maximum"
        points.append(StationaryPoint(x, float(p(x)), kind))
    # a nearly-double root shows up as two close stationary points; merge them
    merged = []
    for pt in points:
        prev = merged[-1] if merged else None
        if prev is not None and pt.x > 0 and pt.x - prev.x <= math.sqrt(degenerate_tol) * pt.x:
            x = 0.5 * (prev.x + pt.x)
            merged[-1] = StationaryPoint(x, float(p(x)), "degenerate")
            degenerate_x = x
        else:
            merged.append(pt)
    points = merged
    if p.centrifugal > 0.0:
        critical = None
    elif p.centrifugal == 0.0:
        critical = 0.0
    else:
        critical = degenerate_quadratic(p.centrifugal, p.quartic, p.sextic)[0]
    return CriticalPointReport(points, degenerate_x is not None, degenerate_x, critical)


def seed_quadratic(centrifugal: float, quartic: float) -> float:
    """Small-|B| estimate B = 3 (A C^2)^(1/3) of the degenerate quadratic coupling."""
    return 3.0 * math.copysign(abs(centrifugal * quartic**2) ** (1.0 / 3.0), centrifugal)


def degenerate_quadratic(centrifugal: float, quartic: float, sextic: float) -> tuple[float, float]:
    """Exact quadratic coupling B* and location x* of the degenerate stationary point.

    V' = V'' = 0 reduces to B = -3C y - 6D y^2 and A + C y^3 + 3D y^4 = 0
    (y = x^2); the latter is monotone in y > 0 and has a single root for A < 0.
    """
    if centrifugal >= 0.0:
        raise CouplingError("a degenerate stationary point at x > 0 needs a negative centrifugal term")
    if quartic <= 0.0 or sextic <= 0.0:
        raise CouplingError("quartic and sextic coefficients must be positive")

    def h(y):
        return centrifugal + quartic * y**3 + 3.0 * sextic * y**4

    hi = 1.0
    while h(hi) < 0.0:
        hi *= 2.0
    y = brentq(h, 0.0, hi, xtol=1e-15, rtol=8.9e-16)
    return -3.0 * quartic * y - 6.0 * sextic * y * y, math.sqrt(y)


def threshold_correction(n_total: int, omega: float) -> float:
    """mu* = -Omega sqrt(2(N+2)) + (3 Omega / 2)(2(N+2))^(-1/6)."""
    if n_total < 2:
        raise SectorError("threshold correction needs N >= 2")
    if omega <= 0.0:
        raise CouplingError("threshold correction needs Omega > 0")
    s = 2.0 * (n_total + 2)
    return -omega * math.sqrt(s) + 1.5 * omega * s ** (-1.0 / 6.0)


def potential_threshold_mu(n_total: int, omega: float, j_imbalance: int = 0) -> float:
    """mu at which the no-scattering potential develops its degenerate
    stationary point, solved without the small-B approximation."""
    if j_imbalance != 0:
        raise CouplingError("the potential only bifurcates for J = 0")

    def mismatch(mu):
        p = SexticPotential.no_scattering(mu, omega, n_total, 0)
        return p.quadratic - degenerate_quadratic(p.centrifugal, p.quartic, p.sextic)[0]

    centre = -omega * math.sqrt(2.0 * (n_total + 2))
    return brentq(mismatch, 1.5 * centre, 0.5 * centre, xtol=1e-13, rtol=1e-14)

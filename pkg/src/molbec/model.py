"""Model parameters, conserved sectors and matrix elements of the three-mode
atom-molecule Hamiltonian

    H = sum_ij U_ij N_i N_j + sum_i mu_i N_i + Omega (a+ b+ c + c+ b a)

with atomic modes ``a``, ``b`` and molecular mode ``c``. The total atom number
N = N_a + N_b + 2 N_c and the imbalance J = N_a - N_b are conserved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from .exceptions import CouplingError, SectorError

__all__ = [
    "ModelParams",
    "Sector",
    "SemiclassicalCouplings",
    "AbcCoefficients",
    "sector_new",
    "u_diag",
    "diagonal_energies",
    "abc_coefficients",
    "hopping",
    "hopping_amplitudes",
    "semiclassical_couplings",
]


@dataclass(frozen=True)
class ModelParams:
    """Coupling constants of the Hamiltonian (energies, hbar = 1)."""

    u_aa: float = 0.0
    u_bb: float = 0.0
    u_cc: float = 0.0
    u_ab: float = 0.0
    u_ac: float = 0.0
    u_bc: float = 0.0
    mu_a: float = 0.0
    mu_b: float = 0.0
    mu_c: float = 0.0
    omega: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise CouplingError(f"{f.name} must be a real number, got {value!r}") from None
            if not math.isfinite(value):
                raise CouplingError(f"{f.name} must be finite, got {value!r}")
            object.__setattr__(self, f.name, value)

    @classmethod
    def no_scattering(cls, mu: float, omega: float = 1.0) -> "ModelParams":
        """H = mu N_c + Omega (a+ b+ c + c+ b a)."""
        return cls(mu_c=mu, omega=omega)

    @classmethod
    def from_alpha(
        cls, alpha: float, n_total: int, omega: float = 1.0, lam: float = 0.0
    ) -> "ModelParams":
        """Parameters realising semi-classical couplings (alpha, lambda).

        Uses ``mu_c = -alpha * Omega * sqrt(2N)`` and, for non-zero lambda, the
        molecular self-scattering ``U_cc = 4 Omega lambda / sqrt(2N)``, which
        shifts lambda without touching alpha.
        """
        if n_total <= 0:
            raise SectorError("n_total must be positive")
        root = math.sqrt(2.0 * n_total)
        return cls(mu_c=-alpha * omega * root, u_cc=4.0 * omega * lam / root, omega=omega)

    def swap_ab(self) -> "ModelParams":
        """Relabel the two atomic species."""
        return replace(
            self,
            u_aa=self.u_bb,
            u_bb=self.u_aa,
            u_ac=self.u_bc,
            u_bc=self.u_ac,
            mu_a=self.mu_b,
            mu_b=self.mu_a,
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Sector:
    """Conserved quantum numbers (N, J) fixing the (m+1)-dimensional basis
    ``|l-j; m-j; j>``, j = 0..m."""

    n_total: int
    j_imbalance: int

    def __post_init__(self):
        for name in ("n_total", "j_imbalance"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise SectorError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        n, j = self.n_total, self.j_imbalance
        if n < 0:
            raise SectorError(f"total atom number must be non-negative, got N={n}")
        if j < 0:
            raise SectorError(
                f"imbalance must be non-negative, got J={j}; swap the a/b labels instead"
            )
        if j > n:
            raise SectorError(f"imbalance J={j} exceeds total atom number N={n}")
        if (n - j) % 2:
            raise SectorError(f"N - J must be even, got N={n}, J={j}")

    @property
    def l(self) -> int:
        return (self.n_total + self.j_imbalance) // 2

    @property
    def m(self) -> int:
        return (self.n_total - self.j_imbalance) // 2

    @property
    def k(self) -> float:
        """Fractional imbalance J/N (0 for the empty sector)."""
        return self.j_imbalance / self.n_total if self.n_total else 0.0

    @property
    def dim(self) -> int:
        return self.m + 1

    def occupations(self, j):
        """Mode occupations (n_a, n_b, n_c) of basis state j."""
        return self.l - j, self.m - j, j


def sector_new(n_total: int, j_imbalance: int) -> Sector:
    return Sector(n_total, j_imbalance)


class SemiclassicalCouplings(NamedTuple):
    lam: float
    alpha: float
    beta: float


class AbcCoefficients(NamedTuple):
    a_coef: float
    b_coef: float
    c_coef: float


def _check_index(sector: Sector, j, lo: int) -> int:
    if isinstance(j, bool) or int(j) != j:
        raise SectorError(f"basis index must be an integer, got {j!r}")
    j = int(j)
    if not lo <= j <= sector.m:
        raise SectorError(f"basis index j={j} outside [{lo}, {sector.m}]")
    return j


def diagonal_energies(params: ModelParams, sector: Sector) -> np.ndarray:
    """Eigenvalues of the number-operator part U on every basis state."""
    p = params
    j = np.arange(sector.dim, dtype=float)
    na, nb, nc = sector.l - j, sector.m - j, j
    return (
        p.u_aa * na**2
        + p.u_bb * nb**2
        + p.u_cc * nc**2
        + p.u_ab * na * nb
        + p.u_ac * na * nc
        + p.u_bc * nb * nc
        + p.mu_a * na
        + p.mu_b * nb
        + p.mu_c * nc
    )


def u_diag(params: ModelParams, sector: Sector, j: int) -> float:
    j = _check_index(sector, j, 0)
    p = params
    na, nb, nc = sector.occupations(j)
    return (
        p.u_aa * na * na
        + p.u_bb * nb * nb
        + p.u_cc * nc * nc
        + p.u_ab * na * nb
        + p.u_ac * na * nc
        + p.u_bc * nb * nc
        + p.mu_a * na
        + p.mu_b * nb
        + p.mu_c * nc
    )


def abc_coefficients(params: ModelParams, sector: Sector) -> AbcCoefficients:
    """Coefficients with U_j = A (m-j)(m-j-1) + B (m-j) + C.

    Obtained by expanding U in s = m - j, where n_a = l - m + s, n_b = s and
    n_c = m - s.
    """
    p = params
    l, m = sector.l, sector.m
    a = p.u_aa + p.u_bb + p.u_cc + p.u_ab - p.u_ac - p.u_bc
    b = (
        (1 + 2 * l - 2 * m) * p.u_aa
        + p.u_bb
        + (1 - 2 * m) * p.u_cc
        + (1 + l - m) * p.u_ab
        + (2 * m - l - 1) * p.u_ac
        + (m - 1) * p.u_bc
        + p.mu_a
        + p.mu_b
        - p.mu_c
    )
    c = (
        (l - m) ** 2 * p.u_aa
        + m * (l - m) * p.u_ac
        + m * m * p.u_cc
        + (l - m) * p.mu_a
        + m * p.mu_c
    )
    return AbcCoefficients(float(a), float(b), float(c))


def hopping(sector: Sector, omega: float, j: int) -> float:
    """Matrix element <j-1| Omega a+ b+ c |j> between normalised basis states."""
    j = _check_index(sector, j, 1)
    return omega * math.sqrt(j * (sector.l - j + 1) * (sector.m - j + 1))


def hopping_amplitudes(sector: Sector, omega: float) -> np.ndarray:
    """All off-diagonal elements t_1..t_m."""
    j = np.arange(1, sector.dim, dtype=float)
    return omega * np.sqrt(j * (sector.l - j + 1) * (sector.m - j + 1))


def semiclassical_couplings(params: ModelParams, sector: Sector) -> SemiclassicalCouplings:
    """Effective couplings (lambda, alpha, beta) of the large-N phase-space
    Hamiltonian at fixed N and k."""
    p = params
    n = sector.n_total
    if p.omega == 0.0:
        raise CouplingError("semi-classical couplings need Omega != 0")
    if n <= 0:
        raise SectorError("semi-classical couplings need N > 0")
    k = sector.k
    scale = math.sqrt(2.0 * n) / p.omega
    lam = scale * (p.u_aa + p.u_bb + p.u_cc + p.u_ab - p.u_ac - p.u_bc) / 4.0
    alpha = scale * (
        (1 + k) / 2 * p.u_aa
        + (1 - k) / 2 * p.u_bb
        + p.u_ab / 2
        - (1 + k) / 4 * p.u_ac
        - (1 - k) / 4 * p.u_bc
        + (p.mu_a + p.mu_b - p.mu_c) / (2.0 * n)
    )
    beta = scale * (
        (1 + k) ** 2 * p.u_aa
        + (1 - k) ** 2 * p.u_bb
        + (1 - k * k) * p.u_ab
        + 2.0 / n * ((1 + k) * p.mu_a + (1 - k) * p.mu_b)
    )
    return SemiclassicalCouplings(lam, alpha, beta)

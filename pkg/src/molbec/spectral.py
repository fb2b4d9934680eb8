"""Exact diagonalisation inside a conserved (N, J) sector.

In the normalised basis ``|l-j; m-j; j>`` the Hamiltonian is a real symmetric
tridiagonal matrix with diagonal U_j and off-diagonal
``t_j = Omega sqrt(j (l-j+1)(m-j+1))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .exceptions import DegenerateGroundStateError, MolbecError, SectorError
from .model import ModelParams, Sector, diagonal_energies, hopping_amplitudes

__all__ = [
    "TridiagonalOperator",
    "SpectralDecomposition",
    "QuantumState",
    "build_tridiagonal",
    "eigendecompose",
    "ground_state",
    "lowest_state",
    "basis_state",
    "char_poly_eval",
    "CHAR_POLY_MAX_M",
]

CHAR_POLY_MAX_M = 60


@dataclass(frozen=True)
class TridiagonalOperator:
    diag: np.ndarray
    offdiag: np.ndarray
    sector: Sector | None = None

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or e.ndim != 1 or len(d) < 1 or len(e) != len(d) - 1:
            raise ValueError(
                f"inconsistent tridiagonal shapes: diag {d.shape}, offdiag {e.shape}"
            )
        if self.sector is not None and len(d) != self.sector.dim:
            raise SectorError(f"diag length {len(d)} != sector dimension {self.sector.dim}")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def dim(self) -> int:
        return len(self.diag)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out

    def norm(self) -> float:
        """Cheap upper bound on the spectral norm (max absolute row sum)."""
        rows = np.abs(self.diag).copy()
        rows[:-1] += np.abs(self.offdiag)
        rows[1:] += np.abs(self.offdiag)
        return float(rows.max())


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)  # columns, amplitudes on j = 0..m
    sector: Sector | None = None

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class QuantumState:
    amplitudes: np.ndarray
    sector: Sector

    def __post_init__(self):
        a = np.asarray(self.amplitudes)
        if a.ndim != 1 or len(a) != self.sector.dim:
            raise SectorError(
                f"state has {a.shape} amplitudes, sector dimension is {self.sector.dim}"
            )
        object.__setattr__(self, "amplitudes", a)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def build_tridiagonal(params: ModelParams, sector: Sector) -> TridiagonalOperator:
    return TridiagonalOperator(
        diagonal_energies(params, sector), hopping_amplitudes(sector, params.omega), sector
    )


def _fix_sign(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every column positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eigendecompose(op: TridiagonalOperator) -> SpectralDecomposition:
    """Full spectrum (ascending) with orthonormal eigenvectors."""
    if op.dim == 1:
        return SpectralDecomposition(op.diag.copy(), np.ones((1, 1)), op.sector)
    try:
        w, v = eigh_tridiagonal(op.diag, op.offdiag)
    except LinAlgError as exc:
        raise MolbecError(f"tridiagonal eigensolver failed to converge: {exc}") from exc
    return SpectralDecomposition(w, _fix_sign(v), op.sector)


def _gap_tolerance(e0: float) -> float:
    return 1e-10 * (1.0 + abs(e0))


def ground_state(decomp: SpectralDecomposition) -> QuantumState:
    """Normalised, sign-fixed lowest eigenvector; rejects a degenerate minimum."""
    w = decomp.eigenvalues
    if len(w) > 1:
        gap = w[1] - w[0]
        if gap <= _gap_tolerance(w[0]):
            raise DegenerateGroundStateError(gap, _gap_tolerance(w[0]))
    v = decomp.eigenvectors[:, 0]
    v = v / np.linalg.norm(v)
    return QuantumState(v, decomp.sector)


def lowest_state(op: TridiagonalOperator) -> tuple[float, QuantumState]:
    """Ground energy and state without computing the whole spectrum.

    Same contract and sign convention as ``ground_state(eigendecompose(op))``.
    """
    if op.dim == 1:
        return float(op.diag[0]), QuantumState(np.ones(1), op.sector)
    w, v = eigh_tridiagonal(op.diag, op.offdiag, select="i", select_range=(0, 1))
    gap = w[1] - w[0]
    if gap <= _gap_tolerance(w[0]):
        raise DegenerateGroundStateError(gap, _gap_tolerance(w[0]))
    vec = _fix_sign(v[:, :1])[:, 0]
    return float(w[0]), QuantumState(vec / np.linalg.norm(vec), op.sector)


def basis_state(sector: Sector, j: int) -> QuantumState:
    """Fock state ``|l-j; m-j; j>`` as a normalised sector vector."""
    if not 0 <= j <= sector.m:
        raise SectorError(f"basis index j={j} outside [0, {sector.m}]")
    a = np.zeros(sector.dim)
    a[j] = 1.0
    return QuantumState(a, sector)


def char_poly_eval(params: ModelParams, sector: Sector, e_trial):
    """Defect of the last coefficient recursion at trial energy E.

    Runs rho_0 = 1,
        Omega rho_1 = (E - U_0) rho_0,
        Omega (j+1) rho_{j+1} = (E - U_j) rho_j - Omega (l+1-j)(m+1-j) rho_{j-1},
    on the unnormalised coefficients and returns
    (U_m - E) rho_m + Omega (l-m+1) rho_{m-1}. The pair (rho_{j-1}, rho_j) is
    rescaled by powers of two whenever it grows large, which keeps the sign
    and the zero set exact. For Omega = 0 the product of (U_j - E) is returned.
    An array of trial energies is evaluated elementwise.
    """
    m, l = sector.m, sector.l
    if m > CHAR_POLY_MAX_M:
        raise SectorError(f"char_poly_eval is limited to m <= {CHAR_POLY_MAX_M}, got m={m}")
    u = diagonal_energies(params, sector)
    omega = params.omega
    e = np.asarray(e_trial, dtype=float)
    scalar = e.ndim == 0
    e = np.atleast_1d(e)
    if omega == 0.0:
        out = np.prod(u[:, None] - e[None, :], axis=0)
    elif m == 0:
        out = u[0] - e
    else:
        prev, cur = np.ones_like(e), (e - u[0]) / omega
        for j in range(1, m):
            nxt = ((e - u[j]) * cur - omega * (l + 1 - j) * (m + 1 - j) * prev) / (omega * (j + 1))
            prev, cur = cur, nxt
            big = np.maximum(np.abs(prev), np.abs(cur))
            off = (big > 1e100) | ((big > 0.0) & (big < 1e-100))
            if off.any():
                shift = -np.frexp(big[off])[1]
                prev[off], cur[off] = np.ldexp(prev[off], shift), np.ldexp(cur[off], shift)
        out = (u[m] - e) * cur + omega * (l - m + 1) * prev
    return float(out[0]) if scalar else out

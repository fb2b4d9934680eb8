"""Ground-state expectation values, exact time evolution and fidelity curves."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import DegenerateGroundStateError, SectorError
from .model import ModelParams, Sector
from .spectral import (
    QuantumState,
    SpectralDecomposition,
    TridiagonalOperator,
    build_tridiagonal,
    lowest_state,
)

__all__ = [
    "TimeSeries",
    "PreTransition",
    "OverlapCurve",
    "expectation_z",
    "expectation_nc",
    "energy_expectation",
    "evolve",
    "z_trace",
    "default_times",
    "ground_overlap",
    "fidelity_curve",
    "pre_transitions",
    "alpha_lambda_params",
]


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray

    @property
    def peak_to_peak(self) -> float:
        return float(np.ptp(self.values))


class PreTransition(NamedTuple):
    coupling: float
    overlap: float
    refined: bool
    prominence: float


@dataclass(frozen=True)
class OverlapCurve:
    delta_rel: float
    couplings: np.ndarray
    overlaps: np.ndarray  # NaN where a ground state was degenerate
    degenerate: np.ndarray = field(repr=False)
    minima: list = field(default_factory=list)


def _z_weights(sector: Sector) -> np.ndarray:
    j = np.arange(sector.dim)
    return (sector.n_total - 4.0 * j) / sector.n_total


def expectation_z(state: QuantumState) -> float:
    """<(N_a + N_b - 2 N_c)> / N."""
    if state.sector.n_total == 0:
        raise SectorError("z is undefined for N = 0")
    return float(state.probabilities @ _z_weights(state.sector))


def expectation_nc(state: QuantumState) -> float:
    return float(state.probabilities @ np.arange(state.sector.dim))


def energy_expectation(op: TridiagonalOperator, state: QuantumState) -> float:
    psi = state.amplitudes
    return float(np.real(np.vdot(psi, op.matvec(psi))))


def _check_same_sector(decomp: SpectralDecomposition, state: QuantumState):
    if decomp.sector is not None and decomp.sector != state.sector:
        raise SectorError(f"state lives in {state.sector}, decomposition in {decomp.sector}")
    if decomp.dim != state.sector.dim:
        raise SectorError("state and decomposition dimensions differ")


def evolve(decomp: SpectralDecomposition, initial: QuantumState, t: float) -> QuantumState:
    """exp(-i H t) applied through the eigenbasis."""
    _check_same_sector(decomp, initial)
    v = decomp.eigenvectors
    coeff = v.T @ initial.amplitudes
    return QuantumState(v @ (coeff * np.exp(-1j * decomp.eigenvalues * t)), initial.sector)


def default_times(t_max: float = 50.0, count: int = 2000) -> np.ndarray:
    return np.linspace(0.0, t_max, count)


def z_trace(decomp: SpectralDecomposition, initial: QuantumState, times=None) -> TimeSeries:
    """<z(t)> on a time grid, evaluated in blocks to bound memory."""
    _check_same_sector(decomp, initial)
    times = default_times() if times is None else np.asarray(times, dtype=float)
    v = decomp.eigenvectors
    coeff = v.T @ initial.amplitudes
    weights = _z_weights(initial.sector)
    out = np.empty(len(times))
    block = max(1, 2_000_000 // max(1, decomp.dim))
    for start in range(0, len(times), block):
        t = times[start : start + block]
        psi = v @ (coeff[:, None] * np.exp(-1j * np.outer(decomp.eigenvalues, t)))
        out[start : start + block] = weights @ (psi.real**2 + psi.imag**2)
    zero = times == 0.0
    if zero.any():
        out[zero] = expectation_z(initial)
    return TimeSeries(times, out)


def alpha_lambda_params(alpha: float, lam: float, n_total: int, omega: float = 1.0) -> ModelParams:
    return ModelParams.from_alpha(alpha, n_total, omega=omega, lam=lam)


def ground_overlap(params_at: Callable[[float], ModelParams], sector: Sector, delta: float, delta_rel: float) -> float:
    """W = |<Psi(delta (1 - D)) | Psi(delta (1 + D))>|; NaN if either ground
    state is degenerate."""
    try:
        _, lo = lowest_state(build_tridiagonal(params_at(delta * (1.0 - delta_rel)), sector))
        _, hi = lowest_state(build_tridiagonal(params_at(delta * (1.0 + delta_rel)), sector))
    except DegenerateGroundStateError:
        return float("nan")
    return float(min(1.0, abs(np.vdot(lo.amplitudes, hi.amplitudes))))


def _refine(w, a, b, c, wb, tol):
    """Golden-section search inside the bracket a < b < c with w(b) below both ends."""
    res = minimize_scalar(w, bracket=(a, b, c), method="golden", tol=tol)
    x = float(res.x)
    if not (a <= x <= c) or not np.isfinite(res.fun) or res.fun > wb:
        return b, wb, False
    return x, float(res.fun), True


def pre_transitions(
    curve: OverlapCurve,
    evaluate: Callable[[float], float] | None = None,
    min_prominence: float = 0.0,
    tol: float = 1e-4,
) -> list:
    """Local minima of a sampled overlap curve.

    A minimum is an interior finite sample strictly below its left neighbour
    and not above its right one. With ``evaluate`` the location is refined by
    golden-section search to ``tol`` in the coupling.
    """
    c, w = curve.couplings, curve.overlaps
    if len(c) < 3:
        raise ValueError("need at least 3 samples to locate minima")
    out = []
    for i in range(1, len(c) - 1):
        if not (np.isfinite(w[i - 1]) and np.isfinite(w[i]) and np.isfinite(w[i + 1])):
            continue
        if not (w[i] < w[i - 1] and w[i] <= w[i + 1]):
            continue
        left = np.nanmax(w[: i + 1])
        right = np.nanmax(w[i:])
        prom = float(min(left, right) - w[i])
        if prom < min_prominence:
            continue
        if evaluate is not None:
            rel = tol / max(abs(c[i]), 1.0) / 2.0
            x, wx, ok = _refine(evaluate, c[i - 1], c[i], c[i + 1], w[i], rel)
        else:
            x, wx, ok = float(c[i]), float(w[i]), False
        out.append(PreTransition(x, wx, ok, prom))
    return out


def fidelity_curve(
    params_at: Callable[[float], ModelParams],
    sector: Sector,
    couplings,
    delta_rel: float,
    refine: bool = True,
    min_prominence: float = 0.0,
) -> OverlapCurve:
    """Sample W over a coupling grid and locate its local minima.

    ``params_at`` maps the swept coupling to model parameters. Samples with a
    degenerate ground state are stored as NaN and flagged.
    """
    couplings = np.asarray(couplings, dtype=float)
    w = np.array([ground_overlap(params_at, sector, d, delta_rel) for d in couplings])
    degenerate = ~np.isfinite(w)
    curve = OverlapCurve(float(delta_rel), couplings, w, degenerate)
    if len(couplings) < 3:
        return curve
    evaluate = (lambda d: ground_overlap(params_at, sector, d, delta_rel)) if refine else None
    minima = pre_transitions(curve, evaluate, min_prominence)
    return OverlapCurve(curve.delta_rel, couplings, w, degenerate, minima)

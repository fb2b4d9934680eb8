import numpy as np
import pytest

from molbec import ModelParams, Sector, SectorError, build_tridiagonal, eigendecompose, ground_state
from molbec.observables import (
    OverlapCurve,
    alpha_lambda_params,
    default_times,
    energy_expectation,
    evolve,
    expectation_nc,
    expectation_z,
    fidelity_curve,
    ground_overlap,
    pre_transitions,
    z_trace,
)
from molbec.spectral import QuantumState, basis_state


def decomposed(alpha, n, j=0, lam=0.0):
    p = alpha_lambda_params(alpha, lam, n)
    op = build_tridiagonal(p, Sector(n, j))
    return op, eigendecompose(op)


class TestExpectations:
    def test_all_molecules(self):
        s = Sector(40, 0)
        st = basis_state(s, s.m)
        assert expectation_z(st) == -1.0 and expectation_nc(st) == 20.0

    def test_no_molecules(self):
        s = Sector(40, 4)
        assert expectation_z(basis_state(s, 0)) == 1.0

    def test_superposition(self):
        s = Sector(4, 0)
        st = QuantumState(np.array([1.0, 0.0, 1.0]) / np.sqrt(2), s)
        assert expectation_z(st) == pytest.approx(0.0)
        assert expectation_nc(st) == pytest.approx(1.0)

    def test_empty_sector(self):
        with pytest.raises(SectorError):
            expectation_z(basis_state(Sector(0, 0), 0))

    def test_zero_coupling_fixed_point(self):
        s = Sector(100, 0)
        gs = ground_state(eigendecompose(build_tridiagonal(ModelParams(), s)))
        assert abs(expectation_z(gs) - 1 / 3) <= 0.05

    def test_energy_of_eigenstate(self):
        op, d = decomposed(0.7, 60)
        assert energy_expectation(op, ground_state(d)) == pytest.approx(d.eigenvalues[0], abs=1e-10)


class TestEvolve:
    def test_identity_at_zero(self):
        op, d = decomposed(0.9, 80)
        s = basis_state(op.sector, 5)
        assert np.allclose(evolve(d, s, 0.0).amplitudes, s.amplitudes, atol=1e-13)

    def test_unitary_long_time(self):
        op, d = decomposed(0.9, 200)
        psi = evolve(d, basis_state(op.sector, op.sector.m), 1e3)
        assert abs(psi.norm() - 1) <= 1e-12

    def test_energy_conserved(self):
        op, d = decomposed(1.1, 200)
        s0 = basis_state(op.sector, op.sector.m)
        e0 = energy_expectation(op, s0)
        for t in (0.3, 7.0, 49.0, 500.0):
            e = energy_expectation(op, evolve(d, s0, t))
            assert abs(e - e0) <= 1e-10 * max(1.0, abs(e0))

    def test_sector_mismatch(self):
        _, d = decomposed(1.0, 20)
        with pytest.raises(SectorError):
            evolve(d, basis_state(Sector(22, 2), 0), 1.0)
        with pytest.raises(SectorError):
            z_trace(d, basis_state(Sector(22, 0), 0))

    def test_two_level_rabi(self):
        # N=2 resonant: z oscillates between +1 and -1 with period pi/Omega
        _, d = decomposed(0.0, 2)
        tr = z_trace(d, basis_state(Sector(2, 0), 0), [0.0, np.pi / 2, np.pi])
        assert np.allclose(tr.values, [1.0, -1.0, 1.0], atol=1e-12)


class TestTrace:
    def test_eigenstate_constant(self):
        _, d = decomposed(0.95, 120)
        tr = z_trace(d, ground_state(d), default_times(50, 300))
        assert tr.peak_to_peak <= 1e-10

    def test_bounds_and_origin(self):
        op, d = decomposed(0.9, 300)
        s0 = basis_state(op.sector, op.sector.m)
        tr = z_trace(d, s0)
        assert len(tr.times) == 2000 and tr.times[-1] == 50.0
        assert np.all(np.abs(tr.values) <= 1 + 1e-9)
        assert tr.values[0] == expectation_z(s0)

    def test_matches_evolve(self):
        op, d = decomposed(1.05, 100, j=4)
        s0 = basis_state(op.sector, 10)
        times = [0.5, 3.0, 17.0]
        tr = z_trace(d, s0, times)
        direct = [expectation_z(evolve(d, s0, t)) for t in times]
        assert np.allclose(tr.values, direct, atol=1e-12)

    def test_localised_above_threshold(self):
        op, d = decomposed(1.1, 500)
        tr = z_trace(d, basis_state(op.sector, op.sector.m))
        assert np.abs(tr.values + 1).max() <= 0.15


def _alpha_at(n, j=0):
    return lambda a: alpha_lambda_params(a, 0.0, n)


class TestFidelity:
    def test_zero_delta_is_one(self):
        curve = fidelity_curve(_alpha_at(60), Sector(60, 0), np.linspace(0, 2, 11), 0.0, refine=False)
        assert np.allclose(curve.overlaps, 1.0, atol=1e-12)

    def test_symmetric_in_delta(self):
        grid = np.linspace(0.2, 2, 15)
        a = fidelity_curve(_alpha_at(80), Sector(80, 0), grid, 0.03, refine=False)
        b = fidelity_curve(_alpha_at(80), Sector(80, 0), grid, -0.03, refine=False)
        assert np.allclose(a.overlaps, b.overlaps, atol=1e-12)

    def test_bounded(self):
        curve = fidelity_curve(_alpha_at(100), Sector(100, 0), np.linspace(0, 3, 31), 0.05, refine=False)
        w = curve.overlaps
        assert np.all(w >= 0) and np.all(w <= 1 + 1e-12)

    def test_degenerate_sample_flagged(self):
        # Omega = 0 with mu_c = 0 makes every basis state degenerate at delta = 0
        def params(d):
            return ModelParams(mu_c=d, omega=0.0)

        curve = fidelity_curve(params, Sector(10, 0), [-1.0, 0.0, 1.0], 0.1, refine=False)
        assert curve.degenerate.tolist() == [False, True, False]
        assert np.isnan(curve.overlaps[1])
        assert curve.minima == []

    def test_monotone_curve_has_no_minima(self):
        c = np.linspace(0, 1, 20)
        curve = OverlapCurve(0.01, c, 1 - 0.1 * c, np.zeros(20, bool))
        assert pre_transitions(curve) == []

    def test_needs_three_samples(self):
        curve = OverlapCurve(0.01, np.array([0.0, 1.0]), np.array([1.0, 0.9]), np.zeros(2, bool))
        with pytest.raises(ValueError):
            pre_transitions(curve)

    def test_synthetic_minimum_refined(self):
        c = np.linspace(0, 2, 21)
        f = lambda x: 1 - 0.3 * np.exp(-((x - 1.037) ** 2) / 0.02)
        curve = OverlapCurve(0.01, c, f(c), np.zeros(21, bool))
        (m,) = pre_transitions(curve, f)
        assert m.refined and abs(m.coupling - 1.037) <= 1e-4
        assert m.prominence > 0.2

    def test_minimum_stable_under_refinement(self):
        n = 400
        coarse = fidelity_curve(_alpha_at(n), Sector(n, 0), np.linspace(0.5, 1.5, 21), 0.01, min_prominence=1e-3)
        fine = fidelity_curve(_alpha_at(n), Sector(n, 0), np.linspace(0.5, 1.5, 41), 0.01, min_prominence=1e-3)
        assert len(coarse.minima) == len(fine.minima) == 1
        assert abs(coarse.minima[0].coupling - fine.minima[0].coupling) < 1e-3

    def test_overlap_non_increasing_in_delta(self):
        n = 1000
        ws = [ground_overlap(_alpha_at(n), Sector(n, 0), 1.0, d) for d in (0.005, 0.01, 0.02, 0.05)]
        assert all(b <= a + 1e-12 for a, b in zip(ws, ws[1:]))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dense_oracle import hopping_element
from molbec import (
    CouplingError,
    ModelParams,
    Sector,
    SectorError,
    abc_coefficients,
    build_tridiagonal,
    hopping,
    sector_new,
    semiclassical_couplings,
    u_diag,
)

FIELDS = ("u_aa", "u_bb", "u_cc", "u_ab", "u_ac", "u_bc", "mu_a", "mu_b", "mu_c")
coupling = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
params_strategy = st.builds(
    ModelParams, *[coupling] * 9, omega=st.floats(0.1, 3)
)


@st.composite
def sectors(draw, max_m=50):
    m = draw(st.integers(0, max_m))
    j = draw(st.integers(0, 30))
    return Sector(2 * m + j, j)


class TestSector:
    def test_half_filled(self):
        s = sector_new(500, 0)
        assert (s.l, s.m, s.dim) == (250, 250, 251)

    def test_one_dimensional(self):
        s = sector_new(2, 2)
        assert (s.l, s.m, s.dim) == (2, 0, 1)

    def test_parity_rejected(self):
        with pytest.raises(SectorError, match="even"):
            sector_new(501, 2)

    @pytest.mark.parametrize("n,j", [(4, -2), (2, 4), (-2, 0)])
    def test_out_of_range(self, n, j):
        with pytest.raises(SectorError):
            sector_new(n, j)

    def test_fractional_imbalance(self):
        s = sector_new(100, 2)
        assert s.k == pytest.approx(0.02)
        assert s.l + s.m == s.n_total

    def test_non_integer(self):
        with pytest.raises(SectorError):
            Sector(4.5, 0)


class TestParams:
    def test_non_finite_rejected(self):
        with pytest.raises(CouplingError):
            ModelParams(mu_c=float("nan"))
        with pytest.raises(CouplingError):
            ModelParams(omega=float("inf"))

    def test_swap_is_involution(self):
        p = ModelParams(1, 2, 3, 4, 5, 6, 7, 8, 9, 1.5)
        assert p.swap_ab().swap_ab() == p
        assert p.swap_ab().u_aa == 2 and p.swap_ab().u_ac == 6


class TestUDiag:
    def test_molecular_potential(self):
        assert u_diag(ModelParams(mu_c=2.0), Sector(10, 0), 3) == 6.0

    def test_all_zero(self):
        s = Sector(8, 2)
        assert all(u_diag(ModelParams(), s, j) == 0.0 for j in range(s.dim))

    def test_molecular_scattering(self):
        assert u_diag(ModelParams(u_cc=1.0), Sector(10, 0), 4) == 16.0

    def test_index_checked(self):
        with pytest.raises(SectorError):
            u_diag(ModelParams(), Sector(4, 0), 3)


class TestAbc:
    def test_no_scattering(self):
        s = Sector(12, 2)
        a, b, c = abc_coefficients(ModelParams.no_scattering(-1.7), s)
        assert (a, b, c) == (0.0, 1.7, pytest.approx(s.m * -1.7))

    def test_zero(self):
        assert tuple(abc_coefficients(ModelParams(), Sector(6, 0))) == (0.0, 0.0, 0.0)

    def test_molecular_scattering_reproduces_squares(self):
        s = Sector(10, 0)
        a, b, c = abc_coefficients(ModelParams(u_cc=1.0), s)
        for j in range(6):
            assert a * (s.m - j) * (s.m - j - 1) + b * (s.m - j) + c == pytest.approx(j * j, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(params_strategy, sectors())
    def test_consistency_with_direct_form(self, p, s):
        a, b, c = abc_coefficients(p, s)
        for j in range(s.dim):
            direct = u_diag(p, s, j)
            form = a * (s.m - j) * (s.m - j - 1) + b * (s.m - j) + c
            assert abs(form - direct) <= 1e-9 * (1 + abs(direct))


class TestHopping:
    def test_smallest_sector(self):
        assert hopping(Sector(2, 0), 1.0, 1) == 1.0

    def test_against_fock_operators(self):
        assert hopping(Sector(4, 0), 2.0, 1) == pytest.approx(4.0)
        assert hopping_element(4, 2.0, 1) == pytest.approx(4.0)

    @pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
    def test_every_element_against_fock_operators(self, n):
        s = Sector(n, 0)
        for j in range(1, s.m + 1):
            assert hopping(s, 0.7, j) == pytest.approx(hopping_element(n, 0.7, j), rel=1e-13)

    def test_zero_omega(self):
        assert hopping(Sector(10, 2), 0.0, 3) == 0.0

    def test_index_checked(self):
        with pytest.raises(SectorError):
            hopping(Sector(4, 0), 1.0, 0)

    @settings(max_examples=50, deadline=None)
    @given(params_strategy, st.integers(1, 40))
    def test_symmetric_under_species_swap(self, p, m):
        s = Sector(2 * m, 0)
        a = build_tridiagonal(p, s)
        b = build_tridiagonal(p.swap_ab(), s)
        assert np.array_equal(a.offdiag, b.offdiag)


class TestSemiclassicalCouplings:
    def test_no_scattering_alpha(self):
        n, mu, om = 200, -3.0, 1.3
        c = semiclassical_couplings(ModelParams.no_scattering(mu, om), Sector(n, 4))
        assert c.lam == 0.0
        assert c.alpha == pytest.approx(-mu / (om * math.sqrt(2 * n)))

    def test_alpha_one(self):
        n = 72
        c = semiclassical_couplings(ModelParams(mu_c=-math.sqrt(2 * n)), Sector(n, 0))
        assert c.alpha == pytest.approx(1.0)

    def test_all_zero(self):
        assert tuple(semiclassical_couplings(ModelParams(), Sector(10, 0))) == (0.0, 0.0, 0.0)

    def test_zero_omega_rejected(self):
        with pytest.raises(CouplingError):
            semiclassical_couplings(ModelParams(omega=0.0), Sector(10, 0))

    def test_from_alpha_round_trip(self):
        s = Sector(300, 6)
        p = ModelParams.from_alpha(1.3, 300, omega=0.8, lam=0.4)
        c = semiclassical_couplings(p, s)
        assert c.alpha == pytest.approx(1.3) and c.lam == pytest.approx(0.4)

    @settings(max_examples=100, deadline=None)
    @given(params_strategy, params_strategy, st.floats(-2, 2), sectors(max_m=40))
    def test_linear_in_couplings(self, p, q, t, s):
        if s.n_total == 0:
            return
        omega = p.omega
        mix = ModelParams(
            **{f: getattr(p, f) + t * getattr(q, f) for f in FIELDS}, omega=omega
        )
        cp = np.array(semiclassical_couplings(p, s))
        cq = np.array(semiclassical_couplings(ModelParams(**{f: getattr(q, f) for f in FIELDS}, omega=omega), s))
        cm = np.array(semiclassical_couplings(mix, s))
        scale = 1 + np.abs(cp).max() + abs(t) * np.abs(cq).max()
        assert np.allclose(cm, cp + t * cq, atol=1e-11 * scale, rtol=0)

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molbec import Sector, build_tridiagonal
from molbec.bethe import threshold_correction
from molbec.observables import alpha_lambda_params, expectation_z, ground_overlap
from molbec.semiclassical import SemiclassicalCouplings, region_classify
from molbec.spectral import lowest_state
from molbec.sweep import (
    Axis,
    SweepFormatError,
    SweepResult,
    SweepSpec,
    default_workers,
    dumps,
    format_float,
    load,
    loads,
    persist,
    run_sweep,
)


def one_point(target, fixed, name, value):
    return run_sweep(SweepSpec(target, fixed, [Axis(name, value, value, 1)]), 1)


class TestSinglePoint:
    def test_ground(self):
        r = one_point("ground", {"n": 80, "j": 2}, "alpha", 0.8)
        p = alpha_lambda_params(0.8, 0.0, 80)
        e0, st_ = lowest_state(build_tridiagonal(p, Sector(80, 2)))
        (row,) = r.rows
        assert row[1] == e0 and row[3] == expectation_z(st_) and row[-1] == ""

    def test_fidelity(self):
        r = one_point("fidelity", {"n": 100, "delta": 0.02}, "alpha", 1.0)
        direct = ground_overlap(lambda a: alpha_lambda_params(a, 0.0, 100), Sector(100, 0), 1.0, 0.02)
        assert r.column("w") == [direct]

    def test_region(self):
        r = one_point("region", {"k": 0.0, "lam": 0.5}, "alpha", 3.0)
        direct = region_classify(SemiclassicalCouplings(0.5, 3.0, 0.0), 0.0, 10_000)
        assert r.column("label") == [direct.label] == ["IV"]

    def test_threshold(self):
        r = one_point("threshold", {"omega": 1.0}, "n", 500)
        assert r.column("mu_star") == [threshold_correction(500, 1.0)]
        assert r.column("mu_star")[0] == pytest.approx(-31.21, abs=5e-3)


class TestDeterminism:
    def test_workers_byte_identical(self):
        spec = SweepSpec("ground", {"n": 60}, [Axis("alpha", 0, 2, 9), Axis("j", 0, 4, 3)])
        assert dumps(run_sweep(spec, 1)) == dumps(run_sweep(spec, 8))

    def test_repeatable(self):
        spec = SweepSpec("potential", {"n": 500}, [Axis("alpha", 0.9, 1.1, 5)])
        assert dumps(run_sweep(spec, 1)) == dumps(run_sweep(spec, 1))

    def test_env_default(self, monkeypatch):
        monkeypatch.setenv("MOLBEC_WORKERS", "3")
        assert default_workers() == 3
        monkeypatch.setenv("MOLBEC_WORKERS", "0")
        with pytest.raises(ValueError):
            default_workers()


class TestCompleteness:
    def test_row_order_and_count(self):
        spec = SweepSpec("energy", {"theta": 0.0, "k": 0.0, "lam": 0.0}, [Axis("alpha", -1, 1, 3), Axis("z", -0.5, 0.5, 4)])
        r = run_sweep(spec, 1)
        assert len(r.rows) == 12
        keys = [(row[0], row[1]) for row in r.rows]
        assert keys == sorted(keys)
        assert len(set(keys)) == 12

    def test_failures_tagged_not_dropped(self):
        # n = 3 with j = 0 violates parity
        spec = SweepSpec("ground", {"j": 0}, [Axis("n", 2, 4, 3)])
        r = run_sweep(spec, 1)
        assert len(r.rows) == 3 and r.failed == 1
        bad = r.rows[1]
        assert "SectorError" in bad[-1] and math.isnan(bad[1])
        assert r.rows[0][-1] == r.rows[2][-1] == ""
        assert loads(dumps(r)) == r

    def test_degenerate_fidelity_tagged(self):
        spec = SweepSpec("fidelity", {"n": 10, "delta": 0.1, "omega": 0.0, "alpha": 0.0}, [Axis("mu_c", -1, 1, 3)])
        r = run_sweep(spec, 1)
        assert r.failed >= 1


class TestValidation:
    @pytest.mark.parametrize(
        "target,fixed,axes",
        [
            ("nope", {}, [Axis("n", 1, 2, 2)]),
            ("ground", {}, []),
            ("ground", {}, [Axis("n", 2, 4, 2), Axis("alpha", 0, 1, 2), Axis("j", 0, 2, 2)]),
            ("ground", {}, [Axis("bogus", 0, 1, 2), Axis("n", 2, 4, 2)]),
            ("ground", {"n": 4}, [Axis("n", 2, 4, 2)]),
            ("ground", {}, [Axis("n", 4, 2, 2)]),
            ("ground", {}, [Axis("n", 2, 4, 0)]),
            ("ground", {}, [Axis("alpha", 0, 1, 2)]),
            ("ground", {"n": 4, "k": 0.1}, [Axis("alpha", 0, 1, 2)]),
            ("ground", {"n": float("nan")}, [Axis("alpha", 0, 1, 2)]),
            ("ground", {"n": 4}, [Axis("alpha", 0, 1, 2), Axis("alpha", 0, 1, 2)]),
        ],
    )
    def test_rejected_before_work(self, target, fixed, axes):
        with pytest.raises(ValueError):
            SweepSpec(target, fixed, axes)

    def test_bad_worker_budget(self):
        spec = SweepSpec("threshold", {}, [Axis("n", 100, 100, 1)])
        with pytest.raises(ValueError):
            run_sweep(spec, 0)


def random_result(rng: random.Random) -> SweepResult:
    rows = []
    for _ in range(rng.randint(0, 12)):
        x = rng.choice([rng.uniform(-1e6, 1e6), rng.random() * 1e-300, -0.0, math.pi, float("nan"), float("inf")])
        rows.append((rng.uniform(-5, 5), x, rng.randint(-9, 9), rng.choice(["", "ValueError: boom"])))
    return SweepResult(("a", "v", "count", "error"), ("float", "float", "int", "str"), rows, ("a",), [("target", "test")])


class TestPersistence:
    @pytest.mark.parametrize("seed", range(10))
    def test_round_trip_random(self, seed, tmp_path):
        r = random_result(random.Random(seed))
        path = tmp_path / "r.csv"
        persist(r, path)
        back = load(path)
        assert back == r
        assert path.read_text() == dumps(back)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(allow_nan=False))
    def test_seventeen_digits_exact(self, x):
        text = format_float(x)
        assert float(text) == x
        if math.isfinite(x) and x != 0:
            digits = text.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(digits) <= 17

    def test_seventeen_significant_digits(self):
        assert format_float(0.1) == "0.10000000000000001"

    def test_header_matches_axes_and_outputs(self):
        spec = SweepSpec("potential", {"n": 500}, [Axis("alpha", 0.9, 1.1, 2), Axis("j", 0, 0, 1)])
        text = dumps(run_sweep(spec, 1))
        header = next(line for line in text.splitlines() if not line.startswith("#"))
        assert header == "alpha,j,n_minima,n_maxima,bifurcation,error"
        assert "# axes = alpha:j" in text

    def test_real_result_round_trip(self):
        spec = SweepSpec("ground", {"n": 40}, [Axis("alpha", 0, 2, 7)])
        r = run_sweep(spec, 1)
        assert loads(dumps(r)) == r
        assert loads(dumps(r)).rows == r.rows

    @pytest.mark.parametrize(
        "text,lineno",
        [
            ("# axes = a\n# types = float,str\na,error\n1.0,\nx,\n", 5),
            ("# axes = a\n# types = float,str\na,error\n1.0\n", 4),
            ("# axes = a\na,error\n", 2),
            ("# axes = a\n# types = float,bad\na,error\n", 2),
            ("# axes = a\n# types = float,str\nb,error\n", 3),
            ("# axes = a\n# types = float,str\na,error\n1,\n\n2,\n", 5),
            ("# axes = a\n# types = float,int,str\na,n,error\n1,2.5,\n", 4),
            ("# not metadata\n", 1),
        ],
    )
    def test_malformed_reports_line(self, text, lineno):
        with pytest.raises(SweepFormatError) as info:
            loads(text)
        assert info.value.lineno == lineno
        assert f"line {lineno}" in str(info.value)


@pytest.fixture(scope="module")
def region_grid():
    spec = SweepSpec(
        "region",
        {"k": 0.0, "grid": 2000},
        [Axis("alpha", -5, 4.95, 200), Axis("lam", -4, 5.95, 200)],
    )
    return run_sweep(spec, 1)


class TestRegionGrid:
    REFERENCE_POINTS = {(-2.0, 1.0): "I", (2.0, 2.0): "II", (0.5, 0.5): "III", (3.0, 0.5): "IV"}

    def test_complete(self, region_grid):
        assert len(region_grid.rows) == 40_000 and region_grid.failed == 0
        # only cells lying exactly on a boundary line go unlabelled
        unlabelled = [r for r in region_grid.rows if r[2] == ""]
        assert all(r[6] == 1 for r in unlabelled) and len(unlabelled) <= 400

    def test_five_regions(self, region_grid):
        assert set(region_grid.column("label")) - {""} == {"I", "II", "III", "IV", "V"}

    def test_reference_points(self, region_grid):
        alpha = np.array(region_grid.column("alpha"))
        lam = np.array(region_grid.column("lam"))
        labels = region_grid.column("label")
        for (a, l), want in self.REFERENCE_POINTS.items():
            i = int(np.argmin(np.abs(alpha - a) + np.abs(lam - l)))
            assert abs(alpha[i] - a) < 1e-9 and abs(lam[i] - l) < 1e-9
            assert labels[i] == want

    def test_edge_lines_separate_regions(self, region_grid):
        # cells well away from the k = 0 edge-pair lines lambda = (alpha +- 1)/2
        # carry an edge pair exactly when lambda lies between them
        alpha = np.array(region_grid.column("alpha"))
        lam = np.array(region_grid.column("lam"))
        nb = np.array(region_grid.column("n_boundary"))
        lo, hi = (alpha - 1) / 2, (alpha + 1) / 2
        clear = (np.abs(lam - lo) > 0.05) & (np.abs(lam - hi) > 0.05)
        inside = (lam > lo) & (lam < hi)
        assert np.all((nb[clear] == 2) == inside[clear])

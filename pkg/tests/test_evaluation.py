import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_decomposition
from softwrap.core import DataPoint, FeatureSchema, FeatureSpec
from softwrap.errors import BadRange, Empty, LengthMismatch, NotContinuousFeature, SchemaError
from softwrap.evaluation import (
    BrierReport,
    brier_score,
    decompose,
    render_report,
    reports_from_csv,
    reports_to_csv,
    select_best,
    sweep,
    table_number,
)
from softwrap.trees import LEAF, SPLIT, LeafStats, Node, QualityImpactModel, Tree, TreeHyperparams

SCHEMA = FeatureSchema((FeatureSpec("x", "continuous"), FeatureSpec("t", "categorical", ("p", "q"))))


def report(bs, unr=0.0):
    return BrierReport(bs, 0.2, 0.0, 0.2, unr, 0.0, 10, "unique", 0.0)


def stump(us=(0.1, 0.6), t=5.0):
    nodes = [Node(0, SPLIT, feature=0, threshold=t, children=(1, 2))]
    nodes += [Node(i + 1, LEAF, stats=LeafStats(1 - u, u)) for i, u in enumerate(us)]
    return QualityImpactModel("dt", SCHEMA, TreeHyperparams(), [Tree(nodes)])


class TestBrierScore:
    def test_examples(self):
        assert brier_score([0, 1, 1], [0, 1, 1]) == 0.0
        assert brier_score([0.5] * 4, [0, 1, 1, 0]) == 0.25
        assert brier_score([0.2, 0.8], [0, 1]) == pytest.approx(0.04, abs=1e-15)

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            brier_score([0.1], [0, 1])
        with pytest.raises(Empty):
            brier_score([], [])
        with pytest.raises(ValueError):
            brier_score([1.2], [1])


class TestDecompose:
    def test_worked_example(self):
        r = decompose([0.2, 0.2, 0.8, 0.8], [0, 1, 1, 1], "unique")
        for name, want in dict(bs=0.19, var=0.1875, res=0.0625, unr=0.065, oconf=0.065, uns=0.125).items():
            assert getattr(r, name) == pytest.approx(want, abs=1e-12), name

    def test_climatology(self):
        y = np.array([0, 1, 0, 0, 1, 0, 0, 0.0])
        r = decompose(np.full(8, y.mean()), y)
        assert r.res == 0 and r.unr == 0 and r.bs == pytest.approx(r.var, abs=1e-15)

    def test_perfect(self):
        y = np.array([0, 1, 1, 0, 1.0])
        r = decompose(y, y)
        assert (r.bs, r.unr, r.oconf) == (0.0, 0.0, 0.0)
        assert r.res == pytest.approx(r.var, abs=1e-15) and r.uns == pytest.approx(0.0, abs=1e-15)

    def test_matches_brute_force(self, rs):
        for _ in range(50):
            n = int(rs.integers(1, 200))
            f = np.round(rs.uniform(0, 1, n), int(rs.integers(1, 4)))
            y = rs.integers(0, 2, n).astype(float)
            r, want = decompose(f, y, "unique"), brute_force_decomposition(f.tolist(), y.tolist())
            for k, v in want.items():
                assert getattr(r, k) == pytest.approx(v, abs=1e-12)

    @settings(max_examples=200)
    @given(st.lists(st.tuples(st.integers(0, 40), st.booleans()), min_size=1, max_size=300))
    def test_identity_and_bounds(self, pairs):
        f = np.array([a / 40 for a, _ in pairs])
        y = np.array([float(b) for _, b in pairs])
        r = decompose(f, y, "unique")
        assert abs(r.bs - (r.var - r.res + r.unr)) <= 1e-12
        assert r.identity_residual <= 1e-12
        assert r.res >= 0 and r.unr >= 0 and 0 <= r.oconf <= r.unr + 1e-15
        assert r.uns == r.var - r.res

    def test_fixed_bins_match_unique_when_one_value_per_bin(self, rs):
        f = (rs.integers(0, 10, 500) + 0.5) / 10
        y = rs.integers(0, 2, 500).astype(float)
        a, b = decompose(f, y, "unique"), decompose(f, y, 10)
        assert b.binning == "fixed(10)"
        for k in ("bs", "var", "res", "unr", "oconf"):
            assert getattr(b, k) == pytest.approx(getattr(a, k), abs=1e-12)

    def test_auto_mode(self, rs):
        y = rs.integers(0, 2, 3000).astype(float)
        assert decompose(np.round(rs.uniform(0, 1, 3000), 2), y).binning == "unique"
        assert decompose(rs.uniform(0, 1, 3000), y).binning == "fixed(100)"


class TestSweep:
    base = {"x": 0.0, "t": "p"}

    def test_stump_single_jump(self):
        s = sweep(stump(), self.base, "x", 0, 10, 1001)
        assert s.max_jump == pytest.approx(0.5, abs=1e-15)
        assert s.jump_count() == 1
        assert len(s.grid) == len(s.u_values) == 1001 and np.all(np.diff(s.grid) > 0)
        assert (s.grid[0], s.grid[-1]) == (0.0, 10.0)

    def test_constant_model(self):
        assert sweep(stump((0.3, 0.3)), DataPoint((1.0, "q")), "x", -5, 5, 50).max_jump == 0.0

    def test_fuzzy_is_smooth_where_dt_jumps(self, rs):
        from softwrap.core import EncodedDataset, encoded_columns
        from softwrap.fuzzy_trees import train_fuzzy_dt
        from softwrap.hard_trees import train_dt

        x = rs.uniform(0, 10, 3000)
        t = rs.integers(0, 2, 3000)
        y = (rs.uniform(0, 1, 3000) < np.where(x > 5, 0.8, 0.1)).astype(float)
        X = np.column_stack([x, t == 0, t == 1]).astype(float)
        ds = EncodedDataset(SCHEMA, encoded_columns(SCHEMA), X, y)
        hp = TreeHyperparams(max_depth=1, min_leaf_weight=20)
        dt_sweep = sweep(train_dt(ds, hp), self.base, "x", 0, 10, 10_000)
        fz_sweep = sweep(train_fuzzy_dt(ds, hp), self.base, "x", 0, 10, 10_000)
        assert dt_sweep.max_jump > 0.5
        assert fz_sweep.max_jump < 0.01

    def test_errors(self):
        with pytest.raises(NotContinuousFeature):
            sweep(stump(), self.base, "t", 0, 1, 10)
        with pytest.raises(NotContinuousFeature):
            sweep(stump(), self.base, "nope", 0, 1, 10)
        with pytest.raises(BadRange):
            sweep(stump(), self.base, "x", 1, 1, 10)
        with pytest.raises(BadRange):
            sweep(stump(), self.base, "x", 0, 1, 1)

    def test_csv(self):
        text = sweep(stump(), self.base, "x", 0, 10, 3).to_csv()
        assert text == "x,uncertainty\n0.0,0.1\n5.0,0.1\n10.0,0.6\n"


class TestSelectBest:
    def test_examples(self):
        assert select_best([("a", report(0.12)), ("b", report(0.15))]) == "a"
        assert select_best([("a", report(0.1200, 0.05)), ("b", report(0.1205, 0.01))], eps=1e-3) == "b"
        assert select_best([("only", report(0.3))]) == "only"

    def test_remaining_tie_by_id(self):
        assert select_best([("z", report(0.1, 0.02)), ("m", report(0.1, 0.02))]) == "m"

    def test_empty(self):
        with pytest.raises(Empty):
            select_best([])


class TestRender:
    def test_table_number(self):
        assert table_number(0.12176) == ".12176"
        assert table_number(0.0) == ".00000"
        assert table_number(2.8e-17) == "2.8e-17"
        assert table_number(1.0) == "1.00000"

    def test_rows(self):
        r = BrierReport(0.12176, 0.20284, 0.08175, 0.12109, 0.00066, 0.00001, 100, "unique", 0.0)
        text = render_report([("DT", r)])
        lines = text.splitlines()
        assert lines[0].split() == ["Approach", "bs", "var", "uns", "unr", "oconf"]
        assert lines[1].split() == ["DT", ".12176", ".20284", ".12109", ".00066", ".00001"]
        assert render_report([]).splitlines() == lines[:1]
        two = render_report([("b", report(0.2)), ("a", report(0.1))]).splitlines()
        assert [row.split()[0] for row in two[1:]] == ["b", "a"]

    def test_csv_round_trip(self):
        reps = [("DT", decompose([0.2, 0.2, 0.8, 0.8], [0, 1, 1, 1])), ("RF", report(0.1))]
        assert reports_from_csv(reports_to_csv(reps)) == reps

    def test_malformed_csv(self):
        with pytest.raises(SchemaError):
            reports_from_csv("model_id,bs\nx,0.1\n")

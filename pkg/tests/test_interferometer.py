"""Delay decomposition, scheme loss budgets and measured-table ingestion."""

import itertools
import math

import numpy as np
import pytest

from rrdps.interferometer import (
    MeasuredTableError,
    SchemeSpec,
    arm_size,
    combine_arms,
    decompose_delay,
    load_measured_tables,
    scalability_delta,
    scheme_loss_table,
    scheme_report,
    visibility,
    visibility_error,
)
from rrdps.model import LinkParams


class TestDecomposition:
    def test_bijection(self):
        pairs = [decompose_delay(r) for r in range(1, 65)]
        assert len(set(pairs)) == 64
        for r, (x, y) in zip(range(1, 65), pairs):
            assert x - y == r
            assert x % 8 == 0 and 8 <= x <= 64
            assert 0 <= y < 8

    @pytest.mark.parametrize("r,xy", [(46, (48, 2)), (5, (8, 3)), (43, (48, 5)), (64, (64, 0)), (1, (8, 7))])
    def test_cases(self, r, xy):
        assert decompose_delay(r) == xy

    @pytest.mark.parametrize("r", [0, 65])
    def test_out_of_range(self, r):
        with pytest.raises(ValueError):
            decompose_delay(r)

    def test_arm_size(self):
        assert arm_size(65) == 8
        assert arm_size(1025) == 32
        for bad in (64, 10, 37):
            with pytest.raises(ValueError):
                arm_size(bad)


def _enumerate_simple_active(u, m, x, y):
    """Brute force over every switch setting: bar costs u, cross 2u."""
    stages = int(math.log2(m))
    long_loss = short_loss = None
    for states in itertools.product((0, 1), repeat=stages):
        delay = sum(s << i for i, s in enumerate(states))
        loss = sum(u * (2 if s else 1) for s in states)
        if m * (delay + 1) == x:
            long_loss = loss
        if delay == y:
            short_loss = loss
    return long_loss, short_loss


class TestSimpleActive:
    spec = SchemeSpec(kind="simple-active", unit_loss_dB=0.8)

    def test_matches_enumeration(self):
        for e in scheme_loss_table(self.spec):
            assert (e.long_IL_dB, e.short_IL_dB) == pytest.approx(_enumerate_simple_active(0.8, 8, e.x, e.y))

    def test_worst_case_arms(self):
        row = scheme_loss_table(self.spec)[63]
        assert row.r == 64
        assert row.long_IL_dB == pytest.approx(4.8)
        assert row.short_IL_dB == pytest.approx(2.4)

    def test_max_imbalance(self):
        assert scheme_report(self.spec).max_imbalance_dB == pytest.approx(2.4)


class TestSchemes:
    def test_faraday_michelson_mean(self):
        rep = scheme_report(SchemeSpec())
        assert abs(rep.mean_IL_dB - 5.60) <= 0.05
        assert rep.detector_channels == 2
        assert rep.switch_elements == 14

    def test_balanced_active(self):
        rep = scheme_report(SchemeSpec(kind="balanced"))
        assert rep.switches_1xm == 4
        assert rep.switch_elements == 28
        assert rep.max_imbalance_dB == 0.0

    def test_passive_counts(self):
        rep = scheme_report(SchemeSpec(kind="passive"))
        assert rep.detector_channels == 128
        assert rep.interferometers == 64
        assert rep.mean_IL_dB == pytest.approx(10 * math.log10(64) + 2.0)  # splitter plus fixed loss

    def test_scalability(self):
        assert scalability_delta(SchemeSpec(), 1025) == pytest.approx(2.4, abs=0.1)
        assert scalability_delta(SchemeSpec(), 257) == pytest.approx(1.2, abs=1e-9)
        assert scalability_delta(SchemeSpec(), 65) == 0.0

    def test_tolerance_spread(self):
        assert scheme_report(SchemeSpec(tolerance_dB=0.1)).il_spread_dB == pytest.approx(0.7)

    @pytest.mark.parametrize("kw", [{"kind": "ring"}, {"L": 64}, {"switch_loss_pass_dB": -1.0}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SchemeSpec(**kw)


class TestArmOptics:
    def test_combine_equal_arms(self):
        assert combine_arms(3.0, 3.0) == pytest.approx(3.0)

    def test_combine_is_power_mean(self):
        assert combine_arms(0.0, 100.0) == pytest.approx(10 * math.log10(2), rel=1e-9)

    def test_visibility(self):
        assert visibility(1.0, 1.0) == pytest.approx(1.0)
        assert visibility_error(2.4, 0.0) > 0
        assert visibility_error(2.4, 0.0) < 0.02


class TestMeasuredTables:
    def _write(self, tmp_path, lines):
        p = tmp_path / "il.csv"
        p.write_text("\n".join(lines) + "\n")
        return p

    def test_roundtrip(self, tmp_path):
        rows = ["# lab table", "r,long_IL_dB,short_IL_dB,e_s"]
        rows += [f"{r},{5 + r / 100},{5.0},0.02" for r in range(64, 0, -1)]
        t = load_measured_tables(self._write(tmp_path, rows))
        assert t.L == 65
        assert list(t.r) == list(range(1, 65))
        assert np.all(t.e_s == 0.02)
        eta = t.eta_by_delay(LinkParams())
        assert eta.shape == (64,)
        assert np.all(np.diff(eta) < 0)

    @pytest.mark.parametrize("lines,match", [
        (["r,long_IL_dB", "1,2"], "missing column"),
        (["r,long_IL_dB,short_IL_dB", "1,2,x"], "unparsable"),
        (["r,long_IL_dB,short_IL_dB", "1,-2,1"], "negative"),
        (["r,long_IL_dB,short_IL_dB", "1,2,1", "1,2,1"], "duplicate"),
        (["r,long_IL_dB,short_IL_dB", "1,2,1", "3,2,1"], "missing"),
        (["r,long_IL_dB,short_IL_dB,e_s", "1,2,1,0.7"], "outside"),
        (["r,long_IL_dB,short_IL_dB"], "no rows"),
    ])
    def test_errors(self, tmp_path, lines, match):
        with pytest.raises(MeasuredTableError, match=match):
            load_measured_tables(self._write(tmp_path, lines))

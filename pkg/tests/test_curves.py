import numpy as np
import pytest
from hypothesis import given, strategies as st

from intent_bargain.curves import (CurveFormatError, DomainError, UtilityCurve, eval_curve,
                                   read_curves_csv, write_curves_csv)

from conftest import curves_on_tilts


def test_eval_endpoints_and_midpoint():
    c = UtilityCurve((0.0, 15.0), (0.0, 1.0))
    assert eval_curve(c, 0.0) == 0.0
    assert eval_curve(c, 7.5) == pytest.approx(0.5, abs=1e-15)
    assert eval_curve(UtilityCurve((0.0, 15.0), (1.0, 1.0)), 3.0) == 1.0


def test_eval_out_of_domain():
    c = UtilityCurve((0.0, 15.0), (0.0, 1.0))
    with pytest.raises(DomainError):
        eval_curve(c, 15.5)
    with pytest.raises(DomainError):
        eval_curve(c, [-0.1, 1.0])


@pytest.mark.parametrize("params,utils", [
    ((0.0,), (0.5,)),
    ((0.0, 0.0), (0.1, 0.2)),
    ((1.0, 0.0), (0.1, 0.2)),
    ((0.0, 1.0), (0.1, 1.2)),
    ((0.0, 1.0), (-0.1, 0.2)),
])
def test_curve_invariants_rejected(params, utils):
    with pytest.raises(ValueError):
        UtilityCurve(params, utils)


@given(curves_on_tilts(1), st.floats(0.0, 15.0))
def test_eval_within_neighbours(curves, t):
    c = curves["p0"]
    k = min(int(np.searchsorted(c.parameters, t, side="right")) - 1, len(c.parameters) - 2)
    lo, hi = sorted(c.utilities[k:k + 2])
    assert lo - 1e-15 <= eval_curve(c, t) <= hi + 1e-15


def test_csv_roundtrip(tmp_path):
    curves = {"A": UtilityCurve((0.0, 7.0, 15.0), (0.0, 0.3333333, 1.0)),
              "B": UtilityCurve((0.0, 15.0), (1.0, 0.0))}
    text = write_curves_csv(tmp_path / "c.csv", [0.0, 7.0, 15.0], curves)
    assert text.splitlines()[0] == "parameter,utility_A,utility_B"
    assert text.splitlines()[2] == "7.000000,0.333333,0.533333"
    back = read_curves_csv(tmp_path / "c.csv")
    assert list(back) == ["A", "B"]
    assert back["A"].utilities[1] == pytest.approx(0.333333)


@pytest.mark.parametrize("text", [
    "",
    "tilt,utility_a\n0,0\n1,1\n",
    "parameter,score_a\n0,0\n1,1\n",
    "parameter,utility_a\n0,0\n",
    "parameter,utility_a\n0,0\n1,x\n",
    "parameter,utility_a\n0,0\n1,1.5\n",
    "parameter,utility_a,utility_a\n0,0,0\n1,1,1\n",
])
def test_csv_malformed(text, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(CurveFormatError):
        read_curves_csv(path)

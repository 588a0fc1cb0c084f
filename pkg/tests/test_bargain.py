import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from intent_bargain.bargain import (BargainingError, BargainingProblem, DegeneratePlayerError,
                                    NoFeasibleAgreement, Player, SolverFailure, arbitrate,
                                    feasible_region, ideal_point, individual_optimum, jain_index,
                                    parse_methods, solve_ksbs, solve_nbs, solve_sebs, solve_wnbs)
from intent_bargain.curves import UtilityCurve

from conftest import curves_on_tilts, opposed_monotone


def duel(linear_duel, **kw):
    return BargainingProblem.from_curves(linear_duel, **kw)


# -- problem construction --------------------------------------------------------

def test_default_disagreement_is_curve_minimum():
    c = UtilityCurve((0.0, 15.0), (0.2, 0.9))
    pb = BargainingProblem.from_curves({"a": c, "b": c})
    assert list(pb.disagreement) == [0.2, 0.2]
    assert list(pb.weights) == [0.5, 0.5]


@pytest.mark.parametrize("kw", [
    {"weights": [0.7, 0.2]},
    {"weights": [1.2, -0.2]},
    {"search_resolution": 0.0},
    {"search_resolution": 20.0},
    {"domain": (0.0, 20.0)},
])
def test_problem_invariants(linear_duel, kw):
    with pytest.raises(BargainingError):
        duel(linear_duel, **kw)


def test_single_player_rejected(linear_duel):
    with pytest.raises(BargainingError):
        BargainingProblem.from_curves({"a": linear_duel["a"]})


def test_disagreement_above_curve_max():
    with pytest.raises(NoFeasibleAgreement):
        Player("a", UtilityCurve((0.0, 1.0), (0.0, 0.5)), disagreement=0.6)


def test_grid_covers_domain(linear_duel):
    g = duel(linear_duel).grid()
    assert len(g) == 1501 and g[0] == 0.0 and g[-1] == 15.0 and g[800] == 8.0


# -- ideal point / individual optimum ----------------------------------------------

def test_ideal_point_examples(linear_duel):
    assert list(ideal_point(duel(linear_duel))) == [1.0, 1.0]
    flat = UtilityCurve((0.0, 15.0), (0.4, 0.4))
    pb = BargainingProblem.from_curves({"a": linear_duel["a"], "c": flat}, disagreement=[0.0, 0.0])
    assert ideal_point(pb)[1] == 0.4


@pytest.mark.parametrize("points,expected", [
    (((0, 0), (15, 1)), 15.0),
    (((0, 1), (15, 0)), 0.0),
    (((0, 0), (8, 1), (15, 1)), 8.0),
])
def test_individual_optimum(points, expected):
    assert individual_optimum(UtilityCurve.from_points(points)) == expected


# -- feasible region ----------------------------------------------------------------

def test_feasible_region_examples(linear_duel):
    assert feasible_region(duel(linear_duel)) == [(0.0, 15.0)]
    (lo, hi), = feasible_region(duel(linear_duel, disagreement=[0.2, 0.0]))
    assert lo == pytest.approx(3.0, abs=1e-12) and hi == 15.0
    with pytest.raises(NoFeasibleAgreement) as info:
        feasible_region(duel(linear_duel, disagreement=[0.6, 0.6]))
    assert info.value.disagreement == (0.6, 0.6)


def test_feasible_region_disjoint():
    a = UtilityCurve.from_points([(0, 1), (5, 0), (10, 0), (15, 1)])
    b = UtilityCurve((0.0, 15.0), (0.5, 0.5))
    region = feasible_region(BargainingProblem.from_curves({"a": a, "b": b},
                                                           disagreement=[0.5, 0.0]))
    assert region == [(0.0, 2.5), (12.5, 15.0)]


# -- NBS / WNBS -------------------------------------------------------------------------

def test_nbs_linear_duel(linear_duel):
    s = solve_nbs(duel(linear_duel))
    # maximize T(15-T)/225 -> T = 7.5
    assert s.parameter == 7.5
    assert s.utilities == pytest.approx((0.5, 0.5))
    assert s.objective == pytest.approx(0.25)
    assert s.jfi == 1.0


def test_nbs_no_conflict():
    peak = UtilityCurve.from_points([(0, 0.1), (4, 1.0), (15, 0.0)])
    assert solve_nbs(BargainingProblem.from_curves({"a": peak, "b": peak})).parameter == 4.0


def test_wnbs_equal_weights_matches_nbs(linear_duel):
    pb = duel(linear_duel, weights=[0.5, 0.5])
    assert solve_wnbs(pb).parameter == solve_nbs(pb).parameter


def test_wnbs_weighted(linear_duel):
    # (T/15)^0.8 ((15-T)/15)^0.2 is stationary at T = 0.8 * 15
    s = solve_wnbs(duel(linear_duel, weights=[0.8, 0.2]))
    assert s.parameter == pytest.approx(12.0, abs=1e-9)
    assert s.objective == pytest.approx(0.8 ** 0.8 * 0.2 ** 0.2)


def test_wnbs_degenerate_weight():
    a = UtilityCurve.from_points([(0, 0.2), (6, 0.9), (15, 0.1)])
    b = UtilityCurve((0.0, 15.0), (1.0, 0.0))
    pb = BargainingProblem.from_curves({"a": a, "b": b}, weights=[1.0, 0.0])
    assert solve_wnbs(pb).parameter == individual_optimum(a) == 6.0


def test_zero_product_falls_back_to_sum():
    a = UtilityCurve.from_points([(0, 0.0), (10, 0.8), (15, 0.3)])
    flat = UtilityCurve((0.0, 15.0), (0.5, 0.5))
    pb = BargainingProblem.from_curves({"a": a, "b": flat})
    s = solve_nbs(pb)
    assert s.parameter == 10.0 and s.notes
    assert solve_wnbs(pb).parameter == 10.0


# -- KSBS -------------------------------------------------------------------------------

def test_ksbs_linear_duel(linear_duel):
    s = solve_ksbs(duel(linear_duel))
    assert s.parameter == pytest.approx(7.5, abs=1e-9)
    assert s.exact and s.residual <= 1e-6


def test_ksbs_mirror_symmetric():
    a = UtilityCurve.from_points([(0, 0.0), (3, 0.6), (9, 0.7), (15, 1.0)])
    b = UtilityCurve(tuple(15.0 - t for t in reversed(a.parameters)), tuple(reversed(a.utilities)))
    s = solve_ksbs(BargainingProblem.from_curves({"a": a, "b": b}))
    assert s.parameter == pytest.approx(7.5, abs=1e-9)


def test_ksbs_off_grid_root():
    a = UtilityCurve((0.0, 15.0), (0.0, 1.0))
    b = UtilityCurve.from_points([(0, 1.0), (7, 0.9), (15, 0.0)])
    s = solve_ksbs(BargainingProblem.from_curves({"a": a, "b": b}))
    # on [7, 15]: T/15 = 0.9 - 0.1125 (T - 7)  ->  T = 1.6875 / (1/15 + 0.1125)
    assert s.parameter == pytest.approx(1.6875 / (1 / 15 + 0.1125), abs=1e-10)
    assert s.residual <= 1e-12


def test_ksbs_degenerate_player(linear_duel):
    flat = UtilityCurve((0.0, 15.0), (0.5, 0.5))
    pb = BargainingProblem.from_curves({"a": linear_duel["a"], "b": flat})
    with pytest.raises(DegeneratePlayerError):
        solve_ksbs(pb)


def test_ksbs_flags_non_exact():
    # three monotone players rarely cross at one point; here they do not
    c = {"a": UtilityCurve((0.0, 15.0), (0.0, 1.0)),
         "b": UtilityCurve((0.0, 15.0), (1.0, 0.0)),
         "c": UtilityCurve.from_points([(0, 0.0), (2, 1.0), (15, 0.0)])}
    s = solve_ksbs(BargainingProblem.from_curves(c))
    assert not s.exact and s.residual > 1e-6 and s.notes


# -- SEBS -------------------------------------------------------------------------------

def test_sebs_linear_duel(linear_duel):
    s = solve_sebs(duel(linear_duel))
    assert s.parameter == pytest.approx(7.5, abs=1e-9)
    assert s.objective == pytest.approx(math.log(2))
    assert s.residual <= 1e-6


def test_sebs_single_equal_gain_point(linear_duel):
    s = solve_sebs(duel(linear_duel, disagreement=[0.1, 0.1]))
    assert s.parameter == pytest.approx(7.5, abs=1e-9)


def test_sebs_total_gain_constraint():
    # gains T/15 and 0.5 - T/30; total 0.5 + T/30 equals 0.8 only at T = 9
    a = UtilityCurve((0.0, 15.0), (0.0, 1.0))
    b = UtilityCurve((0.0, 15.0), (1.0, 0.5))
    free = solve_sebs(BargainingProblem.from_curves({"a": a, "b": b}))
    assert free.parameter == pytest.approx(5.0, abs=1e-9)
    pinned = solve_sebs(BargainingProblem.from_curves({"a": a, "b": b}, sebs_total_gain=0.8))
    # every point with |total - 0.8| <= 1e-3 is eligible; entropy favours the low end of the band
    assert pinned.parameter == pytest.approx(9.0, abs=0.031)
    assert abs(sum(pinned.gains) - 0.8) <= 1e-3 + 1e-12
    assert not pinned.notes
    with pytest.raises(BargainingError):
        solve_sebs(BargainingProblem.from_curves({"a": a, "b": b}, sebs_total_gain=2.0))


def test_sebs_zero_total_gain():
    flat = UtilityCurve((0.0, 15.0), (0.5, 0.5))
    with pytest.raises(BargainingError):
        solve_sebs(BargainingProblem.from_curves({"a": flat, "b": flat}))


# -- Jain ---------------------------------------------------------------------------------

@pytest.mark.parametrize("x,expected", [((1, 1, 1), 1.0), ((1, 0), 0.5), ((0.5, 1.0), 0.9)])
def test_jain_examples(x, expected):
    assert jain_index(x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("x", [(), (0, 0), (1, -1), (1, float("nan"))])
def test_jain_undefined(x):
    with pytest.raises(ValueError):
        jain_index(x)


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=30).filter(lambda v: max(v) > 0))
def test_jain_bounds(x):
    n = len(x)
    j = jain_index(x)
    assert 1.0 / n - 1e-12 <= j <= 1.0 + 1e-12
    nonzero = sum(v > 0 for v in x)
    if nonzero == 1:
        assert j == 1.0 / n
    if len(set(x)) == 1:
        assert j == 1.0


# -- arbitrate ----------------------------------------------------------------------------

def test_arbitrate_symmetric_duel(linear_duel):
    rep = arbitrate(duel(linear_duel))
    assert [s.method for s in rep.solutions] == ["NBS", "WNBS", "KSBS", "SEBS"]
    assert all(s.parameter == pytest.approx(7.5, abs=1e-9) for s in rep.solutions)
    assert all(s.jfi == pytest.approx(1.0, abs=1e-12) for s in rep.solutions)
    assert rep.chosen_method == "NBS" and rep.chosen_parameter == 7.5


def test_arbitrate_single_method(linear_duel):
    rep = arbitrate(duel(linear_duel, weights=[0.8, 0.2]), ["wnbs"])
    assert rep.chosen_method == "WNBS" and rep.chosen_parameter == pytest.approx(12.0)


def test_arbitrate_picks_max_jfi(linear_duel):
    rep = arbitrate(duel(linear_duel, weights=[0.8, 0.2]), "wnbs,ksbs")
    assert rep.chosen_method == "KSBS"


def test_arbitrate_names_failing_method(linear_duel):
    flat = UtilityCurve((0.0, 15.0), (0.5, 0.5))
    pb = BargainingProblem.from_curves({"a": linear_duel["a"], "b": flat})
    with pytest.raises(SolverFailure) as info:
        arbitrate(pb)
    assert info.value.method == "KSBS"


def test_parse_methods():
    assert parse_methods("sebs,NBS") == ("NBS", "SEBS")
    with pytest.raises(BargainingError):
        parse_methods("nbs,foo")
    with pytest.raises(BargainingError):
        parse_methods("")


def test_report_roundtrip(linear_duel):
    from intent_bargain.bargain import ArbitrationReport
    rep = arbitrate(duel(linear_duel))
    back = ArbitrationReport.from_dict(rep.to_dict())
    assert back == rep


# -- properties ---------------------------------------------------------------------------

def outcome(solver, pb):
    """T* or the error type, so degenerate draws still compare like for like."""
    try:
        return solver(pb).parameter
    except BargainingError as exc:
        return type(exc)


def solved(solver, pb):
    try:
        return solver(pb).parameter
    except BargainingError:
        assume(False)

@settings(max_examples=60, deadline=None)
@given(curves_on_tilts(2))
def test_wnbs_equal_weights_coincides_with_nbs(curves):
    pb = BargainingProblem.from_curves(curves, disagreement=[0.0, 0.0], weights=[0.5, 0.5])
    assert outcome(solve_wnbs, pb) == outcome(solve_nbs, pb)


@settings(max_examples=25, deadline=None)
@given(curves_on_tilts(3))
def test_wnbs_equal_weights_coincides_with_nbs_three_players(curves):
    pb = BargainingProblem.from_curves(curves, disagreement=[0.0] * 3, weights=[1 / 3] * 3)
    assert outcome(solve_wnbs, pb) == outcome(solve_nbs, pb)


def _dominated(pb, T):
    g_star = pb.gains(T)
    G = pb.gains(pb.grid())
    feas = np.all(G >= 0, axis=0)
    better = np.all(G >= g_star[:, None] + 1e-9, axis=0) & np.any(G > g_star[:, None], axis=0)
    return bool(np.any(better & feas))


@settings(max_examples=50, deadline=None)
@given(curves_on_tilts(2), st.floats(0.05, 0.95))
def test_pareto_product_solutions(curves, w):
    pb = BargainingProblem.from_curves(curves, weights=[w, 1 - w])
    assert not _dominated(pb, solved(solve_nbs, pb))
    assert not _dominated(pb, solved(solve_wnbs, pb))


@settings(max_examples=50, deadline=None)
@given(opposed_monotone())
def test_pareto_ksbs_monotone(curves):
    pb = BargainingProblem.from_curves(curves)
    assert not _dominated(pb, solve_ksbs(pb).parameter)


@settings(max_examples=40, deadline=None)
@given(curves_on_tilts(2), st.floats(0.05, 1.0))
def test_nbs_scale_invariance(curves, k):
    pb = BargainingProblem.from_curves(curves, disagreement=[0.0, 0.0])
    scaled = dict(curves)
    c = curves["p0"]
    scaled["p0"] = UtilityCurve(c.parameters, tuple(k * u for u in c.utilities))
    pb2 = BargainingProblem.from_curves(scaled, disagreement=[0.0, 0.0])
    assert outcome(solve_nbs, pb) == outcome(solve_nbs, pb2)


@settings(max_examples=50, deadline=None)
@given(opposed_monotone())
def test_equal_gain_residuals(curves):
    pb = BargainingProblem.from_curves(curves)
    k = solve_ksbs(pb)
    assert k.exact and k.residual <= 1e-6
    s = solve_sebs(pb)
    g = np.asarray(s.gains)
    assert abs(g[0] / g.sum() - 0.5) <= 1e-6


@settings(max_examples=50, deadline=None)
@given(opposed_monotone(), st.floats(0.0, 1.0))
def test_direct_conflict_sandwich(curves, w):
    pb = BargainingProblem.from_curves(curves, weights=[w, 1 - w])
    ta = individual_optimum(curves["a"])
    tb = individual_optimum(curves["b"])
    lo, hi = min(ta, tb), max(ta, tb)
    for s in arbitrate(pb).solutions:
        assert lo - 1e-12 <= s.parameter <= hi + 1e-12


@settings(max_examples=30, deadline=None)
@given(curves_on_tilts(2))
def test_solution_invariants(curves):
    try:
        pb = BargainingProblem.from_curves(curves)
        sols = [solve_nbs(pb), solve_wnbs(pb)]
    except BargainingError:
        assume(False)
    for s in sols:
        assert 0.0 <= s.parameter <= 15.0
        assert min(s.gains) >= 0.0
        assert 0.5 - 1e-12 <= s.jfi <= 1.0 + 1e-12

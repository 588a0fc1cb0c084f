import numpy as np
import pytest
from hypothesis import strategies as st

from intent_bargain.curves import UtilityCurve

TILTS = np.arange(16, dtype=float)

# filled by test_acceptance, printed once at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def concave_increasing(rng):
    inc = np.sort(rng.uniform(0.02, 1.0, 15))[::-1]
    v = np.concatenate([[0.0], np.cumsum(inc)])
    return UtilityCurve(tuple(TILTS), tuple(v / v[-1]))


def concave_decreasing(rng):
    dec = np.sort(rng.uniform(0.02, 1.0, 15))
    v = np.concatenate([[0.0], np.cumsum(dec)])
    return UtilityCurve(tuple(TILTS), tuple(1.0 - v / v[-1]))


def concave_opposed(rng):
    return {"a": concave_increasing(rng), "b": concave_decreasing(rng)}


@pytest.fixture(scope="session")
def linear_duel():
    return {"a": UtilityCurve((0.0, 15.0), (0.0, 1.0)),
            "b": UtilityCurve((0.0, 15.0), (1.0, 0.0))}


unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def curves_on_tilts(draw, n_players=2):
    """Arbitrary curves sampled at 0..15 deg."""
    return {f"p{k}": UtilityCurve(tuple(TILTS), tuple(draw(st.lists(unit, min_size=16, max_size=16))))
            for k in range(n_players)}


@st.composite
def opposed_monotone(draw):
    """Strictly increasing curve for 'a', strictly decreasing for 'b', both spanning [0, 1]."""
    steps = st.lists(st.floats(0.01, 1.0), min_size=15, max_size=15)
    up = np.concatenate([[0.0], np.cumsum(draw(steps))])
    down = np.concatenate([[0.0], np.cumsum(draw(steps))])
    return {"a": UtilityCurve(tuple(TILTS), tuple(up / up[-1])),
            "b": UtilityCurve(tuple(TILTS), tuple(1.0 - down / down[-1]))}


def brute_force(curves, d, objective, step=0.001, lo=0.0, hi=15.0):
    """Exhaustive maximizer of ``objective(gains)`` on a fine grid.

    Independent of the package's search: plain np.interp, no breakpoint merging.
    ``objective`` returns -inf where a point is ineligible.
    """
    T = np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)
    U = np.stack([np.interp(T, c.parameters, c.utilities) for c in curves.values()])
    G = U - np.asarray(d, dtype=float)[:, None]
    ok = np.all(G >= -1e-12, axis=0)
    score = np.where(ok, objective(np.maximum(G, 0.0)), -np.inf)
    return T[int(np.argmax(score))]

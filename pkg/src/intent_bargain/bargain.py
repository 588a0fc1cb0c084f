"""Bargaining over a single scalar control parameter.

Each player owns a piecewise-linear utility curve over the parameter domain.
The solvers search a refined grid (plus every curve breakpoint and every
feasible-interval endpoint) for the Nash, weighted Nash, Kalai-Smorodinsky
and entropy solutions.  The two solutions defined by an equality condition
(KSBS, SEBS) are refined off-grid with a bracketing root finder so the
condition holds to ~1e-12 instead of to grid resolution.

Ties are always broken toward the smallest parameter value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .curves import UtilityCurve, eval_curve

METHODS = ("NBS", "WNBS", "KSBS", "SEBS")

DEFAULT_RESOLUTION = 0.01
FEASIBILITY_TOL = 1e-12
EQUALITY_TOL = 1e-6
SEBS_LEVEL_TOL = 1e-3
ENTROPY_TIE_TOL = 1e-13
JFI_TIE_TOL = 1e-9
PROPORTION_FLOOR = 1e-12


class BargainingError(ValueError):
    pass


class NoFeasibleAgreement(BargainingError):
    def __init__(self, disagreement):
        self.disagreement = tuple(float(x) for x in disagreement)
        super().__init__(f"no parameter value gives every player at least its disagreement "
                         f"utility d={self.disagreement}")


class DegeneratePlayerError(BargainingError):
    pass


class SolverFailure(BargainingError):
    """A solver failed inside :func:`arbitrate`; ``method`` names which one."""

    def __init__(self, method: str, cause: Exception):
        self.method = method
        self.cause = cause
        super().__init__(f"{method} failed: {cause}")


@dataclass(frozen=True)
class Player:
    id: str
    curve: UtilityCurve
    disagreement: float | None = None  # defaults to the curve minimum
    weight: float | None = None

    def __post_init__(self):
        d = self.curve.minimum if self.disagreement is None else float(self.disagreement)
        object.__setattr__(self, "disagreement", d)
        if self.weight is not None and self.weight < 0:
            raise BargainingError(f"player {self.id}: weight must be >= 0")
        if d > self.curve.maximum:
            raise NoFeasibleAgreement([d])


@dataclass(frozen=True)
class BargainingProblem:
    players: tuple[Player, ...]
    domain: tuple[float, float] | None = None
    search_resolution: float = DEFAULT_RESOLUTION
    sebs_total_gain: float | None = None

    def __post_init__(self):
        players = tuple(self.players)
        if len(players) < 2:
            raise BargainingError("a bargaining problem needs at least 2 players")
        if len({p.id for p in players}) != len(players):
            raise BargainingError("player ids must be unique")
        if all(p.weight is None for p in players):
            players = tuple(replace(p, weight=1.0 / len(players)) for p in players)
        elif any(p.weight is None for p in players):
            raise BargainingError("give weights for every player or for none")
        if abs(sum(p.weight for p in players) - 1.0) > 1e-9:
            raise BargainingError("player weights must sum to 1")
        object.__setattr__(self, "players", players)

        if self.domain is None:
            lo = max(p.curve.span[0] for p in players)
            hi = min(p.curve.span[1] for p in players)
        else:
            lo, hi = map(float, self.domain)
        if not hi > lo:
            raise BargainingError(f"empty parameter domain [{lo}, {hi}]")
        for p in players:
            if p.curve.span[0] > lo or p.curve.span[1] < hi:
                raise BargainingError(f"curve of player {p.id} does not span [{lo}, {hi}]")
        object.__setattr__(self, "domain", (lo, hi))
        if not 0 < self.search_resolution <= hi - lo:
            raise BargainingError("search_resolution must be in (0, domain width]")

    @classmethod
    def from_curves(cls, curves: Mapping[str, UtilityCurve], *, weights=None,
                    disagreement=None, **kwargs) -> "BargainingProblem":
        ids = list(curves)
        w = [None] * len(ids) if weights is None else list(weights)
        d = [None] * len(ids) if disagreement is None else list(disagreement)
        if len(w) != len(ids) or len(d) != len(ids):
            raise BargainingError("weights/disagreement length must match the number of curves")
        players = tuple(Player(pid, curves[pid], d[k], w[k]) for k, pid in enumerate(ids))
        return cls(players, **kwargs)

    @property
    def n(self) -> int:
        return len(self.players)

    @property
    def disagreement(self) -> np.ndarray:
        return np.array([p.disagreement for p in self.players])

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.players])

    def grid(self) -> np.ndarray:
        """Refined search grid from the lower to the upper domain bound."""
        lo, hi = self.domain
        res = self.search_resolution
        k = int(math.floor((hi - lo) / res + 1e-9))
        pts = np.round(lo + res * np.arange(k + 1), 10)
        if hi - pts[-1] > 1e-9:
            pts = np.append(pts, hi)
        pts[-1] = min(pts[-1], hi)
        return pts

    def breakpoints(self) -> np.ndarray:
        lo, hi = self.domain
        pts = np.concatenate([np.asarray(p.curve.parameters) for p in self.players] + [[lo, hi]])
        return np.unique(pts[(pts >= lo) & (pts <= hi)])

    def utilities(self, T) -> np.ndarray:
        """Utilities, shape ``(n_players,) + shape(T)``."""
        return np.stack([eval_curve(p.curve, np.asarray(T, dtype=float)) for p in self.players])

    def gains(self, T) -> np.ndarray:
        u = self.utilities(T)
        d = self.disagreement.reshape((-1,) + (1,) * (u.ndim - 1))
        return u - d


@dataclass(frozen=True)
class Solution:
    method: str
    parameter: float
    utilities: tuple[float, ...]
    gains: tuple[float, ...]
    objective: float
    jfi: float
    exact: bool = True
    residual: float = 0.0
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "parameter": self.parameter,
            "parameter_rounded": round(self.parameter, 1),
            "utilities": list(self.utilities),
            "gains": list(self.gains),
            "objective": self.objective,
            "jfi": self.jfi,
            "exact": self.exact,
            "residual": self.residual,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Solution":
        return cls(
            method=str(data["method"]).upper(),
            parameter=float(data["parameter"]),
            utilities=tuple(float(x) for x in data["utilities"]),
            gains=tuple(float(x) for x in data["gains"]),
            objective=float(data["objective"]),
            jfi=float(data["jfi"]),
            exact=bool(data.get("exact", True)),
            residual=float(data.get("residual", 0.0)),
            notes=tuple(data.get("notes", ())),
        )


@dataclass(frozen=True)
class ArbitrationReport:
    solutions: tuple[Solution, ...]
    chosen_method: str
    chosen_parameter: float
    player_ids: tuple[str, ...] = ()
    notes: tuple[str, ...] = field(default=())

    def solution(self, method: str) -> Solution:
        for s in self.solutions:
            if s.method == method.upper():
                return s
        raise KeyError(method)

    def to_dict(self) -> dict:
        return {
            "player_ids": list(self.player_ids),
            "solutions": [s.to_dict() for s in self.solutions],
            "chosen_method": self.chosen_method,
            "chosen_parameter": self.chosen_parameter,
            "chosen_parameter_rounded": round(self.chosen_parameter, 1),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ArbitrationReport":
        return cls(
            solutions=tuple(Solution.from_dict(s) for s in data["solutions"]),
            chosen_method=str(data["chosen_method"]).upper(),
            chosen_parameter=float(data["chosen_parameter"]),
            player_ids=tuple(data.get("player_ids", ())),
            notes=tuple(data.get("notes", ())),
        )


# -- primitives ---------------------------------------------------------------

def jain_index(x: Sequence[float]) -> float:
    """Jain's fairness index (sum x)^2 / (n sum x^2)."""
    v = np.asarray(x, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("Jain's index needs at least one entry")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValueError("Jain's index is defined for finite non-negative entries")
    top = v.max()
    if top == 0:
        raise ValueError("Jain's index is undefined for an all-zero vector")
    # scaling by the max keeps uniform vectors at exactly 1 and one-hot ones at exactly 1/n
    v = v / top
    s = v.sum()
    return float(s * s / (v.size * np.dot(v, v)))


def _search_points(curve_or_problem, domain=None, resolution=DEFAULT_RESOLUTION) -> np.ndarray:
    if isinstance(curve_or_problem, BargainingProblem):
        pb = curve_or_problem
        return np.union1d(pb.grid(), pb.breakpoints())
    lo, hi = domain
    k = int(math.floor((hi - lo) / resolution + 1e-9))
    grid = np.round(lo + resolution * np.arange(k + 1), 10)
    grid = np.append(grid[grid < hi], hi)
    bp = np.asarray(curve_or_problem.parameters)
    return np.union1d(grid, bp[(bp >= lo) & (bp <= hi)])


def individual_optimum(curve: UtilityCurve, domain=None, resolution=DEFAULT_RESOLUTION) -> float:
    """Smallest parameter at which ``curve`` reaches its maximum over ``domain``."""
    domain = curve.span if domain is None else (float(domain[0]), float(domain[1]))
    T = _search_points(curve, domain, resolution)
    return float(T[np.argmax(eval_curve(curve, T))])


def ideal_point(problem: BargainingProblem) -> np.ndarray:
    T = _search_points(problem)
    return problem.utilities(T).max(axis=1)


def feasible_region(problem: BargainingProblem) -> list[tuple[float, float]]:
    """Maximal sub-intervals of the domain where every gain is non-negative.

    Exact for piecewise-linear curves: within each segment between
    breakpoints every gain is affine, so the feasible part is an interval.
    """
    B = problem.breakpoints()
    G = problem.gains(B)
    pieces: list[list[float]] = []
    for j in range(len(B) - 1):
        a, b = B[j], B[j + 1]
        lo, hi = a, b
        for ga, gb in zip(G[:, j], G[:, j + 1]):
            ok_a, ok_b = ga >= -FEASIBILITY_TOL, gb >= -FEASIBILITY_TOL
            if ok_a and ok_b:
                continue
            if not ok_a and not ok_b:
                lo, hi = 1.0, 0.0
                break
            root = a + (b - a) * ga / (ga - gb)
            if ok_a:
                hi = min(hi, root)
            else:
                lo = max(lo, root)
        if lo > hi:
            continue
        if pieces and lo - pieces[-1][1] <= FEASIBILITY_TOL:
            pieces[-1][1] = max(pieces[-1][1], hi)
        else:
            pieces.append([lo, hi])
    if not pieces:
        raise NoFeasibleAgreement(problem.disagreement)
    return [(float(lo), float(hi)) for lo, hi in pieces]


def _candidates(problem: BargainingProblem):
    """All search points, their gains, and the feasibility mask (gains clipped at 0)."""
    region = feasible_region(problem)
    ends = np.array([x for iv in region for x in iv])
    T = np.union1d(_search_points(problem), ends)
    G = problem.gains(T)
    feasible = np.all(G >= -FEASIBILITY_TOL, axis=0)
    return T, np.maximum(G, 0.0), feasible


def _solution(problem, method, T, objective, **extra) -> Solution:
    T = float(T)
    u = problem.utilities(T)
    g = np.maximum(u - problem.disagreement, 0.0)
    if not np.any(u > 0):
        raise BargainingError(f"{method}: every utility is zero at T={T}; Jain's index undefined")
    return Solution(method, T, tuple(map(float, u)), tuple(map(float, g)), float(objective),
                    jain_index(u), **extra)


def _first_argmax(values: np.ndarray, mask: np.ndarray) -> int:
    v = np.where(mask, values, -np.inf)
    return int(np.argmax(v))


def _weighted_log_product(G: np.ndarray, w: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w[:, None] > 0, w[:, None] * np.log(G), 0.0)
    return terms.sum(axis=0)


def _solve_product(problem, method, weights) -> Solution:
    T, G, feasible = _candidates(problem)
    score = _weighted_log_product(G, weights)
    if not np.any(np.isfinite(score) & feasible):
        total = G.sum(axis=0)
        j = _first_argmax(total, feasible)
        return _solution(problem, method, T[j], total[j],
                         notes=("zero product at every feasible point; maximized the sum of gains",))
    j = _first_argmax(score, feasible)
    exps = np.where(weights > 0, weights, 0.0)
    objective = float(np.prod(G[:, j] ** exps))
    return _solution(problem, method, T[j], objective)


def solve_nbs(problem: BargainingProblem) -> Solution:
    """Maximize the product of gains over the disagreement point."""
    # same code path as WNBS with equal weights, so the two agree bit for bit
    sol = _solve_product(problem, "NBS", np.full(problem.n, 1.0 / problem.n))
    if sol.notes:
        return sol
    return replace(sol, objective=float(np.prod(sol.gains)))


def solve_wnbs(problem: BargainingProblem) -> Solution:
    """Maximize the product of gains raised to the player weights."""
    w = problem.weights
    if np.ptp(w) == 0 or np.allclose(w, w[0], rtol=0, atol=1e-12):
        w = np.full(problem.n, 1.0 / problem.n)
    return _solve_product(problem, "WNBS", w)


def _equalizing_roots(problem, T, feasible, values_at) -> list[float]:
    """Refined roots of q_1(T) - q_0(T) between adjacent feasible search points.

    ``values_at(t)`` returns the vector q(t).  Only sign changes are bracketed.
    """
    Q = values_at(T)
    diff = Q[1] - Q[0]
    roots = []
    for j in np.nonzero((diff[:-1] * diff[1:] < 0) & feasible[:-1] & feasible[1:])[0]:
        f = lambda t: (lambda q: q[1] - q[0])(values_at(t))  # noqa: E731
        roots.append(brentq(f, T[j], T[j + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps))
    return roots


def solve_ksbs(problem: BargainingProblem) -> Solution:
    """Equalize every player's gain as a fraction of its best achievable gain.

    Among equal-ratio points the one with the largest common ratio wins.  When
    no point equalizes the ratios, the point with the smallest spread is
    returned with ``exact=False``.
    """
    ideal = ideal_point(problem)
    span = ideal - problem.disagreement
    if np.any(span <= FEASIBILITY_TOL):
        bad = [p.id for p, s in zip(problem.players, span) if s <= FEASIBILITY_TOL]
        raise DegeneratePlayerError(f"players {bad} cannot gain over their disagreement point")

    def ratios(t):
        g = problem.gains(t)
        return np.maximum(g, 0.0) / span.reshape((-1,) + (1,) * (g.ndim - 1))

    T, _, feasible = _candidates(problem)
    roots = _equalizing_roots(problem, T, feasible, ratios)
    pts = np.concatenate([T[feasible], roots])
    R = ratios(pts)
    spread = R.max(axis=0) - R.min(axis=0)
    common = R.mean(axis=0)
    ok = spread <= EQUALITY_TOL
    if np.any(ok):
        order = np.lexsort((pts, -common))
        j = next(k for k in order if ok[k])
        return _solution(problem, "KSBS", pts[j], common[j], residual=float(spread[j]))
    j = int(np.lexsort((pts, spread))[0])
    return _solution(problem, "KSBS", pts[j], common[j], exact=False, residual=float(spread[j]),
                     notes=("no point equalizes the normalized gains; nearest point reported",))


def _entropy(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    total = G.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        P = G / total
        terms = np.where(P >= PROPORTION_FLOOR, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
    return -terms.sum(axis=0), total


def solve_sebs(problem: BargainingProblem) -> Solution:
    """Maximize the Shannon entropy of the gain proportions.

    Ties in entropy go to the larger total gain.  With ``sebs_total_gain``
    set, only points whose total gain is within 1e-3 of it are eligible.
    """
    T, _, feasible = _candidates(problem)

    def clipped_gains(t):
        return np.maximum(problem.gains(t), 0.0)

    extra = _equalizing_roots(problem, T, feasible, clipped_gains)
    c = problem.sebs_total_gain
    if c is not None:
        level = lambda t: np.stack([np.zeros_like(np.asarray(t, dtype=float)),  # noqa: E731
                                    clipped_gains(t).sum(axis=0) - c])
        extra += _equalizing_roots(problem, T, feasible, level)
    pts = np.concatenate([T[feasible], extra])
    H, total = _entropy(clipped_gains(pts))
    eligible = total > FEASIBILITY_TOL
    if c is not None:
        eligible &= np.abs(total - c) <= SEBS_LEVEL_TOL
    if not np.any(eligible):
        if c is not None:
            raise BargainingError(f"no feasible point has total gain within {SEBS_LEVEL_TOL} of {c}")
        raise BargainingError("total gain is zero at every feasible point")
    hmax = H[eligible].max()
    top = eligible & (H >= hmax - ENTROPY_TIE_TOL)
    order = np.lexsort((pts, -total))
    j = next(k for k in order if top[k])
    notes = () if c is not None else (
        "no total-gain constant given: entropy maximized over all positive-gain points",)
    g = clipped_gains(pts[j])
    p = g / g.sum()
    return _solution(problem, "SEBS", pts[j], H[j], residual=float(p.max() - p.min()),
                     notes=notes)


SOLVERS = {"NBS": solve_nbs, "WNBS": solve_wnbs, "KSBS": solve_ksbs, "SEBS": solve_sebs}


def parse_methods(methods: Iterable[str] | str) -> tuple[str, ...]:
    if isinstance(methods, str):
        methods = [m for m in methods.split(",") if m.strip()]
    tags = {m.strip().upper() for m in methods}
    unknown = tags - set(METHODS)
    if unknown:
        raise BargainingError(f"unknown methods {sorted(unknown)}; expected a subset of {METHODS}")
    if not tags:
        raise BargainingError("at least one method is required")
    return tuple(m for m in METHODS if m in tags)


def solve(problem: BargainingProblem, methods=METHODS) -> tuple[Solution, ...]:
    out = []
    for m in parse_methods(methods):
        try:
            out.append(SOLVERS[m](problem))
        except BargainingError as exc:
            raise SolverFailure(m, exc) from exc
    return tuple(out)


def arbitrate(problem: BargainingProblem, methods=METHODS) -> ArbitrationReport:
    """Run the requested solvers and pick the one with the highest Jain index.

    JFI values within 1e-9 of each other count as tied; ties go to the
    earlier method in NBS, WNBS, KSBS, SEBS order.
    """
    solutions = solve(problem, methods)
    best = max(s.jfi for s in solutions)
    chosen = next(s for s in solutions if s.jfi >= best - JFI_TIE_TOL)
    return ArbitrationReport(solutions, chosen.method, chosen.parameter,
                             tuple(p.id for p in problem.players))

"""Intent conflict workflow: Identifier -> Assignment -> Estimator -> Decision Authority.

Intents arrive as structured records.  The Identifier pulls out the KPI and
goal, the Assignment Module looks up which SON function and control parameter
serve that KPI, the Estimator finds each intent's preferred parameter value,
and the Decision Authority bargains over the shared parameter when targets
collide.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .bargain import (DEFAULT_RESOLUTION, METHODS, ArbitrationReport, BargainingProblem,
                      Player, arbitrate, individual_optimum)
from .curves import UtilityCurve, eval_curve

DIRECTIONS = ("maximize", "minimize", "reach-threshold")

#: KPI aliases accepted in intents, mapped to the canonical KPI name.
KPI_VOCABULARY = {
    "cqi": "CQI", "coverage": "CQI",
    "sinr": "SINR", "capacity": "SINR", "interference": "SINR",
    "load": "LOAD", "load-balance": "LOAD",
}

#: Which SON function owns each KPI.
KPI_FUNCTION = {"CQI": "CCO", "SINR": "ICIC", "LOAD": "MLB"}

#: Control parameters each function may tune.
FUNCTION_CATALOG = {
    "CCO": ("Tilt", "TxPower"),
    "ICIC": ("Tilt", "TxPower"),
    "MLB": ("TxPower",),
}


class PipelineError(ValueError):
    pass


class VocabularyError(PipelineError):
    pass


class CatalogError(PipelineError):
    pass


class InfeasibleGoal(PipelineError):
    def __init__(self, goal, best):
        self.goal = goal
        self.best = best
        super().__init__(f"goal {goal} is unreachable; best achievable value is {best}")


class NoConflict(PipelineError):
    pass


class StageError(PipelineError):
    """Wraps an error with the name of the workflow stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


@dataclass(frozen=True)
class Intent:
    id: str
    kpi_name: str
    direction: str = "maximize"
    goal_value: float | None = None
    priority_weight: float = 1.0
    description: str = ""

    def __post_init__(self):
        if self.priority_weight < 0:
            raise PipelineError(f"intent {self.id}: priority must be >= 0")
        if self.direction not in DIRECTIONS:
            raise PipelineError(f"intent {self.id}: unknown goal direction {self.direction!r}")
        if self.direction == "reach-threshold" and self.goal_value is None:
            raise PipelineError(f"intent {self.id}: reach-threshold needs a goal value")

    @classmethod
    def from_dict(cls, data: Mapping) -> "Intent":
        goal = data.get("goal", {}) or {}
        try:
            return cls(
                id=str(data["id"]),
                kpi_name=str(data["kpi"]),
                direction=str(goal.get("direction", "maximize")),
                goal_value=None if goal.get("value") is None else float(goal["value"]),
                priority_weight=float(data.get("priority", 1.0)),
                description=str(data.get("description", "")),
            )
        except KeyError as exc:
            raise PipelineError(f"intent record missing {exc}") from None


def load_intents(path: Path | str) -> list[Intent]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data.get("intents", [])
    if not isinstance(data, list):
        raise PipelineError("intents file must hold a list of intent records")
    return [Intent.from_dict(d) for d in data]


@dataclass(frozen=True)
class KpiSpec:
    kpi_name: str
    direction: str
    goal_value: float | None = None


@dataclass(frozen=True)
class FunctionAssignment:
    function: str
    ncp: str

    def __post_init__(self):
        if self.ncp not in FUNCTION_CATALOG.get(self.function, ()):
            raise CatalogError(f"({self.function}, {self.ncp}) is not in the function catalog")


@dataclass(frozen=True)
class ConflictCase:
    ncp: str | None
    targets: Mapping[str, float]
    conflict_kind: str  # "direct-target" or "none"

    @property
    def intent_ids(self) -> tuple[str, ...]:
        return tuple(self.targets)


def identify(intent: Intent) -> KpiSpec:
    name = KPI_VOCABULARY.get(intent.kpi_name.strip().lower())
    if name is None:
        raise VocabularyError(f"intent {intent.id}: unknown KPI {intent.kpi_name!r}; "
                              f"known: {sorted(KPI_VOCABULARY)}")
    return KpiSpec(name, intent.direction, intent.goal_value)


def assign(kpi: KpiSpec, ncp: str = "Tilt") -> FunctionAssignment:
    """Catalog lookup of the function serving ``kpi`` within the ``ncp`` profile."""
    function = KPI_FUNCTION.get(kpi.kpi_name)
    if function is None:
        raise CatalogError(f"no function handles KPI {kpi.kpi_name}")
    if ncp not in FUNCTION_CATALOG[function]:
        raise CatalogError(f"{function} (for {kpi.kpi_name}) cannot tune {ncp}")
    return FunctionAssignment(function, ncp)


def _search_grid(domain, resolution):
    lo, hi = domain
    k = int(np.floor((hi - lo) / resolution + 1e-9))
    g = np.round(lo + resolution * np.arange(k + 1), 10)
    return np.append(g[g < hi], hi)


def estimate_target(assignment: FunctionAssignment, kpi: KpiSpec, curve: UtilityCurve,
                    raw=None, resolution: float = DEFAULT_RESOLUTION) -> float:
    """Preferred parameter value for one intent.

    ``raw`` is an optional ``(parameters, values)`` pair with the KPI in its own
    units; thresholds are compared against it, or against the utility curve
    when it is absent.  Ties go to the smallest parameter.
    """
    domain = curve.span
    if kpi.direction == "maximize":
        return individual_optimum(curve, domain, resolution)
    T = np.union1d(_search_grid(domain, resolution), curve.parameters)
    if kpi.direction == "minimize":
        return float(T[np.argmin(eval_curve(curve, T))])
    if raw is None:
        values = eval_curve(curve, T)
    else:
        xs, ys = map(np.asarray, raw)
        values = np.interp(T, xs, ys)
    hits = np.nonzero(values >= kpi.goal_value)[0]
    if hits.size == 0:
        raise InfeasibleGoal(kpi.goal_value, float(values.max()))
    return float(T[hits[0]])


def detect_conflict(assignments: Mapping[str, FunctionAssignment], targets: Mapping[str, float],
                    resolution: float = DEFAULT_RESOLUTION) -> ConflictCase:
    if len(assignments) < 2:
        raise PipelineError("conflict detection needs at least two resolved intents")
    by_ncp: dict[str, list[str]] = {}
    for iid, a in assignments.items():
        by_ncp.setdefault(a.ncp, []).append(iid)
    for ncp, ids in by_ncp.items():
        vals = [targets[i] for i in ids]
        if len(ids) >= 2 and max(vals) - min(vals) > resolution:
            return ConflictCase(ncp, {i: float(targets[i]) for i in ids}, "direct-target")
    return ConflictCase(None, {i: float(t) for i, t in targets.items()}, "none")


def normalized_weights(priorities: Sequence[float]) -> list[float]:
    p = np.asarray(priorities, dtype=float)
    if np.any(p < 0) or p.sum() <= 0:
        raise PipelineError("priorities must be non-negative with a positive sum")
    return list(p / p.sum())


def decide(conflict: ConflictCase, curves: Mapping[str, UtilityCurve],
           priorities: Mapping[str, float], methods=METHODS,
           resolution: float = DEFAULT_RESOLUTION) -> ArbitrationReport:
    """Bargain over the conflicting parameter and return the fairest outcome."""
    if conflict.conflict_kind != "direct-target":
        raise NoConflict("no direct-target conflict; apply each intent's target directly")
    ids = conflict.intent_ids
    weights = normalized_weights([priorities[i] for i in ids])
    players = tuple(Player(i, curves[i], None, w) for i, w in zip(ids, weights))
    problem = BargainingProblem(players, search_resolution=resolution)
    return arbitrate(problem, methods)


@dataclass
class PipelineResult:
    kpis: dict[str, KpiSpec]
    assignments: dict[str, FunctionAssignment]
    targets: dict[str, float]
    conflict: ConflictCase
    report: ArbitrationReport | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kpis": {i: {"kpi": k.kpi_name, "direction": k.direction, "goal": k.goal_value}
                     for i, k in self.kpis.items()},
            "assignments": {i: {"function": a.function, "ncp": a.ncp}
                            for i, a in self.assignments.items()},
            "targets": dict(self.targets),
            "conflict": {"ncp": self.conflict.ncp, "kind": self.conflict.conflict_kind,
                         "targets": dict(self.conflict.targets)},
            "report": None if self.report is None else self.report.to_dict(),
            **self.extras,
        }


def run_pipeline(intents: Sequence[Intent], curves_by_kpi: Mapping[str, UtilityCurve],
                 raw_by_kpi: Mapping | None = None, methods=METHODS,
                 resolution: float = DEFAULT_RESOLUTION, ncp: str = "Tilt") -> PipelineResult:
    """Run every stage; failures surface as :class:`StageError` naming the stage.

    ``curves_by_kpi`` maps canonical KPI names (``"CQI"``, ``"SINR"``) to utility curves.
    """
    raw_by_kpi = raw_by_kpi or {}
    if len({i.id for i in intents}) != len(intents):
        raise StageError("identifier", PipelineError("intent ids must be unique"))

    def stage(name, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except (PipelineError, ValueError, KeyError) as exc:
            raise StageError(name, exc) from exc

    kpis = {i.id: stage("identifier", identify, i) for i in intents}
    assignments = {iid: stage("assignment", assign, k, ncp) for iid, k in kpis.items()}
    curves = {}
    for iid, k in kpis.items():
        if k.kpi_name not in curves_by_kpi:
            raise StageError("estimator", PipelineError(f"no utility curve for KPI {k.kpi_name}"))
        curves[iid] = curves_by_kpi[k.kpi_name]
    targets = {iid: stage("estimator", estimate_target, assignments[iid], k, curves[iid],
                          raw_by_kpi.get(k.kpi_name), resolution)
               for iid, k in kpis.items()}
    conflict = detect_conflict(assignments, targets, resolution)
    result = PipelineResult(kpis, assignments, targets, conflict)
    if conflict.conflict_kind == "direct-target":
        priorities = {i.id: i.priority_weight for i in intents}
        result.report = stage("decision-authority", decide, conflict, curves, priorities,
                              methods, resolution)
    return result

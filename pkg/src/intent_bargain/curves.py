"""Piecewise-linear utility curves and their CSV exchange format."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np


class DomainError(ValueError):
    """Parameter value outside the span a curve is defined on."""


class CurveFormatError(ValueError):
    pass


@dataclass(frozen=True)
class UtilityCurve:
    """Utility sampled at strictly increasing parameter values, linear in between."""

    parameters: tuple[float, ...]
    utilities: tuple[float, ...]

    def __post_init__(self):
        t = np.asarray(self.parameters, dtype=float)
        u = np.asarray(self.utilities, dtype=float)
        if t.ndim != 1 or t.shape != u.shape:
            raise ValueError("parameters and utilities must be 1-D and of equal length")
        if t.size < 2:
            raise ValueError("a utility curve needs at least 2 samples")
        if not np.all(np.diff(t) > 0):
            raise ValueError("parameter values must be strictly increasing")
        if not np.all(np.isfinite(u)) or u.min() < 0.0 or u.max() > 1.0:
            raise ValueError("utilities must lie in [0, 1]")
        object.__setattr__(self, "parameters", tuple(float(x) for x in t))
        object.__setattr__(self, "utilities", tuple(float(x) for x in u))

    @classmethod
    def from_points(cls, points: Iterable[tuple[float, float]]) -> "UtilityCurve":
        pts = list(points)
        return cls(tuple(p for p, _ in pts), tuple(u for _, u in pts))

    @property
    def span(self) -> tuple[float, float]:
        return self.parameters[0], self.parameters[-1]

    @property
    def minimum(self) -> float:
        return min(self.utilities)

    @property
    def maximum(self) -> float:
        return max(self.utilities)

    def __call__(self, T):
        return eval_curve(self, T)


def eval_curve(curve: UtilityCurve, T):
    """Evaluate ``curve`` at ``T`` (scalar or array) by linear interpolation."""
    x = np.asarray(T, dtype=float)
    lo, hi = curve.span
    if np.any(x < lo) or np.any(x > hi) or np.any(np.isnan(x)):
        raise DomainError(f"parameter outside curve span [{lo}, {hi}]")
    y = np.interp(x, curve.parameters, curve.utilities)
    return float(y) if y.ndim == 0 else y


def write_curves_csv(path: Path | str | None, parameters, curves: Mapping[str, UtilityCurve]) -> str:
    """Write curves sampled at ``parameters`` as ``parameter,utility_<id>,...``.

    Returns the CSV text; also writes it when ``path`` is given.
    """
    ids = list(curves)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["parameter"] + [f"utility_{pid}" for pid in ids])
    for t in parameters:
        w.writerow([f"{t:.6f}"] + [f"{eval_curve(curves[pid], t):.6f}" for pid in ids])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_curves_csv(source: Path | str) -> dict[str, UtilityCurve]:
    """Parse a curve CSV; ``source`` is a path or the CSV text itself."""
    p = Path(source) if not (isinstance(source, str) and "\n" in source) else None
    text = p.read_text() if p is not None else source
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise CurveFormatError("empty curve file")
    header = [h.strip() for h in rows[0]]
    if header[0] != "parameter" or len(header) < 2:
        raise CurveFormatError("header must start with 'parameter' followed by utility_<id> columns")
    ids = []
    for h in header[1:]:
        if not h.startswith("utility_") or len(h) == len("utility_"):
            raise CurveFormatError(f"bad column name {h!r}")
        ids.append(h[len("utility_"):])
    if len(set(ids)) != len(ids):
        raise CurveFormatError("duplicate player ids")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise CurveFormatError(f"non-numeric entry: {exc}") from None
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != len(header):
        raise CurveFormatError("need at least 2 complete rows")
    try:
        return {pid: UtilityCurve(tuple(data[:, 0]), tuple(data[:, k + 1]))
                for k, pid in enumerate(ids)}
    except ValueError as exc:
        raise CurveFormatError(str(exc)) from None

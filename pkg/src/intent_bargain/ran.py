"""Desk-scale radio model: one live site, two dark neighbours, tilt as the contested knob.

One site is active with three sectors; the remaining sites are switched off
and contribute neither signal nor interference.  Call-text UEs sit on a ring
at or beyond the cell edge, video UEs are scattered around the coordination
center.  For each tilt on a grid the model reports the mean SINR of the video
group and the mean CQI of the call-text group.

Tilt follows the coverage sense used by the scenario's operators: raising the
tilt lifts the beam toward the horizon and expands coverage, lowering it
concentrates the signal near the site.  Concretely the boresight depression
angle is ``tilt_reference - tilt``.  Set ``tilt_sense="downtilt"`` on a sector
to get the plain mechanical-downtilt convention instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .curves import UtilityCurve

#: Minimum SINR (dB) for CQI 1..15.  CQI 0 covers everything below the first entry.
CQI_SINR_THRESHOLDS_DB: tuple[float, ...] = (
    -6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7,
)

SERVICES = ("CallText", "Video")


class ScenarioError(ValueError):
    """Raised for invalid scenario configurations or geometry."""


@dataclass(frozen=True)
class AntennaPattern:
    boresight_gain: float = 10.0  # dBi
    vertical_hpbw: float = 10.0
    horizontal_hpbw: float = 70.0
    vertical_sla: float = 18.0  # dB, attenuation magnitude
    horizontal_sla: float = 20.0
    overall_floor: float = 30.0

    def __post_init__(self):
        if self.vertical_hpbw <= 0 or self.horizontal_hpbw <= 0:
            raise ScenarioError("half-power beamwidths must be positive")
        for name in ("vertical_sla", "horizontal_sla", "overall_floor"):
            if getattr(self, name) < 0:
                raise ScenarioError(f"{name} is an attenuation magnitude and must be >= 0")


@dataclass(frozen=True)
class Sector:
    site_position: tuple[float, float]
    azimuth: float
    antenna_height: float = 30.0
    tx_power: float = 46.0
    active: bool = True
    tilt: float = 0.0
    tilt_sense: str = "coverage"
    tilt_reference: float = 15.0

    def __post_init__(self):
        if not 0.0 <= self.tilt <= 15.0:
            raise ScenarioError(f"tilt {self.tilt} outside [0, 15]")
        if self.tilt_sense not in ("coverage", "downtilt"):
            raise ScenarioError(f"unknown tilt_sense {self.tilt_sense!r}")


@dataclass(frozen=True)
class UeGroup:
    service: str
    positions: tuple[tuple[float, float], ...]
    height: float = 1.5

    def __post_init__(self):
        if self.service not in SERVICES:
            raise ScenarioError(f"unknown service {self.service!r}; expected one of {SERVICES}")

    @property
    def count(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class RadioEnvironment:
    pathloss_intercept: float = 128.1
    pathloss_slope: float = 37.6
    shadowing_std: float = 8.0
    noise_figure: float = 9.0
    bandwidth: float = 5e6
    thermal_noise_density: float = -174.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.shadowing_std < 0:
            raise ScenarioError("shadowing_std must be >= 0")
        if self.bandwidth <= 0:
            raise ScenarioError("bandwidth must be positive")

    @property
    def noise_floor_dbm(self) -> float:
        return self.thermal_noise_density + 10.0 * math.log10(self.bandwidth) + self.noise_figure


@dataclass(frozen=True)
class RanScenario:
    sectors: tuple[Sector, ...]
    ue_groups: tuple[UeGroup, ...]
    antenna: AntennaPattern = field(default_factory=AntennaPattern)

    @property
    def active_sectors(self) -> tuple[Sector, ...]:
        return tuple(s for s in self.sectors if s.active)

    def group(self, service: str) -> UeGroup:
        groups = [g for g in self.ue_groups if g.service == service]
        if not groups or sum(g.count for g in groups) == 0:
            raise ScenarioError(f"scenario has no {service} UEs")
        if len(groups) == 1:
            return groups[0]
        return UeGroup(service, tuple(p for g in groups for p in g.positions), groups[0].height)


@dataclass(frozen=True)
class KpiCurves:
    tilt_grid: tuple[float, ...]
    mean_sinr: tuple[float, ...]
    mean_cqi: tuple[float, ...]


def _wrap180(angle):
    return (np.asarray(angle, dtype=float) + 180.0) % 360.0 - 180.0


def antenna_gain(pattern: AntennaPattern, vertical_offset, horizontal_offset, tilt=0.0):
    """Parabolic 3GPP-style pattern with per-plane side-lobe caps and an overall floor.

    ``vertical_offset`` is the UE's vertical angle in the same frame as ``tilt``;
    the vertical attenuation depends on their difference.  Works on scalars
    and arrays.
    """
    theta = np.asarray(vertical_offset, dtype=float)
    phi = np.asarray(horizontal_offset, dtype=float)
    if np.any(np.abs(theta) > 90.0) or np.any(np.abs(phi) > 180.0):
        raise ScenarioError("angles outside [-90, 90] x [-180, 180]")
    a_v = np.minimum(12.0 * ((theta - tilt) / pattern.vertical_hpbw) ** 2, pattern.vertical_sla)
    a_h = np.minimum(12.0 * (phi / pattern.horizontal_hpbw) ** 2, pattern.horizontal_sla)
    gain = pattern.boresight_gain - np.minimum(a_v + a_h, pattern.overall_floor)
    return float(gain) if gain.ndim == 0 else gain


def path_loss_db(distance):
    """Macro-cell log-distance loss, 128.1 + 37.6 log10(d_km)."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ScenarioError("distance must be positive")
    loss = 128.1 + 37.6 * np.log10(d / 1000.0)
    return float(loss) if loss.ndim == 0 else loss


def _path_loss(env: RadioEnvironment, d):
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ScenarioError("distance must be positive")
    return env.pathloss_intercept + env.pathloss_slope * np.log10(d / 1000.0)


def shadowing_db(seed: int, link_id, std: float = 8.0) -> float:
    """Zero-mean normal draw, reproducible for a given ``(seed, link_id)``.

    ``link_id`` is a non-negative int or a tuple of them.
    """
    if std == 0:
        return 0.0
    key = (link_id,) if isinstance(link_id, (int, np.integer)) else tuple(link_id)
    rng = np.random.default_rng([int(seed), *map(int, key)])
    return float(std * rng.standard_normal())


def _geometry(sector: Sector, positions: np.ndarray, ue_height: float):
    dx = positions[:, 0] - sector.site_position[0]
    dy = positions[:, 1] - sector.site_position[1]
    ground = np.hypot(dx, dy)
    if np.any(ground <= 0):
        raise ScenarioError("UE collocated with a site")
    depression = np.degrees(np.arctan2(sector.antenna_height - ue_height, ground))
    bearing = np.degrees(np.arctan2(dy, dx))
    horizontal = _wrap180(bearing - sector.azimuth)
    distance = np.hypot(ground, sector.antenna_height - ue_height)
    return depression, horizontal, distance


def _vertical_frame(sector: Sector, depression):
    # Maps the UE depression angle into the frame where gain peaks at ``tilt``.
    if sector.tilt_sense == "downtilt":
        return depression
    return sector.tilt_reference - depression


def _rx_power(sector, positions, tilt, env, pattern, ue_height, link_ids=None):
    depression, horizontal, distance = _geometry(sector, positions, ue_height)
    theta = np.clip(_vertical_frame(sector, depression), -90.0, 90.0)
    gain = antenna_gain(pattern, theta, horizontal, tilt)
    rx = sector.tx_power + gain - _path_loss(env, distance)
    if env.shadowing_std > 0 and link_ids is not None:
        rx = rx - np.array([shadowing_db(env.rng_seed, lid, env.shadowing_std) for lid in link_ids])
    return rx


def rx_power_dbm(sector: Sector, ue_position, tilt: float, env: RadioEnvironment,
                 pattern: AntennaPattern | None = None, ue_height: float = 1.5,
                 link_id=None) -> float:
    """Link budget: tx power + antenna gain - path loss - shadowing.

    Without a ``link_id`` no shadowing is applied.
    """
    if not sector.active:
        raise ScenarioError("inactive sector carries no signal")
    pattern = pattern or AntennaPattern()
    pos = np.asarray([ue_position], dtype=float)
    ids = None if link_id is None else [link_id]
    return float(_rx_power(sector, pos, tilt, env, pattern, ue_height, ids)[0])


def _sinr_matrix(scenario: RanScenario, positions, tilt, env, ue_height, group_id):
    active = [(k, s) for k, s in enumerate(scenario.sectors) if s.active]
    if not active:
        raise ScenarioError("no active sectors")
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    rx_dbm = np.vstack([
        _rx_power(s, positions, tilt, env, scenario.antenna, ue_height,
                  [(group_id, k, u) for u in range(len(positions))])
        for k, s in active
    ])
    rx_mw = 10.0 ** (rx_dbm / 10.0)
    serving = np.argmax(rx_mw, axis=0)
    cols = np.arange(rx_mw.shape[1])
    signal = rx_mw[serving, cols]
    interference = rx_mw.sum(axis=0) - signal
    noise = 10.0 ** (env.noise_floor_dbm / 10.0)
    return 10.0 * np.log10(signal / (interference + noise))


def compute_sinr_db(scenario: RanScenario, ue_position, tilt: float, env: RadioEnvironment,
                    ue_height: float = 1.5) -> float:
    """SINR of the strongest active sector against all other active sectors plus noise."""
    return float(_sinr_matrix(scenario, [ue_position], tilt, env, ue_height, 0)[0])


def sinr_to_cqi(sinr, thresholds: Sequence[float] = CQI_SINR_THRESHOLDS_DB):
    cqi = np.searchsorted(np.asarray(thresholds), np.asarray(sinr, dtype=float), side="right")
    return int(cqi) if np.ndim(cqi) == 0 else cqi


def _validate_grid(tilt_grid):
    grid = tuple(float(t) for t in tilt_grid)
    if not grid:
        raise ScenarioError("empty tilt grid")
    if min(grid) < 0 or max(grid) > 15:
        raise ScenarioError("tilt grid must lie within [0, 15]")
    return grid


def build_kpi_curves(scenario: RanScenario, tilt_grid, env: RadioEnvironment,
                     thresholds: Sequence[float] = CQI_SINR_THRESHOLDS_DB) -> KpiCurves:
    grid = _validate_grid(tilt_grid)
    video = scenario.group("Video")
    calltext = scenario.group("CallText")
    sinr_means, cqi_means = [], []
    for t in grid:
        v = _sinr_matrix(scenario, video.positions, t, env, video.height, SERVICES.index("Video"))
        c = _sinr_matrix(scenario, calltext.positions, t, env, calltext.height,
                         SERVICES.index("CallText"))
        sinr_means.append(float(np.mean(v)))
        cqi_means.append(float(np.mean(sinr_to_cqi(c, thresholds))))
    return KpiCurves(grid, tuple(sinr_means), tuple(cqi_means))


def normalize_to_utility(raw, tilts=None) -> UtilityCurve:
    """Min-max scale a per-tilt KPI series into a utility curve on [0, 1]."""
    values = np.asarray(raw, dtype=float)
    if values.size == 0:
        raise ScenarioError("empty KPI series")
    lo, hi = values.min(), values.max()
    if not hi > lo:
        raise ScenarioError("constant KPI series cannot be normalized")
    if tilts is None:
        tilts = np.arange(values.size, dtype=float)
    u = np.clip((values - lo) / (hi - lo), 0.0, 1.0)
    return UtilityCurve(tuple(float(t) for t in tilts), tuple(float(x) for x in u))


# -- scenario construction ----------------------------------------------------

def _ring_positions(rng, count, center, r_min, r_max):
    ang = rng.uniform(0.0, 2.0 * np.pi, count)
    rad = rng.uniform(r_min, r_max, count)
    return np.column_stack([center[0] + rad * np.cos(ang), center[1] + rad * np.sin(ang)])


def _disk_positions(rng, count, center, r_min, radius):
    ang = rng.uniform(0.0, 2.0 * np.pi, count)
    # uniform over the annulus area
    rad = np.sqrt(rng.uniform(r_min ** 2, radius ** 2, count))
    return np.column_stack([center[0] + rad * np.cos(ang), center[1] + rad * np.sin(ang)])


DEFAULT_CONFIG: dict = {
    "cell_radius": 500.0,
    "sites": [
        {"id": "A", "position": [0.0, 0.0], "height": 30.0, "active": True},
        {"id": "B", "position": [750.0, 433.0], "height": 30.0, "active": False},
        {"id": "C", "position": [750.0, -433.0], "height": 30.0, "active": False},
    ],
    "sectors": [
        {"site": site, "azimuth": az, "tx_power": 46.0}
        for site in ("A", "B", "C") for az in (0.0, 120.0, 240.0)
    ],
    "antenna": {
        "boresight_gain": 10.0, "vertical_hpbw": 10.0, "horizontal_hpbw": 70.0,
        "vertical_sla": 18.0, "horizontal_sla": 20.0, "overall_floor": 30.0,
        "tilt_sense": "coverage", "tilt_reference": 15.0,
    },
    "ue_groups": [
        {"service": "CallText", "count": 80, "height": 1.5,
         "placement": {"kind": "ring", "center": [0.0, 0.0], "r_min": 1.0, "r_max": 1.3},
         "layout_seed": 7},
        {"service": "Video", "count": 20, "height": 1.5,
         "placement": {"kind": "disk", "center": [0.0, 0.0], "r_min": 0.05, "radius": 0.3},
         "layout_seed": 11},
    ],
    "environment": {
        "pathloss_intercept": 128.1, "pathloss_slope": 37.6, "shadowing_std": 8.0,
        "noise_figure": 9.0, "bandwidth": 5e6, "thermal_noise_density": -174.0,
    },
    "cqi_thresholds_db": list(CQI_SINR_THRESHOLDS_DB),
    "tilt_grid": {"min": 0.0, "max": 15.0, "step": 1.0},
    "seed": 42,
}


def default_config() -> dict:
    import copy
    return copy.deepcopy(DEFAULT_CONFIG)


def _require(cfg: dict, key: str, kind=None):
    if key not in cfg:
        raise ScenarioError(f"config missing required key {key!r}")
    value = cfg[key]
    if kind is not None and not isinstance(value, kind):
        raise ScenarioError(f"config key {key!r} has wrong type")
    return value


def tilt_grid_from_config(cfg: dict) -> tuple[float, ...]:
    g = cfg.get("tilt_grid", {"min": 0.0, "max": 15.0, "step": 1.0})
    lo, hi, step = float(g["min"]), float(g["max"]), float(g["step"])
    if step <= 0 or hi < lo:
        raise ScenarioError("tilt_grid needs min <= max and step > 0")
    n = int(round((hi - lo) / step)) + 1
    return _validate_grid(round(lo + k * step, 10) for k in range(n))


def scenario_from_config(cfg: dict, seed: int | None = None):
    """Build ``(scenario, environment, tilt_grid, cqi_thresholds)`` from a config dict.

    ``seed`` overrides the config's ``seed``; it drives shadowing only.  UE
    layouts use each group's own ``layout_seed`` so a layout is a fixed snapshot.
    """
    if not isinstance(cfg, dict):
        raise ScenarioError("scenario config must be a JSON object")
    radius = float(cfg.get("cell_radius", 500.0))
    sites = {s["id"]: s for s in _require(cfg, "sites", list)}
    ant_cfg = dict(cfg.get("antenna", {}))
    tilt_sense = ant_cfg.pop("tilt_sense", "coverage")
    tilt_reference = float(ant_cfg.pop("tilt_reference", 15.0))
    try:
        antenna = AntennaPattern(**ant_cfg)
    except TypeError as exc:
        raise ScenarioError(f"bad antenna block: {exc}") from None

    sectors = []
    for sc in _require(cfg, "sectors", list):
        site = sites.get(sc.get("site"))
        if site is None:
            raise ScenarioError(f"sector references unknown site {sc.get('site')!r}")
        sectors.append(Sector(
            site_position=(float(site["position"][0]), float(site["position"][1])),
            azimuth=float(sc["azimuth"]),
            antenna_height=float(site.get("height", 30.0)),
            tx_power=float(sc.get("tx_power", 46.0)),
            active=bool(site.get("active", True)) and bool(sc.get("active", True)),
            tilt_sense=tilt_sense,
            tilt_reference=tilt_reference,
        ))

    groups_cfg = _require(cfg, "ue_groups", list)
    if not groups_cfg:
        raise ScenarioError("ue_groups must not be empty")
    groups = []
    for gc in groups_cfg:
        service = _require(gc, "service")
        height = float(gc.get("height", 1.5))
        if "positions" in gc:
            pos = np.asarray(gc["positions"], dtype=float).reshape(-1, 2)
        else:
            count = int(_require(gc, "count"))
            pl = _require(gc, "placement", dict)
            rng = np.random.default_rng(int(gc.get("layout_seed", 0)))
            center = pl.get("center", [0.0, 0.0])
            if pl.get("kind") == "ring":
                pos = _ring_positions(rng, count, center, pl["r_min"] * radius, pl["r_max"] * radius)
            elif pl.get("kind") == "disk":
                pos = _disk_positions(rng, count, center, pl.get("r_min", 0.0) * radius,
                                      pl["radius"] * radius)
            else:
                raise ScenarioError(f"unknown placement kind {pl.get('kind')!r}")
        groups.append(UeGroup(service, tuple((float(x), float(y)) for x, y in pos), height))

    env_cfg = dict(cfg.get("environment", {}))
    env_cfg["rng_seed"] = int(cfg.get("seed", 0) if seed is None else seed)
    try:
        env = RadioEnvironment(**env_cfg)
    except TypeError as exc:
        raise ScenarioError(f"bad environment block: {exc}") from None
    thresholds = tuple(float(x) for x in cfg.get("cqi_thresholds_db", CQI_SINR_THRESHOLDS_DB))
    if len(thresholds) != 15 or any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ScenarioError("cqi_thresholds_db must hold 15 nondecreasing values (CQI 1..15)")
    scenario = RanScenario(tuple(sectors), tuple(groups), antenna)
    return scenario, env, tilt_grid_from_config(cfg), thresholds

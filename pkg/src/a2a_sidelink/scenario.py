"""Scenario files: parsing, validation and emission.

Scenarios are YAML documents. Every physical quantity is a string carrying
its unit (``"40 dBm"``, ``"6 GHz"``, ``"10 km"``, ``"100 ms"``); bare numbers
are rejected for them. Counts, ratios, probabilities, the seed and the
numerology index are plain numbers. See ``docs/scenario-format.md``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from .linkbudget import PHYS, LinkParams, mcs_entry
from .mac_mode2 import ExclusionConfig
from .mobility import NodeKinematics, Trajectory, TrajectoryError, max_pairwise_distance
from .phy_grid import (MAX_GUARD_SYMBOLS, GridConfig, GridError, Numerology, SlotInhibition,
                       SymbolGap, allocation_mode, propagation_delay_s)


class ScenarioError(ValueError):
    """Invalid scenario; ``where`` names the offending field."""

    def __init__(self, where: str, msg: str):
        super().__init__(f"{where}: {msg}" if where else msg)
        self.where = where
        self.msg = msg


# dimension -> unit -> factor to the canonical unit (first entry)
UNITS = {
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6},
    "distance": {"m": 1.0, "km": 1e3},
    "power": {"dBm": 0.0, "dBW": 30.0},  # additive offsets
    "gain": {"dBi": 0.0, "dB": 0.0},
    "db": {"dB": 0.0},
    "freq_ghz": {"GHz": 1.0, "MHz": 1e-3},
    "bandwidth": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "size": {"B": 1, "bytes": 1, "kB": 1000},
}
_ADDITIVE = {"power", "gain", "db"}
_CANONICAL = {"time": "s", "distance": "m", "power": "dBm", "gain": "dBi", "db": "dB",
              "freq_ghz": "GHz", "bandwidth": "Hz", "size": "B"}
_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zµ]+)\s*$")


def parse_quantity(value: Any, dim: str, where: str = "") -> float:
    if isinstance(value, bool) or not isinstance(value, str):
        raise ScenarioError(where, f"expected a quantity with unit ({'/'.join(UNITS[dim])}), "
                                   f"got bare {value!r}")
    m = _QTY.match(value)
    if not m:
        raise ScenarioError(where, f"cannot parse quantity {value!r}; expected a number and a unit "
                                   f"({'/'.join(UNITS[dim])})")
    number, unit = float(m.group(1)), m.group(2)
    table = UNITS[dim]
    if unit not in table:
        raise ScenarioError(where, f"unit {unit!r} not allowed here (use {'/'.join(table)})")
    if dim in _ADDITIVE:
        return number + table[unit]
    out = number * table[unit]
    return int(out) if dim == "size" else out


def format_quantity(value: float, dim: str) -> str:
    return f"{value!r} {_CANONICAL[dim]}"


@dataclass(frozen=True)
class TrafficSpec:
    kind: str = "periodic"  # periodic | aperiodic | none
    interval: float = 0.1  # period, or mean inter-arrival for aperiodic (s)
    size: int = 300  # bytes

    def __post_init__(self):
        if self.kind not in ("periodic", "aperiodic", "none"):
            raise ScenarioError("traffic.type", f"unknown traffic type {self.kind!r}")
        if self.kind != "none" and not self.interval > 0:
            raise ScenarioError("traffic", "interval must be positive")
        if self.size <= 0:
            raise ScenarioError("traffic.size", "packet size must be > 0")


@dataclass(frozen=True)
class MacSpec:
    scheduler: str = "sps"  # sps | ds
    t1: float = 1e-3
    t2: float = 4e-3
    sensing_window: float = 1.1
    rri: float | None = None  # defaults to the traffic period
    keep_probability: float = 0.0
    counter_min: int = 5
    counter_max: int = 15
    rsrp_threshold: float = -126.0
    threshold_step: float = 3.0
    min_available_ratio: float = 0.2
    subchannels: int = 1

    def __post_init__(self):
        if self.scheduler not in ("sps", "ds"):
            raise ScenarioError("mac.scheduler", f"unknown scheduler {self.scheduler!r}")
        if not 0 < self.t1 < self.t2:
            raise ScenarioError("mac", "need 0 < t1 < t2")
        if not any(abs(self.sensing_window - w) < 1e-9 for w in (1.1, 0.1)):
            raise ScenarioError("mac.sensing_window", "sensing window must be 1.1 s or 0.1 s")
        if not 0 <= self.keep_probability <= 1:
            raise ScenarioError("mac.keep_probability", "must be in [0, 1]")
        if not 1 <= self.counter_min <= self.counter_max:
            raise ScenarioError("mac", "need 1 <= counter_min <= counter_max")
        if self.subchannels < 1:
            raise ScenarioError("mac.subchannels", "must be >= 1")

    def exclusion(self, half_duplex_periods=()) -> ExclusionConfig:
        return ExclusionConfig(self.rsrp_threshold, self.threshold_step, self.min_available_ratio,
                               half_duplex_periods=tuple(half_duplex_periods))


@dataclass(frozen=True)
class NodeClass:
    name: str
    waypoints: tuple  # ((t, (x, y, z)), ...)
    offsets: tuple = ((0.0, 0.0, 0.0),)  # one per node
    clock_offset: float = 0.0
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    mac: MacSpec = field(default_factory=MacSpec)

    @property
    def count(self) -> int:
        return len(self.offsets)

    def kinematics(self) -> list[NodeKinematics]:
        out = []
        for i, off in enumerate(self.offsets):
            wps = tuple((t, tuple(p + o for p, o in zip(pos, off))) for t, pos in self.waypoints)
            node_id = self.name if self.count == 1 else f"{self.name}{i}"
            out.append(NodeKinematics(node_id, Trajectory(wps), self.clock_offset))
        return out


@dataclass(frozen=True)
class GridSpec:
    numerology: int = 2
    subchannels: int = 13
    subchannel_size: int = 10
    guard: int | None = None  # total trailing guard symbols; None = auto
    inhibition_period: int | None = None  # None = auto
    max_guard: int = MAX_GUARD_SYMBOLS
    mode_switch_distance: float | None = None  # metres


@dataclass(frozen=True)
class ScenarioConfig:
    duration: float
    seed: int = 0
    grid: GridSpec = field(default_factory=GridSpec)
    link: LinkParams = field(default_factory=LinkParams)
    snr_min: float | None = None
    mcs: int | None = None
    doppler_gate: bool = True
    tolerable_doppler_fraction: float = 0.1
    distance_bin: float = 5000.0
    cbr_threshold: float = -94.0
    classes: tuple = ()

    @property
    def numerology(self) -> Numerology:
        return Numerology(self.grid.numerology)

    def effective_snr_min(self) -> float:
        if self.snr_min is not None:
            return self.snr_min
        if self.mcs is not None:
            return mcs_entry(self.mcs).snr_min
        raise ScenarioError("link", "set snr_min or mcs")

    def node_kinematics(self) -> list[NodeKinematics]:
        return [k for c in self.classes for k in c.kinematics()]


@dataclass(frozen=True)
class ResolvedGrid:
    grid: GridConfig
    max_distance: float
    required: SymbolGap | SlotInhibition
    warnings: tuple = ()


def delay_budget_s(grid: GridConfig) -> float:
    """Longest propagation delay a reception can have and still stay contained."""
    num = grid.numerology
    return grid.guard_symbols * num.symbol_duration + (grid.inhibition_period - 1) * num.slot_duration


def resolve_grid(cfg: ScenarioConfig, strict: bool = False) -> ResolvedGrid:
    """Fill in auto guard/inhibition settings and check them against the geometry.

    The worst-case delay is the maximum pairwise distance over the whole run
    plus the largest clock-offset difference.
    """
    num = cfg.numerology
    nodes = cfg.node_kinematics()
    dmax = max_pairwise_distance(nodes) if len(nodes) > 1 else 0.0
    offsets = [n.clock_offset for n in nodes] or [0.0]
    skew = max(offsets) - min(offsets)
    effective = dmax + skew * PHYS.c
    required = allocation_mode(effective, num, cfg.grid.max_guard, cfg.grid.mode_switch_distance)

    if isinstance(required, SymbolGap):
        auto_guard, auto_period = max(required.guard_symbols, 1), 1
    else:
        auto_guard, auto_period = 1, required.inhibition_period
    guard = auto_guard if cfg.grid.guard is None else cfg.grid.guard
    period = auto_period if cfg.grid.inhibition_period is None else cfg.grid.inhibition_period
    try:
        grid = GridConfig(num, cfg.grid.subchannels, cfg.grid.subchannel_size, period, guard)
    except GridError as e:
        raise ScenarioError("grid", str(e)) from None

    warnings = []
    if propagation_delay_s(effective) > delay_budget_s(grid) + 1e-15:
        msg = (f"max link distance {effective / 1e3:.3f} km needs {required}, but grid has "
               f"guard={grid.guard_symbols} symbols, inhibition_period={grid.inhibition_period}; "
               f"slot mismatches expected")
        if strict:
            raise ScenarioError("grid", msg)
        warnings.append(msg)
    return ResolvedGrid(grid, dmax, required, tuple(warnings))


def validate(cfg: ScenarioConfig, strict: bool = False) -> ScenarioConfig:
    if not cfg.duration > 0:
        raise ScenarioError("duration", "must be positive")
    if cfg.snr_min is None and cfg.mcs is None:
        raise ScenarioError("link", "set snr_min or mcs")
    if cfg.mcs is not None:
        try:
            mcs_entry(cfg.mcs)
        except ValueError as e:
            raise ScenarioError("link.mcs", str(e)) from None
    if not 0 < cfg.tolerable_doppler_fraction <= 1:
        raise ScenarioError("doppler.tolerable_fraction", "must be in (0, 1]")
    if not cfg.distance_bin > 0:
        raise ScenarioError("metrics.distance_bin", "must be positive")
    names = [c.name for c in cfg.classes]
    if len(set(names)) != len(names):
        raise ScenarioError("classes", "duplicate class names")
    num = cfg.numerology
    ids = set()
    for c in cfg.classes:
        where = f"classes.{c.name}"
        for k in c.kinematics():
            if k.node_id in ids:
                raise ScenarioError(where, f"node id {k.node_id!r} clashes with another class")
            ids.add(k.node_id)
        if c.mac.subchannels > cfg.grid.subchannels:
            raise ScenarioError(f"{where}.mac.subchannels", "exceeds grid subchannels")
        if num.slots(c.mac.t1) < 1 or num.slots(c.mac.t2) <= num.slots(c.mac.t1):
            raise ScenarioError(f"{where}.mac", "t1/t2 must span at least one slot after generation")
        if c.mac.scheduler == "sps":
            if c.traffic.kind == "aperiodic":
                raise ScenarioError(f"{where}.mac.scheduler", "sps needs periodic traffic")
            if c.traffic.kind == "periodic":
                rri = c.mac.rri if c.mac.rri is not None else c.traffic.interval
                if num.slots(rri) < 1:
                    raise ScenarioError(f"{where}.mac.rri", "shorter than one slot")
                if c.mac.rri is not None and abs(c.mac.rri - c.traffic.interval) > 1e-12:
                    raise ScenarioError(f"{where}.mac.rri", "sps rri must equal the traffic period")
    resolved = resolve_grid(cfg, strict=strict)
    for c in cfg.classes:
        if c.mac.scheduler == "sps" and c.traffic.kind == "periodic":
            if num.slots(c.traffic.interval) % resolved.grid.inhibition_period:
                raise ScenarioError(f"classes.{c.name}.traffic.period",
                                    "RRI must be a multiple of the inhibition period")
    return cfg


# ---------------------------------------------------------------- parsing

def _get(d: dict, key: str, where: str, default=None, required=False):
    if key in d:
        return d[key]
    if required:
        raise ScenarioError(f"{where}.{key}" if where else key, "missing required field")
    return default


def _check_keys(d: dict, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise ScenarioError(where, f"expected a mapping, got {type(d).__name__}")
    extra = set(d) - allowed
    if extra:
        raise ScenarioError(where, f"unknown field(s): {', '.join(sorted(map(str, extra)))}")


def _auto_int(v, where):
    if v is None or v == "auto":
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(where, f"expected an integer or 'auto', got {v!r}")
    return v


def _int(v, where):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(where, f"expected an integer, got {v!r}")
    return v


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(where, f"expected a plain number, got {v!r}")
    return float(v)


def _vector(v, where):
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise ScenarioError(where, "expected a 3-element list of distances")
    return tuple(parse_quantity(x, "distance", f"{where}[{i}]") for i, x in enumerate(v))


def _parse_grid(d: dict) -> GridSpec:
    w = "grid"
    _check_keys(d, {"numerology", "subchannels", "subchannel_size", "guard", "inhibition_period",
                    "max_guard", "mode_switch_distance"}, w)
    msd = d.get("mode_switch_distance")
    return GridSpec(
        numerology=_int(d.get("numerology", 2), f"{w}.numerology"),
        subchannels=_int(d.get("subchannels", 13), f"{w}.subchannels"),
        subchannel_size=_int(d.get("subchannel_size", 10), f"{w}.subchannel_size"),
        guard=_auto_int(d.get("guard"), f"{w}.guard"),
        inhibition_period=_auto_int(d.get("inhibition_period"), f"{w}.inhibition_period"),
        max_guard=_int(d.get("max_guard", MAX_GUARD_SYMBOLS), f"{w}.max_guard"),
        mode_switch_distance=None if msd is None else parse_quantity(msd, "distance", f"{w}.mode_switch_distance"),
    )


def _parse_link(d: dict) -> tuple[LinkParams, float | None, int | None]:
    w = "link"
    _check_keys(d, {"tx_power", "tx_gain", "rx_gain", "carrier", "bandwidth", "noise_figure",
                    "snr_min", "mcs"}, w)
    base = LinkParams()
    try:
        params = LinkParams(
            tx_power=parse_quantity(d["tx_power"], "power", f"{w}.tx_power") if "tx_power" in d else base.tx_power,
            tx_gain=parse_quantity(d["tx_gain"], "gain", f"{w}.tx_gain") if "tx_gain" in d else base.tx_gain,
            rx_gain=parse_quantity(d["rx_gain"], "gain", f"{w}.rx_gain") if "rx_gain" in d else base.rx_gain,
            carrier_freq=parse_quantity(d["carrier"], "freq_ghz", f"{w}.carrier") if "carrier" in d else base.carrier_freq,
            bandwidth=parse_quantity(d["bandwidth"], "bandwidth", f"{w}.bandwidth") if "bandwidth" in d else base.bandwidth,
            noise_figure=parse_quantity(d["noise_figure"], "db", f"{w}.noise_figure") if "noise_figure" in d else base.noise_figure,
        )
    except ValueError as e:
        if isinstance(e, ScenarioError):
            raise
        raise ScenarioError(w, str(e)) from None
    snr = d.get("snr_min")
    mcs = d.get("mcs")
    return (params, None if snr is None else parse_quantity(snr, "db", f"{w}.snr_min"),
            None if mcs is None else _int(mcs, f"{w}.mcs"))


def _parse_traffic(d, where) -> TrafficSpec:
    if d is None or d == "none":
        return TrafficSpec(kind="none")
    _check_keys(d, {"type", "period", "mean_interval", "size"}, where)
    kind = _get(d, "type", where, required=True)
    size = parse_quantity(d["size"], "size", f"{where}.size") if "size" in d else 300
    if kind == "periodic":
        interval = parse_quantity(_get(d, "period", where, required=True), "time", f"{where}.period")
    elif kind == "aperiodic":
        interval = parse_quantity(_get(d, "mean_interval", where, required=True), "time",
                                  f"{where}.mean_interval")
    elif kind == "none":
        return TrafficSpec(kind="none", size=size)
    else:
        raise ScenarioError(f"{where}.type", f"unknown traffic type {kind!r}")
    return TrafficSpec(kind, interval, size)


_MAC_FIELDS = {
    "scheduler": None, "t1": "time", "t2": "time", "sensing_window": "time", "rri": "time",
    "keep_probability": "ratio", "counter_min": "int", "counter_max": "int",
    "rsrp_threshold": "power", "threshold_step": "db", "min_available_ratio": "ratio",
    "subchannels": "int",
}


def _parse_mac(d, where) -> MacSpec:
    d = d or {}
    _check_keys(d, set(_MAC_FIELDS), where)
    kw = {}
    for key, kind in _MAC_FIELDS.items():
        if key not in d:
            continue
        w = f"{where}.{key}"
        v = d[key]
        if kind is None:
            kw[key] = str(v)
        elif kind == "int":
            kw[key] = _int(v, w)
        elif kind == "ratio":
            kw[key] = _number(v, w)
        else:
            kw[key] = parse_quantity(v, kind, w)
    try:
        return MacSpec(**kw)
    except ScenarioError as e:
        # MacSpec reports "mac.<field>"; prefix the class path
        raise ScenarioError(where.rsplit(".mac", 1)[0] + "." + e.where, e.msg) from None


def _parse_class(name: str, d: dict) -> NodeClass:
    where = f"classes.{name}"
    _check_keys(d, {"count", "waypoints", "position", "offsets", "clock_offset", "traffic", "mac"}, where)
    if "waypoints" in d and "position" in d:
        raise ScenarioError(where, "give either position or waypoints, not both")
    if "position" in d:
        waypoints = ((0.0, _vector(d["position"], f"{where}.position")),)
    else:
        raw = _get(d, "waypoints", where, required=True)
        if not isinstance(raw, list) or not raw:
            raise ScenarioError(f"{where}.waypoints", "expected a non-empty list of [time, [x, y, z]]")
        waypoints = []
        for i, wp in enumerate(raw):
            w = f"{where}.waypoints[{i}]"
            if not isinstance(wp, (list, tuple)) or len(wp) != 2:
                raise ScenarioError(w, "expected [time, [x, y, z]]")
            waypoints.append((parse_quantity(wp[0], "time", w), _vector(wp[1], w)))
        waypoints = tuple(waypoints)
    if "offsets" in d:
        offsets = tuple(_vector(o, f"{where}.offsets[{i}]") for i, o in enumerate(d["offsets"]))
        if "count" in d and _int(d["count"], f"{where}.count") != len(offsets):
            raise ScenarioError(f"{where}.count", "does not match the number of offsets")
    else:
        count = _int(d.get("count", 1), f"{where}.count")
        if count < 1:
            raise ScenarioError(f"{where}.count", "must be >= 1")
        if count > 1:
            raise ScenarioError(f"{where}.offsets", "classes with count > 1 need one offset per node")
        offsets = ((0.0, 0.0, 0.0),)
    clock = parse_quantity(d["clock_offset"], "time", f"{where}.clock_offset") if "clock_offset" in d else 0.0
    try:
        cls = NodeClass(name, waypoints, offsets, clock,
                        _parse_traffic(d.get("traffic"), f"{where}.traffic"),
                        _parse_mac(d.get("mac"), f"{where}.mac"))
        cls.kinematics()
    except TrajectoryError as e:
        raise ScenarioError(f"{where}.waypoints", str(e)) from None
    return cls


def from_dict(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ScenarioError("", "scenario must be a mapping")
    _check_keys(doc, {"duration", "seed", "grid", "link", "doppler", "metrics", "classes"}, "scenario")
    duration = parse_quantity(_get(doc, "duration", "", required=True), "time", "duration")
    seed = _int(doc.get("seed", 0), "seed")
    grid = _parse_grid(doc.get("grid") or {})
    link, snr_min, mcs = _parse_link(doc.get("link") or {})
    dop = doc.get("doppler") or {}
    _check_keys(dop, {"gate", "tolerable_fraction"}, "doppler")
    gate = dop.get("gate", True)
    if not isinstance(gate, bool):
        raise ScenarioError("doppler.gate", "expected true/false")
    met = doc.get("metrics") or {}
    _check_keys(met, {"distance_bin", "cbr_threshold"}, "metrics")
    classes = doc.get("classes") or {}
    if not isinstance(classes, dict):
        raise ScenarioError("classes", "expected a mapping of class name to block")
    return ScenarioConfig(
        duration=duration,
        seed=seed,
        grid=grid,
        link=link,
        snr_min=snr_min,
        mcs=mcs,
        doppler_gate=gate,
        tolerable_doppler_fraction=_number(dop.get("tolerable_fraction", 0.1), "doppler.tolerable_fraction"),
        distance_bin=parse_quantity(met["distance_bin"], "distance", "metrics.distance_bin") if "distance_bin" in met else 5000.0,
        cbr_threshold=parse_quantity(met["cbr_threshold"], "power", "metrics.cbr_threshold") if "cbr_threshold" in met else -94.0,
        classes=tuple(_parse_class(str(k), v or {}) for k, v in classes.items()),
    )


def parse(text: str) -> ScenarioConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "yaml"
        raise ScenarioError(where, f"unparsable scenario: {getattr(e, 'problem', e)}") from None
    return from_dict(doc)


def load(path: str | Path) -> ScenarioConfig:
    return parse(Path(path).read_text())


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Apply ``dotted.key=value`` overrides to a raw scenario document.

    Values are parsed as YAML scalars, so ``grid.guard=2`` gives an int and
    ``link.snr_min=5 dB`` a unit string.
    """
    for item in overrides:
        if "=" not in item:
            raise ScenarioError("--override", f"expected key=value, got {item!r}")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = doc
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ScenarioError(key, "cannot override inside a non-mapping")
        node[parts[-1]] = yaml.safe_load(raw)
    return doc


# ---------------------------------------------------------------- emission

def to_dict(cfg: ScenarioConfig) -> dict:
    q = format_quantity
    g = cfg.grid
    grid = {"numerology": g.numerology, "subchannels": g.subchannels,
            "subchannel_size": g.subchannel_size,
            "guard": "auto" if g.guard is None else g.guard,
            "inhibition_period": "auto" if g.inhibition_period is None else g.inhibition_period,
            "max_guard": g.max_guard}
    if g.mode_switch_distance is not None:
        grid["mode_switch_distance"] = q(g.mode_switch_distance, "distance")
    l = cfg.link
    link = {"tx_power": q(l.tx_power, "power"), "tx_gain": q(l.tx_gain, "gain"),
            "rx_gain": q(l.rx_gain, "gain"), "carrier": q(l.carrier_freq, "freq_ghz"),
            "bandwidth": q(l.bandwidth, "bandwidth"), "noise_figure": q(l.noise_figure, "db")}
    if cfg.snr_min is not None:
        link["snr_min"] = q(cfg.snr_min, "db")
    if cfg.mcs is not None:
        link["mcs"] = cfg.mcs
    classes = {}
    for c in cfg.classes:
        block: dict[str, Any] = {
            "waypoints": [[q(t, "time"), [q(x, "distance") for x in p]] for t, p in c.waypoints],
            "offsets": [[q(x, "distance") for x in o] for o in c.offsets],
            "clock_offset": q(c.clock_offset, "time"),
        }
        tr = c.traffic
        if tr.kind == "none":
            block["traffic"] = {"type": "none", "size": f"{tr.size} B"}
        else:
            key = "period" if tr.kind == "periodic" else "mean_interval"
            block["traffic"] = {"type": tr.kind, key: q(tr.interval, "time"), "size": f"{tr.size} B"}
        m = c.mac
        mac: dict[str, Any] = {"scheduler": m.scheduler}
        for key, kind in _MAC_FIELDS.items():
            if key == "scheduler":
                continue
            v = getattr(m, key)
            if v is None:
                continue
            mac[key] = v if kind in ("int", "ratio") else q(v, kind)
        block["mac"] = mac
        classes[c.name] = block
    return {
        "duration": q(cfg.duration, "time"),
        "seed": cfg.seed,
        "grid": grid,
        "link": link,
        "doppler": {"gate": cfg.doppler_gate, "tolerable_fraction": cfg.tolerable_doppler_fraction},
        "metrics": {"distance_bin": q(cfg.distance_bin, "distance"),
                    "cbr_threshold": q(cfg.cbr_threshold, "power")},
        "classes": classes,
    }


def emit(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False, allow_unicode=True)


def bundled_scenarios() -> dict[str, Path]:
    here = Path(__file__).parent / "scenarios"
    return {p.stem: p for p in sorted(here.glob("*.yaml"))}


def with_classes(cfg: ScenarioConfig, *classes: NodeClass) -> ScenarioConfig:
    return replace(cfg, classes=tuple(classes))


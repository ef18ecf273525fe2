"""Mode-2 autonomous resource allocation.

Sensing → projection of heard reservations onto the selection window →
RSRP-based exclusion with threshold escalation → uniform random pick.
Semi-persistent scheduling (SPS) reuses a pick every RRI until its
reselection counter runs out; dynamic scheduling (DS) picks afresh per packet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .phy_grid import ResourceId


class AllocationFailure(RuntimeError):
    """No candidate resource left to select from."""


class MacConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SciReservation:
    sender: str
    reserved: ResourceId
    rri: float  # seconds; 0 means no periodic reservation
    rsrp: float  # dBm at the sensing node
    heard_at_slot: int

    def __post_init__(self):
        if self.rri < 0:
            raise MacConfigError("rri must be >= 0")
        if not math.isfinite(self.rsrp):
            raise MacConfigError("rsrp must be finite")


@dataclass
class SensingHistory:
    window_duration: float = 1.1  # seconds
    slot_duration: float = 0.25e-3
    entries: list = field(default_factory=list)
    own_tx_slots: set = field(default_factory=set)

    def __post_init__(self):
        if self.window_duration <= 0:
            raise MacConfigError("sensing window must be positive")

    @property
    def window_slots(self) -> int:
        return int(round(self.window_duration / self.slot_duration))

    def record(self, sci: SciReservation) -> None:
        self.entries.append(sci)

    def record_own_tx(self, slot: int) -> None:
        self.own_tx_slots.add(slot)

    def evict(self, now_slot: int) -> None:
        oldest = now_slot - self.window_slots
        self.entries = [e for e in self.entries if e.heard_at_slot >= oldest]
        self.own_tx_slots = {s for s in self.own_tx_slots if s >= oldest}


@dataclass(frozen=True)
class SelectionWindow:
    """Candidate single-slot resources between ``start_slot`` and ``end_slot`` inclusive.

    Every contiguous run of ``subchannel_count`` subchannels in every usable
    slot (``slot % inhibition_period == 0``) is a candidate.
    """

    start_slot: int
    end_slot: int
    num_subchannels: int
    subchannel_count: int = 1
    inhibition_period: int = 1
    slot_duration: float = 0.25e-3

    def __post_init__(self):
        if self.subchannel_count > self.num_subchannels:
            raise MacConfigError("subchannel_count exceeds num_subchannels")

    @classmethod
    def after_generation(cls, gen_slot: int, t1_slots: int, t2_slots: int, **kw) -> "SelectionWindow":
        if not 0 < t1_slots < t2_slots:
            raise MacConfigError(f"need 0 < t1 < t2, got t1={t1_slots} t2={t2_slots} slots")
        return cls(gen_slot + t1_slots, gen_slot + t2_slots, **kw)

    def candidates(self) -> list[ResourceId]:
        out = []
        for slot in range(self.start_slot, self.end_slot + 1):
            if slot % self.inhibition_period:
                continue
            for sc in range(self.num_subchannels - self.subchannel_count + 1):
                out.append(ResourceId(slot, sc, self.subchannel_count))
        return out

    def rri_slots(self, rri: float) -> int:
        return int(round(rri / self.slot_duration))


@dataclass(frozen=True)
class ExclusionConfig:
    rsrp_threshold_init: float = -126.0  # dBm
    threshold_step: float = 3.0  # dB
    min_available_ratio: float = 0.20
    # Escalation stops here; None escalates until no reservation is excluded.
    rsrp_threshold_max: float | None = None
    # Own past transmissions project half-duplex blind spots at these periods (slots).
    half_duplex_periods: tuple = ()

    def __post_init__(self):
        if not self.threshold_step > 0:
            raise MacConfigError("threshold_step must be > 0")
        if not 0 < self.min_available_ratio <= 1:
            raise MacConfigError("min_available_ratio must be in (0, 1]")


def project_reservations(history: SensingHistory, window: SelectionWindow) -> list[tuple[ResourceId, float]]:
    """Heard reservations, repeated every RRI, that land inside the window."""
    out = []
    for sci in history.entries:
        res = sci.reserved
        if sci.rri == 0:
            if window.start_slot <= res.slot_index <= window.end_slot:
                out.append((res, sci.rsrp))
            continue
        period = window.rri_slots(sci.rri)
        if period <= 0:
            raise MacConfigError(f"rri {sci.rri} s is shorter than a slot")
        # first repetition at or after the window start
        j = max(0, -(-(window.start_slot - res.slot_index) // period))
        slot = res.slot_index + j * period
        while slot <= window.end_slot:
            out.append((res.shifted(slot - res.slot_index), sci.rsrp))
            slot += period
    return out


def half_duplex_blocked_slots(history: SensingHistory, window: SelectionWindow,
                              cfg: ExclusionConfig) -> frozenset:
    """Window slots that collide with the node's own transmissions.

    Slots the node transmitted in were not sensed; any reservation heard there
    could recur every one of ``cfg.half_duplex_periods``.
    """
    blocked = set()
    for own in history.own_tx_slots:
        if window.start_slot <= own <= window.end_slot:
            blocked.add(own)
        for period in cfg.half_duplex_periods:
            j = max(1, -(-(window.start_slot - own) // period))
            slot = own + j * period
            while slot <= window.end_slot:
                blocked.add(slot)
                slot += period
    return frozenset(blocked)


def exclude(window: SelectionWindow, projected: Sequence[tuple[ResourceId, float]],
            cfg: ExclusionConfig, blocked_slots: Iterable[int] = ()) -> list[ResourceId]:
    """Available set S_a, sorted by (slot, subchannel).

    Candidates overlapping a projected reservation whose RSRP exceeds the
    threshold are dropped, as are candidates in half-duplex ``blocked_slots``.
    While fewer than ``min_available_ratio`` of the window survive, the
    threshold is raised by ``threshold_step``. Once no reservation is above
    the threshold (or the cap is reached) the half-duplex exclusion is
    relaxed as well.
    """
    candidates = window.candidates()
    if not candidates:
        raise MacConfigError("empty selection window")
    blocked = frozenset(blocked_slots)
    need = cfg.min_available_ratio * len(candidates)

    by_slot: dict[int, list[tuple[ResourceId, float]]] = {}
    for res, rsrp in projected:
        by_slot.setdefault(res.slot_index, []).append((res, rsrp))

    def busy_rsrp(cand: ResourceId) -> float:
        # strongest overlapping reservation, -inf if none
        worst = -math.inf
        for res, rsrp in by_slot.get(cand.slot_index, ()):
            if res.overlaps(cand) and rsrp > worst:
                worst = rsrp
        return worst

    levels = [busy_rsrp(c) for c in candidates]
    top = max(levels)
    step = 0
    threshold = cfg.rsrp_threshold_init
    if cfg.rsrp_threshold_max is not None:
        threshold = min(threshold, cfg.rsrp_threshold_max)
    while True:
        available = [c for c, lvl in zip(candidates, levels)
                     if lvl <= threshold and c.slot_index not in blocked]
        if len(available) >= need:
            return available
        capped = cfg.rsrp_threshold_max is not None and threshold >= cfg.rsrp_threshold_max
        if top <= threshold or capped:
            return [c for c, lvl in zip(candidates, levels) if lvl <= threshold]
        step += 1
        threshold = cfg.rsrp_threshold_init + step * cfg.threshold_step
        if cfg.rsrp_threshold_max is not None:
            threshold = min(threshold, cfg.rsrp_threshold_max)


def select_resource(s_a: Sequence[ResourceId], rng: np.random.Generator) -> ResourceId:
    if len(s_a) == 0:
        raise AllocationFailure("no available resource after exclusion")
    return s_a[int(rng.integers(len(s_a)))]


@dataclass(frozen=True)
class SpsState:
    """Semi-persistent grant state.

    ``resource`` is the next grant; it advances by ``rri_slots`` on every use.
    """

    rri_slots: int
    resource: ResourceId | None = None
    reselection_counter: int = 0
    keep_probability: float = 0.0
    counter_range: tuple = (5, 15)
    last_decision: str = ""  # "reuse", "keep" or "reselect"

    def __post_init__(self):
        if self.rri_slots <= 0:
            raise MacConfigError("SPS needs a positive RRI")
        if self.reselection_counter < 0:
            raise MacConfigError("reselection counter must be >= 0")
        if not 0.0 <= self.keep_probability <= 1.0:
            raise MacConfigError("keep_probability must be in [0, 1]")
        lo, hi = self.counter_range
        if not 1 <= lo <= hi:
            raise MacConfigError(f"bad counter range {self.counter_range}")


AvailableSet = Union[Sequence[ResourceId], Callable[[], Sequence[ResourceId]]]


def sps_on_packet(state: SpsState, s_a: AvailableSet, rng: np.random.Generator) -> tuple[ResourceId, SpsState]:
    """Grant for the next periodic packet.

    ``s_a`` may be a callable so the sensing pipeline only runs when a fresh
    selection is actually needed. With the counter expired, the current
    resource is kept with ``keep_probability`` and reselected otherwise; the
    counter is then redrawn uniformly from ``counter_range``.
    """
    if state.resource is not None and state.reselection_counter > 0:
        grant = state.resource
        return grant, replace(state, resource=grant.shifted(state.rri_slots),
                              reselection_counter=state.reselection_counter - 1,
                              last_decision="reuse")

    if state.resource is not None and rng.random() < state.keep_probability:
        grant, decision = state.resource, "keep"
    else:
        candidates = s_a() if callable(s_a) else s_a
        grant, decision = select_resource(candidates, rng), "reselect"
    lo, hi = state.counter_range
    counter = int(rng.integers(lo, hi + 1))
    return grant, replace(state, resource=grant.shifted(state.rri_slots),
                          reselection_counter=counter, last_decision=decision)


def sense_and_exclude(window: SelectionWindow, history: SensingHistory,
                      cfg: ExclusionConfig) -> list[ResourceId]:
    projected = project_reservations(history, window)
    blocked = half_duplex_blocked_slots(history, window, cfg)
    return exclude(window, projected, cfg, blocked)


def ds_on_packet(window: SelectionWindow, history: SensingHistory, cfg: ExclusionConfig,
                 rng: np.random.Generator) -> ResourceId:
    return select_resource(sense_and_exclude(window, history, cfg), rng)

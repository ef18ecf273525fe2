"""Slot-synchronous sidelink Mode-2 simulation.

Each slot: generate packets, run the per-node schedulers, transmit the
grants falling in this slot, then score the transmissions of ``lag`` slots
ago. The lag covers the longest propagation delay in the scenario so every
transmission that can overlap a reception in time is known when it is
scored. Decoded SCIs enter the receiver's sensing history at that point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .linkbudget import LinkParams, MCSEntry, dbm_to_mw, noise_floor_dbm, received_power_dbm
from .mac_mode2 import (AllocationFailure, SciReservation, SelectionWindow, SensingHistory,
                        SpsState, ds_on_packet, sense_and_exclude, sps_on_packet)
from .metrics import MetricsReport
from .mobility import NodeKinematics, distance_m, doppler_ok, radial_speed_mps
from .phy_grid import (GridConfig, ResourceId, SlotFormat, arrival_in_frame, propagation_delay_s,
                       touched_slots, usable_slot)
from .scenario import MacSpec, ScenarioConfig, TrafficSpec, resolve_grid, validate

# Free-space loss is undefined at zero range; co-located nodes are treated as 1 m apart.
MIN_LINK_DISTANCE = 1.0


@dataclass(frozen=True)
class Packet:
    id: int
    source: str
    destination: str  # "*" = broadcast
    size: int
    generated_at: float
    traffic_class: str


@dataclass(frozen=True)
class TransmissionEvent:
    resource: ResourceId
    slot_format: SlotFormat
    packet: Packet
    tx_power: tuple  # dBm per occupied subchannel
    sci: SciReservation
    sender: NodeKinematics
    start_time: float  # absolute time the slot starts at the sender

    @property
    def total_power_dbm(self) -> float:
        return 10 * math.log10(sum(dbm_to_mw(p) for p in self.tx_power))


@dataclass(frozen=True)
class DeliveryOutcome:
    receiver: str
    status: str
    sinr: float
    rx_slot: int
    symbol_offset: float
    distance: float
    rsrp: float


@dataclass(frozen=True)
class EventRecord:
    slot: int
    tx: str
    rx: str
    status: str
    sinr_db: float
    distance_m: float


@dataclass(frozen=True)
class RadioEnv:
    grid: GridConfig
    link: LinkParams
    snr_min: float
    doppler_gate: bool = True
    tolerable_fraction: float = 0.1


@dataclass
class NodeState:
    kin: NodeKinematics
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    mac: MacSpec = field(default_factory=MacSpec)
    history: SensingHistory | None = None
    sps: SpsState | None = None
    traffic_rng: np.random.Generator | None = None
    mac_rng: np.random.Generator | None = None
    tx_slots: set = field(default_factory=set)
    grants: dict = field(default_factory=dict)  # slot -> (ResourceId, Packet, announced rri)
    next_gen: float = math.inf  # slot index (periodic) or time in s (aperiodic)

    @property
    def node_id(self) -> str:
        return self.kin.node_id


def decode(sinr: float, mcs: MCSEntry | float) -> bool:
    """Threshold decoder; a SINR exactly at the threshold decodes."""
    snr_min = mcs.snr_min if isinstance(mcs, MCSEntry) else mcs
    return sinr >= snr_min


def _link_distance(tx: TransmissionEvent, rx: NodeKinematics) -> float:
    return distance_m(tx.sender, rx, tx.start_time)


def _reception_interval(tx: TransmissionEvent, rx: NodeKinematics, env: RadioEnv):
    d = _link_distance(tx, rx)
    start = tx.start_time + propagation_delay_s(d)
    end = start + tx.slot_format.occupied_symbols * env.grid.numerology.symbol_duration
    return d, start, end


def _rx_power_dbm(tx: TransmissionEvent, d: float, env: RadioEnv) -> float:
    link = LinkParams(tx.total_power_dbm, env.link.tx_gain, env.link.rx_gain,
                      env.link.carrier_freq, env.link.bandwidth, env.link.noise_figure)
    return received_power_dbm(link, max(d, MIN_LINK_DISTANCE))


def sinr_db(intended: TransmissionEvent, interferers: Iterable[TransmissionEvent],
            receiver: NodeKinematics, env: RadioEnv) -> float:
    """SINR with interference weighted by time and subchannel overlap.

    Each interferer contributes its received power times the fraction of
    the intended reception's on-air time it overlaps, times the fraction of
    the intended subchannels it occupies.
    """
    d, a0, a1 = _reception_interval(intended, receiver, env)
    signal = dbm_to_mw(_rx_power_dbm(intended, d, env))
    noise = dbm_to_mw(noise_floor_dbm(env.link.bandwidth, env.link.noise_figure))
    own = set(intended.resource.subchannels)
    interference = 0.0
    for itf in interferers:
        if itf is intended or itf.sender.node_id in (receiver.node_id, intended.sender.node_id):
            continue
        shared = len(own.intersection(itf.resource.subchannels))
        if not shared:
            continue
        di, b0, b1 = _reception_interval(itf, receiver, env)
        overlap = min(a1, b1) - max(a0, b0)
        if overlap <= 0:
            continue
        interference += (dbm_to_mw(_rx_power_dbm(itf, di, env))
                         * (overlap / (a1 - a0)) * (shared / len(own)))
    return 10 * math.log10(signal / (noise + interference))


def deliver(tx: TransmissionEvent, receiver: NodeState, env: RadioEnv,
            interferers: Sequence[TransmissionEvent] = ()) -> DeliveryOutcome:
    """Score one (transmission, receiver) pair.

    Checks in order: half-duplex (receiver transmitting in a slot the
    reception touches), slot mismatch (reception spills into a usable slot
    other than the transmit slot), Doppler gate, then SNR and SINR.
    """
    num = env.grid.numerology
    rx = receiver.kin
    if rx.node_id == tx.sender.node_id:
        raise ValueError("receiver must differ from sender")
    d, start, _ = _reception_interval(tx, rx, env)
    rx_slot, offset = arrival_in_frame(start, num, rx.clock_offset)
    touched = touched_slots(rx_slot, offset, tx.slot_format.occupied_symbols)
    sinr = sinr_db(tx, interferers, rx, env)
    rsrp = _rx_power_dbm(tx, d, env)

    tx_slot = tx.resource.slot_index
    if any(s in receiver.tx_slots for s in touched):
        status = "half_duplex_miss"
    elif any(s != tx_slot and usable_slot(s, env.grid) for s in touched):
        status = "slot_mismatch"
    elif env.doppler_gate and not doppler_ok(radial_speed_mps(tx.sender, rx, tx.start_time),
                                             env.link.carrier_freq * 1e9, num.scs,
                                             env.tolerable_fraction):
        status = "doppler_fail"
    elif rsrp - noise_floor_dbm(env.link.bandwidth, env.link.noise_figure) < env.snr_min:
        status = "below_sensitivity"
    elif not decode(sinr, env.snr_min):
        status = "collision"
    else:
        status = "decoded"
    return DeliveryOutcome(rx.node_id, status, sinr, rx_slot, offset, d, rsrp)


@dataclass
class SimResult:
    report: MetricsReport
    events: list
    grid: GridConfig | None = None
    warnings: tuple = ()


class Simulation:
    def __init__(self, cfg: ScenarioConfig, seed: int | None = None, strict: bool = False):
        validate(cfg, strict=strict)
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        resolved = resolve_grid(cfg, strict=strict)
        self.grid = resolved.grid
        self.warnings = resolved.warnings
        self.num = self.grid.numerology
        self.env = RadioEnv(self.grid, cfg.link, cfg.effective_snr_min(), cfg.doppler_gate,
                            cfg.tolerable_doppler_fraction)
        self.n_slots = self.num.slots(cfg.duration)
        self.report = MetricsReport(cfg.distance_bin)
        self.events: list[EventRecord] = []
        self._packet_ids = 0

        specs = [(k, c) for c in cfg.classes for k in c.kinematics()]
        streams = np.random.SeedSequence(self.seed).spawn(len(specs))
        self.nodes: list[NodeState] = []
        for (kin, cls), ss in zip(specs, streams):
            t_ss, m_ss = ss.spawn(2)
            node = NodeState(kin, cls.traffic, cls.mac,
                             SensingHistory(cls.mac.sensing_window, self.num.slot_duration),
                             traffic_rng=np.random.default_rng(t_ss),
                             mac_rng=np.random.default_rng(m_ss))
            if cls.mac.scheduler == "sps" and cls.traffic.kind == "periodic":
                node.sps = SpsState(self._rri_slots(node), keep_probability=cls.mac.keep_probability,
                                    counter_range=(cls.mac.counter_min, cls.mac.counter_max))
            self._init_traffic(node)
            self.nodes.append(node)

        self.hd_periods = tuple(sorted({n.sps.rri_slots for n in self.nodes if n.sps}))
        max_delay = propagation_delay_s(resolved.max_distance)
        offsets = [n.kin.clock_offset for n in self.nodes] or [0.0]
        skew = max(offsets) - min(offsets)
        self.lag = math.ceil((max_delay + skew) / self.num.slot_duration) + 1
        self._on_air: dict[int, list[TransmissionEvent]] = {}
        self._busy: dict[str, set] = {n.node_id: set() for n in self.nodes}

    def _rri_slots(self, node: NodeState) -> int:
        rri = node.mac.rri if node.mac.rri is not None else node.traffic.interval
        return self.num.slots(rri)

    def _init_traffic(self, node: NodeState) -> None:
        tr = node.traffic
        if tr.kind == "periodic":
            period = max(self.num.slots(tr.interval), 1)
            node.next_gen = int(node.traffic_rng.integers(period))
        elif tr.kind == "aperiodic":
            node.next_gen = float(node.traffic_rng.exponential(tr.interval))

    # ------------------------------------------------------------ packets

    def _due(self, node: NodeState, n: int) -> bool:
        if node.traffic.kind == "periodic":
            return node.next_gen <= n
        return node.next_gen < (n + 1) * self.num.slot_duration

    def _advance(self, node: NodeState) -> None:
        if node.traffic.kind == "periodic":
            node.next_gen += max(self.num.slots(node.traffic.interval), 1)
        else:
            node.next_gen += float(node.traffic_rng.exponential(node.traffic.interval))

    def _generate(self, node: NodeState, n: int) -> None:
        while self._due(node, n):
            gen_time = (node.next_gen * self.num.slot_duration if node.traffic.kind == "periodic"
                        else node.next_gen)
            self._advance(node)
            self._packet_ids += 1
            pkt = Packet(self._packet_ids, node.node_id, "*", node.traffic.size, gen_time,
                         f"{node.traffic.kind}({node.traffic.interval:g}s)")
            self._schedule(node, pkt, n)

    def _schedule(self, node: NodeState, pkt: Packet, n: int) -> None:
        mac = node.mac
        node.history.evict(n)
        window = SelectionWindow.after_generation(
            n, self.num.slots(mac.t1), self.num.slots(mac.t2),
            num_subchannels=self.grid.num_subchannels, subchannel_count=mac.subchannels,
            inhibition_period=self.grid.inhibition_period, slot_duration=self.num.slot_duration)
        excl = mac.exclusion(self.hd_periods)
        try:
            if node.sps is not None:
                res = node.sps.resource
                if res is not None and (res.slot_index <= n or not usable_slot(res.slot_index, self.grid)):
                    node.sps = SpsState(node.sps.rri_slots, None, 0, node.sps.keep_probability,
                                        node.sps.counter_range)
                grant, node.sps = sps_on_packet(
                    node.sps, lambda: sense_and_exclude(window, node.history, excl), node.mac_rng)
                rri = node.sps.rri_slots * self.num.slot_duration if node.sps.reselection_counter > 0 else 0.0
            else:
                grant = ds_on_packet(window, node.history, excl, node.mac_rng)
                rri = 0.0
        except AllocationFailure:
            self.report.allocation_failures[node.node_id] += 1
            return
        if grant.slot_index in node.grants:
            self.report.allocation_failures[node.node_id] += 1
            return
        node.grants[grant.slot_index] = (grant, pkt, rri)
        node.history.record_own_tx(grant.slot_index)

    # ------------------------------------------------------------ air

    def _transmit(self, node: NodeState, n: int) -> None:
        if n not in node.grants:
            return
        res, pkt, rri = node.grants.pop(n)
        assert usable_slot(n, self.grid), "grant in an inhibited slot"
        per_sc = self.cfg.link.tx_power - 10 * math.log10(res.subchannel_count)
        sci = SciReservation(node.node_id, res, rri, rsrp=0.0, heard_at_slot=n)
        tx = TransmissionEvent(res, self.grid.slot_format, pkt, (per_sc,) * res.subchannel_count, sci,
                               node.kin, n * self.num.slot_duration + node.kin.clock_offset)
        node.tx_slots.add(n)
        self.report.transmissions[node.node_id] += 1
        self._on_air.setdefault(n, []).append(tx)

    def _score(self, m: int) -> None:
        txs = self._on_air.get(m, ())
        if not txs:
            return
        nearby = [t for s in range(m - self.lag, m + self.lag + 1) for t in self._on_air.get(s, ())]
        for tx in txs:
            for node in self.nodes:
                if node.node_id == tx.sender.node_id:
                    continue
                out = deliver(tx, node, self.env, nearby)
                self.report.record(tx.sender.node_id, node.node_id, out.status, out.distance)
                self.events.append(EventRecord(m, tx.sender.node_id, node.node_id, out.status,
                                               out.sinr, out.distance))
                if out.rsrp >= self.cfg.cbr_threshold:
                    self._busy[node.node_id].update((m, sc) for sc in tx.resource.subchannels)
                self._sense(node, tx, out)

    def _sense(self, node: NodeState, tx: TransmissionEvent, out: DeliveryOutcome) -> None:
        if out.status == "decoded":
            reserved = tx.resource
        elif out.status == "slot_mismatch" and decode(out.sinr, self.env.snr_min):
            # the receiver attributes the SCI to the slot it arrived in
            reserved = tx.resource.shifted(out.rx_slot - tx.resource.slot_index)
        else:
            return
        node.history.record(SciReservation(tx.sender.node_id, reserved, tx.sci.rri, out.rsrp,
                                           out.rx_slot))

    # ------------------------------------------------------------ loop

    def run(self) -> SimResult:
        for n in range(self.n_slots + self.lag):
            if n < self.n_slots:
                for node in self.nodes:
                    self._generate(node, n)
                for node in self.nodes:
                    self._transmit(node, n)
            self._score(n - self.lag)
            self._on_air.pop(n - 2 * self.lag - 1, None)
        usable = sum(1 for s in range(self.n_slots) if usable_slot(s, self.grid))
        cells = self.n_slots * self.grid.num_subchannels
        for node in self.nodes:
            self.report.tx_opportunities[node.node_id] = usable
            self.report.total_cells[node.node_id] = cells
            self.report.busy_cells[node.node_id] = len(self._busy[node.node_id])
        return SimResult(self.report, self.events, self.grid, self.warnings)


def run(scenario: ScenarioConfig, seed: int | None = None, strict: bool = False) -> SimResult:
    return Simulation(scenario, seed, strict).run()


def run_sweep(scenario: ScenarioConfig, seeds: Sequence[int], workers: int = 1) -> MetricsReport:
    """Merge reports of several seeds; the result does not depend on ``workers``."""
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            reports = list(pool.map(_run_report, [scenario] * len(seeds), seeds))
    else:
        reports = [_run_report(scenario, s) for s in seeds]
    merged = MetricsReport(scenario.distance_bin)
    for r in reports:
        merged = merged.merge(r)
    return merged


def _run_report(scenario: ScenarioConfig, seed: int) -> MetricsReport:
    return run(scenario, seed).report

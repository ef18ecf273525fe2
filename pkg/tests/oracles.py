"""Slow, independent reference implementations used as test oracles.

They share no code with the package beyond the ResourceId value type and
deliberately take the naive route: enumerate every slot, every candidate,
every threshold step.
"""

import math
import random

from a2a_sidelink.mac_mode2 import ExclusionConfig, SciReservation, SensingHistory, SelectionWindow
from a2a_sidelink.phy_grid import ResourceId


def brute_candidates(window):
    out = []
    for slot in range(window.start_slot, window.end_slot + 1):
        if slot % window.inhibition_period == 0:
            for sc in range(window.num_subchannels):
                if sc + window.subchannel_count <= window.num_subchannels:
                    out.append(ResourceId(slot, sc, window.subchannel_count))
    return out


def brute_project(history, window):
    hits = []
    for sci in history.entries:
        r = sci.reserved
        period = round(sci.rri / window.slot_duration)
        for slot in range(window.start_slot, window.end_slot + 1):
            if sci.rri == 0:
                ok = slot == r.slot_index
            else:
                ok = slot >= r.slot_index and (slot - r.slot_index) % period == 0
            if ok:
                hits.append((ResourceId(slot, r.subchannel_start, r.subchannel_count), sci.rsrp))
    return hits


def _overlap(a, b):
    if a.slot_index != b.slot_index:
        return False
    sa = set(range(a.subchannel_start, a.subchannel_start + a.subchannel_count))
    sb = set(range(b.subchannel_start, b.subchannel_start + b.subchannel_count))
    return bool(sa & sb)


def brute_blocked(history, window, cfg):
    blocked = set()
    for own in history.own_tx_slots:
        for slot in range(window.start_slot, window.end_slot + 1):
            if slot == own:
                blocked.add(slot)
            elif slot > own and any((slot - own) % p == 0 for p in cfg.half_duplex_periods):
                blocked.add(slot)
    return blocked


def brute_exclude(window, projected, cfg, blocked=()):
    cands = brute_candidates(window)
    need = cfg.min_available_ratio * len(cands)
    rsrps = [r for _, r in projected]
    i = 0
    while True:
        thr = cfg.rsrp_threshold_init + i * cfg.threshold_step
        capped = False
        if cfg.rsrp_threshold_max is not None and thr >= cfg.rsrp_threshold_max:
            thr, capped = cfg.rsrp_threshold_max, True
        free = [c for c in cands
                if not any(_overlap(c, res) and rsrp > thr for res, rsrp in projected)]
        strict = [c for c in free if c.slot_index not in blocked]
        if len(strict) >= need:
            return strict
        if all(r <= thr for r in rsrps) or capped:
            return free
        i += 1


def random_instance(rng: random.Random):
    """A small random exclusion problem: at most 40 candidates, 10 reservations."""
    nsc = rng.randint(1, 5)
    count = rng.randint(1, min(2, nsc))
    period = rng.choice((1, 1, 2))
    per_slot = nsc - count + 1
    max_slots = max(1, 40 // per_slot)
    length = rng.randint(1, max_slots * period)
    start = rng.randint(0, 50)
    window = SelectionWindow(start, start + length - 1, nsc, count, period)
    while not brute_candidates(window) or len(brute_candidates(window)) > 40:
        window = SelectionWindow(start, start + rng.randint(0, period), nsc, count, period)

    hist = SensingHistory()
    for _ in range(rng.randint(0, 10)):
        c = rng.randint(1, nsc)
        sc = rng.randint(0, nsc - c)
        slot = rng.randint(max(0, start - 60), start + length + 5)
        rri_slots = rng.choice((0, 0, 1, 2, 3, 5, 8, 20))
        hist.record(SciReservation(f"n{rng.randint(0, 5)}", ResourceId(slot, sc, c),
                                   rri_slots * hist.slot_duration,
                                   round(rng.uniform(-140.0, -40.0), 2), slot))
    for _ in range(rng.randint(0, 3)):
        hist.record_own_tx(rng.randint(max(0, start - 20), start + length))
    cfg = ExclusionConfig(
        rsrp_threshold_init=round(rng.uniform(-140.0, -80.0), 1),
        threshold_step=rng.choice((0.5, 1.0, 3.0, 6.0)),
        min_available_ratio=rng.choice((0.05, 0.2, 0.5, 1.0)),
        rsrp_threshold_max=rng.choice((None, None, round(rng.uniform(-100.0, -50.0), 1))),
        half_duplex_periods=rng.choice(((), (4,), (3, 10))),
    )
    return window, hist, cfg


def loop_count(init, step, top):
    """Escalations needed before ``top`` is no longer above the threshold."""
    return max(0, math.ceil((top - init) / step))

"""Sweeps behind the link-budget, Doppler and guard-symbol curves.

Each figure is a list of :class:`Curve`; the CLI writes one CSV per curve
named ``<figure>_<curve>.csv``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .linkbudget import DEFAULT_LINK, LinkParams, max_distance_m, min_received_power_dbm, received_power_dbm
from .mobility import doppler_shift_hz, max_speed_for_scs
from .phy_grid import (MAX_GUARD_SYMBOLS, Numerology, SlotInhibition, allocation_mode,
                       guard_symbols_needed, mode_switch_distance)

FIGURES = ("rxpower", "maxdist", "doppler", "guard")


@dataclass(frozen=True)
class Curve:
    name: str
    columns: tuple
    rows: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(tuple(_fmt(v) for v in row) for row in self.rows)
        return buf.getvalue()


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    n = int(round((stop - start) / step))
    # rounding keeps 424 * 0.1 from printing as 42.400000000000006
    return np.round(start + step * np.arange(n + 1), 9)


def rxpower(params: LinkParams = DEFAULT_LINK, max_km: float = 150.0, step_km: float = 1.0,
            carriers_ghz=(2.0, 3.0, 6.0), snr_lines_db=(0.0, 5.0, 10.0)) -> list[Curve]:
    # distance 0 has no finite loss; start at 1 m
    distances = np.concatenate(([0.001], _grid(step_km, max_km, step_km)))
    curves = []
    for f in carriers_ghz:
        p = replace(params, carrier_freq=f)
        rows = tuple((float(d), received_power_dbm(p, d * 1e3)) for d in distances)
        curves.append(Curve(f"f{f:g}GHz", ("distance_km", "power_dbm"), rows))
    for s in snr_lines_db:
        level = min_received_power_dbm(s, params.bandwidth, params.noise_figure)
        rows = ((float(distances[0]), level), (float(distances[-1]), level))
        curves.append(Curve(f"min_snr{s:g}dB", ("distance_km", "power_dbm"), rows))
    return curves


def maxdist(params: LinkParams = DEFAULT_LINK, max_snr_db: float = 20.0, step_db: float = 0.1,
            bandwidths_mhz=(10.0, 50.0, 100.0)) -> list[Curve]:
    snrs = _grid(0.0, max_snr_db, step_db)
    curves = []
    for b in bandwidths_mhz:
        p = replace(params, bandwidth=b * 1e6)
        rows = tuple((float(s), max_distance_m(p, float(s)) / 1e3) for s in snrs)
        curves.append(Curve(f"b{b:g}MHz", ("snr_min_db", "distance_km"), rows))
    return curves


def doppler(carrier_ghz: float = 6.0, max_speed: float = 800.0, step: float = 10.0,
            scs_hz: float = 60e3, tolerable_fraction: float = 0.1) -> list[Curve]:
    speeds = _grid(0.0, max_speed, step)
    shift = Curve(f"f{carrier_ghz:g}GHz", ("speed_mps", "doppler_khz"),
                  tuple((float(v), doppler_shift_hz(v, carrier_ghz * 1e9) / 1e3) for v in speeds))
    limit = tolerable_fraction * scs_hz / 1e3
    threshold = Curve("threshold", ("speed_mps", "doppler_khz"),
                      ((0.0, limit), (float(max_speed), limit)))
    vmax = max_speed_for_scs(scs_hz, tolerable_fraction, carrier_ghz * 1e9)
    crossing = Curve("max_speed", ("speed_mps", "doppler_khz"), ((vmax, 0.0), (vmax, limit)))
    return [shift, threshold, crossing]


def guard(num: Numerology = Numerology(2), max_km: float = 150.0, step_km: float = 0.1,
          max_guard: int = MAX_GUARD_SYMBOLS, switch_km: float | None = None) -> list[Curve]:
    """Guard symbols (or inhibited slots) needed versus distance.

    ``delay_symbols`` is the propagation delay in symbol units; past the
    switch distance the guard column is empty and ``unused_slots`` tells
    how many slots follow each transmit slot.
    """
    switch_m = None if switch_km is None else switch_km * 1e3
    rows = []
    for d in _grid(0.0, max_km, step_km):
        dm = float(d) * 1e3
        mode = allocation_mode(dm, num, max_guard, switch_m)
        delay_sym = dm / num.symbol_distance
        if isinstance(mode, SlotInhibition):
            rows.append((float(d), delay_sym, "", "slot_inhibition", mode.unused_slots))
        else:
            rows.append((float(d), delay_sym, guard_symbols_needed(dm, num), "symbol_gap", 0))
    boundary = switch_m if switch_m is not None else mode_switch_distance(num, max_guard)
    return [
        Curve("required", ("distance_km", "delay_symbols", "guard_symbols", "mode", "unused_slots"),
              tuple(rows)),
        Curve("mode_switch", ("distance_km",), ((boundary / 1e3,),)),
    ]


def build(which: str, **kw) -> list[Curve]:
    try:
        fn = {"rxpower": rxpower, "maxdist": maxdist, "doppler": doppler, "guard": guard}[which]
    except KeyError:
        raise ValueError(f"unknown figure {which!r}; choose from {', '.join(FIGURES)}") from None
    return fn(**kw)


def write(which: str, out_dir: str | Path, **kw) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for c in build(which, **kw):
        p = out / f"{which}_{c.name}.csv"
        p.write_text(c.to_csv())
        paths.append(p)
    return paths

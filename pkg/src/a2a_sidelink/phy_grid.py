"""NR numerology, sidelink slot format and propagation-delay countermeasures.

Two ways of absorbing the propagation delay are modelled:

* ``SymbolGap(n)``: the trailing guard of every slot is stretched to ``n``
  symbols (the AGC symbol plus at least 5 PSSCH symbols must remain, so
  ``n <= 8``).
* ``SlotInhibition(k)``: every transmit slot is followed by ``k`` slots in
  which nobody transmits (a periodic bitmap with period ``k + 1``).

The guard count of a ``SymbolGap`` is the total trailing guard, i.e. the
baseline guard symbol counts towards the delay budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .linkbudget import PHYS

SYMBOLS_PER_SLOT = 14
AGC_SYMBOLS = 1
MIN_PSSCH_SYMBOLS = 5
MAX_PSSCH_SYMBOLS = 12
MAX_GUARD_SYMBOLS = SYMBOLS_PER_SLOT - AGC_SYMBOLS - MIN_PSSCH_SYMBOLS  # 8

# Slack (in slots) for float rounding at exact guard edges; edges are inclusive.
_EPS = 1e-9


class GridError(ValueError):
    pass


class SlotInhibitionRequired(GridError):
    """More guard symbols requested than a single slot can hold."""


@dataclass(frozen=True)
class Numerology:
    mu: int = 2

    def __post_init__(self):
        if self.mu not in (0, 1, 2, 3):
            raise GridError(f"numerology mu must be 0..3, got {self.mu}")

    @property
    def scs(self) -> float:
        return 15e3 * 2 ** self.mu

    @property
    def slot_duration(self) -> float:
        return 1e-3 * 2.0 ** (-self.mu)

    @property
    def symbols_per_slot(self) -> int:
        return SYMBOLS_PER_SLOT

    @property
    def symbol_duration(self) -> float:
        return self.slot_duration / SYMBOLS_PER_SLOT

    @property
    def symbol_distance(self) -> float:
        """Distance light travels in one symbol (5357 m at mu=2)."""
        return self.symbol_duration * PHYS.c

    def slots(self, seconds: float) -> int:
        """Whole number of slots in a duration (rounded to nearest)."""
        return int(round(seconds / self.slot_duration))


@dataclass(frozen=True)
class SlotFormat:
    agc_symbols: int
    pssch_symbols: int
    guard_symbols: int
    pscch_symbols: int = 2  # multiplexed inside the PSSCH symbols

    def __post_init__(self):
        if self.agc_symbols + self.pssch_symbols + self.guard_symbols != SYMBOLS_PER_SLOT:
            raise GridError(f"slot format does not fill {SYMBOLS_PER_SLOT} symbols: {self}")
        if not MIN_PSSCH_SYMBOLS <= self.pssch_symbols <= MAX_PSSCH_SYMBOLS:
            raise GridError(f"pssch_symbols must be in [5, 12], got {self.pssch_symbols}")

    @property
    def occupied_symbols(self) -> int:
        """Symbols on air: AGC plus PSSCH."""
        return self.agc_symbols + self.pssch_symbols

    @property
    def extra_guard(self) -> int:
        return self.guard_symbols - 1


def compose_slot_format(extra_guard: int) -> SlotFormat:
    if extra_guard < 0:
        raise GridError(f"extra_guard must be >= 0, got {extra_guard}")
    if extra_guard > MAX_GUARD_SYMBOLS - 1:
        raise SlotInhibitionRequired(
            f"{extra_guard} extra guard symbols leave fewer than {MIN_PSSCH_SYMBOLS} PSSCH symbols")
    return SlotFormat(agc_symbols=AGC_SYMBOLS, pssch_symbols=MAX_PSSCH_SYMBOLS - extra_guard,
                      guard_symbols=1 + extra_guard)


def slot_format_for_guard(guard_symbols: int) -> SlotFormat:
    """Slot format with ``guard_symbols`` trailing guard symbols in total."""
    return compose_slot_format(max(guard_symbols, 1) - 1)


@dataclass(frozen=True)
class ResourceId:
    slot_index: int
    subchannel_start: int
    subchannel_count: int = 1

    @property
    def subchannels(self) -> range:
        return range(self.subchannel_start, self.subchannel_start + self.subchannel_count)

    def overlaps(self, other: "ResourceId") -> bool:
        return (self.slot_index == other.slot_index
                and self.subchannel_start < other.subchannel_start + other.subchannel_count
                and other.subchannel_start < self.subchannel_start + self.subchannel_count)

    def shifted(self, slots: int) -> "ResourceId":
        return ResourceId(self.slot_index + slots, self.subchannel_start, self.subchannel_count)


@dataclass(frozen=True)
class GridConfig:
    numerology: Numerology = field(default_factory=Numerology)
    num_subchannels: int = 13
    subchannel_size: int = 10  # PRBs, informational
    inhibition_period: int = 1
    guard_symbols: int = 1

    def __post_init__(self):
        if self.num_subchannels < 1:
            raise GridError("num_subchannels must be >= 1")
        if self.inhibition_period < 1:
            raise GridError("inhibition_period must be >= 1")
        if not 1 <= self.guard_symbols <= MAX_GUARD_SYMBOLS:
            raise GridError(f"guard_symbols must be in [1, {MAX_GUARD_SYMBOLS}]")

    @property
    def slot_format(self) -> SlotFormat:
        return slot_format_for_guard(self.guard_symbols)

    def validate_resource(self, res: ResourceId) -> None:
        if res.slot_index < 0 or res.subchannel_start < 0 or res.subchannel_count < 1:
            raise GridError(f"invalid resource {res}")
        if res.subchannel_start + res.subchannel_count > self.num_subchannels:
            raise GridError(f"resource {res} exceeds {self.num_subchannels} subchannels")

    def usable_slot_bitmap(self) -> tuple[bool, ...]:
        return tuple(i == 0 for i in range(self.inhibition_period))


def usable_slot(slot_index: int, grid: GridConfig) -> bool:
    return slot_index % grid.inhibition_period == 0


def propagation_delay_s(distance: float) -> float:
    if distance < 0:
        raise GridError(f"distance must be >= 0, got {distance}")
    return distance / PHYS.c


def guard_symbols_needed(distance: float, num: Numerology) -> int:
    """Trailing guard symbols that absorb the propagation delay over ``distance``."""
    return math.ceil(propagation_delay_s(distance) / num.symbol_duration)


@dataclass(frozen=True)
class SymbolGap:
    guard_symbols: int

    @property
    def inhibition_period(self) -> int:
        return 1


@dataclass(frozen=True)
class SlotInhibition:
    unused_slots: int

    @property
    def inhibition_period(self) -> int:
        return self.unused_slots + 1


def allocation_mode(distance: float, num: Numerology, max_guard: int = MAX_GUARD_SYMBOLS,
                    switch_distance: float | None = None) -> SymbolGap | SlotInhibition:
    """Pick the delay countermeasure for links up to ``distance`` metres.

    ``switch_distance`` optionally forces the SymbolGap/SlotInhibition
    boundary (e.g. 42.4 km); by default it follows from ``max_guard``.
    """
    if not 1 <= max_guard <= MAX_GUARD_SYMBOLS + 1:
        raise GridError(f"max_guard must be in [1, {MAX_GUARD_SYMBOLS + 1}], got {max_guard}")
    n = guard_symbols_needed(distance, num)
    fits = n <= max_guard and (switch_distance is None or distance <= switch_distance)
    if fits:
        return SymbolGap(n)
    return SlotInhibition(math.ceil(propagation_delay_s(distance) / num.slot_duration))


def mode_switch_distance(num: Numerology, max_guard: int = MAX_GUARD_SYMBOLS) -> float:
    """Largest distance still served by SymbolGap (42.86 km at mu=2, 8 symbols)."""
    return max_guard * num.symbol_distance


def arrival_slot_and_offset(tx_slot: int, distance: float, num: Numerology) -> tuple[int, float]:
    return arrival_in_frame(tx_slot * num.slot_duration + propagation_delay_s(distance), num)


def arrival_in_frame(t: float, num: Numerology, clock_offset: float = 0.0) -> tuple[int, float]:
    """(slot, fractional symbol offset) of absolute time ``t`` on a node's slot grid."""
    local = round((t - clock_offset) / num.symbol_duration, 9)
    slot = math.floor(local / SYMBOLS_PER_SLOT)
    return slot, local - slot * SYMBOLS_PER_SLOT


def touched_slots(rx_slot: int, symbol_offset: float, occupied_symbols: int) -> range:
    """Slots (receiver grid) overlapped by a reception of ``occupied_symbols``.

    A reception ending exactly on a slot boundary does not touch the next slot.
    """
    end = symbol_offset + occupied_symbols
    last = rx_slot + max(math.ceil(end / SYMBOLS_PER_SLOT - _EPS) - 1, 0)
    return range(rx_slot, last + 1)

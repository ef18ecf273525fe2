"""Free-space link budget for air-to-air sidelink links.

Path loss is the exact Friis expression ``20*log10(4*pi*d*f/c)``. The
textbook shorthand ``32.4 + 20*log10(d_m) + 20*log10(f_GHz)`` is the same
formula with its constant rounded (the exact constant with c = 3e8 m/s is
32.4418 dB).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SPEED_OF_LIGHT = 3.0e8  # m/s
BOLTZMANN = 1.38e-23  # J/K
T0 = 290.0  # K


@dataclass(frozen=True)
class PhysConstants:
    c: float = SPEED_OF_LIGHT
    k: float = BOLTZMANN
    t0: float = T0


PHYS = PhysConstants()


@dataclass(frozen=True)
class LinkParams:
    """Radio parameters of a link.

    Units: tx_power dBm, gains dBi, carrier_freq GHz, bandwidth Hz,
    noise_figure dB.
    """

    tx_power: float = 40.0
    tx_gain: float = 12.0
    rx_gain: float = 12.0
    carrier_freq: float = 6.0
    bandwidth: float = 100e6
    noise_figure: float = 8.0

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not self.carrier_freq > 0:
            raise ValueError(f"carrier_freq must be > 0, got {self.carrier_freq}")
        for name in ("tx_power", "tx_gain", "rx_gain", "noise_figure"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def eirp_plus_rx_gain(self) -> float:
        return self.tx_power + self.tx_gain + self.rx_gain


# Link parameters used for the maximum link length evaluation.
DEFAULT_LINK = LinkParams()


@dataclass(frozen=True)
class MCSEntry:
    index: int
    snr_min: float
    spectral_efficiency: float = 0.0


def _default_mcs_table() -> tuple[MCSEntry, ...]:
    # Spectral efficiencies of the 64QAM MCS table (indices 0-28). The SNR
    # thresholds are Shannon bound plus a 3 dB implementation gap, forced
    # non-decreasing. They are placeholders: override snr_min per scenario.
    se = (0.2344, 0.3066, 0.3770, 0.4902, 0.6016, 0.7402, 0.8770, 1.0273,
          1.1758, 1.3262, 1.3281, 1.4766, 1.6953, 1.9141, 2.1602, 2.4063,
          2.5703, 2.5664, 2.7305, 3.0293, 3.3223, 3.6094, 3.9023, 4.2129,
          4.5234, 4.8164, 5.1152, 5.3320, 5.5547)
    table = []
    floor = -math.inf
    for i, eff in enumerate(se):
        snr = round(10 * math.log10(2 ** eff - 1) + 3.0, 2)
        floor = max(floor, snr)
        table.append(MCSEntry(i, floor, eff))
    return tuple(table)


DEFAULT_MCS_TABLE = _default_mcs_table()


def mcs_entry(index: int, table=DEFAULT_MCS_TABLE) -> MCSEntry:
    if not 0 <= index < len(table):
        raise ValueError(f"MCS index {index} outside 0..{len(table) - 1}")
    return table[index]


def path_loss_db(distance: float, carrier_freq: float) -> float:
    """Free-space path loss in dB; distance in metres, carrier_freq in GHz."""
    if not distance > 0:
        raise ValueError(f"distance must be > 0 m, got {distance}")
    if not carrier_freq > 0:
        raise ValueError(f"carrier_freq must be > 0 GHz, got {carrier_freq}")
    return 20.0 * math.log10(4.0 * math.pi * distance * carrier_freq * 1e9 / PHYS.c)


def received_power_dbm(params: LinkParams, distance: float) -> float:
    return params.eirp_plus_rx_gain - path_loss_db(distance, params.carrier_freq)


def noise_floor_dbm(bandwidth: float, noise_figure: float) -> float:
    """Thermal noise kT0B in dBm plus the receiver noise figure."""
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be > 0 Hz, got {bandwidth}")
    return 10.0 * math.log10(PHYS.k * PHYS.t0 * bandwidth) + 30.0 + noise_figure


def min_received_power_dbm(snr_min: float, bandwidth: float, noise_figure: float) -> float:
    return snr_min + noise_floor_dbm(bandwidth, noise_figure)


def max_distance_m(params: LinkParams, snr_min: float) -> float:
    """Distance at which the received power equals the sensitivity.

    Closed-form inversion of the free-space loss; always positive since the
    loss is unbounded in distance.
    """
    if not math.isfinite(snr_min):
        raise ValueError("snr_min must be finite")
    allowed_loss = params.eirp_plus_rx_gain - min_received_power_dbm(
        snr_min, params.bandwidth, params.noise_figure)
    wavelength_over_4pi = PHYS.c / (4.0 * math.pi * params.carrier_freq * 1e9)
    return wavelength_over_4pi * 10.0 ** (allowed_loss / 20.0)


def snr_db(params: LinkParams, distance: float) -> float:
    return received_power_dbm(params, distance) - noise_floor_dbm(
        params.bandwidth, params.noise_figure)


def dbm_to_mw(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0)


def mw_to_dbm(p_mw: float) -> float:
    if p_mw <= 0:
        return -math.inf
    return 10.0 * math.log10(p_mw)

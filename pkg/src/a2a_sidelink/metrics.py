"""Run metrics and their CSV form.

metrics.csv columns: ``metric,bin,value``. Rows, in order:

* ``prr,<lo>-<hi>km,<ratio>``     packet reception ratio per distance bin
* ``attempted,<lo>-<hi>km,<n>``   (transmission, receiver) pairs per bin
* ``decoded,<lo>-<hi>km,<n>``
* ``status,<status>,<n>``         one row per delivery status, all statuses listed
* ``allocation_failures,<node>,<n>`` and ``allocation_failures,all,<n>``
* ``transmissions,<node>,<n>``
* ``tx_opportunities,<node>,<n>`` usable slots the node could transmit in
* ``cbr,<node>,<ratio>``          busy (slot, subchannel) cells / all cells
* ``link_attempted,<tx>-><rx>,<n>`` and ``link_decoded,<tx>-><rx>,<n>``

events.csv columns: ``slot,tx,rx,status,sinr_db,distance_m``.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

STATUSES = ("decoded", "collision", "below_sensitivity", "slot_mismatch",
            "half_duplex_miss", "doppler_fail")

EVENT_COLUMNS = ("slot", "tx", "rx", "status", "sinr_db", "distance_m")
METRIC_COLUMNS = ("metric", "bin", "value")


@dataclass
class MetricsReport:
    distance_bin: float = 5000.0
    status_counts: Counter = field(default_factory=Counter)
    bin_decoded: Counter = field(default_factory=Counter)
    bin_attempted: Counter = field(default_factory=Counter)
    link_decoded: Counter = field(default_factory=Counter)
    link_attempted: Counter = field(default_factory=Counter)
    allocation_failures: Counter = field(default_factory=Counter)
    transmissions: Counter = field(default_factory=Counter)
    tx_opportunities: Counter = field(default_factory=Counter)
    busy_cells: Counter = field(default_factory=Counter)
    total_cells: Counter = field(default_factory=Counter)

    def record(self, tx: str, rx: str, status: str, distance: float) -> None:
        if status not in STATUSES:
            raise ValueError(f"unknown status {status!r}")
        b = int(distance // self.distance_bin)
        ok = status == "decoded"
        self.status_counts[status] += 1
        self.bin_attempted[b] += 1
        self.bin_decoded[b] += ok
        self.link_attempted[(tx, rx)] += 1
        self.link_decoded[(tx, rx)] += ok

    def prr(self, b: int | None = None) -> float:
        """PRR of one distance bin, or over all bins when ``b`` is None."""
        if b is None:
            att = sum(self.bin_attempted.values())
            return sum(self.bin_decoded.values()) / att if att else float("nan")
        att = self.bin_attempted[b]
        return self.bin_decoded[b] / att if att else float("nan")

    @property
    def attempted(self) -> int:
        return sum(self.bin_attempted.values())

    def cbr(self, node: str) -> float:
        total = self.total_cells[node]
        return self.busy_cells[node] / total if total else 0.0

    def merge(self, other: "MetricsReport") -> "MetricsReport":
        if other.distance_bin != self.distance_bin:
            raise ValueError("cannot merge reports with different distance bins")
        out = MetricsReport(self.distance_bin)
        for name in ("status_counts", "bin_decoded", "bin_attempted", "link_decoded",
                     "link_attempted", "allocation_failures", "transmissions",
                     "tx_opportunities", "busy_cells", "total_cells"):
            merged = Counter()
            merged.update(getattr(self, name))
            merged.update(getattr(other, name))
            setattr(out, name, merged)
        return out

    def _bin_label(self, b: int) -> str:
        lo, hi = b * self.distance_bin / 1e3, (b + 1) * self.distance_bin / 1e3
        return f"{lo:g}-{hi:g}km"

    def rows(self) -> list[tuple[str, str, str]]:
        rows = []
        bins = sorted(self.bin_attempted)
        for b in bins:
            rows.append(("prr", self._bin_label(b), f"{self.prr(b):.6f}"))
        for b in bins:
            rows.append(("attempted", self._bin_label(b), str(self.bin_attempted[b])))
        for b in bins:
            rows.append(("decoded", self._bin_label(b), str(self.bin_decoded[b])))
        for s in STATUSES:
            rows.append(("status", s, str(self.status_counts[s])))
        nodes = sorted(set(self.transmissions) | set(self.tx_opportunities)
                       | set(self.allocation_failures) | set(self.total_cells))
        for n in nodes:
            rows.append(("allocation_failures", n, str(self.allocation_failures[n])))
        rows.append(("allocation_failures", "all", str(sum(self.allocation_failures.values()))))
        for n in nodes:
            rows.append(("transmissions", n, str(self.transmissions[n])))
        for n in nodes:
            rows.append(("tx_opportunities", n, str(self.tx_opportunities[n])))
        for n in nodes:
            rows.append(("cbr", n, f"{self.cbr(n):.6f}"))
        for link in sorted(self.link_attempted):
            rows.append(("link_attempted", f"{link[0]}->{link[1]}", str(self.link_attempted[link])))
        for link in sorted(self.link_attempted):
            rows.append(("link_decoded", f"{link[0]}->{link[1]}", str(self.link_decoded[link])))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(METRIC_COLUMNS)
        w.writerows(self.rows())
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def events_to_csv(events) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EVENT_COLUMNS)
    for e in events:
        w.writerow((e.slot, e.tx, e.rx, e.status, f"{e.sinr_db:.4f}", f"{e.distance_m:.3f}"))
    return buf.getvalue()

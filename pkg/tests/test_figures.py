import csv
import io
from collections import defaultdict
from pathlib import Path

import pytest

from a2a_sidelink import figures
from a2a_sidelink.linkbudget import DEFAULT_LINK, LinkParams, max_distance_m, received_power_dbm
from a2a_sidelink.mobility import doppler_shift_hz

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name):
    curves = defaultdict(list)
    with open(FIXTURES / name) as f:
        for row in csv.DictReader(f):
            name_, *vals = row.values()
            curves[name_].append(tuple(float(v) for v in vals))
    return curves


def parse_curve(c):
    rows = list(csv.reader(io.StringIO(c.to_csv())))
    return rows[0], rows[1:]


def test_rxpower_golden():
    ref = load_fixture("figure_rxpower.csv")
    for curve, f in (("f6GHz", 6.0), ("f3GHz", 3.0), ("f2GHz", 2.0)):
        p = LinkParams(carrier_freq=f)
        for d_km, power in ref[curve]:
            assert received_power_dbm(p, d_km * 1e3) == pytest.approx(power, abs=0.05)


def test_rxpower_threshold_lines_golden():
    ref = load_fixture("figure_rxpower.csv")
    ours = {c.name: c for c in figures.rxpower()}
    for snr in (0, 5, 10):
        level = ours[f"min_snr{snr}dB"].rows[0][1]
        for _, power in ref[f"min_snr{snr}dB"]:
            assert level == pytest.approx(power, abs=1e-3)


def test_maxdist_golden():
    ref = load_fixture("figure_maxdist.csv")
    for curve, bw in (("b100MHz", 100e6), ("b50MHz", 50e6), ("b10MHz", 10e6)):
        p = LinkParams(bandwidth=bw)
        for snr, d_km in ref[curve]:
            assert max_distance_m(p, snr) / 1e3 == pytest.approx(d_km, rel=5e-3)


def test_doppler_golden():
    ref = load_fixture("figure_doppler.csv")
    for v, khz in ref["f6GHz"]:
        assert doppler_shift_hz(v, 6e9) / 1e3 == pytest.approx(khz, abs=0.05)
    assert {k for _, k in ref["threshold"]} == {6.0}


@pytest.mark.parametrize("which, first", [
    ("rxpower", ("distance_km", "power_dbm")),
    ("maxdist", ("snr_min_db", "distance_km")),
    ("doppler", ("speed_mps", "doppler_khz")),
    ("guard", ("distance_km", "delay_symbols", "guard_symbols", "mode", "unused_slots")),
])
def test_headers(which, first):
    header, rows = parse_curve(figures.build(which)[0])
    assert tuple(header) == first and rows


def test_rxpower_shape():
    curves = {c.name: c for c in figures.rxpower()}
    assert set(curves) == {"f2GHz", "f3GHz", "f6GHz", "min_snr0dB", "min_snr5dB", "min_snr10dB"}
    rows = curves["f6GHz"].rows
    assert rows[0][0] == 0.001 and rows[-1][0] == 150.0
    assert all(a[1] > b[1] for a, b in zip(rows, rows[1:]))


def test_maxdist_sweep():
    rows = {c.name: c for c in figures.maxdist()}["b100MHz"].rows
    assert len(rows) == 201
    assert rows[0][1] == pytest.approx(125.49, rel=5e-3)
    assert rows[-1][1] == pytest.approx(12.55, rel=5e-3)


def test_doppler_curves():
    curves = {c.name: c for c in figures.doppler()}
    assert curves["max_speed"].rows[0][0] == pytest.approx(300.0)
    row300 = [r for r in curves["f6GHz"].rows if r[0] == 300.0][0]
    assert row300[1] == pytest.approx(6.0)


def test_guard_curve():
    req, switch = figures.guard()
    by_km = {round(r[0], 1): r for r in req.rows}
    assert by_km[10.0][2:] == (2, "symbol_gap", 0)
    assert by_km[42.8][3] == "symbol_gap" and by_km[42.9][3] == "slot_inhibition"
    assert by_km[100.0][2:] == ("", "slot_inhibition", 2)
    assert switch.rows[0][0] == pytest.approx(42.857, abs=1e-3)

    req42, switch42 = figures.guard(switch_km=42.4)
    by_km = {round(r[0], 1): r for r in req42.rows}
    # the override boundary itself still fits a symbol gap
    assert by_km[42.4][3] == "symbol_gap" and by_km[42.5][3] == "slot_inhibition"
    assert switch42.rows[0][0] == pytest.approx(42.4)


def test_write_is_bit_identical(tmp_path):
    a = figures.write("guard", tmp_path / "a")
    b = figures.write("guard", tmp_path / "b")
    assert [p.name for p in a] == ["guard_required.csv", "guard_mode_switch.csv"]
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()


def test_unknown_figure():
    with pytest.raises(ValueError):
        figures.build("nope")

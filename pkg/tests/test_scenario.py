import pytest
from hypothesis import given, settings, strategies as st

from a2a_sidelink import scenario
from a2a_sidelink.linkbudget import LinkParams
from a2a_sidelink.phy_grid import SlotInhibition, SymbolGap
from a2a_sidelink.scenario import (GridSpec, MacSpec, NodeClass, ScenarioConfig, ScenarioError,
                                   TrafficSpec, emit, parse, parse_quantity, resolve_grid, validate)

MINIMAL = """
duration: 1 s
link: {snr_min: 5 dB}
classes:
  a: {position: [0 m, 0 m, 0 m]}
  b: {position: [10 km, 0 m, 0 m], traffic: none}
"""


@pytest.mark.parametrize("text, dim, value", [
    ("40 dBm", "power", 40.0),
    ("10 dBW", "power", 40.0),
    ("6 GHz", "freq_ghz", 6.0),
    ("5900 MHz", "freq_ghz", 5.9),
    ("100 MHz", "bandwidth", 100e6),
    ("42.4 km", "distance", 42400.0),
    ("100 ms", "time", 0.1),
    ("-126 dBm", "power", -126.0),
    ("1.5e3 m", "distance", 1500.0),
    ("300 B", "size", 300),
])
def test_parse_quantity(text, dim, value):
    assert parse_quantity(text, dim) == pytest.approx(value)


@pytest.mark.parametrize("value, dim", [(40, "power"), (6.0, "freq_ghz"), ("6", "freq_ghz"),
                                        ("6 km", "freq_ghz"), ("fast", "time"), (True, "time")])
def test_parse_quantity_rejects(value, dim):
    with pytest.raises(ScenarioError):
        parse_quantity(value, dim)


def test_minimal_defaults():
    cfg = parse(MINIMAL)
    assert cfg.link == LinkParams()
    assert [k.node_id for k in cfg.node_kinematics()] == ["a", "b"]
    assert cfg.classes[0].traffic.kind == "none"  # no traffic block means a pure receiver
    assert cfg.classes[1].traffic.kind == "none"
    validate(cfg)


def test_bare_number_rejected_with_location():
    with pytest.raises(ScenarioError) as e:
        parse(MINIMAL.replace("snr_min: 5 dB", "snr_min: 5"))
    assert e.value.where == "link.snr_min"


@pytest.mark.parametrize("text, where", [
    ("duration: 1 s\nbogus: 1\n", "scenario"),
    ("seed: 3\n", "duration"),
    ("duration: 1 s\nclasses:\n  a: {position: [0 m, 0 m]}\n", "classes.a.position"),
    ("duration: 1 s\nclasses:\n  a: {position: [0 m, 0 m, 0 m], mac: {scheduler: csma}}\n",
     "classes.a.mac.scheduler"),
    ("duration: 1 s\nclasses:\n  a: {position: [0 m, 0 m, 0 m], mac: {sensing_window: 500 ms}}\n",
     "classes.a.mac.sensing_window"),
    ("duration: 1 s\nclasses:\n  a: {waypoints: [[1 s, [0 m, 0 m, 0 m]], [1 s, [1 m, 0 m, 0 m]]]}\n",
     "classes.a.waypoints"),
])
def test_errors_name_field(text, where):
    with pytest.raises(ScenarioError) as e:
        parse(text)
    assert e.value.where == where


def test_yaml_syntax_error_reports_line():
    with pytest.raises(ScenarioError) as e:
        parse("duration: 1 s\nclasses: [\n")
    assert e.value.where.startswith("line ")


@pytest.mark.parametrize("edit, where", [
    ({"snr_min": None}, "link"),
    ({"classes": (NodeClass("a", ((0.0, (0, 0, 0)),), traffic=TrafficSpec("aperiodic")),)},
     "classes.a.mac.scheduler"),
    ({"classes": (NodeClass("a", ((0.0, (0, 0, 0)),), mac=MacSpec(rri=0.05)),)}, "classes.a.mac.rri"),
    ({"classes": (NodeClass("a", ((0.0, (0, 0, 0)),)), NodeClass("a", ((0.0, (1, 0, 0)),)))},
     "classes"),
])
def test_validate_rejects(edit, where):
    from dataclasses import replace
    cfg = replace(parse(MINIMAL), **edit)
    with pytest.raises(ScenarioError) as e:
        validate(cfg)
    assert e.value.where == where


def test_resolve_auto_and_warning():
    cfg = parse(MINIMAL)
    r = resolve_grid(cfg)
    assert r.required == SymbolGap(2) and r.grid.guard_symbols == 2 and not r.warnings

    far = parse(MINIMAL.replace("10 km", "50 km"))
    assert resolve_grid(far).grid.inhibition_period == 2
    assert resolve_grid(far).required == SlotInhibition(1)

    forced = parse(MINIMAL.replace("10 km", "50 km") + "grid: {guard: 8, inhibition_period: 1}\n")
    assert resolve_grid(forced).warnings
    with pytest.raises(ScenarioError):
        validate(forced, strict=True)


def test_override_switch_distance():
    text = MINIMAL.replace("10 km", "42.6 km")
    assert resolve_grid(parse(text)).required == SymbolGap(8)
    forced = parse(text + "grid: {mode_switch_distance: 42.4 km}\n")
    assert resolve_grid(forced).required == SlotInhibition(1)


def test_apply_overrides():
    doc = {"link": {"snr_min": "5 dB"}}
    scenario.apply_overrides(doc, ["link.snr_min=7 dB", "grid.guard=3"])
    assert doc == {"link": {"snr_min": "7 dB"}, "grid": {"guard": 3}}
    with pytest.raises(ScenarioError):
        scenario.apply_overrides(doc, ["novalue"])


@pytest.mark.parametrize("name", sorted(scenario.bundled_scenarios()))
def test_bundled_scenarios_round_trip(name):
    cfg = scenario.load(scenario.bundled_scenarios()[name])
    validate(cfg)
    assert parse(emit(cfg)) == cfg


# ---------------------------------------------------------------- round trip property

floats = st.floats(min_value=-1e5, max_value=1e5, allow_nan=False, allow_infinity=False)
pos = st.tuples(floats, floats, floats)
positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


@st.composite
def node_classes(draw, name):
    times = sorted(set(draw(st.lists(st.floats(0, 100), min_size=1, max_size=4))))
    waypoints = tuple((t, draw(pos)) for t in times)
    n = draw(st.integers(1, 3))
    offsets = tuple(draw(pos) for _ in range(n)) if n > 1 else ((0.0, 0.0, 0.0),)
    kind = draw(st.sampled_from(("periodic", "aperiodic", "none")))
    # a silent node has no interval to carry
    interval = 0.1 if kind == "none" else draw(positive)
    traffic = TrafficSpec(kind, interval, draw(st.integers(1, 9000)))
    t1 = draw(st.floats(1e-4, 1e-2))
    mac = MacSpec(
        scheduler="sps" if kind == "periodic" else "ds",
        t1=t1, t2=t1 + draw(st.floats(1e-4, 0.1)),
        sensing_window=draw(st.sampled_from((1.1, 0.1))),
        rri=draw(st.one_of(st.none(), positive)),
        keep_probability=draw(st.floats(0, 1)),
        counter_min=5, counter_max=draw(st.integers(5, 20)),
        rsrp_threshold=draw(st.floats(-140, -60)), threshold_step=draw(st.floats(0.5, 6)),
        min_available_ratio=draw(st.floats(0.01, 1)), subchannels=draw(st.integers(1, 4)),
    )
    return NodeClass(name, waypoints, offsets, draw(st.floats(0, 1e-4)), traffic, mac)


@st.composite
def configs(draw):
    names = draw(st.lists(st.sampled_from("abcdefg"), unique=True, max_size=3))
    grid = GridSpec(draw(st.integers(0, 3)), draw(st.integers(1, 20)), draw(st.integers(1, 50)),
                    draw(st.one_of(st.none(), st.integers(1, 8))),
                    draw(st.one_of(st.none(), st.integers(1, 4))), draw(st.integers(1, 8)),
                    draw(st.one_of(st.none(), positive)))
    link = LinkParams(draw(floats), draw(floats), draw(floats), draw(positive),
                      draw(st.floats(1e3, 1e9)), draw(st.floats(0, 20)))
    return ScenarioConfig(
        duration=draw(positive), seed=draw(st.integers(0, 2**31)), grid=grid, link=link,
        snr_min=draw(st.one_of(st.none(), st.floats(-10, 30))),
        mcs=draw(st.one_of(st.none(), st.integers(0, 28))),
        doppler_gate=draw(st.booleans()), tolerable_doppler_fraction=draw(st.floats(0.01, 1)),
        distance_bin=draw(positive), cbr_threshold=draw(st.floats(-120, -50)),
        classes=tuple(draw(node_classes(n)) for n in names))


@settings(max_examples=100, deadline=None)
@given(configs())
def test_round_trip(cfg):
    assert parse(emit(cfg)) == cfg

"""Command line: ``a2a-sidelink {figures,linkbudget,run,validate}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import yaml

from . import figures, scenario
from .linkbudget import (DEFAULT_LINK, LinkParams, max_distance_m, min_received_power_dbm,
                         noise_floor_dbm, path_loss_db, received_power_dbm)
from .metrics import events_to_csv
from .scenario import ScenarioError, parse_quantity

log = logging.getLogger("a2a_sidelink")


def _quantity(dim: str):
    def conv(text: str) -> float:
        try:
            return parse_quantity(text, dim)
        except ScenarioError as e:
            raise argparse.ArgumentTypeError(e.msg) from None
    conv.__name__ = f"{dim} quantity"
    return conv


def _resolve_scenario_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    bundled = scenario.bundled_scenarios()
    if name in bundled:
        return bundled[name]
    raise FileNotFoundError(f"scenario file not found: {name} "
                            f"(bundled: {', '.join(bundled)})")


def _load_scenario(args) -> scenario.ScenarioConfig:
    path = _resolve_scenario_path(args.scenario)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark is not None else str(path)
        raise ScenarioError(where, f"unparsable scenario: {getattr(e, 'problem', e)}") from None
    if args.override:
        doc = scenario.apply_overrides(doc if isinstance(doc, dict) else {}, args.override)
    cfg = scenario.from_dict(doc)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    scenario.validate(cfg, strict=args.strict)
    return cfg


# ---------------------------------------------------------------- commands

def cmd_figures(args) -> int:
    which = figures.FIGURES if args.which == "all" else (args.which,)
    for w in which:
        kw = {}
        if args.step is not None:
            kw = {"rxpower": {"step_km": args.step}, "maxdist": {"step_db": args.step},
                  "doppler": {"step": args.step}, "guard": {"step_km": args.step}}[w]
        if w == "guard" and args.switch_distance is not None:
            kw["switch_km"] = args.switch_distance / 1e3
        for p in figures.write(w, args.out, **kw):
            print(p)
    return 0


def linkbudget_report(params: LinkParams, snr_min: float, distance: float | None) -> list[tuple[str, float, str]]:
    rows = [("noise_floor", noise_floor_dbm(params.bandwidth, params.noise_figure), "dBm"),
            ("min_rx_power", min_received_power_dbm(snr_min, params.bandwidth, params.noise_figure), "dBm"),
            ("max_distance", max_distance_m(params, snr_min) / 1e3, "km")]
    if distance is not None:
        rx = received_power_dbm(params, distance)
        rows = [("distance", distance / 1e3, "km"),
                ("path_loss", path_loss_db(distance, params.carrier_freq), "dB"),
                ("rx_power", rx, "dBm")] + rows
        rows.append(("margin", rx - rows[4][1], "dB"))
    return rows


def cmd_linkbudget(args) -> int:
    params = LinkParams(args.tx_power, args.tx_gain, args.rx_gain, args.carrier,
                        args.bandwidth, args.noise_figure)
    rows = linkbudget_report(params, args.snr_min, args.distance)
    if args.csv:
        print("quantity,value,unit")
        for name, value, unit in rows:
            print(f"{name},{value!r},{unit}")
    else:
        for name, value, unit in rows:
            print(f"{name:>14}: {value:10.3f} {unit}")
    return 0


def cmd_validate(args) -> int:
    cfg = _load_scenario(args)
    resolved = scenario.resolve_grid(cfg)
    for w in resolved.warnings:
        print(f"warning: {w}", file=sys.stderr)
    g = resolved.grid
    print(f"ok: {sum(c.count for c in cfg.classes)} nodes, max distance "
          f"{resolved.max_distance / 1e3:.3f} km, required {resolved.required}, "
          f"grid guard={g.guard_symbols} inhibition_period={g.inhibition_period}")
    return 0


def cmd_run(args) -> int:
    from . import sim

    cfg = _load_scenario(args)
    out = Path(args.out)
    if args.seeds and args.seeds > 1:
        seeds = [cfg.seed + i for i in range(args.seeds)]
        report = sim.run_sweep(cfg, seeds, workers=args.workers)
        out.mkdir(parents=True, exist_ok=True)
        report.write_csv(out / "metrics.csv")
        print(out / "metrics.csv")
        return 0
    result = sim.run(cfg, strict=args.strict)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    out.mkdir(parents=True, exist_ok=True)
    result.report.write_csv(out / "metrics.csv")
    (out / "events.csv").write_text(events_to_csv(result.events))
    print(out / "metrics.csv")
    print(out / "events.csv")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="a2a-sidelink", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("figures", help="write figure sweeps as CSV")
    f.add_argument("which", choices=figures.FIGURES + ("all",))
    f.add_argument("--out", default="figures")
    f.add_argument("--step", type=float, default=None,
                   help="sweep step in the figure's x unit (km, dB or m/s)")
    f.add_argument("--switch-distance", type=_quantity("distance"), default=None,
                   help="force the guard/inhibition switch distance, e.g. '42.4 km'")
    f.set_defaults(func=cmd_figures)

    lb = sub.add_parser("linkbudget", help="one-shot link budget")
    lb.add_argument("--tx-power", type=_quantity("power"), default=DEFAULT_LINK.tx_power)
    lb.add_argument("--tx-gain", type=_quantity("gain"), default=DEFAULT_LINK.tx_gain)
    lb.add_argument("--rx-gain", type=_quantity("gain"), default=DEFAULT_LINK.rx_gain)
    lb.add_argument("--carrier", type=_quantity("freq_ghz"), default=DEFAULT_LINK.carrier_freq)
    lb.add_argument("--bandwidth", type=_quantity("bandwidth"), default=DEFAULT_LINK.bandwidth)
    lb.add_argument("--noise-figure", type=_quantity("db"), default=DEFAULT_LINK.noise_figure)
    lb.add_argument("--snr-min", type=_quantity("db"), default=0.0)
    lb.add_argument("--distance", type=_quantity("distance"), default=None)
    lb.add_argument("--csv", action="store_true")
    lb.set_defaults(func=cmd_linkbudget)

    for name, func, hlp in (("run", cmd_run, "run a scenario"),
                            ("validate", cmd_validate, "check a scenario file")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("scenario", help="scenario file or bundled scenario name")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--strict", action="store_true",
                       help="treat guard/distance inconsistencies as errors")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
        if name == "run":
            p.add_argument("--out", default="out")
            p.add_argument("--seeds", type=int, default=None,
                           help="run this many consecutive seeds and merge the reports")
            p.add_argument("--workers", type=int, default=1)
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

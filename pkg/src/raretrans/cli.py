"""Command-line front end.

Exit codes: 0 success, 1 analysis failure (e.g. a reducible model),
2 usage or parse error, 3 experiment criterion failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from raretrans.cycles import cycle_tree
from raretrans.energy import virtual_energy
from raretrans.landscape import Landscape
from raretrans.metastability import CapExceededError, gate_analysis, meta_sets, stability_levels
from raretrans.model import ModelError, check_irreducible, load_model, parse_number
from raretrans.report import analysis_payload, dumps, gates_payload, make_report
from raretrans.simulator import EXPERIMENTS, ExperimentReport

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_CRITERION = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _list(text: str | None) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _floats(text: str | None) -> list[float]:
    try:
        values = [float(t) for t in _list(text)]
    except ValueError:
        raise UsageError(f"invalid number list: {text!r}") from None
    if any(not v > 0 for v in values):
        raise UsageError("beta values must be positive")
    return values


def _caps(items: list[str]) -> dict[str, int]:
    caps = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not value.isdigit():
            raise UsageError(f"--caps expects KEY=INT, got {item!r}")
        caps[key] = int(value)
    return caps


def _pair(text: str | None) -> tuple[str, str]:
    parts = _list(text)
    if len(parts) != 2:
        raise UsageError("--pair expects X,Y")
    if parts[0] == parts[1]:
        raise UsageError("--pair needs two distinct states")
    return parts[0], parts[1]


def _emit(doc: dict, out: str | None) -> None:
    text = dumps(doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    model = load_model(args.model)
    report = check_irreducible(model)
    print(f"states: {model.n}  mode: {model.mode}")
    print(f"irreducible: {'yes' if report.irreducible else 'no'}")
    for a, b in report.unreachable_pairs:
        print(f"unreachable: {a} -> {b}")
    for w in report.warnings:
        print(f"warning: {w}")
    return EXIT_OK if report.irreducible else EXIT_FAILED


def _landscape(model) -> Landscape:
    if not check_irreducible(model).irreducible:
        raise ModelError("model is not irreducible")
    return Landscape(model, virtual_energy(model))


def cmd_analyze(args) -> int:
    model = load_model(args.model)
    try:
        land = _landscape(model)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    levels = [parse_number(t) for t in _list(args.levels)]
    records = stability_levels(land)
    meta = meta_sets(records, levels)
    payload = analysis_payload(land, cycle_tree(land), records, meta)
    _emit(make_report(model, "analyze", {"levels": _list(args.levels)}, payload), args.out)
    return EXIT_OK


def cmd_gates(args) -> int:
    model = load_model(args.model)
    x, y = _pair(args.pair)
    for s in (x, y):
        model.index(s)
    caps = _caps(args.caps)
    try:
        land = _landscape(model)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    options = {"include_endpoints": args.include_endpoints}
    if "paths" in caps:
        options["path_cap"] = caps["paths"]
    if "transversals" in caps:
        options["transversal_cap"] = caps["transversals"]
    result = gate_analysis(land, x, y, **options)
    params = {"pair": [x, y], "include_endpoints": args.include_endpoints, "caps": caps}
    _emit(make_report(model, "gates", params, gates_payload(result)), args.out)
    return EXIT_OK


def run_experiment(model, name: str, args) -> ExperimentReport:
    """Map command-line options onto one experiment call."""
    if name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    func = EXPERIMENTS[name]
    betas = _floats(args.beta)
    caps = _caps(args.caps)
    common = {"master_seed": args.seed}
    if args.replicas is not None:
        if args.replicas < 1:
            raise UsageError("--replicas must be positive")
        common["replicas"] = args.replicas
    if betas:
        common["betas"] = tuple(betas)

    def default_start():
        if args.start:
            return args.start
        land = Landscape(model)
        meta = meta_sets(stability_levels(land))
        if not meta.metastable:
            raise UsageError("no metastable state; pass --start")
        return min(meta.metastable, key=model.index)

    if name == "escape-scaling":
        kw = {"step_cap": caps["steps"]} if "steps" in caps else {}
        return func(model, default_start(), **common, **kw)
    if name == "exponential-law":
        if "betas" in common:
            common["beta"] = common.pop("betas")[0]
        kw = {"step_cap": caps["steps"]} if "steps" in caps else {}
        return func(model, default_start(), **common, **kw)
    if name == "gate-crossing":
        x, y = _pair(args.pair)
        return func(model, x, y, _list(args.gate) or None, **common)
    if name == "tube-probability":
        x, y = _pair(args.pair)
        kw = {"step_cap": caps["steps"]} if "steps" in caps else {}
        return func(model, x, y, **common, **kw)
    if name == "recurrence":
        levels = _list(args.levels)
        if not levels:
            raise UsageError("recurrence needs --levels A")
        return func(model, parse_number(levels[0]), args.epsilon if args.epsilon is not None else 0.5,
                    **common)
    if name == "excursion":
        if args.height is None:
            raise UsageError("excursion needs --height H")
        if "betas" in common:
            common["beta"] = common.pop("betas")[0]
        cyc = _list(args.cycle) or None
        return func(model, default_start(), parse_number(args.height),
                    args.epsilon if args.epsilon is not None else 1.0, cycle_members=cyc, **common)
    # exit-distribution
    members = _list(args.cycle)
    if not members:
        raise UsageError("exit-distribution needs --cycle A,B,...")
    start = args.start or min(members, key=model.index)
    return func(model, members, start, **common)


def cmd_simulate(args) -> int:
    model = load_model(args.model)
    if not check_irreducible(model).irreducible:
        print("error: model is not irreducible", file=sys.stderr)
        return EXIT_FAILED
    result = run_experiment(model, args.experiment, args)
    params = {
        "experiment": args.experiment, "beta": _list(args.beta), "replicas": args.replicas,
        "seed": args.seed, "pair": _list(args.pair), "levels": _list(args.levels),
        "caps": _caps(args.caps),
    }
    _emit(make_report(model, "simulate", params, result.to_dict()), args.out)
    if args.csv:
        Path(args.csv).write_text(result.to_csv())
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"{result.name}: {result.status}", file=sys.stderr)
    return EXIT_CRITERION if result.status == "fail" else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raretrans", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", required=True, metavar="PATH")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check a model file")

    p = add("analyze", cmd_analyze, "energy, heights, cycles and metastable sets")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--levels", metavar="LIST", help="comma-separated levels a for X_a")

    p = add("gates", cmd_gates, "saddles and minimal gates for a pair")
    p.add_argument("--pair", required=True, metavar="X,Y")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--caps", action="append", default=[], metavar="K=V",
                   help="paths=N or transversals=N")
    p.add_argument("--include-endpoints", action="store_true")

    p = add("simulate", cmd_simulate, "run a simulation experiment")
    p.add_argument("--experiment", required=True, metavar="NAME")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--beta", metavar="LIST")
    p.add_argument("--replicas", type=int, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="U64")
    p.add_argument("--levels", metavar="LIST")
    p.add_argument("--pair", metavar="X,Y")
    p.add_argument("--caps", action="append", default=[], metavar="K=V", help="steps=N")
    p.add_argument("--start", metavar="STATE")
    p.add_argument("--gate", metavar="LIST")
    p.add_argument("--cycle", metavar="LIST")
    p.add_argument("--height", metavar="H")
    p.add_argument("--epsilon", type=float)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: validate, product, check, synth, build01, encode-minsky,
export-dot.  Machine-readable results go to stdout as JSON with a stable
field order; diagnostics go to stderr.  Exit codes: 0 = query answered
(either verdict), 1 = synthesis exhausted its bound, 2 = input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .minsky import encode_reach, encode_safe, parse_minsky
from .model import ModelError, PTA, parametric_clocks
from .parser import Network, network_to_text, parse_network, pta_to_text
from .semantics import StepError, export_region_graph_dot, run_to_json
from .solver import (
    BackendDisagreement,
    SynthesisQuery,
    check,
    solve,
)
from .zerone import add_fractional_clock, build_01
from .model import normalize

EXIT_ANSWERED = 0
EXIT_NOT_FOUND = 1
EXIT_INPUT_ERROR = 2


def _load_network(path: str) -> Network:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ModelError(f"cannot read {path}: {e.strerror}") from None
    return parse_network(text)


def _load_flat(path: str, accepting_policy: str) -> PTA:
    return _load_network(path).flatten(accepting_policy)


def _parse_gamma(spec: str, a: PTA) -> dict[str, int]:
    gamma: dict[str, int] = {}
    for item in spec.split(","):
        if not item:
            continue
        name, sep, value = item.partition("=")
        if not sep:
            raise ModelError(f"--gamma entries look like name=value, got {item!r}")
        try:
            v = int(value)
        except ValueError:
            raise ModelError(f"--gamma value for {name!r} must be an integer") from None
        if v < 0:
            raise ModelError(f"--gamma value for {name!r} must be nonnegative")
        gamma[name.strip()] = v
    for p in a.parameters:
        if p not in gamma:
            raise ModelError(f"--gamma is missing parameter {p!r}")
    return gamma


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _write_out(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_validate(args) -> int:
    net = _load_network(args.file)
    _emit(
        {
            "ok": True,
            "automata": [
                {
                    "name": a.name,
                    "locations": len(a.locations),
                    "transitions": len(a.transitions),
                    "clocks": list(a.clocks),
                    "parameters": list(a.parameters),
                    "parametric_clocks": sorted(parametric_clocks(a)),
                }
                for a in net.automata
            ],
        }
    )
    return EXIT_ANSWERED


def _cmd_product(args) -> int:
    flat = _load_flat(args.file, args.accepting)
    net = Network(flat.clocks, flat.parameters, (), (flat,))
    _write_out(network_to_text(net), args.out)
    return EXIT_ANSWERED


def _cmd_check(args) -> int:
    a = _load_flat(args.file, args.accepting)
    gamma = _parse_gamma(args.gamma, a)
    outcome = check(a, gamma, args.backend)
    payload = {
        "empty": outcome.empty,
        "gamma": dict(sorted(gamma.items())),
        "backend": args.backend,
        "witness": None if outcome.witness is None else run_to_json(a, gamma, outcome.witness),
        "stats": {"states_explored": outcome.states_explored},
    }
    _emit(payload)
    return EXIT_ANSWERED


def _cmd_synth(args) -> int:
    a = _load_flat(args.file, args.accepting)
    result = solve(SynthesisQuery(a, args.mode, args.bound, args.backend))
    payload = {
        "verdict": result.verdict,
        "mode": result.mode,
        "bound": result.bound,
        "gamma": None if result.gamma is None else dict(sorted(result.gamma.items())),
        "witness": None
        if result.witness is None
        else run_to_json(a, result.gamma, result.witness),
        "stats": {
            "valuations_tested": result.stats.valuations_tested,
            "states_explored": result.stats.states_explored,
            "wall_time_ms": round(result.stats.wall_time_ms, 3),
        },
    }
    _emit(payload)
    return EXIT_ANSWERED if result.found else EXIT_NOT_FOUND


def _cmd_build01(args) -> int:
    a = _load_flat(args.file, args.accepting)
    frac = add_fractional_clock(normalize(a))
    zot = build_01(frac.automaton, frac.parametric_clock, frac.fractional_clock)
    dump = zot.to_json_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(dump, indent=2) + "\n")
    stats = {
        "locations": len(zot.locations),
        "zero_delays": len(zot.zero_delay),
        "unit_delays": len(zot.unit_delay),
        "actions": len(zot.actions),
        "bound": zot.bound,
        "clock": zot.clock,
        "out": args.out,
    }
    _emit(stats if args.out else {**stats, "automaton": dump})
    return EXIT_ANSWERED


def _cmd_encode_minsky(args) -> int:
    try:
        text = Path(args.file).read_text()
    except OSError as e:
        raise ModelError(f"cannot read {args.file}: {e.strerror}") from None
    machine = parse_minsky(text)
    encoded = encode_reach(machine) if args.mode == "reach" else encode_safe(machine)
    _write_out(pta_to_text(encoded), args.out)
    return EXIT_ANSWERED


def _cmd_export_dot(args) -> int:
    a = _load_flat(args.file, args.accepting)
    if args.what == "region-graph":
        if not args.gamma:
            raise ModelError("--gamma is required for the region graph export")
        gamma = _parse_gamma(args.gamma, a)
        dot = export_region_graph_dot(a, gamma)
    else:
        frac = add_fractional_clock(normalize(a))
        zot = build_01(frac.automaton, frac.parametric_clock, frac.fractional_clock)
        dot = zot.to_dot()
    _write_out(dot, args.out)
    return EXIT_ANSWERED


def _build_argparser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ptacheck",
        description="Emptiness checking and bounded parameter synthesis "
        "for parametric timed automata.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def add_model_command(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("file", help="model file in the ptacheck format")
        p.add_argument(
            "--accepting",
            default="any",
            help="product accepting policy: 'any' or a component name",
        )
        p.set_defaults(fn=fn)
        return p

    add_model_command("validate", _cmd_validate, help="parse and report diagnostics")

    p = add_model_command("product", _cmd_product, help="print the flattened network")
    p.add_argument("--out", help="write the model here instead of stdout")

    p = add_model_command("check", _cmd_check, help="emptiness for one valuation")
    p.add_argument("--gamma", required=True, help="comma list of name=value")
    p.add_argument("--backend", default="concrete", choices=["concrete", "zerone", "both"])

    p = add_model_command("synth", _cmd_synth, help="bounded parameter synthesis")
    p.add_argument("--mode", required=True, choices=["reach", "safe"])
    p.add_argument("--bound", required=True, type=int, help="max parameter sum")
    p.add_argument("--backend", default="concrete", choices=["concrete", "zerone", "both"])

    p = add_model_command("build01", _cmd_build01, help="corner-point 0/1-automaton")
    p.add_argument("--out", help="write the JSON dump here")

    p = sub.add_parser("encode-minsky", help="encode a Minsky machine as a PTA")
    p.add_argument("file", help="Minsky source file")
    p.add_argument("--mode", required=True, choices=["reach", "safe"])
    p.add_argument("--out", help="write the model here instead of stdout")
    p.set_defaults(fn=_cmd_encode_minsky)

    p = add_model_command("export-dot", _cmd_export_dot, help="DOT exports")
    p.add_argument("--what", required=True, choices=["region-graph", "zerone"])
    p.add_argument("--gamma", help="comma list of name=value (region graph only)")
    p.add_argument("--out", help="write the DOT here instead of stdout")

    return top


def run(argv=None) -> int:
    """Parse arguments, dispatch, map errors to exit codes."""
    parser = _build_argparser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT_ERROR if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ModelError, StepError, BackendDisagreement) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def entry() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entry()

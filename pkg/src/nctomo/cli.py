"""Command line: ``nctomo {simulate,topo,locate,bench,gen-net}``.

Exit codes: 0 success, 1 usage, 2 model violation, 3 scale cap.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import channel, harness
from .errors import NCTomoError, UsageError
from .netgraph import ConnectivityProfile, random_network

TOPO_ALGS = ("find-topo", "find-topo-rs", "adv-rlnc")
LOCATE_ALGS = ("adversary-rlnc", "random-rlnc", "adversary-rs", "random-rs", "erasure", "delay")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value experiment config")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--out", type=Path, help="output file or directory")
    p.add_argument("--format", choices=("text", "json-lines"), default="text")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nctomo", description="Passive tomography over linear network codes.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="simulate generations and dump the scenario")
    _common(p)
    p.add_argument("--no-truth", action="store_true", help="omit the ground-truth section")

    p = sub.add_parser("topo", help="estimate topology from traces")
    _common(p)
    p.add_argument("--alg", choices=TOPO_ALGS, required=True)
    p.add_argument("--in", dest="src", type=Path, help="scenario directory written by simulate")

    p = sub.add_parser("locate", help="locate faulty edges in one generation")
    _common(p)
    p.add_argument("--alg", choices=LOCATE_ALGS, required=True)
    p.add_argument("--in", dest="src", type=Path, help="scenario directory written by simulate")
    p.add_argument("--generation", type=int, default=0)

    p = sub.add_parser("bench", help="run a named acceptance suite")
    _common(p)
    p.add_argument("--suite", choices=sorted(harness.SUITES))
    p.add_argument("--trials", type=int)
    p.add_argument("--jobs", type=int)

    p = sub.add_parser("gen-net", help="write a random network fixture")
    _common(p)
    p.add_argument("--nodes", type=int, default=8)
    p.add_argument("--capacity", type=int, default=2)
    p.add_argument("--profile", choices=("weak", "strong", "locate-adv"), default="weak")
    p.add_argument("--z", type=int, default=1)
    return parser


def _config(args, **extra) -> harness.ExperimentConfig:
    text = args.config.read_text() if args.config else ""
    sets = []
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        sets.append(item)
    text = text + "\n" + "\n".join(sets)
    return harness.parse_config(text, seed=args.seed, **extra)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def _report(rep, args) -> None:
    body = rep.to_json() + "\n" if args.format == "json-lines" else rep.to_text()
    _emit(body, args.out)


def _scenario(args) -> harness.Scenario:
    if args.src is not None:
        return harness.read_scenario(args.src)
    return harness.simulate(_config(args))


def cmd_simulate(args) -> int:
    sc = harness.simulate(_config(args))
    truth = not args.no_truth
    if args.out is None:
        if args.format == "json-lines":
            sys.stdout.write("".join(channel.trace_to_json(t, truth) + "\n" for t in sc.traces))
        else:
            sys.stdout.write("".join(channel.trace_to_text(t, truth) for t in sc.traces))
    else:
        harness.write_scenario(sc, args.out, args.format, truth)
    return 0


def cmd_topo(args) -> int:
    _report(harness.run_topology(_scenario(args), args.alg), args)
    return 0


def cmd_locate(args) -> int:
    _report(harness.run_locate(_scenario(args), args.alg, args.generation), args)
    return 0


def cmd_bench(args) -> int:
    cfg = _config(args, suite=args.suite, trials=args.trials, jobs=args.jobs)
    records, summary = harness.run_experiment(cfg)
    if args.format == "json-lines":
        lines = [r.to_json(cfg.record_timings) for r in records]
        lines.append(json.dumps({"summary": summary}, sort_keys=True))
        body = "\n".join(lines) + "\n"
    else:
        rows = [f"trial {r.trial} {'ok' if r.ok else 'FAIL'}" + (f" {r.error}" if r.error else "") for r in records]
        rows.append("summary " + " ".join(f"{k}={v}" for k, v in summary.items()))
        body = "\n".join(rows) + "\n"
    _emit(body, args.out)
    if args.out is not None:
        sys.stdout.write("summary " + " ".join(f"{k}={v}" for k, v in summary.items()) + "\n")
    return 0


def cmd_gen_net(args) -> int:
    seed = 0 if args.seed is None else args.seed
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    net = random_network(args.nodes, args.capacity, ConnectivityProfile.from_name(args.profile, args.z), rng)
    _emit(net.to_text(), args.out)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "topo": cmd_topo,
    "locate": cmd_locate,
    "bench": cmd_bench,
    "gen-net": cmd_gen_net,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except NCTomoError as exc:
        sys.stderr.write(f"nctomo: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"nctomo: {exc}\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

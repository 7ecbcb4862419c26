"""Command-line front end.

Subcommands: simulate (sample + evolve + snapshot), scan (density CSV over a
(p, q) grid), shell (explore + verify a shell), stego (build a planted
blocking set), verify (re-check a stego dump + snapshot).

Exit codes: 0 ok, 1 I/O error, 2 configuration error, 3 verification failure.
Identical configuration and seed give byte-identical outputs regardless of
thread count.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import compare, experiments, sampler, shell as shell_mod, stego as stego_mod
from .dynamics import (CLOSED, EMPTY, OCCUPIED, Rule, SiteState, evolve,
                       read_snapshot, write_snapshot)
from .lattice import BoxUnion

_EXTERIORS = {"empty": EMPTY, "occupied": OCCUPIED, "closed": CLOSED}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pollbp",
        description="Polluted bootstrap percolation laboratory")
    parser.add_argument("--config", help="JSON or key=value defaults file")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="sample one configuration and evolve it")
    sim.add_argument("--rule", choices=("standard", "modified"), default="modified")
    sim.add_argument("--r", type=int, default=3, choices=(1, 2, 3))
    sim.add_argument("--p", type=float, default=0.0)
    sim.add_argument("--q", type=float, default=0.0)
    sim.add_argument("--side", type=int, default=21)
    sim.add_argument("--exterior", choices=sorted(_EXTERIORS), default="empty")
    sim.add_argument("--mode", choices=("iid", "two-stage", "big-obstacles"),
                     default="iid")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", help="write the final snapshot here")

    scan = sub.add_parser("scan", help="density estimates over a (p, q) grid")
    scan.add_argument("--rule", choices=("standard", "modified"), default="modified")
    scan.add_argument("--r", type=int, default=3, choices=(1, 2, 3))
    scan.add_argument("--p-grid", default="0.1", help="comma-separated p values")
    scan.add_argument("--q-grid", default="0.0", help="comma-separated q values")
    scan.add_argument("--side", type=int, default=21)
    scan.add_argument("--exterior", choices=sorted(_EXTERIORS) + ["both"],
                      default="both")
    scan.add_argument("--trials", type=int, default=20)
    scan.add_argument("--seed", type=int, default=0)
    scan.add_argument("--threads", type=int, default=1)
    scan.add_argument("--mode", choices=("iid", "two-stage", "big-obstacles"),
                      default="iid")
    scan.add_argument("--format", choices=("csv", "json"), default="csv")
    scan.add_argument("--out", help="output path (default stdout)")

    sh = sub.add_parser("shell", help="explore and verify a shell")
    sh.add_argument("--n", type=int, required=True)
    sh.add_argument("--coloring", choices=("all-black", "random"), default="all-black")
    sh.add_argument("--b", type=float, default=0.99, help="black density (random)")
    sh.add_argument("--seed", type=int, default=0)
    sh.add_argument("--cap", type=int)
    sh.add_argument("--out", help="write the shell dump here")

    st = sub.add_parser("stego", help="build a planted blocking set")
    st.add_argument("--fixture", choices=("full",), default="full")
    st.add_argument("--n", type=int, required=True)
    st.add_argument("--L", type=int, required=True, help="cell half-width")
    st.add_argument("--m", type=int, required=True, help="clearance radius")
    st.add_argument("--model", choices=("modified", "standard-pairs"),
                    default="modified")
    st.add_argument("--out", help="write the stego dump here")
    st.add_argument("--snapshot", help="write the planted snapshot here")

    ver = sub.add_parser("verify", help="re-verify a stego dump against a snapshot")
    ver.add_argument("--stego", required=True)
    ver.add_argument("--snapshot", required=True)
    ver.add_argument("--m", type=int, help="clearance override")
    ver.add_argument("--out", help="write the JSON report here")
    return parser


def _load_config(path: str) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        out = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
        return out


def _parse_grid(text: str) -> tuple:
    values = tuple(float(x) for x in text.split(",") if x.strip() != "")
    return values


def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"command", "config", "out", "snapshot"}
    echo = {k: v for k, v in sorted(vars(args).items())
            if k not in skip and v is not None}
    echo["version"] = __version__
    return echo


def _open_out(path: str | None):
    if path is None:
        return sys.stdout, False
    return open(path, "w"), True


def cmd_simulate(args) -> int:
    params = sampler.SampleParams(args.p, args.q, args.mode.replace("-", "_"),
                                  args.seed)
    box = experiments.centered_box(args.side)
    config = sampler.RandomField(params).sample(box, _EXTERIORS[args.exterior])
    result = evolve(config, Rule(args.rule, args.r))
    origin_state = result.final.state((0, 0, 0))
    print(f"occupied={len(result.final.occupied)} volume={box.volume} "
          f"origin={origin_state.value} rounds={result.rounds}")
    if args.out:
        with open(args.out, "w") as f:
            write_snapshot(result.final, f, meta=_config_echo(args))
    return 0


def cmd_scan(args) -> int:
    p_grid = _parse_grid(args.p_grid)
    q_grid = _parse_grid(args.q_grid)
    exteriors = [_EXTERIORS[args.exterior]] if args.exterior != "both" \
        else [EMPTY, OCCUPIED]
    rule = Rule(args.rule, args.r)
    rows = []
    spec = None
    for ext in exteriors:
        spec = experiments.ScanSpec(p_grid, q_grid, rule, args.side, ext,
                                    args.trials, args.seed,
                                    args.mode.replace("-", "_"))
        rows.extend(experiments.estimate_final_density(spec, threads=args.threads))
    f, close = _open_out(args.out)
    try:
        if args.format == "csv":
            experiments.write_scan_csv(f, spec, rows, meta=_config_echo(args))
        else:
            payload = {"config": _config_echo(args),
                       "rows": [{"p": e.p, "q": e.q, "exterior": e.exterior.value,
                                 "trials": e.trials, "estimate": e.estimate,
                                 "ci95": e.ci95} for e in rows]}
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")
    finally:
        if close:
            f.close()
    return 0


def cmd_shell(args) -> int:
    if args.coloring == "all-black":
        coloring = shell_mod.all_black()
    else:
        coloring = shell_mod.random_coloring(args.b, args.seed)
    cand = shell_mod.explore_shell(args.n, coloring, cap=args.cap)
    line = f"shell n={cand.radius} status={cand.status} sites={len(cand.sites)}"
    if cand.status == shell_mod.COMPLETE:
        report = shell_mod.verify_shell(cand)
        line += (f" S1={report.s1} S2={report.s2} S3={report.s3} S4={report.s4}")
    print(line)
    if args.out:
        with open(args.out, "w") as f:
            shell_mod.write_shell(cand, f, meta=_config_echo(args))
    return 0


def cmd_stego(args) -> int:
    params = stego_mod.ScaleParams(args.L, args.m,
                                   args.model.replace("-", "_"))
    fixture = sampler.full_stego_fixture(args.n, params)
    structure = stego_mod.build_structure(fixture.shell.sites, fixture.field,
                                          params, args.n)
    report = stego_mod.verify_structure(structure, fixture.field)
    print(f"stego n={args.n} boxes={len(structure.generators)} "
          f"vertices={structure.box_union().size()} report_ok={report.ok}")
    if args.out:
        with open(args.out, "w") as f:
            stego_mod.write_stego(structure, f, report, meta=_config_echo(args))
    if args.snapshot:
        region = structure.box_union().bounding
        config = fixture.field.sample(region, EMPTY)
        with open(args.snapshot, "w") as f:
            write_snapshot(config, f, meta=_config_echo(args))
    return 0


def cmd_verify(args) -> int:
    try:
        with open(args.stego) as f:
            structure = stego_mod.read_stego(f)
        with open(args.snapshot) as f:
            snap = read_snapshot(f)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: corrupt input: {exc}", file=sys.stderr)
        return 2

    m = args.m if args.m is not None else structure.params.clearance
    variant = "standard" if structure.params.model == "standard_pairs" \
        else "modified"
    field_ = sampler.PlantedField(closed=snap.closed, occupied=snap.occupied)
    struct_report = stego_mod.verify_structure(structure, field_)

    union = structure.box_union()
    occupied = frozenset(v for v in snap.occupied if union.contains(v))
    closed = frozenset(v for v in snap.closed if union.contains(v))
    dom = compare.check_domination(union, occupied, closed,
                                   variant=variant, m=m)

    ok = struct_report.ok and dom.holds and dom.hypothesis_report.ok
    payload = {
        "config": _config_echo(args),
        "structure_ok": struct_report.ok,
        "structure": struct_report.summary(),
        "domination_holds": dom.holds,
        "first_violation": list(dom.first_violation) if dom.first_violation else None,
        "hypotheses_ok": dom.hypothesis_report.ok,
        "cluster_diameter_max": dom.cluster_diameter_max,
        "ok": ok,
    }
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    print(f"verify ok={ok} structure={struct_report.ok} "
          f"domination={dom.holds} hypotheses={dom.hypothesis_report.ok}")
    return 0 if ok else 3


_COMMANDS = {
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "shell": cmd_shell,
    "stego": cmd_stego,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        if argv is None:
            argv = sys.argv[1:]
        # two-phase parse so --config supplies defaults that flags override
        probe, _ = parser.parse_known_args(argv)
        if getattr(probe, "config", None):
            defaults = _load_config(probe.config)
            known = {a.dest for a in parser._actions}
            for subparsers in (a for a in parser._actions
                               if isinstance(a, argparse._SubParsersAction)):
                for sp in subparsers.choices.values():
                    known |= {a.dest for a in sp._actions}
                    sp.set_defaults(**{k: v for k, v in defaults.items()
                                       if {a.dest for a in sp._actions} >= {k}})
            unknown = set(defaults) - known
            if unknown:
                print(f"error: unknown config keys {sorted(unknown)}",
                      file=sys.stderr)
                return 2
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, stego_mod.StructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 all verdicts passed, 1 a verdict or fixture check failed,
2 bad configuration. Output goes to ``--out DIR``, or to ``$QMPC_OUT_DIR``
when the flag is absent; with neither, only the summary is printed.
"""

import argparse
import json
import os
import sys

from . import harness
from .channel import AdversaryModel
from .errors import ConfigurationError

OUT_ENV = "QMPC_OUT_DIR"


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _adversary(text: str) -> tuple[str, str]:
    edge, _, model = text.partition("=")
    if not model:
        raise argparse.ArgumentTypeError("use EDGE=MODEL, e.g. TP->Bob=intercept_resend")
    return edge, model


def _common(p, trials=True):
    p.add_argument("--seed", type=int, help="64-bit seed (default: scenario seed or built-in)")
    if trials:
        p.add_argument("--trials", type=int)
    p.add_argument("--out", help=f"output directory (default: ${OUT_ENV})")


def _protocol_flags(p):
    p.add_argument("--scenario", help="scenario JSON file; other flags override its fields")
    p.add_argument("--modulus", type=int)
    p.add_argument("--delta", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--adversary", type=_adversary, action="append", default=[],
                   metavar="EDGE=MODEL", help="e.g. TP->Bob=intercept_resend (repeatable)")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmpc", description="Quantum OLE / MPSI simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay-toy", help="replay the worked Z_8 example against its test vector")
    p.add_argument("--flip-key-bit", metavar="KEY:INDEX",
                   help="negative control, e.g. k_b:1 flips the X bit of the first qubit under K_B")
    p.add_argument("--out")

    p = sub.add_parser("ole-run", help="run oblivious linear evaluation sessions")
    _protocol_flags(p)
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--alpha", type=int)
    _common(p)

    p = sub.add_parser("mpsi-run", help="run multiparty set intersection")
    _protocol_flags(p)
    p.add_argument("--set", type=_ints, action="append", dest="sets", metavar="1,2,3",
                   help="one party's set (repeat per party, in party order)")
    p.add_argument("--u-degree", choices=("paper", "secure"))
    _common(p)

    p = sub.add_parser("attack-curve", help="decoy detection rate vs 1-(3/4)^delta")
    p.add_argument("--deltas", type=_ints, default=[1, 2, 4, 8, 16])
    p.add_argument("--model", choices=[m.value for m in AdversaryModel if m is not AdversaryModel.NONE],
                   action="append")
    p.add_argument("--edge", default="TP->Bob")
    p.add_argument("--modulus", type=int, default=8)
    _common(p)

    p = sub.add_parser("comm-audit", help="qubit and session counts vs log p and (m-1)(3n+1)")
    p.add_argument("--moduli", type=_ints, default=[257, 65537])
    p.add_argument("--parties", type=int, default=4)
    p.add_argument("--set-size", type=int, default=3)
    p.add_argument("--delta", type=int, default=16)
    _common(p, trials=False)
    return ap


def _scenario_from_args(args, protocol: str) -> dict:
    scn = harness.load_scenario(args.scenario) if args.scenario else {"protocol": protocol}
    if scn.get("protocol", protocol) != protocol:
        raise ConfigurationError(f"scenario is for '{scn.get('protocol')}', not '{protocol}'")
    scn["protocol"] = protocol
    for key in ("modulus", "delta", "threshold", "seed", "trials"):
        val = getattr(args, key, None)
        if val is not None:
            scn[key] = val
    if args.adversary:
        scn.setdefault("adversaries", {}).update(dict(args.adversary))
    if protocol == "ole":
        if args.a is not None or args.b is not None:
            if args.a is None or args.b is None:
                raise ConfigurationError("give both --a and --b")
            scn["function"] = {"a": args.a, "b": args.b}
        if args.alpha is not None:
            scn["alpha"] = args.alpha
    else:
        if args.sets:
            scn["sets"] = args.sets
        if args.u_degree:
            scn["u_degree"] = args.u_degree
    if "modulus" not in scn:
        raise ConfigurationError("no modulus: pass --modulus or --scenario")
    return scn


def _print_summary(report, stream=None):
    stream = stream or sys.stdout
    agg = {k: v for k, v in report.aggregate.items() if not isinstance(v, (list, dict))}
    print(f"{report.kind}  seed={report.seed}  scenario={harness.scenario_hash(report.scenario)[:16]}",
          file=stream)
    if agg:
        print("  " + "  ".join(f"{k}={v}" for k, v in sorted(agg.items())), file=stream)
    for v in report.verdicts:
        detail = {k: x for k, x in v.items() if k not in ("name", "passed")}
        print(f"  {'PASS' if v['passed'] else 'FAIL'}  {v['name']}  {json.dumps(detail, sort_keys=True)}",
              file=stream)


def run(args) -> "harness.Report":
    cmd = args.command
    if cmd == "replay-toy":
        flip = None
        if args.flip_key_bit:
            key, _, idx = args.flip_key_bit.partition(":")
            if key not in ("k_a", "k_b", "k_ab") or not idx.isdigit():
                raise ConfigurationError("--flip-key-bit takes k_a|k_b|k_ab:INDEX")
            flip = (key, int(idx))
        return harness.replay_toy(flip_key=flip)
    if cmd == "ole-run":
        return harness.run_scenario(_scenario_from_args(args, "ole"), workers=args.workers)
    if cmd == "mpsi-run":
        return harness.run_scenario(_scenario_from_args(args, "mpsi"), workers=args.workers)
    seed = args.seed if args.seed is not None else harness.DEFAULT_SEED
    if cmd == "attack-curve":
        models = args.model or ["intercept_resend", "entangle_measure"]
        return harness.attack_curve(args.deltas, args.trials or 10_000, seed, models, args.edge, args.modulus)
    if cmd == "comm-audit":
        return harness.comm_audit(args.moduli, args.parties, args.set_size, seed, args.delta)
    raise ConfigurationError(f"unknown command {cmd}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = run(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    _print_summary(report)
    out = args.out or os.environ.get(OUT_ENV)
    if out:
        for path in report.write(out, args.command):
            print(f"  wrote {path}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())

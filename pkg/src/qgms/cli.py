"""Command-line front end: synthesis, self-checks, and search reports.

Three subcommands:

- ``qgms synth {qge, qgje} --n N``: write a solver circuit as text plus
  a resource JSON comparing constructed counts, closed forms, and stage
  sums.
- ``qgms verify {gf2, circuits, counting, deferred, gms}``: run one
  self-check suite and print its machine-readable result.
- ``qgms gms --m M --n N --l L``: run the whitening-key search analysis
  and write the report JSON plus the iteration curve CSV.

Every output embeds a run manifest (subcommand, config, seeds, tool
version, timestamp). The timestamp honours SOURCE_DATE_EPOCH so that
runs with a fixed seed and a fixed epoch are byte-identical.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 qubit cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, sim, synth, verify
from .analysis import GmsConfig, analysis_report
from .circuit import resource_profile
from .oracles import ZeroWhiteningKey, build_fx_oracle


def run_manifest(subcommand: str, config: dict, seeds: dict) -> dict:
    """Provenance block embedded in every report."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    stamp = int(epoch) if epoch is not None else int(time.time())
    return {
        "subcommand": subcommand,
        "config": config,
        "seeds": seeds,
        "tool_version": __version__,
        "timestamp": datetime.fromtimestamp(stamp, timezone.utc).isoformat(),
    }


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def cmd_synth(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.n < 2:
        parser.error("--n must be at least 2 (a 1x1 system needs no circuit)")
    if args.kind == "qge":
        syn = synth.gauss_solve_circuit(args.n)
        closed = synth.gauss_closed_form(args.n)
    else:
        syn = synth.jordan_solve_circuit(args.n)
        closed = synth.jordan_closed_form(args.n)
    stage_sum = synth.stage_totals(syn.stages)
    stage_sum["cnot_after_toffoli_expansion"] = synth.expanded_cnot(syn.stages)
    out = Path(args.out)
    stem = f"{args.kind}_n{args.n}"
    payload = {
        "schema": 1,
        "manifest": run_manifest(
            "synth", {"kind": args.kind, "n": args.n}, {}
        ),
        "constructed": resource_profile(syn.circuit).as_dict(),
        "closed_form": closed,
        "stage_sum": stage_sum,
    }
    _write(out / f"{stem}_circuit.txt", syn.circuit.to_text())
    _write(out / f"{stem}_resources.json", _dump_json(payload))
    print(f"wrote {out / (stem + '_circuit.txt')} and {out / (stem + '_resources.json')}")
    return 0


def cmd_verify(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    kwargs = {}
    if args.suite == "deferred":
        if (args.n is None) != (args.l is None):
            parser.error("the deferred suite takes --n and --l together")
        if args.n is not None:
            kwargs = {"n": args.n, "l": args.l}
    elif args.n is not None or args.l is not None:
        parser.error("--n/--l only apply to the deferred suite")
    result = verify.run_suite(args.suite, **kwargs)
    payload = result.as_dict()
    payload["manifest"] = run_manifest("verify", {"suite": args.suite, **kwargs}, {})
    sys.stdout.write(_dump_json(payload))
    return 0 if result.passed else 1


def cmd_gms(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.m < 1 or args.n < 1 or args.l < 1:
        parser.error("--m, --n and --l must be positive")
    need = args.m + 2 * args.n * args.l + args.n + 1
    cap = sim.qubit_cap()
    if need > cap:
        print(
            f"configuration needs {need} qubits (m + 2nl + n + 1); cap is {cap}",
            file=sys.stderr,
        )
        return 3
    key = args.key if args.key is not None else 2 % (1 << args.m)
    k1 = args.k1 if args.k1 is not None else max(3 % (1 << args.n), 1)
    k2 = args.k2 if args.k2 is not None else 1 % (1 << args.n)
    try:
        fx = build_fx_oracle(args.m, args.n, key, k1, k2, cipher_seed=args.seed)
        cfg = GmsConfig(args.m, args.n, args.l, fx, t=args.t_max)
        report = analysis_report(cfg, t_max=args.t_max)
    except (ValueError, ZeroWhiteningKey) as exc:
        parser.error(str(exc))
    except sim.QubitCapExceeded as exc:
        print(str(exc), file=sys.stderr)
        return 3
    report["manifest"] = run_manifest(
        "gms",
        {
            "m": args.m,
            "n": args.n,
            "l": args.l,
            "t_max": args.t_max,
            "key": key,
            "k1": k1,
            "k2": k2,
        },
        {"cipher_seed": args.seed},
    )
    out = Path(args.out)
    _write(out / "gms_report.json", _dump_json(report))
    curve_lines = ["t,probability"]
    curve_lines += [f"{t},{p!r}" for t, p in report["t_curve"]]
    _write(out / "gms_curve.csv", "\n".join(curve_lines) + "\n")
    print(f"wrote {out / 'gms_report.json'} and {out / 'gms_curve.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgms",
        description="Reversible GF(2) solver circuits and exact search analysis.",
    )
    parser.add_argument("--version", action="version", version=f"qgms {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="write a solver circuit and its resource report")
    p_synth.add_argument("kind", choices=["qge", "qgje"])
    p_synth.add_argument("--n", type=int, required=True, help="system size (n >= 2)")
    p_synth.add_argument("--out", default=".", help="output directory")

    p_verify = sub.add_parser("verify", help="run a self-check suite")
    p_verify.add_argument(
        "suite", choices=["gf2", "circuits", "counting", "deferred", "gms"]
    )
    p_verify.add_argument("--n", type=int, default=None, help="deferred suite: register width")
    p_verify.add_argument("--l", type=int, default=None, help="deferred suite: copies")

    p_gms = sub.add_parser("gms", help="run the whitening-key search analysis")
    p_gms.add_argument("--m", type=int, required=True, help="key register width")
    p_gms.add_argument("--n", type=int, required=True, help="block width")
    p_gms.add_argument("--l", type=int, required=True, help="parallel register copies")
    p_gms.add_argument("--t-max", type=int, default=20, dest="t_max")
    p_gms.add_argument("--seed", type=int, default=72, help="cipher construction seed")
    p_gms.add_argument("--key", type=int, default=None, help="hidden cipher key (default 2 mod 2^m)")
    p_gms.add_argument("--k1", type=int, default=None, help="input whitening key (default 3 mod 2^n)")
    p_gms.add_argument("--k2", type=int, default=None, help="output whitening key (default 1)")
    p_gms.add_argument("--out", default=".", help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "synth":
        return cmd_synth(args, parser)
    if args.command == "verify":
        return cmd_verify(args, parser)
    return cmd_gms(args, parser)

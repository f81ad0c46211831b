"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import nullcontext
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import adder_tree, array, golden, harness, numeric, perf
from .errors import (
    CapacityExceeded,
    OutOfRange,
    ParseError,
    SimulatorError,
    UnsupportedPrecision,
    ValidationError,
    VerificationFailed,
)

USAGE_ERRORS = (
    OutOfRange,
    UnsupportedPrecision,
    CapacityExceeded,
    ParseError,
    ValidationError,
)


def _bool_flag(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _paths_flag(text: str) -> bool:
    if text == "on":
        return True
    if text == "off":
        return False
    raise argparse.ArgumentTypeError(f"expected on or off, got {text!r}")


def _add_sign_group(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--signed", dest="signed", action="store_true")
    group.add_argument("--unsigned", dest="signed", action="store_false")


def cmd_decompose(args) -> int:
    cv = numeric.decompose_weight(args.value, args.prec, args.signed)
    print(f"value {args.value} ({args.prec}-bit {'signed' if args.signed else 'unsigned'})")
    for chunk in cv.chunks:
        s_note = f" S={int(chunk.s_flag)}" if chunk.mode is numeric.Mode.TWO_BIT else ""
        print(
            f"  shift {chunk.significance}: {chunk.bits:0{chunk.width}b} "
            f"({chunk.mode.value}{s_note}) = {chunk.value}"
        )
    print(f"reconstructed {numeric.reconstruct_weight(cv)}")
    return 0


def cmd_simulate(args) -> int:
    if args.rows != array.ROWS:
        raise ValidationError(f"this array model is fixed at {array.ROWS} rows")
    rng = np.random.default_rng(args.seed)
    n_weights = array.capacity(args.wprec, args.wsigned, args.independent_paths)
    state = array.map_weights(
        range(n_weights), args.wprec, args.wsigned, args.independent_paths
    )
    rows = harness.random_matrix(
        rng, (array.ROWS, n_weights), args.wprec, args.wsigned
    )
    array.preload(state, rows)
    act_values = harness.random_matrix(
        rng, (array.ROWS, args.samples), args.aprec, args.asigned
    )
    acts = [
        numeric.activation_bitplanes(act_values[:, k], args.aprec, args.asigned)
        for k in range(args.samples)
    ]
    trace_cm = open(args.trace, "w", encoding="utf-8") if args.trace else nullcontext()
    with trace_cm as trace:
        tile = array.run_tile(state, acts, collect_toggles=True, trace=trace)
    print(f"weights {n_weights} x samples {args.samples} "
          f"(W{args.wprec}/A{args.aprec}, paths {'on' if args.independent_paths else 'off'})")
    for j in range(n_weights):
        values = " ".join(str(int(v)) for v in tile.outputs[j])
        print(f"  w{j:02d}: {values}")
    stats = tile.stats
    print(f"clk_cycles {stats.clk_cycles} (preload {stats.preload_cycles}, "
          f"skew {stats.skew_cycles}) clk_sa_ops {stats.clk_sa_ops} "
          f"active_columns {stats.active_columns}")
    print(f"energy_proxy {perf.energy_proxy(stats.clk_sa_ops, tile.tree_toggles, tile.acc_bit_toggles):.1f} (unitless)")
    if args.verify:
        reference = rows.T @ act_values
        if not np.array_equal(tile.outputs, reference):
            j, k = map(int, np.argwhere(tile.outputs != reference)[0])
            print(
                f"VERIFY FAIL at weight {j}, sample {k}: "
                f"{int(tile.outputs[j, k])} != {int(reference[j, k])}",
                file=sys.stderr,
            )
            return 1
        print("verify: all outputs match the reference dot products")
    return 0


def cmd_tree_compare(args) -> int:
    report = adder_tree.compare_trees(args.trials, args.signed, args.seed)
    print(json.dumps({
        "trials": report.trials,
        "signed": report.signed,
        "seed": report.seed,
        "csa_mean_toggles_per_cycle": report.csa_mean_toggles,
        "bat_mean_toggles_per_cycle": report.bat_mean_toggles,
        "toggle_ratio_csa_over_bat": report.toggle_ratio,
        "csa_full_adders": report.csa_full_adders,
        "bat_full_adders": report.bat_full_adders,
        "totals_match": report.totals_match,
        "note": "activity proxy, not silicon power",
    }, indent=2))
    return 0


def cmd_perf(args) -> int:
    cfg = perf.PerfConfig(
        clk_mhz=args.freq_mhz,
        w_precision=args.wprec,
        a_precision=args.aprec,
        independent_paths=args.independent_paths,
    )
    report = perf.throughput(cfg)
    print(json.dumps({
        "clk_mhz": args.freq_mhz,
        "w_precision": args.wprec,
        "a_precision": args.aprec,
        "independent_paths": args.independent_paths,
        "macs_per_cycle": float(report.macs_per_cycle),
        "tops": report.tops,
        "utilization": float(report.utilization),
        "clk_sa_ratio": str(report.clk_sa_ratio),
    }, indent=2))
    return 0


def cmd_workload_run(args) -> int:
    layers = harness.parse_workload(args.file)
    trace_cm = open(args.trace, "w", encoding="utf-8") if args.trace else nullcontext()
    with trace_cm as trace:
        report = harness.run_workload(
            layers,
            clk_mhz=args.freq_mhz,
            independent_paths=args.independent_paths,
            verify=args.verify,
            seed=args.seed,
            sparsity=args.sparsity,
            trace=trace,
        )
    text = harness.format_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bitflex",
        description="Bit-accurate model of a precision-scalable bit-serial MAC array",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="decompose a weight into column chunks")
    p.add_argument("--value", type=int, required=True)
    p.add_argument("--prec", type=int, required=True)
    _add_sign_group(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("simulate", help="run one random tile, optionally verified")
    p.add_argument("--wprec", type=int, required=True)
    p.add_argument("--aprec", type=int, required=True)
    p.add_argument("--wsigned", type=_bool_flag, required=True, metavar="B")
    p.add_argument("--asigned", type=_bool_flag, required=True, metavar="B")
    p.add_argument("--rows", type=int, default=array.ROWS)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--independent-paths", type=_paths_flag, default=True,
                   metavar="on|off")
    p.add_argument("--trace", metavar="FILE")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tree-compare", help="toggle-activity comparison of the adder trees")
    p.add_argument("--trials", type=int, required=True)
    _add_sign_group(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_tree_compare)

    p = sub.add_parser("perf", help="analytical throughput/utilization report")
    p.add_argument("--wprec", type=int, required=True)
    p.add_argument("--aprec", type=int, required=True)
    p.add_argument("--freq-mhz", type=float, default=1000.0)
    p.add_argument("--independent-paths", type=_paths_flag, default=True,
                   metavar="on|off")
    p.set_defaults(func=cmd_perf)

    p = sub.add_parser("workload", help="workload operations")
    wsub = p.add_subparsers(dest="workload_command", required=True)
    w = wsub.add_parser("run", help="run a workload file")
    w.add_argument("file", metavar="FILE")
    w.add_argument("--freq-mhz", type=float, default=1000.0)
    w.add_argument("--independent-paths", type=_paths_flag, default=True,
                   metavar="on|off")
    w.add_argument("--verify", action="store_true")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--out", metavar="FILE")
    w.add_argument("--sparsity", type=float, default=0.0)
    w.add_argument("--trace", metavar="FILE")
    w.set_defaults(func=cmd_workload_run)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulatorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()

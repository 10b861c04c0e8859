"""Command-line interface.

Exit codes: 0 success, 1 verification mismatch, 2 input error.  Every
computing subcommand prints the canonical value text and a deterministic
JSON record (inputs hash, seed, mode, graph counts, library version);
timings go to a separate human-readable line so identical inputs give
byte-identical records.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import __version__, presets
from .cache import ResultCache, cache_key
from .compare import ComparisonJob, run_compare
from .exact import ExactError
from .graphsum import GraphSumError, gw_invariant, nonequivariant_invariant
from .io import (
    SpecError,
    insertion_class,
    load_insertions,
    load_target,
    load_twist,
    parse_class_vector,
    save_target,
)
from .jfunction import compute_J_restriction, verify_recursion
from .oracles import lefschetz_line_check, psi_string_oracle, wdvv_p1p1, wdvv_p2
from .targets import CurveClass, TargetError, WeightContext


class InputError(Exception):
    pass


def _emit_record(record: dict, out: str | None):
    text = json.dumps(record, sort_keys=True, indent=1, default=str)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _marked_graph_count(target, beta, n) -> int:
    from .graphsum import enumerate_unmarked_trees

    total = 0
    for tree in enumerate_unmarked_trees(target, beta):
        auts = tree.automorphisms()
        if n == 0:
            total += 1
            continue
        # Burnside: one orbit per isomorphism class of marked graphs
        fixed = 0
        for a in auts:
            fixed += sum(1 for v, img in enumerate(a) if v == img) ** n
        total += fixed // len(auts)
    return total


# -- target ---------------------------------------------------------------


def cmd_target(args) -> int:
    if args.action == "preset":
        t = presets.preset(args.name)
        if args.out:
            save_target(t, args.out)
            print(f"wrote {args.out}")
        else:
            print(json.dumps(t.to_spec(), indent=1, sort_keys=True))
        return 0
    t = load_target(args.path)
    rep = t.validate()
    print(f"{t.name}: {len(t.points)} fixed points, {len(t.edges)} edges, dim {t.dimension}")
    if args.action == "show" or not rep.ok:
        for e in t.edges:
            print(
                f"  {t.points[e.p]} -- {t.points[e.q]}   character {e.char}   class {e.cclass}"
            )
    if rep.ok:
        print("validation: ok (chain-free GKM target)")
        return 0
    print("validation FAILED:")
    print(rep)
    return 1


# -- invariant ---------------------------------------------------------------


def cmd_invariant(args) -> int:
    target = load_target(args.target)
    rep = target.validate()
    if not rep.ok:
        raise InputError(f"target fails validation:\n{rep}")
    beta = parse_class_vector(args.cclass, target.lattice_rank)
    ins = load_insertions(target, args.insertions) if args.insertions else None
    if ins is None:
        from .graphsum import InsertionSpec

        ins = InsertionSpec((), ())
    twist = load_twist(target, args.twist) if args.twist else None
    payload = {
        "kind": "invariant",
        "target": target.canonical_json(),
        "beta": beta.coords,
        "insertions": args.insertions and open(args.insertions).read(),
        "twist": args.twist and open(args.twist).read(),
        "mode": args.mode,
        "seed": args.seed,
        "limit_x": args.limit_x,
        "version": __version__,
    }
    cache = None if args.no_cache else ResultCache(args.cache_dir)
    started = time.monotonic()
    cached = cache.get(payload) if cache else None
    if cached is not None:
        value_text = cached["value"]
        record = cached
        print(f"# cache hit ({time.monotonic() - started:.3f}s)")
    else:
        if args.mode == "symbolic":
            value = gw_invariant(
                target, beta, ins, twist, workers=args.workers, limit_x=args.limit_x
            )
            value_text = str(value)
        else:
            value = nonequivariant_invariant(
                target,
                beta,
                ins,
                twist,
                mode="evaluated",
                seed=args.seed,
                workers=args.workers,
                limit_x=args.limit_x,
            )
            value_text = str(value)
        record = {
            "schema": "gkmgw-invariant-v1",
            "version": __version__,
            "inputs_hash": cache_key(payload),
            "mode": args.mode,
            "seed": args.seed,
            "workers_independent": True,
            "beta": list(beta.coords),
            "graphs": _marked_graph_count(target, beta, ins.n),
            "value": value_text,
        }
        if cache:
            cache.put(payload, record)
        print(f"# computed in {time.monotonic() - started:.3f}s")
    print(value_text)
    _emit_record(record, args.out)
    return 0


# -- jfun ---------------------------------------------------------------


def cmd_jfun(args) -> int:
    target = load_target(args.target)
    rep = target.validate()
    if not rep.ok:
        raise InputError(f"target fails validation:\n{rep}")
    bound = parse_class_vector(args.degree, target.lattice_rank)
    twist = load_twist(target, args.twist) if args.twist else None
    started = time.monotonic()
    if args.action == "compute":
        point = args.point or target.points[0]
        j = compute_J_restriction(target, point, bound, twist)
        print(f"# computed in {time.monotonic() - started:.3f}s")
        print(f"one-point series restriction at {point}, truncated at {bound}:")
        rows = {"0": "1"}
        print(f"  Q^0: 1")
        for b in j.classes():
            print(f"  Q^{b}: {j.coefficient(b)}")
            rows[str(b)] = str(j.coefficient(b))
        record = {
            "schema": "gkmgw-jfun-v1",
            "version": __version__,
            "point": str(point),
            "bound": list(bound.coords),
            "coefficients": rows,
        }
        _emit_record(record, args.out)
        return 0
    report = verify_recursion(target, bound, twist, _fault=args.selftest_fault)
    print(f"# verified in {time.monotonic() - started:.3f}s")
    print(report.summary())
    record = {
        "schema": "gkmgw-jfun-verify-v1",
        "version": __version__,
        "bound": list(bound.coords),
        "rows": len(report.rows),
        "max_pole_order": report.max_pole_order,
        "ok": report.ok,
    }
    _emit_record(record, args.out)
    return 0 if report.ok else 1


# -- oracle ---------------------------------------------------------------


def cmd_oracle(args) -> int:
    if args.action == "wdvv-p2":
        table = wdvv_p2(args.dmax)
        for d in sorted(table.entries):
            print(f"N_{d} = {table[d]}")
        return 0
    if args.action == "wdvv-f0":
        a, b = (int(x) for x in args.bound.split(","))
        table = wdvv_p1p1((a, b))
        for key in sorted(table.entries):
            print(f"N_{key} = {table[key]}")
        return 0
    if args.action == "psi":
        import itertools

        n = args.n
        count = 0
        for n_here in range(3, n + 1):
            for exps in itertools.combinations_with_replacement(range(n_here - 2), n_here):
                if sum(exps) != n_here - 3:
                    continue
                print(f"<{' '.join('t' + str(a) for a in exps)}> = {psi_string_oracle(exps)}")
                count += 1
        print(f"# {count} correlators")
        return 0
    report = lefschetz_line_check()
    for line in report.lines():
        print(line)
    print("ok" if report.ok else "MISMATCH")
    return 0 if report.ok else 1


# -- compare ---------------------------------------------------------------


def cmd_compare(args) -> int:
    source = load_target(args.source)
    target = load_target(args.target)
    job = ComparisonJob(
        source=source,
        target=target,
        mode=args.mode,
        degree_bound=args.bound,
        value_mode=args.value_mode,
        seed=args.seed,
        workers=args.workers,
    )
    cache = None if args.no_cache else ResultCache(args.cache_dir)
    started = time.monotonic()
    report = run_compare(job, cache=cache)
    print(f"# compared in {time.monotonic() - started:.3f}s")
    print(report.summary())
    record = {
        "schema": "gkmgw-compare-v1",
        "version": __version__,
        "mode": args.mode,
        "bound": args.bound,
        "rows": len(report.rows),
        "skipped_wrong_dimension": report.skipped_wrong_dimension,
        "classes": [[list(a.coords), list(b.coords)] for a, b in report.classes],
        "ok": report.ok,
    }
    _emit_record(record, args.out)
    return 0 if report.ok else 1


# -- cache ---------------------------------------------------------------


def cmd_cache(args) -> int:
    cache = ResultCache(args.cache_dir)
    if args.action == "ls":
        for key in cache.entries():
            print(key)
        return 0
    n = cache.clear()
    print(f"removed {n} entries")
    return 0


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gkmgw",
        description="Exact equivariant Gromov-Witten invariants of GKM targets",
    )
    parser.add_argument("--version", action="version", version=f"gkmgw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("target", help="build, inspect, validate target specs")
    p.add_argument("action", choices=["validate", "show", "preset"])
    p.add_argument("path", nargs="?", help="target spec JSON (validate/show)")
    p.add_argument("--name", help="preset name", default="f0")
    p.add_argument("-o", "--out", help="output file for preset")
    p.set_defaults(func=cmd_target)

    p = sub.add_parser("invariant", help="compute one (twisted) invariant")
    p.add_argument("--target", required=True)
    p.add_argument("--class", dest="cclass", required=True, help='curve class, e.g. "2,1"')
    p.add_argument("--insertions", help="insertion spec JSON")
    p.add_argument("--twist", help="twist spec JSON")
    p.add_argument("--mode", choices=["symbolic", "evaluated"], default="symbolic")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--limit-x", action="store_true")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--cache-dir")
    p.add_argument("--out", help="write the JSON record here")
    p.set_defaults(func=cmd_invariant)

    p = sub.add_parser("jfun", help="one-point series and its pole recursion")
    p.add_argument("action", choices=["compute", "verify"])
    p.add_argument("--target", required=True)
    p.add_argument("--degree", required=True, help='Novikov bound, e.g. "2" or "1,1"')
    p.add_argument("--point", help="fixed point name (compute)")
    p.add_argument("--twist")
    p.add_argument("--selftest-fault", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_jfun)

    p = sub.add_parser("oracle", help="independent ground-truth tables")
    p.add_argument("action", choices=["wdvv-p2", "wdvv-f0", "psi", "lefschetz"])
    p.add_argument("--dmax", type=int, default=4)
    p.add_argument("--bound", default="2,2")
    p.add_argument("--n", type=int, default=8)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("compare", help="match invariants of two bundle targets")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--mode", choices=["equivariant", "nonequivariant"], default="nonequivariant")
    p.add_argument("--bound", type=int, default=9, help="anticanonical degree bound")
    p.add_argument("--value-mode", choices=["symbolic", "evaluated"], default="evaluated")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--cache-dir")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("cache", help="inspect or clear the result cache")
    p.add_argument("action", choices=["ls", "clear"])
    p.add_argument("--cache-dir")
    p.set_defaults(func=cmd_cache)
    return parser


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (SpecError, InputError, TargetError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (ExactError, GraphSumError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()

import argparse
import logging
import sys
from math import factorial
from typing import Callable, Dict, List, Optional

import orjson

from DiagCountSDK.DiagCountConfig import Config, load_config
from DiagCountSDK.DiagCountErrors import BudgetExceededError, DiagCountError
from DiagCountSDK.DiagCountGraph import (
    MAX_CLASS_VERTICES,
    aut_order,
    build_graph,
    count_classes,
    enumerate_graph_classes,
    permissible_tree,
    sigma,
    to_dot,
    tree_to_dot,
)
from DiagCountSDK.DiagCountGroups import centralizer_order, gl_order
from DiagCountSDK.DiagCountMatrix import all_diagonal_specs
from DiagCountSDK.DiagCountOracle import (
    centralizer_brute,
    collect_orbits,
    collision_scan,
    diag_count_brute,
    jordan_demo_checks,
    union_count,
    verify_unique_diagonalization,
    z6_counterexample_check,
)
from DiagCountSDK.DiagCountRing import Modulus
from DiagCountSDK.DiagCountTypes import (
    CLOSED_FORMS,
    classify_diagonal,
    diag_count_engine,
    diag_count_semidirect,
    enumerate_types,
    leading_coefficient,
    proportion,
    reports_to_csv,
    reports_to_json,
)

logger = logging.getLogger('DiagCountCLI')

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2


class UsageError(DiagCountError, ValueError):
    """Bad command-line input; maps to exit code 2."""


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated integers, got {text!r}")


def _emit(payload: Dict[str, object], args, text: Optional[str] = None) -> None:
    if args.format == "text" and text is not None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    sys.stdout.write(orjson.dumps(payload, option=JSON_OPTIONS).decode() + "\n")


def _prime_power(p: int, k: int) -> Modulus:
    return Modulus.prime_power(p, k)


# ----------------------- Commands -----------------------

def count_with(method: str, n: int, p: int, k: int, config: Config) -> int:
    if method == "engine":
        return diag_count_engine(n, p, k, config.oracle_check_types)
    if method == "closed":
        if n not in CLOSED_FORMS:
            raise UsageError(f"No closed form for n={n}; closed forms exist for n in {sorted(CLOSED_FORMS)}")
        return CLOSED_FORMS[n](p, k)
    if method == "semidirect":
        return diag_count_semidirect(n, p, k, config.enumeration_budget)
    if method == "brute":
        return diag_count_brute(n, _prime_power(p, k), config)
    raise UsageError(f"Unknown method {method}")


def cmd_count(args, config: Config) -> int:
    _prime_power(args.p, args.k)
    count = count_with(args.method, args.n, args.p, args.k, config)
    payload = {"n": args.n, "p": args.p, "k": args.k, "method": args.method, "count": str(count)}
    _emit(payload, args, str(count))
    return EXIT_OK


def cmd_types(args, config: Config) -> int:
    _prime_power(args.p, args.k)
    reports = enumerate_types(args.n, args.p, args.k, config.oracle_check_types)
    if args.out == "csv":
        sys.stdout.write(reports_to_csv(reports))
    else:
        sys.stdout.write(reports_to_json(reports).decode() + "\n")
    return EXIT_OK


def cmd_graph(args, config: Config) -> int:
    modulus = Modulus.parse(args.modulus)
    graph = build_graph(args.entries, modulus)
    tree = permissible_tree(graph)
    payload = {
        "modulus": modulus.m,
        "labels": list(graph.labels),
        "weights": [[w for w in row] for row in graph.weights],
        "distinct_weights": list(graph.distinct_weights),
        "tree": [list(edge) for edge in tree.edges],
        "cells": [{"weight": weight, "edges": [list(edge) for edge in members]} for weight, members in tree.cells],
        "aut": str(aut_order(graph)),
        "sigma": str(sigma(graph)),
        "classes": str(count_classes(graph, modulus.p, modulus.k)),
    }
    dot = None
    if args.dot:
        dot = to_dot(graph) + tree_to_dot(tree, graph.labels)
        payload["dot"] = dot
    _emit(payload, args, dot or f"aut={payload['aut']} classes={payload['classes']}")
    return EXIT_OK


def cmd_classes(args, config: Config) -> int:
    if args.g < 1 or args.g > MAX_CLASS_VERTICES:
        raise UsageError(f"g must be between 1 and {MAX_CLASS_VERTICES}, got {args.g}")
    classes = enumerate_graph_classes(args.g)
    encodings = [graph_class.encoding() for graph_class in classes]
    payload = {"g": args.g, "a_g": str(len(classes)), "classes": encodings}
    _emit(payload, args, "\n".join(encodings))
    return EXIT_OK


def _check(name: str, expected: int, actual: int) -> Dict[str, object]:
    return {"name": name, "expected": str(expected), "actual": str(actual), "passed": expected == actual}


def run_verification(n: int, p: int, k: int, config: Config) -> List[Dict[str, object]]:
    modulus = _prime_power(p, k)
    checks = []
    engine = diag_count_engine(n, p, k)
    checks.append(_check("semidirect", engine, diag_count_semidirect(n, p, k, config.enumeration_budget)))
    if n in CLOSED_FORMS:
        checks.append(_check("closed", engine, CLOSED_FORMS[n](p, k)))
    try:
        orbits = collect_orbits(list(all_diagonal_specs(n, modulus)), config)
        checks.append(_check("brute", engine, union_count(orbits, modulus)))
        uniqueness = verify_unique_diagonalization(n, modulus, config, orbits)
        checks.append({"name": "unique_diagonalization", "pairs_checked": uniqueness.pairs_checked,
                       "passed": uniqueness.passed})
        total = gl_order(n, p, k)
        for orbit in orbits:
            entries = list(orbit.representative.entries)
            centralizer = centralizer_order(classify_diagonal(orbit.representative), p, k)
            if orbit.strategy == "full":
                # the group is already materialised, so scan it too
                scanned = centralizer_brute(orbit.representative, config)
                checks.append(_check(f"centralizer{entries}", centralizer, scanned))
                centralizer = scanned
            checks.append(_check(f"orbit_stabilizer{entries}", total, orbit.orbit_size * centralizer))
    except BudgetExceededError as error:
        logger.warning(f"Skipping brute-force checks: {error}")
        checks.append({"name": "brute", "skipped": str(error), "passed": True})
    return checks


def cmd_verify(args, config: Config) -> int:
    checks = run_verification(args.n, args.p, args.k, config)
    failed = [check for check in checks if not check["passed"]]
    payload = {"n": args.n, "p": args.p, "k": args.k, "checks": checks, "passed": not failed}
    _emit(payload, args, "\n".join(f"{c['name']}: {'ok' if c['passed'] else 'FAILED'}" for c in checks))
    if failed:
        logger.error(f"Verification failed: {failed[0]}")
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_proportion(args, config: Config) -> int:
    rows = []
    for p in args.primes:
        _prime_power(p, args.k)
        ratio = proportion(args.n, p, args.k)
        rows.append({
            "p": p,
            "count": str(diag_count_engine(args.n, p, args.k)),
            "total": str(p ** (args.k * args.n * args.n)),
            "ratio": str(ratio),
            "decimal": f"{float(ratio):.6f}",
            "leading": str(leading_coefficient(args.n, p, args.k)),
        })
    payload = {"n": args.n, "k": args.k, "rows": rows, "target": f"1/{factorial(args.n)}" if args.n > 1 else "1"}
    _emit(payload, args, "\n".join(f"p={row['p']} ratio={row['ratio']} ~ {row['decimal']}" for row in rows))
    return EXIT_OK


def cmd_demo(args, config: Config) -> int:
    which = ["z6", "z4", "jordan"] if args.which == "all" else [args.which]
    results: Dict[str, object] = {}
    passed = True
    if "z6" in which:
        collisions = collision_scan(2, Modulus.general(6), config)
        ok = z6_counterexample_check()
        results["z6"] = {"check": ok, "collisions": len(collisions.collisions)}
        passed &= ok and bool(collisions.collisions)
    if "z4" in which:
        report = collision_scan(2, Modulus.prime_power(2, 2), config)
        results["z4"] = report.to_dict()
        passed &= report.passed
    if "jordan" in which:
        report = jordan_demo_checks()
        results["jordan"] = report.to_dict()
        passed &= report.passed
    payload = {"which": args.which, "results": results, "passed": passed}
    _emit(payload, args, f"passed={passed}")
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


COMMANDS: Dict[str, Callable] = {
    "count": cmd_count,
    "types": cmd_types,
    "graph": cmd_graph,
    "classes": cmd_classes,
    "verify": cmd_verify,
    "proportion": cmd_proportion,
    "demo": cmd_demo,
}


# ----------------------- Parser -----------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "text"], default="json", help="Output encoding")
    common.add_argument("--budget", type=int, help="Enumeration budget (candidate matrices or multisets)")
    common.add_argument("--config", type=str, help="YAML configuration file")
    common.add_argument("--log-level", type=str, help="Logging level for stderr")

    parser = argparse.ArgumentParser(
        description="DiagCount CLI - exact counts of diagonalizable matrices over Z_{p^k}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True, help="Available commands")

    # Command: diagcount-cli count
    count_parser = subparsers.add_parser("count", parents=[common], help="Count diagonalizable matrices")
    count_parser.add_argument("--n", type=int, required=True, help="Matrix dimension")
    count_parser.add_argument("--p", type=int, required=True, help="Prime")
    count_parser.add_argument("--k", type=int, required=True, help="Exponent")
    count_parser.add_argument("--method", choices=["engine", "closed", "semidirect", "brute"], default="engine")

    # Command: diagcount-cli types
    types_parser = subparsers.add_parser("types", parents=[common], help="Per-type table t, c, s, contribution")
    types_parser.add_argument("--n", type=int, required=True)
    types_parser.add_argument("--p", type=int, required=True)
    types_parser.add_argument("--k", type=int, required=True)
    types_parser.add_argument("--out", choices=["csv", "json"], default="json")

    # Command: diagcount-cli graph
    graph_parser = subparsers.add_parser("graph", parents=[common], help="Valuation graph of distinct entries")
    graph_parser.add_argument("--modulus", type=int, required=True)
    graph_parser.add_argument("--entries", type=_int_list, required=True, help="Comma-separated residues")
    graph_parser.add_argument("--dot", action="store_true", help="Include DOT text for the graph and tree")

    # Command: diagcount-cli classes
    classes_parser = subparsers.add_parser("classes", parents=[common], help="Enumerate valuation graph classes")
    classes_parser.add_argument("--g", type=int, required=True, help="Vertex count")

    # Command: diagcount-cli verify
    verify_parser = subparsers.add_parser("verify", parents=[common], help="Cross-check every counting method")
    verify_parser.add_argument("--n", type=int, required=True)
    verify_parser.add_argument("--p", type=int, required=True)
    verify_parser.add_argument("--k", type=int, required=True)

    # Command: diagcount-cli proportion
    proportion_parser = subparsers.add_parser("proportion", parents=[common], help="Share of diagonalizable matrices")
    proportion_parser.add_argument("--n", type=int, required=True)
    proportion_parser.add_argument("--k", type=int, required=True)
    proportion_parser.add_argument("--primes", type=_int_list, required=True, help="Comma-separated primes")

    # Command: diagcount-cli demo
    demo_parser = subparsers.add_parser("demo", parents=[common], help="Worked examples over Z_6 and Z_4")
    demo_parser.add_argument("--which", choices=["z6", "z4", "jordan", "all"], default="all")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, enumeration_budget=args.budget,
                             log_level=args.log_level.upper() if args.log_level else None)
    except (OSError, ValueError) as error:
        sys.stderr.write(f"error: {error}\n")
        return EXIT_USAGE
    logging.basicConfig(level=config.log_level, stream=sys.stderr)

    try:
        return COMMANDS[args.command](args, config)
    except DiagCountError as error:
        if isinstance(error, (AssertionError, ArithmeticError)):
            logger.error(f"{args.command} failed: {error}")
            return EXIT_VERIFY_FAILED
        sys.stderr.write(f"error: {error}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

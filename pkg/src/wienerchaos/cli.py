"""Command-line surface for batch experiments and CSV/JSON emission.

Every output document embeds the tool version, the generator tag, the seed
and the fully resolved configuration, so a result file alone suffices to
rerun its computation bit-exactly.  CSV files carry these as leading '#'
comment lines; JSON documents carry them under a "meta" key, which the
kernel and raw-tensor loaders ignore, keeping CLI output round-trippable
through the load paths.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import __version__, montecarlo
from .chaos import evaluate
from .exceptions import DegenerateInputError, WienerChaosError
from .independence import (
    _cross_cov_root_sum,
    _dependence_table,
    _group_dictionaries,
    _max_ratio,
    _pair_rows,
    IndependenceReport,
    criterion_check,
    empirical_dependence,
    squared_cov_matrix,
)
from .sequences import (
    FAMILIES,
    FamilySpec,
    _format_float,
    generate,
    kernel_document,
    load_kernel,
    load_vector,
    raw_document,
)
from .tensor import contract, contract_sym

SWEEP_COLUMNS = ("n", "cov2_witness", "contraction_witness", "empirical_gap", "stderr", "bound_ratio")

_FORMAT_GRAMMAR = """\
file formats (all JSON; indices 1-based and sorted ascending):

  kernel      {"dimension": N, "order": q,
               "entries": [{"index": [i1 <= ... <= iq], "value": float}, ...]}
  raw tensor  {"dimension": N, "left_order": a, "right_order": b,
               "entries": [{"left": [...], "right": [...], "value": float}, ...]}
  manifest    {"dimension": N, "groups": [{"order": q,
               "elements": [<kernel object or relative path>, ...]}, ...]}

Floats are written with 17 significant digits and reload bit-exactly.
Loaders ignore a top-level "meta" key, so CLI output feeds back in as-is.
CSV outputs start with '#' comment lines: tool version, generator tag,
seed, and the resolved configuration as one JSON object.
"""


def _meta(config: dict, seed: int | None) -> dict:
    return {
        "tool": f"wienerchaos {__version__}",
        "generator": montecarlo.GENERATOR_TAG,
        "seed": seed,
        "config": config,
    }


def _comment_header(config: dict, seed: int | None) -> list[str]:
    return [
        f"# wienerchaos {__version__}",
        f"# generator: {montecarlo.GENERATOR_TAG}",
        f"# seed: {seed}",
        f"# config: {json.dumps(config, sort_keys=True)}",
    ]


def _csv_text(config: dict, seed: int | None, columns: tuple[str, ...], rows: list[tuple]) -> str:
    lines = _comment_header(config, seed)
    lines.append(",".join(columns))
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, bool):
                cells.append(str(int(cell)))
            elif isinstance(cell, int):
                cells.append(str(cell))
            else:
                cells.append(_format_float(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _with_meta(document: str, meta: dict) -> str:
    # Canonical kernel/raw documents open with a lone '{'; splice the meta
    # object in as the first key so the payload lines stay byte-identical.
    lines = document.split("\n")
    lines.insert(1, f'  "meta": {json.dumps(meta, sort_keys=True)},')
    return "\n".join(lines)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    tmp = f"{out}.tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, out)


def _summary_text(payload: dict, meta: dict) -> str:
    return json.dumps({"meta": meta, **payload}, indent=2, sort_keys=True) + "\n"


def cmd_contract(args) -> int:
    f = load_kernel(args.f)
    g = load_kernel(args.g)
    config = {"subcommand": "contract", "f": args.f, "g": args.g, "r": args.r, "sym": args.sym}
    if args.sym:
        result = contract_sym(f, g, args.r)
        document = kernel_document(result)
    else:
        result = contract(f, g, args.r)
        document = raw_document(result)
    norm = result.norm()
    meta = _meta(config, seed=None)
    meta["norm"] = norm
    _emit(_with_meta(document, meta), args.out)
    stream = sys.stdout if args.out else sys.stderr
    print(f"norm: {_format_float(norm)}", file=stream)
    return 0


def cmd_cov2(args) -> int:
    vector = load_vector(args.manifest)
    cov_matrix = squared_cov_matrix(vector)
    rows = _pair_rows(vector, cov_matrix)
    config = {"subcommand": "cov2", "manifest": args.manifest, "format": args.format}
    if args.format == "csv":
        table = [(row.i, row.j, row.cov2, row.max_norm, row.argmax_r, int(row.cross)) for row in rows]
        text = _csv_text(config, None, IndependenceReport.CSV_COLUMNS, table)
    else:
        payload = {
            "orders": list(vector.orders),
            "sizes": list(vector.sizes),
            "cov_matrix": [[value for value in line] for line in cov_matrix.tolist()],
            "pairs": [
                {"i": row.i, "j": row.j, "cross": row.cross, "cov2": row.cov2, "norms": list(row.norms)}
                for row in rows
            ],
        }
        text = _summary_text(payload, _meta(config, seed=None))
    _emit(text, args.out)
    return 0


def cmd_check(args) -> int:
    vector = load_vector(args.manifest)
    report = criterion_check(vector, tol=args.tol)
    config = {
        "subcommand": "check",
        "manifest": args.manifest,
        "tol": args.tol,
        "seed": args.seed,
        "samples": args.samples,
        "format": args.format,
    }
    if args.samples:
        empirical = empirical_dependence(vector, samples=args.samples, seed=args.seed)
        report = dataclasses.replace(report, empirical=empirical)
    if args.format == "csv":
        text = _csv_text(config, args.seed, IndependenceReport.CSV_COLUMNS, report.csv_rows())
    else:
        text = _summary_text(report.summary(), _meta(config, args.seed))
    _emit(text, args.out)
    passed = report.cov_pass and report.contraction_pass
    stream = sys.stdout if args.out else sys.stderr
    print(
        f"cov2 witness {_format_float(report.witness_cov)} at pair {report.witness_cov_pair}, "
        f"contraction witness {_format_float(report.witness_norm)} at pair "
        f"{report.witness_norm_pair} (r={report.witness_norm_r}), tol {args.tol:g}: "
        f"{'PASS' if passed else 'FAIL'}",
        file=stream,
    )
    if report.empirical is not None:
        print(
            f"empirical gap {_format_float(report.empirical.gap)} +/- "
            f"{_format_float(report.empirical.stderr)} at tuple {', '.join(report.empirical.labels)}",
            file=stream,
        )
    return 0 if passed else 1


def _parse_int_list(text: str, flag: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise WienerChaosError(f"{flag} expects comma-separated integers, got {text!r}") from None
    if not values:
        raise WienerChaosError(f"{flag} expects at least one integer")
    return values


def cmd_sweep(args) -> int:
    orders = _parse_int_list(args.orders, "--orders")
    sizes = _parse_int_list(args.sizes, "--sizes")
    ns = _parse_int_list(args.n, "--n")
    spec = FamilySpec(args.family, orders, sizes, theta=args.theta)
    config = {
        "subcommand": "sweep",
        "family": args.family,
        "orders": list(orders),
        "sizes": list(sizes),
        "theta": args.theta,
        "n": list(ns),
        "samples": args.samples,
        "seed": args.seed,
        "tol": args.tol,
    }
    rows = []
    for n in ns:
        vector = generate(spec, n)
        report = criterion_check(vector, tol=args.tol)
        dictionaries = _group_dictionaries(vector, None)
        table, _ = _dependence_table(vector, dictionaries, args.samples, args.seed, None)
        best = max(table, key=lambda row: abs(row[1]))
        try:
            ratio = _max_ratio(
                vector, dictionaries, table, _cross_cov_root_sum(vector, report.cov_matrix)
            )
        except DegenerateInputError:
            ratio = float("nan")
        rows.append((n, report.witness_cov, report.witness_norm, abs(best[1]), best[2], ratio))
    _emit(_csv_text(config, args.seed, SWEEP_COLUMNS, rows), args.out)
    return 0


def cmd_simulate(args) -> int:
    vector = load_vector(args.manifest)
    if not isinstance(args.samples, int) or args.samples < 1:
        raise WienerChaosError(f"--samples must be a positive integer, got {args.samples!r}")
    config = {
        "subcommand": "simulate",
        "manifest": args.manifest,
        "samples": args.samples,
        "seed": args.seed,
    }
    batch = montecarlo.sample(args.seed, vector.space.dimension, args.samples)
    elements = vector.elements
    columns = ("sample",) + tuple(f"F{i + 1}" for i in range(len(elements)))
    lines = _comment_header(config, args.seed)
    lines.append(",".join(columns))
    position = 0
    for block in batch.iter_blocks():
        values = [evaluate(element, block) for element in elements]
        for row in range(block.shape[0]):
            position += 1
            cells = [str(position)] + [_format_float(column[row]) for column in values]
            lines.append(",".join(cells))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wienerchaos",
        description="Contractions, squared covariances and dependence diagnostics "
        "for vectors of multiple Wiener-Ito integrals.",
        epilog=_FORMAT_GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"wienerchaos {__version__}")
    commands = parser.add_subparsers(dest="subcommand", required=True)

    contract_p = commands.add_parser(
        "contract", help="contract two kernel files and print the result with its norm"
    )
    contract_p.add_argument("f", help="left kernel file")
    contract_p.add_argument("g", help="right kernel file")
    contract_p.add_argument("--r", type=int, required=True, help="number of paired slots")
    contract_p.add_argument(
        "--sym", action="store_true", help="symmetrize the contraction into a kernel document"
    )
    contract_p.add_argument("--out", help="output path (stdout when omitted)")
    contract_p.set_defaults(func=cmd_contract)

    cov2_p = commands.add_parser(
        "cov2", help="squared-covariance matrix and contraction norms for a vector manifest"
    )
    cov2_p.add_argument("manifest", help="vector manifest file")
    cov2_p.add_argument("--format", choices=("csv", "summary"), default="csv")
    cov2_p.add_argument("--out", help="output path (stdout when omitted)")
    cov2_p.set_defaults(func=cmd_cov2)

    check_p = commands.add_parser(
        "check", help="run the independence criterion; exit 0 on pass, 1 on fail"
    )
    check_p.add_argument("manifest", help="vector manifest file")
    check_p.add_argument("--tol", type=float, default=1e-6, help="criterion width (default 1e-6)")
    check_p.add_argument("--seed", type=int, default=0)
    check_p.add_argument(
        "--samples",
        type=int,
        default=100_000,
        help="empirical-gap sample count; 0 skips the empirical probe (default 100000)",
    )
    check_p.add_argument("--format", choices=("csv", "summary"), default="summary")
    check_p.add_argument("--out", help="output path (stdout when omitted)")
    check_p.set_defaults(func=cmd_check)

    sweep_p = commands.add_parser(
        "sweep", help="witness decay table for a kernel family over a list of n"
    )
    sweep_p.add_argument("--family", choices=FAMILIES, required=True)
    sweep_p.add_argument("--orders", required=True, help="comma-separated group orders, e.g. 2,2")
    sweep_p.add_argument("--sizes", required=True, help="comma-separated group sizes, e.g. 1,1")
    sweep_p.add_argument("--theta", type=float, default=0.5, help="shared-coordinate weight")
    sweep_p.add_argument("--n", required=True, help="comma-separated family indices, e.g. 4,16,64")
    sweep_p.add_argument("--samples", type=int, default=100_000)
    sweep_p.add_argument("--seed", type=int, default=0)
    sweep_p.add_argument("--tol", type=float, default=1e-6)
    sweep_p.add_argument("--out", help="output path (stdout when omitted)")
    sweep_p.set_defaults(func=cmd_sweep)

    simulate_p = commands.add_parser(
        "simulate", help="dump evaluated samples of every vector element as CSV"
    )
    simulate_p.add_argument("manifest", help="vector manifest file")
    simulate_p.add_argument("--samples", type=int, default=1000)
    simulate_p.add_argument("--seed", type=int, default=0)
    simulate_p.add_argument("--out", help="output path (stdout when omitted)")
    simulate_p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WienerChaosError as error:
        print(f"error: {error}", file=sys.stderr)
        return 2
    except OSError as error:
        print(f"error: {error}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

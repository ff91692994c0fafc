"""``exstab`` command-line interface.

Exit codes: 0 success, 1 runtime refusal (cost caps, bad input files),
2 usage error. Results go to stdout (or ``--out``); diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import analytic
from .enumeration import count_doubly_stable, enumerate_pruned, normalize_kind
from .errors import ContractError, ExstabError
from .instance import generate_one_sided, generate_two_sided, read_instance, write_instance
from .montecarlo import (
    SUMMARY_FIELDS,
    ExperimentConfig,
    collect_rank_law,
    estimate_doubly_stable_prob,
    estimate_second_moment,
    rank_records_to_csv,
    summaries_to_csv,
)
from .stability import is_exchange_stable, is_stable, read_matching


def _emit(args, rows: list[dict], fields: list[str], single: bool = False) -> None:
    if args.format == "json":
        text = json.dumps(rows[0] if single else rows) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        text = buf.getvalue()
    _write(args, text)


def _write(args, text: str) -> None:
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def cmd_gen(args) -> int:
    gen = generate_two_sided if args.side == "two" else generate_one_sided
    _write(args, write_instance(gen(args.n, args.seed)))
    return 0


def cmd_check(args) -> int:
    inst = read_instance(_read(args.instance))
    m = read_matching(_read(args.matching))
    kind = normalize_kind(args.kind)
    if kind == "e-stable":
        report = is_exchange_stable(inst, m)
    elif kind == "stable":
        report = is_stable(inst, m)
    else:
        report = is_exchange_stable(inst, m)
        if report:
            report = is_stable(inst, m)
    if args.format == "json":
        _write(args, report.to_json() + "\n")
    else:
        d = report.to_dict()
        w = d["witness"] or {"type": "", "pair": ["", ""]}
        row = {"verdict": str(d["verdict"]).lower(), "type": w["type"], "a": w["pair"][0], "b": w["pair"][1]}
        _emit(args, [row], ["verdict", "type", "a", "b"], single=True)
    return 0


def cmd_enumerate(args) -> int:
    kind = normalize_kind(args.kind)
    rows = []
    for path in args.instance:
        inst = read_instance(_read(path))
        if kind == "doubly":
            res = count_doubly_stable(inst, retain=args.retain)
        else:
            res = enumerate_pruned(inst, kind, retain=args.retain)
        base = {"instance_id": Path(path).stem, "kind": kind, "count": res.count, "nodes_visited": res.nodes_visited}
        if args.retain:
            base["matchings"] = [" ".join(str(x + 1) for x in m.pairing) for m in res.matchings]
        rows.append(base)
    fields = ["instance_id", "kind", "count", "nodes_visited"]
    if args.retain and args.format == "csv":
        flat = []
        for row in rows:
            for idx, text in enumerate(row["matchings"] or [""]):
                flat.append({**{k: row[k] for k in fields}, "matching_index": idx if text else "", "matching": text})
        rows, fields = flat, fields + ["matching_index", "matching"]
    _emit(args, rows, fields)
    return 0


_EXACT = {
    ("two", "p"): ("p_estable", analytic.exact_p_estable_two_sided),
    ("two", "expected"): ("expected_count", analytic.exact_expected_count_two_sided),
    ("one", "p"): ("p_estable", analytic.exact_p_estable_one_sided),
    ("one", "expected"): ("expected_count", analytic.exact_expected_count_one_sided),
    ("one", "doubly"): ("p_doubly", analytic.exact_p_doubly_one_sided),
}


def cmd_exact(args, parser) -> int:
    key = (args.side, args.quantity)
    if key not in _EXACT:
        parser.error("--quantity doubly is only available for --side one")
    name, fn = _EXACT[key]
    value = fn(args.n)
    row = {
        "n": args.n,
        "quantity": name,
        "num": str(value.numerator),
        "den": str(value.denominator),
        "float_value": float(value),
    }
    if args.format == "json":
        _write(args, json.dumps(row) + "\n")
    else:
        row = {"n": row["n"], "quantity": name, "numerator": row["num"], "denominator": row["den"],
               "float_value": repr(row["float_value"])}
        _emit(args, [row], ["n", "quantity", "numerator", "denominator", "float_value"], single=True)
    return 0


def cmd_hcurve(args) -> int:
    if args.maximize:
        xi, h = analytic.maximize_rate_function()
        rows = [{"xi": repr(xi), "H": repr(h)}]
    else:
        rows = []
        for k in range(1, args.grid + 1):
            xi = k / (args.grid + 1)
            rows.append({"xi": repr(xi), "H": repr(analytic.rate_H(xi))})
    if args.format == "json":
        _write(args, json.dumps([{k: float(v) for k, v in r.items()} for r in rows]) + "\n")
    else:
        _emit(args, rows, ["xi", "H"])
    return 0


def cmd_counts(args, parser) -> int:
    q = args.quantity
    nu = args.nu if args.nu is not None else args.n
    if nu is None:
        parser.error("--nu (or --n) is required")
    if q == "derangements":
        value = analytic.count_derangements(nu)
    elif q == "B":
        value = analytic.count_B(nu)
    elif q == "evencycle":
        value = analytic.count_even_cycle_perms(nu)
    else:
        if args.n is None or args.nu is None:
            parser.error("Bnnu needs both --n and --nu")
        value = analytic.count_B2(args.n, args.nu)
    row = {"quantity": q, "n": "" if args.n is None else args.n, "nu": nu, "value": str(value)}
    _emit(args, [row], ["quantity", "n", "nu", "value"], single=True)
    return 0


def cmd_estimate(args) -> int:
    cfg = ExperimentConfig(
        side=args.side, n=args.n, trials=args.trials, seed=args.seed, kind=args.kind,
        threads=args.threads, retain_ranks=bool(args.ranks), force=args.force,
    )
    if args.existence:
        summary = estimate_doubly_stable_prob(cfg)
    else:
        summary = estimate_second_moment(cfg, argmax_path=args.argmax)
    if args.ranks:
        records, _ = collect_rank_law(cfg)
        Path(args.ranks).write_text(rank_records_to_csv(records), encoding="utf-8")
    if args.format == "json":
        row = summary.csv_row(args.timing)
        for k in ("mean", "stderr", "second_moment", "ci_lo", "ci_hi"):
            row[k] = float(row[k])
        row["elapsed_s"] = float(row["elapsed_s"]) if row["elapsed_s"] else None
        _write(args, json.dumps([row]) + "\n")
    else:
        _write(args, summaries_to_csv([summary], timing=args.timing))
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in args.inputs:
        reader = csv.DictReader(io.StringIO(_read(path)))
        if reader.fieldnames != SUMMARY_FIELDS:
            raise ExstabError(f"{path}: not a summary CSV (header {reader.fieldnames})")
        rows.extend(reader)
    _emit(args, rows, SUMMARY_FIELDS)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exstab", description="Exchange-stable matchings toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, formats: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, description=help_text)
        if formats:
            p.add_argument("--format", choices=["csv", "json"], default="csv", help="output encoding (default csv)")
        return p

    p = add("gen", "Generate a uniformly random instance from a seed.", formats=False)
    p.add_argument("--side", choices=["two", "one"], required=True)
    p.add_argument("--n", type=int, required=True, help="market size (even for --side one)")
    p.add_argument("--seed", type=int, required=True, help="64-bit unsigned seed")
    p.add_argument("--out", help="output file (default stdout)")

    p = add("check", "Check a matching against an instance; prints a blocking report.")
    p.add_argument("--instance", required=True)
    p.add_argument("--matching", required=True)
    p.add_argument("--kind", choices=["exchange", "e-stable", "stable", "doubly"], default="exchange")

    p = add("enumerate", "Enumerate matchings of a kind by pruned backtracking.")
    p.add_argument("--instance", nargs="+", required=True, help="one or more instance files")
    p.add_argument("--kind", choices=["e-stable", "exchange", "stable", "doubly"], default="e-stable")
    p.add_argument("--retain", action="store_true", help="also output every matching (1-based)")

    p = add("exact", "Exact rational probabilities and expectations. "
                     f"Refuses when the expansion exceeds the term cap ({analytic.DEFAULT_TERM_CAP}, "
                     "override with EXSTAB_TERM_CAP); two-sided n <= 7, one-sided n <= 8 (doubly n <= 6).")
    p.add_argument("--side", choices=["two", "one"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--quantity", choices=["p", "expected", "doubly"], default="expected")

    p = add("hcurve", "Tabulate the second-moment rate function H on a grid, or maximize it.")
    p.add_argument("--grid", type=int, default=99, help="number of interior grid points (default 99)")
    p.add_argument("--maximize", action="store_true", help="output only (xi_max, H_max)")

    p = add("counts", "Combinatorial counts: derangements, B(nu), B(n,nu), even-cycle permutations.")
    p.add_argument("--quantity", choices=["derangements", "B", "Bnnu", "Bnν", "evencycle"], required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--nu", type=int)

    p = add("estimate", "Monte Carlo estimate over seeded random instances. Guidance: two-sided n <= 12, "
                        "one-sided n <= 16; larger n needs --force.")
    p.add_argument("--side", choices=["two", "one"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--kind", choices=["e-stable", "stable", "doubly"], default="e-stable")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--existence", action="store_true", help="estimate P(a doubly stable matching exists)")
    p.add_argument("--ranks", help="write per-matching rank records of e-stable matchings to this CSV")
    p.add_argument("--argmax", help="write the instance with the most matchings to this file")
    p.add_argument("--timing", action="store_true", help="fill elapsed_s (makes output run-dependent)")
    p.add_argument("--force", action="store_true", help="run beyond the size guidance")
    p.add_argument("--out", help="output file (default stdout)")

    p = add("report", "Merge summary CSV files into one table.")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out", help="output file (default stdout)")
    return parser


# Commands whose arguments come only from flags: a contract violation there is a usage error.
_FLAG_ONLY = {"gen", "exact", "hcurve", "counts", "estimate"}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return int(exc.code or 0)
    if args.command == "counts" and args.quantity == "Bnν":
        args.quantity = "Bnnu"
    handlers = {
        "gen": cmd_gen,
        "check": cmd_check,
        "enumerate": cmd_enumerate,
        "exact": lambda a: cmd_exact(a, parser),
        "hcurve": cmd_hcurve,
        "counts": lambda a: cmd_counts(a, parser),
        "estimate": cmd_estimate,
        "report": cmd_report,
    }
    try:
        try:
            return handlers[args.command](args)
        except ContractError as exc:
            if args.command in _FLAG_ONLY:
                parser.error(str(exc))
            raise
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ExstabError, OSError) as exc:
        print(f"exstab {args.command}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

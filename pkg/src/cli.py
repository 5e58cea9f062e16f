"""
Kommandozeile des Maxwell-Labors.

    run            run the selected suites and write report.json (+ checks.csv)
    list-checks    print every registered check with its anchor
    dump-modes     write the Laplacian spectrum of one degree as CSV
    export-cauchy  evolve random Lorenz data and export one slice as CSV + JSON sidecar

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or config error.
"""
import argparse
import csv
import logging
import sys
from pathlib import Path

from cauchy import cauchy_data_of
from config import SUITES, load_config
from errors import ConfigError, LabError
from evolve import convention_ledger, leapfrog_evolve
from forms import eigenmodes, mode_table_rows
from report import build_report, write_report
from suites import RunContext, checks_for, random_lorenz_data, run_suites

logger = logging.getLogger(__name__)

MARKS = {"pass": "✓", "fail": "✗", "error": "✗", "n/a": "–"}


def _parse_args(argv=None):
    parser = argparse.ArgumentParser(prog="maxwell-lab", description="Discrete Maxwell verification lab")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def _lattice_flags(p):
        p.add_argument("--config", type=Path, help="sectioned key = value file")
        p.add_argument("--seed", type=int)
        p.add_argument("--d", type=int)
        p.add_argument("--N", type=int)
        p.add_argument("--steps", type=int)

    run = sub.add_parser("run", help="run verification suites")
    _lattice_flags(run)
    run.add_argument("--suite", action="append", choices=("all",) + SUITES, help="repeatable")
    run.add_argument("--out-dir", type=Path, default=Path("results"))
    run.add_argument("--format", choices=("json", "csv"), default="json")

    sub.add_parser("list-checks", help="list registered checks")

    modes = sub.add_parser("dump-modes", help="write the mode table of one degree")
    _lattice_flags(modes)
    modes.add_argument("--degree", type=int, default=0)
    modes.add_argument("--sector", choices=("all", "coexact", "exact"), default="all")
    modes.add_argument("--count", type=int)
    modes.add_argument("--out", type=Path, help="CSV file, stdout when omitted")

    export = sub.add_parser("export-cauchy", help="export Cauchy data of a random Lorenz solution")
    _lattice_flags(export)
    export.add_argument("--degree", type=int, default=1)
    export.add_argument("--slice", dest="slice_index", type=int, default=0)
    export.add_argument("--out", type=Path, required=True)
    return parser.parse_args(argv)


def _load(args):
    overrides = {
        ("run", "seed"): args.seed,
        ("lattice", "d"): args.d,
        ("lattice", "N"): args.N,
        ("time", "steps"): args.steps,
    }
    if getattr(args, "suite", None):
        overrides[("run", "suites")] = ",".join(args.suite)
    return load_config(args.config, overrides)


def _print_record(record, seconds):
    mark = MARKS[record.status]
    label = f"{record.suite}.{record.name}"
    if record.status == "error":
        print(f"  {mark} {label:<44} {record.message}")
    elif record.residual is None or record.status == "n/a":
        print(f"  {mark} {label:<44} n/a")
    else:
        print(f"  {mark} {label:<44} {record.residual:.3e} <= {record.tolerance:.0e}  ({seconds:.2f}s)")


def _run(args):
    config = _load(args)
    suites = config.run.selected_suites()
    print(f"🔬 Maxwell-Labor: d={config.lattice.d} N={config.lattice.N} K={config.time.steps} seed={config.run.seed}")
    records, timings = run_suites(config, suites, progress=_print_record)
    report = build_report(records, config.echo(), convention_ledger())
    write_report(report, timings, args.out_dir, args.format)
    for suite, entry in report["summary"].items():
        print(f"{suite}: {entry['pass']} bestanden, {entry['fail']} fehlgeschlagen, {entry['error']} Fehler, {entry['n/a']} n/a")
    print(("✅ alle Prüfungen bestanden" if report["passed"] else "❌ Prüfungen fehlgeschlagen") + f" -> {args.out_dir}")
    return 0 if report["passed"] else 1


def _list_checks():
    for suite in SUITES:
        for item in checks_for((suite,)):
            print(f"{suite}.{item.name:<32} {item.anchor}")
    return 0


def _dump_modes(args):
    config = _load(args)
    ctx = RunContext(config)
    modes = eigenmodes(ctx.complex(), ctx.metric, args.degree, args.count, sector=args.sector)
    rows = mode_table_rows(modes)
    fields = ("degree", "index", "eigenvalue", "omega", "harmonic", "sector")
    if args.out is None:
        writer = csv.DictWriter(sys.stdout, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
        return 0
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    print(f"✓ {len(rows)} Moden -> {args.out}")
    return 0


def _export_cauchy(args):
    config = _load(args)
    ctx = RunContext(config)
    st = ctx.spacetime()
    st.check_slice(args.slice_index)
    data = random_lorenz_data(st.complex, st.metric, args.degree, ctx.rng("export_cauchy"))
    A = leapfrog_evolve(data, None, st)
    path = cauchy_data_of(A, args.slice_index).to_csv(args.out, slice_index=args.slice_index)
    print(f"✓ Cauchy-Daten (p={args.degree}, Schnitt {args.slice_index}) -> {path}")
    return 0


def main(argv=None):
    args = _parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "list-checks":
            return _list_checks()
        if args.command == "dump-modes":
            return _dump_modes(args)
        return _export_cauchy(args)
    except ConfigError as exc:
        print(f"❌ Konfigurationsfehler: {exc}", file=sys.stderr)
        return 2
    except LabError as exc:
        print(f"❌ {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

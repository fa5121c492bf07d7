"""Summarise a directory tree: per-configuration aggregates as a plain table.

    python3 scripts/analyze_corpus.py ROOT [ROOT ...] [--jobs J] [--json OUT]

A thin wrapper over the corpus analyzer for quick looks; use ``ilwc analyze``
for the full per-file report.
"""
import argparse
import os

from ilwc.corpus import analyze_corpus, emit_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("roots", nargs="+")
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--json", help="also write the full JSON report here")
    args = ap.parse_args()

    report = analyze_corpus(args.roots, parallelism=args.jobs)
    print(f"{len(report.files)} files, {len(report.skipped)} skipped")
    print(f"{'config':>8} {'p1 (bits)':>10} {'p1 (files)':>11} {'coding gain':>12} "
          f"{'mean Vth':>9} {'PE':>9} {'energy gain':>12}")
    for name in report.configurations:
        a = report.aggregates[name]
        print(f"{name:>8} {a.p1_weighted:10.5f} {a.p1_per_file_mean:11.5f} {a.coding_gain:12.5f} "
              f"{a.mean_vth:9.4f} {a.pe:9.4%} {a.energy_gain:12.5f}")
    if args.json:
        emit_report(report, "json", args.json)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Summarise per-curve density values into the six-column dataset table.

Input: CSV with header `id,n,lambda` (n is the curve's edge count).
Output: CSV with the table columns, the formatted row, and a second block
with full-precision values (`key,value` lines) for exact comparison.
"""
import argparse
import csv
import statistics


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("per_curve")
    ap.add_argument("--name", required=True)
    args = ap.parse_args()
    with open(args.per_curve, newline="") as f:
        rows = [(r["id"], int(r["n"]), int(r["lambda"])) for r in csv.DictReader(f)]
    lambdas = [float(l) for _, _, l in rows]
    ratios = [l / n for _, n, l in rows]
    med = statistics.median(lambdas)
    med_ratio = statistics.median(ratios)
    print("dataset,curves,max_curve_size,max,median,median_lambda_over_n")
    print(f"{args.name},{len(rows)},{max(n for _, n, _ in rows)},"
          f"{max(l for _, _, l in rows)},{med:.1f},{med_ratio:.3f}")
    print(f"median_exact,{med!r}")
    print(f"median_lambda_over_n_exact,{med_ratio!r}")


if __name__ == "__main__":
    main()

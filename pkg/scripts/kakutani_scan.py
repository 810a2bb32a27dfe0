#!/usr/bin/env python3
"""Tabulate the Gaussian comparison series over dyadic frequency ranges.

For each regularity index the script prints partial sums of the
equivalence statistic at a ladder of mode cutoffs.  A converging column
means the two product measures being compared are mutually absolutely
continuous; a diverging one means they are singular.  The crossover
sits at s = 1/2 for the position marginal.
"""

from __future__ import annotations

import argparse

from torusnlw import kakutani_terms


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s", type=float, nargs="+", default=[0.4, 0.75, 2.0])
    ap.add_argument("--max-norms", type=int, nargs="+",
                    default=[64, 128, 256, 512])
    ap.add_argument("--marginal", choices=("position", "velocity"),
                    default="position")
    args = ap.parse_args()

    header = f"{'max |n|':>8} " + " ".join(f"{f's={s:g}':>22}" for s in args.s)
    print(f"# partial sums of the comparison series ({args.marginal} marginal)")
    print(header)
    previous = {s: None for s in args.s}
    for max_norm in args.max_norms:
        cells = []
        for s in args.s:
            total = kakutani_terms(s, max_norm, args.marginal).partial_sum
            note = f"(x{total / previous[s]:.2f})" if previous[s] else ""
            previous[s] = total
            cells.append(f"{total:>14.6f} {note:>7}")
        print(f"{max_norm:>8} " + " ".join(cells))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Scan xi over the moduli space of triangles and write the table as CSV."""
import argparse

import numpy as np

from fundgap import __version__
from fundgap.gaplab.triangles import EQUILATERAL_XI, triangle_moduli_scan
from fundgap.io import result_document, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid-n", type=int, default=12)
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", default="moduli_scan.csv")
    args = ap.parse_args()
    scan = triangle_moduli_scan(args.grid_n, args.levels, workers=args.workers)
    doc = result_document("moduli-scan", vars(args) | {"csv": None}, 20240601, {})
    write_csv(args.csv, ["x", "y", "xi", "xi_tol"], scan.rows, doc)

    # crude text map, rows from the top
    ys = sorted({r[1] for r in scan.rows}, reverse=True)
    xs = sorted({r[0] for r in scan.rows})
    table = {(r[0], r[1]): r[2] for r in scan.rows}
    print("xi / (64 pi^2 / 9), x from 0.5 to 1")
    for y in ys:
        cells = ["%6.2f" % (table[(x, y)] / EQUILATERAL_XI) if (x, y) in table else "     ." for x in xs]
        print("y=%.3f " % y + " ".join(cells))
    print("argmin (%.4f, %.4f), min xi %.4f, 64 pi^2/9 = %.4f" % (*scan.argmin, scan.min_xi, EQUILATERAL_XI))
    print("thin-row xi range %.1f .. %.1f" % (min(r[2] for r in scan.thin_rows()),
                                              max(r[2] for r in scan.thin_rows())))
    print("fundgap %s, %d points -> %s" % (__version__, len(scan.rows), args.csv))


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    main()

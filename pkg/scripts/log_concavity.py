"""Calibrate the log-concavity slack on a strip and check square, equilateral and random convex polygons."""
import argparse

import numpy as np

from fundgap.domains import equilateral_triangle, rectangle
from fundgap.gaplab.modulus import LOG_CONCAVITY_SLACK, calibrate_log_concavity_slack, log_concavity_check
from fundgap.gaplab.suites import random_convex_polygon


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--polygons", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    c = calibrate_log_concavity_slack(args.levels)
    print("strip: worst second difference / h = %.4f (slack constant in use %.1f)" % (c, LOG_CONCAVITY_SLACK))
    rng = np.random.default_rng(args.seed)
    domains = [("square", rectangle(1, 1)), ("equilateral", equilateral_triangle())]
    domains += [("polygon%d" % i, random_convex_polygon(rng)) for i in range(args.polygons)]
    for name, poly in domains:
        rep = log_concavity_check(poly, args.levels)
        print("%-12s %s margin %+.3e tol %.3e pairs %d" % (name, "holds " if rep.holds else "FAILS ", rep.margin,
                                                          rep.tolerance, rep.n_pairs))


if __name__ == "__main__":
    main()

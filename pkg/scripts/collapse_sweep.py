"""Neumann eigenvalues of thin domains 0 <= y <= eps w(x) against the drift Laplacian limit.

Profiles: sin2 (w = sin^2(pi x), limit ((j+1)^2 - 1) pi^2), quad (phi = 4 (x - 1/2)^2),
flat (w = 1).
"""
import argparse

import numpy as np

from fundgap.gaplab.collapse import collapse_corollary1, collapse_theorem1

PROFILES = {
    "sin2": None,
    "quad": lambda x: 4.0 * (x - 0.5) ** 2,
    "flat": 0.0,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", choices=sorted(PROFILES), default="sin2")
    ap.add_argument("--eps", default="0.4,0.2,0.1,0.05,0.025")
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--nx", type=int, default=96)
    ap.add_argument("--ny", type=int, default=4)
    args = ap.parse_args()
    eps = tuple(float(t) for t in args.eps.split(","))
    if args.profile == "sin2":
        tab = collapse_corollary1(eps, args.k, args.nx, args.ny)
    else:
        tab = collapse_theorem1(PROFILES[args.profile], args.k, eps, args.nx, args.ny)
    print("limit mu_j:", np.array2string(tab.mu_limit, precision=6))
    print("%-7s" % "eps" + "".join("%14s %9s" % ("mu_%d" % j, "rel err") for j in range(1, tab.mu_eps.shape[1])))
    for e, mu, err in zip(tab.eps, tab.mu_eps, tab.errors):
        cells = "".join("%14.6f %9.2e" % (mu[j], err[j] / tab.mu_limit[j]) for j in range(1, len(mu)))
        print("%-7g" % e + cells)
    rates = np.log(tab.errors[:-1, 1] / tab.errors[1:, 1]) / np.log(np.array(eps[:-1]) / np.array(eps[1:]))
    print("observed rate in eps for mu_1:", np.array2string(rates, precision=2))


if __name__ == "__main__":
    main()

"""Gap function of thin isosceles triangles (0,0), (1,0), (1/2, h).

Prints xi, the least-squares log-log slope and the local slopes between
consecutive heights. ``--model`` adds the adiabatic 1D comparison
-u'' + pi^2 / (h t(x))^2 u on [0, 1], t the unit tent, whose slopes show
how slowly the -4/3 regime is reached.
"""
import argparse

import numpy as np

from fundgap.gaplab.triangles import thin_triangle_scaling
from fundgap.oned import schrodinger_eigs_1d


def adiabatic_xi(h, n=4096):
    def V(x):
        t = 1.0 - np.abs(2.0 * np.asarray(x) - 1.0)
        return np.pi**2 / np.maximum(h * t, 1e-100) ** 2

    lam = schrodinger_eigs_1d(V, "dirichlet", n, 2).eigenvalues
    return lam[1] - lam[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h-list", default="0.2,0.1,0.05,0.025,0.0125")
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--model", action="store_true")
    args = ap.parse_args()
    hs = tuple(float(t) for t in args.h_list.split(","))
    fit = thin_triangle_scaling(hs, args.levels, workers=args.workers)
    print("%-8s %12s %10s" % ("h", "xi", "tol"))
    for (h, xi), tol in zip(fit.points, fit.tolerances):
        print("%-8g %12.4f %10.3g" % (h, xi, tol))
    print("fitted slope %.4f" % fit.slope)
    print("local slopes", np.array2string(fit.local_slopes(), precision=3))
    if args.model:
        m = np.array([adiabatic_xi(h) for h in hs])
        loc = np.diff(np.log(m)) / np.diff(np.log(hs))
        print("model xi    ", np.array2string(m, precision=1))
        print("model fitted slope %.4f" % np.polyfit(np.log(hs[:4]), np.log(m[:4]), 1)[0])
        print("model local slopes", np.array2string(loc, precision=3))


if __name__ == "__main__":
    main()

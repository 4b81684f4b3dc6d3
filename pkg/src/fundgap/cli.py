"""Command-line driver: ``fundgap <command> [options]``.

Exit codes: 0 success, 1 a checked property or acceptance criterion failed,
2 bad arguments or domain spec, 3 solver failure.

CSV columns per command
  gap            level, h, lambda1, lambda2
  rectangle      index, lambda
  collapse-t1/c1 eps, level, nx, ny, mu_0 .. mu_k
  prop1          level, h, residual
  prop2          k, gap, mu, difference, relative
  prop4          family, k, lhs, rhs, holds
  moduli-scan    x, y, xi, xi_tol
  thin-scaling   h, xi, xi_tol
  schrodinger1d  index, eigenvalue, error
  lavine         trial, amplitude, gap_dirichlet, gap_neumann, bound_dirichlet, bound_neumann
  ac-suite       domain, potential, R, gap, bound, tol
  logconcavity   margin, tolerance, n_pairs
  verify         number, name, passed
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .eigensolve import DEFAULT_SEED, ConvergenceError, FactorizationError
from .io import SpecError, domain_from_spec, load_domain, result_document, write_csv, write_json

WORKERS_ENV = "FUNDGAP_WORKERS"

COMMANDS = ("gap", "rectangle", "collapse-t1", "collapse-c1", "prop1", "prop2", "prop4", "moduli-scan",
            "thin-scaling", "schrodinger1d", "lavine", "ac-suite", "logconcavity", "verify")


class UsageError(ValueError):
    pass


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError("%s must be an integer, got %r" % (WORKERS_ENV, raw))
    return max(1, n)


@dataclass
class RunConfig:
    command: str
    domain: str | None = None
    levels: int = 4
    k: int = 2
    eps_list: tuple = (0.4, 0.2, 0.1, 0.05)
    h_list: tuple = (0.2, 0.1, 0.05, 0.025)
    grid_n: int = 12
    seed: int = DEFAULT_SEED
    tol: float | None = None
    out: str | None = None
    csv: str | None = None
    workers: int = 1
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UsageError("unknown command %r" % self.command)
        if not 1 <= self.levels <= 8:
            raise UsageError("levels must be in [1, 8]")
        if not 1 <= self.k <= 10:
            raise UsageError("k must be in [1, 10]")
        if not 2 <= self.grid_n <= 64:
            raise UsageError("grid_n must be in [2, 64]")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("tol must be positive")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")
        for name in ("eps_list", "h_list"):
            v = getattr(self, name)
            if any(x <= 0 for x in v) or any(b >= a for a, b in zip(v[:-1], v[1:])):
                raise UsageError("%s must be positive and strictly decreasing" % name)
        return self

    def echo(self) -> dict:
        d = asdict(self)
        for key in ("out", "csv", "workers"):  # do not affect results
            d.pop(key)
        return d


def _floats(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers, got %r" % text)


def parse_function(text: str):
    """``const:c``, ``linear:a,b`` (a x + b), ``abs:c,x0`` (c |x - x0|), ``quad:c,x0`` or ``file:path``."""
    kind, _, arg = text.partition(":")
    if kind == "file":
        from .oned import load_profile_csv

        return load_profile_csv(arg)
    try:
        p = [float(t) for t in arg.split(",")] if arg else []
    except ValueError:
        raise UsageError("bad function parameters in %r" % text)
    shapes = {
        "const": (1, lambda x: np.full_like(np.asarray(x, dtype=float), p[0])),
        "linear": (2, lambda x: p[0] * np.asarray(x) + p[1]),
        "abs": (2, lambda x: p[0] * np.abs(np.asarray(x) - p[1])),
        "quad": (2, lambda x: p[0] * (np.asarray(x) - p[1]) ** 2),
    }
    if kind not in shapes:
        raise UsageError("unknown function kind %r" % kind)
    n, f = shapes[kind]
    if len(p) != n:
        raise UsageError("%s takes %d parameter(s)" % (kind, n))
    return f


def _domain(cfg: RunConfig):
    if cfg.domain is None:
        raise UsageError("--domain is required")
    text = cfg.domain.strip()
    if text.startswith("{"):
        try:
            return domain_from_spec(json.loads(text))
        except json.JSONDecodeError as exc:
            raise UsageError("inline domain: %s" % exc)
    if not Path(text).exists():
        raise UsageError("domain file %s not found" % text)
    return load_domain(text)


# each runner returns (results, tolerances, columns, rows, summary, ok)

def _run_gap(cfg):
    from .gaplab.gap import fundamental_gap

    g = fundamental_gap(_domain(cfg), cfg.levels, seed=cfg.seed)
    rows = [(i, *r) for i, r in enumerate(g.per_level)]
    summary = "xi = %.10g +- %.2g (gap %.10g, d %.6g)%s" % (g.xi, g.xi_tol, g.gap, g.d,
                                                            " [lambda2 cluster]" if g.cluster_flag else "")
    return g.to_dict(), {"gap": g.gap_tol, "xi": g.xi_tol}, ["level", "h", "lambda1", "lambda2"], rows, summary, True


def _run_rectangle(cfg):
    from .domains import rectangle
    from .gaplab.gap import fundamental_gap, rectangle_gap_exact

    a, b = cfg.extra["a"], cfg.extra["b"]
    if not a >= b > 0:
        raise UsageError("need a >= b > 0")
    lam, gap, xi = rectangle_gap_exact(a, b)
    res = {"lambda": lam[:6], "gap": gap, "xi": xi}
    summary = "exact gap %.12g, xi %.12g" % (gap, xi)
    tols = {}
    if cfg.extra.get("fem"):
        g = fundamental_gap(rectangle(a, b), cfg.levels, seed=cfg.seed)
        res["fem"] = g.to_dict()
        tols["fem_xi"] = g.xi_tol
        summary += "; FEM xi %.10g +- %.2g" % (g.xi, g.xi_tol)
    return res, tols, ["index", "lambda"], list(enumerate(lam[:6])), summary, True


def _collapse_out(tab):
    k = tab.mu_eps.shape[1]
    cols = ["eps", "level", "nx", "ny"] + ["mu_%d" % j for j in range(k)]
    lines = ["eps %-6g mu_1 %.8g  limit %.8g  error %.3g" % (e, m[1] if k > 1 else m[0], tab.mu_limit[min(1, k - 1)],
                                                            err[min(1, k - 1)])
             for e, m, err in zip(tab.eps, tab.mu_eps, tab.errors)]
    return tab.to_dict(), {"tol": tab.tol}, cols, tab.rows, "\n".join(lines), True


def _run_collapse_t1(cfg):
    from .gaplab.collapse import collapse_theorem1

    phi = parse_function(cfg.extra.get("phi") or "const:0")
    tab = collapse_theorem1(phi, cfg.k, cfg.eps_list, cfg.extra["nx"], cfg.extra["ny"], cfg.seed)
    return _collapse_out(tab)


def _run_collapse_c1(cfg):
    from .gaplab.collapse import collapse_corollary1

    tab = collapse_corollary1(cfg.eps_list, cfg.k, cfg.extra["nx"], cfg.extra["ny"], cfg.seed)
    return _collapse_out(tab)


def _run_prop1(cfg):
    from .gaplab.identities import prop1_residual_check

    rows = prop1_residual_check(_domain(cfg), cfg.k, cfg.levels, seed=cfg.seed)
    summary = "\n".join("h %.4g residual %.3e" % r for r in rows)
    return {"levels": rows}, {}, ["level", "h", "residual"], [(i, *r) for i, r in enumerate(rows)], summary, True


def _run_prop2(cfg):
    from .gaplab.identities import prop2_identity_1d, prop2_identity_check

    if cfg.domain in (None, "interval"):
        rows = prop2_identity_1d(cfg.k)
        raw = []
    else:
        rows, raw = prop2_identity_check(_domain(cfg), cfg.k, cfg.levels, seed=cfg.seed)
    out = [(r.k, r.gap, r.mu, r.difference, r.relative) for r in rows]
    summary = "\n".join("k %d  lambda_k - lambda_1 %.10g  mu %.10g  rel %.2e" % (r[0], r[1], r[2], r[4]) for r in out)
    res = {"rows": out, "levels": [(h, list(lam), list(mu)) for h, lam, mu in raw]}
    return res, {}, ["k", "gap", "mu", "difference", "relative"], out, summary, True


def _run_prop4(cfg):
    from .assembly import build_pencil
    from .domains import mesh_sequence, rectangle
    from .gaplab.identities import orthogonal_family, prop4_sum_bound_check
    from .eigensolve import smallest_eigenpairs
    from .oned import interval_pencil

    which = cfg.extra.get("pencil", "interval")
    if which == "interval":
        pencil, _ = interval_pencil(128, bc="neumann")
    elif which == "square":
        pencil = build_pencil(mesh_sequence(rectangle(1.0, 1.0), cfg.levels)[-1], "neumann")
    else:
        raise UsageError("pencil must be 'interval' or 'square'")
    rng = np.random.default_rng(cfg.seed)
    mu = smallest_eigenpairs(pencil, cfg.k + 1, seed=cfg.seed).eigenvalues
    rows = []
    for i in range(cfg.extra.get("families", 20)):
        r = prop4_sum_bound_check(pencil, orthogonal_family(pencil, cfg.k, rng), eigenvalues=mu)
        rows.append((i, cfg.k, r.lhs, r.rhs, r.holds))
    ok = all(r[4] for r in rows)
    summary = "%d families, bound holds in %d, min rhs - lhs %.4g" % (
        len(rows), sum(r[4] for r in rows), min(r[3] - r[2] for r in rows))
    return {"mu": mu, "rows": rows}, {"relative": 1e-9}, ["family", "k", "lhs", "rhs", "holds"], rows, summary, ok


def _run_moduli(cfg):
    from .gaplab.triangles import triangle_moduli_scan

    scan = triangle_moduli_scan(cfg.grid_n, cfg.levels, cfg.seed, cfg.workers)
    summary = "%d points, argmin (%.4f, %.4f), min xi %.6g" % (len(scan.rows), *scan.argmin, scan.min_xi)
    res = {"rows": scan.rows, "argmin": scan.argmin, "min_xi": scan.min_xi}
    return res, {"xi": [r[3] for r in scan.rows]}, ["x", "y", "xi", "xi_tol"], scan.rows, summary, True


def _run_thin(cfg):
    from .gaplab.triangles import thin_triangle_scaling

    fit = thin_triangle_scaling(cfg.h_list, cfg.levels, cfg.seed, cfg.workers)
    rows = [(h, xi, t) for (h, xi), t in zip(fit.points, fit.tolerances)]
    summary = "\n".join("h %-7g xi %.6g" % (h, xi) for h, xi, _ in rows)
    summary += "\nslope %.4f, local slopes %s" % (fit.slope, np.array2string(fit.local_slopes(), precision=3))
    res = {"points": fit.points, "slope": fit.slope, "intercept": fit.intercept, "increasing": fit.increasing}
    return res, {"xi": fit.tolerances}, ["h", "xi", "xi_tol"], rows, summary, True


def _run_schrodinger(cfg):
    from .oned import schrodinger_eigs_1d

    V = parse_function(cfg.extra.get("V") or "const:0")
    R, bc = cfg.extra["R"], cfg.extra["bc"]
    if not R > 0:
        raise UsageError("R must be positive")
    s = schrodinger_eigs_1d(V, bc, cfg.extra["n"], max(cfg.k, 2), R)
    gap = float(s.eigenvalues[1] - s.eigenvalues[0])
    gap_tol = float(max(2 * (s.residuals[0] + s.residuals[1]), 1e-6))
    res = {"eigenvalues": s.eigenvalues, "gap": gap, "meta": s.meta}
    rows = list(zip(range(len(s.eigenvalues)), s.eigenvalues, s.residuals))
    summary = "gap %.10g (3 pi^2/R^2 = %.10g, pi^2/R^2 = %.10g)" % (gap, 3 * np.pi**2 / R**2, np.pi**2 / R**2)
    return res, {"gap": gap_tol, "eigenvalues": 2 * s.residuals}, ["index", "eigenvalue", "error"], rows, summary, True


def _run_lavine(cfg):
    from .gaplab.suites import ABS_TOL, STRICT_MARGIN, lavine_suite

    rep = lavine_suite(cfg.extra["trials"], cfg.extra["R"], cfg.seed)
    rows = [(r.trial, r.amplitude, r.gap_dirichlet, r.gap_neumann, r.bound_dirichlet, r.bound_neumann) for r in rep.rows]
    summary = "%d trials: %d violations, %d strict failures, equality error %.2e" % (
        len(rows), rep.violations, rep.strict_failures, max(rep.equality_error))
    res = {"rows": rows, "violations": rep.violations, "strict_failures": rep.strict_failures,
           "equality_error": rep.equality_error}
    cols = ["trial", "amplitude", "gap_dirichlet", "gap_neumann", "bound_dirichlet", "bound_neumann"]
    return res, {"absolute": ABS_TOL, "strict_margin": STRICT_MARGIN}, cols, rows, summary, rep.passed


def _run_ac(cfg):
    from .domains import equilateral_triangle, rectangle
    from .gaplab.suites import ac_gap_suite, random_convex_polygon

    rng = np.random.default_rng(cfg.seed)
    domains = [("square", rectangle(1.0, 1.0)), ("equilateral", equilateral_triangle())]
    domains += [("polygon%d" % i, random_convex_polygon(rng)) for i in range(cfg.extra["polygons"])]
    if cfg.domain is not None:
        domains.append(("user", _domain(cfg)))
    rows = ac_gap_suite(domains, levels=cfg.levels, seed=cfg.seed)
    out = [(r.domain, r.potential, r.R, r.gap, r.bound, r.tol) for r in rows]
    ok = all(r.holds for r in rows)
    summary = "\n".join("%-12s %-6s gap %10.5f bound %10.5f %s" % (r.domain, r.potential, r.gap, r.bound,
                                                                   "ok" if r.holds else "VIOLATED") for r in rows)
    return {"rows": out}, {"gap": [r.tol for r in rows]}, ["domain", "potential", "R", "gap", "bound", "tol"], out, \
        summary, ok


def _run_logconc(cfg):
    from .gaplab.modulus import log_concavity_check

    rep = log_concavity_check(_domain(cfg), cfg.levels, seed=cfg.seed)
    summary = "%s: margin %.3e, slack %.3e over %d pairs" % ("holds" if rep.holds else "VIOLATED", rep.margin,
                                                             rep.tolerance, rep.n_pairs)
    return rep.to_dict(), {"slack": rep.tolerance}, ["margin", "tolerance", "n_pairs"], \
        [(rep.margin, rep.tolerance, rep.n_pairs)], summary, rep.holds


def _run_verify(cfg):
    from .gaplab.acceptance import run_all

    only = cfg.extra.get("only")
    results = run_all(cfg.extra.get("quick", False), cfg.seed, only, echo=lambda r: print(r.line(), flush=True))
    ok = all(r.passed for r in results)
    rows = [(r.number, r.name, r.passed) for r in results]
    summary = "%d/%d criteria passed" % (sum(r.passed for r in results), len(results))
    res = [r.to_dict() for r in results]
    for d in res:
        d.pop("seconds")  # keep the JSON reproducible
    return res, {}, ["number", "name", "passed"], rows, summary, ok


RUNNERS = {
    "gap": _run_gap, "rectangle": _run_rectangle, "collapse-t1": _run_collapse_t1, "collapse-c1": _run_collapse_c1,
    "prop1": _run_prop1, "prop2": _run_prop2, "prop4": _run_prop4, "moduli-scan": _run_moduli,
    "thin-scaling": _run_thin, "schrodinger1d": _run_schrodinger, "lavine": _run_lavine, "ac-suite": _run_ac,
    "logconcavity": _run_logconc, "verify": _run_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fundgap", description="Dirichlet, Neumann and drift Laplacian eigenvalue experiments.",
                epilog=__doc__.split("\n\n", 1)[1], formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version="fundgap " + __version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, domain=False, levels=None, k=None):
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--out", help="JSON result path")
        sp.add_argument("--csv", help="CSV result path")
        if domain:
            sp.add_argument("--domain", help="domain spec: JSON file or inline JSON object")
        if levels is not None:
            sp.add_argument("--levels", type=int, default=levels)
        if k is not None:
            sp.add_argument("--k", type=int, default=k)
        return sp

    common(sub.add_parser("gap", help="extrapolated fundamental gap and xi"), True, 4)
    sp = common(sub.add_parser("rectangle", help="closed-form rectangle gap"), levels=4)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--fem", action="store_true", help="also run the FEM ladder")
    for name, hlp, k in (("collapse-t1", "thin domains exp(-phi) over [0,1]", 2),
                         ("collapse-c1", "thin domains sin^2 over [0,1]", 1)):
        sp = common(sub.add_parser(name, help=hlp), k=k)
        sp.add_argument("--eps-list", type=_floats, default=(0.4, 0.2, 0.1, 0.05))
        sp.add_argument("--nx", type=int, default=96)
        sp.add_argument("--ny", type=int, default=4)
        if name == "collapse-t1":
            sp.add_argument("--phi", default="const:0", help="const:c | linear:a,b | abs:c,x0 | quad:c,x0 | file:path")
    common(sub.add_parser("prop1", help="weighted residual of phi_k / phi_1"), True, 4, 2)
    common(sub.add_parser("prop2", help="gap versus drift Neumann eigenvalues (default: interval)"), True, 4, 2)
    sp = common(sub.add_parser("prop4", help="eigenvalue-sum bound on random orthogonal families"), levels=3, k=2)
    sp.add_argument("--pencil", choices=("interval", "square"), default="interval")
    sp.add_argument("--families", type=int, default=20)
    sp = common(sub.add_parser("moduli-scan", help="xi over the triangle moduli grid"), levels=4)
    sp.add_argument("--grid-n", type=int, default=12)
    sp.add_argument("--workers", type=int, default=None)
    sp = common(sub.add_parser("thin-scaling", help="xi of thin isosceles triangles"), levels=4)
    sp.add_argument("--h-list", type=_floats, default=(0.2, 0.1, 0.05, 0.025))
    sp.add_argument("--workers", type=int, default=None)
    sp = common(sub.add_parser("schrodinger1d", help="1D Schrodinger spectrum"), k=4)
    sp.add_argument("--V", default="const:0", help="const:c | linear:a,b | abs:c,x0 | quad:c,x0 | file:path")
    sp.add_argument("--R", type=float, default=1.0)
    sp.add_argument("--bc", choices=("dirichlet", "neumann"), default="dirichlet")
    sp.add_argument("--n", type=int, default=512)
    sp = common(sub.add_parser("lavine", help="1D gap bounds for random convex potentials"))
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--R", type=float, default=1.0)
    sp = common(sub.add_parser("ac-suite", help="gap bound on convex domains with convex potentials"), True, 4)
    sp.add_argument("--polygons", type=int, default=3)
    common(sub.add_parser("logconcavity", help="log-concavity of the ground state"), True, 4)
    sp = common(sub.add_parser("verify", help="run the acceptance criteria"))
    sp.add_argument("--quick", action="store_true", help="reduced refinement for CI")
    sp.add_argument("--only", type=lambda s: tuple(int(t) for t in s.split(",")), default=None,
                    help="comma-separated criterion numbers")
    return p


_CORE = {"command", "domain", "levels", "k", "eps_list", "h_list", "grid_n", "seed", "out", "csv", "workers"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = vars(ns).copy()
    core = {k: d.pop(k) for k in list(d) if k in _CORE and d[k] is not None}
    if "workers" not in core:
        core["workers"] = default_workers()
    for key in ("eps_list", "h_list"):
        if key in core:
            core[key] = tuple(core[key])
    return RunConfig(extra={k: v for k, v in d.items() if v is not None}, **core).validate()


def run(argv=None) -> int:
    try:
        cfg = config_from_args(build_parser().parse_args(argv))
    except UsageError as exc:
        print("fundgap: error: %s" % exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help, --version
        return int(exc.code or 0)
    try:
        results, tols, columns, rows, summary, ok = RUNNERS[cfg.command](cfg)
    except (UsageError, SpecError) as exc:
        print("fundgap: error: %s" % exc, file=sys.stderr)
        return 2
    except (FactorizationError, ConvergenceError, np.linalg.LinAlgError) as exc:
        print("fundgap: solver failure: %s" % exc, file=sys.stderr)
        return 3
    except ValueError as exc:
        print("fundgap: error: %s" % exc, file=sys.stderr)
        return 2
    print(summary)
    doc = result_document(cfg.command, cfg.echo(), cfg.seed, results, tols)
    if cfg.out:
        write_json(cfg.out, doc)
    if cfg.csv:
        write_csv(cfg.csv, columns, rows, doc)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

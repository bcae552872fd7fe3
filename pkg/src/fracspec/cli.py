"""Batch driver: eigenvalue runs, s-sweeps, oracle tables, symmetry reports.

Subcommands: eig, sweep, local, extend, symmetry, bbm-check.  Tabular data
goes to CSV (header row, comma separator, LF endings), structured reports
to JSON; both are deterministic under fixed flags.  Exit codes: 0 success,
2 usage error, 3 numerical failure.  FRACSPEC_THREADS caps the sweep
worker pool.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .assembly import assemble_mode_problem
from .eigen import first_nontrivial, solve_disk_modes, solve_generalized
from .extension import extension_radial_mode
from .geometry import make_polar_grid, make_radial_grid, tail_bound
from .kernelmath import FracOrder, bbm_constant
from .localref import local_spectrum, theta_root
from .symmetry import classify_eigenspace

_FMT = "%.12g"


def _fnum(x) -> str:
    return _FMT % float(x)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracspec",
                                description="fractional Neumann spectral solver on the disk")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, with_s=True):
        if with_s:
            sp.add_argument("--s", type=float, default=0.5, help="fractional order in (0,1)")
        sp.add_argument("--n", type=int, default=48, help="interior radial panels")
        sp.add_argument("--next", dest="n_ext", type=int, default=24, help="exterior panels")
        sp.add_argument("--rinf", type=float, default=None,
                        help="exterior truncation radius (default: from tail bound)")
        sp.add_argument("--grading", type=float, default=2.0, help="radial mesh grading")
        sp.add_argument("--tol", type=float, default=1e-3, help="tail-bound tolerance")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
        sp.add_argument("--out", type=str, default=None, help="output file path")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--plot", action="store_true",
                        help="with --out, render a figure next to the output file")

    sp = sub.add_parser("eig", help="eigenvalue table at one fractional order")
    add_common(sp)
    sp.add_argument("--lmax", type=int, default=2)
    sp.add_argument("--k", type=int, default=4, help="eigenvalues per mode")

    sp = sub.add_parser("sweep", help="eigenvalue sweep over a list of s values")
    add_common(sp, with_s=False)
    sp.add_argument("--s-list", type=str, required=True,
                    help="comma-separated fractional orders")
    sp.add_argument("--lmax", type=int, default=2)
    sp.add_argument("--k", type=int, default=3)

    sp = sub.add_parser("local", help="local (s=1) Bessel-root reference table")
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--count", type=int, default=12)
    sp.add_argument("--out", type=str, default=None)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("extend", help="exterior minimal-extension profile")
    add_common(sp)
    sp.add_argument("--mode", type=int, default=1)
    sp.add_argument("--profile", choices=("linear", "quadratic", "boundary-bump"),
                    default="linear")

    sp = sub.add_parser("symmetry", help="classify the first nontrivial eigenspace")
    add_common(sp)
    sp.add_argument("--lmax", type=int, default=2)
    sp.add_argument("--ntheta", type=int, default=64)

    sp = sub.add_parser("bbm-check", help="(1-s)-scaled energy against the local target")
    add_common(sp, with_s=False)
    sp.add_argument("--s-list", type=str, default="0.9,0.99,0.999")
    sp.add_argument("--function", choices=("x1", "const"), default="x1")
    return p


def _parse_s(value: float) -> float:
    return FracOrder(value).s  # raises "s must lie in (0,1), got ..."


def _parse_s_list(text: str) -> list[float]:
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as err:
        raise ValueError(f"bad --s-list: {err}") from err
    if not vals:
        raise ValueError("empty --s-list")
    return [_parse_s(v) for v in vals]


def _make_grid(args, s: float):
    rinf = args.rinf if args.rinf is not None else tail_bound(s, 2, 1.0, args.tol)
    return make_radial_grid(1.0, args.n, rinf, args.n_ext, grading=args.grading)


def _emit(text: str, args) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    return "\n".join(lines) + "\n"


def _n_threads() -> int:
    env = os.environ.get("FRACSPEC_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _mode_rows(s, results, grid):
    rows = []
    for l, (problem, pairs) in sorted(results.items()):
        norm_a = np.linalg.norm(problem.A, 2)
        start_k = 1
        if l == 0:
            pair0 = solve_generalized(problem, 1, constrain=False)[0]
            res0 = np.linalg.norm(problem.A @ pair0.vector
                                  - pair0.mu * (problem.M @ pair0.vector)) / norm_a
            rows.append((s, 0, 0, pair0.mu, 1, res0))
        for k, pair in enumerate(pairs, start=start_k):
            res = np.linalg.norm(problem.A @ pair.vector
                                 - pair.mu * (problem.M @ pair.vector)) / norm_a
            rows.append((s, l, k, pair.mu, pair.multiplicity, res))
    return rows


def cmd_eig(args) -> int:
    s = _parse_s(args.s)
    grid = _make_grid(args, s)
    results = solve_disk_modes(s, grid, args.lmax, k=args.k)
    rows = _mode_rows(s, results, grid)
    if args.format == "json":
        payload = {"params": {"s": s, "n": args.n, "next": args.n_ext,
                              "rinf": grid.R_inf, "grading": args.grading},
                   "rows": [{"s": r[0], "l": r[1], "k": r[2], "mu": r[3],
                             "multiplicity": r[4], "residual": r[5]} for r in rows]}
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args)
    else:
        _emit(_csv(("s", "l", "k", "mu", "multiplicity", "residual"),
                   [(_fnum(r[0]), str(r[1]), str(r[2]), _fnum(r[3]), str(r[4]), _fnum(r[5]))
                    for r in rows]), args)
    return 0


def cmd_sweep(args) -> int:
    s_list = _parse_s_list(args.s_list)

    def solve_one(s):
        grid = _make_grid(args, s)
        return s, grid, solve_disk_modes(s, grid, args.lmax, k=args.k)

    with ThreadPoolExecutor(max_workers=_n_threads()) as pool:
        solved = list(pool.map(solve_one, s_list))

    limits = {}
    for l in range(args.lmax + 1):
        for k in range(1, args.k + 1):
            limits[(l, k)] = theta_root(l, 2, k) ** 2

    rows = []
    for s, grid, results in solved:
        for _, l, k, mu, mult, res in _mode_rows(s, results, grid):
            if k == 0:
                gap = abs(mu)
            else:
                ref = limits[(l, k)]
                gap = abs(mu - ref) / ref
            rows.append({"s": s, "l": l, "k": k, "mu": mu, "multiplicity": mult,
                         "n": grid.n_cells, "rinf": grid.R_inf, "gap_rel": gap})
    rows.sort(key=lambda r: (r["s"], r["l"], r["k"]))

    if args.format == "json":
        payload = {"params": {"s_list": s_list, "n": args.n, "next": args.n_ext,
                              "grading": args.grading, "lmax": args.lmax, "k": args.k},
                   "limit": [{"l": l, "k": k, "mu_local": v}
                             for (l, k), v in sorted(limits.items())],
                   "rows": rows}
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args)
    else:
        _emit(_csv(("s", "l", "k", "mu", "multiplicity", "n", "rinf", "gap_rel"),
                   [(_fnum(r["s"]), str(r["l"]), str(r["k"]), _fnum(r["mu"]),
                     str(r["multiplicity"]), str(r["n"]), _fnum(r["rinf"]),
                     _fnum(r["gap_rel"])) for r in rows]), args)

    if args.plot and args.out:
        from . import figures
        figures.render_sweep(rows, limits, os.path.splitext(args.out)[0] + ".png")
    return 0


def cmd_local(args) -> int:
    spec = local_spectrum(args.dim, args.radius, args.count)
    rows = [("neumann", str(l), str(k), str(m), _fnum(v))
            for v, l, k, m in spec.neumann_values]
    rows.append(("dirichlet", "-", "1", "1", _fnum(spec.dirichlet_first)))
    if args.format == "json":
        payload = {"N": spec.N, "R": spec.R,
                   "neumann": [{"value": v, "l": l, "k": k, "multiplicity": m}
                               for v, l, k, m in spec.neumann_values],
                   "dirichlet_first": spec.dirichlet_first}
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args)
    else:
        _emit(_csv(("kind", "l", "k", "multiplicity", "value"), rows), args)
    return 0


_PROFILES = {
    "linear": lambda r: r,
    "quadratic": lambda r: r * r,
    "boundary-bump": lambda r: r * r * (1.0 - r),
}


def cmd_extend(args) -> int:
    s = _parse_s(args.s)
    grid = _make_grid(args, s)
    f = _PROFILES[args.profile](grid.interior_nodes)
    vals = extension_radial_mode(f, args.mode, s, grid)
    rows = [(_fnum(r), _fnum(v)) for r, v in zip(grid.exterior_nodes, vals)]
    _emit(_csv(("r", "extension"), rows), args)
    if args.plot and args.out:
        from . import figures
        figures.render_extension(grid.exterior_nodes, vals,
                                 os.path.splitext(args.out)[0] + ".png")
    return 0


def cmd_symmetry(args) -> int:
    s = _parse_s(args.s)
    grid = _make_grid(args, s)
    polar = make_polar_grid(grid, args.ntheta)
    results = solve_disk_modes(s, grid, args.lmax, k=3)
    mu1, members = first_nontrivial(results)
    problems = {l: prob for l, (prob, _) in results.items()}
    report = classify_eigenspace(members, problems, polar)
    payload = {"s": s, "mu1": mu1, "report": report.as_dict()}
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args)
    return 0


def cmd_bbm_check(args) -> int:
    s_list = _parse_s_list(args.s_list)
    k2 = bbm_constant(2)
    target = k2 * math.pi if args.function == "x1" else 0.0
    table = []
    for s in s_list:
        grid = _make_grid(args, s)
        if args.function == "x1":
            problem = assemble_mode_problem(1, s, grid)
            coeffs = grid.breaks_int.copy()  # hats interpolate f(r) = r exactly
            energy = problem.seminorm_quadratic(coeffs)
        else:
            problem = assemble_mode_problem(0, s, grid)
            energy = problem.seminorm_quadratic(np.ones(problem.n_dof))
        scaled = (1.0 - s) * energy
        err = abs(scaled - target) / target if target else abs(scaled)
        table.append({"s": s, "energy": energy, "scaled_energy": scaled,
                      "target": target, "rel_error": err})

    if args.format == "json":
        _emit(json.dumps({"function": args.function, "rows": table},
                         indent=2, sort_keys=True) + "\n", args)
    else:
        _emit(_csv(("s", "energy", "scaled_energy", "target", "rel_error"),
                   [(_fnum(r["s"]), _fnum(r["energy"]), _fnum(r["scaled_energy"]),
                     _fnum(r["target"]), _fnum(r["rel_error"])) for r in table]), args)

    if args.plot and args.out:
        from . import figures
        figures.render_bbm(table, target, os.path.splitext(args.out)[0] + ".png")
    return 0


_COMMANDS = {
    "eig": cmd_eig,
    "sweep": cmd_sweep,
    "local": cmd_local,
    "extend": cmd_extend,
    "symmetry": cmd_symmetry,
    "bbm-check": cmd_bbm_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (RuntimeError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``overcoll study|oracle|quad|field``."""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import __version__
from .errors import OvercollError


def _study(args):
    from .harness import ExperimentConfig, emit, fit_slope, run_study, select, to_csv, to_json

    cfg = ExperimentConfig.load(args.config)
    records = run_study(cfg, threads=args.threads)
    path = args.output or cfg.output
    fmt = args.format or cfg.format
    if path and path != "-":
        emit(records, path, fmt, config=cfg)
        print(f"wrote {len(records)} records to {path}", file=sys.stderr)
    else:
        sys.stdout.write(to_csv(records) if fmt == "csv" else to_json(records, cfg))
    failed = [r for r in records if not r.ok]
    for r in failed:
        print(f"failed: {r.method} N={r.N} {r.metric}: {r.status}", file=sys.stderr)
    if args.fit:
        # against J = M/N the curve runs across methods at a fixed N
        by_j = args.fit == "J"
        keys = dict.fromkeys((None if by_j else r.method, r.metric, r.s_or_point, r.seed,
                              r.N if by_j else None) for r in records)
        for method, metric, where, seed, N in keys:
            pts = [r for r in select(records, method, metric, where, seed) if N is None or r.N == N]
            name = f"N={N}" if by_j else method
            tail = "" if seed is None else f" seed={seed}"
            try:
                fit = fit_slope(pts, x=args.fit)
            except (OvercollError, ValueError) as exc:
                print(f"slope {name} {metric} {where}{tail}: {exc}", file=sys.stderr)
                continue
            print(f"slope {name} {metric} {where}{tail}: {fit['slope']:.3f} (r2 {fit['r2']:.4f})",
                  file=sys.stderr)
    return 0


def _oracle(args):
    from .oracle import ModelProblem, exact_error_coeffs, model_density

    u = model_density(args.K, args.decay, args.seed)
    prob = ModelProblem(args.d, args.two_alpha, args.N, args.J, u)
    ec = exact_error_coeffs(prob)
    cols = ["mu", "D", "E", "error_re", "error_im", "abs_error"]
    solver = None
    if args.check:
        from .harness import model_solver_errors
        solver = model_solver_errors(prob)
        cols += ["solver_re", "solver_im", "rel_diff"]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(cols)
    for i, mu in enumerate(ec.mu):
        e = complex(ec.error[i])
        row = [int(mu), repr(float(ec.D[i])), repr(float(ec.E[i])), repr(e.real), repr(e.imag),
               repr(abs(e))]
        if solver is not None:
            s = complex(solver[i])
            rel = abs(s - e) / abs(e) if e != 0 else abs(s - e)
            row += [repr(s.real), repr(s.imag), repr(float(rel))]
        w.writerow(row)
    return 0


def _quad(args):
    from .colloc import make_grid, mode_probes, quadrature_error_report

    params = {"M": args.M}
    if args.grid == "offset":
        params.update(N=args.N, delta=args.delta)
    elif args.grid == "random":
        params.update(seed=args.seed)
    elif args.grid == "refined":
        params = {"N": args.N, "J": args.J}
    grid = make_grid(args.grid, **params)
    probes = mode_probes(range(-args.modes, args.modes + 1))
    rep = quadrature_error_report(grid, probes, args.r, args.s)
    i, j = rep.worst_pair
    print(f"grid={grid.kind} M={grid.M} r={rep.r:g} s={rep.s:g} E={rep.E!r} "
          f"worst_modes=({i - args.modes},{j - args.modes})")
    return 0


def _field(args):
    from .basis import SplineSpace
    from .harness import ExperimentConfig, Reference, _Case, _solve
    from .operators import field_matrix

    cfg = ExperimentConfig.load(args.config)
    ref = Reference(cfg)
    p = np.array([[args.x, args.y]])
    try:
        exact = complex(ref.field(p)[0])
    except OvercollError:
        exact = None
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["method", "N", "seed", "re", "im", "abs_error"])
    for N in cfg.Ns:
        space = SplineSpace.uniform_mesh(N, cfg.degree)
        for m in cfg.methods:
            for seed in m.seeds:
                try:
                    coeffs, _, _, _ = _solve(cfg, ref, _Case(m, N, seed), space)
                except (OvercollError, ArithmeticError) as exc:
                    print(f"failed: {m.tag} N={N}: {exc}", file=sys.stderr)
                    continue
                v = complex((field_matrix(cfg.operator, cfg.curve, space, p) @ coeffs)[0])
                err = "" if exact is None else repr(abs(v - exact))
                w.writerow([m.tag, N, "" if seed is None else seed, repr(v.real), repr(v.imag), err])
    if exact is not None:
        print(f"exact field: {exact.real!r} {exact.imag!r}", file=sys.stderr)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="overcoll", description=__doc__)
    ap.add_argument("--version", action="version", version=f"overcoll {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    st = sub.add_parser("study", help="run a convergence study from a TOML config")
    st.add_argument("config")
    st.add_argument("-o", "--output", help="output path ('-' for stdout); overrides the config")
    st.add_argument("-f", "--format", choices=("csv", "json"))
    st.add_argument("-j", "--threads", type=int, default=None,
                    help="worker threads (default: OVERCOLL_NUM_THREADS or 1)")
    st.add_argument("--fit", nargs="?", const="N", choices=("N", "J"),
                    help="print fitted log-log slopes per curve, against N (default) or J = M/N")
    st.set_defaults(func=_study)

    orc = sub.add_parser("oracle", help="exact error coefficients of the model problem")
    orc.add_argument("--d", type=int, default=1)
    orc.add_argument("--two-alpha", type=float, default=-1.0)
    orc.add_argument("--N", type=int, default=8)
    orc.add_argument("--J", type=int, default=1)
    orc.add_argument("--K", type=int, default=512, help="band of the exact density")
    orc.add_argument("--decay", type=float, default=4.0)
    orc.add_argument("--seed", type=int, default=0, help="seed of the density phases")
    orc.add_argument("--check", action="store_true", help="add the assembled solver's errors")
    orc.set_defaults(func=_oracle)

    q = sub.add_parser("quad", help="empirical quadrature error constant of a grid")
    q.add_argument("--grid", choices=("equispaced", "offset", "random", "refined"),
                   default="equispaced")
    q.add_argument("--M", type=int, default=64)
    q.add_argument("--N", type=int, default=16)
    q.add_argument("--J", type=int, default=1)
    q.add_argument("--delta", type=float, default=0.5)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--r", type=float, default=1.0)
    q.add_argument("--s", type=float, default=1.0)
    q.add_argument("--modes", type=int, default=32, help="probe single modes -K..K")
    q.set_defaults(func=_quad)

    fl = sub.add_parser("field", help="field values at a point for every case of a config")
    fl.add_argument("config")
    fl.add_argument("x", type=float)
    fl.add_argument("y", type=float)
    fl.set_defaults(func=_field)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OvercollError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

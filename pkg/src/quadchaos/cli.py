"""Command-line front end.

Exit codes: 0 success, 1 a validation FAIL, 2 usage or domain error,
3 numerical failure.
"""

import argparse
import csv
import io
import math
import shlex
import sys
import warnings

from . import __version__
from .bounds import DEFAULT_BOUNDS, BoundName, evaluate, t_hat_c
from .config import use_tolerances
from .crossover import crossover_report
from .errors import DomainError, NumericalError
from .montecarlo import (
    DEFAULT_CONF,
    Ensemble,
    EnsembleSpec,
    ValidationRow,
    Verdict,
    generate_ensemble,
    validate_bounds,
)
from .reference import BUILTIN
from .scalar import hw_constants
from .spectral import load_matrix_csv, spectral_summary, symmetrize
from .sweeps import bound_sweep, fmt, m_sweep, m_transition, parse_grid, relaxed_sweep

EXIT_OK, EXIT_FAIL, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_DOMAIN)


def _bound_list(text):
    names = [x for x in text.split(",") if x.strip()]
    if not names:
        raise DomainError("bound list is empty")
    return [BoundName.parse(x) for x in names]


def _n_spec(text):
    """``N`` or ``MIN:MAX``."""
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            if hi < lo:
                raise ValueError
            return lo, hi
        n = int(text)
        return n, n
    except ValueError:
        raise DomainError(f"--n must be INT or MIN:MAX, got {text!r}") from None


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _load_matrix(args):
    if args.matrix is None:
        if getattr(args, "ensemble", None) is None:
            raise DomainError("give --matrix PATH (or @psd-example / @indefinite-example) or --ensemble KIND")
        n_lo, n_hi = _n_spec(args.n or "3")
        if n_lo != n_hi:
            raise DomainError("--ensemble needs a single --n")
        return generate_ensemble(EnsembleSpec(Ensemble(args.ensemble), n_lo, args.seed))
    if args.matrix.startswith("@"):
        key = args.matrix[1:]
        if key not in BUILTIN:
            raise DomainError(f"unknown built-in matrix {args.matrix!r}; choose from @" + ", @".join(BUILTIN))
        return symmetrize(BUILTIN[key])
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            m = load_matrix_csv(args.matrix)
    except OSError as exc:
        raise DomainError(f"cannot read matrix file: {exc}") from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return m


def _header(argv, seed=None):
    line = f"# quadchaos {__version__} | command: quadchaos {shlex.join(argv)}"
    if seed is not None:
        line += f" | seed: {seed}"
    return line


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_constants(args, argv):
    c = hw_constants()
    rows = [
        ("b_star", c.b_star, "root of 2 b theta_1(b) = 1"),
        ("kappa", c.kappa, "b_star / 4 (general symmetric)"),
        ("b_star_twin", c.b_star_twin, "root of (4/sqrt 3) b sqrt(theta_2(b)) = 1"),
        ("kappa_prime", c.kappa_prime, "b_star_twin / 3 (twin bound)"),
        ("kappa_psd", c.kappa_psd, "(9 - sqrt 17) / 32 (positive semidefinite)"),
        ("a0", c.a0, "(7 - sqrt 17) / 4 (LM parameter at rho = 1)"),
        ("kappa_lm", c.kappa_lm, "1 - sqrt(3) / 2 (constant implied by classic LM)"),
    ]
    buf = io.StringIO()
    buf.write(_header(argv) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "value", "definition"])
    for name, value, what in rows:
        w.writerow([name, f"{value:.12f}", what])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _format_params(params):
    return " ".join(f"{k}={fmt(v) if isinstance(v, float) else v}" for k, v in params.items())


def cmd_bound(args, argv):
    s = spectral_summary(_load_matrix(args))
    names = _bound_list(args.bounds)
    lines = []
    for name in names:
        v = evaluate(s, args.t, name, m=args.m, eps=args.eps, kappa=args.kappa)
        lines.append(
            f"{v.name.value} t={fmt(args.t)} probability={v.probability!r} "
            f"log_value={fmt(v.log_value)} {_format_params(v.params)}".rstrip()
        )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args, argv):
    names = _bound_list(args.bounds)
    grid = parse_grid(args.t_grid)
    if args.matrix is None and args.ensemble is None:
        if args.n is None:
            raise DomainError("sweep needs --matrix, --ensemble, or --n for bounds depending on n and t/||A|| only")
        n_lo, n_hi = _n_spec(args.n)
        if n_lo != n_hi:
            raise DomainError("sweep takes a single --n")
        table = relaxed_sweep(n_lo, grid, names)
    else:
        s = spectral_summary(_load_matrix(args))
        table = bound_sweep(s, grid, names, m=args.m, eps=args.eps)
    _emit(table.to_csv(_header(argv)), args.out)
    return EXIT_OK


def cmd_msweep(args, argv):
    s = spectral_summary(_load_matrix(args))
    grid = parse_grid(args.t_grid)
    rows = m_sweep(s, grid, args.m_max)
    buf = io.StringIO()
    buf.write(_header(argv) + "\n")
    kappa = hw_constants().kappa
    if s.alpha > 0:
        buf.write(f"# t_hat_c={t_hat_c(s.n, s.alpha, kappa)!r} (kappa={kappa!r})\n")
    tr = m_transition(rows)
    if tr is not None:
        buf.write(f"# transition: m_opt = 1 at t={fmt(tr[0])}, m_opt > 1 from t={fmt(tr[1])}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"m{m}" for m in range(1, args.m_max + 1)] + ["m_opt"])
    for row in rows:
        w.writerow([fmt(row.t)] + [fmt(v) for v in row.exponents] + [row.m_opt])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_crossover(args, argv):
    n_lo, n_hi = _n_spec(args.n or "8")
    if n_lo == n_hi:
        if n_lo % 2:
            raise DomainError(f"crossover analysis needs an even n, got {n_lo}")
        ns = [n_lo]
    else:
        ns = [n for n in range(n_lo, n_hi + 1) if n % 2 == 0]
    buf = io.StringIO()
    buf.write(_header(argv) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "sign_changes", "r_n", "r_n_prime", "dominance"])
    for n in ns:
        rep = crossover_report(n)
        w.writerow([n, rep.sign_changes, fmt(rep.r_n), fmt(rep.r_n_prime), rep.dominance.value])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_validate(args, argv):
    m = _load_matrix(args)
    s = spectral_summary(m)
    if args.t_grid:
        grid = parse_grid(args.t_grid)
    else:
        top = 10.0 * s.alpha * math.sqrt(s.n) if s.alpha > 0 else 1.0
        grid = [top * (i + 1) / 20 for i in range(20)]
    names = _bound_list(args.bounds) if args.bounds else list(DEFAULT_BOUNDS)
    rows = validate_bounds(s, grid, names, n_samples=args.samples, seed=args.seed, conf=args.conf,
                           m=args.m, eps=args.eps, workers=args.workers)
    buf = io.StringIO()
    buf.write(_header(argv, args.seed) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ValidationRow.COLUMNS)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in r.as_tuple()])
    _emit(buf.getvalue(), args.out)
    failed = sum(r.verdict is Verdict.FAIL for r in rows)
    if failed:
        print(f"{failed} bound evaluation(s) FAILED validation", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_columns(args, argv):
    """Rewrite a CSV table as whitespace-separated columns for gnuplot."""
    src = open(args.input, newline="") if args.input else sys.stdin
    try:
        lines = src.read().splitlines()
    finally:
        if args.input:
            src.close()
    out = []
    header_done = False
    for line in lines:
        if line.startswith("#"):
            out.append(line)
            continue
        cells = next(csv.reader([line]))
        if not header_done:
            out.append("# " + " ".join(cells))
            header_done = True
        else:
            out.append(" ".join(c if c else "NaN" for c in cells))
    _emit("\n".join(out) + "\n", args.out)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="quadchaos", description="Tail bounds for Gaussian quadratic chaos.")
    p.add_argument("--version", action="version", version=f"quadchaos {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write output to PATH instead of stdout")
    common.add_argument("--tol-root", type=float, help="root-finding tolerance (default 1e-12)")
    common.add_argument("--tol-min", type=float, help="1-D minimization tolerance (default 1e-10)")
    common.add_argument("--tol-series", type=float, help="series truncation tolerance (default 1e-15)")
    mat = _Parser(add_help=False)
    mat.add_argument("--matrix", help="CSV matrix file, or @psd-example / @indefinite-example")
    mat.add_argument("--ensemble", choices=[e.value for e in Ensemble if e in (Ensemble.GOE_LIKE, Ensemble.WISHART_PSD)],
                     help="random matrix instead of --matrix")
    mat.add_argument("--n", help="dimension (INT), or MIN:MAX for crossover")
    mat.add_argument("--seed", type=_seed, default=0, help="unsigned 64-bit seed (default 0)")
    par = _Parser(add_help=False)
    par.add_argument("--m", type=int, default=1, help="Schatten index for LAMBDA_M / LAMBDA_M_LOOSE")
    par.add_argument("--eps", type=float, default=1.0, help="eps for LAMBDA_M_LOOSE (default 1)")

    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("constants", parents=[common], help="print the absolute constants")
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("bound", parents=[common, mat, par], help="evaluate bounds at one t")
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--bounds", default="HW", help="comma-separated bound names")
    sp.add_argument("--kappa", type=float, help="override the HW constant")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("sweep", parents=[common, mat, par], help="bounds over a t (or r) grid")
    sp.add_argument("--t-grid", required=True, help="MIN:MAX:STEPS")
    sp.add_argument("--bounds", required=True, help="comma-separated bound names")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("msweep", parents=[common, mat], help="inf_b Lambda_m over m and t")
    sp.add_argument("--t-grid", required=True, help="MIN:MAX:STEPS")
    sp.add_argument("--m-max", type=int, default=20)
    sp.set_defaults(func=cmd_msweep)

    sp = sub.add_parser("crossover", parents=[common], help="m-infinity vs chi-square crossings")
    sp.add_argument("--n", help="even INT or MIN:MAX (default 8)")
    sp.set_defaults(func=cmd_crossover)

    sp = sub.add_parser("validate", parents=[common, mat, par], help="Monte-Carlo check of the bounds")
    sp.add_argument("--t-grid", help="MIN:MAX:STEPS (default: 20 points up to 10 ||A|| sqrt(n))")
    sp.add_argument("--bounds", help="comma-separated bound names (default: all)")
    sp.add_argument("--samples", type=int, default=1_000_000, help="Monte-Carlo sample count (default 1e6)")
    sp.add_argument("--conf", type=float, default=DEFAULT_CONF, help="one-sided confidence level (default 0.999)")
    sp.add_argument("--workers", type=int, default=1, help="sampling threads; output does not depend on it")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("columns", parents=[common], help="CSV to gnuplot column layout")
    sp.add_argument("input", nargs="?", help="CSV file (default stdin)")
    sp.set_defaults(func=cmd_columns)
    return p


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    overrides = {
        k: v
        for k, v in (("root", args.tol_root), ("minimize", args.tol_min), ("series", args.tol_series))
        if v is not None
    }
    try:
        with use_tolerances(**overrides):
            return args.func(args, argv)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

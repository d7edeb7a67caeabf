"""Command-line front end: simulate, moments, verify, hist.

Exit codes: 0 success / all tests pass, 1 test failure, 2 usage error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__, batch, moments, verify
from .indexing import floor_pow

STATISTICS = ("L", "L_window", "L_hat", "tau", "rho", "R", "urn_marginal", "eta_count")


def _statistic_params(args) -> dict:
    params: dict = {}
    if args.statistic in ("L_window", "L_hat"):
        params["alpha"] = args.alpha
        params["beta"] = args.beta
    elif args.statistic == "eta_count":
        if args.a is None or args.b is None:
            raise ValueError("eta_count requires --a and --b")
        params["a"] = args.a
        params["b"] = args.b
    elif args.statistic == "urn_marginal":
        if args.k is None:
            raise ValueError("urn_marginal requires --k")
        if not 0 <= args.k <= args.n:
            raise ValueError("--k must lie in 0..n")
        params["k"] = args.k
    return params


def _metadata_lines(args, fields: tuple[str, ...]) -> list[str]:
    # thread count is deliberately omitted: output must not depend on it
    parts = [f"version={__version__}"]
    for f in fields:
        parts.append(f"{f}={getattr(args, f)}")
    return ["# kingman " + " ".join(parts)]


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def cmd_simulate(args) -> int:
    params = _statistic_params(args)
    values = batch.simulate(args.statistic, args.n, args.reps, args.seed,
                            threads=args.threads, **params)
    lines = _metadata_lines(args, ("seed", "n", "reps", "statistic"))
    for key, val in sorted(params.items()):
        lines.append(f"# {key}={val}")
    lines.append("rep,n,statistic,value")
    for r, v in enumerate(values):
        lines.append(f"{r},{args.n},{args.statistic},{float(v)!r}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


_SCALAR_QUANTITIES = {
    "e_U": ("k",), "cov_U": ("k", "l"), "e_X": ("k",), "var_X": ("k",),
    "cov_X": ("k", "l"), "e_T": ("k",), "var_T": ("k",), "fu_li_var": (),
    "rho_cdf": ("k",), "e_L_window": ("alpha", "beta"),
}


def _evaluate_quantity(args) -> tuple[object, float]:
    q = args.quantity
    if q in _SCALAR_QUANTITIES:
        fn = getattr(moments, q)
        missing = [f for f in _SCALAR_QUANTITIES[q]
                   if getattr(args, f, None) is None]
        if missing:
            raise ValueError(f"{q} requires --" + ", --".join(missing))
        val = fn(args.n, *(getattr(args, f) for f in _SCALAR_QUANTITIES[q]))
        return val, float(val)
    if q in ("e_hat", "var_hat"):
        m = args.m
        if m is None and args.alpha is not None:
            m = floor_pow(args.n, args.alpha)
        if m is None:
            raise ValueError(f"{q} requires --m or --alpha")
        val = getattr(moments, q)(args.n, m)
        return val, float(val)
    if q == "var_L_window_asymptotic":
        v = moments.var_L_window_asymptotic(args.n, args.alpha, args.beta)
        return v, v
    if q == "var_L_window_exact":
        v = moments.var_L_window_exact(args.n, args.alpha, args.beta)
        return v, v
    raise ValueError(f"unknown quantity {args.quantity!r}")


def cmd_moments(args) -> int:
    val, fval = _evaluate_quantity(args)
    if args.format == "csv":
        if isinstance(val, Fraction):
            num, den = str(val.numerator), str(val.denominator)
        else:
            num, den = "", ""
        lines = _metadata_lines(args, ("quantity", "n"))
        lines.append("quantity,n,k,l,alpha,beta,numerator,denominator,float_value")
        row = [args.quantity, str(args.n)]
        for f in ("k", "l", "alpha", "beta"):
            v = getattr(args, f, None)
            row.append("" if v is None else str(v))
        row += [num, den, repr(fval)]
        lines.append(",".join(row))
        _write_text(args.out, "\n".join(lines) + "\n")
    else:
        if isinstance(val, Fraction):
            text = f"{val.numerator}/{val.denominator}, {fval!r}\n"
        else:
            text = f"{fval!r} (asymptotic/numeric)\n"
        _write_text(args.out, text)
    return 0


def cmd_verify(args) -> int:
    reports = verify.run_suite(args.suite, seed=args.seed, threads=args.threads)
    lines = [r.to_json() for r in reports]
    passed = sum(r.passed for r in reports)
    total = len(reports)
    summary = f"PASS {passed}/{total}" if passed == total else f"FAIL {total - passed}/{total}"
    _write_text(args.out, "\n".join(lines + [summary]) + "\n")
    return 0 if passed == total else 1


def _svg_histogram(edges: np.ndarray, counts: np.ndarray, title: str) -> str:
    width, height = 640, 400
    ml, mr, mt, mb = 60, 20, 30, 50
    plot_w, plot_h = width - ml - mr, height - mt - mb
    cmax = max(int(counts.max()), 1)
    lo, hi = float(edges[0]), float(edges[-1])
    span = hi - lo or 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{ml}" y1="{mt + plot_h}" x2="{ml + plot_w}" y2="{mt + plot_h}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + plot_h}" stroke="black"/>',
    ]
    for i, c in enumerate(counts):
        x0 = ml + plot_w * (edges[i] - lo) / span
        x1 = ml + plot_w * (edges[i + 1] - lo) / span
        h = plot_h * int(c) / cmax
        parts.append(
            f'<rect x="{x0:.2f}" y="{mt + plot_h - h:.2f}" width="{x1 - x0:.2f}" '
            f'height="{h:.2f}" fill="steelblue" stroke="none"/>')
    for frac in (0.0, 0.5, 1.0):
        x = ml + plot_w * frac
        parts.append(f'<text x="{x:.1f}" y="{mt + plot_h + 18}" text-anchor="middle" '
                     f'font-size="11">{lo + span * frac:.3g}</text>')
        y = mt + plot_h * (1 - frac)
        parts.append(f'<text x="{ml - 6}" y="{y + 4:.1f}" text-anchor="end" '
                     f'font-size="11">{cmax * frac:.0f}</text>')
    parts.append(f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle" '
                 f'font-size="12">value</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_hist(args) -> int:
    if args.bins < 2:
        raise ValueError("need at least 2 bins")
    if args.reps < 1:
        raise ValueError("need at least one replicate")
    params = _statistic_params(args)
    values = batch.simulate(args.statistic, args.n, args.reps, args.seed,
                            threads=args.threads, **params)
    counts, edges = np.histogram(values, bins=args.bins,
                                 range=(float(values.min()), float(values.max())))
    if args.format == "svg":
        title = f"{args.statistic} n={args.n} reps={args.reps} seed={args.seed}"
        _write_text(args.out, _svg_histogram(edges, counts, title))
        return 0
    lines = _metadata_lines(args, ("seed", "n", "reps", "statistic", "bins"))
    lines.append("bin_lo,bin_hi,count")
    for i, c in enumerate(counts):
        lines.append(f"{float(edges[i])!r},{float(edges[i + 1])!r},{int(c)}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _default_threads() -> int:
    env = os.environ.get("KINGMAN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kingman",
        description="External branch lengths of Kingman's coalescent: "
                    "simulation, exact moments, verification, histograms.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_stat=True):
        p.add_argument("--n", type=int, default=50, help="sample size (leaves)")
        p.add_argument("--reps", type=int, default=10_000, help="replicates")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--threads", type=int, default=_default_threads())
        if with_stat:
            p.add_argument("--statistic", choices=STATISTICS, default="L")
            p.add_argument("--alpha", type=float, default=0.0)
            p.add_argument("--beta", type=float, default=1.0)
            p.add_argument("--a", type=float, default=None, help="interval lower end")
            p.add_argument("--b", type=float, default=None, help="interval upper end")
            p.add_argument("--k", type=int, default=None, help="marginal step index")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p_sim = sub.add_parser("simulate", help="simulate a statistic to CSV")
    common(p_sim)
    p_sim.add_argument("--format", choices=("csv",), default="csv")
    p_sim.set_defaults(func=cmd_simulate)

    p_mom = sub.add_parser("moments", help="print exact moments")
    p_mom.add_argument("--quantity", required=True)
    p_mom.add_argument("--n", type=int, required=True)
    p_mom.add_argument("--k", type=int, default=None)
    p_mom.add_argument("--l", type=int, default=None)
    p_mom.add_argument("--m", type=int, default=None)
    p_mom.add_argument("--alpha", type=float, default=None)
    p_mom.add_argument("--beta", type=float, default=None)
    p_mom.add_argument("--format", choices=("plain", "csv"), default="plain")
    p_mom.add_argument("--out", default=None)
    p_mom.add_argument("--quantity-help", action="store_true")
    p_mom.set_defaults(func=cmd_moments)

    p_ver = sub.add_parser("verify", help="run acceptance suites")
    p_ver.add_argument("--suite", choices=("exact", "statistical", "all"), default="all")
    p_ver.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
    p_ver.add_argument("--threads", type=int, default=_default_threads())
    p_ver.add_argument("--out", default=None)
    p_ver.set_defaults(func=cmd_verify)

    p_hist = sub.add_parser("hist", help="histogram of a simulated statistic")
    common(p_hist)
    p_hist.add_argument("--bins", type=int, default=60)
    p_hist.add_argument("--format", choices=("csv", "svg"), default="csv")
    p_hist.set_defaults(func=cmd_hist)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 numerical diagnostic.
All floats are written with 15 significant digits; output order is deterministic.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from .errors import DiagnosticError, DomainError, InvariantViolation, PreconditionError

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_DIAG = 0, 1, 2, 3
THREADS_ENV = "THOMPSON_SPECTRA_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def eps_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad eps ladder {text!r}") from exc
    if len(vals) < 3 or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("eps ladder needs at least three positive values")
    return vals


def plain(obj):
    """JSON-ready copy with floats rounded to 15 significant digits."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(f"{x:.15g}") if math.isfinite(x) else None
    if isinstance(obj, complex):
        return [plain(obj.real), plain(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [plain(x) for x in obj]
    return str(obj)


def fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.15g}"
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _emit(args, payload: dict, header, rows):
    text = _csv(header, rows) if args.format == "csv" else json.dumps(plain(payload), indent=1, sort_keys=True) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_moments(args) -> int:
    from .graphs import schreier_ball
    from .series import moments_bruteforce, upsilon_series

    radius = args.radius if args.radius is not None else -(-args.order // 2)
    ball = schreier_ball(args.alpha, args.beta, "1/2", radius)
    brute = moments_bruteforce(ball, args.order).values
    _, p = upsilon_series(args.alpha, args.beta, args.order)
    rows = [(n, brute[n], p[n], brute[n] == p[n]) for n in range(args.order + 1)]
    verdict = "match" if all(r[3] for r in rows) else "mismatch"
    payload = {
        "alpha": args.alpha, "beta": args.beta, "order": args.order, "radius": radius, "verdict": verdict,
        "rows": [{"n": n, "bruteforce": b, "series": s, "match": m} for n, b, s, m in rows],
    }
    _emit(args, payload, ["n", "bruteforce", "series", "match"], rows)
    print(f"verdict: {verdict}", file=sys.stderr)
    return EXIT_OK if verdict == "match" else EXIT_VERIFY


def cmd_density(args) -> int:
    from .stieltjes import density_curve

    a, b = float(args.alpha), float(args.beta)
    half = args.zmax if args.zmax is not None else 1.25 * 2 * (abs(a) + abs(b))
    grid = np.linspace(-half, half, args.grid)
    curve = density_curve(a, b, grid, eps_ladder=args.eps, check_routes=not args.no_check)
    payload = curve.to_json()
    _emit(args, payload, ["z", "density", "re_v", "im_v", "branch"], list(curve.rows()))
    return EXIT_OK


def cmd_support(args) -> int:
    from .stieltjes import support

    s = support(float(args.alpha), float(args.beta))
    rows = [("interval", lo, hi, "") for lo, hi in s.intervals] + [("atom", z, z, m) for z, m in s.atoms]
    payload = {"alpha": args.alpha, "beta": args.beta, **s.to_json()}
    _emit(args, payload, ["kind", "lo", "hi", "mass"], rows)
    inexact = [c for c in s.endpoint_certificates if not c.get("exact", True)]
    return EXIT_DIAG if inexact else EXIT_OK


def cmd_asymptotics(args) -> int:
    from .asymptotics import edge_constants, integrated_density_edge, return_probability_fit, root_selection_check

    const = edge_constants()
    sel = root_selection_check(max(30, args.order))
    fit = return_probability_fit(args.n_max)
    s_grid = np.logspace(math.log10(args.s_min), math.log10(args.s_max), 9)
    edge = integrated_density_edge(s_grid)
    payload = {"constants": const.as_dict(), "root_selection": sel, "moment_fit": fit.as_dict(), "edge_fit": edge.as_dict()}
    rows = [(k, v) for k, v in const.as_dict().items()]
    rows += [("moment_fit." + k, v) for k, v in fit.as_dict().items() if not isinstance(v, (list, tuple))]
    rows += [("edge_fit." + k, v) for k, v in edge.as_dict().items() if not isinstance(v, (list, tuple))]
    _emit(args, payload, ["quantity", "value"], rows)
    for note in fit.notes + edge.notes:
        print(f"flag: {note}", file=sys.stderr)
    return EXIT_VERIFY if fit.flagged or edge.flagged else EXIT_OK


def cmd_finite(args) -> int:
    from .finite_spectra import ball_spectrum_flow, eig, vertex_measure
    from .graphs import finite_examples

    if args.family:
        radii = list(range(0, args.radius + 1, max(1, args.radius // 4))) if args.radius else [0]
        flow = ball_spectrum_flow(args.family, [(args.alpha, args.beta)], radii)
        payload = {"family": args.family, "rows": [dict(r.__dict__) for r in flow]}
        rows = [(r.radius, r.size, r.max_abs_eigenvalue, r.hausdorff, r.max_root_atom) for r in flow]
        _emit(args, payload, ["radius", "size", "max_abs_eigenvalue", "hausdorff", "max_root_atom"], rows)
        return EXIT_OK
    g = finite_examples(args.example)
    d = eig(g)
    measures = {str(lab): vertex_measure(d, lab) for lab in g.labels}
    payload = {
        "example": args.example,
        "eigenvalues": d.eigenvalues,
        "distinct": d.distinct(),
        "measures": {k: [[x, m] for x, m in mu.atoms] for k, mu in measures.items()},
    }
    rows = [(k, x, m) for k, mu in measures.items() for x, m in mu.atoms]
    _emit(args, payload, ["vertex", "eigenvalue", "mass"], rows)
    return EXIT_OK


def cmd_appendix(args) -> int:
    from .stieltjes import appendix_series_check, appendix_spectra

    rep = appendix_spectra()
    rep["series_match_bruteforce"] = appendix_series_check(args.order)
    rows = [
        ("gamma_n", -2.0, 2.0, ""),
        ("gamma_loops", -2.0, 2.0, ""),
        ("gamma_loops_atom", rep["gamma_loops"]["pole"], rep["gamma_loops"]["pole"], rep["gamma_loops"]["mass_exact"]),
        ("gamma_tilde", *rep["gamma_tilde"]["intervals"][0], ""),
    ]
    _emit(args, rep, ["graph", "lo", "hi", "mass"], rows)
    print(rep["conclusion"], file=sys.stderr if args.out == "-" else sys.stdout)
    ok = (
        rep["gamma_loops"]["F_at_4_17"] == 1
        and not rep["pole_in_gamma_tilde_spectrum"]
        and rep["series_match_bruteforce"]
        and rep["gamma_tilde"]["real_outside"]
        and rep["gamma_tilde"]["complex_inside"]
    )
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thompson-spectra", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, weights=True):
        if weights:
            p.add_argument("--alpha", type=rational, default=Fraction(1, 4), help="weight of a, a^-1 (p/q or decimal)")
            p.add_argument("--beta", type=rational, default=Fraction(1, 4), help="weight of b, b^-1")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("moments", help="brute-force moments next to the cubic-series coefficients")
    common(p)
    p.add_argument("--order", type=int, default=30)
    p.add_argument("--radius", type=int, default=None, help="ball radius (default ceil(order/2))")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("density", help="spectral density of the measure at 1/2 on a grid")
    common(p)
    p.add_argument("--grid", type=int, default=2001)
    p.add_argument("--zmax", type=float, default=None)
    p.add_argument("--eps", type=eps_list, default=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6))
    p.add_argument("--no-check", action="store_true", help="skip the epsilon-limit route check")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("support", help="support intervals and atoms")
    common(p)
    p.set_defaults(func=cmd_support)

    p = sub.add_parser("asymptotics", help="edge constants and asymptotic fits (alpha = beta = 1/4)")
    common(p, weights=False)
    p.add_argument("--order", type=int, default=60)
    p.add_argument("--n-max", type=int, default=2000)
    p.add_argument("--s-min", type=float, default=1e-3)
    p.add_argument("--s-max", type=float, default=1e-1)
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("finite", help="eigenvalues and vertex measures of finite graphs")
    common(p)
    p.add_argument("--example", choices=("path5", "hanoi2"), default="path5")
    p.add_argument("--family", choices=("upsilon", "delta"), default=None, help="ball family instead of an example")
    p.add_argument("--radius", type=int, default=8)
    p.set_defaults(func=cmd_finite)

    p = sub.add_parser("appendix", help="spectra of the half-line graphs and the tree with rays")
    common(p, weights=False)
    p.add_argument("--order", type=int, default=20)
    p.set_defaults(func=cmd_appendix)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "grid", 2) < 2 or getattr(args, "order", 0) < 0:
            raise UsageError("grid must be >= 2 and order >= 0")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (DomainError, PreconditionError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except DiagnosticError as exc:
        print(f"numerical diagnostic: {exc}", file=sys.stderr)
        return EXIT_DIAG

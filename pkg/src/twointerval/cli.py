"""Command-line front end: spectrum, classify, curves, evolve.

Exit codes: 0 success, 2 invalid parameters, 3 solver failure.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import sys
from fractions import Fraction

import numpy as np

from . import evolution as ev
from .core import BoundaryParams, IntervalPair
from .errors import DomainError, SolverError, StructuralError, WrongPathError
from .pairs import (
    INT_TOL,
    build_char_polynomial,
    classify_pair,
    corollary_tiling_set,
    roots_on_unit_circle,
    spectral_set_criterion,
    tiles_with,
)
from .spectrum import fractional_orbit, h_function, spectrum

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3


# ---------------------------------------------------------------- number parsing

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": math.sqrt, "cos": math.cos, "sin": math.sin, "acos": math.acos}
_NAMES = {"pi": math.pi}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        return _FUNCS[node.func.id](*[float(_eval(a)) for a in node.args])
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    raise ValueError("unsupported expression")


def number(text: str):
    """Rational literals ('2', '-0.125', '5/2') become Fractions; expressions like 'sqrt(2)/2' floats."""
    try:
        return Fraction(text.strip())
    except ValueError:
        pass
    try:
        v = float(_eval(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return v


def real(text: str) -> float:
    return float(number(text))


def int_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}")
    a, b = int(lo), int(hi)
    if b < a:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return range(a, b + 1)


def real_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected lo..hi, got {text!r}")
    a, b = real(lo), real(hi)
    if not b > a:
        raise argparse.ArgumentTypeError(f"empty window {text!r}")
    return a, b


def real_list(text: str) -> list[float]:
    return [real(x) for x in text.split(",") if x.strip()]


def int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


# ---------------------------------------------------------------- serialization


def _fmt(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return json.dumps(f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        s = format(x, ".17g")
        # keep a float marker so a re-parse yields a float again
        return s if any(c in s for c in ".en") else s + ".0"
    if isinstance(x, (complex, np.complexfloating)):
        return _fmt({"re": x.real, "im": x.imag})
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj) -> str:
    """Canonical JSON: insertion-ordered keys, floats at 17 significant digits."""
    return _fmt(obj) + "\n"


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def svg_plot(series: list[tuple[str, np.ndarray, np.ndarray]], xlabel: str, ylabel: str,
             markers: bool = False, width: int = 640, height: int = 400) -> str:
    """Static polylines with axis ticks."""
    pad = 50
    xs = np.concatenate([np.asarray(s[1], float) for s in series]) if series else np.array([0.0, 1.0])
    ys = np.concatenate([np.asarray(s[2], float) for s in series]) if series else np.array([0.0, 1.0])
    x0, x1 = float(np.nanmin(xs)), float(np.nanmax(xs))
    y0, y1 = float(np.nanmin(ys)), float(np.nanmax(ys))
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def X(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def Y(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>']
    for v in np.linspace(x0, x1, 5):
        out.append(f'<text x="{X(v):.1f}" y="{height - pad + 16}" font-size="10" text-anchor="middle">{v:.3g}</text>')
    for v in np.linspace(y0, y1, 5):
        out.append(f'<text x="{pad - 6}" y="{Y(v) + 3:.1f}" font-size="10" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{width / 2}" y="{height - 10}" font-size="12" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})" '
               f'text-anchor="middle">{ylabel}</text>')
    for i, (name, sx, sy) in enumerate(series):
        col = colors[i % len(colors)]
        if markers:
            for a, b in zip(sx, sy):
                out.append(f'<circle cx="{X(a):.2f}" cy="{Y(b):.2f}" r="1.5" fill="{col}"/>')
        else:
            pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(sx, sy) if np.isfinite(b))
            out.append(f'<polyline fill="none" stroke="{col}" points="{pts}"><title>{name}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- config


def _params(args) -> BoundaryParams:
    return BoundaryParams(float(args.w), float(args.phi), float(args.psi), float(args.theta))


def _geometry(args) -> IntervalPair:
    alpha = args.alpha
    if args.length_rational is not None:
        lr = args.length_rational
        beta = args.beta if args.beta is not None else alpha + lr
        return IntervalPair(alpha, beta, length_ratio=lr)
    if args.beta is None:
        raise DomainError("--beta is required unless --length-rational is given")
    if args.length_irrational:
        return IntervalPair(float(alpha), float(args.beta), irrational=True)
    return IntervalPair(alpha, args.beta)


def _config(args) -> dict:
    keys = ["subcommand", "w", "phi", "psi", "theta", "alpha", "beta", "length_rational",
            "length_irrational", "branches", "window", "tol", "format"]
    cfg = {}
    for k in keys + [k for k in vars(args) if k not in keys and k not in ("func", "out")]:
        if not hasattr(args, k):
            continue
        v = getattr(args, k)
        if isinstance(v, range):
            v = [v.start, v.stop - 1]
        elif isinstance(v, tuple):
            v = list(v)
        cfg[k] = v
    return cfg


def _emit(args, text: str):
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------- subcommands


def cmd_spectrum(args) -> int:
    p, d = _params(args), _geometry(args)
    if args.window is not None and args.branches is not None:
        raise DomainError("give either --window or --branches, not both")
    if args.window is None and args.branches is None:
        args.branches = range(-10, 11)
    sl = spectrum(p, d, window=args.window, branches=args.branches)
    header = ["n", "lambda", "multiplicity", "re_a", "im_a", "residual"]
    rows = [[x.n, float(x.lam), x.multiplicity, float(complex(x.coeff_a).real),
             float(complex(x.coeff_a).imag), float(x.residual)] for x in sl]
    if args.format == "csv":
        _emit(args, write_csv(header, rows))
    elif args.format == "svg":
        lam = np.array([r[1] for r in rows])
        _emit(args, svg_plot([("spectrum", lam, np.array([r[2] for r in rows], float))],
                             "lambda", "multiplicity", markers=True))
    else:
        result = {"regime": p.regime, "structure": sl.structure, "lattice": sl.lattice,
                  "rows": [dict(zip(header, r)) for r in rows]}
        _emit(args, dumps({"config": _config(args), "result": result}))
    return EXIT_OK


def _conditions(conds):
    return [{"id": c.id, "satisfied": c.satisfied, "residual": c.residual, "exact": c.exact} for c in conds]


def cmd_classify(args) -> int:
    d = _geometry(args)
    tol = args.tol if args.tol is not None else INT_TOL
    sv = spectral_set_criterion(d, tol=tol)
    result: dict = {}
    if not args.set_only:
        p = _params(args)
        v = classify_pair(p, d, tol=tol)
        result["pair"] = {"regime": v.regime, "isSpectralOperator": v.is_spectral_operator,
                          "conditions": _conditions(v.conditions),
                          "failing": v.failing(), "spectrumDescription": v.spectrum_description}
    result["spectralSet"] = {"isSpectralSet": sv.is_spectral_set, "reason": sv.reason,
                             "conditions": _conditions(sv.conditions)}
    ts = corollary_tiling_set(d)
    if ts is not None:
        offsets, period = ts
        tr = tiles_with(d, offsets, period)
        result["tiling"] = {"offsets": offsets, "period": period, "tiles": tr.tiles, "witness": tr.witness}
    else:
        result["tiling"] = None
    try:
        poly = build_char_polynomial(d)
    except DomainError:
        poly = None
    if poly is not None:
        ang = roots_on_unit_circle(poly, tol=min(tol * 10, 1e-6) if args.tol is not None else 1e-8)
        result["charPolynomial"] = {"coefficients": list(poly.coefficients), "factored": poly.factored(),
                                    "rootsOnCircle": len(ang), "angles": [float(a) for a in ang]}
    if args.format == "csv":
        rows = [[s, c["id"], c["satisfied"], c["residual"]]
                for s, block in (("pair", result.get("pair")), ("set", result["spectralSet"])) if block
                for c in block["conditions"]]
        _emit(args, write_csv(["scope", "condition", "satisfied", "residual"], rows))
    else:
        _emit(args, dumps({"config": _config(args), "result": result}))
    return EXIT_OK


def _lambda_trace(p, d, n, ws):
    out = []
    for w in ws:
        out.append(spectrum(p.with_(w=float(w)), d, branches=range(n, n + 1)).entries[0].lam)
    return np.array(out)


def cmd_curves(args) -> int:
    d = _geometry(args)
    base = BoundaryParams(0.5, float(args.phi), float(args.psi), float(args.theta))
    series, rows, meta = [], [], {}
    if args.kind == "h":
        lo, hi = args.t_range
        t = np.linspace(lo, hi, args.samples)
        for w in args.ws:
            p = base.with_(w=w)
            h = np.asarray(h_function(p, d, t))
            series.append((f"w={w:g}", t, h))
            rows += [[float(w), float(a), float(b)] for a, b in zip(t, h)]
        # the atan2 unwinding points of the lift: phi + t in 1/2 + Z
        cuts = [k + 0.5 - base.phi for k in range(math.ceil(lo + base.phi - 0.5), math.floor(hi + base.phi - 0.5) + 1)]
        meta = {"branchCuts": cuts, "monotone": [bool(np.all(np.diff(s[2]) > 0)) for s in series]}
        header, xl, yl = ["w", "t", "h"], "t", "h(t)"
    elif args.kind == "lambda-w":
        # open interval: the regime endpoints are approached, not hit, so traces stay continuous
        ws = np.linspace(0.0, 1.0, args.samples)
        ws = np.clip(ws, args.w_margin, 1.0 - args.w_margin)
        for n in args.branches:
            lam = _lambda_trace(base, d, n, ws)
            series.append((f"n={n}", ws, lam))
            rows += [[n, float(w), float(x)] for w, x in zip(ws, lam)]
        meta = {"wMargin": args.w_margin}
        header, xl, yl = ["n", "w", "lambda"], "w", "lambda_n(w)"
    else:
        p = _params(args)
        pts = {}
        for k, c in enumerate(args.counts):
            fr = fractional_orbit(p, d, c)
            pts[c] = fr
            series.append((f"count={c}", fr, np.full(len(fr), float(k))))
            rows += [[c, i, float(x)] for i, x in enumerate(fr)]
        meta = {"counts": args.counts}
        header, xl, yl = ["count", "index", "frac"], "[lambda_n]", "row"
    if args.format == "csv":
        _emit(args, write_csv(header, rows))
    elif args.format == "svg":
        _emit(args, svg_plot(series, xl, yl, markers=args.kind == "orbit"))
    else:
        result = {"kind": args.kind, "meta": meta, "columns": header, "rows": rows}
        _emit(args, dumps({"config": _config(args), "result": result}))
    return EXIT_OK


def cmd_evolve(args) -> int:
    p, d = _params(args), _geometry(args)
    bump = ev.Bump(args.bump_center, args.bump_width)
    lo, hi = bump.support
    if not (0.0 < lo and hi < 1.0):
        raise DomainError(f"bump support [{lo}, {hi}] must lie inside (0, 1)")
    s0 = ev.expand(bump, p, d, args.truncation, points_per_unit=args.points_per_unit)
    g0 = ev.GridFunction.sample(bump, d, args.points_per_unit)
    total = g0.norm() ** 2
    summary = {"truncation": args.truncation, "residual": s0.residual, "residualSup": s0.residual_sup,
               "steps": []}
    snaps, rows, series = [], [], []
    for t in args.times:
        st = ev.evolve(s0, t)
        g = ev.reconstruct(st, args.points_per_unit)
        m1 = ev.window_mass(g, 1, 0.0, 1.0) / total
        m2 = ev.window_mass(g, 2, d.a, d.b) / total
        summary["steps"].append({"t": float(t), "norm": st.norm(), "gridNorm": g.norm(),
                                 "boundaryResidual": st.boundary_residual(),
                                 "massI1": m1, "massAtAlpha": m2})
        for k, (x, v) in enumerate(((g.x1, g.v1), (g.x2, g.v2))):
            rows += [[float(t), k + 1, float(a), float(b.real), float(b.imag), float(abs(b) ** 2)]
                     for a, b in zip(x, v)]
        snaps.append({"t": float(t), "x1": g.x1, "re1": g.v1.real, "im1": g.v1.imag,
                      "x2": g.x2, "re2": g.v2.real, "im2": g.v2.imag})
        series.append((f"t={t:g}", np.concatenate([g.x1, g.x2]), np.abs(np.concatenate([g.v1, g.v2])) ** 2))
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            fh.write(dumps({"config": _config(args), "result": summary}))
    if args.format == "csv":
        _emit(args, write_csv(["t", "interval", "x", "re", "im", "abs2"], rows))
    elif args.format == "svg":
        _emit(args, svg_plot(series, "x", "|f|^2"))
    else:
        _emit(args, dumps({"config": _config(args), "result": {"summary": summary, "snapshots": snaps}}))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_geometry(sp, need_w=True):
    if need_w:
        sp.add_argument("--w", type=real, required=True, help="coupling weight in [0, 1]")
    sp.add_argument("--phi", type=real, default=0.0, help="phase (cycles)")
    sp.add_argument("--psi", type=real, default=0.0, help="phase (cycles)")
    sp.add_argument("--theta", type=real, default=0.0, help="phase (cycles)")
    sp.add_argument("--alpha", type=number, required=True)
    sp.add_argument("--beta", type=number, default=None)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--length-rational", type=Fraction, default=None, metavar="P/Q",
                   help="exact beta - alpha; enables exact-mode classification")
    g.add_argument("--length-irrational", action="store_true", help="declare beta - alpha irrational")
    sp.add_argument("--tol", type=float, default=None, help="integrality tolerance override")
    sp.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twointerval", description="Momentum operators on two intervals.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    s = sub.add_parser("spectrum", help="eigenvalues and eigenfunction amplitudes")
    _add_geometry(s)
    s.add_argument("--branches", type=int_range, default=None, metavar="A..B")
    s.add_argument("--window", type=real_range, default=None, metavar="LO..HI")
    s.add_argument("--format", choices=["json", "csv", "svg"], default="csv")
    s.set_defaults(func=cmd_spectrum)

    c = sub.add_parser("classify", help="spectral-pair and spectral-set verdicts")
    _add_geometry(c, need_w=False)
    c.add_argument("--w", type=real, default=None)
    c.add_argument("--set-only", action="store_true", help="only the spectral-set criterion")
    c.add_argument("--format", choices=["json", "csv"], default="json")
    c.set_defaults(func=cmd_classify)

    v = sub.add_parser("curves", help="h-curves, lambda_n(w) traces and fractional orbits")
    _add_geometry(v, need_w=False)
    v.add_argument("--w", type=real, default=0.5)
    v.add_argument("--kind", choices=["h", "lambda-w", "orbit"], default="h")
    v.add_argument("--ws", type=real_list, default=[0.1, 0.5, 0.9], help="w values for h-curves")
    v.add_argument("--t-range", type=real_range, default=(-1.0, 1.0), metavar="LO..HI")
    v.add_argument("--samples", type=int, default=401)
    v.add_argument("--branches", type=int_range, default=range(-4, 5), metavar="A..B")
    v.add_argument("--w-margin", type=float, default=1e-9)
    v.add_argument("--counts", type=int_list, default=[1, 2, 4, 8, 16])
    v.add_argument("--format", choices=["json", "csv", "svg"], default="csv")
    v.set_defaults(func=cmd_curves)

    e = sub.add_parser("evolve", help="evolve a bump and emit snapshots")
    _add_geometry(e)
    e.add_argument("--bump-center", type=real, default=0.5)
    e.add_argument("--bump-width", type=real, default=0.2, help="half-width of the bump")
    e.add_argument("--times", type=real_list, default=[0.0, 0.1, 0.2])
    e.add_argument("--truncation", type=int, default=128, help="branches -N..N")
    e.add_argument("--points-per-unit", type=int, default=1024)
    e.add_argument("--summary", default=None, help="also write the summary JSON here")
    e.add_argument("--format", choices=["json", "csv", "svg"], default="csv")
    e.set_defaults(func=cmd_evolve)
    return ap


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Turn '--branches -4..4' into '--branches=-4..4' so argparse does not read an option."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if (a.startswith("--") and "=" not in a and i + 1 < len(argv)
                and argv[i + 1].startswith("-") and not argv[i + 1].startswith("--")):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    ap = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = ap.parse_args(_glue_negative_values(argv))
    if getattr(args, "w", 0.0) is None and args.subcommand == "classify" and not args.set_only:
        ap.error("classify needs --w unless --set-only is given")
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"twointerval: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (DomainError, WrongPathError, StructuralError, ValueError) as exc:
        print(f"twointerval: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Every subcommand writes CSV or JSON to ``--output`` (or to
``$DOUBLING_SPECTRUM_OUTDIR/<command>.<format>`` when that variable is set,
else standard output).  Files are written to a temporary name and renamed,
so a crash never leaves a half-written file.  Exit status: 0 on success,
1 on a mathematical failure (empty subsystem, window violation, ...), 2 on
bad arguments.

CSV columns
  extremes    c, period, word, average, is_singular, is_argmax, is_argmin, arc_length
  gelfond     c, max_period, beta, gamma, argmax, arc_length, sturmian
  mcstar      n, q, partial_avg
  binding     rho, p, K0, lower_bound, rho0, bind2_holds
  montecarlo  sample, average
  modulus     delta, omega1, ratio
  covariance  j, k, cov, closed_form
  pressure    t, p_lower, p_upper
  spectrum    alpha, d_lower, d_upper, converged
  cover-check i, j, max_per_J, total, measure, bound, passed
  validate    check, value, expected, passed
  polynomial  n, N, direct_abs, product_abs, rel_err
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
import tempfile
from fractions import Fraction
from typing import Any, Callable

from . import covers, dyadic, orbits, singularity, thermo
from .dyadic import BinaryFixed, Potential
from .errors import DomainError, ParseError

SCHEMA = "doubling-spectrum/v1"
DEFAULT_SEED = 20240229
DEFAULT_RANDOM_WIDTH = 2064
OUTDIR_ENV = "DOUBLING_SPECTRUM_OUTDIR"


# -- parsing ---------------------------------------------------------------

def parse_c(text: str, width: int | None = None, seed: int = DEFAULT_SEED):
    """'p/q' or a decimal as an exact Fraction in [0, 1); 'random' as BinaryFixed."""
    text = text.strip()
    if text == "random":
        w = width or DEFAULT_RANDOM_WIDTH
        return BinaryFixed.random(w, random.Random(seed))
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"cannot parse c = {text!r}") from exc
    if not 0 <= value < 1:
        raise ParseError(f"c = {text} is not in [0, 1)")
    return value


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a number: {text!r}") from exc


def parse_list(text: str) -> list[Fraction]:
    return [parse_fraction(s) for s in text.split(",") if s.strip()]


def parse_grid(text: str) -> list[float]:
    """'a:b:step' inclusive range, or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParseError("grid must be a:b:step")
        a, b, h = (parse_fraction(p) for p in parts)
        if h <= 0 or b < a:
            raise ParseError("grid needs step > 0 and a <= b")
        n = int((b - a) / h)
        return [float(a + k * h) for k in range(n + 1)]
    return [float(x) for x in parse_list(text)]


# -- encoding --------------------------------------------------------------

def _jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return {"num": x.numerator, "den": x.denominator, "decimal": repr(float(x))}
    if isinstance(x, BinaryFixed):
        return {"bits": format(x.bits, "x"), "width": x.width, "decimal": repr(float(x))}
    if isinstance(x, float):
        if math.isinf(x):
            return "-inf" if x < 0 else "inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


def _cell(x: Any) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, BinaryFixed):
        return repr(float(x))
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    return str(x)


def _render(fmt: str, header: list[str], rows: list[list], meta: dict) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()
    doc = {"schema": SCHEMA, **meta, "rows": [dict(zip(header, r)) for r in rows]}
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, header, rows, meta) -> None:
    text = _render(args.format, header, rows, meta)
    path = args.output
    if path is None and os.environ.get(OUTDIR_ENV):
        path = os.path.join(os.environ[OUTDIR_ENV], f"{args.command}.{args.format}")
    if path is None:
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


# -- commands --------------------------------------------------------------

def _potential(args) -> Potential:
    return Potential(parse_c(args.c, getattr(args, "width", None), args.seed))


def cmd_extremes(args):
    P = _potential(args)
    rep = orbits.extremes_scan(P, args.max_period)
    arc = None
    if rep.beta_P != dyadic.NEG_INFINITY:
        arc = orbits.minimal_arc(rep.argmax.points).length
    rows = []
    for r in rep.records:
        rows.append([P.c, r.orbit.period, r.orbit.word, r.average, r.is_singular,
                     r.orbit == rep.argmax, r.orbit == rep.argmin,
                     orbits.minimal_arc(r.orbit.points).length])
    header = ["c", "period", "word", "average", "is_singular", "is_argmax", "is_argmin", "arc_length"]
    meta = {"c": P.c, "maxPeriod": args.max_period, "alpha": rep.alpha_P, "beta": rep.beta_P,
            "argmin": rep.argmin.word, "argmax": rep.argmax.word, "argmaxArc": arc}
    _emit(args, header, rows, meta)


def cmd_gelfond(args):
    P = _potential(args)
    rep = orbits.extremes_scan(P, args.max_period)
    if rep.beta_P == dyadic.NEG_INFINITY:
        raise DomainError("every scanned orbit is singular")
    gamma = 1 + rep.beta_P / dyadic.LOG2
    ok, arc = orbits.sturmian_arc_check(rep)
    row = [P.c, args.max_period, rep.beta_P, gamma, rep.argmax.word, arc.length, ok]
    _emit(args, ["c", "max_period", "beta", "gamma", "argmax", "arc_length", "sturmian"], [row],
          {"c": P.c, "gamma": gamma})


def cmd_mcstar(args):
    P = _potential(args)
    tr = singularity.mcstar_trace(P, args.N, getattr(args, "width", None))
    rows = [[n + 1, tr.q[n], tr.partial_avg[n]] for n in range(len(tr.partial_avg))]
    _emit(args, ["n", "q", "partial_avg"], rows,
          {"c": P.c, "N": args.N, "status": tr.status, "mStar": tr.m_star_estimate,
           "terminatedAt": tr.terminated_at})


def cmd_binding(args):
    P = _potential(args)
    rep = singularity.binding_period(P, parse_fraction(args.rho), args.K0, args.horizon)
    row = [rep.rho, rep.p, rep.K0, rep.lower_bound, rep.rho0, rep.bind2_holds]
    _emit(args, ["rho", "p", "K0", "lower_bound", "rho0", "bind2_holds"], [row], {"c": P.c})


def cmd_montecarlo(args):
    s = singularity.monte_carlo_A5(args.samples, args.N, args.seed, workers=args.threads)
    rows = [[i, v] for i, v in enumerate(s.values)]
    _emit(args, ["sample", "average"], rows,
          {"samples": s.samples, "N": s.N, "seed": s.seed, "mean": s.mean, "std": s.std,
           "fractionWithin": s.within, "tolerance": s.tolerance, "selfReturns": s.self_returns})


def cmd_modulus(args):
    rows = []
    for d in parse_list(args.delta):
        om = singularity.modulus_of_continuity(d, args.quad_points)
        rows.append([d, om, om / (float(d) * abs(math.log(d)))])
    _emit(args, ["delta", "omega1", "ratio"], rows, {})


def cmd_covariance(args):
    v = singularity.covariance_decay(args.j, args.k, args.quad_points)
    p, q = (1 << args.j) - 1, (1 << args.k) - 1
    closed = math.pi ** 2 / 12 * math.gcd(p, q) ** 2 / (p * q)
    _emit(args, ["j", "k", "cov", "closed_form"], [[args.j, args.k, v, closed]], {})


def cmd_pressure(args):
    P = _potential(args)
    grid = parse_grid(args.t_grid) if args.t_grid else None
    curve = thermo.pressure_curve(P, parse_fraction(args.delta), args.N, grid)
    rows = [list(s) for s in curve.samples]
    _emit(args, ["t", "p_lower", "p_upper"], rows,
          {"c": P.c, "delta": curve.delta, "level": curve.level})


def cmd_spectrum(args):
    P = _potential(args)
    if dyadic.to_fraction(P.c) == 0:
        raise DomainError("c = 0 is outside 0 < c < 1; its spectrum is the closed form "
                          "checked by `validate`")
    alphas = [float(a) for a in parse_list(args.alpha)]
    deltas = parse_list(args.deltas)
    sp = thermo.dimension_spectrum(P, alphas, deltas, args.N, args.max_period)
    rows = [[p.alpha, p.d_lower, p.d_upper, p.converged] for p in sp.points]
    _emit(args, ["alpha", "d_lower", "d_upper", "converged"], rows,
          {"c": P.c, "alphaGrid": alphas, "alphaWindow": list(sp.alpha_window)})


def cmd_cover_check(args):
    rows, ok = [], True
    for i in range(1, args.max_sum):
        for j in range(1, args.max_sum - i + 1):
            r = covers.certify_hatQ_bound(i, j)
            rows.append([i, j, r.max_per_J, r.total, r.measure, covers.M_CONST * (1 << i), r.passed])
            ok &= r.passed
    _emit(args, ["i", "j", "max_per_J", "total", "measure", "bound", "passed"], rows,
          {"maxSum": args.max_sum, "allPassed": ok})
    return 0 if ok else 1


def cmd_polynomial(args):
    P = _potential(args)
    x = dyadic.as_point(parse_fraction(args.x))
    rows = []
    for n in range(args.n + 1):
        direct = abs(dyadic.sigma_direct(P, x, 1 << n))
        prod = dyadic.sigma_modulus(P, x, n)
        rel = abs(direct - prod) / prod if prod else abs(direct)
        rows.append([n, 1 << n, direct, prod, rel])
    _emit(args, ["n", "N", "direct_abs", "product_abs", "rel_err"], rows, {"c": P.c, "x": x})


def validation_checks() -> list[tuple[str, float, float, bool]]:
    """Fast oracle checks: closed forms at c = 0, product identity, covers."""
    out = []
    P0 = Potential(0)
    rep = orbits.extremes_scan(P0, 10)
    out.append(("alpha(0) = -log 2", rep.alpha_P, -dyadic.LOG2, abs(rep.alpha_P + dyadic.LOG2) < 1e-12))
    out.append(("beta(0) = 0", rep.beta_P, 0.0, rep.beta_P == 0.0))
    g = orbits.gelfond_exponent(Potential(Fraction(1, 2)), 10)
    ref = math.log(3) / math.log(4)
    out.append(("gamma(1/2) = log 3 / log 4", g, ref, abs(g - ref) < 1e-12))
    grid = thermo.default_t_grid()
    curve = thermo.PressureCurve.from_function(thermo.c_zero_reference, grid)
    for a in (-dyadic.LOG2, -0.5, 0.0):
        lo, _ = thermo.legendre_transform(curve, a)
        out.append((f"p0*({a:.4f})", lo, abs(a), abs(lo - abs(a)) < 1e-3))
    rng = random.Random(DEFAULT_SEED)
    worst = 0.0
    for _ in range(20):
        c = Fraction(rng.randrange(1, 1 << 20), 1 << 20)
        x = Fraction(rng.randrange(0, 1 << 30), 1 << 30)
        n = rng.randrange(1, 13)
        P = Potential(c)
        prod = dyadic.sigma_modulus(P, x, n)
        if prod > 1e-6:
            worst = max(worst, abs(abs(dyadic.sigma_direct(P, x, 1 << n)) - prod) / prod)
    out.append(("product identity (rel err)", worst, 0.0, worst < 1e-9))
    ok = all(covers.certify_hatQ_bound(i, j).passed for i in range(1, 12) for j in range(1, 13 - i))
    out.append(("M = 15 cover bound, i+j <= 12", float(ok), 1.0, ok))
    return out


def cmd_validate(args):
    checks = validation_checks()
    rows = [list(c) for c in checks]
    _emit(args, ["check", "value", "expected", "passed"], rows, {})
    for name, _, _, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}", file=sys.stderr)
    return 0 if all(c[3] for c in checks) else 1


# -- argument parser -------------------------------------------------------

def _threads(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="doubling-spectrum", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="json")
    common.add_argument("--output", "-o", default=None)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=_threads, default=os.cpu_count() or 1)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, *, c: bool = True, **kw):
        p = sub.add_parser(name, parents=[common], **kw)
        if c:
            p.add_argument("--c", required=True, help="p/q, decimal, or 'random'")
            p.add_argument("--width", type=int, default=None, help="bits for --c random")
        p.set_defaults(func=fn)
        return p

    p = add("extremes", cmd_extremes)
    p.add_argument("--max-period", type=int, default=12)
    p = add("gelfond", cmd_gelfond)
    p.add_argument("--max-period", type=int, default=13)
    p = add("mcstar", cmd_mcstar)
    p.add_argument("--N", type=int, default=100)
    p = add("binding", cmd_binding)
    p.add_argument("--rho", required=True)
    p.add_argument("--K0", type=float, default=None)
    p.add_argument("--horizon", type=int, default=1000)
    p = add("montecarlo", cmd_montecarlo, c=False)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--N", type=int, default=2000)
    p = add("modulus", cmd_modulus, c=False)
    p.add_argument("--delta", required=True, help="comma list, e.g. 1/16,1/256")
    p.add_argument("--quad-points", type=int, default=None)
    p = add("covariance", cmd_covariance, c=False)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--quad-points", type=int, default=None)
    p = add("pressure", cmd_pressure)
    p.add_argument("--delta", required=True)
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--t-grid", default=None, help="a:b:step or comma list")
    p = add("spectrum", cmd_spectrum)
    p.add_argument("--alpha", required=True, help="comma list")
    p.add_argument("--deltas", default="1/8,1/16,1/32,1/64")
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--max-period", type=int, default=12)
    p = add("cover-check", cmd_cover_check, c=False)
    p.add_argument("--max-sum", type=int, default=20)
    add("validate", cmd_validate, c=False)
    p = add("polynomial", cmd_polynomial)
    p.add_argument("--x", required=True)
    p.add_argument("--n", type=int, default=10)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        code = args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code or 0


if __name__ == "__main__":
    sys.exit(main())

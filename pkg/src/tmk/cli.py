"""Command-line entry point: ``tmk <group> <command> [options]``.

Every command writes a CSV table (``--out`` or stdout) and returns 0 when its
checks pass, 1 when a numerical check fails and 2 on usage or input errors.
Options can also come from ``--config FILE`` (``key = value`` lines, keys are
option names with dashes or underscores); flags on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import __version__
from ._parallel import set_threads

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


# --- helpers ----------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real!r}{v.imag:+.17g}j"
    if isinstance(v, (tuple, list)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def write_rows(rows, out=None, header=None):
    """Write dict rows as CSV with a header; ``out`` is a path or ``None`` for stdout."""
    rows = list(rows)
    header = header or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r.get(h, "")) for h in header])
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def read_config(path) -> dict:
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            cfg[key.strip().replace("-", "_")] = val.strip()
    return cfg


def _q(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def _besov_params(a):
    from .besov import BesovParams
    return BesovParams(a.s, a.p, a.q, a.J)


def _family(a):
    from .transform import random_trig_family
    return random_trig_family(a.count, a.n, a.K, a.dim_E, a.seed)


def _resolution(name, n):
    from .littlewood_paley import make_shifted_resolution, make_standard_resolution
    if name == "standard":
        return make_standard_resolution(n)
    if name == "shifted":
        return make_shifted_resolution(n)
    raise ValueError(f"unknown resolution {name!r}")


def _symbol_of(a):
    if getattr(a, "spec", None):
        from .elliptic import read_symbol_spec
        return read_symbol_spec(a.spec)
    from .elliptic import laplacian
    return laplacian(a.n, a.dim_E)


# --- commands ---------------------------------------------------------------------

def cmd_lp_verify(a):
    from .littlewood_paley import verify_resolution
    rep = verify_resolution(_resolution(a.resolution, a.n), a.J, a.samples, a.seed)
    write_rows([{"check": c, "max_deviation": d, "violations": k} for c, d, k in rep.rows()], a.out)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_besov_norm(a):
    from .besov import besov_norms
    from .transform import read_trig_csv
    fs = [read_trig_csv(a.input, a.n)] if a.input else _family(a)
    norms = besov_norms(fs, _besov_params(a), _resolution(a.resolution, fs[0].n))
    write_rows([{"index": i, "s": a.s, "p": a.p, "q": a.q, "norm": v} for i, v in enumerate(norms)], a.out)
    return EXIT_OK


def cmd_besov_equiv(a):
    from .besov import norm_equivalence_experiment
    r = norm_equivalence_experiment(_family(a), _besov_params(a), _resolution("standard", a.n),
                                    _resolution("shifted", a.n))
    write_rows([{"s": a.s, "p": a.p, "q": a.q, "count": a.count, "c_hat": r.c_hat, "C_hat": r.C_hat}], a.out)
    return EXIT_OK


def cmd_besov_mult_cert(a):
    from .besov import multiplier_bound_certificate, proof_constant, riesz_box_experiment
    from .symbol_calculus import symbol_from_key
    fs = _family(a)
    M = symbol_from_key(a.symbol, a.n, a.dim_E)
    rep = multiplier_bound_certificate(M, fs, _besov_params(a), _resolution("standard", a.n), a.dmax)
    row = rep.row()
    K_p = riesz_box_experiment(fs, a.p).constant if math.isfinite(a.p) else math.nan
    C = proof_constant(K_p, a.n)
    row.update({"riesz_constant": K_p, "proof_C": C})
    write_rows([row], a.out)
    ok = not rep.grows and not (math.isfinite(C) and rep.op_ratio > C * rep.bv_sup)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_besov_riesz(a):
    from .besov import riesz_box_experiment
    r = riesz_box_experiment(_family(a), a.p)
    write_rows([{"n": a.n, "p": a.p, "count": a.count, "K": a.K, "constant": r.constant}], a.out)
    return EXIT_OK


def cmd_symbol_var(a):
    from .lattice import Box
    from .symbol_calculus import symbol_from_key, variation_on_box, variation_on_cell
    M = symbol_from_key(a.symbol, a.n, a.dim_E)
    if a.cell is not None:
        write_rows([{"symbol": M.name, "cell": a.cell, "variation": variation_on_cell(M, a.cell)}], a.out)
        return EXIT_OK
    if a.lo is None or a.hi is None:
        raise ValueError("give --cell D or both --lo and --hi")
    box = Box(tuple(a.lo), tuple(a.hi))
    write_rows([{"symbol": M.name, "lo": box.lo, "hi": box.hi, "variation": variation_on_box(M, box)}], a.out)
    return EXIT_OK


def cmd_symbol_cert(a):
    from .symbol_calculus import bv_certificate, symbol_from_key
    M = symbol_from_key(a.symbol, a.n, a.dim_E)
    cert = bv_certificate(M, a.dmax)
    rows = [{"d": d, "variation": v} for d, v in enumerate(cert.values)]
    rows.append({"d": "sup", "variation": cert.sup})
    rows.append({"d": "tail", "variation": cert.tail_norm})
    write_rows(rows, a.out)
    if a.bound is not None and cert.sup > a.bound:
        print(f"certificate sup {cert.sup:g} at d={cert.argmax} exceeds {a.bound:g}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_elliptic_check(a):
    from .elliptic import Sector, ellipticity_check
    A = _symbol_of(a)
    r = ellipticity_check(A, Sector(a.theta, kappa=a.kappa), t_samples=a.t_samples)
    write_rows([{"symbol": A.name, "theta": a.theta, "kappa_bound": a.kappa, "kappa": r.kappa,
                 "scaled_error": r.scaled_error, "passed": r.passed,
                 "witness": r.witness or r.argmax or ""}], a.out)
    return EXIT_OK if r.passed else EXIT_FAIL


def _kappa_for(A, a):
    from .elliptic import Sector, ellipticity_check
    if a.kappa is not None and math.isfinite(a.kappa):
        return a.kappa
    return ellipticity_check(A, Sector(a.theta, kappa=math.inf), t_samples=a.t_samples).kappa


def cmd_elliptic_omega0(a):
    from .elliptic import Sector, omega0_search
    A = _symbol_of(a)
    kappa = _kappa_for(A, a)
    r = omega0_search(A, Sector(a.theta, kappa=kappa), t_samples=a.t_samples)
    write_rows([{"symbol": A.name, "theta": a.theta, "kappa": kappa, "omega0": r.omega0,
                 "max_ratio": r.max_ratio}], a.out)
    return EXIT_OK


def cmd_elliptic_bv_sweep(a):
    from .elliptic import Sector, lambda_samples, omega0_search, resolvent_bv_sweep
    A = _symbol_of(a)
    kappa = _kappa_for(A, a)
    omega0 = a.omega if a.omega is not None else omega0_search(A, Sector(a.theta, kappa=kappa)).omega0
    sector = Sector(a.theta, omega0, kappa)
    lams = lambda_samples(a.theta, omega0, np.logspace(0, 4, a.magnitudes))
    rep = resolvent_bv_sweep(A, sector, lams, A.time_samples(a.t_samples), a.dmax, a.cap)
    header = ["t", "lambda", "bv_sup", "bv_argmax", "tail_norm", "remark"]
    write_rows(rep.rows, a.out, header)
    print(f"sup={rep.sup:.6g} soft_bound={rep.soft_bound:g} "
          f"{'within' if rep.within_soft_bound else 'above'} flagged={int(rep.flagged)}", file=sys.stderr)
    return EXIT_FAIL if rep.flagged else EXIT_OK


def _coef_rows(times, sol_freqs, coefs):
    rows = []
    for ti, t in enumerate(times):
        for k, c in zip(sol_freqs.tolist(), coefs[ti]):
            row = {"t": float(t)}
            row.update({f"k{i + 1}": v for i, v in enumerate(k)})
            for i, x in enumerate(c):
                row[f"x{i}_re"], row[f"x{i}_im"] = float(x.real), float(x.imag)
            rows.append(row)
    return rows


def cmd_solve_ivp(a):
    from .besov import BesovParams
    from .pde_solver import IvpSpec, residual_norms, solve_ivp
    from .transform import read_trig_csv
    A = _symbol_of(a)
    u0 = read_trig_csv(a.u0, A.n)
    f = read_trig_csv(a.forcing, A.n) if a.forcing else None
    times = None if a.times is None else [float(t) for t in a.times.split(",")]
    spec = IvpSpec(A, u0, a.T, a.steps, f, times)
    sol = solve_ivp(spec)
    write_rows(_coef_rows(sol.times, sol.freqs, sol.coefs), a.out)
    if a.summary:
        rep = residual_norms(sol, spec, BesovParams(a.s, a.p, a.q), _resolution("standard", A.n))
        write_rows([rep], a.summary)
    return EXIT_OK


def cmd_solve_periodic(a):
    from .besov import BesovParams
    from .pde_solver import PeriodicSpec, periodic_residual, residual_norms, solve_periodic
    from .transform import read_trig_csv
    A = _symbol_of(a)
    f = read_trig_csv(a.forcing, A.n + 1)
    spec = PeriodicSpec(A, a.omega, f, a.omega0)
    u = solve_periodic(spec)
    rows = []
    for k, c in zip(u.freqs.tolist(), u.coefs):
        row = {"l": k[0]}
        row.update({f"k{i}": v for i, v in enumerate(k[1:], 1)})
        for i, x in enumerate(c):
            row[f"x{i}_re"], row[f"x{i}_im"] = float(x.real), float(x.imag)
        rows.append(row)
    write_rows(rows, a.out)
    rep = residual_norms(u, spec, BesovParams(a.s, a.p, a.q), None)
    if a.summary:
        write_rows([rep], a.summary)
    fn = float(np.linalg.norm(f.coefs))
    r = periodic_residual(u, spec)
    return EXIT_OK if (r.size == 0 or float(np.abs(r).max()) <= 1e-12 * max(fn, 1e-300)) else EXIT_FAIL


def cmd_suite(a):
    from .acceptance import CRITERIA, format_result, run_criterion
    only = sorted(CRITERIA) if not a.only else [int(x) for x in a.only.split(",")]
    rows = []
    for i in only:
        if i not in CRITERIA:
            raise ValueError(f"no criterion {i}")
        r = run_criterion(i, a.quick)
        print(format_result(r), file=sys.stderr, flush=True)
        rows.append({"criterion": r.number, "title": r.title, "passed": r.passed,
                     "seconds": round(r.seconds, 1), "detail": r.detail})
    write_rows(rows, a.out)
    failed = [r["criterion"] for r in rows if not r["passed"]]
    print(f"{len(rows) - len(failed)}/{len(rows)} passed" + (f"; failed: {failed}" if failed else ""),
          file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


# --- parser -----------------------------------------------------------------------

def _common(p, *, besov=False, family=False, symbol=False, elliptic=False):
    p.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    if family or symbol:
        p.add_argument("--n", type=int, default=1, help="lattice dimension")
        p.add_argument("--dim-E", type=int, default=1, help="dimension of E")
    if family:
        p.add_argument("--count", type=int, default=100, help="number of random polynomials")
        p.add_argument("--K", type=int, default=16, help="frequency box [-K, K]^n")
    if besov:
        p.add_argument("--s", type=float, default=0.0)
        p.add_argument("--p", type=_q, default=2.0)
        p.add_argument("--q", type=_q, default=2.0)
        p.add_argument("--J", type=int, default=None, help="truncation level")
    if symbol:
        p.add_argument("--symbol", default="riesz",
                       help="riesz, neg, identity, zero, segment:J, randdiag:SEED, custom:PATH")
    if elliptic:
        p.add_argument("--spec", default=None, help="symbol spec file (default: -Laplacian)")
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--dim-E", type=int, default=1)
        p.add_argument("--theta", type=float, default=math.pi / 2)
        p.add_argument("--kappa", type=_q, default=None)
        p.add_argument("--t-samples", type=int, default=9)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="tmk", description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=f"tmk {__version__}")
    top.add_argument("--config", default=None, help="key = value file with option defaults")
    top.add_argument("--threads", type=int, default=None, help="worker pool size (env TMK_THREADS)")
    groups = top.add_subparsers(dest="group", required=True)

    lp = groups.add_parser("lp", help="resolution of unity").add_subparsers(dest="command", required=True)
    p = lp.add_parser("verify", help="check the Littlewood-Paley partition")
    _common(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--J", type=int, default=10)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--resolution", choices=("standard", "shifted"), default="standard")
    p.set_defaults(func=cmd_lp_verify)

    bs = groups.add_parser("besov", help="Besov norms and multipliers").add_subparsers(dest="command", required=True)
    p = bs.add_parser("norm", help="Besov norms of a CSV polynomial or a random family")
    _common(p, besov=True, family=True)
    p.add_argument("--input", default=None, help="polynomial CSV (k1..kn, x0_re, x0_im, ...)")
    p.add_argument("--resolution", choices=("standard", "shifted"), default="standard")
    p.set_defaults(func=cmd_besov_norm)
    p = bs.add_parser("equiv", help="norm-equivalence bracket between two resolutions")
    _common(p, besov=True, family=True)
    p.set_defaults(func=cmd_besov_equiv)
    p = bs.add_parser("mult-cert", help="multiplier ratio against the BV certificate")
    _common(p, besov=True, family=True, symbol=True)
    p.add_argument("--dmax", type=int, default=None)
    p.set_defaults(func=cmd_besov_mult_cert)
    p = bs.add_parser("riesz", help="empirical box-Riesz constant")
    _common(p, family=True)
    p.add_argument("--p", type=_q, default=2.0)
    p.set_defaults(func=cmd_besov_riesz)

    sy = groups.add_parser("symbol", help="variation of symbols").add_subparsers(dest="command", required=True)
    p = sy.add_parser("var", help="variation on a box or a coarse cell")
    _common(p, symbol=True)
    p.add_argument("--cell", type=int, default=None)
    p.add_argument("--lo", type=int, nargs="+", default=None)
    p.add_argument("--hi", type=int, nargs="+", default=None)
    p.set_defaults(func=cmd_symbol_var)
    p = sy.add_parser("cert", help="per-cell BV certificate")
    _common(p, symbol=True)
    p.add_argument("--dmax", type=int, default=20)
    p.add_argument("--bound", type=float, default=None, help="fail if the sup exceeds this")
    p.set_defaults(func=cmd_symbol_cert)

    el = groups.add_parser("elliptic", help="ellipticity and resolvents").add_subparsers(dest="command", required=True)
    p = el.add_parser("check", help="measure kappa on the sector")
    _common(p, elliptic=True)
    p.set_defaults(func=cmd_elliptic_check, kappa=1.0)
    p = el.add_parser("omega0", help="search the resolvent shift omega0")
    _common(p, elliptic=True)
    p.set_defaults(func=cmd_elliptic_omega0)
    p = el.add_parser("bv-sweep", help="BV certificates of lambda (lambda + a)^-1")
    _common(p, elliptic=True)
    p.add_argument("--dmax", type=int, default=12)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--magnitudes", type=int, default=9)
    p.add_argument("--cap", type=float, default=None)
    p.set_defaults(func=cmd_elliptic_bv_sweep, t_samples=3)

    so = groups.add_parser("solve", help="spectral solvers").add_subparsers(dest="command", required=True)
    p = so.add_parser("ivp", help="u' + A(t) u = f, u(0) = u0")
    _common(p, elliptic=True, besov=True)
    p.add_argument("--u0", required=True, help="initial data CSV")
    p.add_argument("--forcing", default=None, help="time-independent forcing CSV")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--times", default=None, help="comma-separated output times")
    p.add_argument("--summary", default=None, help="norms summary CSV")
    p.set_defaults(func=cmd_solve_ivp)
    p = so.add_parser("periodic", help="u' + (omega + A) u = f, u(0) = u(2 pi)")
    _common(p, elliptic=True, besov=True)
    p.add_argument("--forcing", required=True, help="joint (t, x) polynomial CSV, time axis first")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--omega0", type=float, default=None)
    p.add_argument("--summary", default=None)
    p.set_defaults(func=cmd_solve_periodic)

    p = groups.add_parser("suite", help="run the acceptance criteria")
    p.add_argument("--quick", action="store_true", help="smaller samples where no size is prescribed")
    p.add_argument("--only", default=None, help="comma-separated criterion numbers")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_suite)
    return top


def _leaf_parser(top, argv):
    """The subparser that ``argv`` selects (used to apply config defaults)."""
    parser = top
    for tok in argv:
        sub = next((a for a in parser._actions if isinstance(a, argparse._SubParsersAction)), None)
        if sub is None:
            break
        if tok in sub.choices:
            parser = sub.choices[tok]
    return parser


def _apply_config(top, argv, cfg):
    leaf = _leaf_parser(top, argv)
    known = {a.dest: a for a in leaf._actions}
    defaults = {}
    for key, val in cfg.items():
        if key not in known:
            raise ValueError(f"config key {key!r} is not an option of this command")
        act = known[key]
        if act.nargs in ("+", "*"):
            defaults[key] = [act.type(v) if act.type else v for v in val.split()]
        elif isinstance(act, argparse._StoreTrueAction):
            defaults[key] = val.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = act.type(val) if act.type else val
        if act.required:
            act.required = False
    leaf.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    top = build_parser()
    try:
        cfg_path = None
        if "--config" in argv:
            i = argv.index("--config")
            if i + 1 >= len(argv):
                top.error("--config needs a path")
            cfg_path = argv[i + 1]
        if cfg_path:
            _apply_config(top, argv, read_config(cfg_path))
        args = top.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except (OSError, ValueError) as e:
        print(f"tmk: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.threads is not None:
        set_threads(args.threads)
    try:
        return args.func(args)
    except (OSError, ValueError) as e:
        from .elliptic import SingularSymbolError
        if isinstance(e, SingularSymbolError):
            print(f"tmk: singular symbol: {e} (witness {e.witness})", file=sys.stderr)
            return EXIT_FAIL
        print(f"tmk: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

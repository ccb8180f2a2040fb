"""Command-line front end: ``levyem <subcommand> [flags]``.

Every subcommand that writes ``--out FILE`` also writes ``FILE.manifest``, a
flat ``key = value`` file holding the resolved parameters. Passing it back via
``--config`` reproduces the output byte for byte; flags given on the command
line override values from the file.

Exit codes: 0 success, 1 usage or domain error, 2 numerical failure,
3 a declared drift bound was falsified.
"""

import argparse
import datetime
import os
import re
import sys

from . import __version__, oubench
from .drift import check_assumption_a, parse_drift
from .errors import DomainError, NumericalFailure
from .noise import (NoiseSpec, RngStream, c_d_alpha_quadrature, sample_isotropic_stable,
                    sample_pareto_vec, sample_sym_stable_1d)
from .ratestudy import Method, fit_loglog, run_rate_study
from .scheme import (ChainConfig, Scheme, coupled_pair_decay, moment_track, run_ensemble,
                     step_size_warning)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_FALSIFIED = 0, 1, 2, 3
META_KEYS = {"command", "version", "timestamp"}
# flags that change wall time or destinations but never output bytes
NOT_IN_MANIFEST = {"config", "out", "workers", "command", "func"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v):
    return "%.17g" % v


def parse_eta_grid(text):
    """``"2^-a..2^-b"`` (every integer exponent in between) or a comma-separated list."""
    text = str(text).strip()
    m = re.fullmatch(r"2\^(-?\d+)\s*\.\.\s*2\^(-?\d+)", text)
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        step = 1 if b >= a else -1
        return [2.0**k for k in range(a, b + step, step)]
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"bad eta grid {text!r}; use 2^-a..2^-b or a comma list") from None
    if not vals:
        raise DomainError("empty eta grid")
    return vals


def _vector(text):
    try:
        return [float(v) for v in str(text).split(",")]
    except ValueError:
        raise DomainError(f"bad vector {text!r}; use comma-separated numbers") from None


def read_config(path):
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise DomainError(f"{path}:{n}: expected 'key = value'")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def write_manifest(path, command, args):
    lines = [f"command = {command}", f"version = {__version__}",
             f"timestamp = {datetime.datetime.now(datetime.timezone.utc).isoformat()}"]
    for key in sorted(vars(args)):
        if key in NOT_IN_MANIFEST:
            continue
        val = getattr(args, key)
        if val is None:
            continue
        lines.append(f"{key} = {_fmt(val) if isinstance(val, float) else val}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        write_manifest(args.out + ".manifest", args.command, args)
    else:
        sys.stdout.write(text)


def _diag(msg, kind="error"):
    color = sys.stderr.isatty() and not os.environ.get("NO_COLOR")
    tag = {"error": "31", "warning": "33"}.get(kind, "0")
    prefix = f"\033[{tag}m{kind}:\033[0m" if color else f"{kind}:"
    print(f"{prefix} {msg}", file=sys.stderr)


def _warn_step(config, drift):
    msg = step_size_warning(config, drift)
    if msg:
        _diag(msg, "warning")


def _resolve_drift(args):
    x0 = _vector(args.x0)
    dim = args.d if args.d is not None else len(x0)
    drift = parse_drift(args.drift, dim)
    if len(x0) == 1 and drift.dim > 1:
        x0 = x0 * drift.dim
    if len(x0) != drift.dim:
        raise DomainError(f"x0 has {len(x0)} components but the drift acts in dimension {drift.dim}")
    return drift, x0


def _matrix_csv(samples):
    d = samples.shape[1]
    lines = ["idx," + ",".join(f"x{i + 1}" for i in range(d))]
    lines += [f"{j}," + ",".join(_fmt(v) for v in row) for j, row in enumerate(samples)]
    return "\n".join(lines) + "\n"


def _series_csv(header, values):
    lines = [header] + [f"{k},{_fmt(v)}" for k, v in enumerate(values)]
    return "\n".join(lines) + "\n"


def cmd_constants(args):
    spec = NoiseSpec(args.alpha, args.d)
    residual = abs(spec.c_d_alpha / c_d_alpha_quadrature(args.d, args.alpha) - 1.0)
    text = ("d,alpha,surface_area,c_d_alpha,sigma,residual\n"
            f"{spec.dim},{_fmt(spec.alpha)},{_fmt(spec.surface_area)},{_fmt(spec.c_d_alpha)},"
            f"{_fmt(spec.sigma)},{_fmt(residual)}\n")
    _emit(args, text)
    return EXIT_OK


def cmd_sample(args):
    if args.n < 1:
        raise DomainError("n must be at least 1")
    spec = NoiseSpec(args.alpha, args.d)
    rng = RngStream(args.seed, args.stream)
    if args.kind == "stable1d":
        x = sample_sym_stable_1d(spec, args.t, rng, size=args.n)[:, None]
    elif args.kind == "isotropic":
        x = sample_isotropic_stable(spec, args.t, rng, size=args.n)
    else:
        x = sample_pareto_vec(spec, rng, size=args.n)
    _emit(args, _matrix_csv(x))
    return EXIT_OK


def _chain_config(args, x0):
    return ChainConfig(args.scheme, args.alpha, args.eta, args.steps, tuple(x0),
                       args.ensemble, args.seed)


def cmd_simulate(args):
    drift, x0 = _resolve_drift(args)
    cfg = _chain_config(args, x0)
    _warn_step(cfg, drift)
    ens = run_ensemble(cfg, drift, workers=args.workers)
    _emit(args, _matrix_csv(ens.samples))
    return EXIT_OK


def cmd_cf_gap(args):
    grid = parse_eta_grid(args.eta_grid)
    M, _ = oubench.lipschitz_constant_M()
    rows = [(eta, oubench.cf_gap(args.alpha, eta, args.scheme, args.quad_tol, args.tail_tol))
            for eta in grid]
    lines = ["eta,gap,w1_lower"] + [f"{_fmt(e)},{_fmt(g)},{_fmt(abs(g) / (2.0 * M))}" for e, g in rows]
    if len(rows) >= 2 and all(g != 0 for _, g in rows):
        slope, icpt, r2 = fit_loglog((e, abs(g)) for e, g in rows)
        theory = 2.0 / args.alpha - 1.0 if Scheme.parse(args.scheme) is Scheme.PARETO else 1.0
        lines.append(f"# slope={_fmt(slope)} intercept={_fmt(icpt)} r2={_fmt(r2)} theory={_fmt(theory)}")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_rate_study(args):
    grid = parse_eta_grid(args.eta_grid)
    method = Method.parse(args.method)
    drift, x0 = None, None
    if method is Method.MCW1 or args.drift != "ou":
        drift, x0 = _resolve_drift(args)
        for eta in grid:
            _warn_step(_chain_config(args, x0).replace(eta=eta, steps=0), drift)
    report = run_rate_study(args.alpha, args.scheme, drift, grid, args.ensemble, args.seed, method,
                            horizon=args.horizon, beta=args.beta, refinement=args.refinement,
                            start=x0, workers=args.workers, quad_tol=args.quad_tol,
                            tail_tol=args.tail_tol)
    _emit(args, report.to_csv())
    return EXIT_OK


def cmd_coupling_decay(args):
    drift, x0 = _resolve_drift(args)
    y0 = _vector(args.y0)
    if len(y0) == 1 and drift.dim > 1:
        y0 = y0 * drift.dim
    cfg = _chain_config(args, x0)
    _warn_step(cfg, drift)
    dist = coupled_pair_decay(drift, x0, y0, cfg, workers=args.workers)
    _emit(args, _series_csv("k,mean_distance", dist))
    return EXIT_OK


def cmd_check_drift(args):
    drift, _ = _resolve_drift(args)
    rep = check_assumption_a(drift, args.n_pairs, args.radius, RngStream(args.seed))
    labels = ("dissipativity", "gradient", "second_derivative")
    flags = (rep.dissipativity_ok, rep.gradient_ok, rep.second_deriv_ok)
    lines = ["check,ok,worst_margin"]
    lines += [f"{name},{str(ok).lower()},{_fmt(m)}" for name, ok, m in zip(labels, flags, rep.worst_margins)]
    _emit(args, "\n".join(lines) + "\n")
    if not rep.ok:
        _diag(f"drift {drift.spec_string()} violates its declared constants")
        return EXIT_FALSIFIED
    return EXIT_OK


def cmd_moments(args):
    drift, x0 = _resolve_drift(args)
    cfg = _chain_config(args, x0)
    _warn_step(cfg, drift)
    rep = moment_track(cfg, drift, args.beta, workers=args.workers)
    _emit(args, _series_csv("k,moment_beta", rep.per_step_moment))
    return EXIT_OK


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' file; flags override it")
    common.add_argument("--workers", type=int, default=1, help="threads; never changes output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output CSV (stdout if omitted); a .manifest is written next to it")

    p = _Parser(prog="levyem", description="Euler-Maruyama schemes for stable-driven SDEs.")
    p.add_argument("--version", action="version", version=f"levyem {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
        return sp

    def chain_flags(sp, ensemble=1000):
        sp.add_argument("--scheme", default="pareto", choices=["stable", "pareto"])
        sp.add_argument("--alpha", type=float, default=1.5)
        sp.add_argument("--drift", default="ou", help="name[:p1,p2,...], e.g. ou-sine:0.5")
        sp.add_argument("--d", type=int, default=None, help="dimension (default from x0)")
        sp.add_argument("--eta", type=float, default=0.01)
        sp.add_argument("--steps", type=int, default=1000)
        sp.add_argument("--ensemble", type=int, default=ensemble)
        sp.add_argument("--x0", default="0", help="start, comma-separated")

    sp = add("constants", cmd_constants, "noise normalization constants")
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--alpha", type=float, default=1.5)

    sp = add("sample", cmd_sample, "draw noise variates")
    sp.add_argument("--kind", choices=["stable1d", "isotropic", "pareto"], default="stable1d")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--alpha", type=float, default=1.5)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--stream", type=int, default=0)

    chain_flags(add("simulate", cmd_simulate, "final states of an ensemble of chains"))

    sp = add("cf-gap", cmd_cf_gap, "deterministic CF gap of the ou benchmark")
    sp.add_argument("--alpha", type=float, default=1.5)
    sp.add_argument("--scheme", default="pareto", choices=["stable", "pareto"])
    sp.add_argument("--eta-grid", default="2^-8..2^-14")
    sp.add_argument("--quad-tol", type=float, default=oubench.DEFAULT_QUAD_TOL)
    sp.add_argument("--tail-tol", type=float, default=oubench.DEFAULT_TAIL_TOL)

    sp = add("rate-study", cmd_rate_study, "distance versus step size and fitted slope")
    chain_flags(sp, ensemble=10000)
    sp.add_argument("--method", default="mcw1", choices=["mcw1", "cfgap"])
    sp.add_argument("--eta-grid", default="2^-3..2^-7")
    sp.add_argument("--beta", type=float, default=None)
    sp.add_argument("--horizon", type=float, default=None, help="time horizon T (default 20/theta1)")
    sp.add_argument("--refinement", type=int, default=64)
    sp.add_argument("--quad-tol", type=float, default=oubench.DEFAULT_QUAD_TOL)
    sp.add_argument("--tail-tol", type=float, default=oubench.DEFAULT_TAIL_TOL)

    sp = add("coupling-decay", cmd_coupling_decay, "synchronously coupled distance per step")
    chain_flags(sp, ensemble=1)
    sp.add_argument("--y0", default="0")

    sp = add("check-drift", cmd_check_drift, "probe declared drift constants")
    sp.add_argument("--drift", default="ou")
    sp.add_argument("--d", type=int, default=None)
    sp.add_argument("--x0", default="0", help=argparse.SUPPRESS)
    sp.add_argument("--n-pairs", type=int, default=10000)
    sp.add_argument("--radius", type=float, default=10.0)

    sp = add("moments", cmd_moments, "per-step E|Y_k|^beta")
    chain_flags(sp)
    sp.add_argument("--beta", type=float, default=1.2)
    return p


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = read_config(args.config)
    if values.get("command", args.command) != args.command:
        raise UsageError(f"config {args.config} is for '{values['command']}', not '{args.command}'")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = set(values) - known - META_KEYS
    if unknown:
        raise UsageError(f"unknown keys in {args.config}: {', '.join(sorted(unknown))}")
    sub.set_defaults(**{k: v for k, v in values.items() if k not in META_KEYS})
    return parser.parse_args(argv)


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, sys.argv[1:] if argv is None else argv)
        if getattr(args, "workers", 1) < 1:
            raise DomainError("workers must be at least 1")
        return args.func(args)
    except (UsageError, DomainError, OSError) as exc:
        _diag(str(exc))
        return EXIT_USAGE
    except NumericalFailure as exc:
        _diag(f"numerical failure: {exc}")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

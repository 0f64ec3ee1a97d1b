"""Command-line front end.

Commands: optimize, analyze, simulate, sweep, baselines.  Scenario files are
JSON objects ``{"N": 1024, "payload_bytes": 32, "users": [{"z": "15/16",
"eps": 0.1, "label": "near"}, ...]}``; fractions may be given as ``"a/b"``.
Distribution files map degree to probability (``{"1": 0.02, "2": 0.78}``),
or are the JSON written by ``optimize`` (its ``probabilities`` key is used).

CSV schemas
  analyze   scheme,user,z,eps,t_analytic,scheme_params
  simulate  scheme,user,z,eps,t_sim_mean,t_sim_std,runs,incomplete_runs,scheme_params
  sweep     vary_user,z,scheme,t_server,scheme_params
  baselines quantity,value
Per-user rows use the user index; ``server`` rows carry the max over users
(for simulate, the mean over runs of the per-run max).  Baseline rows use the
scheme names lower_bound, unicast and timeshare with user ``all``.

Exit codes: 0 ok, 1 runtime failure, 2 usage or parse error.
"""

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .baselines import baseline_report
from .chunked import ChunkConfig, best_chunk_size, chunked_analysis
from .degree_model import (DEFAULT_GRID_STEP, DegreeDistribution, Scenario, User, lt_analysis,
                           parse_fraction)
from .errors import HetcastError, UsageError
from .growth import best_scale, growth_delivery_time, growth_schedule
from .optimizer import optimize_scenario
from .sim import DEFAULT_CAP_MULTIPLIER, SCHEMES, SchemeParams, average_runs

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
SWEEP_BASELINES = ("lower_bound", "unicast", "timeshare")


class FieldError(UsageError):
    """Malformed input file; the message names the offending field."""


def _num(value):
    return "inf" if value == math.inf else "nan" if value is None or math.isnan(value) else f"{value:.6f}"


def _read_json(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FieldError(f"cannot read {what} file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FieldError(f"{what} file {path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def _field(obj, key, where, convert, default=None):
    if key not in obj:
        if default is not None:
            return default
        raise FieldError(f"{where}: missing field '{key}'")
    try:
        return convert(obj[key])
    except (UsageError, TypeError, ValueError) as exc:
        raise FieldError(f"{where}: bad field '{key}': {exc}") from exc


def _int(value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise UsageError(f"expected an integer, got {value!r}")
    return value


def parse_scenario(data, where="scenario"):
    if not isinstance(data, dict):
        raise FieldError(f"{where}: expected a JSON object")
    N = _field(data, "N", where, _int)
    b = _field(data, "payload_bytes", where, _int, default=32)
    users = data.get("users")
    if not isinstance(users, list) or not users:
        raise FieldError(f"{where}: field 'users' must be a non-empty list")
    parsed = []
    for i, u in enumerate(users):
        loc = f"{where}: users[{i}]"
        if not isinstance(u, dict):
            raise FieldError(f"{loc}: expected an object with z and eps")
        z = _field(u, "z", loc, parse_fraction)
        eps = _field(u, "eps", loc, parse_fraction)
        label = str(u.get("label", ""))
        try:
            parsed.append(User(z, eps, label))
        except UsageError as exc:
            name = "z" if "demand" in str(exc) else "eps"
            raise FieldError(f"{loc}: bad field '{name}': {exc}") from exc
    try:
        return Scenario(N, tuple(parsed), b)
    except UsageError as exc:
        raise FieldError(f"{where}: {exc}") from exc


def load_scenario(path):
    return parse_scenario(_read_json(path, "scenario"), where=path)


def parse_distribution(data, where="distribution"):
    if isinstance(data, dict) and "probabilities" in data:
        data = data["probabilities"]
    if not isinstance(data, dict) or not data:
        raise FieldError(f"{where}: expected a degree -> probability mapping")
    mapping = {}
    for k, v in data.items():
        try:
            d = int(k)
        except ValueError as exc:
            raise FieldError(f"{where}: degree key {k!r} is not an integer") from exc
        mapping[d] = _field(data, k, where, parse_fraction)
    try:
        return DegreeDistribution.from_mapping(mapping)
    except UsageError as exc:
        raise FieldError(f"{where}: {exc}") from exc


def load_distribution(path):
    return parse_distribution(_read_json(path, "distribution"), where=path)


def _dist_label(dist):
    return "dist=" + ";".join(f"{d}:{p:.6f}" for d, p in dist.to_mapping().items())


def resolve_params(scheme, scenario, args):
    """Build the scheme parameters; returns ``(SchemeParams, label)``."""
    if scheme in ("lt", "lt-sys"):
        if args.dist in (None, "auto"):
            dist = optimize_scenario(scenario, scheme == "lt-sys", args.grid_step).dist
        else:
            dist = load_distribution(args.dist)
        return SchemeParams(dist=dist), _dist_label(dist)
    if scheme == "growth":
        if args.scale in (None, "auto"):
            scale, _ = best_scale(scenario, grid_step=args.grid_step)
        else:
            scale = _float_arg("--scale", args.scale)
        return SchemeParams(schedule=growth_schedule(scenario.N, scale, scenario.z_max)), f"scale={scale:.6f}"
    if scheme == "chunked":
        if args.chunks in (None, "auto"):
            h, _, _ = best_chunk_size(scenario)
            config = ChunkConfig.for_packets(scenario.N, h)
        else:
            n = _int_arg("--chunks", args.chunks)
            if n < 1 or scenario.N % n:
                raise UsageError(f"--chunks {n} does not divide N = {scenario.N}")
            config = ChunkConfig(n, scenario.N // n)
        return SchemeParams(chunks=config), f"n={config.n};h={config.h};q={config.q}"
    raise UsageError(f"unknown scheme {scheme!r}")


def _float_arg(flag, text):
    try:
        return parse_fraction(text)
    except UsageError as exc:
        raise UsageError(f"{flag}: {exc}") from exc


def _int_arg(flag, text):
    try:
        return int(text)
    except ValueError as exc:
        raise UsageError(f"{flag}: not an integer: {text!r}") from exc


def analytic_times(scheme, scenario, params, grid_step=DEFAULT_GRID_STEP):
    if scheme in ("lt", "lt-sys"):
        return lt_analysis(params.dist, scenario, scheme == "lt-sys", grid_step).t
    if scheme == "growth":
        return tuple(growth_delivery_time(params.schedule, u.z, u.eps, grid_step) for u in scenario.users)
    return chunked_analysis(scenario, params.chunks).t


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _baseline_rows(scenario):
    rep = baseline_report(scenario)
    return [("lower_bound", rep.lower_bound), ("unicast", rep.unicast_total), ("timeshare", rep.timeshare)]


def cmd_optimize(args):
    scenario = load_scenario(args.scenario)
    res = optimize_scenario(scenario, args.systematic, args.grid_step)
    t = lt_analysis(res.dist, scenario, args.systematic, args.grid_step).t
    doc = {
        "scheme": "lt-sys" if args.systematic else "lt",
        "t0": round(res.t0, 10),
        "user_t": [round(v, 10) for v in t],
        "dmax": res.dist.dmax,
        "grid_step": args.grid_step,
        "probabilities": {str(d): round(p, 12) for d, p in res.dist.to_mapping().items()},
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    if args.out not in (None, "-"):
        print(f"t0 = {res.t0:.6f}  {res.dist}")
    return EXIT_OK


def cmd_analyze(args):
    scenario = load_scenario(args.scenario)
    params, label = resolve_params(args.scheme, scenario, args)
    t = analytic_times(args.scheme, scenario, params, args.grid_step)
    rows = [(args.scheme, i, _num(u.z), _num(u.eps), _num(t[i]), label) for i, u in enumerate(scenario.users)]
    rows.append((args.scheme, "server", "", "", _num(max(t)), label))
    rows += [(name, "all", "", "", _num(v), "") for name, v in _baseline_rows(scenario)]
    _emit(_csv_text(("scheme", "user", "z", "eps", "t_analytic", "scheme_params"), rows), args.out)
    return EXIT_OK


def trajectory_csv(trajectories):
    length = max((len(t) for t in trajectories), default=0)
    header = ["transmission_index"] + [f"user{i}" for i in range(len(trajectories))]
    rows = ([k + 1] + [f"{tr[min(k, len(tr) - 1)]:.6f}" for tr in trajectories] for k in range(length))
    return _csv_text(header, rows)


def cmd_simulate(args):
    scenario = load_scenario(args.scenario)
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    params, label = resolve_params(args.scheme, scenario, args)
    summary = average_runs(args.scheme, scenario, params, args.runs, args.seed, args.cap_multiplier,
                           jobs=args.jobs, keep_trajectories=args.trace is not None)
    rows = [
        (args.scheme, i, _num(u.z), _num(u.eps), _num(summary.user_mean[i]), _num(summary.user_std[i]),
         summary.runs, summary.incomplete_runs, label)
        for i, u in enumerate(scenario.users)
    ]
    rows.append((args.scheme, "server", "", "", _num(summary.server_mean), _num(summary.server_std),
                 summary.runs, summary.incomplete_runs, label))
    header = ("scheme", "user", "z", "eps", "t_sim_mean", "t_sim_std", "runs", "incomplete_runs", "scheme_params")
    _emit(_csv_text(header, rows), args.out)
    if args.trace is not None:
        _emit(trajectory_csv(summary.trajectory_mean), args.trace)
    return EXIT_OK


def _frange(lo, hi, step):
    if step <= 0:
        raise UsageError("--step must be positive")
    count = math.floor((hi - lo) / step + 1e-9)
    return [lo + k * step for k in range(count + 1)]


def sweep_point(task):
    """All columns for one swept demand; returns ``[(scheme, t, label)]``."""
    scenario, schemes, grid_step = task
    out = []
    for scheme in schemes:
        if scheme in ("lt", "lt-sys"):
            res = optimize_scenario(scenario, scheme == "lt-sys", grid_step)
            out.append((scheme, res.t0, _dist_label(res.dist)))
        elif scheme == "growth":
            scale, t = best_scale(scenario, grid_step=grid_step)
            out.append((scheme, t, f"scale={scale:.6f}"))
        else:
            h, t, _ = best_chunk_size(scenario)
            out.append((scheme, t, f"n={scenario.N // h};h={h};q=256"))
    out += [(name, v, "") for name, v in _baseline_rows(scenario)]
    return out


def sweep_rows(scenario, user, values, schemes, grid_step=DEFAULT_GRID_STEP, jobs=1):
    if not 0 <= user < len(scenario.users):
        raise UsageError(f"--vary-user {user} out of range (scenario has {len(scenario.users)} users)")
    for z in values:
        if not 0 < z < 1:
            raise UsageError(f"swept demand {z} outside (0, 1)")
    tasks = [(scenario.with_user(user, z=z), tuple(schemes), grid_step) for z in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(sweep_point, tasks))
    else:
        results = [sweep_point(t) for t in tasks]
    rows = []
    for z, cols in zip(values, results):
        rows += [(user, _num(z), scheme, _num(t), label) for scheme, t, label in cols]
    return rows


def cmd_sweep(args):
    scenario = load_scenario(args.scenario)
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    for s in schemes:
        if s not in SCHEMES:
            raise UsageError(f"--schemes: unknown scheme {s!r}")
    lo = _float_arg("--from", args.z_from)
    hi = _float_arg("--to", args.z_to)
    step = _float_arg("--step", args.step)
    rows = sweep_rows(scenario, args.vary_user, _frange(lo, hi, step), schemes, args.grid_step, args.jobs)
    _emit(_csv_text(("vary_user", "z", "scheme", "t_server", "scheme_params"), rows), args.out)
    return EXIT_OK


def cmd_baselines(args):
    scenario = load_scenario(args.scenario)
    rows = [(name, _num(v)) for name, v in _baseline_rows(scenario)]
    _emit(_csv_text(("quantity", "value"), rows), args.out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="hetcast", description="Rateless broadcast to users with heterogeneous demands.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario JSON file")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)

    scheme = argparse.ArgumentParser(add_help=False)
    scheme.add_argument("--scheme", choices=SCHEMES, default="lt")
    scheme.add_argument("--dist", default="auto", help="distribution JSON, or auto to optimize")
    scheme.add_argument("--scale", default="auto", help="growth scale factor, or auto")
    scheme.add_argument("--chunks", default="auto", help="number of chunks, or auto")

    o = sub.add_parser("optimize", parents=[common], help="design the LT degree distribution")
    o.add_argument("--systematic", action="store_true")
    o.set_defaults(func=cmd_optimize)

    a = sub.add_parser("analyze", parents=[common, scheme], help="analytic delivery times and baselines")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", parents=[common, scheme], help="Monte-Carlo delivery times")
    s.add_argument("--runs", type=int, default=100)
    s.add_argument("--cap-multiplier", type=float, default=DEFAULT_CAP_MULTIPLIER)
    s.add_argument("--trace", default=None, help="write the mean decoded-fraction trajectory CSV here")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", parents=[common], help="server delivery time while one demand varies")
    w.add_argument("--vary-user", type=int, default=1)
    w.add_argument("--from", dest="z_from", default="1/16")
    w.add_argument("--to", dest="z_to", default="15/16")
    w.add_argument("--step", default="1/16")
    w.add_argument("--schemes", default=",".join(SCHEMES))
    w.add_argument("--jobs", type=int, default=1)
    w.set_defaults(func=cmd_sweep)

    b = sub.add_parser("baselines", parents=[common], help="lower bound, unicast and time-sharing")
    b.set_defaults(func=cmd_baselines)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hetcast {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HetcastError, ArithmeticError, OSError) as exc:
        print(f"hetcast {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Batch command-line entry point.

One verification task per process invocation; every run writes a single
machine-readable report that echoes the fully resolved configuration, so a
report alone suffices to replay the run.  Reports are written atomically
(temp file in the target directory, then rename).

Exit codes: 0 the run completed (negative mathematical verdicts are still
data, not errors), 1 the configuration failed validation, 2 a numerical
computation failed (integration or singular-value breakdown).
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import tempfile
from fractions import Fraction

from .curves import (
    CurveError,
    HyperellipticCurve,
    PlaneQuartic,
    curve_from_json,
    curve_to_json,
)
from .field import ExactScalar, SingularValueError
from .immersion import fd_step_ladder, immersion_experiment, make_center
from .monodromy import (
    ClearanceError,
    IntegrationError,
    build_loops,
    irreducibility_probe,
    monodromy,
    trace_vector,
)
from .multiplication import criterion_injective, lazarsfeld_scan, noether_check
from .systems import (
    builtin_algebra,
    dimension_report,
    dyad_detect,
    sample_system,
    scale_system,
    system_from_json,
    system_to_json,
)

__all__ = ["main"]


class ConfigError(ValueError):
    pass


def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as err:
        raise ConfigError(f"cannot parse rational {text!r}: {err}") from None


def _curve_from_args(args) -> object:
    sources = [
        args.branch_points is not None,
        args.quartic is not None,
        args.curve_json is not None,
    ]
    if sum(sources) != 1:
        raise ConfigError(
            "specify exactly one of --branch-points, --quartic, --curve-json"
        )
    if args.branch_points is not None:
        values = [_parse_rational(v) for v in args.branch_points.split(",") if v.strip()]
        if len(values) < 5:
            raise ConfigError("--branch-points needs at least 5 values (genus >= 2)")
        try:
            return HyperellipticCurve(tuple(ExactScalar.of(v) for v in values))
        except CurveError as err:
            raise ConfigError(f"--branch-points invalid: {err}") from None
    if args.quartic is not None:
        if args.quartic == "fermat":
            return PlaneQuartic.fermat()
        if args.quartic == "klein":
            return PlaneQuartic.klein()
        raise ConfigError("--quartic must be fermat or klein")
    try:
        with open(args.curve_json) as fh:
            return curve_from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, CurveError, KeyError) as err:
        raise ConfigError(f"--curve-json invalid: {err}") from None


def _system_from_args(args, curve):
    if args.system_json is not None:
        try:
            with open(args.system_json) as fh:
                system = system_from_json(json.load(fh))
        except (OSError, json.JSONDecodeError, ValueError, KeyError) as err:
            raise ConfigError(f"--system-json invalid: {err}") from None
        return system
    lie = builtin_algebra(args.algebra)
    system = sample_system(curve, lie, seed=args.seed, coefficient_bound=args.bound)
    if args.scale != "1":
        system = scale_system(system, ExactScalar.of(_parse_rational(args.scale)))
    return system


def _positive(args, name):
    value = getattr(args, name)
    if value is None or value <= 0:
        raise ConfigError(f"{name.replace('_', '-')} must be positive")
    return value


def _json_only(args, subcommand):
    if args.format == "csv":
        raise ConfigError(
            f"--format csv is not available for {subcommand}; CSV covers only "
            "the lazarsfeld tally and the immersion singular-value table"
        )


def _write_report(args, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(args.out)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".diffsys-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, args.out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(args, rows) -> None:
    text = "\n".join(",".join(str(x) for x in row) for row in rows) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(args.out)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".diffsys-", suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, args.out)


def _report(args, subcommand, config, result) -> dict:
    return {
        "subcommand": subcommand,
        "config": config,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "result": result,
    }


# -- subcommand handlers -------------------------------------------------------


def _cmd_dims(args):
    _json_only(args, "dims")
    if args.genus < 2:
        raise ConfigError("--genus must be >= 2")
    lie = builtin_algebra(args.algebra)
    report = dimension_report(args.genus, lie)
    config = {"genus": args.genus, "algebra": args.algebra, "seed": args.seed}
    _write_report(args, _report(args, "dims", config, report.to_json()))
    return 0


def _cmd_noether(args):
    _json_only(args, "noether")
    curve = _curve_from_args(args)
    verdict = noether_check(curve)
    config = {"curve": curve_to_json(curve), "seed": args.seed}
    _write_report(args, _report(args, "noether", config, verdict.to_json()))
    return 0


def _cmd_lazarsfeld(args):
    curve = _curve_from_args(args)
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    if args.w_dim < 1 or args.w_dim > curve.genus:
        raise ConfigError(f"--w-dim must lie in 1..{curve.genus}")
    scan = lazarsfeld_scan(
        curve, trials=args.trials, w_dim=args.w_dim, seed=args.seed, threads=args.threads
    )
    config = {
        "curve": curve_to_json(curve),
        "trials": args.trials,
        "w_dim": args.w_dim,
        "seed": args.seed,
    }
    if args.format == "csv":
        rows = [("trials", "successes", "failures")]
        rows.append((scan.trials, scan.successes, scan.trials - scan.successes))
        _write_csv(args, rows)
        return 0
    _write_report(args, _report(args, "lazarsfeld", config, scan.to_json()))
    return 0


def _cmd_criterion(args):
    _json_only(args, "criterion")
    curve = _curve_from_args(args)
    system = _system_from_args(args, curve)
    if system.curve != curve:
        raise ConfigError("system curve does not match the requested curve")
    verdict = criterion_injective(curve, system)
    dyad = dyad_detect(system)
    config = {
        "curve": curve_to_json(curve),
        "system": system_to_json(system),
        "seed": args.seed,
    }
    result = {"criterion": verdict.to_json(), "dyad": dyad.to_json()}
    _write_report(args, _report(args, "criterion", config, result))
    return 0


def _cmd_monodromy(args):
    _json_only(args, "monodromy")
    curve = _curve_from_args(args)
    if not isinstance(curve, HyperellipticCurve):
        raise ConfigError("monodromy runs on hyperelliptic curves only")
    system = _system_from_args(args, curve)
    ode_tol = _positive(args, "ode_tol")
    clearance = _positive(args, "clearance")
    loops = build_loops(curve, clearance)
    rep = monodromy(curve, system, loops, ode_tol, threads=args.threads)
    traces = trace_vector(rep)
    probe = irreducibility_probe(rep)
    config = {
        "curve": curve_to_json(curve),
        "system": system_to_json(system),
        "seed": args.seed,
        "ode_tol": ode_tol,
        "clearance": clearance,
    }
    result = {
        "representation": rep.to_json(),
        "traces": traces.to_json(),
        "irreducibility": probe.to_json(),
        "loops": loops.to_json(),
    }
    _write_report(args, _report(args, "monodromy", config, result))
    return 0


def _cmd_immersion(args):
    ode_tol = _positive(args, "ode_tol")
    clearance = _positive(args, "clearance")
    steps = [float(s) for s in args.fd_steps.split(",") if s.strip()]
    if not steps or any(s <= 0 for s in steps):
        raise ConfigError("--fd-steps must be positive reals")
    branch = [_parse_rational(v) for v in args.branch_points.split(",")] if args.branch_points else [0, 1, 2, 3, 4]
    try:
        center = make_center(
            seed=args.seed,
            branch=tuple(branch),
            coefficient_bound=args.bound,
            scale=_parse_rational(args.scale),
            clearance=clearance,
        )
    except (ValueError, CurveError, ClearanceError) as err:
        raise ConfigError(f"cannot build immersion center: {err}") from None
    config = {
        "center": center.to_json(),
        "seed": args.seed,
        "ode_tol": ode_tol,
        "fd_steps": steps,
        "threads": args.threads,
    }
    if len(steps) == 1:
        report = immersion_experiment(
            center, steps[0], ode_tol, threads=args.threads
        )
        result = report.to_json()
        sv = report.singular_values
    else:
        ladder = fd_step_ladder(center, steps, ode_tol, threads=args.threads)
        result = ladder.to_json()
        sv = ladder.reports[0].singular_values
    if args.format == "csv":
        rows = [("index", "singular_value")] + [(i + 1, s) for i, s in enumerate(sv)]
        _write_csv(args, rows)
        return 0
    result["loops"] = center.loops.to_json()
    _write_report(args, _report(args, "immersion", config, result))
    return 0


def _add_curve_args(p):
    p.add_argument("--branch-points", help="comma-separated exact rationals, e.g. 0,1,2,3,4")
    p.add_argument("--quartic", choices=["fermat", "klein"], help="built-in smooth quartic")
    p.add_argument("--curve-json", help="path to a curve description JSON file")


def _add_common(p):
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffsys",
        description="rank criteria on curves and numerical monodromy experiments",
    )
    parser.add_argument("--config", help="JSON file of arguments (overridden by flags)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("dims", help="dimension formulas for the moduli spaces")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--algebra", default="sl2", choices=["sl2", "gl2", "sl3"])
    _add_common(p)
    p.set_defaults(func=_cmd_dims)

    p = sub.add_parser("noether", help="surjectivity of the full multiplication map")
    _add_curve_args(p)
    _add_common(p)
    p.set_defaults(func=_cmd_noether)

    p = sub.add_parser("lazarsfeld", help="random-subspace surjectivity scan")
    _add_curve_args(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--w-dim", type=int, default=3)
    _add_common(p)
    p.set_defaults(func=_cmd_lazarsfeld)

    p = sub.add_parser("criterion", help="injectivity criterion for a system")
    _add_curve_args(p)
    p.add_argument("--algebra", default="sl2", choices=["sl2", "gl2", "sl3"])
    p.add_argument("--bound", type=int, default=5)
    p.add_argument("--scale", default="1", help="exact rational factor applied to sampled coefficients")
    p.add_argument("--system-json", help="path to a system JSON file (overrides sampling)")
    _add_common(p)
    p.set_defaults(func=_cmd_criterion)

    p = sub.add_parser("monodromy", help="full monodromy representation with traces")
    _add_curve_args(p)
    p.add_argument("--algebra", default="sl2", choices=["sl2"])
    p.add_argument("--bound", type=int, default=5)
    p.add_argument("--scale", default="1/8")
    p.add_argument("--system-json")
    p.add_argument("--ode-tol", type=float, default=1e-12)
    p.add_argument("--clearance", type=float, default=0.22)
    _add_common(p)
    p.set_defaults(func=_cmd_monodromy)

    p = sub.add_parser("immersion", help="finite-difference rank of the monodromy map")
    p.add_argument("--branch-points", help="odd-model normalized branch points (default 0,1,2,3,4)")
    p.add_argument("--bound", type=int, default=5)
    p.add_argument("--scale", default="1/8")
    p.add_argument("--fd-steps", default="1e-4,1e-5,1e-6")
    p.add_argument("--ode-tol", type=float, default=1e-12)
    p.add_argument("--clearance", type=float, default=0.22)
    _add_common(p)
    p.set_defaults(func=_cmd_immersion)

    return parser


def _apply_config_file(parser, argv):
    """--config supplies defaults; explicit flags win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        raise ConfigError("--config requires a path") from None
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"--config invalid: {err}") from None
    if not isinstance(data, dict) or "subcommand" not in data:
        raise ConfigError("--config must be an object with a 'subcommand' field")
    rebuilt = [str(data["subcommand"])]
    for key, value in data.items():
        if key == "subcommand":
            continue
        flag = "--" + key.replace("_", "-")
        rebuilt += [flag, str(value)]
    rest = [a for i, a in enumerate(argv) if i not in (idx, idx + 1)]
    return rebuilt + rest


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as err:
        # argparse exits itself on --help (0) and on bad usage; bad usage is
        # a configuration error under this tool's exit-code contract
        return 0 if err.code in (0, None) else 1
    except ConfigError as err:
        print(f"diffsys: configuration error: {err}", file=sys.stderr)
        return 1
    except (ClearanceError, CurveError, ValueError) as err:
        print(f"diffsys: configuration error: {err}", file=sys.stderr)
        return 1
    except (IntegrationError, SingularValueError) as err:
        print(f"diffsys: numerical failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

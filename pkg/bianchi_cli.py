"""Command-line front end for the cocycle toolkit.

Every subcommand prints one JSON document on stdout. Exit codes: 0 on
success, 1 when a verification fails, 2 for usage, configuration or input
errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

import mpmath as mp

from config import configure_logging
from core.cache import ConstantsCache
from core.cocycle import CocycleConsistencyError, phi, phi_n, phi_pq
from core.dedekind import DedekindInput, error_budget
from core.eisenstein import PrecisionExhaustedError, SeriesError, complex_to_json, lattice_series
from core.harmonic import ConventionError, Point3, harmonic_lift
from core.lseries import geodesic_data, integral_check, l_closed_s1, l_direct
from core.pipeline import SUITES, Config, ConfigError, resolve_convention, run_suite
from core.quadfield import OrderError, QuadFrac, parse_matrix, parse_quadfrac, parse_quadint

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

SERIES_KINDS = ("e0", "e1", "e2", "e", "e2zero", "h", "hn")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--disc", type=int, help="Field discriminant of the order (default from BIANCHI_DISC)")
    common.add_argument("--N", dest="level", help="Level generator, e.g. sqrt-2 or 1+w")
    common.add_argument("--prec", dest="precision", type=int, help="Working precision in bits")
    common.add_argument("--seed", type=int, help="Seed for the random samplers")
    common.add_argument("--config", dest="config_file", help="JSON file overriding the defaults")
    common.add_argument("--log-level", dest="log_level", help="Logging level, e.g. DEBUG or WARNING")
    return common


def _pq_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", help="Torsion point p as re,im or x+y*w with rational x, y")
    parser.add_argument("--q", help="Torsion point q as re,im or x+y*w with rational x, y")


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="bianchi_cli",
        description="Evaluate and verify the Dedekind-Rademacher cocycle of an imaginary quadratic order.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    series = commands.add_parser("series", help="Lattice Eisenstein series")
    series_actions = series.add_subparsers(dest="action", required=True)
    series_eval = series_actions.add_parser("eval", parents=[common], help="Evaluate one series at a point")
    series_eval.add_argument("--kind", choices=SERIES_KINDS, required=True)
    series_eval.add_argument("--point", default="0", help="Point of C as re,im or x+y*w")
    series_eval.add_argument("--v", default="1", help="Height above C for the harmonic kinds h, hn")
    series_eval.add_argument("--evaluator", choices=("reference", "fast"))

    dedekind = commands.add_parser("dedekind", parents=[common], help="Generalized Dedekind sum D(a, c; p, q)")
    dedekind.add_argument("--a", required=True)
    dedekind.add_argument("--c", required=True)
    _pq_options(dedekind)

    cocycle = commands.add_parser("cocycle", parents=[common], help="Phi(A)(p, q), or Phi_N(A) with --N")
    cocycle.add_argument("--matrix", required=True, help="Entries a,b,c,d in x+y*w syntax")
    _pq_options(cocycle)

    verify = commands.add_parser("verify", parents=[common], help="Run a verification suite")
    verify.add_argument("suite", choices=SUITES)
    verify.add_argument("--samples", type=int, help="Number of random samples for the suite")
    verify.add_argument("--workers", type=int, help="Worker threads")
    verify.add_argument("--tolerance", type=float, help="Override the suite tolerance")
    verify.add_argument("--p", dest="hecke_prime", help="Hecke prime for the hecke suite")
    verify.add_argument("--evaluator", choices=("reference", "fast"))

    lvalue = commands.add_parser("lvalue", help="Partial L-values along closed geodesics")
    lvalue_actions = lvalue.add_subparsers(dest="action", required=True)
    for name, help_text in (
        ("direct", "Direct orbit sum in the convergence region"),
        ("closed", "Closed form at s = 1 through Phi_N"),
        ("check-integral", "Geodesic integral of the Eisenstein 1-form"),
    ):
        action = lvalue_actions.add_parser(name, parents=[common], help=help_text)
        action.add_argument("--matrix", required=True)
        action.add_argument("--s", default="2", help="Complex argument s as re or re,im")
        action.add_argument("--radius", type=float, help="Norm bound for the orbit enumeration")
        _pq_options(action)

    cache = commands.add_parser("cache", help="Lattice constants cache")
    cache_actions = cache.add_subparsers(dest="action", required=True)
    for name in ("show", "clear", "warm"):
        cache_actions.add_parser(name, parents=[common])

    return parser.parse_args(argv)


def _config(args: argparse.Namespace) -> Config:
    overrides = {
        "disc": args.disc,
        "level": args.level,
        "precision": args.precision,
        "seed": args.seed,
        "workers": getattr(args, "workers", None),
        "evaluator": getattr(args, "evaluator", None),
    }
    config = Config.from_sources(args.config_file, **overrides)
    if args.command == "verify":
        if args.samples is not None:
            config.samples[args.suite] = args.samples
        if args.tolerance is not None:
            config.tolerances[args.suite] = args.tolerance
        if args.hecke_prime:
            config.hecke_primes = [args.hecke_prime]
    config.validate()
    return config


def _point_pair(args: argparse.Namespace, config: Config) -> tuple[QuadFrac | None, QuadFrac | None]:
    order = config.order()
    p = parse_quadfrac(args.p, order) if args.p else None
    q = parse_quadfrac(args.q, order) if args.q else None
    return p, q


def _parse_s(text: str) -> mp.mpc:
    re_text, _, im_text = text.partition(",")
    return mp.mpc(mp.mpf(re_text), mp.mpf(im_text or "0"))


def _run_series(args: argparse.Namespace, config: Config) -> dict[str, object]:
    lattice, params = config.lattice(), config.params()
    series = lattice_series(lattice, params)
    result: dict[str, object] = {"kind": args.kind, "point": args.point, "disc": config.disc}
    if args.kind == "e2zero":
        value = series.e2zero
    elif args.kind in ("h", "hn"):
        z = parse_quadfrac(args.point, lattice.order)
        u = Point3.of(z, args.v)
        lift = harmonic_lift(lattice, params, resolve_convention(config, lattice, params))
        value = lift.value(u) if args.kind == "h" else lift.value_n(u, config.level_ideal())
        result["v"] = args.v
        result["convention"] = lift.convention.name
    else:
        x = parse_quadfrac(args.point, lattice.order)
        value = getattr(series, args.kind)(x)
    result["value"] = complex_to_json(value)
    result["error_budget"] = mp.nstr(params.error, 5)
    return result


def _run_dedekind(args: argparse.Namespace, config: Config) -> dict[str, object]:
    lattice, order = config.lattice(), config.order()
    p, q = _point_pair(args, config)
    level = config.level_ideal() if args.level else None
    c = parse_quadint(args.c, order)
    request = DedekindInput(parse_quadint(args.a, order), c, p, q, level)
    value = request.evaluate(lattice, config.params())
    return {
        "a": str(request.a),
        "c": str(request.c),
        "N": args.level or "1",
        "value": complex_to_json(value),
        "error_budget": mp.nstr(error_budget(c, config.params()), 5),
    }


def _run_cocycle(args: argparse.Namespace, config: Config) -> dict[str, object]:
    lattice = config.lattice()
    matrix = parse_matrix(args.matrix, lattice.order)
    p, q = _point_pair(args, config)
    if args.level:
        value = phi_n(matrix, config.level_ideal(), lattice, config.params(), p=p, q=q)
    elif p is None and q is None:
        value = phi(matrix, lattice, config.params())
    else:
        value = phi_pq(matrix, p, q, lattice, config.params())
    return value.to_json()


def _run_lvalue(args: argparse.Namespace, config: Config) -> dict[str, object]:
    lattice = config.lattice()
    matrix = parse_matrix(args.matrix, lattice.order)
    level = config.level_ideal() if args.level else None
    data = geodesic_data(matrix, level)
    p, q = _point_pair(args, config)
    result: dict[str, object] = {"geodesic": data.to_json()}
    if args.action == "direct":
        bound = args.radius if args.radius is not None else 200.0
        result["l_value"] = l_direct(data, _parse_s(args.s), lattice, p=p, q=q, bound=bound).to_json()
    elif args.action == "closed":
        result["closed_form"] = l_closed_s1(data, lattice, config.params(), p=p, q=q).to_json()
    else:
        bound = args.radius if args.radius is not None else 40.0
        check = integral_check(data, mp.re(_parse_s(args.s)), lattice, p=p, q=q, bound=bound)
        result["integral_check"] = check.to_json()
    return result


def _run_cache(args: argparse.Namespace, config: Config) -> dict[str, object]:
    cache = ConstantsCache(config.cache_dir)
    if args.action == "show":
        return {"directory": str(config.cache_dir), "entries": cache.entries()}
    if args.action == "clear":
        return {"directory": str(config.cache_dir), "removed": cache.clear()}
    lattice, params = config.lattice(), config.params()
    convention = resolve_convention(config, lattice, params)
    return {
        "directory": str(config.cache_dir),
        "file": cache.path_for(lattice, mp.mp.prec).name,
        "h_convention": convention.name,
    }


_HANDLERS = {
    "series": _run_series,
    "dedekind": _run_dedekind,
    "cocycle": _run_cocycle,
    "lvalue": _run_lvalue,
    "cache": _run_cache,
}


def _emit(payload: dict[str, object]) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=False, default=str)
    sys.stdout.write("\n")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    configure_logging(args.log_level)
    try:
        config = _config(args)
        if args.command == "verify":
            report = run_suite(args.suite, config)
            _emit({"config": config.echo(), **report.to_json()})
            return EXIT_OK if report.passed else EXIT_FAILED
        with mp.workprec(config.precision):
            _emit(_HANDLERS[args.command](args, config))
        return EXIT_OK
    except CocycleConsistencyError as exc:
        logger.error("Consistency check failed: %s", exc)
        _emit({"error": str(exc), "kind": "consistency"})
        return EXIT_FAILED
    except ConventionError as exc:
        logger.error("%s (residuals %s)", exc, exc.residuals)
        _emit({"error": str(exc), "kind": "convention", "residuals": exc.residuals})
        return EXIT_FAILED
    except (ConfigError, OrderError, SeriesError, PrecisionExhaustedError, ValueError) as exc:
        logger.error("%s", exc)
        _emit({"error": str(exc), "kind": type(exc).__name__})
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

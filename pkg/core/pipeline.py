"""Verification suites for the cocycle toolkit.

Each suite draws seeded random cases, evaluates one residual per case on a
thread pool and collects the results, in submission order, into a
:class:`Report`. A failing case is logged and recorded; it never aborts the
suite.
"""

from __future__ import annotations

import json
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import mpmath as mp

from config import CACHE_DIR, DEFAULT_DISC, DEFAULT_LEVEL, DEFAULT_PRECISION, DEFAULT_SEED, DEFAULT_WORKERS
from core.cache import ConstantsCache
from core.cocycle import (
    check_cocycle,
    check_cocycle_n,
    check_transformation,
    homomorphism_residual,
    phi,
    phi_n,
    phi_n_single_factor,
    pin_convention,
)
from core.eisenstein import (
    Evaluator,
    LatticeConstants,
    SeriesParams,
    e2zero_qseries,
    epstein_zeta,
    lattice_series,
)
from core.harmonic import HConvention, Point3, harmonic_lift, hyperbolic_laplacian
from core.hecke import HeckeError, coset_reps, hecke_eigen_check, involution_apply
from core.lseries import GeodesicPath, geodesic_data, integral_check, l_closed_s1, random_admissible
from core.quadfield import (
    Lattice,
    Level,
    Mat2,
    OrderSpec,
    QuadFrac,
    parse_quadint,
    random_gamma0,
    random_sl2,
    random_torsion_point,
    residues,
)
from core.recognition import FieldSpec, RecognitionStatus, recognize_integrality

logger = logging.getLogger(__name__)

SUITES = (
    "cocycle-relation",
    "homomorphism",
    "phi-n-consistency",
    "transformation",
    "harmonicity",
    "eisenstein",
    "hecke",
    "lseries",
    "integrality",
)

DEFAULT_SAMPLES: dict[str, int] = {
    "cocycle-relation": 100,
    "homomorphism": 100,
    "phi-n-consistency": 100,
    "transformation": 25,
    "harmonicity": 5,
    "eisenstein": 10,
    "hecke": 25,
    "lseries": 5,
    "integrality": 5,
}

DEFAULT_TOLERANCES: dict[str, float] = {
    "cocycle-relation": 1e-20,
    "homomorphism": 1e-20,
    "phi-n-consistency": 1e-20,
    "transformation": 1e-9,
    "harmonicity": 0.5,
    "eisenstein": 1e-15,
    "hecke": 1e-18,
    "lseries": 1e-4,
    "integrality": 1e-40,
}

INTEGRALITY_BITS = 210


class ConfigError(ValueError):
    """Raised for inconsistent settings (unknown suite, unreachable tolerance, bad level)."""


@dataclass
class Config:
    disc: int = DEFAULT_DISC
    level: str = DEFAULT_LEVEL
    precision: int = DEFAULT_PRECISION
    seed: int = DEFAULT_SEED
    workers: int = DEFAULT_WORKERS
    cache_dir: Path = CACHE_DIR
    height: int = 30
    pq_per_pair: int = 5
    torsion_denominator: int = 3
    evaluator: str = Evaluator.REFERENCE.value
    hecke_primes: list[str] = field(default_factory=lambda: ["sqrt-2", "1+w"])
    samples: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SAMPLES))
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    @classmethod
    def from_sources(cls, config_file: str | Path | None = None, **overrides: object) -> Config:
        """Defaults from ``config.py``, then a JSON file, then explicit overrides."""

        config = cls()
        if config_file:
            try:
                document = json.loads(Path(config_file).read_text(encoding="utf-8"))
            except (OSError, ValueError) as exc:
                raise ConfigError(f"cannot read config file {config_file}: {exc}") from exc
            config.update(document)
        config.update({key: value for key, value in overrides.items() if value is not None})
        return config

    def update(self, values: dict[str, object]) -> None:
        for key, value in values.items():
            if key in ("samples", "tolerances"):
                getattr(self, key).update(value)  # type: ignore[arg-type]
            elif key == "cache_dir":
                self.cache_dir = Path(str(value))
            elif hasattr(self, key):
                setattr(self, key, value)
            else:
                raise ConfigError(f"unknown config key {key!r}")

    def minimum_tolerance(self, precision: int | None = None) -> float:
        return float(10 * mp.ldexp(1, -((precision or self.precision) - 16)))

    def suite_precision(self, suite: str) -> int:
        return max(self.precision, INTEGRALITY_BITS) if suite == "integrality" else self.precision

    def validate(self) -> None:
        if self.precision < 53:
            raise ConfigError(f"precision {self.precision} bits is below double precision")
        for suite, tolerance in self.tolerances.items():
            if suite not in SUITES:
                raise ConfigError(f"tolerance given for unknown suite {suite!r}")
            floor = self.minimum_tolerance(self.suite_precision(suite))
            if tolerance < floor:
                raise ConfigError(
                    f"tolerance {tolerance:g} for {suite} is below the reachable budget {floor:.3g} "
                    f"at {self.suite_precision(suite)} bits"
                )
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        try:
            Evaluator(self.evaluator)
        except ValueError as exc:
            raise ConfigError(f"unknown evaluator {self.evaluator!r}") from exc
        self.level_ideal()

    def order(self) -> OrderSpec:
        return OrderSpec(self.disc)

    def lattice(self) -> Lattice:
        return Lattice(self.order())

    def level_ideal(self) -> Level:
        try:
            return Level(parse_quadint(self.level, self.order()))
        except ValueError as exc:
            raise ConfigError(f"invalid level {self.level!r}: {exc}") from exc

    def params(self) -> SeriesParams:
        return SeriesParams(precision=mp.mp.prec, evaluator=Evaluator(self.evaluator))

    def echo(self) -> dict[str, object]:
        payload = asdict(self)
        payload["cache_dir"] = str(self.cache_dir)
        return payload


@dataclass
class CaseResult:
    index: int
    inputs: dict[str, object]
    residual: float | None
    tolerance: float
    passed: bool
    error: str | None = None


@dataclass
class Report:
    suite: str
    tolerance: float
    cases: list[CaseResult] = field(default_factory=list)
    wall_time: float = 0.0
    environment: dict[str, object] = field(default_factory=dict)

    @property
    def max_residual(self) -> float | None:
        values = [case.residual for case in self.cases if case.residual is not None]
        return max(values) if values else None

    @property
    def passed(self) -> bool:
        return bool(self.cases) and all(case.passed for case in self.cases)

    @property
    def failing(self) -> list[CaseResult]:
        return [case for case in self.cases if not case.passed]

    def to_json(self) -> dict[str, object]:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "cases": len(self.cases),
            "failing": [asdict(case) for case in self.failing],
            "results": [asdict(case) for case in self.cases],
            "wall_time": round(self.wall_time, 3),
            "environment": self.environment,
        }


@dataclass
class Case:
    inputs: dict[str, object]
    evaluate: Callable[[], mp.mpf | float]
    tolerance: float | None = None


def _run_case(index: int, case: Case, tolerance: float) -> CaseResult:
    limit = case.tolerance if case.tolerance is not None else tolerance
    try:
        residual = float(case.evaluate())
    except Exception as exc:  # noqa: BLE001
        logger.exception("Case %d failed with inputs %s", index, case.inputs)
        return CaseResult(index, case.inputs, None, limit, False, f"{type(exc).__name__}: {exc}")
    logger.debug("Case %d residual %.3e", index, residual)
    return CaseResult(index, case.inputs, residual, limit, residual <= limit)


def _constants(config: Config, lattice: Lattice, params: SeriesParams) -> LatticeConstants:
    cache = ConstantsCache(config.cache_dir)
    return cache.get_or_compute(lattice, mp.mp.prec, lambda: lattice_series(lattice, params).constants())


def resolve_convention(config: Config, lattice: Lattice, params: SeriesParams) -> HConvention:
    """The cached ``H`` convention, pinned and stored on first use."""

    cache = ConstantsCache(config.cache_dir)
    constants = _constants(config, lattice, params)
    if constants.h_convention:
        return HConvention.parse(constants.h_convention)
    convention = pin_convention(lattice, params, tolerance=config.tolerances["transformation"])
    constants.h_convention = convention.name
    cache.store(lattice, constants)
    return convention


def _level_torsion(level: Level, rng: random.Random) -> tuple[QuadFrac, QuadFrac]:
    """``p`` in ``L`` and ``q`` in ``(N-1)^-1 L``, where ``(p,q)A_N = (p,q)A`` on ``Gamma0(N)``."""

    order = level.order
    shifted = level.generator - 1
    reps = residues(shifted)
    q = (reps[rng.randrange(len(reps))] / shifted).reduce()
    return order.zero().to_frac(), q


def _cocycle_cases(config: Config, lattice: Lattice, params: SeriesParams, rng: random.Random) -> list[Case]:
    order, level = lattice.order, config.level_ideal()
    cases = []
    for _ in range(config.samples["cocycle-relation"]):
        a, b = random_sl2(order, config.height, rng=rng), random_sl2(order, config.height, rng=rng)
        an, bn = random_gamma0(level, config.height, rng=rng), random_gamma0(level, config.height, rng=rng)
        for _ in range(config.pq_per_pair):
            p = random_torsion_point(order, config.torsion_denominator, rng)
            q = random_torsion_point(order, config.torsion_denominator, rng)
            pn, qn = _level_torsion(level, rng)

            def evaluate(a=a, b=b, an=an, bn=bn, p=p, q=q, pn=pn, qn=qn) -> mp.mpf:
                plain = check_cocycle(a, b, lattice, params, p=p, q=q)
                smeared = check_cocycle_n(an, bn, level, lattice, params, p=pn, q=qn)
                return max(plain, smeared)

            inputs = {"A": str(a), "B": str(b), "A_N": str(an), "B_N": str(bn), "p": str(p), "q": str(q), "q_N": str(qn)}
            cases.append(Case(inputs, evaluate))
    return cases


def _homomorphism_cases(config: Config, lattice: Lattice, params: SeriesParams, rng: random.Random) -> list[Case]:
    level = config.level_ideal()
    cases = []
    for _ in range(config.samples["homomorphism"]):
        a, b = random_gamma0(level, config.height, rng=rng), random_gamma0(level, config.height, rng=rng)

        def evaluate(a=a, b=b) -> mp.mpf:
            return max(
                homomorphism_residual(a, b, lattice, params),
                homomorphism_residual(a, b, lattice, params, level=level),
            )

        cases.append(Case({"A": str(a), "B": str(b)}, evaluate))
    return cases


def _phi_n_cases(config: Config, lattice: Lattice, params: SeriesParams, rng: random.Random) -> list[Case]:
    level = config.level_ideal()
    cases = []
    for _ in range(config.samples["phi-n-consistency"]):
        a = random_gamma0(level, config.height, rng=rng)
        p = random_torsion_point(lattice.order, config.torsion_denominator, rng)
        q = random_torsion_point(lattice.order, config.torsion_denominator, rng)

        def evaluate(a=a, p=p, q=q) -> mp.mpf:
            literal = phi_n(a, level, lattice, params, p=p, q=q)
            drift = abs(phi_n_single_factor(a, level, lattice, params, p=p, q=q) - literal.value)
            logger.debug("Phi_N(%s): single (N-1) factor form differs by %s", a, mp.nstr(drift, 5))
            return literal.cross_check or mp.mpf(0)

        cases.append(Case({"A": str(a), "p": str(p), "q": str(q)}, evaluate))
    return cases


def _transformation_points(lattice: Lattice) -> list[Point3]:
    second = QuadFrac(Fraction(3, 10), Fraction(1, 10), lattice.order)
    return [Point3.of(mp.mpc(0), 1), Point3.of(second, "0.8")]


def _transformation_cases(config: Config, lattice: Lattice, params: SeriesParams, rng: random.Random) -> list[Case]:
    order, level = lattice.order, config.level_ideal()
    convention = resolve_convention(config, lattice, params)
    points = _transformation_points(lattice)
    cases = []
    for _ in range(config.samples["transformation"]):
        a = random_sl2(order, config.height, rng=rng)
        an = random_gamma0(level, config.height, rng=rng)

        def evaluate(a=a, an=an) -> mp.mpf:
            residuals = [check_transformation(a, u, lattice, params, convention=convention) for u in points]
            residuals += [
                check_transformation(an, u, lattice, params, level=level, convention=convention) for u in points
            ]
            return max(residuals)

        cases.append(Case({"A": str(a), "A_N": str(an), "convention": convention.name}, evaluate))
    return cases


def _harmonicity_cases(config: Config, lattice: Lattice, params: SeriesParams, rng: random.Random) -> list[Case]:
    convention = resolve_convention(config, lattice, params)
    lift = harmonic_lift(lattice, params, convention)
    odd_tolerance = 1e-15
    cases = []
    for _ in range(config.samples["harmonicity"]):
        u = Point3(mp.mpc(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)), mp.mpf(rng.uniform(0.8, 1.5)))

        def ratio(u=u) -> float:
            coarse = abs(hyperbolic_laplacian(lift.value, u, mp.mpf("1e-3")))
            fine = abs(hyperbolic_laplacian(lift.value, u, mp.mpf("5e-4")))
            return abs(coarse / fine - 4)

        def oddness(u=u) -> mp.mpf:
            return abs(lift.value(u.reflect()) + lift.value(u))

        cases.append(Case({"u": str(u), "check": "laplacian-ratio"}, ratio))
        cases.append(Case({"u": str(u), "check": "oddness"}, oddness, odd_tolerance))
    return cases


DISTRIBUTION_MODULI = ("1+w", "2", "1-w", "3", "2+w")


def _eisenstein_cases(config: Config, lattice: Lattice, params: SeriesParams, rng: random.Random) -> list[Case]:
    order = lattice.order
    series = lattice_series(lattice, params)
    fast = lattice_series(lattice, SeriesParams(precision=params.precision, evaluator=Evaluator.FAST))
    cases = []
    for text in DISTRIBUTION_MODULI:
        c = parse_quadint(text, order)
        if c.norm() > 25 or c.is_unit():
            continue
        for _ in range(config.samples["eisenstein"]):
            x = random_torsion_point(order, 7, rng)
            if x.is_zero():
                continue
            for k in (1, 2):

                def evaluate(c=c, x=x, k=k) -> mp.mpf:
                    kind = "e1" if k == 1 else "e2"
                    lhs = mp.fsum(series.value(kind, (x + r) / c) for r in residues(c))
                    rhs = c.to_complex() ** k * series.value(kind, x)
                    return abs(lhs - rhs) / max(abs(rhs), 1)

                cases.append(Case({"c": str(c), "x": str(x), "k": k, "check": "distribution"}, evaluate))
    zero = order.zero().to_frac()
    cases.append(Case({"check": "E(0)=E2(0)"}, lambda: abs(series.e(zero) - series.e2zero), 1e-20))
    cases.append(Case({"check": "E2(0) q-series"}, lambda: abs(e2zero_qseries(lattice) - series.e2zero), 1e-20))
    for x in (zero, random_torsion_point(order, 5, rng)):

        def oracle(x=x) -> mp.mpf:
            return abs(epstein_zeta(mp.mpf("1e-15"), x, lattice, params) - series.e0(x))

        cases.append(Case({"x": str(x), "check": "E0 oracle"}, oracle, 1e-10))
    for _ in range(config.samples["eisenstein"]):
        x = random_torsion_point(order, 11, rng)
        if x.is_zero():
            continue

        def agreement(x=x) -> mp.mpf:
            return max(abs(series.value(kind, x) - fast.value(kind, x)) for kind in ("e1", "e2"))

        cases.append(Case({"x": str(x), "check": "evaluator agreement"}, agreement))
    return cases


def _hecke_cases(config: Config, lattice: Lattice, params: SeriesParams, rng: random.Random) -> list[Case]:
    order, level = lattice.order, config.level_ideal()
    plain = lambda m: phi(m, lattice, params).value  # noqa: E731
    smeared = lambda m: phi_n(m, level, lattice, params).value  # noqa: E731
    cases = []
    for text in config.hecke_primes:
        try:
            p = parse_quadint(text, order)
        except ValueError as exc:
            logger.warning("Skipping Hecke prime %r: %s", text, exc)
            continue
        handles: list[tuple[str, Callable[[Mat2], mp.mpc], Level | None]] = [("Phi", plain, None)]
        try:
            cosets_n = coset_reps(p, level)
            handles.append(("Phi_N", smeared, level))
        except HeckeError as exc:
            logger.warning("Skipping Phi_N at p=%s: %s", p, exc)
            cosets_n = None
        cosets = coset_reps(p)
        for name, handle, handle_level in handles:
            reps = cosets if handle_level is None else cosets_n
            for _ in range(config.samples["hecke"]):
                a = random_sl2(order, config.height, rng=rng) if handle_level is None else random_gamma0(
                    level, config.height, rng=rng
                )

                def evaluate(a=a, handle=handle, reps=reps) -> mp.mpf:
                    return hecke_eigen_check(handle, a, reps).residual

                cases.append(Case({"p": str(p), "phi": name, "A": str(a)}, evaluate))
    for name, handle, make in (
        ("Phi", plain, lambda: random_sl2(order, config.height, rng=rng)),
        ("Phi_N", smeared, lambda: random_gamma0(level, config.height, rng=rng)),
    ):
        for _ in range(config.samples["hecke"]):
            a = make()

            def involution(a=a, handle=handle) -> mp.mpf:
                return abs(involution_apply(handle, a) + handle(a))

            cases.append(Case({"phi": name, "A": str(a), "check": "involution"}, involution, 1e-20))
    return cases


def _lseries_cases(config: Config, lattice: Lattice, params: SeriesParams, rng: random.Random) -> list[Case]:
    level = config.level_ideal()
    cases = []
    for index in range(config.samples["lseries"]):
        data = random_admissible(level, config.height, rng=rng)
        if index == 0:
            plain = geodesic_data(data.matrix)
            cases.append(
                Case(
                    {"A": str(plain.matrix), "N": "1", "check": "integral"},
                    lambda d=plain: integral_check(d, 2, lattice).residual,
                )
            )
        cases.append(
            Case({"A": str(data.matrix), "check": "integral"}, lambda d=data: integral_check(d, 2, lattice).residual)
        )
        cases.append(
            Case({"A": str(data.matrix), "check": "path"}, lambda d=data: GeodesicPath(d).endpoint_residual(), 1e-20)
        )
    for _ in range(config.samples["lseries"] * 5):
        data = random_admissible(level, config.height, rng=rng)
        cases.append(
            Case({"A": str(data.matrix), "check": "closed"}, lambda d=data: l_closed_s1(d, lattice, params).residual, 1e-15)
        )
    return cases


def _integrality_cases(config: Config, lattice: Lattice, params: SeriesParams, rng: random.Random) -> list[Case]:
    level = config.level_ideal()
    field_spec = FieldSpec.from_lattice(lattice)
    tolerance = config.tolerances["integrality"]

    def witness_residual(value: mp.mpc, scaled: bool = False) -> mp.mpf:
        witness = recognize_integrality(value, field_spec, scaled=scaled)
        if witness.status is not RecognitionStatus.FOUND:
            raise ArithmeticError(f"recognition {witness.status.value}: {witness.message}")
        if not witness.integral or witness.height >= 2**40:
            raise ArithmeticError(f"witness is not integral: denominator {witness.denominator}, height {witness.height}")
        return witness.residual or mp.mpf(0)

    cases = [
        Case({"value": "g2"}, lambda: witness_residual(field_spec.g2, scaled=True)),
        Case({"value": "g3"}, lambda: witness_residual(field_spec.g3, scaled=True)),
    ]
    for _ in range(config.samples["integrality"]):
        a = random_gamma0(level, config.height, rng=rng)
        cases.append(Case({"value": "Phi_N", "A": str(a)}, lambda a=a: witness_residual(phi_n(a, level, lattice, params).value)))
    for _ in range(3):
        data = random_admissible(level, config.height, rng=rng)

        def l_value(d=data) -> mp.mpf:
            closed = l_closed_s1(d, lattice, params)
            return witness_residual((d.alpha - d.alpha_p) * closed.l_value)

        cases.append(Case({"value": "(alpha-alpha')L_N", "A": str(data.matrix)}, l_value))
    return cases


_BUILDERS: dict[str, Callable[[Config, Lattice, SeriesParams, random.Random], list[Case]]] = {
    "cocycle-relation": _cocycle_cases,
    "homomorphism": _homomorphism_cases,
    "phi-n-consistency": _phi_n_cases,
    "transformation": _transformation_cases,
    "harmonicity": _harmonicity_cases,
    "eisenstein": _eisenstein_cases,
    "hecke": _hecke_cases,
    "lseries": _lseries_cases,
    "integrality": _integrality_cases,
}


def run_suite(suite: str, config: Config) -> Report:
    """Run one verification suite at the configured precision.

    Args:
        suite: One of :data:`SUITES`.
        config: Validated settings; precision is fixed before the pool starts.

    Returns:
        The report with one :class:`CaseResult` per case, in submission order.
    """

    if suite not in _BUILDERS:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    config.validate()
    tolerance = config.tolerances[suite]
    precision = config.suite_precision(suite)
    started = time.perf_counter()
    with mp.workprec(precision):
        lattice = config.lattice()
        params = config.params()
        rng = random.Random(config.seed)
        logger.info("Starting suite %s on %s at %d bits", suite, lattice.order, precision)
        cases = _BUILDERS[suite](config, lattice, params, rng)
        with ThreadPoolExecutor(max_workers=config.workers, thread_name_prefix=suite) as pool:
            futures = [pool.submit(_run_case, index, case, tolerance) for index, case in enumerate(cases)]
            results = [future.result() for future in futures]
        environment = {
            "precision": precision,
            "disc": config.disc,
            "N": config.level,
            "seed": config.seed,
            "evaluator": config.evaluator,
            "truncation_radius": mp.nstr(lattice_series(lattice, params).radius, 8),
        }
    report = Report(suite, tolerance, results, time.perf_counter() - started, environment)
    logger.info(
        "Finished suite %s: %d cases, max residual %s, %s",
        suite,
        len(results),
        report.max_residual,
        "passed" if report.passed else "FAILED",
    )
    return report

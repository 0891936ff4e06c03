"""Kronecker-Eisenstein series of the lattice ``L = O_L`` and its constants.

The continued values at ``s = 0`` are computed with the incomplete-gamma
theta split (Hecke's method): every series ``sum P(w+x) |w+x|^(-2 sigma)``
with ``P(z) = conj(z)^l`` harmonic is written as a Gaussian-damped direct
lattice sum plus a Gaussian-damped sum over the dual lattice. For the
weights used here the incomplete gamma functions reduce to elementary
exponentials, so both sums converge like ``exp(-pi |w|^2 / area)``.

A second, faster evaluator uses Jacobi theta functions for the Weierstrass
zeta and wp functions; the two agree to the working precision.
"""

from __future__ import annotations

import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Union

import mpmath as mp

from core.quadfield import Lattice, OrderSpec, QuadFrac, QuadInt

logger = logging.getLogger(__name__)

SAFETY_FACTOR = 1e5
"""Truncation radii are chosen for ``target_error / SAFETY_FACTOR``."""

Point = Union[QuadFrac, QuadInt, complex, mp.mpc]


class SeriesError(ValueError):
    """Raised for unsupported series kinds or arguments."""


class PrecisionExhaustedError(ArithmeticError):
    """Raised when a requested accuracy needs a larger truncation radius than allowed."""

    def __init__(self, message: str, required_radius: float) -> None:
        super().__init__(message)
        self.required_radius = required_radius


class Evaluator(str, Enum):
    REFERENCE = "reference"
    FAST = "fast"


@dataclass(frozen=True)
class SeriesParams:
    """Accuracy settings shared by the lattice series and the harmonic lift."""

    precision: int = 128
    target_error: float | None = None
    evaluator: Evaluator = Evaluator.REFERENCE
    max_radius: float = 1e4
    cache_size: int = 4096
    """Most values one :class:`LatticeSeries` keeps; the oldest are evicted first."""

    @property
    def error(self) -> mp.mpf:
        if self.target_error is not None:
            return mp.mpf(self.target_error)
        return mp.ldexp(1, -(self.precision - 10))

    def gaussian_radius(self, decay: mp.mpf) -> mp.mpf:
        """Radius ``R`` with ``exp(-decay R^2) <= error / SAFETY_FACTOR``."""

        return mp.sqrt((mp.log(SAFETY_FACTOR) - mp.log(self.error)) / decay) + 2

    @classmethod
    def ambient(cls, evaluator: Evaluator = Evaluator.REFERENCE) -> SeriesParams:
        return cls(precision=mp.mp.prec, evaluator=evaluator)


@dataclass
class LatticeConstants:
    """Per-lattice analytic data reused by every series evaluation."""

    disc: int
    precision: int
    e2zero: mp.mpc
    pairing: mp.mpc
    area: mp.mpf
    dual_generator: mp.mpc
    truncation_radius: mp.mpf
    g2: mp.mpc | None = None
    g3: mp.mpc | None = None
    h_convention: str | None = None

    def to_json(self) -> dict[str, object]:
        digits = int(self.precision * 0.30103) + 2
        payload: dict[str, object] = {
            "disc": self.disc,
            "precision": self.precision,
            "e2zero": complex_to_json(self.e2zero, digits),
            "pairing": complex_to_json(self.pairing, digits),
            "area": mp.nstr(self.area, digits),
            "dual_generator": complex_to_json(self.dual_generator, digits),
            "truncation_radius": mp.nstr(self.truncation_radius, 12),
            "h_convention": self.h_convention,
        }
        if self.g2 is not None and self.g3 is not None:
            payload["g2"] = complex_to_json(self.g2, digits)
            payload["g3"] = complex_to_json(self.g3, digits)
        return payload

    @classmethod
    def from_json(cls, payload: dict[str, object]) -> LatticeConstants:
        g2 = payload.get("g2")
        g3 = payload.get("g3")
        return cls(
            disc=int(payload["disc"]),  # type: ignore[arg-type]
            precision=int(payload["precision"]),  # type: ignore[arg-type]
            e2zero=complex_from_json(payload["e2zero"]),  # type: ignore[arg-type]
            pairing=complex_from_json(payload["pairing"]),  # type: ignore[arg-type]
            area=mp.mpf(payload["area"]),  # type: ignore[arg-type]
            dual_generator=complex_from_json(payload["dual_generator"]),  # type: ignore[arg-type]
            truncation_radius=mp.mpf(payload["truncation_radius"]),  # type: ignore[arg-type]
            g2=complex_from_json(g2) if g2 else None,  # type: ignore[arg-type]
            g3=complex_from_json(g3) if g3 else None,  # type: ignore[arg-type]
            h_convention=payload.get("h_convention"),  # type: ignore[arg-type]
        )


def complex_to_json(value: mp.mpc | mp.mpf, digits: int | None = None) -> dict[str, str]:
    """Lossless-enough decimal encoding ``{"re": ..., "im": ...}``."""

    digits = digits or int(mp.mp.prec * 0.30103) + 2
    value = mp.mpc(value)
    return {"re": mp.nstr(value.real, digits), "im": mp.nstr(value.imag, digits)}


def complex_from_json(payload: dict[str, str]) -> mp.mpc:
    return mp.mpc(mp.mpf(payload["re"]), mp.mpf(payload["im"]))


@dataclass(frozen=True)
class _ReducedPoint:
    value: mp.mpc
    on_lattice: bool
    key: tuple[object, ...] | None


def reduce_point(x: Point, order: OrderSpec) -> _ReducedPoint:
    """Representative of ``x`` modulo ``L`` in the fundamental parallelogram."""

    if isinstance(x, QuadInt):
        return _ReducedPoint(mp.mpc(0), True, (0, 0))
    if isinstance(x, QuadFrac):
        reduced = x.reduce()
        return _ReducedPoint(reduced.to_complex(), reduced.is_zero(), (reduced.x, reduced.y))
    value = mp.mpc(x)
    omega = order.omega()
    y = mp.im(value) / mp.im(omega)
    real = mp.re(value) - y * mp.re(omega)
    y -= mp.floor(y)
    real -= mp.floor(real)
    tolerance = mp.ldexp(1, -(mp.mp.prec - 20))
    near = lambda coordinate: min(coordinate, 1 - coordinate) < tolerance  # noqa: E731
    if near(real) and near(y):
        return _ReducedPoint(mp.mpc(0), True, None)
    return _ReducedPoint(real + y * omega, False, None)


class LatticeSeries:
    """Evaluator of ``E_0, E_1, E_2, E`` and ``E_2(0)`` for one lattice and precision.

    Values at exact points of ``K`` are memoized in a bounded LRU table guarded by
    a lock, so a verification pool can share one instance.
    """

    def __init__(self, lattice: Lattice, params: SeriesParams | None = None) -> None:
        self.lattice = lattice
        self.params = params or SeriesParams.ambient()
        self.area = lattice.area
        self.t0 = mp.pi / self.area
        self.radius = self.params.gaussian_radius(self.t0)
        self._cache: OrderedDict[tuple[object, ...], mp.mpc] = OrderedDict()
        self._lock = threading.Lock()
        self._direct_points = list(lattice.points(self.radius + 2))
        self._dual_points = [(i, j) for i, j in lattice.points(self.radius) if (i, j) != (0, 0)]
        logger.debug(
            "Lattice series for %s: radius=%s, %d direct / %d dual points",
            lattice.order,
            mp.nstr(self.radius, 6),
            len(self._direct_points),
            len(self._dual_points),
        )
        self._e2zero: mp.mpc | None = None

    # -- reference evaluator -------------------------------------------------

    def _direct_terms(self, point: _ReducedPoint):
        omega = self.lattice.order.omega()
        for i, j in self._direct_points:
            shifted = i + j * omega + point.value
            if point.on_lattice and i == 0 and j == 0:
                continue
            r2 = mp.re(shifted) ** 2 + mp.im(shifted) ** 2
            if r2 > (self.radius + 1) ** 2:
                continue
            yield shifted, r2

    def _dual_terms(self, point: _ReducedPoint):
        omega = self.lattice.order.omega()
        conj_x = mp.conj(point.value)
        for i, j in self._dual_points:
            xi = 1j * (i + j * omega) / self.area
            y0 = mp.pi**2 * (mp.re(xi) ** 2 + mp.im(xi) ** 2) / self.t0
            phase = mp.expjpi(2 * mp.re(xi * conj_x))
            yield xi, y0, phase

    def _reference(self, kind: str, point: _ReducedPoint) -> mp.mpc:
        t0, area = self.t0, self.area
        if kind == "e1":
            direct = [mp.exp(-t0 * r2) / w for w, r2 in self._direct_terms(point)]
            dual = [-1j / area / xi * phase * mp.exp(-y0) for xi, y0, phase in self._dual_terms(point)]
        elif kind == "e2":
            direct = [(1 + t0 * r2) * mp.exp(-t0 * r2) / (w * w) for w, r2 in self._direct_terms(point)]
            dual = [
                -mp.pi / area * mp.conj(xi) / xi * phase * mp.exp(-y0)
                for xi, y0, phase in self._dual_terms(point)
            ]
        elif kind == "e":
            direct = [mp.conj(w) ** 2 / r2 * mp.exp(-t0 * r2) for w, r2 in self._direct_terms(point)]
            dual = [
                -1 / (mp.pi * area) / (xi * xi) * (1 + y0) * mp.exp(-y0) * phase
                for xi, y0, phase in self._dual_terms(point)
            ]
            return 2j * mp.pi / self.lattice.pairing * (mp.fsum(direct) + mp.fsum(dual))
        else:
            raise SeriesError(f"unknown series kind {kind!r}")
        return mp.fsum(direct) + mp.fsum(dual)

    # -- fast evaluator ------------------------------------------------------

    def _theta_data(self) -> tuple[mp.mpc, mp.mpc]:
        omega = self.lattice.order.omega()
        nome = mp.expjpi(omega)
        d1 = mp.jtheta(1, 0, nome, 1)
        d3 = mp.jtheta(1, 0, nome, 3)
        eta1 = -(mp.pi**2) / 3 * d3 / d1
        return nome, eta1

    def _fast(self, kind: str, point: _ReducedPoint) -> mp.mpc:
        if kind == "e":
            return self._reference(kind, point)
        nome, eta1 = self._theta_data()
        g = eta1 - mp.pi / self.area
        if point.on_lattice:
            return mp.mpc(0) if kind == "e1" else g
        v = mp.pi * point.value
        th = mp.jtheta(1, v, nome)
        log_derivative = mp.jtheta(1, v, nome, 1) / th
        if kind == "e1":
            zeta = eta1 * point.value + mp.pi * log_derivative
            return zeta - g * point.value - mp.pi / self.area * mp.conj(point.value)
        if kind == "e2":
            second = mp.jtheta(1, v, nome, 2) / th
            wp = -eta1 - mp.pi**2 * (second - log_derivative**2)
            return wp + g
        raise SeriesError(f"unknown series kind {kind!r}")

    # -- public API ----------------------------------------------------------

    def value(self, kind: str, x: Point) -> mp.mpc:
        point = reduce_point(x, self.lattice.order)
        if kind == "e1" and point.on_lattice:
            return mp.mpc(0)
        cache_key = (kind, point.key) if point.key is not None else None
        if cache_key is not None:
            with self._lock:
                cached = self._cache.get(cache_key)
                if cached is not None:
                    self._cache.move_to_end(cache_key)
            if cached is not None:
                return cached
        if self.params.evaluator is Evaluator.FAST:
            result = self._fast(kind, point)
        else:
            result = self._reference(kind, point)
        if cache_key is not None:
            with self._lock:
                self._cache.setdefault(cache_key, result)
                while len(self._cache) > self.params.cache_size:
                    self._cache.popitem(last=False)
        return result

    def e0(self, x: Point) -> int:
        """Continued constant ``E_0(x)``: ``-1`` on the lattice, ``0`` off it."""

        return -1 if reduce_point(x, self.lattice.order).on_lattice else 0

    def e1(self, x: Point) -> mp.mpc:
        return self.value("e1", x)

    def e2(self, x: Point) -> mp.mpc:
        return self.value("e2", x)

    def e(self, x: Point) -> mp.mpc:
        return self.value("e", x)

    @property
    def e2zero(self) -> mp.mpc:
        if self._e2zero is None:
            self._e2zero = self.e2(self.lattice.order.zero())
        return self._e2zero

    def constants(self) -> LatticeConstants:
        g2, g3 = weierstrass_invariants(self.lattice)
        return LatticeConstants(
            disc=self.lattice.order.disc,
            precision=mp.mp.prec,
            e2zero=self.e2zero,
            pairing=self.lattice.pairing,
            area=self.area,
            dual_generator=1 / self.lattice.order.sqrt_disc().to_complex(),
            truncation_radius=self.radius,
            g2=g2,
            g3=g3,
        )


@lru_cache(maxsize=32)
def _series(lattice: Lattice, params: SeriesParams, prec: int) -> LatticeSeries:
    return LatticeSeries(lattice, params)


def lattice_series(lattice: Lattice, params: SeriesParams | None = None) -> LatticeSeries:
    """Shared :class:`LatticeSeries` for ``(lattice, params)`` at the ambient precision."""

    return _series(lattice, params or SeriesParams.ambient(), mp.mp.prec)


def e_k(k: int, x: Point, lattice: Lattice, params: SeriesParams | None = None) -> mp.mpc:
    """Continued Kronecker-Eisenstein series ``E_k(x)`` for ``k`` in ``{0, 1, 2}``."""

    series = lattice_series(lattice, params)
    if k == 0:
        return mp.mpc(series.e0(x))
    if k == 1:
        return series.e1(x)
    if k == 2:
        return series.e2(x)
    raise SeriesError(f"only weights 0, 1, 2 are supported, got {k}")


def e_aux(x: Point, lattice: Lattice, params: SeriesParams | None = None) -> mp.mpc:
    """``E(x) = (2 pi i / D(L)) sum conj(w+x)/(w+x) |w+x|^(-2s)`` at ``s = 0``."""

    return lattice_series(lattice, params).e(x)


def epstein_zeta(sigma: mp.mpf, x: Point, lattice: Lattice, params: SeriesParams | None = None) -> mp.mpf:
    """Shifted Epstein zeta ``sum' |w+x|^(-2 sigma)`` continued to all ``sigma != 1``.

    Evaluated with the full incomplete-gamma split; at ``sigma -> 0`` it tends
    to ``-1`` on the lattice and ``0`` elsewhere, the values :meth:`LatticeSeries.e0`
    returns.
    """

    sigma = mp.mpf(sigma)
    params = params or SeriesParams.ambient()
    area = lattice.area
    t0 = mp.pi / area
    radius = params.gaussian_radius(t0)
    point = reduce_point(x, lattice.order)
    omega = lattice.order.omega()
    direct = []
    for i, j in lattice.points(radius + 2):
        if point.on_lattice and (i, j) == (0, 0):
            continue
        r2 = abs(i + j * omega + point.value) ** 2
        direct.append(r2 ** (-sigma) * mp.gammainc(sigma, t0 * r2))
    dual = []
    for i, j in lattice.points(radius):
        if (i, j) == (0, 0):
            continue
        xi = 1j * (i + j * omega) / area
        norm_xi = abs(xi) ** 2
        phase = mp.expjpi(2 * mp.re(xi * mp.conj(point.value)))
        dual.append(
            mp.re(phase) * mp.pi ** (2 * sigma - 1) * norm_xi ** (sigma - 1)
            * mp.gammainc(1 - sigma, mp.pi**2 * norm_xi / t0)
        )
    total = mp.fsum(direct) + mp.fsum(dual) / area + mp.pi / area * t0 ** (sigma - 1) / (sigma - 1)
    if point.on_lattice:
        total -= t0**sigma / sigma
    return total * mp.rgamma(sigma)


def _lambert(power: int, nome_sq: mp.mpc) -> mp.mpc:
    total = mp.mpc(0)
    n = 1
    q_n = nome_sq
    while True:
        term = mp.mpf(n) ** power * q_n / (1 - q_n)
        total += term
        if abs(term) < mp.mp.eps * max(abs(total), 1):
            return total
        n += 1
        q_n *= nome_sq


def e2zero_qseries(lattice: Lattice) -> mp.mpc:
    """``E_2(0) = (pi^2/3) E_2(tau) - pi / Im(tau)`` from the q-expansion."""

    tau = lattice.order.omega()
    q = mp.expjpi(2 * tau)
    return mp.pi**2 / 3 * (1 - 24 * _lambert(1, q)) - mp.pi / mp.im(tau)


def weierstrass_invariants(lattice: Lattice) -> tuple[mp.mpc, mp.mpc]:
    """``(g2, g3)`` of ``Z + Z w`` through the Eisenstein q-series."""

    tau = lattice.order.omega()
    q = mp.expjpi(2 * tau)
    e4 = 1 + 240 * _lambert(3, q)
    e6 = 1 - 504 * _lambert(5, q)
    g2 = 4 * mp.pi**4 / 3 * e4
    g3 = 8 * mp.pi**6 / 27 * e6
    if abs(g2**3 - 27 * g3**2) < mp.mp.eps:
        raise SeriesError("degenerate lattice: vanishing discriminant")
    return g2, g3


def normalizing_scale(lattice: Lattice) -> mp.mpc:
    """``lam`` with ``lam^2 = g3/g2``; ``lam*L`` has ``g2 = g3 = 27 j / (j - 1728)``.

    For class number one the j-invariant is rational, so the invariants of the
    rescaled lattice are rational numbers and the cocycle on it takes values in
    ``Q(sqrt(D))`` up to integrality. Values scale as ``Phi_{lam L} = lam^-2 Phi_L``.
    """

    g2, g3 = weierstrass_invariants(lattice)
    return mp.sqrt(g3 / g2)

"""Elliptic Dedekind sums over ``L / cL``."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import mpmath as mp

from core.eisenstein import SeriesParams, lattice_series
from core.quadfield import Lattice, Level, QuadFrac, QuadInt, as_frac, residues

logger = logging.getLogger(__name__)


class ZeroModulusError(ValueError):
    """Raised when a Dedekind sum is requested with ``c = 0``."""


@dataclass(frozen=True)
class DedekindInput:
    """Arguments of ``D(a, c; p, q)`` with ``p``, ``q`` kept reduced modulo ``L``."""

    a: QuadInt
    c: QuadInt
    p: QuadFrac | None = None
    q: QuadFrac | None = None
    level: Level | None = None

    def __post_init__(self) -> None:
        if self.c.is_zero():
            raise ZeroModulusError("Dedekind sums need a non-zero modulus c")
        zero = self.c.order.zero().to_frac()
        p = (self.p if self.p is not None else zero).reduce()
        q = (self.q if self.q is not None else zero).reduce()
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    def evaluate(self, lattice: Lattice, params: SeriesParams | None = None) -> mp.mpc:
        p, q = self.p, self.q
        if self.level is None:
            return d_sum_pq(self.a, self.c, p, q, lattice, params)
        return d_smoothed(self.a, self.c, self.level, lattice, params, p=p, q=q)


def error_budget(c: QuadInt, params: SeriesParams | None = None) -> mp.mpf:
    """Propagated bound for a sum of ``norm(c)`` products of ``E_1`` values divided by ``c``."""

    params = params or SeriesParams.ambient()
    return 16 * c.norm() * params.error / mp.sqrt(c.norm())


def d_sum_pq(
    a: QuadInt,
    c: QuadInt,
    p: QuadFrac | QuadInt | None,
    q: QuadFrac | QuadInt | None,
    lattice: Lattice,
    params: SeriesParams | None = None,
) -> mp.mpc:
    """``D(a, c; p, q) = (1/c) sum_{r in L/cL} E_1(a(r+p)/c + q) E_1((r+p)/c)``.

    Arguments landing in ``L`` contribute ``E_1(0) = 0``.
    """

    if c.is_zero():
        raise ZeroModulusError("Dedekind sums need a non-zero modulus c")
    series = lattice_series(lattice, params)
    zero = c.order.zero().to_frac()
    p = as_frac(p) if p is not None else zero
    q = as_frac(q) if q is not None else zero
    terms = []
    for r in residues(c):
        inner = (r + p) / c
        outer = a * inner + q
        if inner.is_integral() or outer.is_integral():
            continue
        terms.append(series.e1(outer) * series.e1(inner))
    return mp.fsum(terms) / c.to_complex()


def d_sum(a: QuadInt, c: QuadInt, lattice: Lattice, params: SeriesParams | None = None) -> mp.mpc:
    """``D(a, c) = (1/c) sum_{r in L/cL} E_1(ar/c) E_1(r/c)``."""

    return d_sum_pq(a, c, None, None, lattice, params)


def d_sum_level(
    a: QuadInt,
    c: QuadInt,
    level: Level,
    lattice: Lattice,
    params: SeriesParams | None = None,
    *,
    p: QuadFrac | QuadInt | None = None,
    q: QuadFrac | QuadInt | None = None,
) -> mp.mpc:
    """``D(a, c/N; p, q)``; equal to ``D(Na, c; p, q)`` by the distribution relation."""

    if not level.contains(c):
        raise ValueError(f"{level} does not divide the modulus {c}")
    return d_sum_pq(a, c.exact_div(level.generator), p, q, lattice, params)


def d_smoothed(
    a: QuadInt,
    c: QuadInt,
    level: Level,
    lattice: Lattice,
    params: SeriesParams | None = None,
    *,
    p: QuadFrac | QuadInt | None = None,
    q: QuadFrac | QuadInt | None = None,
) -> mp.mpc:
    """``D^N(a, c; p, q) = D(Na, c; p, q) - D(a, c; p, q)``."""

    smeared = d_sum_pq(level.generator * a, c, p, q, lattice, params)
    return smeared - d_sum_pq(a, c, p, q, lattice, params)

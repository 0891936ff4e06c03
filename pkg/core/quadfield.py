"""Exact arithmetic in imaginary quadratic orders and SL2 over them.

Elements are stored in the integral basis ``(1, w)`` of the order, where
``w = sqrt(-d)`` when ``d = 1, 2 mod 4`` and ``w = (1 + sqrt(-d)) / 2`` when
``d = 3 mod 4``. The generator satisfies ``w^2 = t*w - n`` with the integers
``t`` (trace) and ``n`` (norm) kept on :class:`OrderSpec`, so every ring
operation below is exact integer (or rational) arithmetic.
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import floor, ceil, isqrt
from typing import Iterator

import mpmath as mp
from sympy import factorint, isprime
from sympy.ntheory import jacobi_symbol

logger = logging.getLogger(__name__)

# Squarefree parts of the norm-Euclidean imaginary quadratic fields once the
# excluded Gaussian and Eisenstein orders are removed.
EUCLIDEAN_SQUAREFREE: frozenset[int] = frozenset({2, 7, 11})

EXCLUDED_SQUAREFREE: frozenset[int] = frozenset({1, 3})


class OrderError(ValueError):
    """Raised when an order description is invalid or explicitly excluded."""


class UnsupportedOrderError(OrderError):
    """Raised when an operation needs a norm-Euclidean order."""


class MixedOrderError(TypeError):
    """Raised when operands from different orders are combined."""


class NotInLevelError(ValueError):
    """Raised when a matrix is not in the congruence subgroup of the level."""


class SamplingError(RuntimeError):
    """Raised when the matrix sampler exhausts its retries."""


@dataclass(frozen=True)
class OrderSpec:
    """An order of conductor ``conductor`` in the field of discriminant ``disc``."""

    disc: int
    conductor: int = 1
    allow_nonmaximal: bool = False

    def __post_init__(self) -> None:
        if self.disc >= 0 or self.disc % 4 not in (0, 1):
            raise OrderError(f"discriminant must be negative and 0 or 1 mod 4, got {self.disc}")
        d = -self.disc if self.disc % 4 == 1 else -self.disc // 4
        if self.disc % 4 == 0 and d % 4 not in (1, 2):
            raise OrderError(f"{self.disc} is not a fundamental discriminant")
        if any(exp > 1 for exp in factorint(d).values()):
            raise OrderError(f"{self.disc} is not a fundamental discriminant")
        if self.conductor < 1:
            raise OrderError("conductor must be a positive integer")
        if self.conductor > 1 and not self.allow_nonmaximal:
            raise OrderError("non-maximal orders are disabled; pass allow_nonmaximal=True")
        if self.conductor == 1 and d in EXCLUDED_SQUAREFREE:
            raise OrderError(
                "orders isomorphic to Z[i] or Z[exp(2 pi i/3)] are excluded: "
                "their elliptic Dedekind sums vanish identically"
            )

    @property
    def squarefree(self) -> int:
        """The positive squarefree ``d`` with ``K = Q(sqrt(-d))``."""

        return -self.disc if self.disc % 4 == 1 else -self.disc // 4

    @property
    def omega_descriptor(self) -> tuple[int, int]:
        """Pair ``(t, u)`` with ``w = (t + u*sqrt(-d)) / 2``."""

        f = self.conductor
        return (f, f) if self.disc % 4 == 1 else (0, 2 * f)

    @property
    def omega_trace(self) -> int:
        return self.omega_descriptor[0]

    @property
    def omega_norm(self) -> int:
        t, u = self.omega_descriptor
        return (t * t + u * u * self.squarefree) // 4

    @property
    def is_euclidean(self) -> bool:
        return self.conductor == 1 and self.squarefree in EUCLIDEAN_SQUAREFREE

    def omega(self) -> mp.mpc:
        """Complex value of the basis generator at the ambient precision."""

        return _omega_value(self, mp.mp.prec)

    def sqrt_disc(self) -> QuadInt:
        """``sqrt(D)`` of the order as an element (``t - 2w``, up to sign)."""

        return QuadInt(-self.omega_trace, 2, self) if self.disc % 4 == 1 else QuadInt(0, 2, self)

    def element(self, x: int, y: int = 0) -> QuadInt:
        return QuadInt(x, y, self)

    def zero(self) -> QuadInt:
        return QuadInt(0, 0, self)

    def one(self) -> QuadInt:
        return QuadInt(1, 0, self)

    def __str__(self) -> str:
        suffix = f", conductor {self.conductor}" if self.conductor > 1 else ""
        return f"O(Q(sqrt(-{self.squarefree}))){suffix}"


@lru_cache(maxsize=64)
def _omega_value(order: OrderSpec, prec: int) -> mp.mpc:
    t, u = order.omega_descriptor
    with mp.workprec(prec):
        return mp.mpc(mp.mpf(t) / 2, mp.mpf(u) / 2 * mp.sqrt(order.squarefree))


def _check_same(left: OrderSpec, right: OrderSpec) -> None:
    if left != right:
        raise MixedOrderError(f"cannot combine elements of {left} and {right}")


@dataclass(frozen=True)
class QuadInt:
    """The element ``x + y*w`` of an order."""

    x: int
    y: int
    order: OrderSpec

    def _coerce(self, other: object) -> QuadInt:
        if isinstance(other, QuadInt):
            _check_same(self.order, other.order)
            return other
        if isinstance(other, int):
            return QuadInt(other, 0, self.order)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: object) -> QuadInt:
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return QuadInt(self.x + rhs.x, self.y + rhs.y, self.order)

    __radd__ = __add__

    def __neg__(self) -> QuadInt:
        return QuadInt(-self.x, -self.y, self.order)

    def __sub__(self, other: object) -> QuadInt:
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return QuadInt(self.x - rhs.x, self.y - rhs.y, self.order)

    def __rsub__(self, other: object) -> QuadInt:
        return -(self - other)

    def __mul__(self, other: object) -> QuadInt:
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        t, n = self.order.omega_trace, self.order.omega_norm
        yy = self.y * rhs.y
        return QuadInt(
            self.x * rhs.x - n * yy,
            self.x * rhs.y + self.y * rhs.x + t * yy,
            self.order,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> QuadFrac:
        return self.to_frac() / other

    def conj(self) -> QuadInt:
        return QuadInt(self.x + self.y * self.order.omega_trace, -self.y, self.order)

    def norm(self) -> int:
        t, n = self.order.omega_trace, self.order.omega_norm
        return self.x * self.x + t * self.x * self.y + n * self.y * self.y

    def trace(self) -> int:
        return 2 * self.x + self.order.omega_trace * self.y

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def is_unit(self) -> bool:
        return self.norm() == 1

    def unit_inverse(self) -> QuadInt:
        if not self.is_unit():
            raise ZeroDivisionError(f"{self} is not a unit")
        return self.conj()

    def divides(self, other: QuadInt) -> bool:
        """``True`` when ``other / self`` lies in the order."""

        if self.is_zero():
            return other.is_zero()
        return (other / self).is_integral()

    def exact_div(self, other: QuadInt) -> QuadInt:
        quotient = self / other
        if not quotient.is_integral():
            raise ValueError(f"{other} does not divide {self}")
        return quotient.to_int()

    def to_frac(self) -> QuadFrac:
        return QuadFrac(Fraction(self.x), Fraction(self.y), self.order)

    def to_complex(self) -> mp.mpc:
        return self.x + self.y * self.order.omega()

    def to_json(self) -> dict[str, int]:
        return {"x": self.x, "y": self.y}

    def __str__(self) -> str:
        if self.y == 0:
            return str(self.x)
        coefficient = {1: "", -1: "-"}.get(self.y, f"{self.y}*")
        if self.x == 0:
            return f"{coefficient}w"
        sign = "+" if self.y > 0 else ""
        return f"{self.x}{sign}{coefficient}w"


@dataclass(frozen=True)
class QuadFrac:
    """An element ``x + y*w`` of the field ``K`` with rational coordinates.

    Points of ``C/L`` that the cocycle formulas produce (``p``, ``q``, ``a/c``,
    ``a(r+p)/c + q`` and so on) all live in ``K``; keeping them exact makes
    lattice membership and reduction modulo ``L`` exact as well.
    """

    x: Fraction
    y: Fraction
    order: OrderSpec

    def _coerce(self, other: object) -> QuadFrac:
        if isinstance(other, QuadFrac):
            _check_same(self.order, other.order)
            return other
        if isinstance(other, QuadInt):
            _check_same(self.order, other.order)
            return other.to_frac()
        if isinstance(other, (int, Fraction)):
            return QuadFrac(Fraction(other), Fraction(0), self.order)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: object) -> QuadFrac:
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return QuadFrac(self.x + rhs.x, self.y + rhs.y, self.order)

    __radd__ = __add__

    def __neg__(self) -> QuadFrac:
        return QuadFrac(-self.x, -self.y, self.order)

    def __sub__(self, other: object) -> QuadFrac:
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return QuadFrac(self.x - rhs.x, self.y - rhs.y, self.order)

    def __rsub__(self, other: object) -> QuadFrac:
        return -(self - other)

    def __mul__(self, other: object) -> QuadFrac:
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        t, n = self.order.omega_trace, self.order.omega_norm
        yy = self.y * rhs.y
        return QuadFrac(
            self.x * rhs.x - n * yy,
            self.x * rhs.y + self.y * rhs.x + t * yy,
            self.order,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> QuadFrac:
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        norm = rhs.norm()
        if norm == 0:
            raise ZeroDivisionError("division by zero in K")
        quotient = self * rhs.conj()
        return QuadFrac(quotient.x / norm, quotient.y / norm, self.order)

    def __rtruediv__(self, other: object) -> QuadFrac:
        return self._coerce(other) / self

    def conj(self) -> QuadFrac:
        return QuadFrac(self.x + self.y * self.order.omega_trace, -self.y, self.order)

    def norm(self) -> Fraction:
        t, n = self.order.omega_trace, self.order.omega_norm
        return self.x * self.x + t * self.x * self.y + n * self.y * self.y

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def to_int(self) -> QuadInt:
        if not self.is_integral():
            raise ValueError(f"{self} is not integral")
        return QuadInt(int(self.x), int(self.y), self.order)

    def reduce(self) -> QuadFrac:
        """Representative in the fundamental parallelogram ``[0,1) + [0,1)w``."""

        return QuadFrac(self.x - floor(self.x), self.y - floor(self.y), self.order)

    def to_complex(self) -> mp.mpc:
        x = mp.mpf(self.x.numerator) / self.x.denominator
        y = mp.mpf(self.y.numerator) / self.y.denominator
        return x + y * self.order.omega()

    @classmethod
    def from_complex(cls, value: complex | str, order: OrderSpec) -> QuadFrac:
        """Exact coordinates of a complex number given in decimal form.

        ``value`` may be a ``"re,im"`` string; decimal strings convert to exact
        fractions, binary floats to their exact binary value.
        """

        if isinstance(value, str):
            re_text, _, im_text = value.partition(",")
            real, imag = Fraction(re_text.strip()), Fraction((im_text or "0").strip())
        else:
            real, imag = Fraction(value.real), Fraction(value.imag)
        t, u = order.omega_descriptor
        # imag = y * u * sqrt(d) / 2 is only rational for y = 0 in general, so the
        # imaginary coordinate is rounded to the nearest 1e-30 rational.
        with mp.workprec(160):
            y_value = mp.mpf(imag.numerator) / imag.denominator * 2 / (u * mp.sqrt(order.squarefree))
            y = Fraction(int(mp.nint(y_value * 10**30)), 10**30)
        x = real - y * Fraction(t, 2)
        return cls(x, y, order)

    def to_json(self) -> dict[str, str]:
        return {"x": str(self.x), "y": str(self.y)}

    def __str__(self) -> str:
        return f"({self.x})+({self.y})*w"


def as_frac(value: QuadInt | QuadFrac) -> QuadFrac:
    return value.to_frac() if isinstance(value, QuadInt) else value


@dataclass(frozen=True)
class Lattice:
    """The lattice ``L = O_L`` with basis ``w1 = w``, ``w2 = 1``.

    The basis order gives ``Im(w1/w2) > 0``; multiplication by any element of
    the order maps the lattice into itself.
    """

    order: OrderSpec

    @property
    def w1(self) -> mp.mpc:
        return self.order.omega()

    @property
    def w2(self) -> mp.mpc:
        return mp.mpc(1)

    @property
    def area(self) -> mp.mpf:
        """Covolume ``Im(w1 * conj(w2))``."""

        return mp.im(self.w1 * mp.conj(self.w2))

    @property
    def pairing(self) -> mp.mpc:
        """``D(L) = w1 conj(w2) - conj(w1) w2``, purely imaginary with positive part."""

        return self.w1 * mp.conj(self.w2) - mp.conj(self.w1) * self.w2

    def contains(self, value: QuadFrac | QuadInt) -> bool:
        return isinstance(value, QuadInt) or value.is_integral()

    def points(self, radius: mp.mpf, center: mp.mpc = mp.mpc(0)) -> Iterator[tuple[int, int]]:
        """Integer coordinates ``(i, j)`` of ``w = i + j*w`` with ``|w + center| <= radius``.

        Points are yielded row by row in increasing ``j`` then ``i``, which
        fixes the summation order of every lattice series.
        """

        omega = self.order.omega()
        height = mp.im(omega)
        lo = int(mp.floor((-radius - mp.im(center)) / height))
        hi = int(mp.ceil((radius - mp.im(center)) / height))
        for j in range(lo, hi + 1):
            offset = j * omega + center
            span_sq = radius * radius - mp.im(offset) ** 2
            if span_sq < 0:
                continue
            span = mp.sqrt(span_sq)
            for i in range(int(mp.floor(-span - mp.re(offset))), int(mp.ceil(span - mp.re(offset))) + 1):
                if abs(i + offset) <= radius:
                    yield i, j


@dataclass(frozen=True)
class Level:
    """The principal ideal generated by ``generator``."""

    generator: QuadInt

    def __post_init__(self) -> None:
        if self.generator.is_zero():
            raise ValueError("the level generator must be non-zero")
        if self.generator.is_unit():
            raise ValueError("the level generator must not be a unit")

    @property
    def order(self) -> OrderSpec:
        return self.generator.order

    @property
    def ideal_norm(self) -> int:
        return self.generator.norm()

    def contains(self, value: QuadInt) -> bool:
        return self.generator.divides(value)

    def __str__(self) -> str:
        return str(self.generator)


@dataclass(frozen=True)
class Mat2:
    """A 2x2 matrix over an order, acting on column vectors and on ``H^3``."""

    a: QuadInt
    b: QuadInt
    c: QuadInt
    d: QuadInt

    @classmethod
    def from_ints(cls, order: OrderSpec, *entries: tuple[int, int] | int) -> Mat2:
        values = [
            QuadInt(e, 0, order) if isinstance(e, int) else QuadInt(e[0], e[1], order)
            for e in entries
        ]
        return cls(*values)

    @classmethod
    def identity(cls, order: OrderSpec) -> Mat2:
        return cls(order.one(), order.zero(), order.zero(), order.one())

    @property
    def order(self) -> OrderSpec:
        return self.a.order

    def entries(self) -> tuple[QuadInt, QuadInt, QuadInt, QuadInt]:
        return self.a, self.b, self.c, self.d

    def det(self) -> QuadInt:
        return self.a * self.d - self.b * self.c

    def trace(self) -> QuadInt:
        return self.a + self.d

    def is_sl2(self) -> bool:
        det = self.det()
        return det.x == 1 and det.y == 0

    def in_gamma0(self, level: Level) -> bool:
        return self.is_sl2() and level.contains(self.c)

    def __matmul__(self, other: Mat2) -> Mat2:
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def adjugate(self) -> Mat2:
        return Mat2(self.d, -self.b, -self.c, self.a)

    def inverse(self) -> Mat2:
        det = self.det()
        if not det.is_unit():
            raise ValueError("matrix is not invertible over the order")
        scale = det.unit_inverse()
        return Mat2(*(entry * scale for entry in self.adjugate().entries()))

    def conjugate_by_x(self) -> Mat2:
        """``x A x^-1`` for ``x = diag(1, -1)``."""

        return Mat2(self.a, -self.b, -self.c, self.d)

    def act_row(self, p: QuadFrac, q: QuadFrac) -> tuple[QuadFrac, QuadFrac]:
        """Row-vector action ``(p, q) A = (a p + c q, b p + d q)``, reduced mod ``L^2``."""

        return (
            (self.a * p + self.c * q).reduce(),
            (self.b * p + self.d * q).reduce(),
        )

    def max_entry_norm(self) -> int:
        return max(entry.norm() for entry in self.entries())

    def __str__(self) -> str:
        return f"[{self.a}, {self.b}; {self.c}, {self.d}]"


def euclid_divmod(a: QuadInt, b: QuadInt) -> tuple[QuadInt, QuadInt]:
    """Division with remainder ``a = q*b + r`` and ``norm(r) < norm(b)``."""

    if b.is_zero():
        raise ZeroDivisionError("division by zero in the order")
    exact = a / b
    best: tuple[int, QuadInt, QuadInt] | None = None
    for qx in (floor(exact.x), ceil(exact.x)):
        for qy in (floor(exact.y), ceil(exact.y)):
            q = QuadInt(qx, qy, a.order)
            r = a - q * b
            if best is None or r.norm() < best[0]:
                best = (r.norm(), q, r)
    assert best is not None
    if best[0] >= b.norm():
        raise UnsupportedOrderError(f"{a.order} is not norm-Euclidean")
    return best[1], best[2]


def xgcd(a: QuadInt, b: QuadInt) -> tuple[QuadInt, QuadInt, QuadInt]:
    """Return ``(g, u, v)`` with ``u*a + v*b = g`` and ``g`` a gcd of ``a`` and ``b``."""

    _check_same(a.order, b.order)
    if not a.order.is_euclidean:
        raise UnsupportedOrderError(f"extended gcd needs a norm-Euclidean order, got {a.order}")
    if a.is_zero() and b.is_zero():
        raise ValueError("xgcd(0, 0) is undefined")
    one, zero = a.order.one(), a.order.zero()
    r0, r1 = a, b
    s0, s1 = one, zero
    t0, t1 = zero, one
    while not r1.is_zero():
        q, r = euclid_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


def smith_normal_form(matrix: list[list[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith form of a non-singular integer 2x2 matrix.

    Returns ``(D, U, V)`` with ``U * matrix * V = D``, ``D = diag(d1, d2)``,
    ``d1 | d2`` and ``U``, ``V`` unimodular.
    """

    m = [row[:] for row in matrix]
    u = [[1, 0], [0, 1]]
    v = [[1, 0], [0, 1]]

    def swap_rows(target: list[list[int]]) -> None:
        target[0], target[1] = target[1], target[0]

    def swap_cols(target: list[list[int]]) -> None:
        for row in target:
            row[0], row[1] = row[1], row[0]

    while True:
        candidates = [(abs(m[i][j]), i, j) for i in range(2) for j in range(2) if m[i][j]]
        if not candidates:
            raise ValueError("matrix is singular")
        _, i, j = min(candidates)
        if i == 1:
            swap_rows(m)
            swap_rows(u)
        if j == 1:
            swap_cols(m)
            swap_cols(v)
        pivot = m[0][0]
        q = m[1][0] // pivot
        m[1] = [m[1][k] - q * m[0][k] for k in range(2)]
        u[1] = [u[1][k] - q * u[0][k] for k in range(2)]
        q = m[0][1] // pivot
        for target in (m, v):
            for row in target:
                row[1] -= q * row[0]
        if m[1][0] or m[0][1]:
            continue
        if m[1][1] % pivot:
            m[0] = [m[0][k] + m[1][k] for k in range(2)]
            u[0] = [u[0][k] + u[1][k] for k in range(2)]
            continue
        break
    for k in range(2):
        if m[k][k] < 0:
            m[k] = [-entry for entry in m[k]]
            u[k] = [-entry for entry in u[k]]
    return m, u, v


def multiplication_matrix(c: QuadInt) -> list[list[int]]:
    """Integer matrix of ``x -> c*x`` on coordinates in the basis ``(1, w)``."""

    t, n = c.order.omega_trace, c.order.omega_norm
    return [[c.x, -n * c.y], [c.y, c.x + t * c.y]]


@lru_cache(maxsize=4096)
def residues(c: QuadInt) -> tuple[QuadInt, ...]:
    """Coset representatives of ``L / cL``, exactly ``norm(c)`` of them."""

    if c.is_zero():
        raise ValueError("residues modulo zero are undefined")
    diag, u, _ = smith_normal_form(multiplication_matrix(c))
    d1, d2 = diag[0][0], diag[1][1]
    det = u[0][0] * u[1][1] - u[0][1] * u[1][0]
    u_inv = [[u[1][1] * det, -u[0][1] * det], [-u[1][0] * det, u[0][0] * det]]
    reps = []
    for i in range(d1):
        for j in range(d2):
            reps.append(QuadInt(u_inv[0][0] * i + u_inv[0][1] * j, u_inv[1][0] * i + u_inv[1][1] * j, c.order))
    logger.debug("L/cL for c=%s has Smith invariants (%d, %d)", c, d1, d2)
    return tuple(reps)


def smear(matrix: Mat2, level: Level) -> Mat2:
    """``A_N = (a, bN; c/N, d)`` for ``A`` in ``Gamma0(N)``."""

    n = level.generator
    if not level.contains(matrix.c):
        raise NotInLevelError(f"lower-left entry {matrix.c} of {matrix} is not divisible by {n}")
    return Mat2(matrix.a, matrix.b * n, matrix.c.exact_div(n), matrix.d)


def is_prime_element(p: QuadInt) -> bool:
    """``True`` when ``p`` generates a prime ideal of a maximal order."""

    norm = p.norm()
    if norm <= 1:
        return False
    if isprime(norm):
        return True
    root = isqrt(norm)
    if root * root != norm or not isprime(root):
        return False
    associate = (p / root)
    if not associate.is_integral() or not associate.to_int().is_unit():
        return False
    return int(jacobi_symbol(p.order.disc % root, root)) == -1 if root != 2 else p.order.disc % 8 == 5


def _random_element(order: OrderSpec, rng: random.Random, bound: int) -> QuadInt:
    return QuadInt(rng.randint(-bound, bound), rng.randint(-bound, bound), order)


def _sample_matrix(
    order: OrderSpec,
    multiplier: QuadInt,
    height: int,
    rng: random.Random,
    max_tries: int,
) -> Mat2 | None:
    bound = max(1, isqrt(max(height, 1)))
    for _ in range(max_tries):
        c = multiplier * _random_element(order, rng, max(1, bound // 2))
        a = _random_element(order, rng, bound)
        if c.is_zero():
            if not a.is_unit():
                continue
            d = a.unit_inverse()
            b = _random_element(order, rng, bound)
        else:
            if a.is_zero():
                continue
            g, u, v = xgcd(a, c)
            if not g.is_unit():
                continue
            g_inv = g.unit_inverse()
            d, b = u * g_inv, -(v * g_inv)
            quotient, _ = euclid_divmod(d, c)
            shift = _random_element(order, rng, 1) - quotient
            d, b = d + c * shift, b + a * shift
        matrix = Mat2(a, b, c, d)
        if matrix.max_entry_norm() <= height:
            return matrix
    return None


def random_gamma0(
    level: Level,
    height: int,
    seed: int | None = None,
    *,
    rng: random.Random | None = None,
    max_tries: int = 2000,
) -> Mat2:
    """Sample ``A`` in ``Gamma0(N)`` with every entry of norm at most ``height``.

    The lower-left entry is ``N*k`` for a random ``k``; ``a`` is drawn coprime
    to it and ``b``, ``d`` complete the determinant through :func:`xgcd`,
    followed by a random translation on the right.
    """

    matrix = _sample_matrix(level.order, level.generator, height, rng or random.Random(seed), max_tries)
    if matrix is None:
        raise SamplingError(f"no element of Gamma0({level}) with entry norms <= {height} after {max_tries} tries")
    return matrix


def random_sl2(
    order: OrderSpec,
    height: int,
    seed: int | None = None,
    *,
    rng: random.Random | None = None,
    max_tries: int = 2000,
) -> Mat2:
    """Sample ``A`` in ``SL2(O)`` with every entry of norm at most ``height``."""

    matrix = _sample_matrix(order, order.one(), height, rng or random.Random(seed), max_tries)
    if matrix is None:
        raise SamplingError(f"no element of SL2({order}) with entry norms <= {height} after {max_tries} tries")
    return matrix


def random_torsion_point(order: OrderSpec, denominator: int, rng: random.Random) -> QuadFrac:
    """A point of ``(1/denominator) L / L`` with uniformly drawn coordinates."""

    return QuadFrac(
        Fraction(rng.randrange(denominator), denominator),
        Fraction(rng.randrange(denominator), denominator),
        order,
    )


_SQRT_PATTERN = re.compile(r"^sqrt\(?-(\d+)\)?$")
_TERM_PATTERN = re.compile(r"^([+-]?\d*)\*?(w?)$")


def parse_quadint(text: str, order: OrderSpec) -> QuadInt:
    """Parse ``"x+y*w"``, ``"3"``, ``"-w"`` or ``"sqrt-2"`` into an element."""

    cleaned = text.replace(" ", "").lower()
    match = _SQRT_PATTERN.match(cleaned)
    if match:
        if int(match.group(1)) != order.squarefree or order.conductor != 1:
            raise ValueError(f"{text!r} is not an element of {order}")
        return order.sqrt_disc() if order.disc % 4 == 1 else QuadInt(0, 1, order)
    if not cleaned:
        raise ValueError("empty element")
    x = y = 0
    for term in cleaned.replace("-", "+-").split("+"):
        if not term:
            continue
        parsed = _TERM_PATTERN.match(term)
        if not parsed:
            raise ValueError(f"cannot parse element {text!r}")
        digits, generator = parsed.groups()
        if generator:
            coefficient = {"": 1, "+": 1, "-": -1}.get(digits)
            y += coefficient if coefficient is not None else int(digits)
        else:
            if digits in ("", "+", "-"):
                raise ValueError(f"cannot parse element {text!r}")
            x += int(digits)
    return QuadInt(x, y, order)


_FRAC_TERM_PATTERN = re.compile(r"^([+-]?(?:\d+(?:/\d+)?)?)\*?(w?)$")


def parse_quadfrac(text: str, order: OrderSpec) -> QuadFrac:
    """Parse ``"1/3+2/3*w"`` exactly, or ``"re,im"`` through :meth:`QuadFrac.from_complex`."""

    cleaned = text.replace(" ", "").lower()
    if "," in cleaned:
        return QuadFrac.from_complex(cleaned, order)
    if cleaned.startswith("sqrt"):
        return parse_quadint(cleaned, order).to_frac()
    if not cleaned:
        raise ValueError("empty element")
    x = y = Fraction(0)
    for term in cleaned.replace("-", "+-").split("+"):
        if not term:
            continue
        parsed = _FRAC_TERM_PATTERN.match(term)
        if not parsed:
            raise ValueError(f"cannot parse element {text!r}")
        digits, generator = parsed.groups()
        if generator:
            coefficient = {"": 1, "+": 1, "-": -1}.get(digits)
            y += Fraction(coefficient) if coefficient is not None else Fraction(digits)
        elif digits in ("", "+", "-"):
            raise ValueError(f"cannot parse element {text!r}")
        else:
            x += Fraction(digits)
    return QuadFrac(x, y, order)


def parse_matrix(text: str, order: OrderSpec) -> Mat2:
    """Parse ``"a,b,c,d"`` with entries in the ``x+y*w`` syntax."""

    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"a matrix needs four comma-separated entries, got {text!r}")
    return Mat2(*(parse_quadint(part, order) for part in parts))

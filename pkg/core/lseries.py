"""L-series ``L_N(A_N, s; p, q)`` attached to loxodromic elements of ``Gamma0(N)``.

For ``A = (a, b; c, d)`` with fixed points ``alpha``, ``alpha'`` and unit
``eps = c alpha + d``, the smeared matrix ``A_N`` fixes ``N alpha`` and
multiplies ``mu_N = m N alpha + n`` by ``eps``. Orbits of ``<A_N>`` on
``(L+p) x (L+q)`` are represented by the unique ``mu_N`` whose ratio
``|mu_N / mu_N'|`` falls in ``[1, E)`` with ``E = max(|eps|, 1/|eps|)^2``.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

import mpmath as mp

from core.cocycle import phi_n
from core.dedekind import d_sum_level, d_sum_pq
from core.eisenstein import SeriesParams, complex_to_json, lattice_series
from core.harmonic import Point3, moebius
from core.quadfield import Lattice, Level, Mat2, QuadFrac, QuadInt, as_frac, random_gamma0, smear

logger = logging.getLogger(__name__)

MIN_DIRECT_S = mp.mpf("1.6")
UNIT_MARGIN = mp.mpf("1e-6")


class GeodesicError(ValueError):
    """Raised for matrices without a usable geodesic (``c = 0``, parabolic or elliptic)."""


class ShiftConditionError(ValueError):
    """Raised when ``(p, q) A`` or ``(p, q) A_N`` differs from ``(p, q)`` modulo ``L^2``."""


class QuadratureError(ArithmeticError):
    """Raised when the path integral does not settle."""


class ConvergenceRegionError(ValueError):
    """Raised for ``s`` outside the region where the orbit sum converges."""


@dataclass
class GeodesicData:
    matrix: Mat2
    level: Level | None
    alpha: mp.mpc
    alpha_p: mp.mpc
    eps: mp.mpc
    theta: int

    @property
    def n_value(self) -> mp.mpc:
        return self.level.generator.to_complex() if self.level is not None else mp.mpc(1)

    @property
    def smeared(self) -> Mat2:
        return smear(self.matrix, self.level) if self.level is not None else self.matrix

    @property
    def window(self) -> mp.mpf:
        """``E = max(|eps|, 1/|eps|)^2``, the ratio scaling of one ``A_N`` step."""

        size = abs(self.eps)
        return max(size, 1 / size) ** 2

    @property
    def beta(self) -> mp.mpc:
        return self.n_value * self.alpha

    @property
    def beta_p(self) -> mp.mpc:
        return self.n_value * self.alpha_p

    def to_json(self) -> dict[str, object]:
        return {
            "matrix": str(self.matrix),
            "N": str(self.level) if self.level is not None else "1",
            "alpha": complex_to_json(self.alpha, 30),
            "alpha_p": complex_to_json(self.alpha_p, 30),
            "eps": complex_to_json(self.eps, 30),
            "theta": self.theta,
        }


def _is_degenerate_trace(matrix: Mat2) -> bool:
    trace = matrix.trace()
    square = trace * trace
    return square.y == 0 and square.x in (0, 1, 4)


def fixed_points(matrix: Mat2) -> tuple[mp.mpc, mp.mpc]:
    """Roots of ``c X^2 + (d - a) X - b``, ordered by ``Im`` then ``Re`` descending."""

    if matrix.c.is_zero():
        raise GeodesicError(f"{matrix} has c = 0; its fixed points are not both finite")
    if _is_degenerate_trace(matrix):
        raise GeodesicError(f"{matrix} has (a+d)^2 in {{0, 1, 4}}")
    a, b, c, d = (entry.to_complex() for entry in matrix.entries())
    root = mp.sqrt((a + d) ** 2 - 4)
    first = (a - d + root) / (2 * c)
    second = (a - d - root) / (2 * c)
    key = lambda z: (mp.im(z), mp.re(z))  # noqa: E731
    return (first, second) if key(first) >= key(second) else (second, first)


def unit_of(matrix: Mat2, alpha: mp.mpc, alpha_p: mp.mpc, level: Level | None = None) -> GeodesicData:
    """``eps = c alpha + d`` with ``eps eps' = 1`` and ``theta = 1`` iff ``|eps| > 1``."""

    c, d = matrix.c.to_complex(), matrix.d.to_complex()
    eps = c * alpha + d
    eps_p = c * alpha_p + d
    if abs(eps * eps_p - 1) > mp.mp.eps ** mp.mpf(0.5):
        raise GeodesicError(f"eps eps' = {mp.nstr(eps * eps_p, 10)} for {matrix}")
    if abs(abs(eps) - 1) < UNIT_MARGIN:
        raise GeodesicError(f"{matrix} is not loxodromic: |eps| = {mp.nstr(abs(eps), 10)}")
    return GeodesicData(matrix, level, alpha, alpha_p, eps, 1 if abs(eps) > 1 else -1)


def geodesic_data(matrix: Mat2, level: Level | None = None) -> GeodesicData:
    if level is not None and not matrix.in_gamma0(level):
        raise GeodesicError(f"{matrix} is not in Gamma0({level})")
    alpha, alpha_p = fixed_points(matrix)
    return unit_of(matrix, alpha, alpha_p, level)


def q_form(m: mp.mpc, n: mp.mpc, data: GeodesicData) -> mp.mpc:
    """``Q_N(m, n) = (m N alpha + n)(m N alpha' + n)``."""

    return (m * data.beta + n) * (m * data.beta_p + n)


def orbit_element(m: mp.mpc, n: mp.mpc, k: int, data: GeodesicData) -> tuple[mp.mpc, mp.mpc]:
    """``(m, n) A_N^k`` for complex ``m``, ``n``."""

    step = data.smeared if k >= 0 else data.smeared.inverse()
    a, b, c, d = (entry.to_complex() for entry in step.entries())
    for _ in range(abs(k)):
        m, n = a * m + c * n, b * m + d * n
    return m, n


@dataclass
class OrbitSet:
    """Window representatives ``(m, n, mu_N, mu_N')`` with ``|Q_N| <= bound``."""

    data: GeodesicData
    p: QuadFrac
    q: QuadFrac
    bound: mp.mpf
    reps: list[tuple[mp.mpc, mp.mpc, mp.mpc, mp.mpc]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.reps)

    def q_values(self) -> list[mp.mpc]:
        return [mu * mu_p for _, _, mu, mu_p in self.reps]


def check_shift_conditions(matrix: Mat2, level: Level | None, p: QuadFrac, q: QuadFrac) -> None:
    """``(p, q) A = (p, q)`` and ``(p, q) A_N = (p, q)`` modulo ``L^2``."""

    pair = (p.reduce(), q.reduce())
    if matrix.act_row(p, q) != pair:
        raise ShiftConditionError(f"(p, q) A differs from (p, q) for {matrix}")
    if level is not None and smear(matrix, level).act_row(p, q) != pair:
        raise ShiftConditionError(f"(p, q) A_N differs from (p, q) for {matrix}")


def in_window(mu: mp.mpc, mu_p: mp.mpc, window: mp.mpf, start: mp.mpf | int = 1) -> bool:
    """``|mu / mu'|`` in ``[start, start * window)``; ``mu' = 0`` never qualifies.

    Both ends are pulled down by a relative ``sqrt(eps)`` so a ratio that sits on
    the boundary up to rounding is counted at the lower end only.
    """

    if mu_p == 0:
        return False
    ratio = abs(mu) / abs(mu_p)
    lower = start * (1 - mp.mp.eps ** mp.mpf(0.5))
    return lower <= ratio < lower * window


def orbit_reps(
    data: GeodesicData,
    p: QuadFrac | QuadInt | None,
    q: QuadFrac | QuadInt | None,
    bound: float | mp.mpf,
    lattice: Lattice,
    *,
    window_start: float | mp.mpf = 1,
) -> OrbitSet:
    """All window representatives of ``M^N_{p,q} - {0}`` with ``|Q_N(mu_N)| <= bound``.

    Any ``window_start > 0`` gives a fundamental domain ``[start, start * E)``
    for the ratio ``|mu_N / mu_N'|``; the default is ``[1, E)``.
    """

    zero = lattice.order.zero().to_frac()
    p = as_frac(p).reduce() if p is not None else zero
    q = as_frac(q).reduce() if q is not None else zero
    check_shift_conditions(data.matrix, data.level, p, q)
    bound = mp.mpf(bound)
    start = mp.mpf(window_start)
    if start <= 0:
        raise ValueError(f"window start must be positive, got {window_start}")
    window = data.window
    beta, beta_p = data.beta, data.beta_p
    mu_max = mp.sqrt(start * window * bound)
    mu_p_max = mp.sqrt(bound / start) * (1 + UNIT_MARGIN)
    m_max = (mu_max + mu_p_max) / abs(beta - beta_p)
    omega = lattice.order.omega()
    p_value, q_value = p.to_complex(), q.to_complex()
    result = OrbitSet(data, p, q, bound)
    for mi, mj in lattice.points(m_max, center=p_value):
        m = mi + mj * omega + p_value
        # |m beta' + n| <= sqrt(bound / start) confines n to a small disc
        for ni, nj in lattice.points(mu_p_max, center=q_value + m * beta_p):
            n = ni + nj * omega + q_value
            mu = m * beta + n
            mu_p = m * beta_p + n
            if abs(mu * mu_p) > bound or abs(mu * mu_p) == 0:
                continue
            if in_window(mu, mu_p, window, start):
                result.reps.append((m, n, mu, mu_p))
    logger.debug("orbit set for %s: %d representatives with |Q| <= %s", data.matrix, len(result), bound)
    return result


@dataclass
class LValue:
    value: mp.mpc
    tail_estimate: mp.mpf
    count: int
    s: mp.mpc

    def to_json(self) -> dict[str, object]:
        return {
            "value": complex_to_json(self.value, 30),
            "tail_estimate": mp.nstr(self.tail_estimate, 5),
            "representatives": self.count,
            "s": complex_to_json(self.s, 10),
        }


def _orbit_sum(q_values: list[mp.mpc], s: mp.mpc) -> mp.mpc:
    return mp.fsum(mp.conj(value) / abs(value) ** (2 * s) for value in q_values)


def l_direct(
    data: GeodesicData,
    s: float | mp.mpc,
    lattice: Lattice,
    *,
    p: QuadFrac | QuadInt | None = None,
    q: QuadFrac | QuadInt | None = None,
    bound: float = 200.0,
    window_start: float | mp.mpf = 1,
) -> LValue:
    """Truncated ``sum'' conj(Q_N) / |Q_N|^(2s)`` with a shell-difference tail estimate."""

    s = mp.mpc(s)
    if mp.re(s) < MIN_DIRECT_S:
        raise ConvergenceRegionError(f"Re(s) = {mp.nstr(mp.re(s), 5)} is below {MIN_DIRECT_S}")
    orbit = orbit_reps(data, p, q, bound, lattice, window_start=window_start)
    values = orbit.q_values()
    total = _orbit_sum(values, s)
    half = _orbit_sum([v for v in values if abs(v) <= orbit.bound / 2], s)
    decay = mp.mpf(2) ** (3 - 2 * mp.re(s))
    tail = 10 * abs(total - half) * decay / (1 - decay)
    return LValue(total, tail, len(values), s)


@dataclass
class ClosedForm:
    l_value: mp.mpc
    l_unsmeared: mp.mpc
    phi_value: mp.mpc
    phi_reference: mp.mpc
    residual: mp.mpf
    error_budget: mp.mpf
    single_factor: mp.mpc

    def to_json(self) -> dict[str, object]:
        return {
            "L_N": complex_to_json(self.l_value, 30),
            "L": complex_to_json(self.l_unsmeared, 30),
            "Phi_N": complex_to_json(self.phi_value, 30),
            "Phi_N_cocycle": complex_to_json(self.phi_reference, 30),
            "residual": mp.nstr(self.residual, 5),
            "error_budget": mp.nstr(self.error_budget, 5),
            "single_factor_L_N": complex_to_json(self.single_factor, 30),
        }


def l_closed_s1(
    data: GeodesicData,
    lattice: Lattice,
    params: SeriesParams | None = None,
    *,
    p: QuadFrac | QuadInt | None = None,
    q: QuadFrac | QuadInt | None = None,
) -> ClosedForm:
    """``L_N(A_N, 1; p, q)`` and ``L(A, 1; p, q)`` in closed form, and ``Phi_N`` from them.

    With ``tau = (a+d)/c`` and the shift conditions in force::

        theta (alpha - alpha') L_N = -conj(N tau)/N E(p) - tau E_0(p) E_2(q) - D(a, c/N; p, q)/N
        theta (alpha - alpha') L   = -conj(tau) E(p) - tau E_0(p) E_2(q) - D(a, c; p, q)

    ``theta (alpha - alpha')(N L_N - L)`` is compared with the explicit
    ``D(Na, c)`` form of :func:`phi_n`, so the residual measures the
    distribution relation ``D(a, c/N) = D(Na, c)``. ``single_factor`` is the
    same display with ``conj(tau) E_2(p)`` in the first term; it equals
    ``L_N`` when ``N`` is real and ``p`` is in ``L``.
    """

    if data.level is None:
        raise GeodesicError("the closed form needs a level")
    zero = lattice.order.zero().to_frac()
    p = as_frac(p).reduce() if p is not None else zero
    q = as_frac(q).reduce() if q is not None else zero
    check_shift_conditions(data.matrix, data.level, p, q)
    n = data.n_value
    factor = data.theta * (data.alpha - data.alpha_p)
    a, _, c, d = data.matrix.entries()
    tau = ((a + d) / c).to_complex()
    series = lattice_series(lattice, params)
    e_p = series.e(p)
    e0_e2 = series.e0(p) * series.e2(q) if series.e0(p) else mp.mpc(0)
    level_sum = d_sum_level(a, c, data.level, lattice, params, p=p, q=q)
    plain_sum = d_sum_pq(a, c, p, q, lattice, params)
    l_value = (-mp.conj(n * tau) / n * e_p - tau * e0_e2 - level_sum / n) / factor
    l_unsmeared = (-mp.conj(tau) * e_p - tau * e0_e2 - plain_sum) / factor
    phi_value = factor * (n * l_value - l_unsmeared)
    reference = phi_n(data.matrix, data.level, lattice, params, p=p, q=q, cross_check=False)
    single_factor = (-mp.conj(tau) * series.e2(p) - tau * e0_e2 - level_sum / n) / factor
    residual = abs(phi_value - reference.value)
    if residual > reference.error_budget:
        logger.warning(
            "closed form of Phi_N for %s misses the cocycle value by %s (budget %s)",
            data.matrix,
            mp.nstr(residual, 5),
            mp.nstr(reference.error_budget, 5),
        )
    return ClosedForm(
        l_value, l_unsmeared, phi_value, reference.value, residual, reference.error_budget, single_factor
    )


def beta_factor(s: mp.mpf) -> mp.mpf:
    """``int_0^inf (t / (t^2 + 1))^(s+2) dt / t = Gamma((s+2)/2)^2 / (2 Gamma(s+2))``."""

    return mp.gamma((s + 2) / 2) ** 2 / (2 * mp.gamma(s + 2))


@dataclass
class GeodesicPath:
    """``u_N(t) = (beta t^2 + beta') / (t^2 + 1) + j |beta - beta'| t / (t^2 + 1)``."""

    data: GeodesicData

    def point(self, t: mp.mpf) -> Point3:
        t = mp.mpf(t)
        beta, beta_p = self.data.beta, self.data.beta_p
        z = (beta * t**2 + beta_p) / (t**2 + 1)
        return Point3(z, abs(beta - beta_p) * t / (t**2 + 1))

    def base_point(self, t: mp.mpf) -> Point3:
        """``u(t)`` on the geodesic between ``alpha`` and ``alpha'``."""

        t = mp.mpf(t)
        alpha, alpha_p = self.data.alpha, self.data.alpha_p
        return Point3((alpha * t**2 + alpha_p) / (t**2 + 1), abs(alpha - alpha_p) * t / (t**2 + 1))

    def endpoint_residual(self, t: mp.mpf = mp.mpf(1)) -> mp.mpf:
        """Distance between ``A_N u_N(t)`` and ``u_N(|eps|^2 t)``."""

        moved = moebius(self.data.smeared, self.point(t))
        target = self.point(abs(self.data.eps) ** 2 * mp.mpf(t))
        return abs(moved.z - target.z) + abs(moved.v - target.v)


def _integrand(
    t: mp.mpf,
    pairs: list[tuple[mp.mpc, mp.mpc]],
    path: GeodesicPath,
    s: mp.mpf,
) -> mp.mpc:
    beta, beta_p = path.data.beta, path.data.beta_p
    delta = beta - beta_p
    u = path.point(t)
    z, v = u.z, u.v
    terms = []
    for m, n in pairs:
        w = m * z + n
        mv = mp.conj(m) * v
        bracket = (
            mp.conj(w) ** 2 * delta * t
            + mp.conj(w) * mv * abs(delta) * (1 - t**2)
            - mv**2 * mp.conj(delta) * t
        )
        terms.append(bracket * (abs(w) ** 2 + abs(m * v) ** 2) ** (-s - 2))
    return 2 * mp.fsum(terms) * v**s / (1 + t**2) ** 2


@dataclass
class IntegralCheck:
    integral: mp.mpc
    closed_form: mp.mpc
    residual: mp.mpf
    representatives: int
    steps: int

    def to_json(self) -> dict[str, object]:
        return {
            "integral": complex_to_json(self.integral, 20),
            "closed_form": complex_to_json(self.closed_form, 20),
            "relative_residual": mp.nstr(self.residual, 5),
            "representatives": self.representatives,
            "orbit_steps": self.steps,
        }


def integral_check(
    data: GeodesicData,
    s: float | mp.mpf,
    lattice: Lattice,
    *,
    p: QuadFrac | QuadInt | None = None,
    q: QuadFrac | QuadInt | None = None,
    bound: float = 40.0,
    orbit_tolerance: float = 1e-12,
) -> IntegralCheck:
    """Compare the path integral over ``[1, |eps|^2]`` with the Beta-function closed form.

    The integrand is summed over the window representatives and their
    ``A_N^k`` images, ``|k| <= K`` with ``E^(-K(s+2)/2)`` below ``orbit_tolerance``.
    The closed form is ``2 theta delta |delta|^s B(s) sum'' conj(Q_N) / |Q_N|^(s+2)``
    with ``delta = N (alpha - alpha')``; for real positive ``N`` the prefactor is
    ``2 N^(s+1) theta (alpha - alpha') |alpha - alpha'|^s``.
    """

    s = mp.mpf(s)
    if s <= 1:
        raise ConvergenceRegionError(f"the path integral needs s > 1, got {s}")
    orbit = orbit_reps(data, p, q, bound, lattice)
    if not orbit.reps:
        raise QuadratureError(f"no orbit representatives with |Q| <= {bound}")
    steps = int(mp.ceil(2 * mp.log(1 / mp.mpf(orbit_tolerance)) / ((s + 2) * mp.log(data.window)))) + 1
    pairs = []
    for m, n, _, _ in orbit.reps:
        for k in range(-steps, steps + 1):
            pairs.append(orbit_element(m, n, k, data))
    path = GeodesicPath(data)
    end = abs(data.eps) ** 2
    nodes = [mp.mpf(1) + (end - 1) * i / 4 for i in range(5)]
    integral, error = mp.quad(lambda t: _integrand(t, pairs, path, s), nodes, error=True)
    if not mp.isfinite(mp.re(integral)) or error > abs(integral) * mp.mpf("1e-6"):
        raise QuadratureError(f"quadrature error estimate {mp.nstr(error, 5)} is too large")
    delta = data.beta - data.beta_p
    q_values = orbit.q_values()
    closed = (
        2 * data.theta * delta * abs(delta) ** s * beta_factor(s)
        * mp.fsum(mp.conj(v) / abs(v) ** (s + 2) for v in q_values)
    )
    residual = abs(integral - closed) / abs(closed)
    logger.debug("integral check for %s: relative residual %s", data.matrix, mp.nstr(residual, 5))
    return IntegralCheck(integral, closed, residual, len(q_values), steps)


def random_admissible(
    level: Level,
    height: int,
    seed: int | None = None,
    *,
    rng: random.Random | None = None,
    max_tries: int = 500,
) -> GeodesicData:
    """Sample ``A`` in ``Gamma0(N)`` with ``c != 0`` and a loxodromic unit."""

    rng = rng or random.Random(seed)
    for _ in range(max_tries):
        matrix = random_gamma0(level, height, rng=rng)
        if matrix.c.is_zero() or _is_degenerate_trace(matrix):
            continue
        try:
            return geodesic_data(matrix, level)
        except GeodesicError:
            continue
    raise GeodesicError(f"no admissible matrix in Gamma0({level}) with height {height}")

"""Modified Bessel function ``K_1`` at the ambient mpmath precision.

Two regimes share the work: the ascending series around ``t = 0`` (with the
logarithmic ``I_1`` part) below :data:`SERIES_SWITCHOVER`, and Steed's
continued fraction (Temme's CF2 for ``K_0`` and ``K_1``) above it.
"""

from __future__ import annotations

import mpmath as mp

SERIES_SWITCHOVER = 2
"""Arguments below this use the power series; at and above, the continued fraction."""

MAX_ITERATIONS = 100_000


def _k1_series(t: mp.mpf) -> mp.mpf:
    quarter = t * t / 4
    eps = mp.mp.eps
    term = mp.mpf(1)
    harmonic_k = mp.mpf(0)
    harmonic_k1 = mp.mpf(1)
    i1_sum = mp.mpf(0)
    psi_sum = mp.mpf(0)
    for k in range(MAX_ITERATIONS):
        i1_sum += term
        psi_sum += (harmonic_k + harmonic_k1 - 2 * mp.euler) * term
        if term < eps * i1_sum and k > 2:
            break
        term = term * quarter / ((k + 1) * (k + 2))
        harmonic_k += mp.mpf(1) / (k + 1)
        harmonic_k1 += mp.mpf(1) / (k + 2)
    i1 = t / 2 * i1_sum
    return 1 / t + mp.log(t / 2) * i1 - t / 4 * psi_sum


def _k1_continued_fraction(t: mp.mpf) -> mp.mpf:
    b = 2 * (1 + t)
    d = 1 / b
    h = delh = d
    q1, q2 = mp.mpf(0), mp.mpf(1)
    a1 = mp.mpf(1) / 4
    q = c = a1
    a = -a1
    s = 1 + q * delh
    eps = mp.mp.eps
    for i in range(1, MAX_ITERATIONS):
        a -= 2 * i
        c = -a * c / (i + 1)
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2
        d = 1 / (b + a * d)
        delh = (b * d - 1) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < eps:
            break
    else:  # pragma: no cover - the fraction converges for t >= 2
        raise ArithmeticError(f"K_1 continued fraction did not converge at t={t}")
    h = a1 * h
    k0 = mp.sqrt(mp.pi / (2 * t)) * mp.exp(-t) / s
    return k0 * (t + mp.mpf(1) / 2 - h) / t


def bessel_k1(t: mp.mpf | float | int) -> mp.mpf:
    """``K_1(t)`` for real ``t > 0`` to the ambient precision.

    Args:
        t: Positive real argument.

    Returns:
        The modified Bessel function of the second kind of order one.

    Raises:
        ValueError: If ``t <= 0``.
    """

    t = mp.mpf(t)
    if t <= 0:
        raise ValueError(f"K_1 is only defined here for t > 0, got {t}")
    if t < SERIES_SWITCHOVER:
        return _k1_series(t)
    return _k1_continued_fraction(t)

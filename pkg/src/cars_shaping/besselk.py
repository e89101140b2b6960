"""Modified Bessel function of the second kind, order zero.

Power series for ``x <= 2`` and Steed's continued fraction (Temme's
CF2 form) above; both reach double precision. ``k0_integral`` is an
independent quadrature of ``K0(x) = int_0^inf exp(-x cosh t) dt`` for
cross-checking.
"""
import math

import numpy as np

EULER_GAMMA = 0.5772156649015329
_EPS = 1e-16
_MAXIT = 10000


def _k0_series(x):
    y = 0.25 * x * x
    term = 1.0        # (y^k / k!^2)
    harmonic = 0.0    # H_k
    i0 = 1.0
    tail = 0.0
    k = 0
    while True:
        k += 1
        term *= y / (k * k)
        harmonic += 1.0 / k
        i0 += term
        tail += term * harmonic
        if term * max(harmonic, 1.0) < _EPS * abs(tail + 1.0):
            break
    return -(math.log(0.5 * x) + EULER_GAMMA) * i0 + tail


def _k0e_steed(x):
    """``exp(x) K0(x)``; Temme (1975) / Numerical Recipes bessik with nu = 0."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    q = c = 0.25
    a = -0.25
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:
        raise ArithmeticError("K0 continued fraction failed to converge")
    return math.sqrt(math.pi / (2.0 * x)) / s


def k0(x: float) -> float:
    """K0(x) for x > 0."""
    x = float(x)
    if not x > 0:
        raise ValueError("K0 is defined for x > 0")
    if x <= 2.0:
        return _k0_series(x)
    return _k0e_steed(x) * math.exp(-x)


def k0e(x: float) -> float:
    """Exponentially scaled ``exp(x) K0(x)``, safe for large x."""
    x = float(x)
    if not x > 0:
        raise ValueError("K0 is defined for x > 0")
    if x <= 2.0:
        return math.exp(x) * _k0_series(x)
    return _k0e_steed(x)


def k0_integral(x: float, n: int = 4000) -> float:
    """Trapezoidal quadrature of the integral representation."""
    t_max = math.acosh(max(1.0, 745.0 / x)) + 1.0
    t = np.linspace(0.0, t_max, n)
    f = np.exp(-x * np.cosh(t))
    return float(np.trapezoid(f, t))

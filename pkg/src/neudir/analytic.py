"""Closed-form reference spectra for the square and the disk.

The disk spectra need zeros of J_n and J_n'; both the Bessel functions and
their zeros are computed here from scratch (power series, Miller's backward
recurrence, McMahon starting values, bracketing and Newton polish).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BracketFailure
from .fem_scalar import Spectrum

SERIES_LIMIT = 6.0
ZERO_TOL = 1e-12


def _series(n: int, x: float) -> float:
    # J_n(x) = sum_m (-1)^m (x/2)^(2m+n) / (m! (m+n)!)
    half = 0.5 * x
    term = half ** n / math.factorial(n)
    terms = [term]
    q = -half * half
    m = 0
    while True:
        m += 1
        term *= q / (m * (m + n))
        terms.append(term)
        if abs(term) < 1e-17 * max(abs(terms[0]), 1e-300) and m > half:
            break
        if m > 200:
            break
    return math.fsum(terms)


def _miller(n: int, x: float) -> float:
    # backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalised by J_0 + 2 sum J_{2k} = 1
    start = 2 * ((max(n, int(x)) + int(math.sqrt(40.0 * max(n, x))) + 20) // 2)
    j_next, j_cur = 0.0, 1e-300
    total = 0.0
    result = 0.0
    for k in range(start, 0, -1):
        j_prev = 2.0 * k / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            total *= 1e-250
            result *= 1e-250
        if k - 1 == n:
            result = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            total += j_cur
    # j_cur now holds the unnormalised J_0
    norm = j_cur + 2.0 * total
    return result / norm


def bessel_j(n: int, x: float, derivative: bool = False) -> float:
    """J_n(x) for integer n >= 0 and x >= 0, or J_n'(x) with ``derivative``.

    Power series up to x = 6, Miller's backward recurrence beyond (the series
    loses digits to cancellation as the terms grow like e^(x/2)).
    """
    if n < 0:
        raise ValueError("order must be >= 0")
    if x < 0:
        raise ValueError("argument must be >= 0")
    if derivative:
        if n == 0:
            return -bessel_j(1, x)
        return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    if x == 0:
        return 1.0 if n == 0 else 0.0
    if x <= SERIES_LIMIT:
        return _series(n, x)
    return _miller(n, x)


def mcmahon_guess(kind: str, n: int, k: int) -> float:
    """First-order McMahon approximation of the k-th positive zero."""
    mu = 4.0 * n * n
    if kind == "J":
        beta = (k + 0.5 * n - 0.25) * math.pi
        return beta - (mu - 1.0) / (8.0 * beta)
    beta = (k + 0.5 * n - 0.75) * math.pi
    if n == 0:
        # J_0' = -J_1, whose positive zeros are those of J_1
        beta = (k + 0.5 - 0.25) * math.pi
        return beta - 3.0 / (8.0 * beta)
    return beta - (mu + 3.0) / (8.0 * beta)


def _fn(kind, n):
    if kind == "J":
        return lambda x: bessel_j(n, x)
    return lambda x: bessel_j(n, x, derivative=True)


def _dfn(kind, n):
    if kind == "J":
        return lambda x: bessel_j(n, x, derivative=True)
    # J_n'' = -J_n'/x - (1 - n^2/x^2) J_n
    return lambda x: -bessel_j(n, x, True) / x - (1.0 - n * n / (x * x)) * bessel_j(n, x)


@lru_cache(maxsize=None)
def bessel_zero(kind: str, n: int, k: int) -> float:
    """k-th positive zero of J_n (``kind="J"``) or of J_n' (``kind="Jprime"``).

    Sign changes are counted on a fine grid from the origin to locate the
    k-th bracket; McMahon's formula only decides how far the scan must reach.
    The bracketed root is then polished with safeguarded Newton steps.
    """
    if kind not in ("J", "Jprime"):
        raise ValueError("kind must be 'J' or 'Jprime'")
    if k < 1 or n < 0:
        raise ValueError("need n >= 0 and k >= 1")
    f, df = _fn(kind, n), _dfn(kind, n)
    guess = mcmahon_guess(kind, n, k)
    # consecutive zeros of J_n and J_n' are more than 1 apart, so a 0.25 grid
    # never hides a pair of sign changes; no zero lies below the order n
    step = 0.25
    hi_limit = max(guess, n + 1.0) + 2.0 * math.pi + 10.0
    x0 = max(1e-3, 0.9 * n)
    xa, fa = x0, f(x0)
    found = 0
    while xa < hi_limit:
        xb = xa + step
        fb = f(xb)
        if fa * fb < 0 or fb == 0.0:
            found += 1
            if found == k:
                return _polish_root(f, df, xa, xb)
        xa, fa = xb, fb
    raise BracketFailure(f"only {found} sign changes of {kind}_{n} below {hi_limit:.3f}",
                         interval=(x0, hi_limit))


def _polish_root(f, df, a, b):
    fa = f(a)
    if fa == 0.0:
        return a
    x = 0.5 * (a + b)
    for _ in range(100):
        fx = f(x)
        if fx == 0.0:
            return x
        if fa * fx < 0:
            b = x
        else:
            a, fa = x, fx
        d = df(x)
        xn = x - fx / d if d != 0 else 0.5 * (a + b)
        # converged Newton steps may land on a bracket end; test before clamping
        if abs(xn - x) <= ZERO_TOL * max(1.0, abs(x)):
            return xn
        if not (a < xn < b):
            xn = 0.5 * (a + b)
        x = xn
    return x


@dataclass(frozen=True)
class BesselZero:
    kind: str
    order: int
    index: int
    value: float
    accuracy: float


def zero_table(kind: str, max_order: int, max_index: int) -> list[BesselZero]:
    """All zeros j_{n,k} (or j'_{n,k}) for n <= max_order, k <= max_index."""
    out = []
    for n in range(max_order + 1):
        f = _fn(kind, n)
        for k in range(1, max_index + 1):
            z = bessel_zero(kind, n, k)
            out.append(BesselZero(kind, n, k, z, abs(f(z))))
    return out


def square_spectrum(bc: str, count: int, side: float = math.pi) -> Spectrum:
    """(pi/side)^2 (m^2 + n^2) over m, n >= 1 (Dirichlet) or m, n >= 0 (Neumann)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    lo = 1 if bc == "dirichlet" else 0
    if bc not in ("dirichlet", "neumann"):
        raise ValueError(f"unknown bc {bc!r}")
    # m^2 + n^2 <= R^2 contains at least `count` pairs once R is large enough
    r = int(math.isqrt(count)) + 2
    while True:
        vals = sorted(m * m + n * n for m in range(lo, 2 * r + lo) for n in range(lo, 2 * r + lo))
        if len(vals) >= count and vals[count - 1] < (2 * r + lo) ** 2:
            break
        r *= 2
    scale = (math.pi / side) ** 2
    values = scale * np.array(vals[:count], dtype=float)
    return Spectrum(values, f"analytic:{bc}", np.zeros(count), domain="square")


def disk_spectrum(bc: str, count: int, radius: float = 1.0) -> Spectrum:
    """Disk eigenvalues from squared Bessel zeros with multiplicity 1 (n = 0) or 2.

    The (n, k) enumeration grows until every eigenvalue not yet listed is
    provably above the ``count``-th one.  For fixed n the zeros increase in k,
    and the k-th zero increases with n, except that j'_{0,k} equals j_{1,k}
    and so exceeds j'_{1,k}; orders 0 and 1 are always enumerated together.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if bc not in ("dirichlet", "neumann"):
        raise ValueError(f"unknown bc {bc!r}")
    kind = "J" if bc == "dirichlet" else "Jprime"
    N, K = 2, 2
    while True:
        entries = [0.0] if bc == "neumann" else []
        for n in range(N + 1):
            for k in range(1, K + 1):
                z2 = bessel_zero(kind, n, k) ** 2
                entries.extend([z2] * (1 if n == 0 else 2))
        entries.sort()
        if len(entries) >= count:
            top = entries[count - 1]
            frontier = min([bessel_zero(kind, N + 1, 1)]
                           + [bessel_zero(kind, n, K + 1) for n in range(N + 1)]) ** 2
            if top < frontier:
                break
        N, K = N + 2, K + 2
    values = np.array(entries[:count]) / radius ** 2
    return Spectrum(values, f"analytic:{bc}", np.zeros(count), domain="disk")

"""Special-function kernels: generalized binomials, Stirling numbers, Bessel functions.

Everything analytic in this package reduces to the four primitives below:

* ``gen_binomial`` -- binomial coefficients with an arbitrary real (or exact
  rational) upper argument, evaluated in the pole-free product form,
* ``stirling1_unsigned`` / ``stirling2`` -- exact arbitrary-precision Stirling
  numbers, memoized in triangular tables,
* ``bessel_k`` / ``bessel_i`` -- modified Bessel functions of real order.

The Stirling tables are plain Python integers (never floats): the moment
closed forms combine them with factorials in ways that overflow 64-bit
integers already around row 21.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from typing import Union

from scipy.special import iv, kv

Number = Union[int, float, Fraction]

#: Arguments above this make K_nu underflow to zero in double precision
#: (exp(-x) < 5e-324 for x > ~745).  bessel_k returns 0.0 there.
BESSEL_K_UNDERFLOW_X = 700.0

#: Largest moment order for which exact tables are built (documented cap).
MAX_EXACT_ORDER = 60


def gen_binomial(x: Number, k: int) -> Number:
    """Binomial coefficient ``x choose k`` for real or rational ``x``.

    Uses the falling product x(x-1)...(x-k+1)/k!, which is total on the
    reals (no gamma poles).  The result is an exact ``Fraction`` whenever
    ``x`` is an ``int`` or ``Fraction``.
    """
    if k < 0:
        raise ValueError("k must be a nonnegative integer")
    if isinstance(x, (int, Fraction)):
        num = Fraction(1)
        for i in range(k):
            num *= Fraction(x) - i
        return num / math.factorial(k)
    prod = 1.0
    for i in range(k):
        prod *= x - i
    return prod / math.factorial(k)


class StirlingCache:
    """Triangular tables of Stirling numbers, grown on demand.

    Row ``n`` holds entries for k = 0..n.  ``first_kind`` stores the unsigned
    numbers (permutations of n elements with k cycles), ``second_kind`` the
    set-partition counts.  Entries satisfy the defining recurrences exactly;
    out-of-range indices are 0 except (0, 0) = 1.  Thread-safe for readers;
    growth is serialized by a lock.
    """

    def __init__(self) -> None:
        self.first_kind: list[list[int]] = [[1]]
        self.second_kind: list[list[int]] = [[1]]
        self._lock = threading.Lock()

    def grow(self, n: int) -> None:
        with self._lock:
            while len(self.first_kind) <= n:
                m = len(self.first_kind)  # building row m from row m-1
                prev1 = self.first_kind[m - 1]
                prev2 = self.second_kind[m - 1]
                row1 = [0] * (m + 1)
                row2 = [0] * (m + 1)
                for k in range(1, m + 1):
                    # s1(m, k) = (m-1) s1(m-1, k) + s1(m-1, k-1)
                    row1[k] = (m - 1) * (prev1[k] if k < m else 0) + prev1[k - 1]
                    # S2(m, k) = k S2(m-1, k) + S2(m-1, k-1)
                    row2[k] = k * (prev2[k] if k < m else 0) + prev2[k - 1]
                self.first_kind.append(row1)
                self.second_kind.append(row2)

    def s1(self, n: int, k: int) -> int:
        if n < 0 or k < 0 or k > n:
            return 1 if (n == 0 and k == 0) else 0
        if n >= len(self.first_kind):
            self.grow(n)
        return self.first_kind[n][k]

    def s2(self, n: int, k: int) -> int:
        if n < 0 or k < 0 or k > n:
            return 1 if (n == 0 and k == 0) else 0
        if n >= len(self.second_kind):
            self.grow(n)
        return self.second_kind[n][k]


_CACHE = StirlingCache()


def stirling1_unsigned(n: int, k: int) -> int:
    """Unsigned Stirling number of the first kind (cycle counts). Exact."""
    return _CACHE.s1(n, k)


def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind (set-partition counts). Exact."""
    return _CACHE.s2(n, k)


def bessel_k(order: float, x: float, return_flag: bool = False):
    """Modified Bessel function of the second kind K_order(x), x > 0.

    For x > BESSEL_K_UNDERFLOW_X the value underflows double precision;
    0.0 is returned and, with ``return_flag=True``, flagged as such.
    """
    if x <= 0.0:
        raise ValueError("bessel_k requires x > 0")
    if x > BESSEL_K_UNDERFLOW_X:
        return (0.0, True) if return_flag else 0.0
    val = float(kv(order, x))
    return (val, False) if return_flag else val


def bessel_i(order: float, x: float) -> float:
    """Modified Bessel function of the first kind I_order(x), x > 0."""
    if x <= 0.0:
        raise ValueError("bessel_i requires x > 0")
    return float(iv(order, x))


def binomial_exact(n: int, k: int) -> int:
    """Plain integer binomial coefficient (0 outside the triangle)."""
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)

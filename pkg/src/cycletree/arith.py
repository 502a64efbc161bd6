"""Exact integer and modular arithmetic for iterating polynomials over Z/p^nZ.

Everything here works with plain Python integers, so evaluation is exact for
any coefficient size.  Reduction happens at evaluation sites only; polynomial
coefficients are never destructively reduced.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import NotPeriodicError

__all__ = [
    "OddPrime",
    "Residue",
    "IntPoly",
    "Valuation",
    "eval_mod",
    "iterate_eval",
    "ord_p",
    "mult_order",
    "iterate_series",
    "is_probable_prime",
]


# Deterministic Miller-Rabin witnesses for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin primality test, deterministic up to 3.3e24."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n == q:
            return True
        if n % q == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class OddPrime(int):
    """An odd prime modulus base, validated at construction."""

    def __new__(cls, value: int) -> "OddPrime":
        value = int(value)
        if value == 2:
            raise ValueError("p = 2 is not supported")
        if value < 3 or not is_probable_prime(value):
            raise ValueError(f"{value} is not an odd prime")
        return super().__new__(cls, value)


@dataclass(frozen=True)
class Residue:
    """A residue class value in [0, p^level).  Level 0 is the zero ring."""

    value: int
    p: int
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if not 0 <= self.value < self.p**self.level:
            raise ValueError(
                f"residue {self.value} out of range for p^n = {self.p}**{self.level}"
            )

    @property
    def modulus(self) -> int:
        return self.p**self.level


class Valuation(NamedTuple):
    """A p-adic valuation capped at some level.

    ``saturated`` means the true valuation is >= ``value`` (the cap); it is
    used instead of infinity, so ord of 0 at cap c is ``Valuation(c, True)``.
    """

    value: int
    saturated: bool

    def __str__(self) -> str:
        return f">={self.value}" if self.saturated else str(self.value)


def ord_p(v: int, p: int, cap: int) -> Valuation:
    """Largest e <= cap with p^e | v, with a saturation flag at the cap.

    Never claims an exact valuation beyond the cap; v = 0 saturates.
    """
    if cap < 0:
        raise ValueError("cap must be >= 0")
    if v % p**cap == 0:
        return Valuation(cap, True)
    e = 0
    while v % p == 0:
        v //= p
        e += 1
    return Valuation(e, False)


def mult_order(a: int, p: int) -> int:
    """Order of a in (Z/pZ)*.  Rejects a divisible by p."""
    a %= p
    if a == 0:
        raise ValueError("a must be a unit mod p")
    d = 1
    x = a
    while x != 1:
        x = x * a % p
        d += 1
    return d


def _as_coeff_tuple(coeffs: Iterable[int]) -> tuple[int, ...]:
    out = [int(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class IntPoly:
    """Dense integer polynomial; coeffs[i] multiplies x^i.

    The zero polynomial has an empty coefficient tuple and degree -1.
    """

    coeffs: tuple[int, ...]

    def __init__(self, coeffs: Iterable[int] = ()):
        object.__setattr__(self, "coeffs", _as_coeff_tuple(coeffs))

    @classmethod
    def parse(cls, text: str) -> "IntPoly":
        """Parse comma-separated constant-first coefficients, e.g. "2,1,3"."""
        parts = [s.strip() for s in text.split(",")]
        try:
            return cls(int(s) for s in parts)
        except ValueError:
            raise ValueError(f"cannot parse polynomial coefficients: {text!r}") from None

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_mod(self, x: int, modulus: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % modulus
        return acc

    def derivative(self, order: int = 1) -> "IntPoly":
        if order < 1:
            raise ValueError("order must be >= 1")
        coeffs = self.coeffs
        for _ in range(order):
            coeffs = tuple(i * c for i, c in enumerate(coeffs))[1:]
        return IntPoly(coeffs)

    def hasse(self, i: int) -> "IntPoly":
        """i-th Hasse derivative: coefficient of y^i in f(x+y), i.e. f^(i)/i!."""
        if i < 0:
            raise ValueError("i must be >= 0")
        return IntPoly(math.comb(j, i) * c for j, c in enumerate(self.coeffs[i:], start=i))

    def taylor_at(self, x0: int, order: int, modulus: int | None = None) -> list[int]:
        """Hasse derivative values [f(x0), f'(x0), f''(x0)/2, ...] up to ``order``.

        Computed by repeated synthetic division by (x - x0), optionally mod m.
        """
        work = list(self.coeffs)
        out = []
        for _ in range(min(order, self.degree) + 1):
            rem = 0
            for j in range(len(work) - 1, -1, -1):
                rem = rem * x0 + work[j]
                if modulus is not None:
                    rem %= modulus
                work[j] = rem
            out.append(work.pop(0))
        while len(out) < order + 1:
            out.append(0)
        return out

    def __add__(self, other: "IntPoly") -> "IntPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return IntPoly(tuple(x + y for x, y in zip(a, b)) + a[len(b):])

    def __mul__(self, other: "IntPoly | int") -> "IntPoly":
        if isinstance(other, int):
            return IntPoly(c * other for c in self.coeffs)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1 or 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "IntPoly":
        if k < 0:
            raise ValueError("negative power")
        result = IntPoly((1,))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                x = "x" if i == 1 else f"x^{i}"
                terms.append(x if c == 1 else f"-{x}" if c == -1 else f"{c}{x}")
        return " + ".join(terms).replace("+ -", "- ")


def eval_mod(f: IntPoly, x: Residue) -> Residue:
    """f(x) reduced into [0, p^n); exact for all coefficient sizes."""
    return Residue(f.eval_mod(x.value, x.modulus), x.p, x.level)


def iterate_eval(f: IntPoly, x: Residue, k: int) -> Residue:
    """k-th iterate of f applied to x, all arithmetic mod p^n."""
    if k < 1:
        raise ValueError("k must be >= 1")
    v, m = x.value, x.modulus
    for _ in range(k):
        v = f.eval_mod(v, m)
    return Residue(v, x.p, x.level)


@functools.lru_cache(maxsize=256)
def _derivative_of(f: IntPoly) -> IntPoly:
    return f.derivative()


def value_and_deriv(f: IntPoly, x: int, modulus: int) -> tuple[int, int]:
    """(f(x) mod m, f'(x) mod m) with the derivative polynomial cached."""
    return f.eval_mod(x, modulus), _derivative_of(f).eval_mod(x, modulus)


def _series_mul_trunc(u: Sequence[int], v: Sequence[int], order: int,
                      modulus: int | None) -> list[int]:
    out = [0] * (order + 1)
    for i, a in enumerate(u):
        if a == 0:
            continue
        for j, b in enumerate(v):
            if i + j > order:
                break
            out[i + j] += a * b
    if modulus is not None:
        out = [c % modulus for c in out]
    return out


def iterate_series(fmap, x0: int, k: int, order: int,
                   modulus: int | None = None, p: int | None = None) -> list[int]:
    """Truncated power series of the k-th iterate of ``fmap`` around x0.

    Returns [s_0, ..., s_order] with f^k(x0 + y) = sum s_i y^i + O(y^{order+1});
    s_0 = f^k(x0), s_1 = (f^k)'(x0), and s_i is the i-th Hasse derivative.
    With modulus=None all coefficients are exact integers.  ``fmap`` is an
    IntPoly or any map exposing ``taylor_at(x0, order, modulus[, p])``.
    """
    cur = [x0, 1] + [0] * max(order - 1, 0)
    cur = cur[: order + 1]
    for _ in range(k):
        c0 = cur[0]
        if isinstance(fmap, IntPoly):
            shifted = fmap.taylor_at(c0, order, modulus)
        else:
            shifted = fmap.taylor_at(c0, order, modulus, p)
        u = [0] + cur[1:]  # cur minus its constant term
        new = [0] * (order + 1)
        new[0] = shifted[0]
        upow = [1] + [0] * order
        for j in range(1, order + 1):
            upow = _series_mul_trunc(upow, u, order, modulus)
            cj = shifted[j]
            if cj:
                for i in range(j, order + 1):
                    new[i] += cj * upow[i]
        if modulus is not None:
            new = [c % modulus for c in new]
        cur = new
    return cur


def escape_bound(f: IntPoly) -> int | None:
    """|x| above which |f(x)| > |x| strictly, for deg f >= 2; None otherwise."""
    if f.degree < 2:
        return None
    lead = abs(f.coeffs[-1])
    rest = sum(abs(c) for c in f.coeffs[:-1])
    return max(1, -(-(rest + 2) // lead))  # ceil((rest + 2) / lead)


def exact_orbit(f: IntPoly, alpha: int, k: int) -> list[int]:
    """The orbit [alpha, f(alpha), ..., f^{k-1}(alpha)] over Z, verifying that
    f^k(alpha) = alpha exactly and that k is the minimal period.

    Raises NotPeriodicError otherwise.  For deg f >= 2 an escape bound prunes
    runaway iterates early (once past it the orbit can never return).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    bound = escape_bound(f)
    limit = None if bound is None else max(bound, abs(alpha))
    orbit = [alpha]
    x = alpha
    for i in range(k):
        x = f(x)
        if limit is not None and abs(x) > limit:
            raise NotPeriodicError(f"{alpha} is not periodic of period {k} (orbit escapes)")
        if x == alpha:
            if i + 1 != k:
                raise NotPeriodicError(f"{alpha} has period {i + 1}, not {k}")
            return orbit
        orbit.append(x)
    raise NotPeriodicError(f"{alpha} is not periodic of period {k}: f^{k}(alpha) != alpha")

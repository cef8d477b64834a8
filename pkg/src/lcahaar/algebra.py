"""Modular arithmetic, cyclic characters and p-ary digit combinatorics."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache


def is_prime(n: int) -> bool:
    """Deterministic trial division; moduli here are tiny."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class Modulus:
    """The alphabet Z/m. ``is_prime`` is computed, not supplied."""

    m: int
    is_prime: bool = field(init=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.m, int) or isinstance(self.m, bool):
            raise TypeError(f"modulus must be an int, got {self.m!r}")
        if self.m < 2:
            raise ValueError(f"modulus must be >= 2, got {self.m}")
        object.__setattr__(self, "is_prime", is_prime(self.m))

    def __int__(self):
        return self.m

    def require_prime(self, what: str = "this operation") -> int:
        if not self.is_prime:
            raise ValueError(f"{what} needs a prime modulus, got m={self.m}")
        return self.m

    def inverse(self, a: int) -> int:
        return pow(a % self.m, -1, self.m)


def as_modulus(m) -> Modulus:
    return m if isinstance(m, Modulus) else Modulus(int(m))


@dataclass(frozen=True)
class PAryExpansion:
    base: int
    digits: tuple[int, ...]

    def __post_init__(self):
        if self.base < 2:
            raise ValueError(f"base must be >= 2, got {self.base}")
        if any(not 0 <= d < self.base for d in self.digits):
            raise ValueError(f"digit out of range for base {self.base}: {self.digits}")
        if self.digits and self.digits[-1] == 0:
            raise ValueError("trailing zero digit stored")

    def __getitem__(self, i: int) -> int:
        # n^{[i]}; digits beyond the top are zero
        return self.digits[i] if 0 <= i < len(self.digits) else 0

    def __len__(self):
        return len(self.digits)

    def value(self) -> int:
        return sum(d * self.base**i for i, d in enumerate(self.digits))

    def padded(self, width: int) -> tuple[int, ...]:
        if width < len(self.digits):
            raise ValueError(f"width {width} shorter than expansion ({len(self.digits)} digits)")
        return self.digits + (0,) * (width - len(self.digits))


def _check_base(p: int) -> None:
    if p < 2:
        raise ValueError(f"base must be >= 2, got {p}")


def p_ary_expansion(n: int, p: int) -> PAryExpansion:
    """Base-p digits of n, least significant first. Zero has no digits."""
    _check_base(p)
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    digits = []
    while n:
        n, d = divmod(n, p)
        digits.append(d)
    return PAryExpansion(p, tuple(digits))


def index_set(n: int, p: int) -> frozenset[int]:
    """Positions of the nonzero base-p digits of n."""
    return frozenset(i for i, d in enumerate(p_ary_expansion(n, p).digits) if d)


_KNOWN_PRIMES: set[int] = set()


def _check_prime(p: int) -> None:
    if p in _KNOWN_PRIMES:
        return
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    _KNOWN_PRIMES.add(p)


@lru_cache(maxsize=None)
def digit_binomial_table(p: int) -> tuple[tuple[int, ...], ...]:
    """C(a, b) mod p for 0 <= a, b < p (zero when b > a)."""
    table = [[0] * p for _ in range(p)]
    for a in range(p):
        for b in range(a + 1):
            table[a][b] = math.comb(a, b) % p
    return tuple(tuple(row) for row in table)


def lucas_leq(n: int, N: int, p: int) -> bool:
    """n << N: every base-p digit of n is at most the matching digit of N."""
    _check_prime(p)
    if n < 0 or N < 0:
        raise ValueError("arguments must be nonnegative")
    while n:
        if n % p > N % p:
            return False
        n //= p
        N //= p
    return True


def lucas_binomial(N: int, n: int, p: int) -> int:
    """binomial(N, n) mod p as a product of digitwise binomials."""
    _check_prime(p)
    if n < 0 or N < 0:
        raise ValueError("arguments must be nonnegative")
    if n > N:
        return 0
    table = digit_binomial_table(p)
    result = 1
    while n:
        result = result * table[N % p][n % p] % p
        if not result:
            return 0
        n //= p
        N //= p
    return result


def ceil_log(x: int, p: int) -> int:
    """Smallest e >= 0 with p**e >= x, computed exactly (x >= 1)."""
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    e, power = 0, 1
    while power < x:
        power *= p
        e += 1
    return e


def carry_spill_bound(count: int, cutoff: int, p: int) -> int:
    """Digit position from which a sum of ``count`` numbers below p**cutoff is zero."""
    if count < 1 or cutoff < 1:
        raise ValueError("count and cutoff must be positive")
    _check_base(p)
    return cutoff + ceil_log(count, p)


def cyclic_char_value(exponent: int, element: int, m) -> complex:
    """exp(2 pi i * exponent * element / m)."""
    m = int(m)
    k = (exponent * element) % m
    if k == 0:
        return 1 + 0j
    return cmath.exp(2j * cmath.pi * k / m)


def char_table(m) -> "list[list[complex]]":
    """Row k holds the values of the k-th character of Z/m."""
    m = int(m)
    return [[cyclic_char_value(k, a, m) for a in range(m)] for k in range(m)]

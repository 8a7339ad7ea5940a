"""Arbitrary-precision integer number theory.

Everything here works on plain Python ints, which are exact at any size, so
there is no overflow anywhere in the stack. All functions are pure and safe
to call from multiple threads.
"""

from __future__ import annotations

import math
import random

from .errors import GroupAuthError

__all__ = [
    "NotInvertible",
    "mod_pow",
    "mod_inv",
    "gcd",
    "is_probable_prime",
    "next_prime_above",
    "first_n_primes",
    "prime_index",
]


class NotInvertible(GroupAuthError):
    """Raised when an inverse mod m does not exist (gcd != 1)."""


# Witnesses proven to make Miller-Rabin deterministic for all n < 3.3e24,
# which covers everything below 2^64.
_DETERMINISTIC_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TWO_64 = 1 << 64


def mod_pow(base: int, exponent: int, modulus: int) -> int:
    """base**exponent mod modulus via square-and-multiply (O(log exponent))."""
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    if exponent < 0:
        raise ValueError("exponent must be >= 0")
    return pow(base, exponent, modulus)


def mod_inv(a: int, m: int) -> int:
    """The x in [0, m) with a*x = 1 (mod m).

    Raises NotInvertible when gcd(a, m) != 1.
    """
    if m < 2:
        raise ValueError("modulus must be >= 2")
    try:
        return pow(a, -1, m)
    except ValueError:
        raise NotInvertible(f"{a} has no inverse modulo {m}") from None


def gcd(a: int, b: int) -> int:
    """Greatest common divisor; gcd(0, 0) is 0 by convention."""
    return math.gcd(a, b)


def _miller_rabin_round(n: int, d: int, r: int, witness: int) -> bool:
    """One Miller-Rabin round; True means 'possibly prime'."""
    x = pow(witness, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(r - 1):
        x = (x * x) % n
        if x == n - 1:
            return True
    return False


def is_probable_prime(n: int, rounds: int = 40) -> bool:
    """Primality test: exact below 2^64, Miller-Rabin above.

    Below 2^64 the fixed witness set decides primality with certainty.
    Above, `rounds` random witnesses bound the false-positive rate by
    4**-rounds. Witness choice is seeded from n so results are reproducible.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if n < 2:
        return False
    for p in _DETERMINISTIC_WITNESSES:
        if n == p:
            return True
        if n % p == 0:
            return False

    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1

    if n < _TWO_64:
        witnesses = _DETERMINISTIC_WITNESSES
    else:
        rng = random.Random(n)
        witnesses = tuple(rng.randrange(2, n - 1) for _ in range(rounds))

    return all(_miller_rabin_round(n, d, r, w) for w in witnesses)


def next_prime_above(x: int) -> int:
    """Least prime strictly greater than x (x >= 1)."""
    if x < 1:
        raise ValueError("x must be >= 1")
    candidate = x + 1
    if candidate == 2:
        return 2
    if candidate % 2 == 0:
        candidate += 1
    while not is_probable_prime(candidate):
        candidate += 2
    return candidate


def first_n_primes(n: int) -> list[int]:
    """The first n primes, ascending."""
    if n < 1:
        raise ValueError("n must be >= 1")
    primes = [2]
    candidate = 3
    while len(primes) < n:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 2
    return primes


def prime_index(q: int) -> int:
    """0-based rank of the prime q (2 -> 0, 3 -> 1, 5 -> 2, ...).

    Message bit positions are defined by this rank, so a key share can map
    its prime values back to bit indices without carrying the full system
    prime list.
    """
    if q == 2:
        return 0
    if q < 2 or not is_probable_prime(q):
        raise ValueError(f"{q} is not prime")
    rank = 1
    p = 3
    while p < q:
        rank += 1
        p = next_prime_above(p)
    return rank

"""Knapsack public-key cryptosystem with prime-divisor message bits.

A message m < 2^n selects a subset of the first n primes through its bits
(bit 0 is the smallest prime). Encryption multiplies the public values of
the selected bits mod p; decryption raises the ciphertext to the secret
exponent s and reads the bits back off as small-prime divisors. Because
each bit surfaces as a separate prime factor, any holder of s who knows
only a *subset* of the primes can recover exactly the bits in that subset,
which is what the share-splitting layer builds on.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import numtheory
from .errors import GroupAuthError

__all__ = [
    "Plaintext",
    "Ciphertext",
    "NsPublicKey",
    "NsPrivateKey",
    "KeyShare",
    "MalformedCiphertext",
    "KEYGEN_STRATEGIES",
    "keygen",
    "public_key_of",
    "encrypt",
    "decrypt",
    "partial_decrypt",
    "bit_primes",
]

# Messages and ciphertexts are plain ints; these aliases keep signatures readable.
Plaintext = int
Ciphertext = int

KEYGEN_STRATEGIES = ("deterministic-least-prime", "seeded-random")


class MalformedCiphertext(GroupAuthError):
    """The residue c^s mod p does not factor completely over the system primes."""


@dataclass(frozen=True)
class NsPublicKey:
    n: int
    p: int
    v: tuple[int, ...]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 primes")
        if len(self.v) != self.n:
            raise ValueError("public value count must equal n")
        if not all(1 <= vi < self.p for vi in self.v):
            raise ValueError("public values must lie in [1, p)")


@dataclass(frozen=True)
class NsPrivateKey:
    n: int
    p: int
    s: int
    primes: tuple[int, ...]

    def __post_init__(self):
        if len(self.primes) != self.n:
            raise ValueError("prime count must equal n")
        if list(self.primes) != sorted(set(self.primes)):
            raise ValueError("primes must be distinct and increasing")
        if self.p <= math.prod(self.primes):
            raise ValueError("modulus must exceed the prime product")
        if math.gcd(self.s, self.p - 1) != 1:
            raise ValueError("secret exponent must be invertible mod p-1")


@dataclass(frozen=True)
class KeyShare:
    """One holder's share of the private key: a prime subset plus s.

    The prime subset decides which message bits this share can attest;
    the exponent is the full secret, so tokens are trusted not to leak it.
    """

    holder: str
    s: int
    p: int
    prime_subset: frozenset[int]

    def __post_init__(self):
        if not self.prime_subset:
            raise ValueError("prime subset must be non-empty")


def keygen(
    n: int,
    strategy: str = "deterministic-least-prime",
    seed: bytes | int | None = None,
    *,
    force_p: int | None = None,
    force_s: int | None = None,
) -> tuple[NsPublicKey, NsPrivateKey]:
    """Generate a key pair over the first n primes.

    deterministic-least-prime picks the least prime above the prime product
    for p; seeded-random draws a random prime in (product, 2*product). The
    secret exponent is drawn until it is invertible mod p-1, and the public
    values are v_i = primes_i^(s^-1 mod (p-1)) mod p, so v_i^s = primes_i
    (mod p). `force_p` / `force_s` pin those values exactly, which is how
    the built-in demo systems are reproduced bit for bit.
    """
    if not 2 <= n <= 64:
        raise ValueError("n must be in [2, 64]")
    if strategy not in KEYGEN_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if isinstance(seed, bytes):
        seed = int.from_bytes(seed, "big") if seed else 0
    rng = random.Random(0 if seed is None else seed)

    primes = tuple(numtheory.first_n_primes(n))
    product = math.prod(primes)

    if force_p is not None:
        p = force_p
        if p <= product:
            raise ValueError("forced p must exceed the prime product")
        if not numtheory.is_probable_prime(p):
            raise ValueError("forced p is not prime")
    elif strategy == "deterministic-least-prime":
        p = numtheory.next_prime_above(product)
    else:
        while True:
            p = rng.randrange(product + 1, 2 * product)
            if numtheory.is_probable_prime(p):
                break

    if force_s is not None:
        s = force_s
        if math.gcd(s, p - 1) != 1:
            raise ValueError("forced s is not invertible mod p-1")
    else:
        while True:
            s = rng.randrange(2, p - 1)
            if math.gcd(s, p - 1) == 1:
                break

    s_inv = numtheory.mod_inv(s, p - 1)
    v = tuple(pow(q, s_inv, p) for q in primes)
    return NsPublicKey(n=n, p=p, v=v), NsPrivateKey(n=n, p=p, s=s, primes=primes)


def public_key_of(priv: NsPrivateKey) -> NsPublicKey:
    """Recompute the public key bound to a private key."""
    s_inv = numtheory.mod_inv(priv.s, priv.p - 1)
    v = tuple(pow(q, s_inv, priv.p) for q in priv.primes)
    return NsPublicKey(n=priv.n, p=priv.p, v=v)


def encrypt(pub: NsPublicKey, m: Plaintext) -> Ciphertext:
    """Multiply the public values selected by m's bits, mod p.

    m = 0 is rejected: its ciphertext is the constant 1 and carries no
    challenge entropy.
    """
    if not 0 < m < (1 << pub.n):
        raise ValueError(f"plaintext must be in [1, 2^{pub.n})")
    c = 1
    for i in range(pub.n):
        if (m >> i) & 1:
            c = (c * pub.v[i]) % pub.p
    return c


def decrypt(priv: NsPrivateKey, c: Ciphertext) -> Plaintext:
    """Recover m as the set of system primes dividing c^s mod p.

    The residue must factor *completely* over the system primes (each used
    at most once); anything left over means the ciphertext was not produced
    by `encrypt` and raises MalformedCiphertext rather than returning noise.
    """
    if not 1 <= c < priv.p:
        raise ValueError("ciphertext out of range")
    u = pow(c, priv.s, priv.p)
    m = 0
    for i, q in enumerate(priv.primes):
        if u % q == 0:
            m |= 1 << i
            u //= q
    if u != 1:
        raise MalformedCiphertext(f"residual factor {u} after removing message primes")
    return m


def partial_decrypt(share: KeyShare, c: Ciphertext) -> int:
    """The message bits this share can see in ciphertext c.

    Bit i is set iff the i-th system prime is in the share's subset *and*
    divides c^s mod p. Bit positions index the full system prime list, so
    contributions from different shares line up and can be merged.
    Malformed ciphertexts are not detected here; that is the verifier's
    problem.
    """
    if not 1 <= c < share.p:
        raise ValueError("ciphertext out of range")
    u = pow(c, share.s, share.p)
    m = 0
    for q in share.prime_subset:
        if u % q == 0:
            m |= 1 << numtheory.prime_index(q)
    return m


def bit_primes(m: Plaintext, primes: tuple[int, ...] | list[int]) -> frozenset[int]:
    """The primes selected by m's set bits."""
    if m < 0 or m >= (1 << len(primes)):
        raise ValueError("plaintext out of range for this prime list")
    return frozenset(primes[i] for i in range(len(primes)) if (m >> i) & 1)

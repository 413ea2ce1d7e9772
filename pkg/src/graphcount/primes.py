"""Prime supply and prime-based fingerprinting support."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .graphs import CapExceeded

DEFAULT_SIEVE_CAP = 50_000_000


def prime_table(limit: int, cap: int = DEFAULT_SIEVE_CAP) -> list[int]:
    """All primes <= limit, ascending (sieve of Eratosthenes)."""
    if limit > cap:
        raise CapExceeded(f"sieve limit {limit} exceeds cap {cap}")
    if limit < 2:
        return []
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    p = 2
    while p * p <= limit:
        if sieve[p]:
            sieve[p * p::p] = b"\x00" * ((limit - p * p) // p + 1)
        p += 1
    return [i for i in range(limit + 1) if sieve[i]]


def prime_count(limit: int) -> int:
    return len(prime_table(limit))


def check_prime_supply(n: int) -> bool:
    """True iff there are at least n primes p <= ceil(2 n ln n)."""
    if n <= 0:
        return False
    bound = math.ceil(2 * n * math.log(n)) if n > 1 else 0
    return prime_count(bound) >= n


def minimal_supply_threshold(n_max: int) -> int:
    """Smallest n0 such that check_prime_supply holds for every n in
    [n0, n_max]."""
    ok = [check_prime_supply(n) for n in range(1, n_max + 1)]
    threshold = n_max + 1
    for n in range(n_max, 0, -1):
        if ok[n - 1]:
            threshold = n
        else:
            break
    return threshold


def hash_collision_rate(members: Sequence[int], primes: Sequence[int]) -> Fraction:
    """Fraction of the given primes under which two distinct members become
    congruent."""
    values = sorted(set(members))
    if not primes:
        raise ValueError("no primes supplied")
    bad = 0
    for p in primes:
        residues = set()
        for m in values:
            r = m % p
            if r in residues:
                bad += 1
                break
            residues.add(r)
    return Fraction(bad, len(primes))

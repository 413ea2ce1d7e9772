import math
import random

from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from graphcount.primes import (check_prime_supply, hash_collision_rate, minimal_supply_threshold,
                               prime_count, prime_table)


def test_prime_table_20():
    assert prime_table(20) == [2, 3, 5, 7, 11, 13, 17, 19]


def test_prime_table_small():
    assert prime_table(1) == []
    assert prime_table(2) == [2]


def test_supply_examples():
    assert prime_count(47) == 15
    assert check_prime_supply(10)
    assert check_prime_supply(2)  # two primes up to ceil(2.77) = 3
    assert not check_prime_supply(1)


def test_supply_threshold():
    assert minimal_supply_threshold(200) == 2


def test_collision_rate_singleton():
    assert hash_collision_rate([3], prime_table(100)) == 0


def test_collision_rate_spec_example():
    primes = prime_table(10 ** 4)[:72]  # k*m*|M|^2 = 2*4*9 = 72
    rate = hash_collision_rate([3, 5, 9], primes)
    assert rate < Fraction(1, 2)


def test_collision_rate_two_extremes():
    m = 6
    k = 4
    members = [0, 2 ** m - 1]
    need = k * m * len(members) ** 2
    primes = prime_table(10 ** 4)[:need]
    assert len(primes) == need
    assert hash_collision_rate(members, primes) < Fraction(1, k)


@given(st.integers(min_value=2, max_value=5), st.integers(min_value=2, max_value=4),
       st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=10 ** 6))
@settings(max_examples=40, deadline=None)
def test_hash_lemma_bound(k, m, size, seed):
    rng = random.Random(seed)
    members = rng.sample(range(2 ** m), min(size, 2 ** m))
    need = k * m * len(members) ** 2
    primes = prime_table(10 ** 5)[:need]
    assert len(primes) == need
    assert hash_collision_rate(members, primes) < Fraction(1, k)

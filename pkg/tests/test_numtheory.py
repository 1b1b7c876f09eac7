import math
from itertools import accumulate

import numpy as np
import pytest
from hypothesis import given, strategies as st

from densimean import numtheory as nt
from densimean.errors import BudgetExceeded, DomainError, ResourceError


def scan_divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def order_by_iteration(a, m):
    x, k = a % m, 1
    while x != 1 % m:
        x = x * a % m
        k += 1
    return k


# -- factorize --------------------------------------------------------------


@pytest.mark.parametrize(
    "n, expected",
    [(1, []), (15, [(3, 1), (5, 1)]), (1023, [(3, 1), (11, 1), (31, 1)]), (2**10, [(2, 10)])],
)
def test_factorize_examples(n, expected):
    assert list(nt.factorize(n)) == expected


def test_factorize_rejects_zero():
    with pytest.raises(DomainError):
        nt.factorize(0)


@given(st.integers(min_value=1, max_value=10**30))
def test_factorize_reconstructs(n):
    fact = nt.factorize(n)
    assert fact.value == n
    assert fact.primes == sorted(set(fact.primes))
    assert all(nt.is_probable_prime(p) and e >= 1 for p, e in fact)


def test_factorize_semiprime_past_trial_division():
    p, q = 1_000_003, 1_000_033
    assert list(nt.factorize(p * q * 12)) == [(2, 2), (3, 1), (p, 1), (q, 1)]


def test_budget_error_names_the_cofactor(restore_limits):
    p, q = 2**61 - 1, 2**89 - 1  # Mersenne primes
    n = p * q
    nt.configure(factor_budget=1000)
    with pytest.raises(BudgetExceeded) as info:
        nt.factorize(n)
    assert info.value.cofactor == n
    assert str(n) in str(info.value)


def test_factorize_is_deterministic_across_memo_resets():
    n = (2**67 - 1) * 3  # 2^67-1 = 193707721 * 761838257287
    first = nt.factorize(n)
    nt.clear_memo()
    assert nt.factorize(n) == first
    assert first.primes == [3, 193707721, 761838257287]


@pytest.mark.parametrize("b, k", [(2, 60), (3, 40), (4, 30), (5, 24), (7, 12), (2, 1), (9, 5)])
def test_power_minus_one_matches_direct_factorization(b, k):
    fact = nt.factorize_power_minus_one(b, k)
    assert fact.value == b**k - 1
    assert all(nt.is_probable_prime(p) for p in fact.primes)


def test_cyclotomic_values():
    # Phi_1(x) = x - 1, Phi_2 = x + 1, Phi_6 = x^2 - x + 1, Phi_12 = x^4 - x^2 + 1
    x = 5
    assert nt.cyclotomic_value(1, x) == 4
    assert nt.cyclotomic_value(2, x) == 6
    assert nt.cyclotomic_value(6, x) == 21
    assert nt.cyclotomic_value(12, x) == 601


def test_is_probable_prime_against_sieve():
    sieve = set(nt.primes_up_to(20000))
    assert [n for n in range(20001) if nt.is_probable_prime(n)] == sorted(sieve)
    # strong pseudoprimes to several small bases
    for n in (3215031751, 3825123056546413051, 318665857834031151167461):
        assert not nt.is_probable_prime(n)
    assert nt.is_probable_prime(2**127 - 1)


def test_perfect_power():
    assert nt.perfect_power(64) == (2, 6)
    assert nt.perfect_power(1681) == (41, 2)
    assert nt.perfect_power(12) == (12, 1)
    assert nt.perfect_power(3**40) == (3, 40)


# -- multiplicative functions -------------------------------------------------


def test_phi_examples():
    assert nt.euler_phi(1) == 1
    assert nt.euler_phi(12) == 4
    # 2^20 - 1 = 3 * 5^2 * 11 * 31 * 41
    assert nt.euler_phi(1048575) == 2 * 20 * 10 * 30 * 40


def test_phi_of_large_modulus_against_residue_sample():
    n = 1048575
    rng = np.random.default_rng(7)
    sample = rng.integers(1, n + 1, size=20000)
    frac = np.mean(np.gcd(sample, n) == 1)
    assert abs(frac - nt.euler_phi(n) / n) < 0.02
    assert nt.euler_phi(n) == int(np.sum(np.gcd(np.arange(1, n + 1), n) == 1))


def test_phi_exhaustive_up_to_10_4():
    n_max = 10**4
    ks = np.arange(1, n_max + 1)
    for n in range(1, n_max + 1):
        expected = int(np.count_nonzero(np.gcd(ks[:n], n) == 1))
        assert nt.euler_phi(n) == expected, n


def test_divisors_exhaustive_up_to_10_4():
    n_max = 10**4
    sigma = nt.sigma0_table(n_max)
    ds = np.arange(1, n_max + 1)
    for n in range(1, n_max + 1):
        expected = ds[: n][n % ds[:n] == 0].tolist()
        assert nt.divisors(n) == expected, n
        assert nt.sigma0(n) == len(expected) == sigma[n]


def test_divisor_examples():
    assert nt.divisors(1) == [1]
    assert nt.divisors(12) == [1, 2, 3, 4, 6, 12]
    ds = nt.divisors(105)
    assert len(ds) == 8
    assert all(a * b == 105 for a, b in zip(ds, reversed(ds)))


def test_divisor_cap(restore_limits):
    nt.configure(divisor_cap=100)
    with pytest.raises(ResourceError):
        nt.divisors(720720)


def test_sigma0_examples():
    assert nt.sigma0(1) == 1
    assert nt.sigma0(12) == 6
    assert nt.sigma0(720720) == 240
    lhs, rhs = nt.sigma0_bound_holds(720720)
    assert lhs < rhs
    assert 240 < 720720 ** (1.1 / math.log(math.log(720720)))


def test_sigma0_table_matches_scan():
    table = nt.sigma0_table(300)
    assert table[1:].tolist() == [len(scan_divisors(n)) for n in range(1, 301)]


# -- orders and lcm -----------------------------------------------------------


def test_order_examples():
    assert nt.multiplicative_order(2, 1) == 1
    assert nt.multiplicative_order(2, 7) == 3
    assert nt.multiplicative_order(4, 5) == 2


@pytest.mark.parametrize("a, m", [(2, 4), (6, 9), (3, 0)])
def test_order_domain_errors(a, m):
    with pytest.raises(DomainError):
        nt.multiplicative_order(a, m)


@given(st.integers(min_value=1, max_value=10**4), st.integers(min_value=1, max_value=10**6))
def test_order_against_iteration(m, a):
    if math.gcd(a, m) != 1:
        with pytest.raises(DomainError):
            nt.multiplicative_order(a, m)
        return
    k = nt.multiplicative_order(a, m)
    assert pow(a, k, m) == 1 % m
    assert k == order_by_iteration(a, m)


def test_order_modulo_large_prime():
    # the order must divide p - 1 and be minimal among its divisors
    p = 1000003
    k = nt.multiplicative_order(2, p)
    assert (p - 1) % k == 0 and pow(2, k, p) == 1
    assert all(pow(2, k // r, p) != 1 for r in nt.factorize(k).primes)


def test_lcm_examples():
    assert nt.lcm_fold([]) == 1
    assert nt.lcm_fold([1, 2, 3, 4, 5, 6]) == 60
    assert nt.lcm_fold([3, 15, 63, 255]) == 5355


@given(st.lists(st.integers(min_value=1, max_value=10**6), max_size=8))
def test_lcm_against_pairwise_gcd(values):
    expected = list(accumulate(values, lambda a, b: a * b // math.gcd(a, b), initial=1))[-1]
    assert nt.lcm_fold(values) == expected


def test_configure_rejects_unknown_and_nonpositive(restore_limits):
    with pytest.raises(TypeError):
        nt.configure(budget=5)
    with pytest.raises(DomainError):
        nt.configure(factor_budget=0)
    nt.configure(seed=0)

"""Exact integer arithmetic: factoring, totients, divisors and orders.

Factoring runs trial division up to ``limits.trial_limit`` and then Brent's
variant of Pollard rho, seeded deterministically per input so results and
timings are reproducible.  Every run of rho spends from an iteration budget;
running out raises :class:`BudgetExceeded` instead of hanging.

Numbers of the form ``b**k - 1`` should go through
:func:`factorize_power_minus_one`, which splits them into cyclotomic values
first.  The pieces are much smaller than the whole and are shared between
different ``k`` (and between ``q`` and its powers).
"""

from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Protocol

import numpy as np

from .errors import BudgetExceeded, DomainError, ResourceError

__all__ = [
    "Factorization",
    "Limits",
    "limits",
    "configure",
    "is_probable_prime",
    "primes_up_to",
    "factorize",
    "factorize_power_minus_one",
    "cyclotomic_value",
    "perfect_power",
    "euler_phi",
    "divisors",
    "sigma0",
    "sigma0_table",
    "sigma0_bound_holds",
    "multiplicative_order",
    "lcm_fold",
]


@dataclass
class Limits:
    factor_budget: int = 10**8
    trial_limit: int = 10**6
    divisor_cap: int = 10**6
    seed: int = 0


limits = Limits()


def configure(**kwargs) -> Limits:
    """Update the process-wide limits; unknown names raise ``TypeError``."""
    for key, value in kwargs.items():
        if not hasattr(limits, key):
            raise TypeError(f"unknown limit {key!r}")
        if int(value) < 0 or (key != "seed" and int(value) == 0):
            raise DomainError(f"{key} must be positive")
        setattr(limits, key, int(value))
    return limits


@dataclass(frozen=True)
class Factorization:
    """Prime factorization as ascending ``(prime, exponent)`` pairs."""

    factors: tuple[tuple[int, int], ...] = ()

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    @property
    def value(self) -> int:
        out = 1
        for p, e in self.factors:
            out *= p**e
        return out

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)

    @classmethod
    def from_dict(cls, counts: dict[int, int]) -> "Factorization":
        return cls(tuple(sorted((p, e) for p, e in counts.items() if e > 0)))


# -- primes -----------------------------------------------------------------


@lru_cache(maxsize=8)
def _sieve(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


def primes_up_to(limit: int) -> list[int]:
    if limit < 2:
        return []
    return _sieve(limit).tolist()


@lru_cache(maxsize=2)
def _trial_primes(limit: int) -> tuple[int, ...]:
    return tuple(primes_up_to(limit))


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin.  Deterministic below 3.3e24; 13 fixed plus 12 seeded
    random bases above that."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases: Iterable[int] = _MR_BASES
    if n >= 3_317_044_064_679_887_385_961_981:
        rng = random.Random(n)
        bases = _MR_BASES + tuple(rng.randrange(2, n - 1) for _ in range(12))
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# -- factoring --------------------------------------------------------------


class FactorStore(Protocol):
    def get(self, n: int) -> list[tuple[int, int]] | None: ...

    def put(self, n: int, factors: list[tuple[int, int]]) -> None: ...


_lock = threading.Lock()
_memo: dict[int, Factorization] = {}
_large_primes: set[int] = set()
_failed: dict[int, int] = {}
_store: FactorStore | None = None

# smaller inputs are never looked up in the persistent store
_PERSIST_MIN = 10**12


def set_factor_store(store: FactorStore | None) -> None:
    global _store
    _store = store


def clear_memo() -> None:
    with _lock:
        _memo.clear()
        _large_primes.clear()
        _failed.clear()


class _Spend:
    __slots__ = ("used", "budget")

    def __init__(self, budget: int):
        self.used = 0
        self.budget = budget

    def charge(self, k: int, n: int) -> None:
        self.used += k
        if self.used > self.budget:
            raise BudgetExceeded(n, self.budget)


def _brent(n: int, rng: random.Random, spend: _Spend) -> int:
    """Return a nontrivial factor of the odd composite ``n``."""
    batch = 128
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                steps = min(batch, r - k)
                for _ in range(steps):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += batch
            spend.charge(2 * r, n)
            r *= 2
        if g == n:
            while True:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
                if g > 1:
                    break
        if g != n:
            return g


def _split_composite(n: int, spend: _Spend, out: dict[int, int]) -> None:
    rng = random.Random(f"{limits.seed}:{n}")
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        for p in list(out):
            while m % p == 0:
                out[p] += 1
                m //= p
        if m == 1:
            continue
        if is_probable_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            stack += [r, r]
            continue
        d = _brent(m, rng, spend)
        stack += [d, m // d]


def factorize(n: int) -> Factorization:
    """Factor ``n >= 1``; ``factorize(1)`` is the empty factorization."""
    n = int(n)
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    hit = _memo.get(n)
    if hit is not None:
        return hit
    if _store is not None and n >= _PERSIST_MIN:
        stored = _store.get(n)
        if stored is not None:
            result = Factorization(tuple(sorted(stored)))
            _remember(n, result, persist=False)
            return result
    if n in _failed and _failed[n] >= limits.factor_budget:
        raise BudgetExceeded(n, limits.factor_budget)

    out: dict[int, int] = {}
    rem = n
    for p in sorted(_large_primes):
        if p > rem:
            break
        while rem % p == 0:
            out[p] = out.get(p, 0) + 1
            rem //= p
    used_rho = False
    if rem > 1 and not is_probable_prime(rem):
        for p in _trial_primes(limits.trial_limit):
            if p * p > rem:
                break
            if rem % p == 0:
                while rem % p == 0:
                    out[p] = out.get(p, 0) + 1
                    rem //= p
                if is_probable_prime(rem):
                    break
        if rem > 1 and not is_probable_prime(rem):
            t = limits.trial_limit
            if rem > t * t:
                used_rho = True
                try:
                    _split_composite(rem, _Spend(limits.factor_budget), out)
                except BudgetExceeded as exc:
                    with _lock:
                        _failed[n] = max(_failed.get(n, 0), exc.budget)
                    raise
                rem = 1
    if rem > 1:
        out[rem] = out.get(rem, 0) + 1
    result = Factorization.from_dict(out)
    if result.value != n:  # pragma: no cover - guards the arithmetic above
        raise AssertionError(f"factorization of {n} does not reconstruct")
    _remember(n, result, persist=used_rho)
    return result


def _remember(n: int, result: Factorization, persist: bool) -> None:
    big = [p for p in result.primes if p > limits.trial_limit]
    with _lock:
        _memo[n] = result
        _large_primes.update(big)
    if persist and _store is not None:
        _store.put(n, list(result.factors))


def perfect_power(n: int) -> tuple[int, int]:
    """Return ``(b, k)`` with ``n == b**k`` and ``k`` maximal."""
    if n < 2:
        return n, 1
    best = (n, 1)
    for k in range(2, n.bit_length() + 1):
        b = _iroot(n, k)
        if b < 2:
            break
        if b**k == n:
            best = (b, k)
    if best[1] > 1:
        b, k = perfect_power(best[0])
        return b, k * best[1]
    return best


def _iroot(n: int, k: int) -> int:
    """Floor of the k-th root of n."""
    if n < 2:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _mobius_of(fact: Factorization) -> int:
    if any(e > 1 for _, e in fact):
        return 0
    return -1 if len(fact) % 2 else 1


@lru_cache(maxsize=4096)
def cyclotomic_value(d: int, x: int) -> int:
    """The integer value of the d-th cyclotomic polynomial at ``x >= 2``."""
    if d < 1:
        raise DomainError("cyclotomic index must be positive")
    num, den = 1, 1
    for e in divisors(d):
        mu = _mobius_of(factorize(d // e))
        if mu == 1:
            num *= x**e - 1
        elif mu == -1:
            den *= x**e - 1
    value, rest = divmod(num, den)
    assert rest == 0
    return value


def factorize_power_minus_one(b: int, k: int) -> Factorization:
    """Factor ``b**k - 1`` through its cyclotomic pieces."""
    if b < 2 or k < 1:
        raise DomainError("need b >= 2 and k >= 1")
    n = b**k - 1
    hit = _memo.get(n)
    if hit is not None:
        return hit
    if _store is not None:
        stored = _store.get(n)
        if stored is not None:
            result = Factorization(tuple(sorted(stored)))
            _remember(n, result, persist=False)
            return result
    base, j = perfect_power(b)
    counts: dict[int, int] = {}
    for d in divisors(k * j):
        for p, e in factorize(cyclotomic_value(d, base)):
            counts[p] = counts.get(p, 0) + e
    result = Factorization.from_dict(counts)
    assert result.value == n
    _remember(n, result, persist=True)
    return result


# -- multiplicative functions ----------------------------------------------


def _as_factorization(n: int | Factorization) -> Factorization:
    return n if isinstance(n, Factorization) else factorize(n)


def euler_phi(n: int | Factorization) -> int:
    fact = _as_factorization(n)
    out = 1
    for p, e in fact:
        out *= (p - 1) * p ** (e - 1)
    return out


def sigma0(n: int | Factorization) -> int:
    return math.prod(e + 1 for _, e in _as_factorization(n))


def divisors(n: int | Factorization) -> list[int]:
    fact = _as_factorization(n)
    count = sigma0(fact)
    if count > limits.divisor_cap:
        raise ResourceError(
            f"{fact.value} has {count} divisors, above the cap {limits.divisor_cap}"
        )
    out = [1]
    for p, e in fact:
        out = [d * p**i for d in out for i in range(e + 1)]
    out.sort()
    return out


def sigma0_table(limit: int) -> np.ndarray:
    """Divisor counts for 0..limit by sieving (index 0 unused)."""
    counts = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        counts[d::d] += 1
    return counts


def sigma0_bound_holds(m: int, count: int | None = None) -> tuple[float, float]:
    """Return ``(log sigma0(m), 1.1 log m / log log m)``; the first is smaller
    whenever the classical divisor bound holds."""
    if m < 3:
        raise DomainError("divisor bound needs m >= 3")
    c = sigma0(m) if count is None else count
    return math.log(c), 1.1 * math.log(m) / math.log(math.log(m))


def _carmichael(fact: Factorization) -> dict[int, int]:
    """Factorization of Carmichael's lambda of the factored number."""
    acc: dict[int, int] = {}

    def merge(part: dict[int, int]) -> None:
        for p, e in part.items():
            if e > acc.get(p, 0):
                acc[p] = e

    for p, e in fact:
        if p == 2:
            if e <= 2:
                merge({2: e - 1})
            else:
                merge({2: e - 2})
            continue
        part = factorize(p - 1).as_dict()
        if e > 1:
            part[p] = part.get(p, 0) + e - 1
        merge(part)
    return {p: e for p, e in acc.items() if e > 0}


def multiplicative_order(a: int, m: int, factorization: Factorization | None = None) -> int:
    """Least ``k >= 1`` with ``a**k == 1 (mod m)``; order modulo 1 is 1."""
    if m < 1:
        raise DomainError("modulus must be positive")
    if m == 1:
        return 1
    if math.gcd(a, m) != 1:
        raise DomainError(f"gcd({a}, {m}) != 1, order undefined")
    fact = factorization if factorization is not None else factorize(m)
    lam = _carmichael(fact)
    order = math.prod(p**e for p, e in lam.items())
    a %= m
    for p in lam:
        while order % p == 0 and pow(a, order // p, m) == 1:
            order //= p
    return order


def lcm_fold(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        if v < 1:
            raise DomainError("lcm_fold needs positive integers")
        out = math.lcm(out, v)
    return out

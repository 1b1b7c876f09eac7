"""Densities of primitive and normal elements of F_{q^n} over F_q.

Both densities are products over the divisors of n:

* primitive: phi(q^n - 1)/(q^n - 1) = prod_{d | n} g_q(d), where g_q(d)
  collects (1 - 1/l) over the primes l of multiplicative order exactly d
  modulo q.  The true density phi(q^n - 1)/q^n is within q^-n of it.
* normal: N_q(n)/q^n = prod_{d | n} G_q(d), where for d prime to p
  G_q(d) = (1 - q^-e)^(phi(d)/e) with e the order of q modulo d, and
  G_q(d) = 1 otherwise.  The count N_q(n) itself is the polynomial totient
  of x^n - 1.

Everything else here is a finite evaluation of the accompanying bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import numtheory as nt
from .engine import DensityLikeSpec
from .errors import ContractError, DomainError

__all__ = [
    "PrimePower",
    "OrderProfile",
    "prime_power",
    "primes_of_order",
    "g_q",
    "g_q_lower",
    "rho_q",
    "primitive_count",
    "G_q",
    "mu_q",
    "phi_poly_xn_minus_1",
    "s_q",
    "normal_mean_bounds",
    "normal_variance_bound",
    "proportion_bound",
    "rho_mean_upper_witness",
    "rho_mean_trivial_upper",
    "primitive_spec",
    "normal_spec",
    "primitive_log_mean_bracket",
    "normal_deficiency_chain",
    "primitive_deficiency_chain",
]


@dataclass(frozen=True)
class PrimePower:
    p: int
    m: int

    @property
    def q(self) -> int:
        return self.p**self.m

    def __int__(self) -> int:
        return self.q

    def __str__(self) -> str:
        return str(self.q)


@lru_cache(maxsize=None)
def _decompose(q: int) -> PrimePower:
    if q < 2:
        raise DomainError(f"{q} is not a prime power")
    p, m = nt.perfect_power(q)
    if not nt.is_probable_prime(p):
        raise DomainError(f"{q} is not a prime power")
    return PrimePower(p, m)


def prime_power(q: int | PrimePower) -> PrimePower:
    if isinstance(q, PrimePower):
        return q
    return _decompose(int(q))


def _require_q_at_least_4(pp: PrimePower) -> None:
    if pp.q < 4:
        raise DomainError(f"the bound needs q >= 4, got q = {pp.q}")


# -- primitive elements -----------------------------------------------------


def _has_order(a: int, ell: int, d: int) -> bool:
    """True when a has multiplicative order exactly d modulo the prime ell."""
    if pow(a, d, ell) != 1:
        return False
    return all(pow(a, d // r, ell) != 1 for r in nt.factorize(d).primes)


def primes_of_order(q: int | PrimePower, d: int) -> list[int]:
    """Primes l with e_q(l) = d, read off the factorization of q^d - 1."""
    Q = prime_power(q).q
    if d < 1:
        raise DomainError("d must be positive")
    return [ell for ell in nt.factorize_power_minus_one(Q, d).primes if _has_order(Q, ell, d)]


def g_q(q: int | PrimePower, d: int) -> float:
    return math.prod(1.0 - 1.0 / ell for ell in primes_of_order(q, d))


def g_q_lower(q: int | PrimePower, d: int) -> float:
    """A lower bound for g_q(d) that needs no factoring.

    Primes of order d are 1 mod d, hence at least d + 1, and all divide
    Phi_d(q); so there are at most log Phi_d(q) / log(d + 1) of them.
    """
    Q = prime_power(q).q
    if d < 1:
        raise DomainError("d must be positive")
    if d == 1:
        return g_q(Q, 1)
    count = math.floor(math.log(nt.cyclotomic_value(d, Q)) / math.log(d + 1))
    return math.exp(count * math.log1p(-1.0 / (d + 1)))


def primitive_count(q: int | PrimePower, n: int) -> int:
    """phi(q^n - 1), the number of generators of F_{q^n}^*."""
    Q = prime_power(q).q
    return nt.euler_phi(nt.factorize_power_minus_one(Q, n))


def rho_q(q: int | PrimePower, n: int) -> tuple[float, float]:
    """Return (phi(q^n-1)/(q^n-1), phi(q^n-1)/q^n).

    The first value is also rebuilt as prod_{d | n} g_q(d); a disagreement
    beyond 1e-10 relative raises ``ContractError``.
    """
    if n < 1:
        raise DomainError("n must be positive")
    Q = prime_power(q).q
    phi = primitive_count(Q, n)
    f = phi / (Q**n - 1)
    rho = phi / Q**n
    via_g = math.prod(g_q(Q, d) for d in nt.divisors(n))
    if abs(via_g - f) > 1e-10 * f:
        raise ContractError(f"f_{Q}({n}): totient gives {f!r}, divisor product gives {via_g!r}")
    return f, rho


# -- normal elements --------------------------------------------------------


def _order_of_q(Q: int, d: int) -> int:
    return 1 if d == 1 else nt.multiplicative_order(Q, d)


def G_q(q: int | PrimePower, d: int) -> float:
    pp = prime_power(q)
    if d < 1:
        raise DomainError("d must be positive")
    if d % pp.p == 0:
        return 1.0
    e = _order_of_q(pp.q, d)
    k = nt.euler_phi(d) // e
    return math.exp(k * math.log1p(-math.exp(-e * math.log(pp.q))))


def _strip(n: int, p: int) -> tuple[int, int]:
    u = 0
    while n % p == 0:
        n //= p
        u += 1
    return n, u


def mu_q(q: int | PrimePower, n: int) -> float:
    """Density of normal elements of F_{q^n} over F_q."""
    pp = prime_power(q)
    if n < 1:
        raise DomainError("n must be positive")
    core, _ = _strip(n, pp.p)
    return math.exp(math.fsum(math.log(G_q(pp, d)) for d in nt.divisors(core)))


def phi_poly_xn_minus_1(q: int | PrimePower, n: int) -> int:
    """Polynomial totient of x^n - 1 over F_q, i.e. the number of normal elements.

    With n = p^u M and gcd(M, p) = 1, x^n - 1 is the product over d | M of
    phi(d)/e irreducibles of degree e = e_q(d), each to the power p^u.
    """
    pp = prime_power(q)
    if n < 1:
        raise DomainError("n must be positive")
    Q = pp.q
    M, u = _strip(n, pp.p)
    mult = pp.p**u
    out = 1
    for d in nt.divisors(M):
        e = _order_of_q(Q, d)
        out *= (Q ** ((mult - 1) * e) * (Q**e - 1)) ** (nt.euler_phi(d) // e)
    return out


@dataclass
class OrderProfile:
    q: PrimePower
    j: int
    divisors_with_order_j: list[int]
    s_q_j: float
    delta_q_j: float


def s_q(q: int | PrimePower, j: int) -> OrderProfile:
    """Divisors d of q^j - 1 with e_q(d) = j, and sum of phi(d)/d over them."""
    pp = prime_power(q)
    if j < 1:
        raise DomainError("j must be positive")
    Q = pp.q
    fact = nt.factorize_power_minus_one(Q, j)
    lower = [Q ** (j // r) - 1 for r in nt.factorize(j).primes]
    hits = [d for d in nt.divisors(fact) if all(x % d for x in lower)]
    s = math.fsum(nt.euler_phi(d) / d for d in hits)
    return OrderProfile(pp, j, hits, s, max(1.0, s / j))


def normal_mean_bounds(q: int | PrimePower) -> tuple[float, float]:
    """(1 - 1/q - 1/sqrt(q), 1 - 1/q), the window for the mean normal density."""
    pp = prime_power(q)
    _require_q_at_least_4(pp)
    Q = pp.q
    return 1 - 1 / Q - 1 / math.sqrt(Q), 1 - 1 / Q


def normal_variance_bound(q: int | PrimePower) -> float:
    pp = prime_power(q)
    _require_q_at_least_4(pp)
    Q = pp.q
    r = math.sqrt(Q)
    return 2 / r - 1 / Q - 2 / (Q * r)


def proportion_bound(q: int | PrimePower, T: float) -> tuple[float, float]:
    """(C_{q,T}, 1/(1 + T sqrt(q))): beyond some x, at most the second
    fraction of n <= x have normal density below the first value."""
    pp = prime_power(q)
    _require_q_at_least_4(pp)
    if not T > 0:
        raise DomainError("T must be positive")
    Q = pp.q
    return 1 - 1 / Q - 1 / math.sqrt(Q) - T, 1 / (1 + T * math.sqrt(Q))


def rho_mean_upper_witness(q: int | PrimePower, k: int) -> tuple[int, int, float]:
    """(alpha_k, e_k, bound) from the first k primes other than p.

    alpha_k is their product, e_k the least e with alpha_k | q^e - 1, and
    bound = prod (1 - 1/l) caps the mean primitive density over F_{q^e_k}.
    """
    pp = prime_power(q)
    if k < 1:
        raise DomainError("k must be positive")
    chosen: list[int] = []
    limit = 16
    while len(chosen) < k:
        chosen = [ell for ell in nt.primes_up_to(limit) if ell != pp.p][:k]
        limit *= 2
    alpha = math.prod(chosen)
    e = nt.lcm_fold(nt.multiplicative_order(pp.q, ell) for ell in chosen)
    assert (pp.q**e - 1) % alpha == 0
    bound = math.prod(1.0 - 1.0 / ell for ell in chosen)
    return alpha, e, bound


def rho_mean_trivial_upper(q: int | PrimePower) -> float:
    Q = prime_power(q).q
    return nt.euler_phi(Q - 1) / (Q - 1)


# -- as density-like specs --------------------------------------------------


def primitive_spec(q: int | PrimePower) -> DensityLikeSpec:
    """g_q as a 1-density-like spec.  The floor c = g_q(1)/4 is a working
    assumption that DensityLikeSpec re-checks on every evaluated d."""
    pp = prime_power(q)
    floor = g_q(pp, 1) / 4
    return DensityLikeSpec(
        lambda d: g_q(pp, d), N=1, lower_bound_c=floor, label=f"primitive-q{pp.q}"
    )


def normal_spec(q: int | PrimePower) -> DensityLikeSpec:
    """G_q as a p-density-like spec.  G_q(d) > 1/4 holds for every q and d."""
    pp = prime_power(q)
    return DensityLikeSpec(lambda d: G_q(pp, d), N=pp.p, lower_bound_c=0.25, label=f"normal-q{pp.q}")


@lru_cache(maxsize=4)
def _smallest_factor_table(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in nt.primes_up_to(math.isqrt(limit)):
        block = spf[p * p :: p]
        block[block == 0] = p
    rest = spf == 0
    spf[rest] = np.arange(limit + 1)[rest]
    return spf


def _order_mod_prime(Q: int, ell: int, spf: np.ndarray) -> int:
    order = ell - 1
    m = order
    while m > 1:
        r = int(spf[m])
        while m % r == 0:
            m //= r
        while order % r == 0 and pow(Q, order // r, ell) == 1:
            order //= r
    return order


def primitive_log_mean_bracket(
    q: int | PrimePower, D: int, prime_limit: int = 10**6
) -> tuple[float, float]:
    """Rigorous bracket for sum_{d <= D} log g_q(d) / d without factoring q^d - 1.

    Every prime l <= prime_limit is sorted by its order modulo q, which gives
    the upper end.  Primes above the limit with order d divide Phi_d(q) <=
    (q+1)^phi(d), so there are at most phi(d) log(q+1) / log(prime_limit)
    of them, each costing at most log(1 - 1/prime_limit); that gives the
    lower end.
    """
    pp = prime_power(q)
    if D < 1:
        raise DomainError("D must be positive")
    Q = pp.q
    spf = _smallest_factor_table(prime_limit)
    acc = [0.0] * (D + 1)
    for ell in nt.primes_up_to(prime_limit):
        if ell == pp.p:
            continue
        e = _order_mod_prime(Q, ell, spf)
        if e <= D:
            acc[e] += math.log1p(-1.0 / ell)
    upper = math.fsum(acc[d] / d for d in range(1, D + 1))
    worst = math.log1p(-1.0 / (prime_limit + 1))
    scale = math.log(Q + 1) / math.log(prime_limit + 1)
    missing = math.fsum(
        math.floor(nt.euler_phi(d) * scale) * worst / d for d in range(1, D + 1)
    )
    return upper + missing, upper


def normal_deficiency_chain(q: int | PrimePower, d: int) -> tuple[float, float, float]:
    """(1 - G_q(d), phi(d)/(e q^e), log q / log(d+1)) for d prime to p;
    the three values are nondecreasing."""
    pp = prime_power(q)
    if d % pp.p == 0:
        raise DomainError("the chain applies to d prime to the characteristic")
    e = _order_of_q(pp.q, d)
    k = nt.euler_phi(d) // e
    x = math.exp(-e * math.log(pp.q))
    return -math.expm1(k * math.log1p(-x)), k * x, math.log(pp.q) / math.log(d + 1)


def primitive_deficiency_chain(q: int | PrimePower, d: int) -> tuple[float, float, list[int]]:
    """(1 - g_q(d), sum of 1/l over primes of order d, those primes)."""
    primes = primes_of_order(q, d)
    return 1.0 - g_q(q, d), math.fsum(1.0 / ell for ell in primes), primes

"""Mean values of f(n) = prod_{d | n} g(d) for density-like g.

The central quantity is the ladder average

    A_t = (1/L_t) * sum_{r | L_t} f(r)**alpha * phi(L_t / r)

along a divisibility chain L_1 | L_2 | ...  For density-like g whose
deficiencies 1 - g(d) are summable against 1/d, A_t is nonincreasing and
converges to the mean value of f**alpha.

A_t is evaluated on the divisor lattice of L_t: log f over all divisors is the
prefix sum of log g along each prime axis, and the weights phi(L_t/r)/L_t
factor into one vector per prime.  ``gcd_average_oracle`` computes the same
number by scanning 1..L_t and exists to check that path.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import numtheory as nt
from .errors import ContractError, DomainError, ResourceError, SpecViolation

__all__ = [
    "DensityLikeSpec",
    "Ladder",
    "MeanValueReport",
    "Diagnostic",
    "make_ladder",
    "f_value",
    "A_t",
    "gcd_average_oracle",
    "empirical_average",
    "empirical_averages",
    "t_of_x",
    "truncated_log_mean",
    "geometric_lower_bound",
    "deficiency_partial_sum",
    "product_lower_bound",
    "variance_estimate",
    "mean_value_report",
    "euler_ratio_spec",
    "constant_spec",
    "unit_spec",
]

# gcd_average_oracle refuses to scan beyond this
SCAN_CAP = 10**6


@dataclass(eq=False)
class DensityLikeSpec:
    """An N-density-like function g together with its metadata.

    ``g`` may return anything convertible to float.  Every value is checked
    against the contract the first time it is requested and then cached.
    """

    g: Callable[[int], float]
    N: int = 1
    lower_bound_c: float | None = None
    label: str = "custom"
    _g_cache: dict[int, float] = field(default_factory=dict, init=False, repr=False)
    _f_cache: dict[int, float] = field(default_factory=dict, init=False, repr=False)
    _moments: dict[tuple, float] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        if self.N < 1:
            raise DomainError("N must be a positive integer")
        if self.lower_bound_c is not None and not 0 < self.lower_bound_c < 1:
            raise DomainError("lower_bound_c must lie in (0, 1)")

    def g_value(self, d: int) -> float:
        v = self._g_cache.get(d)
        if v is not None:
            return v
        if d < 1:
            raise DomainError("g is defined on positive integers")
        v = float(self.g(d))
        if not 0.0 < v <= 1.0:
            raise SpecViolation(self.label, d, f"= {v!r} is outside (0, 1]")
        if v != 1.0 and math.gcd(d, self.N) > 1:
            raise SpecViolation(self.label, d, f"= {v!r} but gcd(d, {self.N}) > 1")
        c = self.lower_bound_c
        if c is not None and v <= c:
            raise SpecViolation(self.label, d, f"= {v!r} is not above c = {c}")
        self._g_cache[d] = v
        return v


def unit_spec() -> DensityLikeSpec:
    return DensityLikeSpec(lambda d: 1.0, N=1, lower_bound_c=0.5, label="unit")


def constant_spec(c: float) -> DensityLikeSpec:
    """g identically equal to ``c``, so f(n) = c**sigma0(n)."""
    return DensityLikeSpec(lambda d: c, N=1, lower_bound_c=c / 2, label=f"constant-{c}")


def euler_ratio_spec() -> DensityLikeSpec:
    """g(d) = 1 - 1/d on primes and 1 elsewhere, giving f(n) = phi(n)/n."""

    def g(d: int) -> float:
        return 1.0 - 1.0 / d if nt.is_probable_prime(d) else 1.0

    return DensityLikeSpec(g, N=1, lower_bound_c=0.4, label="euler-ratio")


# -- ladders ----------------------------------------------------------------

LADDER_KINDS = ("lcm-integers", "lcm-q-powers", "custom")


@dataclass(eq=False)
class Ladder:
    """A divisibility chain L_1 | L_2 | ... materialized on demand.

    ``N`` is the modulus for the covering condition: every n <= h_floor(t)
    with gcd(n, N) = 1 must divide L_t.
    """

    kind: str
    q: int | None = None
    N: int = 1
    h: Callable[[int], float] = field(default=float, repr=False)  # h(t) = t
    custom_terms: tuple[int, ...] | None = None
    _terms: list[int] = field(default_factory=list, init=False, repr=False)
    _facts: list[nt.Factorization] = field(default_factory=list, init=False, repr=False)

    @property
    def key(self) -> tuple:
        return (self.kind, self.q, self.custom_terms)

    def h_floor(self, t: int) -> float:
        return self.h(t)

    def _next(self, t: int) -> tuple[int, nt.Factorization]:
        prev = self._facts[-1].as_dict() if self._facts else {}
        if self.kind == "lcm-integers":
            step = nt.factorize(t).as_dict()
        elif self.kind == "lcm-q-powers":
            step = nt.factorize_power_minus_one(self.q, t).as_dict()
        else:
            assert self.custom_terms is not None
            if t > len(self.custom_terms):
                raise ResourceError(f"custom ladder has only {len(self.custom_terms)} terms")
            fact = nt.factorize(self.custom_terms[t - 1])
            return fact.value, fact
        for p, e in step.items():
            prev[p] = max(prev.get(p, 0), e)
        fact = nt.Factorization.from_dict(prev)
        return fact.value, fact

    def _extend(self, t: int) -> None:
        if t < 1:
            raise DomainError("ladder index starts at 1")
        while len(self._terms) < t:
            value, fact = self._next(len(self._terms) + 1)
            self._terms.append(value)
            self._facts.append(fact)

    def term(self, t: int) -> int:
        self._extend(t)
        return self._terms[t - 1]

    def factorization(self, t: int) -> nt.Factorization:
        self._extend(t)
        return self._facts[t - 1]

    def terms(self, t_max: int) -> list[int]:
        self._extend(t_max)
        return self._terms[:t_max]

    def check(self, t_max: int) -> None:
        """Verify divisibility, growth and the covering condition up to t_max."""
        terms = self.terms(t_max)
        for t in range(1, t_max + 1):
            L = terms[t - 1]
            if t > 1 and L % terms[t - 2]:
                raise ContractError(f"L_{t - 1} does not divide L_{t}")
            for n in range(1, int(self.h_floor(t)) + 1):
                if math.gcd(n, self.N) == 1 and L % n:
                    raise ContractError(f"{n} <= h({t}) is coprime to N but does not divide L_{t}")
        if self.kind == "custom" and t_max > 1 and terms[-1] <= terms[0]:
            raise ContractError("custom ladder does not grow")


def make_ladder(
    kind: str,
    q: int | None = None,
    terms: Sequence[int] | None = None,
    h: Callable[[int], float] | None = None,
    N: int = 1,
) -> Ladder:
    """Build one of the standard ladders, or a custom one from explicit terms.

    ``lcm-integers`` is lcm(1..t); ``lcm-q-powers`` is lcm(q - 1, ..., q**t - 1)
    and covers integers prime to the characteristic of q.  Both use h(t) = t.
    """
    if kind == "lcm-integers":
        return Ladder(kind, N=N)
    if kind == "lcm-q-powers":
        if q is None:
            raise DomainError("lcm-q-powers needs q")
        p, _ = nt.perfect_power(int(q))
        if q < 2 or not nt.is_probable_prime(p):
            raise DomainError(f"{q} is not a prime power")
        return Ladder(kind, q=int(q), N=p)
    if kind == "custom":
        if not terms:
            raise DomainError("custom ladder needs terms")
        if any(int(x) < 1 for x in terms):
            raise DomainError("ladder terms must be positive")
        return Ladder(kind, N=N, h=h or (lambda t: 0.0), custom_terms=tuple(int(x) for x in terms))
    raise DomainError(f"unknown ladder kind {kind!r}; expected one of {LADDER_KINDS}")


# -- evaluation -------------------------------------------------------------


def f_value(spec: DensityLikeSpec, n: int) -> float:
    """prod_{d | n} g(d) by direct divisor enumeration."""
    if n < 1:
        raise DomainError("f is defined on positive integers")
    hit = spec._f_cache.get(n)
    if hit is not None:
        return hit
    values = [spec.g_value(d) for d in nt.divisors(n)]
    if min(values) < 0.5:
        out = math.exp(math.fsum(math.log(v) for v in values))
    else:
        out = math.prod(values)
    spec._f_cache[n] = out
    return out


def _log_f_lattice(spec: DensityLikeSpec, fact: nt.Factorization) -> np.ndarray:
    """log f(r) for every divisor r, as an array with one axis per prime."""
    shape = tuple(e + 1 for _, e in fact)
    divs = [1]
    for p, e in fact:
        divs = [d * p**i for d in divs for i in range(e + 1)]
    log_g = np.array([math.log(spec.g_value(d)) for d in divs], dtype=float).reshape(shape)
    for axis in range(log_g.ndim):
        log_g = np.cumsum(log_g, axis=axis)
    return log_g


def _phi_weights(fact: nt.Factorization) -> np.ndarray:
    """phi(L / r) / L over the divisor lattice of L."""
    w = np.ones(())
    for p, e in fact:
        axis = np.array([(p - 1) / p ** (j + 1) for j in range(e)] + [1.0 / p**e])
        w = np.multiply.outer(w, axis)
    return w


def A_t(spec: DensityLikeSpec, ladder: Ladder, t: int, alpha: float = 1.0) -> float:
    """The ladder average of f**alpha at step t."""
    if alpha < 1:
        raise DomainError("moment order alpha must be >= 1")
    key = (ladder.key, t, float(alpha))
    hit = spec._moments.get(key)
    if hit is not None:
        return hit
    fact = ladder.factorization(t)
    count = nt.sigma0(fact)
    if count > nt.limits.divisor_cap:
        raise ResourceError(f"L_{t} has {count} divisors, above the cap {nt.limits.divisor_cap}")
    log_f = _log_f_lattice(spec, fact)
    terms = np.exp(alpha * log_f) * _phi_weights(fact)
    value = min(1.0, max(0.0, math.fsum(terms.ravel().tolist())))
    spec._moments[key] = value
    return value


def gcd_average_oracle(spec: DensityLikeSpec, ladder: Ladder, t: int, alpha: float = 1.0) -> float:
    """(1/L) * sum_{n=1}^{L} f(gcd(n, L))**alpha by scanning every n."""
    L = ladder.term(t)
    if L > SCAN_CAP:
        raise ResourceError(f"L_{t} = {L} is above the scan cap {SCAN_CAP}")
    g = np.gcd(np.arange(1, L + 1, dtype=np.int64), L)
    values, counts = np.unique(g, return_counts=True)
    total = math.fsum(int(c) * f_value(spec, int(r)) ** alpha for r, c in zip(values, counts))
    return total / L


def _empirical_prefix(spec: DensityLikeSpec, x: int, alpha: float) -> np.ndarray:
    """Running sums of f(n)**alpha for n = 1..x, via a divisor sieve."""
    log_f = np.zeros(x + 1)
    for d in range(1, x + 1):
        v = spec.g_value(d)
        if v != 1.0:
            log_f[d::d] += math.log(v)
    return np.cumsum(np.exp(alpha * log_f[1:]))


def empirical_average(spec: DensityLikeSpec, x: int, alpha: float = 1.0) -> float:
    """(1/x) * sum_{n <= x} f(n)**alpha."""
    if x < 1:
        raise DomainError("x must be positive")
    return float(_empirical_prefix(spec, x, alpha)[-1]) / x


def empirical_averages(spec: DensityLikeSpec, xs: Sequence[int], alpha: float = 1.0) -> list[float]:
    """empirical_average at several x with a single sieve pass."""
    if not xs:
        return []
    if min(xs) < 1:
        raise DomainError("x must be positive")
    prefix = _empirical_prefix(spec, max(xs), alpha)
    return [float(prefix[x - 1]) / x for x in xs]


def t_of_x(ladder: Ladder, x: int) -> int:
    """The unique t with L_t**2 <= x < L_{t+1}**2."""
    if x < ladder.term(1) ** 2:
        raise DomainError(f"x = {x} is below L_1**2 = {ladder.term(1) ** 2}")
    t = 1
    while ladder.term(t + 1) ** 2 <= x:
        t += 1
    return t


def _require_floor(spec: DensityLikeSpec) -> None:
    if spec.lower_bound_c is None:
        raise ContractError(f"{spec.label}: the log mean needs a positive lower bound c for g")


def truncated_log_mean(spec: DensityLikeSpec, D: int) -> float:
    """sum_{d <= D} log g(d) / d."""
    _require_floor(spec)
    return math.fsum(math.log(spec.g_value(d)) / d for d in range(1, D + 1))


def geometric_lower_bound(spec: DensityLikeSpec, D: int) -> float:
    return math.exp(truncated_log_mean(spec, D))


def deficiency_partial_sum(spec: DensityLikeSpec, y: int) -> float:
    """sum_{d <= y} (1 - g(d)) / d."""
    if y < 1:
        raise DomainError("y must be positive")
    return math.fsum((1.0 - spec.g_value(d)) / d for d in range(1, y + 1))


_EPS = 2.0**-52


def product_lower_bound(xs: Sequence[float], es: Sequence[float]) -> tuple[float, float]:
    """Return (prod (1 - x_i)**e_i, 1 - sum e_i x_i); the first is never smaller.

    The two sides can agree to within rounding, so the right side is rounded
    down by a bound on the floating-point error of both evaluations.  With
    no terms, or one term of exponent 1, both sides are the same float.
    """
    if len(xs) != len(es):
        raise DomainError("xs and es must have equal length")
    for x, e in zip(xs, es):
        if not 0.0 <= x <= 1.0 or e < 1.0:
            raise DomainError(f"need x in [0, 1] and e >= 1, got x={x}, e={e}")
    if not xs:
        return 1.0, 1.0
    if len(xs) == 1 and es[0] == 1.0:
        v = 1.0 - xs[0]
        return v, v
    if any(x == 1.0 for x in xs):
        lhs, log_sum = 0.0, 0.0
    else:
        log_sum = math.fsum(e * math.log1p(-x) for x, e in zip(xs, es))
        lhs = math.exp(log_sum)
    total = math.fsum(e * x for x, e in zip(xs, es))
    slack = (len(xs) + 4) * _EPS * (1.0 + total + abs(log_sum))
    return lhs, 1.0 - total - slack


def variance_estimate(spec: DensityLikeSpec, ladder: Ladder, t: int) -> float:
    m1 = A_t(spec, ladder, t, 1.0)
    m2 = A_t(spec, ladder, t, 2.0)
    return m2 - m1 * m1


# -- reports ----------------------------------------------------------------


@dataclass
class Diagnostic:
    x: int
    empirical: float
    t: int
    ladder_value: float
    gap: float


@dataclass
class MeanValueReport:
    spec_label: str
    ladder_kind: str
    alpha: float
    t_values: list[int]
    ladder_terms: list[int]
    A_t_values: list[float]
    second_moments: list[float] = field(default_factory=list)
    log_mean_depth: int | None = None
    truncated_log_mean: float | None = None
    # set when the log mean is bracketed instead of summed exactly;
    # truncated_log_mean then holds the upper end
    log_mean_lower: float | None = None
    geometric_lower: float | None = None
    variance_estimate: float | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    stopped_early: str | None = None

    @property
    def last(self) -> float:
        return self.A_t_values[-1]

    def is_nonincreasing(self, tol: float = 1e-12) -> bool:
        a = self.A_t_values
        return all(a[i + 1] <= a[i] + tol for i in range(len(a) - 1))

    def check(self, tol: float = 1e-6) -> None:
        """Raise if the report contradicts range, monotonicity or AM-GM."""
        if not all(0.0 <= a <= 1.0 for a in self.A_t_values):
            raise ContractError("A_t outside [0, 1]")
        if not self.is_nonincreasing():
            raise ContractError("A_t trajectory increases")
        if self.geometric_lower is not None and self.A_t_values:
            if self.geometric_lower > self.last + tol:
                raise ContractError("geometric lower bound exceeds the last A_t")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ladder_terms"] = [str(L) for L in self.ladder_terms]
        return out


def mean_value_report(
    spec: DensityLikeSpec,
    ladder: Ladder,
    t_max: int,
    alpha: float = 1.0,
    empirical_xs: Sequence[int] = (),
    log_mean_depth: int | None = None,
    with_variance: bool = True,
    allow_partial: bool = False,
) -> MeanValueReport:
    """Run the ladder to ``t_max`` and collect moments, log mean and diagnostics.

    With ``allow_partial`` a resource or budget error ends the trajectory at
    the last computable t instead of propagating.
    """
    if t_max < 1:
        raise DomainError("t_max must be positive")
    report = MeanValueReport(spec.label, ladder.kind, float(alpha), [], [], [])
    for t in range(1, t_max + 1):
        try:
            value = A_t(spec, ladder, t, alpha)
            second = A_t(spec, ladder, t, 2.0) if with_variance else None
        except ResourceError as exc:
            if not allow_partial or t == 1:
                raise
            report.stopped_early = f"t={t}: {exc}"
            break
        report.t_values.append(t)
        report.ladder_terms.append(ladder.term(t))
        report.A_t_values.append(value)
        if second is not None:
            report.second_moments.append(second)
    if with_variance and report.second_moments:
        if alpha == 1.0:
            report.variance_estimate = report.second_moments[-1] - report.last**2
        else:
            report.variance_estimate = variance_estimate(spec, ladder, report.t_values[-1])
    if log_mean_depth is not None and spec.lower_bound_c is not None:
        report.log_mean_depth = log_mean_depth
        report.truncated_log_mean = truncated_log_mean(spec, log_mean_depth)
        report.geometric_lower = math.exp(report.truncated_log_mean)
    xs = sorted(set(int(x) for x in empirical_xs))
    if xs:
        for x, s in zip(xs, empirical_averages(spec, xs, alpha)):
            t = t_of_x(ladder, x)
            a = A_t(spec, ladder, t, alpha)
            report.diagnostics.append(Diagnostic(x, s, t, a, abs(s - a)))
    return report

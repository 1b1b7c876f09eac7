"""Brute-force finite fields: count primitive and normal elements by definition.

A tower F_p < F_q < F_{q^n} is built from explicit irreducible moduli, found
by lexicographic search so every run produces the same fields.  F_q elements
are integer codes whose base-p digits are coefficients over F_p; F_{q^n}
elements are length-n coordinate vectors over F_q, stored column-wise as
arrays of shape (n, count) so that one call operates on a whole batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numtheory as nt
from .errors import DomainError, ResourceError

__all__ = [
    "GF",
    "FieldTower",
    "ENUM_CAP",
    "is_irreducible",
    "build_tower",
    "count_primitive",
    "count_primitive_naive",
    "count_normal",
    "is_normal",
    "batched_rank",
]

ENUM_CAP = 2**16
NAIVE_CAP = 2**9
_TABLE_MAX = 256


class GF:
    """F_q = F_p[x]/(modulus), vectorized over numpy arrays of codes.

    Fields of at most 256 elements use full operation tables; larger ones
    do the polynomial arithmetic digit by digit.
    """

    def __init__(self, p: int, modulus: list[int]):
        self.p = p
        self.modulus = list(modulus)
        self.m = len(modulus) - 1
        self.q = p**self.m
        self._add = self._mul = self._neg = self._inv = None
        if self.m > 1 and self.q <= _TABLE_MAX:
            a = np.arange(self.q).reshape(-1, 1)
            b = np.arange(self.q).reshape(1, -1)
            self._add = self._digit_add(a, b)
            self._mul = self._digit_mul(a, b)
            self._neg = self._digit_neg(np.arange(self.q))
            self._inv = np.zeros(self.q, dtype=np.int64)
            rows, cols = np.nonzero(self._mul == 1)
            self._inv[rows] = cols

    # digit arithmetic, used for m > 1 -------------------------------------

    def _digits(self, a: np.ndarray) -> list[np.ndarray]:
        a = np.asarray(a, dtype=np.int64)
        out = []
        for _ in range(self.m):
            a, r = np.divmod(a, self.p)
            out.append(r)
        return out

    def _join(self, digits: list[np.ndarray]) -> np.ndarray:
        out = np.zeros_like(digits[0])
        for d in reversed(digits):
            out = out * self.p + d
        return out

    def _digit_add(self, a, b):
        return self._join([(x + y) % self.p for x, y in zip(self._digits(a), self._digits(b))])

    def _digit_neg(self, a):
        return self._join([(-x) % self.p for x in self._digits(a)])

    def _digit_mul(self, a, b):
        p, m = self.p, self.m
        A, B = self._digits(a), self._digits(b)
        shape = np.broadcast(A[0], B[0]).shape
        prod = [np.zeros(shape, dtype=np.int64) for _ in range(2 * m - 1)]
        for i in range(m):
            for j in range(m):
                prod[i + j] = prod[i + j] + A[i] * B[j]
        prod = [c % p for c in prod]
        for k in range(2 * m - 2, m - 1, -1):
            c = prod[k]
            for i in range(m):
                prod[k - m + i] = (prod[k - m + i] - c * self.modulus[i]) % p
        return self._join(prod[:m])

    # public vectorized operations ----------------------------------------

    def add(self, a, b):
        if self.m == 1:
            return (np.asarray(a) + b) % self.p
        if self._add is not None:
            return self._add[a, b]
        return self._digit_add(a, b)

    def neg(self, a):
        if self.m == 1:
            return (-np.asarray(a)) % self.p
        if self._neg is not None:
            return self._neg[a]
        return self._digit_neg(a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.m == 1:
            return (np.asarray(a) * b) % self.p
        if self._mul is not None:
            return self._mul[a, b]
        return self._digit_mul(a, b)

    def inv(self, a):
        if self._inv is not None:
            return self._inv[a]
        return self.pow(a, self.q - 2)

    def pow(self, a, e: int):
        result = np.ones_like(np.asarray(a, dtype=np.int64))
        base = np.asarray(a, dtype=np.int64)
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    # scalar conveniences for polynomial work ------------------------------

    def smul(self, a: int, b: int) -> int:
        return int(self.mul(np.int64(a), np.int64(b)))

    def sadd(self, a: int, b: int) -> int:
        return int(self.add(np.int64(a), np.int64(b)))

    def ssub(self, a: int, b: int) -> int:
        return int(self.sub(np.int64(a), np.int64(b)))

    def sinv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return int(self.inv(np.int64(a)))


def _prime_field(p: int) -> GF:
    return GF(p, [0, 1])


# -- scalar polynomials over a GF, ascending coefficient lists ---------------


def _trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def _poly_mod(F: GF, f: list[int], g: list[int]) -> list[int]:
    f = _trim(list(f))
    g = _trim(list(g))
    inv_lead = F.sinv(g[-1])
    while len(f) >= len(g):
        c = F.smul(f[-1], inv_lead)
        shift = len(f) - len(g)
        for i, gi in enumerate(g):
            f[shift + i] = F.ssub(f[shift + i], F.smul(c, gi))
        _trim(f)
    return f


def _poly_mulmod(F: GF, f: list[int], g: list[int], mod: list[int]) -> list[int]:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = F.sadd(out[i + j], F.smul(a, b))
    return _poly_mod(F, out, mod)


def _poly_powmod(F: GF, f: list[int], e: int, mod: list[int]) -> list[int]:
    result = [1]
    base = _poly_mod(F, f, mod)
    while e:
        if e & 1:
            result = _poly_mulmod(F, result, base, mod)
        base = _poly_mulmod(F, base, base, mod)
        e >>= 1
    return result


def _poly_gcd(F: GF, f: list[int], g: list[int]) -> list[int]:
    f, g = _trim(list(f)), _trim(list(g))
    while g:
        f, g = g, _poly_mod(F, f, g)
    return f


def _frobenius_iterate(F: GF, k: int, mod: list[int]) -> list[int]:
    """x^(q^k) reduced modulo ``mod``."""
    h = [0, 1]
    for _ in range(k):
        h = _poly_powmod(F, h, F.q, mod)
    return h


def is_irreducible(F: GF, f: list[int]) -> bool:
    """Rabin's test: x^(q^n) = x mod f and no root of f lies in a proper subfield."""
    f = _trim(list(f))
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x = [0, 1]
    if _trim(_poly_mod(F, [F.ssub(a, b) for a, b in _pad(_frobenius_iterate(F, n, f), x)], f)):
        return False
    for r in nt.factorize(n).primes:
        h = _frobenius_iterate(F, n // r, f)
        diff = _trim([F.ssub(a, b) for a, b in _pad(h, x)])
        if len(_poly_gcd(F, f, diff)) != 1:
            return False
    return True


def _pad(f: list[int], g: list[int]) -> list[tuple[int, int]]:
    k = max(len(f), len(g))
    return list(zip(f + [0] * (k - len(f)), g + [0] * (k - len(g))))


def _first_irreducible(F: GF, degree: int) -> list[int]:
    for code in range(F.q**degree):
        coeffs = []
        c = code
        for _ in range(degree):
            c, r = divmod(c, F.q)
            coeffs.append(r)
        f = coeffs + [1]
        if is_irreducible(F, f):
            return f
    raise AssertionError(f"no irreducible polynomial of degree {degree} over F_{F.q}")


# -- towers -----------------------------------------------------------------


@dataclass(eq=False)
class FieldTower:
    """F_{q^n} over F_q = F_{p^m}, with both moduli irreducible."""

    p: int
    m: int
    n: int
    base_modulus: list[int]
    ext_modulus: list[int]
    base: GF = field(repr=False)

    @property
    def q(self) -> int:
        return self.p**self.m

    @property
    def size(self) -> int:
        return self.q**self.n

    def decode(self, codes) -> np.ndarray:
        """Integer codes -> coordinate arrays of shape (n, count)."""
        codes = np.atleast_1d(np.asarray(codes, dtype=np.int64))
        out = np.empty((self.n, codes.size), dtype=np.int64)
        for i in range(self.n):
            codes, out[i] = np.divmod(codes, self.q)
        return out

    def encode(self, A: np.ndarray) -> np.ndarray:
        out = np.zeros(A.shape[1], dtype=np.int64)
        for i in reversed(range(self.n)):
            out = out * self.q + A[i]
        return out

    def elements(self) -> np.ndarray:
        return self.decode(np.arange(self.size))

    def one(self, count: int = 1) -> np.ndarray:
        out = np.zeros((self.n, count), dtype=np.int64)
        out[0] = 1
        return out

    def add(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        return self.base.add(A, B)

    def scale(self, c, A: np.ndarray) -> np.ndarray:
        return self.base.mul(c, A)

    def mul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        F, n = self.base, self.n
        if n == 1:
            return F.mul(A, B)
        prod = [np.zeros(A.shape[1], dtype=np.int64) for _ in range(2 * n - 1)]
        for i in range(n):
            for j in range(n):
                prod[i + j] = F.add(prod[i + j], F.mul(A[i], B[j]))
        mod = self.ext_modulus
        for k in range(2 * n - 2, n - 1, -1):
            c = prod[k]
            for i in range(n):
                if mod[i]:
                    prod[k - n + i] = F.sub(prod[k - n + i], F.mul(c, mod[i]))
        return np.stack(prod[:n])

    def pow(self, A: np.ndarray, e: int) -> np.ndarray:
        result = self.one(A.shape[1])
        base = A
        while e:
            if e & 1:
                result = self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return result

    def frobenius(self, A: np.ndarray) -> np.ndarray:
        return self.pow(A, self.q)

    def conjugates(self, A: np.ndarray) -> np.ndarray:
        """Array (count, n, n): row i holds the coordinates of A^(q^i)."""
        rows = [A]
        for _ in range(self.n - 1):
            rows.append(self.frobenius(rows[-1]))
        return np.stack(rows).transpose(2, 0, 1)


def build_tower(p: int, m: int, n: int, cap: int | None = None) -> FieldTower:
    cap = ENUM_CAP if cap is None else cap
    if not nt.is_probable_prime(p):
        raise DomainError(f"{p} is not prime")
    if m < 1 or n < 1:
        raise DomainError("m and n must be positive")
    if p ** (m * n) > cap:
        raise ResourceError(f"F_{p}^{m * n} has more than {cap} elements")
    Fp = _prime_field(p)
    base_mod = _first_irreducible(Fp, m) if m > 1 else [0, 1]
    F = GF(p, base_mod)
    ext_mod = _first_irreducible(F, n) if n > 1 else [0, 1]
    tower = FieldTower(p, m, n, base_mod, ext_mod, F)
    basis = np.eye(n, dtype=np.int64)
    frob = tower.frobenius(basis)
    if batched_rank(F, frob.T[None, :, :])[0] != n:
        raise AssertionError("Frobenius is not bijective on the constructed field")
    return tower


def batched_rank(F: GF, M: np.ndarray) -> np.ndarray:
    """Ranks over F of a stack of matrices with shape (count, rows, cols)."""
    M = np.array(M, dtype=np.int64, copy=True)
    count, nrows, ncols = M.shape
    rank = np.zeros(count, dtype=np.int64)
    rows = np.arange(nrows)
    for col in range(ncols):
        cand = (M[:, :, col] != 0) & (rows[None, :] >= rank[:, None])
        has = cand.any(axis=1)
        idx = np.flatnonzero(has & (rank < nrows))
        if idx.size == 0:
            continue
        piv = cand[idx].argmax(axis=1)
        r = rank[idx]
        top, other = M[idx, r].copy(), M[idx, piv].copy()
        M[idx, piv] = top
        M[idx, r] = other
        scale = F.inv(M[idx, r, col])
        M[idx, r] = F.mul(M[idx, r], scale[:, None])
        factor = M[idx, :, col].copy()
        factor[np.arange(idx.size), r] = 0
        M[idx] = F.sub(M[idx], F.mul(factor[:, :, None], M[idx, r][:, None, :]))
        rank[idx] += 1
    return rank


def count_primitive(tower: FieldTower) -> int:
    """Generators of F_{q^n}^*: beta^((Q-1)/l) != 1 for every prime l | Q-1."""
    Q = tower.size
    A = tower.decode(np.arange(1, Q))
    ok = np.ones(Q - 1, dtype=bool)
    one = tower.one(Q - 1)
    for ell in nt.factorize(Q - 1).primes:
        P = tower.pow(A, (Q - 1) // ell)
        ok &= ~np.all(P == one, axis=0)
    return int(ok.sum())


def count_primitive_naive(tower: FieldTower) -> int:
    """The same count by walking powers until 1 reappears (small fields only)."""
    Q = tower.size
    if Q > NAIVE_CAP:
        raise ResourceError(f"naive order walk is limited to {NAIVE_CAP} elements")
    A = tower.decode(np.arange(1, Q))
    one = tower.one(Q - 1)
    early = np.zeros(Q - 1, dtype=bool)
    cur = A
    for _ in range(1, Q - 1):
        early |= np.all(cur == one, axis=0)
        cur = tower.mul(cur, A)
    return int((~early).sum())


def _normal_mask(tower: FieldTower, A: np.ndarray) -> np.ndarray:
    return batched_rank(tower.base, tower.conjugates(A)) == tower.n


def count_normal(tower: FieldTower) -> int:
    """Elements whose n conjugates are linearly independent over F_q."""
    return int(_normal_mask(tower, tower.elements()).sum())


def is_normal(tower: FieldTower, beta) -> bool:
    """``beta`` is an integer code or a length-n coordinate sequence."""
    if isinstance(beta, (int, np.integer)):
        A = tower.decode([int(beta)])
    else:
        A = np.asarray(beta, dtype=np.int64).reshape(tower.n, 1)
    return bool(_normal_mask(tower, A)[0])

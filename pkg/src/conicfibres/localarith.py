"""Residue symbols, factorization and local solubility of diagonal conics.

Everything here is about the conic ``F*x^2 + G*y^2 = z^2`` for integers
``F`` and ``G``.  Solubility over Q is decided place by place with Hilbert
symbols (Hasse-Minkowski); ``find_point`` is a slow exhaustive search kept
as an independent oracle.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Tuple, Union

import numpy as np

DEFAULT_TABLE_BOUND = 1 << 25
DEFAULT_ORACLE_BOUND = 5000
RHO_BUDGET = 1 << 20

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class FactorizationError(ArithmeticError):
    """Raised when a number could not be factored within the iteration budget."""


# ---------------------------------------------------------------------------
# smallest-prime-factor table

_table_bound = DEFAULT_TABLE_BOUND
_spf: Optional[np.ndarray] = None


def set_table_bound(bound: int) -> None:
    """Change the size of the smallest-prime-factor table (rebuilt lazily)."""
    global _table_bound, _spf
    if bound < 2:
        raise ValueError("table bound must be at least 2")
    if bound != _table_bound:
        _table_bound = bound
        _spf = None


def table_bound() -> int:
    return _table_bound


def spf_table() -> np.ndarray:
    """The table ``spf[n]`` = smallest prime factor of n, for 2 <= n <= bound."""
    global _spf
    if _spf is None:
        _spf = build_spf(_table_bound)
    return _spf


def build_spf(bound: int) -> np.ndarray:
    spf = np.zeros(bound + 1, dtype=np.uint32)
    for p in range(2, math.isqrt(bound) + 1):
        if spf[p]:
            continue
        tail = spf[p * p :: p]
        tail[tail == 0] = p
    idx = np.flatnonzero(spf == 0)
    spf[idx] = idx
    spf[0] = 0
    spf[1] = 1
    return spf


def primes_upto(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (plain Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


# ---------------------------------------------------------------------------
# primality and factorization


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin below 3.3e24, strong probable-prime test above."""
    if n < 2:
        return False
    if n <= _table_bound and _spf is not None:
        return int(_spf[n]) == n
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
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


def _brent(n: int, budget: int) -> int:
    # returns a nontrivial factor of the odd composite n
    rng = random.Random(n)
    spent = 0
    while spent < budget:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
            spent += r
            if spent > budget:
                break
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if 1 < g < n:
            return g
    raise FactorizationError(f"rho budget exhausted on {n}")


@dataclass(frozen=True)
class Factorization:
    sign: int
    factors: Tuple[Tuple[int, int], ...] = ()

    def value(self) -> int:
        n = self.sign
        for p, e in self.factors:
            n *= p**e
        return n

    def primes(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.factors)


def _factor_positive(n: int, out: dict, budget: int) -> None:
    if n == 1:
        return
    if n <= _table_bound:
        spf = spf_table()
        while n > 1:
            p = int(spf[n])
            out[p] = out.get(p, 0) + 1
            n //= p
        return
    for p in (2, 3, 5, 7, 11, 13):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n == 1:
        return
    if n <= _table_bound:
        _factor_positive(n, out, budget)
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    r = math.isqrt(n)
    if r * r == n:
        sub: dict = {}
        _factor_positive(r, sub, budget)
        for p, e in sub.items():
            out[p] = out.get(p, 0) + 2 * e
        return
    d = _brent(n, budget)
    _factor_positive(d, out, budget)
    _factor_positive(n // d, out, budget)


def factorize(n: int, budget: int = RHO_BUDGET) -> Factorization:
    """Complete factorization of a nonzero integer.

    Values inside the smallest-prime-factor table are read off the table,
    larger ones go through Brent's variant of Pollard rho with primality
    certification of every reported factor.
    """
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict = {}
    _factor_positive(abs(n), out, budget)
    return Factorization(1 if n > 0 else -1, tuple(sorted(out.items())))


def squarefree_kernel(n: int) -> int:
    """The squarefree d, carrying the sign of n, with n = d*m^2."""
    if n == 0:
        raise ValueError("0 has no squarefree kernel")
    fac = factorize(n)
    d = fac.sign
    for p, e in fac.factors:
        if e & 1:
            d *= p
    return d


def kernel_and_primes(n: int) -> Tuple[int, Tuple[int, ...]]:
    """Squarefree kernel of n together with its prime divisors (ascending)."""
    fac = factorize(n)
    d = fac.sign
    ps = []
    for p, e in fac.factors:
        if e & 1:
            d *= p
            ps.append(p)
    return d, tuple(ps)


def is_square(n: int) -> bool:
    """0 counts as a square."""
    return n >= 0 and math.isqrt(n) ** 2 == n


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# residue symbols


def legendre(a: int, p: int) -> int:
    """Legendre symbol for an odd prime p, via Euler's criterion."""
    r = pow(a % p, (p - 1) >> 1, p)
    return -1 if r == p - 1 else r


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n) for any integer a and nonzero integer n."""
    if n == 0:
        raise ValueError("Kronecker symbol (a|0) is not supported")
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v & 1 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a|n) for odd positive n
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


# ---------------------------------------------------------------------------
# places and Hilbert symbols


@dataclass(frozen=True, order=True)
class Place:
    """A place of Q: ``Place(0)`` is the real place, ``Place(p)`` the p-adic one."""

    p: int = 0

    def __post_init__(self):
        if self.p != 0 and not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def is_real(self) -> bool:
        return self.p == 0

    def __str__(self):
        return "inf" if self.p == 0 else str(self.p)


REAL = Place(0)


def as_place(v: Union[Place, int, str]) -> Place:
    if isinstance(v, Place):
        return v
    if v in ("inf", "R", "real", None):
        return REAL
    return Place(int(v))


def _split(n: int, p: int) -> Tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def hilbert(a: int, b: int, v: Union[Place, int, str]) -> int:
    """Hilbert symbol (a, b)_v for nonzero integers a, b."""
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero arguments")
    place = as_place(v)
    if place.is_real:
        return -1 if a < 0 and b < 0 else 1
    p = place.p
    alpha, u = _split(a, p)
    beta, w = _split(b, p)
    if p == 2:
        eps_u = ((u - 1) >> 1) & 1
        eps_w = ((w - 1) >> 1) & 1
        om_u = ((u * u - 1) >> 3) & 1
        om_w = ((w * w - 1) >> 3) & 1
        e = eps_u * eps_w + alpha * om_w + beta * om_u
        return -1 if e & 1 else 1
    s = -1 if (alpha & beta & 1) and p % 4 == 3 else 1
    if beta & 1:
        s *= legendre(u, p)
    if alpha & 1:
        s *= legendre(w, p)
    return s


def conic_soluble_at(F: int, G: int, v: Union[Place, int, str]) -> bool:
    """Whether F*x^2 + G*y^2 = z^2 has a nontrivial point over the completion at v."""
    if F == 0 or G == 0:
        return True
    return hilbert(F, G, v) == 1


@dataclass(frozen=True)
class SolubilityVerdict:
    F: int
    G: int
    obstructed_places: Tuple[Place, ...] = ()
    witness: Optional[Tuple[int, int, int]] = None
    degenerate: bool = False

    @property
    def globally_soluble(self) -> bool:
        return not self.obstructed_places

    def as_dict(self) -> dict:
        return {
            "F": self.F,
            "G": self.G,
            "soluble": self.globally_soluble,
            "degenerate": self.degenerate,
            "obstructed_places": [str(v) for v in self.obstructed_places],
            "witness": list(self.witness) if self.witness else None,
        }


def relevant_places(F: int, G: int) -> Tuple[Place, ...]:
    """Real, 2 and every odd prime dividing the product of the kernels."""
    _, pf = kernel_and_primes(F)
    _, pg = kernel_and_primes(G)
    odd = sorted((set(pf) | set(pg)) - {2})
    return (REAL, Place(2)) + tuple(Place(p) for p in odd)


def conic_everywhere_soluble(F: int, G: int, witness: bool = True) -> SolubilityVerdict:
    """Decide global solubility of F*x^2 + G*y^2 = z^2.

    With ``witness`` set, a soluble non-degenerate conic small enough for
    :func:`find_point` also carries an explicit primitive point.
    """
    if F == 0:
        return SolubilityVerdict(F, G, (), (1, 0, 0), degenerate=True)
    if G == 0:
        return SolubilityVerdict(F, G, (), (0, 1, 0), degenerate=True)
    kf = squarefree_kernel(F)
    kg = squarefree_kernel(G)
    bad = tuple(v for v in relevant_places(kf, kg) if hilbert(kf, kg, v) == -1)
    pt = None
    if witness and not bad and max(abs(F), abs(G)) <= DEFAULT_ORACLE_BOUND:
        pt = find_point(F, G)
    return SolubilityVerdict(F, G, bad, pt)


def soluble_from_kernels(kf: int, pf: Tuple[int, ...], kg: int, pg: Tuple[int, ...]) -> bool:
    """Fast global test for nonzero squarefree kernels kf, kg with prime lists pf, pg.

    Only the real place and odd primes are inspected; the 2-adic symbol is
    then forced by the product formula.
    """
    if kf < 0 and kg < 0:
        return False
    for p in pf:
        if p == 2:
            continue
        if kg % p:
            if pow(kg % p, (p - 1) >> 1, p) != 1:
                return False
        else:
            t = -(kf // p) * (kg // p)
            if pow(t % p, (p - 1) >> 1, p) != 1:
                return False
    for p in pg:
        if p == 2 or kf % p == 0:
            continue
        if pow(kf % p, (p - 1) >> 1, p) != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# exhaustive oracle


def _square_parts(n: int) -> Tuple[int, int]:
    # n = kernel * root^2
    fac = factorize(n)
    k, r = fac.sign, 1
    for p, e in fac.factors:
        if e & 1:
            k *= p
        r *= p ** (e >> 1)
    return k, r


def find_point(F: int, G: int, bound: int = DEFAULT_ORACLE_BOUND) -> Optional[Tuple[int, int, int]]:
    """Exhaustive search for a primitive (x, y, z) with F*x^2 + G*y^2 = z^2.

    The search runs over the square-free reduction F', G' inside
    0 <= x <= |G'|, 0 <= y <= |F'|, z <= |F'*G'|, ordered by y then x.
    Independent of the Hilbert-symbol machinery on purpose.
    """
    if abs(F) > bound or abs(G) > bound:
        raise ValueError(f"|F|, |G| must be at most {bound}")
    if F == 0:
        return (1, 0, 0)
    if G == 0:
        return (0, 1, 0)
    kf, rf = _square_parts(F)
    kg, rg = _square_parts(G)
    zmax = abs(kf * kg)
    xs = np.arange(abs(kg) + 1, dtype=np.int64)
    fx = kf * xs * xs
    for y in range(abs(kf) + 1):
        vals = fx + kg * y * y
        ok = vals >= 0
        if y == 0:
            ok[0] = False
        root = np.sqrt(np.where(ok, vals, 0).astype(np.float64)).astype(np.int64)
        root += (root + 1) * (root + 1) <= vals
        root -= root * root > vals
        hit = np.flatnonzero(ok & (root * root == vals) & (root <= zmax))
        if hit.size:
            x = int(xs[hit[0]])
            z = int(root[hit[0]])
            # undo F = kf*rf^2, G = kg*rg^2
            X, Y, Z = x * rg, y * rf, z * rf * rg
            g = math.gcd(math.gcd(X, Y), Z)
            return (X // g, Y // g, Z // g)
    return None

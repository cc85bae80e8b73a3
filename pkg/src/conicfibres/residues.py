"""Bad residue classes modulo p^2 for the fibres f(u)x^2 + g(v)y^2 = z^2.

A class of (Z/p^2Z)^4 is recorded in Omega'_p when every primitive lift
(u, v) has a fibre without Q_p-points.  Omega'_p splits into three disjoint
pieces:

* Omega_{p,f}:   p || f(u) and g(v) a non-residue mod p,
* Omega_{p,g}:   p || g(v) and f(u) a non-residue mod p,
* Omega_{p,f,g}: f(u) = p*k, g(v) = p*l mod p^2 with -k*l a non-residue.

Each piece is a condition on the u-half times a condition on the v-half,
so everything is counted from per-form tallies over (Z/p^2Z)^2, which costs
O(p^4) instead of O(p^8).
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np

from .forms import BinaryQuadraticForm, splits_at
from .localarith import conic_soluble_at, is_prime, kronecker, legendre

_ROW_BLOCK = 1 << 22


class Source(enum.Enum):
    BRUTE_FORCE = "BruteForce"
    CLOSED_FORM = "ClosedForm"


def is_good_prime(f: BinaryQuadraticForm, g: BinaryQuadraticForm, p: int) -> bool:
    return p > 2 and is_prime(p) and (2 * f.disc * g.disc) % p != 0


def _require_good(f, g, p):
    if not is_good_prime(f, g, p):
        raise ValueError(f"p={p} is not an odd prime coprime to 2*disc(f)*disc(g)")


def _nonresidue_table(p: int) -> np.ndarray:
    table = np.ones(p, dtype=bool)
    table[0] = False
    table[(np.arange(1, p, dtype=np.int64) ** 2) % p] = False
    return table


@dataclass(frozen=True)
class HalfClassTally:
    """Counts over the p^4 - p^2 primitive classes of (Z/p^2Z)^2 for one form.

    ``by_k[k]`` (1 <= k < p) counts classes with value = p*k mod p^2, so
    ``sum(by_k) == lifted_root``.
    """

    p: int
    unit_square: int
    nonresidue: int
    lifted_root: int
    deep_root: int
    by_k: Tuple[int, ...]

    @property
    def total(self) -> int:
        return self.unit_square + self.nonresidue + self.lifted_root + self.deep_root


def _form_values(form: BinaryQuadraticForm, p: int):
    """Yield (u1, u2, value mod p^2) over primitive classes in row blocks."""
    q = p * p
    a, b, c = form.a % q, form.b % q, form.c % q
    u2 = np.arange(q, dtype=np.int64)
    c2 = (c * u2 * u2) % q
    rows = max(1, _ROW_BLOCK // q)
    for start in range(0, q, rows):
        u1 = np.arange(start, min(q, start + rows), dtype=np.int64)[:, None]
        vals = ((a * u1 * u1) % q + (b * u1 % q) * u2[None, :] + c2[None, :]) % q
        prim = ~((u1 % p == 0) & (u2[None, :] % p == 0))
        yield u1, u2, vals, prim


def value_histogram(form: BinaryQuadraticForm, p: int) -> np.ndarray:
    """hist[r] = number of primitive classes (u1, u2) mod p^2 with form(u) = r mod p^2."""
    q = p * p
    hist = np.zeros(q, dtype=np.int64)
    a, b, c = form.a % q, form.b % q, form.c % q
    # int32 is enough: every product below is reduced to < q^2 < 2^31 first
    u2 = np.arange(q, dtype=np.int32)
    c2 = (u2 * u2 % q) * c % q
    rows = max(1, _ROW_BLOCK // q)
    for start in range(0, q, rows):
        u1 = np.arange(start, min(q, start + rows), dtype=np.int32)[:, None]
        a1 = (u1 * u1 % q) * a % q
        b1 = u1 * b % q
        vals = (b1 * u2[None, :] % q + a1 + c2[None, :]) % q
        hist += np.bincount(vals.ravel(), minlength=q)
    # the p^2 classes with u = 0 mod p all take the value 0 mod p^2
    hist[0] -= q
    return hist


@lru_cache(maxsize=None)
def half_tally(form: BinaryQuadraticForm, p: int) -> HalfClassTally:
    """Brute-force tally of a form's values over primitive classes mod p^2."""
    hist = value_histogram(form, p)
    r = np.arange(p * p) % p
    nonres = _nonresidue_table(p)[r]
    by_k = hist[::p].copy()
    by_k[0] = 0
    return HalfClassTally(
        p,
        unit_square=int(hist[(r != 0) & ~nonres].sum()),
        nonresidue=int(hist[nonres].sum()),
        lifted_root=int(by_k.sum()),
        deep_root=int(hist[0]),
        by_k=tuple(int(x) for x in by_k),
    )


def half_classes(form: BinaryQuadraticForm, p: int) -> Dict[object, np.ndarray]:
    """Explicit primitive classes mod p^2 grouped by category.

    Keys: ``"nonresidue"``, ``"deep"`` and ``k`` for 1 <= k < p (value = p*k).
    Values are (n, 2) arrays of (u1, u2).
    """
    nonres = _nonresidue_table(p)
    groups: Dict[object, List[np.ndarray]] = {}
    for u1, u2, vals, prim in _form_values(form, p):
        U1 = np.broadcast_to(u1, vals.shape)
        U2 = np.broadcast_to(u2[None, :], vals.shape)
        r = vals % p
        for key, mask in (("nonresidue", nonres[r] & prim), ("deep", (vals == 0) & prim)):
            groups.setdefault(key, []).append(np.stack([U1[mask], U2[mask]], axis=1))
        lifted = (r == 0) & (vals != 0) & prim
        ks = vals[lifted] // p
        pts = np.stack([U1[lifted], U2[lifted]], axis=1)
        for k in np.unique(ks):
            groups.setdefault(int(k), []).append(pts[ks == k])
    return {k: np.concatenate(v) for k, v in groups.items()}


@dataclass(frozen=True)
class OmegaCounts:
    p: int
    omega_f: int
    omega_g: int
    omega_fg: int
    omega_p2_sup: int
    eta: int
    source: Source

    @property
    def omega_prime(self) -> int:
        return self.omega_f + self.omega_g + self.omega_fg

    def triple(self) -> Tuple[int, int, int]:
        return (self.omega_f, self.omega_g, self.omega_fg)


def eta(f: BinaryQuadraticForm, g: BinaryQuadraticForm, p: int) -> int:
    """Number of the two forms split by p; 0 at bad primes."""
    if not is_good_prime(f, g, p):
        return 0
    return int(splits_at(f, p)) + int(splits_at(g, p))


def _bad_kl_pairs(p: int) -> np.ndarray:
    k = np.arange(p, dtype=np.int64)
    prod = (-(k[:, None] * k[None, :])) % p
    nr = _nonresidue_table(p)
    mask = nr[prod]
    mask[0, :] = mask[:, 0] = False
    return mask


def superset_count(Hf: int, Hg: int, p: int) -> int:
    """Primitive classes of (Z/p^2Z)^4 with f = 0 or g = 0 mod p^2 (inclusion-exclusion)."""
    half = p**4 - p**2
    return Hf * half + Hg * half - Hf * Hg


def deep_root_closed(form: BinaryQuadraticForm, p: int) -> int:
    """Primitive classes mod p^2 with form = 0 mod p^2: (1 + (D|p)) p (p - 1)."""
    return (1 + kronecker(form.disc, p)) * p * (p - 1)


def omega_brute(f: BinaryQuadraticForm, g: BinaryQuadraticForm, p: int) -> OmegaCounts:
    _require_good(f, g, p)
    tf, tg = half_tally(f, p), half_tally(g, p)
    mask = _bad_kl_pairs(p)
    kf = np.array(tf.by_k, dtype=object)
    kg = np.array(tg.by_k, dtype=object)
    omega_fg = int(sum(kf[i] * kg[j] for i, j in zip(*np.nonzero(mask))))
    return OmegaCounts(
        p,
        tf.lifted_root * tg.nonresidue,
        tg.lifted_root * tf.nonresidue,
        omega_fg,
        superset_count(tf.deep_root, tg.deep_root, p),
        eta(f, g, p),
        Source.BRUTE_FORCE,
    )


def omega_closed(f: BinaryQuadraticForm, g: BinaryQuadraticForm, p: int) -> OmegaCounts:
    _require_good(f, g, p)
    base = p**3 * (p - 1) ** 3
    sf, sg = splits_at(f, p), splits_at(g, p)
    return OmegaCounts(
        p,
        base * (p - kronecker(g.disc, p)) if sf else 0,
        base * (p - kronecker(f.disc, p)) if sg else 0,
        2 * base if sf and sg else 0,
        superset_count(deep_root_closed(f, p), deep_root_closed(g, p), p),
        eta(f, g, p),
        Source.CLOSED_FORM,
    )


def omega_exact(f: BinaryQuadraticForm, g: BinaryQuadraticForm, p: int) -> OmegaCounts:
    """Closed forms matching the brute-force counts.

    Same as :func:`omega_closed` except for the joint piece: there are
    2p(p - 1) classes per value p*k, and (p - 1)^2 / 2 bad pairs (k, l), so
    |Omega_{p,f,g}| = 2 p^2 (p - 1)^4 when p splits both forms.
    """
    c = omega_closed(f, g, p)
    fg = 2 * p**2 * (p - 1) ** 4 if c.omega_fg else 0
    return OmegaCounts(p, c.omega_f, c.omega_g, fg, c.omega_p2_sup, c.eta, Source.CLOSED_FORM)


def omega_p2_superset(f: BinaryQuadraticForm, g: BinaryQuadraticForm, p: int) -> Tuple[int, int, int]:
    """(count, Hf, Hg) for the classes with f = 0 or g = 0 mod p^2.

    Hf and Hg are brute-forced and checked against the closed form.
    """
    _require_good(f, g, p)
    Hf, Hg = half_tally(f, p).deep_root, half_tally(g, p).deep_root
    for form, H in ((f, Hf), (g, Hg)):
        expected = deep_root_closed(form, p)
        if H != expected:
            raise AssertionError(f"deep-root count {H} != {expected} for {form} at p={p}")
    return superset_count(Hf, Hg, p), Hf, Hg


def in_omega_prime(F: int, G: int, p: int) -> bool:
    """Membership of a primitive (u, v) in Omega'_p, given F = f(u) and G = g(v)."""
    q = p * p
    Fm, Gm = F % q, G % q
    f_lift = Fm % p == 0 and Fm != 0
    g_lift = Gm % p == 0 and Gm != 0
    if f_lift and g_lift:
        return legendre(-(Fm // p) * (Gm // p), p) == -1
    if f_lift:
        return legendre(Gm, p) == -1
    if g_lift:
        return legendre(Fm, p) == -1
    return False


# ---------------------------------------------------------------------------
# sampled check that Omega'_p classes are insoluble


@dataclass
class SampleResult:
    u: Tuple[int, int]
    v: Tuple[int, int]
    F: int
    G: int
    component: str
    insoluble: bool


@dataclass
class SampleReport:
    p: int
    vacuous: bool = False
    samples: List[SampleResult] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(s.insoluble for s in self.samples)

    @property
    def ok(self) -> bool:
        return self.vacuous or self.passed == len(self.samples)


def _lift(cls, q: int, span: int, rng: random.Random) -> Tuple[int, int]:
    m = max(1, span // q)
    while True:
        x = int(cls[0]) + q * rng.randint(-m, m)
        y = int(cls[1]) + q * rng.randint(-m, m)
        if math.gcd(x, y) == 1:
            return x, y


def lemma41_sample(
    f: BinaryQuadraticForm,
    g: BinaryQuadraticForm,
    p: int,
    n: int,
    seed: int = 0,
    span: int = 10**6,
) -> SampleReport:
    """Draw n uniform classes of Omega'_p, lift each to primitive integers within
    ``span`` and check the fibre is insoluble over Q_p."""
    _require_good(f, g, p)
    sizes = omega_exact(f, g, p)
    report = SampleReport(p)
    if sizes.omega_prime == 0:
        report.vacuous = True
        return report
    rng = random.Random(seed)
    cf, cg = half_classes(f, p), half_classes(g, p)
    mask = _bad_kl_pairs(p)
    kl = [(int(k), int(l)) for k, l in zip(*np.nonzero(mask)) if int(k) in cf and int(l) in cg]
    kl_w = [len(cf[k]) * len(cg[l]) for k, l in kl]
    lifted_f = np.concatenate([cf[k] for k in range(1, p) if k in cf]) if sizes.omega_f else None
    lifted_g = np.concatenate([cg[k] for k in range(1, p) if k in cg]) if sizes.omega_g else None
    q = p * p
    comps = ["f", "g", "fg"]
    weights = [sizes.omega_f, sizes.omega_g, sizes.omega_fg]
    for _ in range(n):
        comp = rng.choices(comps, weights)[0]
        if comp == "f":
            uc = lifted_f[rng.randrange(len(lifted_f))]
            vc = cg["nonresidue"][rng.randrange(len(cg["nonresidue"]))]
        elif comp == "g":
            uc = cf["nonresidue"][rng.randrange(len(cf["nonresidue"]))]
            vc = lifted_g[rng.randrange(len(lifted_g))]
        else:
            k, l = rng.choices(kl, kl_w)[0]
            uc = cf[k][rng.randrange(len(cf[k]))]
            vc = cg[l][rng.randrange(len(cg[l]))]
        u, v = _lift(uc, q, span, rng), _lift(vc, q, span, rng)
        F, G = f(*u), g(*v)
        report.samples.append(SampleResult(u, v, F, G, comp, not conic_soluble_at(F, G, p)))
    return report

"""Splitting densities, the large-sieve saving function and growth predictions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .forms import BinaryQuadraticForm, FormPairProfile, ProfileCase, pair_profile, splits_at
from .localarith import kronecker, primes_upto
from .residues import deep_root_closed, half_tally, is_good_prime, omega_exact, superset_count

BRUTE_DEEP_ROOT_LIMIT = 13


class SieveMode(enum.Enum):
    OMEGA_PRIME = "OmegaPrime"
    OMEGA_PRIME_PLUS_SUPERSET = "OmegaPrimePlusSuperset"


# ---------------------------------------------------------------------------
# densities


@dataclass
class DensityEstimate:
    P: int
    n_primes: int
    only_f: int
    only_g: int
    both: int
    exact: Tuple[Fraction, Fraction, Fraction]

    @property
    def neither(self) -> int:
        return self.n_primes - self.only_f - self.only_g - self.both

    @property
    def frequencies(self) -> Tuple[float, float, float]:
        n = self.n_primes or 1
        return (self.only_f / n, self.only_g / n, self.both / n)

    def max_deviation(self) -> float:
        return max(abs(x - float(e)) for x, e in zip(self.frequencies, self.exact))

    def csv(self) -> str:
        fr = self.frequencies
        ex = self.exact
        return ("P,freq_only_f,freq_only_g,freq_both,exact_d1,exact_d2,exact_d3\n"
                f"{self.P},{fr[0]:.6f},{fr[1]:.6f},{fr[2]:.6f},{ex[0]},{ex[1]},{ex[2]}\n")


def _chi_table(d: int, primes: np.ndarray) -> np.ndarray:
    return np.array([kronecker(d, p) for p in primes.tolist()], dtype=np.int8)


def _good_primes(f: BinaryQuadraticForm, g: BinaryQuadraticForm, P: int) -> np.ndarray:
    ps = primes_upto(P)
    bad = 2 * f.disc * g.disc
    return ps[(ps > 2) & (bad % ps != 0)]


def densities_empirical(f: BinaryQuadraticForm, g: BinaryQuadraticForm, P: int) -> DensityEstimate:
    """Frequencies of good primes p <= P splitting only f, only g, or both."""
    if P < 1000:
        raise ValueError("P must be at least 1000")
    ps = _good_primes(f, g, P)
    sf = _chi_table(f.disc, ps) == 1
    sg = _chi_table(g.disc, ps) == 1
    prof = pair_profile(f, g)
    return DensityEstimate(
        P, len(ps),
        int((sf & ~sg).sum()), int((~sf & sg).sum()), int((sf & sg).sum()),
        (prof.delta1, prof.delta2, prof.delta3),
    )


# ---------------------------------------------------------------------------
# saving function


def local_factor(f: BinaryQuadraticForm, g: BinaryQuadraticForm, p: int,
                 mode: SieveMode = SieveMode.OMEGA_PRIME) -> Fraction:
    """h(p) = |Y_p| / (p^8 - |Y_p|) exactly; zero at bad primes."""
    if not is_good_prime(f, g, p):
        return Fraction(0)
    Y = omega_exact(f, g, p).omega_prime
    if mode is SieveMode.OMEGA_PRIME_PLUS_SUPERSET:
        Y += _superset(f, g, p)
    return Fraction(Y, p**8 - Y)


def _superset(f, g, p) -> int:
    if p <= BRUTE_DEEP_ROOT_LIMIT:
        return superset_count(half_tally(f, p).deep_root, half_tally(g, p).deep_root, p)
    return superset_count(deep_root_closed(f, p), deep_root_closed(g, p), p)


def local_densities(f: BinaryQuadraticForm, g: BinaryQuadraticForm, L: int,
                    mode: SieveMode = SieveMode.OMEGA_PRIME) -> Tuple[np.ndarray, np.ndarray]:
    """(primes <= L, h(p)) in floating point, computed from |Y_p| / p^8 to avoid p^8 overflow."""
    ps = primes_upto(L)
    h = np.zeros(len(ps))
    good = (ps > 2) & ((2 * f.disc * g.disc) % ps != 0)
    gp = ps[good]
    if len(gp) == 0:
        return ps, h
    x = 1.0 / gp.astype(np.float64)
    chi_f = _chi_table(f.disc, gp).astype(np.float64)
    chi_g = _chi_table(g.disc, gp).astype(np.float64)
    sf, sg = chi_f == 1, chi_g == 1
    base = x * (1 - x) ** 3                       # p^3 (p-1)^3 / p^7
    y = np.where(sf, base * (1 - chi_g * x), 0.0)
    y += np.where(sg, base * (1 - chi_f * x), 0.0)
    y += np.where(sf & sg, 2 * x * x * (1 - x) ** 4, 0.0)
    if mode is SieveMode.OMEGA_PRIME_PLUS_SUPERSET:
        # H = (1 + chi) p (p - 1); with t = H / p^2 the superset density is
        # (tf + tg)(1 - x^2) x^2 - tf tg x^4
        tf = (1 + chi_f) * (1 - x)
        tg = (1 + chi_g) * (1 - x)
        sup = (tf + tg) * (1 - x * x) * x * x - tf * tg * x**4
        # small primes use the brute-forced deep-root counts
        for i in np.flatnonzero(gp <= BRUTE_DEEP_ROOT_LIMIT):
            p = int(gp[i])
            sup[i] = float(Fraction(_superset(f, g, p), p**8))
        y += sup
    h[good] = y / (1 - y)
    return ps, h


@dataclass
class SieveSeries:
    mode: SieveMode
    L_grid: List[int]
    F_of_L: List[float]
    primes: np.ndarray = field(repr=False)
    h: np.ndarray = field(repr=False)
    F_full: Optional[np.ndarray] = field(default=None, repr=False)

    def F(self, L: int) -> float:
        if self.F_full is not None and L < len(self.F_full):
            return float(self.F_full[L])
        raise KeyError(L)

    def csv(self) -> str:
        lines = ["L,F_L"] + [f"{L},{F:.12g}" for L, F in zip(self.L_grid, self.F_of_L)]
        return "\n".join(lines) + "\n"


def saving_function(f: BinaryQuadraticForm, g: BinaryQuadraticForm, L_grid: Sequence[int],
                    mode: SieveMode = SieveMode.OMEGA_PRIME) -> SieveSeries:
    """F(L) = sum over squarefree m <= L of prod_{p | m} h(p), for each L in the grid.

    h is multiplicative and supported on squarefree m, so one pass of a
    multiplicative sieve over [1, max L] followed by a cumulative sum gives
    every F(L) at once.
    """
    grid = sorted(int(L) for L in L_grid)
    if not grid or grid[0] < 1:
        raise ValueError("L grid must contain positive integers")
    Lmax = grid[-1]
    ps, h = local_densities(f, g, Lmax, mode)
    hm = np.ones(Lmax + 1)
    hm[0] = 0.0
    for p, hp in zip(ps.tolist(), h.tolist()):
        hm[p::p] *= hp
        if p * p <= Lmax:
            hm[p * p :: p * p] = 0.0
    F = np.cumsum(hm)
    return SieveSeries(mode, grid, [float(F[L]) for L in grid], ps, h, F)


def log_grid(lo: int = 10**3, hi: int = 10**6, n: int = 61) -> List[int]:
    return sorted(set(int(round(x)) for x in np.logspace(math.log10(lo), math.log10(hi), n)))


@dataclass
class ExponentFit:
    exponent: float
    stderr: float
    window: Tuple[int, int]
    n_points: int
    corrected_exponent: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "stderr": self.stderr,
            "window": list(self.window),
            "n_points": self.n_points,
            "corrected_exponent": self.corrected_exponent,
        }


def _corrected_exponent(L: np.ndarray, F: np.ndarray) -> float:
    # best D for F ~ (log L)^D (c0 + c1 / log L), scanning D on a 0.001 grid
    l = np.log(L)
    best = (math.inf, float("nan"))
    for D in np.arange(0.0, 4.0, 0.001):
        A = np.stack([l**D, l ** (D - 1)], axis=1)
        c, *_ = np.linalg.lstsq(A, F, rcond=None)
        r = float(np.sum(((A @ c - F) / F) ** 2))
        if r < best[0]:
            best = (r, float(D))
    return round(best[1], 3)


def fit_exponent(series: SieveSeries, window: Tuple[int, int] = (10**3, 10**6),
                 corrected: bool = True) -> ExponentFit:
    """Least-squares slope of log F(L) against log log L over the window."""
    lo, hi = window
    pts = [(L, F) for L, F in zip(series.L_grid, series.F_of_L) if lo <= L <= hi]
    if len(pts) < 3:
        raise ValueError("need at least three grid points inside the window")
    L = np.array([p[0] for p in pts], dtype=np.float64)
    F = np.array([p[1] for p in pts], dtype=np.float64)
    if np.allclose(F, F[0], rtol=0, atol=1e-15):
        raise ValueError("degenerate window: F(L) is constant")
    x, y = np.log(np.log(L)), np.log(F)
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = max(1, len(x) - 2)
    stderr = math.sqrt(float(resid @ resid) / dof / float(((x - x.mean()) ** 2).sum()))
    return ExponentFit(
        float(coef[0]), stderr, (int(L[0]), int(L[-1])), len(pts),
        _corrected_exponent(L, F) if corrected else None,
    )


def large_sieve_rhs(N: Sequence[float], L: int, series: SieveSeries) -> float:
    """prod_j (sqrt(N_j) + L^2)^2 / F(L) for a four-dimensional box, s = 2."""
    if len(N) != 4:
        raise ValueError("need four box side lengths")
    FL = series.F(L)
    if FL <= 0:
        raise ValueError("F(L) must be positive")
    out = 1.0
    for n in N:
        out *= (math.sqrt(n) + L * L) ** 2
    return out / FL


def predicted_growth(profile: FormPairProfile, B: float) -> float:
    """B / log B, B / sqrt(log B) or B, according to how many forms split over Q."""
    if B < 2:
        raise ValueError("B must be at least 2")
    if profile.case is ProfileCase.BOTH_SPLIT_Q:
        return B / math.log(B)
    if profile.case is ProfileCase.EXACTLY_ONE_SPLITS_Q:
        return B / math.sqrt(math.log(B))
    return float(B)

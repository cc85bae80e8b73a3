"""Counting soluble fibres of f(u)x^2 + g(v)y^2 = z^2 over P^1(Q) x P^1(Q).

A point (u, v) has height H = h(u) h(v) with h(u) = max(|u1|, |u2|)^2, so
H <= B exactly when size(u) * size(v) <= isqrt(B).  Points are grouped by
size and, within a size, by the value of the form: solubility and the
thin-set flags only depend on the two values, and in fact only on their
squarefree kernels.
"""

from __future__ import annotations

import io
import math
import multiprocessing as mp
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .forms import BinaryQuadraticForm
from .localarith import (
    Place,
    conic_everywhere_soluble,
    is_square,
    kernel_and_primes,
    primes_upto,
    soluble_from_kernels,
    squarefree_kernel,
)
from .points import ProjPoint, points_of_size
from .residues import is_good_prime

DEFAULT_MAX_B = 10**7
DEFAULT_MEMO_LIMIT = 1 << 21
CSV_HEADER = "B,points_total,N,Nstar,thin1,thin2,seconds"

_KEY_SHIFT = 1 << 62


class BudgetError(RuntimeError):
    """Raised when a requested run exceeds the configured resource budget."""


@dataclass(frozen=True)
class FibreClass:
    F: int
    G: int
    soluble: bool
    thin1: bool
    thin2: bool
    obstructed_places: Tuple[Place, ...] = ()


def classify_fibre(f: BinaryQuadraticForm, g: BinaryQuadraticForm, u, v) -> FibreClass:
    F, G = f(*u), g(*v)
    try:
        verdict = conic_everywhere_soluble(F, G, witness=False)
    except ArithmeticError as exc:
        raise ArithmeticError(f"fibre at u={tuple(u)}, v={tuple(v)}: {exc}") from exc
    thin1 = is_square(F) or is_square(G)
    thin2 = F == 0 or G == 0 or squarefree_kernel(F) == squarefree_kernel(G)
    return FibreClass(F, G, verdict.globally_soluble, thin1, thin2, verdict.obstructed_places)


# ---------------------------------------------------------------------------
# count reports


@dataclass
class CountRow:
    B: int
    points_total: int = 0
    N: int = 0
    Nstar: int = 0
    thin1: int = 0
    thin2: int = 0
    seconds: float = 0.0

    def csv(self) -> str:
        return (f"{self.B},{self.points_total},{self.N},{self.Nstar},"
                f"{self.thin1},{self.thin2},{self.seconds:.3f}")


@dataclass
class CountReport:
    f: BinaryQuadraticForm
    g: BinaryQuadraticForm
    rows: List[CountRow]
    memo_hits: int = 0
    memo_misses: int = 0
    workers: int = 1

    @property
    def hit_rate(self) -> float:
        total = self.memo_hits + self.memo_misses
        return self.memo_hits / total if total else 0.0

    def to_csv(self, timing: bool = True) -> str:
        out = io.StringIO()
        out.write(CSV_HEADER + "\n")
        for row in self.rows:
            line = row.csv()
            if not timing:
                line = line.rsplit(",", 1)[0] + ",0.000"
            out.write(line + "\n")
        return out.getvalue()


# ---------------------------------------------------------------------------
# per-form data grouped by size and value


class _Side:
    """Point classes of one factor P^1, grouped by size and by form value.

    ``squares`` holds per-size multiplicities of values that are squares
    (``zeros`` of value 0); ``classes`` is the flat list of non-square
    value classes (kernel, primes, multiplicity) with ``offsets[m]`` the
    first index of size m.
    """

    def __init__(self, form: BinaryQuadraticForm, R: int):
        self.R = R
        cache = {}
        classes = []
        offsets = [0, 0]
        totals = [0]
        squares = [0]
        zeros = [0]
        for m in range(1, R + 1):
            counts = {}
            for u in points_of_size(m):
                F = form(u[0], u[1])
                counts[F] = counts.get(F, 0) + 1
            sq = zr = 0
            for F in sorted(counts):
                mult = counts[F]
                if F == 0:
                    zr += mult
                    sq += mult
                    continue
                kp = cache.get(F)
                if kp is None:
                    kp = cache[F] = kernel_and_primes(F)
                if kp[0] == 1:
                    sq += mult
                else:
                    classes.append((kp[0], kp[1], mult))
            offsets.append(len(classes))
            totals.append(sum(counts.values()))
            squares.append(sq)
            zeros.append(zr)
        self.classes = classes
        self.offsets = offsets
        self.cum_total = np.cumsum(totals).tolist()
        self.cum_square = np.cumsum(squares).tolist()
        self.cum_zero = np.cumsum(zeros).tolist()
        self.cum_class = [0]
        for c in classes:
            self.cum_class.append(self.cum_class[-1] + c[2])

    def u_units(self, R: int):
        """Every size-m value class for the u side as (m, kernel, primes, mult, square, zero)."""
        units = []
        for m in range(1, R + 1):
            units.append((m, 0, (), self.cum_zero[m] - self.cum_zero[m - 1]))
            units.append((m, 1, (), (self.cum_square[m] - self.cum_square[m - 1])
                          - (self.cum_zero[m] - self.cum_zero[m - 1])))
            for k, ps, mult in self.classes[self.offsets[m]:self.offsets[m + 1]]:
                units.append((m, k, ps, mult))
        return [u for u in units if u[3]]


_STATE = {}


def _run_units(unit_ids: Sequence[int], radii: Sequence[int], memo_limit: int):
    U = _STATE["units"]
    V: _Side = _STATE["v"]
    nst = len(radii)
    tally = np.zeros((nst, 5), dtype=np.int64)
    elapsed = [0.0] * nst
    memo = {}
    hits = misses = 0
    t0 = time.perf_counter()
    prev = 0
    classes, off = V.classes, V.offsets
    ctot, csq, czero, ccls = V.cum_total, V.cum_square, V.cum_zero, V.cum_class
    for s, r in enumerate(radii):
        row = tally[s]
        tot = N = Nstar = th1 = th2 = 0
        for i in unit_ids:
            m, kf, pf, mu = U[i]
            hi = r // m
            lo = prev // m
            if hi <= lo:
                continue
            n_all = ctot[hi] - ctot[lo]
            n_sq = csq[hi] - csq[lo]
            tot += mu * n_all
            if kf == 0:
                N += mu * n_all
                th1 += mu * n_all
                th2 += mu * n_all
                continue
            if kf == 1:
                N += mu * n_all
                th1 += mu * n_all
                th2 += mu * n_sq
                continue
            # square v-values: soluble and thin1; thin2 only for G = 0
            N += mu * n_sq
            th1 += mu * n_sq
            th2 += mu * (czero[hi] - czero[lo])
            a, b = off[lo + 1], off[hi + 1]
            n_sol = n_eq = 0
            base = kf * _KEY_SHIFT
            for kg, pg, mv in classes[a:b]:
                if kg == kf:
                    n_eq += mv
                if kf < 0 and kg < 0:
                    continue
                key = base + kg
                sol = memo.get(key)
                if sol is None:
                    misses += 1
                    sol = soluble_from_kernels(kf, pf, kg, pg)
                    if len(memo) >= memo_limit:
                        memo.clear()
                    memo[key] = sol
                else:
                    hits += 1
                if sol:
                    n_sol += mv
            N += mu * n_sol
            Nstar += mu * n_sol
            th2 += mu * n_eq
        row += (tot, N, Nstar, th1, th2)
        elapsed[s] = time.perf_counter() - t0
        prev = r
    return tally, elapsed, hits, misses


def _partition(units, V: _Side, R: int, workers: int) -> List[List[int]]:
    work = [mu * (V.cum_class[V.offsets[R // m + 1]] + 1) for m, _, _, mu in units]
    bins: List[List[int]] = [[] for _ in range(workers)]
    load = [0] * workers
    for i in sorted(range(len(units)), key=lambda i: (-work[i], i)):
        j = min(range(workers), key=lambda j: (load[j], j))
        bins[j].append(i)
        load[j] += work[i]
    return [sorted(b) for b in bins]


def count(
    f: BinaryQuadraticForm,
    g: BinaryQuadraticForm,
    B_grid: Sequence[int],
    workers: int = 1,
    max_B: int = DEFAULT_MAX_B,
    memo_limit: int = DEFAULT_MEMO_LIMIT,
) -> CountReport:
    """N, N*, thin-set counts and the number of points with H <= B for every B in the grid."""
    grid = [int(B) for B in B_grid]
    if not grid or any(B < 1 for B in grid) or grid != sorted(grid):
        raise ValueError("B grid must be a non-empty ascending list of positive integers")
    if grid[-1] > max_B:
        raise BudgetError(f"B={grid[-1]} exceeds the budget max_B={max_B}")
    R = math.isqrt(grid[-1])
    f.check_bound(R)
    g.check_bound(R)
    t_setup = time.perf_counter()
    u_side = _Side(f, R)
    v_side = u_side if g == f else _Side(g, R)
    units = u_side.u_units(R)
    radii = [math.isqrt(B) for B in grid]
    setup = time.perf_counter() - t_setup
    _STATE.update(units=units, v=v_side)
    try:
        if workers <= 1:
            results = [_run_units(range(len(units)), radii, memo_limit)]
        else:
            parts = _partition(units, v_side, R, workers)
            ctx = mp.get_context("fork")
            with ctx.Pool(workers) as pool:
                results = pool.starmap(_run_units, [(p, radii, memo_limit) for p in parts])
    finally:
        _STATE.clear()
    tally = sum(r[0] for r in results)
    rows = []
    cum = np.cumsum(tally, axis=0)
    for s, B in enumerate(grid):
        secs = setup + max(r[1][s] for r in results)
        rows.append(CountRow(B, *(int(x) for x in cum[s]), seconds=secs))
    return CountReport(
        f, g, rows,
        memo_hits=sum(r[2] for r in results),
        memo_misses=sum(r[3] for r in results),
        workers=max(1, workers),
    )


# ---------------------------------------------------------------------------
# dyadic boxes sieved by Omega'_p


@dataclass(frozen=True)
class DyadicBox:
    """The box T_i <= u_i <= 2 T_i, S_i <= v_i <= 2 S_i in positive coordinates."""

    T1: int
    T2: int
    S1: int
    S2: int
    cutoff: Optional[float] = None

    def __post_init__(self):
        for side in (self.T1, self.T2, self.S1, self.S2):
            if side < 1 or side & (side - 1):
                raise ValueError("box sides must be positive powers of two")
        if self.cutoff is not None and self.cutoff < 2:
            raise ValueError("cutoff must be at least 2")

    @property
    def R(self) -> int:
        return min(self.T1, self.T2, self.S1, self.S2)

    @property
    def sieve_limit(self) -> float:
        return self.cutoff if self.cutoff is not None else max(2.0, self.R ** 0.01)


def _box_points(T1: int, T2: int) -> np.ndarray:
    a = np.arange(T1, 2 * T1 + 1, dtype=np.int64)
    b = np.arange(T2, 2 * T2 + 1, dtype=np.int64)
    A, Bm = np.meshgrid(a, b, indexing="ij")
    A, Bm = A.ravel(), Bm.ravel()
    keep = np.gcd(A, Bm) == 1
    return np.stack([A[keep], Bm[keep]], axis=1)


def _residue_state(values: np.ndarray, p: int) -> np.ndarray:
    # 0 unit square, 1 unit non-residue, 2 divisible by p^2, 2 + k for value = p*k mod p^2
    q = p * p
    r = values % q
    nonres = np.ones(p, dtype=bool)
    nonres[0] = False
    nonres[(np.arange(1, p) ** 2) % p] = False
    state = np.where(nonres[r % p], 1, 0)
    div = r % p == 0
    state = np.where(div, 2 + r // p, state)
    return state


def _bad_state_table(p: int) -> np.ndarray:
    n = p + 2
    table = np.zeros((n, n), dtype=bool)
    nonres = np.ones(p, dtype=bool)
    nonres[0] = False
    nonres[(np.arange(1, p) ** 2) % p] = False
    table[3:, 1] = True
    table[1, 3:] = True
    k = np.arange(1, p)
    table[3:, 3:] = nonres[(-(k[:, None] * k[None, :])) % p]
    return table


def dyadic_sieved_count(f: BinaryQuadraticForm, g: BinaryQuadraticForm, box: DyadicBox) -> int:
    """Primitive (u, v) in the box avoiding Omega'_p for every good odd p <= cutoff."""
    U = _box_points(box.T1, box.T2)
    V = _box_points(box.S1, box.S2)
    Fv = f.a * U[:, 0] ** 2 + f.b * U[:, 0] * U[:, 1] + f.c * U[:, 1] ** 2
    Gv = g.a * V[:, 0] ** 2 + g.b * V[:, 0] * V[:, 1] + g.c * V[:, 1] ** 2
    alive = np.ones((len(U), len(V)), dtype=bool)
    for p in primes_upto(int(box.sieve_limit)):
        p = int(p)
        if not is_good_prime(f, g, p):
            continue
        table = _bad_state_table(p)
        su, sv = _residue_state(Fv, p), _residue_state(Gv, p)
        alive &= ~table[su[:, None], sv[None, :]]
    return int(alive.sum())

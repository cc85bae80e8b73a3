"""Primitive representatives of P^1(Q) and the anticanonical height on P^1 x P^1."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, List, NamedTuple

import numpy as np


class ProjPoint(NamedTuple):
    """Coprime (u1, u2) with u2 > 0, or the point at infinity (1, 0)."""

    u1: int
    u2: int

    @property
    def size(self) -> int:
        return max(abs(self.u1), abs(self.u2))

    def height(self) -> int:
        return self.size ** 2


def canonicalize(u1: int, u2: int) -> ProjPoint:
    if u1 == 0 and u2 == 0:
        raise ValueError("(0, 0) is not a point of P^1")
    g = math.gcd(u1, u2)
    u1, u2 = u1 // g, u2 // g
    if u2 < 0 or (u2 == 0 and u1 < 0):
        u1, u2 = -u1, -u2
    return ProjPoint(u1, u2)


def points_of_size(m: int) -> List[ProjPoint]:
    """The canonical points with max(|u1|, |u2|) exactly m, lexicographically ordered."""
    if m < 1:
        return []
    if m == 1:
        return [ProjPoint(-1, 1), ProjPoint(0, 1), ProjPoint(1, 0), ProjPoint(1, 1)]
    out = []
    for u1 in range(-m, m + 1):
        if abs(u1) == m:
            # u1 = +-m with 0 < u2 < m
            out.extend(ProjPoint(u1, u2) for u2 in range(1, m) if math.gcd(u2, m) == 1)
        elif math.gcd(u1, m) == 1:
            out.append(ProjPoint(u1, m))
    return out


def enumerate_points(T: int, start: int = 1) -> Iterator[ProjPoint]:
    """Every point of P^1(Q) with max(|u1|, |u2|) <= T, once, ordered by size then lexicographically.

    ``start`` restricts to sizes >= start, so disjoint size ranges can be
    streamed independently.
    """
    if T < 1:
        raise ValueError("T must be positive")
    for m in range(max(start, 1), T + 1):
        yield from points_of_size(m)


def count_points(T: int) -> int:
    """Closed count 4 + sum_{2<=m<=T} 4*phi(m) of :func:`enumerate_points`."""
    if T < 1:
        return 0
    phi = np.arange(T + 1, dtype=np.int64)
    for p in range(2, T + 1):
        if phi[p] == p:
            phi[p::p] -= phi[p::p] // p
    return int(4 + 4 * phi[2:].sum())


@dataclass(frozen=True)
class SurfacePoint:
    u: ProjPoint
    v: ProjPoint

    def height(self) -> int:
        return height(self)


def height(sp: SurfacePoint) -> int:
    return sp.u.size ** 2 * sp.v.size ** 2

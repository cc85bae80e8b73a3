"""Integral binary quadratic forms a*u1^2 + b*u1*u2 + c*u2^2."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .localarith import conic_everywhere_soluble, is_square, kronecker, squarefree_kernel

INT64_LIMIT = (1 << 63) - 1

_LITERAL = re.compile(r"^[+-]?\d+,[+-]?\d+,[+-]?\d+$")


@dataclass(frozen=True)
class BinaryQuadraticForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.disc == 0:
            raise ValueError(f"form {self.literal()} has zero discriminant")

    @classmethod
    def parse(cls, text: str) -> "BinaryQuadraticForm":
        """Parse the literal ``"a,b,c"`` (no spaces)."""
        if not _LITERAL.match(text.strip()):
            raise ValueError(f"malformed form literal {text!r}, expected a,b,c")
        a, b, c = (int(t) for t in text.strip().split(","))
        return cls(a, b, c)

    def literal(self) -> str:
        return f"{self.a},{self.b},{self.c}"

    def __str__(self):
        return self.literal()

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def norm(self) -> int:
        """Largest absolute value of a coefficient."""
        return max(abs(self.a), abs(self.b), abs(self.c))

    def __call__(self, u1: int, u2: int) -> int:
        return self.a * u1 * u1 + self.b * u1 * u2 + self.c * u2 * u2

    def check_bound(self, T: int, limit: int = INT64_LIMIT) -> None:
        """Reject enumeration bounds T for which values may leave a machine word."""
        if 3 * self.norm * T * T > limit:
            raise OverflowError(
                f"3*|f|*T^2 exceeds {limit} for f={self.literal()}, T={T}")

    def substitute(self, p: int, q: int, r: int, s: int) -> "BinaryQuadraticForm":
        """The form f(p*u1 + q*u2, r*u1 + s*u2)."""
        a, b, c = self.a, self.b, self.c
        return BinaryQuadraticForm(
            a * p * p + b * p * r + c * r * r,
            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            a * q * q + b * q * s + c * s * s,
        )


def evaluate(F: BinaryQuadraticForm, u1: int, u2: int) -> int:
    return F(u1, u2)


def discriminant(F: BinaryQuadraticForm) -> int:
    return F.disc


@dataclass(frozen=True)
class SplittingClass:
    """Square class of the discriminant; ``field == 1`` means the form splits over Q.

    Otherwise the form splits over Q(sqrt(field)).
    """

    field: int

    @property
    def over_q(self) -> bool:
        return self.field == 1

    def __str__(self):
        return "Q" if self.over_q else f"Q(sqrt({self.field}))"


def splitting_class(F: BinaryQuadraticForm) -> SplittingClass:
    d = F.disc
    if is_square(d):
        return SplittingClass(1)
    return SplittingClass(squarefree_kernel(d))


def splits_at(F: BinaryQuadraticForm, p: int) -> bool:
    """Whether F factors into distinct linear forms mod the odd good prime p."""
    if p % 2 == 0 or p < 3 or F.disc % p == 0:
        raise ValueError(f"splits_at needs an odd prime not dividing {F.disc}, got {p}")
    return kronecker(F.disc, p) == 1


def represents_square(F: BinaryQuadraticForm) -> bool:
    """Whether F(u1, u2) is a square (0 included) for some primitive (u1, u2).

    With a != 0, completing the square gives
    (2a*u1 + b*u2)^2 - D*u2^2 = 4a*w^2, so the question is whether the conic
    D*Y^2 + 4a*W^2 = X^2 has a rational point.
    """
    if splitting_class(F).over_q:
        return True
    if F.a == 0:
        F = F.substitute(0, 1, 1, 0) if F.c != 0 else F.substitute(1, 0, 1, 1)
    return conic_everywhere_soluble(F.disc, 4 * F.a, witness=False).globally_soluble


class ProfileCase(enum.Enum):
    BOTH_SPLIT_Q = "BothSplitQ"
    EXACTLY_ONE_SPLITS_Q = "ExactlyOneSplitsQ"
    NEITHER_SAME_FIELD = "NeitherSplitsQ_SameField"
    NEITHER_DIFFERENT_FIELDS = "NeitherSplitsQ_DifferentFields"


@dataclass(frozen=True)
class FormPairProfile:
    case: ProfileCase
    delta1: Fraction  # primes splitting f only
    delta2: Fraction  # primes splitting g only
    delta3: Fraction  # primes splitting both
    f_split_q: bool = False
    g_split_q: bool = False

    @property
    def delta_pi(self) -> Fraction:
        return self.delta1 + self.delta2 + 2 * self.delta3


_HALF, _QUARTER = Fraction(1, 2), Fraction(1, 4)


def pair_profile(f: BinaryQuadraticForm, g: BinaryQuadraticForm) -> FormPairProfile:
    sf, sg = splitting_class(f), splitting_class(g)
    if sf.over_q and sg.over_q:
        return FormPairProfile(ProfileCase.BOTH_SPLIT_Q, Fraction(0), Fraction(0), Fraction(1), True, True)
    if sf.over_q:
        return FormPairProfile(ProfileCase.EXACTLY_ONE_SPLITS_Q, _HALF, Fraction(0), _HALF, True, False)
    if sg.over_q:
        return FormPairProfile(ProfileCase.EXACTLY_ONE_SPLITS_Q, Fraction(0), _HALF, _HALF, False, True)
    if sf.field == sg.field:
        return FormPairProfile(ProfileCase.NEITHER_SAME_FIELD, Fraction(0), Fraction(0), _HALF)
    return FormPairProfile(ProfileCase.NEITHER_DIFFERENT_FIELDS, _QUARTER, _QUARTER, _QUARTER)

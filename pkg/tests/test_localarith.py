import random

import pytest
from hypothesis import assume, given, strategies as st

from conicfibres.localarith import (
    REAL,
    Place,
    conic_everywhere_soluble,
    conic_soluble_at,
    factorize,
    find_point,
    hilbert,
    is_prime,
    kronecker,
    legendre,
    relevant_places,
    squarefree_kernel,
    valuation,
)

nonzero = st.integers(-10**4, 10**4).filter(bool)


def test_factorize_and_kernel():
    assert dict(factorize(360).factors) == {2: 3, 3: 2, 5: 1}
    assert factorize(-12).sign == -1
    n = (2**61 - 1) * 1_000_003
    assert factorize(n).value() == n
    assert squarefree_kernel(-72) == -2
    assert squarefree_kernel(50) == 2
    with pytest.raises(ValueError):
        squarefree_kernel(0)


def test_primality():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert is_prime(2**61 - 1) and not is_prime(3215031751)


def test_kronecker_against_legendre():
    for p in (3, 5, 7, 11, 101):
        for a in range(-20, 20):
            assert kronecker(a, p) == legendre(a, p)
    assert kronecker(2, 8) == 0 and kronecker(-1, -1) == -1 and kronecker(5, 2) == -1
    with pytest.raises(ValueError):
        kronecker(3, 0)


@given(nonzero, nonzero)
def test_product_formula(a, b):
    prod = 1
    for v in relevant_places(a, b):
        prod *= hilbert(a, b, v)
    assert prod == 1


@given(nonzero, nonzero, nonzero, st.sampled_from([0, 2, 3, 5, 7]))
def test_bimultiplicative(a, b, c, p):
    assert hilbert(a * b, c, p) == hilbert(a, c, p) * hilbert(b, c, p)


@given(nonzero, st.sampled_from([0, 2, 3, 5, 13]))
def test_a_minus_a(a, p):
    assert hilbert(a, -a, p) == 1
    if a != 1:
        assert hilbert(a, 1 - a, p) == 1


def test_hilbert_examples():
    assert hilbert(-1, -1, REAL) == -1
    assert hilbert(-1, -1, 2) == -1
    assert hilbert(3, 5, 3) == -1
    assert hilbert(2, 7, 7) == 1


def test_places():
    assert str(Place(0)) == "inf" and str(Place(5)) == "5"
    with pytest.raises(ValueError):
        Place(4)


def test_conic_examples():
    v = conic_everywhere_soluble(2, 7)
    assert v.globally_soluble and v.witness == (1, 1, 3)
    bad = conic_everywhere_soluble(3, 5)
    assert {str(p) for p in bad.obstructed_places} == {"3", "5"}
    assert conic_everywhere_soluble(0, 5).degenerate


@given(st.integers(-200, 200).filter(bool), st.integers(-200, 200).filter(bool))
def test_witness_satisfies_equation(F, G):
    pt = find_point(F, G)
    if pt is not None:
        x, y, z = pt
        assert F * x * x + G * y * y == z * z and (x, y, z) != (0, 0, 0)


@given(st.integers(-10**6, 10**6).filter(bool), st.sampled_from([2, 3, 5, 7]))
def test_valuation(n, p):
    k = valuation(n, p)
    assert n % p**k == 0 and n % p ** (k + 1) != 0


def test_local_solubility_depends_on_square_class():
    rng = random.Random(1)
    for _ in range(200):
        F, G = rng.randint(-50, 50) or 1, rng.randint(-50, 50) or 1
        for p in (0, 2, 3, 5):
            assert conic_soluble_at(F, G, p) == conic_soluble_at(F * 49, G * 121, p)

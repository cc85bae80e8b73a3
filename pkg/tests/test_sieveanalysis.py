import math
from fractions import Fraction

import pytest

from conicfibres.fibrecount import DyadicBox, dyadic_sieved_count
from conicfibres.forms import BinaryQuadraticForm as Q, pair_profile
from conicfibres.sieveanalysis import (
    SieveMode,
    densities_empirical,
    fit_exponent,
    large_sieve_rhs,
    local_densities,
    local_factor,
    log_grid,
    predicted_growth,
    saving_function,
)

# empirical constant for dyadic_sieved_count <= K * large_sieve_rhs, recorded not proven
K_DYADIC = 50


def test_local_factor_example():
    f = Q(1, 0, -1)
    assert local_factor(f, f, 3) == Fraction(128, 601)
    assert local_factor(f, Q(1, 0, 1), 2) == 0
    assert local_factor(Q(1, 0, 1), Q(1, 0, 3), 3) == 0


@pytest.mark.parametrize("mode", list(SieveMode))
def test_float_density_matches_exact(mode):
    f, g = Q(1, 0, -1), Q(1, 0, 1)
    ps, h = local_densities(f, g, 60, mode)
    for p, hp in zip(ps.tolist(), h.tolist()):
        assert hp == pytest.approx(float(local_factor(f, g, p, mode)), rel=1e-12, abs=1e-300)


def test_saving_function_small():
    f = Q(1, 0, -1)
    s = saving_function(f, f, [1, 2, 3, 5, 15])
    h3, h5 = local_factor(f, f, 3), local_factor(f, f, 5)
    assert s.F(1) == 1 and s.F(2) == 1
    assert s.F(3) == pytest.approx(float(1 + h3))
    assert s.F(15) == pytest.approx(float((1 + h3) * (1 + h5) + local_factor(f, f, 7)
                                          + local_factor(f, f, 11) + local_factor(f, f, 13)))


def test_saving_function_monotone():
    s = saving_function(Q(1, 0, 1), Q(1, 0, -2), log_grid(1, 10**5, 40))
    assert s.F_of_L[0] >= 1
    assert all(a <= b for a, b in zip(s.F_of_L, s.F_of_L[1:]))


def test_degenerate_window():
    s = saving_function(Q(1, 0, 1), Q(1, 0, 1), log_grid(10, 1000, 10))
    # no actual pair has h identically zero, so flatten the series by hand
    s.F_of_L = [1.0] * len(s.F_of_L)
    with pytest.raises(ValueError):
        fit_exponent(s, (10, 1000))


def test_large_sieve_rhs_arithmetic():
    s = saving_function(Q(1, 0, 1), Q(1, 0, 1), [10])
    s.F_full = s.F_full.copy()
    s.F_full[10] = 2.0
    assert large_sieve_rhs([100] * 4, 10, s) == pytest.approx(110**8 / 2)


@pytest.mark.parametrize("box", [DyadicBox(4, 4, 4, 4, 3), DyadicBox(8, 16, 8, 8, 10), DyadicBox(16, 16, 16, 16, 30),
                                 DyadicBox(32, 32, 16, 16, 60)])
def test_dyadic_below_rhs(box):
    f, g = Q(1, 0, -1), Q(1, 0, 1)
    L = int(box.sieve_limit)
    s = saving_function(f, g, [L])
    sides = [box.T1 + 1, box.T2 + 1, box.S1 + 1, box.S2 + 1]
    assert dyadic_sieved_count(f, g, box) <= K_DYADIC * large_sieve_rhs(sides, L, s)


def test_densities_small():
    est = densities_empirical(Q(1, 0, 1), Q(1, 0, -2), 10**5)
    assert est.max_deviation() <= 0.02
    with pytest.raises(ValueError):
        densities_empirical(Q(1, 0, 1), Q(1, 0, -2), 999)


def test_predicted_growth():
    assert predicted_growth(pair_profile(Q(1, 0, -1), Q(1, 0, -1)), math.e**2) == pytest.approx(math.e**2 / 2)
    assert predicted_growth(pair_profile(Q(1, 0, -1), Q(1, 0, 1)), math.e**4) == pytest.approx(math.e**4 / 2)
    assert predicted_growth(pair_profile(Q(1, 0, 1), Q(1, 0, -2)), 1000.0) == 1000.0

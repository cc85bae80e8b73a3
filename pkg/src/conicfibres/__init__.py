"""Counting everywhere locally soluble conic fibres over P^1 x P^1."""

from .fibrecount import BudgetError, CountReport, DyadicBox, classify_fibre, count, dyadic_sieved_count
from .forms import BinaryQuadraticForm, FormPairProfile, ProfileCase, pair_profile, represents_square, splits_at
from .localarith import (
    Place,
    conic_everywhere_soluble,
    conic_soluble_at,
    find_point,
    hilbert,
    kronecker,
    squarefree_kernel,
)
from .points import ProjPoint, SurfacePoint, canonicalize, enumerate_points, height
from .residues import eta, lemma41_sample, omega_brute, omega_closed, omega_exact, omega_p2_superset
from .sieveanalysis import SieveMode, densities_empirical, fit_exponent, large_sieve_rhs, saving_function

__version__ = "0.1.0"

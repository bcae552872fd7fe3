import math

import numpy as np
import pytest

from fracspec.localref import (bessel_j, dirichlet_first_root,
                               harmonic_multiplicity, local_spectrum, theta_root)

# classical Bessel landmarks (verified against the series oracle below)
JP11 = 1.8411837813406593   # first zero of J_1'
J11 = 3.8317059702075125    # first zero of J_1  (= first zero of J_0')
J01 = 2.4048255576957728    # first zero of J_0


def bessel_series(nu, x, terms=60):
    """Ascending-series oracle, independent of scipy."""
    total = 0.0
    for k in range(terms):
        total += (-1) ** k / (math.factorial(k) * math.gamma(k + nu + 1)) * (x / 2.0) ** (2 * k + nu)
    return total


def test_bessel_values():
    assert bessel_j(0, 0.0) == pytest.approx(1.0, abs=1e-15)
    # J_{1/2}(x) = sqrt(2/(pi x)) sin x vanishes at pi
    assert abs(bessel_j(0.5, math.pi)) <= 1e-12
    # local max of J_1 sits at the first zero of J_1'
    assert bessel_j(1, 1.8411838) == pytest.approx(bessel_series(1, 1.8411838), rel=1e-10)
    assert bessel_j(1, 1.8411838) == pytest.approx(0.5819, abs=1e-4)


def test_bessel_against_series_oracle():
    for nu in (0.0, 1.0, 2.5, 7.0):
        for x in (0.3, 1.7, 5.2, 9.9):
            assert bessel_j(nu, x) == pytest.approx(bessel_series(nu, x), rel=1e-10, abs=1e-12)


def test_theta_roots_disk():
    assert theta_root(1, 2, 1) == pytest.approx(JP11, abs=1e-10)
    assert theta_root(0, 2, 1) == pytest.approx(J11, abs=1e-10)
    assert dirichlet_first_root(2) == pytest.approx(J01, abs=1e-10)


def test_theta_root_residual():
    from fracspec.localref import _theta_bracket

    for l, N, k in ((0, 2, 1), (1, 2, 2), (2, 3, 1), (1, 4, 3)):
        z = theta_root(l, N, k)
        # the bracket shares Theta_l's roots; Brent leaves residual ~1e-13 slope
        assert abs(_theta_bracket(l, N, z)) <= 1e-9
        # cross-check against independent numerical differentiation
        m = (N - 2) / 2.0
        h = 1e-6
        f = lambda t: t ** (-m) * bessel_j(l + m, t)
        assert abs((f(z + h) - f(z - h)) / (2 * h)) <= 1e-5


@pytest.mark.parametrize("N", [2, 3, 4])
def test_antisymmetric_branch_below_radial(N):
    assert theta_root(1, N, 1) < theta_root(0, N, 1)
    # first nontrivial value carries l = 1 among the first 10 roots of each branch
    candidates = [(theta_root(l, N, k), l) for l in range(4) for k in range(1, 11)]
    candidates.sort()
    assert candidates[0][1] == 1


def test_theta_root_validation():
    with pytest.raises(ValueError):
        theta_root(-1, 2, 1)
    with pytest.raises(ValueError):
        theta_root(0, 2, 0)


def test_local_spectrum_disk():
    spec = local_spectrum(2, 1.0, 8)
    vals = spec.neumann_values
    assert vals[0] == (0.0, 0, 0, 1)
    v1, l1, k1, m1 = vals[1]
    assert v1 == pytest.approx(JP11**2, rel=1e-10)
    assert (l1, k1, m1) == (1, 1, 2)
    assert spec.dirichlet_first == pytest.approx(J01**2, rel=1e-10)
    assert list(spec.values) == sorted(spec.values)


def test_friedland_chain():
    spec = local_spectrum(2, 1.0, 6)
    for r in (0.5, 0.9, 0.99):
        assert spec.friedland_chain(r)
    with pytest.raises(ValueError):
        spec.friedland_chain(1.5)


def test_scaling_law_exact():
    s1 = local_spectrum(2, 1.0, 8)
    s2 = local_spectrum(2, 2.0, 8)
    assert np.allclose(s2.values, s1.values / 4.0, rtol=0, atol=0)  # exact by construction
    assert s2.dirichlet_first == s1.dirichlet_first / 4.0


def test_harmonic_multiplicities():
    assert harmonic_multiplicity(0, 3) == 1
    assert harmonic_multiplicity(1, 3) == 3
    assert harmonic_multiplicity(2, 3) == 5
    assert harmonic_multiplicity(1, 2) == 2
    assert harmonic_multiplicity(5, 2) == 2

"""Closed-form local (s = 1) Neumann reference spectrum of the ball.

Nonzero local Neumann eigenvalues of the ball of radius R are (z/R)^2 where
z runs over the positive roots of

    Theta_l(z) = d/dz ( z^{(2-N)/2} J_{(2l+N-2)/2}(z) ),      l = 0, 1, 2, ...

The derivative is expanded through Bessel recurrences (root conditioning is
poor under numerical differentiation):

    Theta_l(z) = z^{-(N-2)/2} [ J_{nu-1}(z) - ((l+N-2)/z) J_nu(z) ],
    nu = l + (N-2)/2,

so roots of Theta_l are the positive roots of the bracket.  For N = 2 this
is J_l'(z).  The first Dirichlet eigenvalue (j_{N/2-1,1}/R)^2 completes the
strict chain mu_1(B) < lambda_1(B) < lambda_1(B_r) for r < R.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv

from .kernelmath import as_dimension


def bessel_j(nu: float, x: float):
    """Bessel function of the first kind J_nu(x)."""
    if nu < 0:
        raise ValueError("order nu must be nonnegative")
    return jv(nu, x)


def _theta_bracket(l: int, N: int, z):
    """J_{nu-1}(z) - ((l+N-2)/z) J_nu(z), sharing the sign of Theta_l for z > 0."""
    nu = l + (N - 2) / 2.0
    return jv(nu - 1.0, z) - ((l + N - 2) / z) * jv(nu, z)


def _positive_roots(f, count: int, scan_step: float = 0.1, z0: float = 0.05,
                    z_max: float = 500.0) -> list[float]:
    roots = []
    z_prev, f_prev = z0, f(z0)
    z = z0
    while len(roots) < count:
        z += scan_step
        if z > z_max:
            raise RuntimeError(f"root bracketing failed below z={z_max}")
        f_cur = f(z)
        if f_prev == 0.0:
            roots.append(z_prev)
        elif np.sign(f_cur) != np.sign(f_prev):
            roots.append(brentq(f, z_prev, z, xtol=1e-13, rtol=1e-14))
        z_prev, f_prev = z, f_cur
    return roots


def theta_root(l: int, N, k: int) -> float:
    """k-th positive root of Theta_l (k >= 1), bracketed scan + Brent to 1e-10."""
    N = as_dimension(N)
    if l < 0 or l != int(l):
        raise ValueError("l must be a nonnegative integer")
    if k < 1:
        raise ValueError("root index k starts at 1")
    return _positive_roots(lambda z: _theta_bracket(int(l), N, z), k)[-1]


def dirichlet_first_root(N) -> float:
    """First positive zero of J_{N/2-1} (Dirichlet ground state of the unit ball)."""
    N = as_dimension(N)
    return _positive_roots(lambda z: jv(N / 2.0 - 1.0, z), 1)[0]


def harmonic_multiplicity(l: int, N: int) -> int:
    """Dimension of degree-l spherical harmonics on S^{N-1}."""
    if l == 0:
        return 1
    if l == 1:
        return N
    return comb(N + l - 1, l) - comb(N + l - 3, l - 2)


@dataclass(frozen=True)
class LocalSpectrum:
    """Ascending local Neumann values with angular labels and multiplicities."""

    neumann_values: tuple        # of (value, l, k, multiplicity)
    dirichlet_first: float
    R: float
    N: int

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, *_ in self.neumann_values])

    def friedland_chain(self, r: float) -> bool:
        """mu_1(B) < lambda_1(B) < lambda_1(B_r) for a nodal-ball radius r < R."""
        if not (0.0 < r < self.R):
            raise ValueError("need 0 < r < R")
        mu1 = next(v for v, *_ in self.neumann_values if v > 0.0)
        lam1 = self.dirichlet_first
        return mu1 < lam1 < lam1 * (self.R / r) ** 2


def local_spectrum(N, R: float, count: int) -> LocalSpectrum:
    """First `count` local Neumann eigenvalues of the ball (incl. mu_0 = 0).

    Computed on the unit ball and rescaled by 1/R^2, so the scaling law
    local_spectrum(N, R) = local_spectrum(N, 1)/R^2 holds exactly.
    """
    N = as_dimension(N)
    if count < 2:
        raise ValueError("need count >= 2")
    if not R > 0.0:
        raise ValueError("R must be positive")

    entries = [(0.0, 0, 0, 1)]
    per_l = count  # enough roots per l: values increase with both l and k
    for l in range(count + 1):
        roots = _positive_roots(lambda z: _theta_bracket(l, N, z), per_l)
        for k, z in enumerate(roots, start=1):
            entries.append((z * z, l, k, harmonic_multiplicity(l, N)))
    entries.sort(key=lambda e: e[0])

    kept, total = [], 0
    for v, l, k, m in entries:
        kept.append((v / R**2, l, k, m))
        total += m
        if total >= count:
            break

    lam1 = (dirichlet_first_root(N) / R) ** 2
    return LocalSpectrum(neumann_values=tuple(kept), dirichlet_first=lam1, R=float(R), N=N)

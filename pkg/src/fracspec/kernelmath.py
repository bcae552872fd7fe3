"""Normalization constants tying the nonlocal operator to its local limit.

The singular-integral operator uses the kernel ``c_{N,s} |x-y|^{-N-2s}`` with

    c_{N,s} = 4^s Gamma(N/2 + s) / (pi^{N/2} |Gamma(-s)|),

and the sharp-interface limit ``s -> 1`` is governed by

    (1 - s) * [u]^2  ->  K_N * int |grad u|^2,     K_N = |S^{N-1}| / (2N),

which is consistent with ``c_{N,s}/2 ~ (2N/|S^{N-1}|)(1-s)``.  The
self-consistency of the two constants is an executed acceptance test, not an
assumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gamma as _gamma


@dataclass(frozen=True)
class FracOrder:
    """Fractional order s, strictly inside (0, 1)."""

    s: float

    def __post_init__(self):
        s = float(self.s)
        if not (0.0 < s < 1.0):
            raise ValueError(f"s must lie in (0,1), got {self.s}")
        object.__setattr__(self, "s", s)

    def __float__(self) -> float:
        return self.s


@dataclass(frozen=True)
class Dimension:
    """Ambient dimension N >= 2."""

    N: int

    def __post_init__(self):
        n = int(self.N)
        if n != self.N or n < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "N", n)

    def __int__(self) -> int:
        return self.N


def as_frac_order(s) -> float:
    """Validate and return s as a plain float (accepts FracOrder or number)."""
    return FracOrder(float(s)).s


def as_dimension(N) -> int:
    """Validate and return N as a plain int (accepts Dimension or number)."""
    return Dimension(int(N)).N


def gamma_fn(x: float) -> float:
    """Euler Gamma function.

    Raises ValueError at the poles (non-positive integers).  Backed by the
    fixed rational approximation in scipy.special; accurate to well beyond
    12 significant digits on the real line away from poles.
    """
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"Gamma pole at non-positive integer x={x}")
    return float(_gamma(x))


def sphere_measure(N) -> float:
    """Surface measure |S^{N-1}| of the unit sphere in R^N."""
    N = as_dimension(N)
    return 2.0 * math.pi ** (N / 2.0) / gamma_fn(N / 2.0)


def ball_volume(N) -> float:
    """Volume of the unit ball in R^N."""
    N = as_dimension(N)
    return math.pi ** (N / 2.0) / gamma_fn(N / 2.0 + 1.0)


def riesz_constant(N, s) -> float:
    """Normalization constant c_{N,s} of the fractional Laplacian.

    c_{N,s} = 4^s Gamma(N/2+s) / (pi^{N/2} |Gamma(-s)|).  Strictly positive
    for N >= 2 and s in (0,1); behaves like s/ (pi^{N/2}/...) ~ O(s) as
    s -> 0+ and like 2 N Gamma(N/2) pi^{-N/2} (1-s) as s -> 1-.
    """
    N = as_dimension(N)
    s = as_frac_order(s)
    # |Gamma(-s)| via the recurrence Gamma(-s) = Gamma(2-s) / (-s (1-s)) keeps
    # the evaluation away from the pole at s -> 1.
    abs_gamma_minus_s = gamma_fn(2.0 - s) / (s * (1.0 - s))
    return 4.0**s * gamma_fn(N / 2.0 + s) / (math.pi ** (N / 2.0) * abs_gamma_minus_s)


def bbm_constant(N) -> float:
    """Limit constant K_N = |S^{N-1}|/(2N) of (1-s)[u]^2 -> K_N int|grad u|^2.

    K_2 = pi/2, K_3 = 2 pi/3.
    """
    N = as_dimension(N)
    return sphere_measure(N) / (2.0 * N)

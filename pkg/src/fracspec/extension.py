"""The minimal exterior extension and the nonlocal Neumann residual.

A function u on the ball extends uniquely to the exterior by the kernel
quotient

    ext{u}(x) = int_B u(y) |x-y|^{-N-2s} dy  /  int_B |x-y|^{-N-2s} dy,

which minimizes the constrained Gagliardo energy and annihilates the
nonlocal Neumann operator.  Both integrals use the same interior rule, so
constants extend to constants exactly.  Values are re-evaluated from the
formula at off-grid probe points; nothing is interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angular import kernel_batch
from .geometry import PolarGrid, RadialGrid
from .kernelmath import as_frac_order, riesz_constant


@dataclass
class InteriorFunction:
    """Values sampled at the interior nodes of a polar grid, shape (n_r, n_theta)."""

    grid: PolarGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expect = (len(self.grid.radial.interior_nodes), self.grid.n_theta)
        if self.values.shape != expect:
            raise ValueError(f"values must have shape {expect}, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("interior values must be finite")

    @property
    def mean(self) -> float:
        """Cached integral of u over the ball (consistent with the grid rule)."""
        return float(np.sum(self.grid.interior_node_weights() * self.values))


@dataclass
class ExtendedFunction:
    """Interior samples plus exterior-node values; `minimal` marks 𝒩s-free extensions."""

    interior: InteriorFunction
    exterior_values: np.ndarray
    minimal: bool = True

    def __post_init__(self):
        self.exterior_values = np.asarray(self.exterior_values, dtype=float)
        expect = (len(self.interior.grid.radial.exterior_nodes), self.interior.grid.n_theta)
        if self.exterior_values.shape != expect:
            raise ValueError(f"exterior values must have shape {expect}")
        if not np.all(np.isfinite(self.exterior_values)):
            raise ValueError("exterior values must be finite")


def _kernel_row(u: InteriorFunction, x, s: float):
    """w_i |x - y_i|^{-2-2s} over all interior nodes of the polar grid."""
    x = np.asarray(x, dtype=float)
    grid = u.grid
    if np.hypot(x[0], x[1]) <= grid.radial.R:
        raise ValueError("probe point must lie strictly outside the closed ball")
    xy = grid.interior_xy()
    d2 = (xy[..., 0] - x[0]) ** 2 + (xy[..., 1] - x[1]) ** 2
    return grid.interior_node_weights() * d2 ** (-(1.0 + s))


def minimal_extension_value(u: InteriorFunction, x, s) -> float:
    """Evaluate the minimal extension of u at an exterior point x.

    Linear in u; constants are reproduced exactly because numerator and
    denominator share one quadrature rule.
    """
    s = as_frac_order(s)
    row = _kernel_row(u, x, s)
    return float(np.sum(row * u.values) / np.sum(row))


def extend_minimal(u: InteriorFunction, s) -> ExtendedFunction:
    """Minimal extension of u, evaluated at every exterior grid node."""
    s = as_frac_order(s)
    grid = u.grid
    xy_int = grid.interior_xy().reshape(-1, 2)
    w_int = grid.interior_node_weights().ravel()
    vals = u.values.ravel()
    xy_ext = grid.exterior_xy().reshape(-1, 2)

    out = np.empty(len(xy_ext))
    chunk = max(1, int(4e6) // max(1, len(xy_int)))
    for start in range(0, len(xy_ext), chunk):
        blk = xy_ext[start:start + chunk]
        d2 = ((blk[:, None, :] - xy_int[None, :, :]) ** 2).sum(axis=-1)
        ker = w_int[None, :] * d2 ** (-(1.0 + s))
        out[start:start + len(blk)] = (ker @ vals) / ker.sum(axis=1)
    n_ext = len(grid.radial.exterior_nodes)
    return ExtendedFunction(interior=u, exterior_values=out.reshape(n_ext, grid.n_theta))


def _refined_quadrature(grid_polar: PolarGrid, refine: int):
    """Finer polar rule on the same ball (refined panels and angles)."""
    from .geometry import make_polar_grid, make_radial_grid  # local: avoid cycle at import

    rad = grid_polar.radial
    fine_rad = make_radial_grid(rad.R, rad.n_cells * refine, rad.R_inf,
                                max(4, (len(rad.breaks_ext) - 1)), grading=rad.grading,
                                q=rad.q)
    return make_polar_grid(fine_rad, grid_polar.n_theta * refine)


def _interp_samples(u: InteriorFunction):
    """Bilinear (radius x periodic angle) interpolant of the samples."""
    grid = u.grid
    r_nodes = grid.radial.interior_nodes
    vals = u.values
    nr, nth = vals.shape
    dth = grid.dtheta

    def fn(r, theta):
        r_b, th_b = np.broadcast_arrays(np.asarray(r, dtype=float), theta)
        fr = r_b.ravel()
        ft = np.mod(np.broadcast_to(th_b, r_b.shape).ravel(), 2.0 * np.pi)
        i0 = np.clip(np.searchsorted(r_nodes, fr, side="right") - 1, 0, nr - 2)
        wr = np.clip((fr - r_nodes[i0]) / (r_nodes[i0 + 1] - r_nodes[i0]), 0.0, 1.0)
        j0 = np.floor(ft / dth).astype(int) % nth
        j1 = (j0 + 1) % nth
        wt = ft / dth - np.floor(ft / dth)
        out = ((1 - wr) * (1 - wt) * vals[i0, j0] + wr * (1 - wt) * vals[i0 + 1, j0]
               + (1 - wr) * wt * vals[i0, j1] + wr * wt * vals[i0 + 1, j1])
        return out.reshape(r_b.shape)

    return fn


def neumann_residual(v, x, s, value_at_x: float | None = None, u=None,
                     refine: int = 4) -> float:
    """Nonlocal Neumann operator c_{N,s} int_B (v(x) - v(y)) |x-y|^{-N-2s} dy.

    The probe value v(x) of a minimal extension is the kernel quotient on
    the field's own grid (the defining discretization); the residual
    integral is evaluated on a `refine`-times finer rule, so the result
    measures the defect of the discrete extension against the continuum
    Neumann condition and vanishes under refinement of the original grid.
    Interior values on the finer rule come from the callable `u(r, theta)`
    when given, otherwise from piecewise-linear interpolation of the
    samples.  For non-minimal fields pass `value_at_x` explicitly.
    """
    s = as_frac_order(s)
    if isinstance(v, ExtendedFunction):
        interior = v.interior
        if value_at_x is None and not v.minimal:
            raise ValueError("non-minimal extension: supply value_at_x explicitly")
    elif isinstance(v, InteriorFunction):
        interior = v
    else:
        raise TypeError("v must be an InteriorFunction or ExtendedFunction")

    if value_at_x is None:
        value_at_x = minimal_extension_value(interior, x, s)

    fine = _refined_quadrature(interior.grid, refine)
    fn = u if u is not None else _interp_samples(interior)
    u_fine = InteriorFunction(fine, np.broadcast_to(
        fn(fine.radial.interior_nodes[:, None], fine.thetas[None, :]),
        (len(fine.radial.interior_nodes), fine.n_theta)).copy())
    row = _kernel_row(u_fine, x, s)
    den = float(np.sum(row))
    num = float(np.sum(row * u_fine.values))
    return riesz_constant(2, s) * (float(value_at_x) * den - num)


def extension_radial_mode(f, l: int, s, grid: RadialGrid, r=None) -> np.ndarray:
    """Exterior radial profile of the minimal extension of f(rho) cos(l theta).

    f holds values at the grid's interior quadrature nodes.  Returns the
    profile at the grid's exterior nodes, or at the given radii `r` (all of
    which must exceed R).
    """
    s = as_frac_order(s)
    if l < 0 or l != int(l):
        raise ValueError("mode l must be a nonnegative integer")
    f = np.asarray(f, dtype=float)
    if f.shape != grid.interior_nodes.shape:
        raise ValueError("f must be sampled at the grid's interior nodes")
    radii = grid.exterior_nodes if r is None else np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(radii <= grid.R):
        raise ValueError("extension radii must lie strictly outside the ball")

    rr = np.repeat(radii, len(grid.interior_nodes))
    pp = np.tile(grid.interior_nodes, len(radii))
    ker = kernel_batch(rr, pp, s, int(l), ("k0", "kl"))
    k0 = ker["k0"].reshape(len(radii), -1)
    kl = ker["kl"].reshape(len(radii), -1)
    wr = grid.interior_weights * grid.interior_nodes
    numer = kl @ (wr * f)
    denom = k0 @ wr
    out = numer / denom
    return out if r is None or np.ndim(r) else float(out[0])

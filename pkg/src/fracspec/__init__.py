"""Spectral solver for the fractional Laplacian with nonlocal Neumann
boundary conditions on the disk.

Layout:

- ``kernelmath``  -- normalization constants and special-function plumbing
- ``geometry``    -- ball domains, graded radial/polar quadrature grids
- ``angular``     -- angularly integrated Riesz kernels K_l(r, rho)
- ``extension``   -- the minimal exterior extension and the Neumann residual
- ``assembly``    -- Galerkin assembly (per-mode 1D path + full-2D oracle)
- ``eigen``       -- dense generalized eigensolver and min-max sampling
- ``localref``    -- Bessel-root reference spectrum of the local problem
- ``symmetry``    -- polarization, Schwarz symmetry, nodal domains, classifier
- ``cli``         -- batch driver (``fracspec`` entry point)
"""

from .kernelmath import FracOrder, Dimension, gamma_fn, riesz_constant, bbm_constant
from .geometry import Ball, RadialGrid, PolarGrid, make_radial_grid, make_polar_grid, tail_bound
from .angular import ModeKernel, mode_kernel_eval, mode_kernel_diff, mode_kernel_diag_coeff
from .extension import (
    InteriorFunction,
    ExtendedFunction,
    minimal_extension_value,
    extend_minimal,
    neumann_residual,
    extension_radial_mode,
)
from .assembly import SpectralProblem, KernelTables, assemble_mode_problem, assemble_full_2d, rayleigh
from .eigen import EigenPair, solve_generalized, minmax_sample, weak_residual, cluster_eigenvalues
from .localref import LocalSpectrum, bessel_j, theta_root, local_spectrum
from .symmetry import (
    Direction,
    SampledField,
    SymmetryReport,
    polarize,
    seminorm_discrete,
    four_point_identity,
    foliated_schwarz_check,
    nodal_domains,
    classify_eigenspace,
)

__version__ = "0.1.0"

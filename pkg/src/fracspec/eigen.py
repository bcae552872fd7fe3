"""Dense symmetric generalized eigensolver and the min-max sampling oracle.

The pencil (A, M) is reduced to standard symmetric form through the
Cholesky factor of M inside LAPACK (problem sizes stay in the low
thousands, so iterative methods are unnecessary).  The zero-mean
constraint of the l = 0 mode is imposed by deflation: the pencil is
projected onto the orthogonal complement of the constraint functional,
keeping it symmetric definite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .assembly import KernelTables, SpectralProblem, assemble_mode_problem
from .geometry import RadialGrid


@dataclass
class EigenPair:
    mu: float
    vector: np.ndarray
    mode: int
    s: float

    @property
    def multiplicity(self) -> int:
        """Angular multiplicity on the disk: cos/sin for every l >= 1."""
        return 1 if self.mode == 0 else 2


def _constraint_complement(m: np.ndarray) -> np.ndarray:
    """Orthonormal basis of {x : m.x = 0}, shape (n, n-1)."""
    return la.null_space(m[None, :])


def solve_generalized(problem: SpectralProblem, k: int, constrain: bool | None = None,
                      residual_tol: float = 1e-8) -> list[EigenPair]:
    """k smallest eigenpairs of (A, M), M-orthonormal, values ascending.

    constrain=None restricts to the zero-mean subspace exactly when the
    problem carries the l = 0 constraint; pass False for the unrestricted
    pencil (whose lowest eigenvalue is the trivial constant mode).
    """
    A, M = problem.A, problem.M
    n = A.shape[0]
    if constrain is None:
        constrain = problem.constraint is not None
    if constrain and problem.constraint is None:
        raise ValueError("problem carries no admissibility constraint")
    dim = n - 1 if constrain else n
    if not (1 <= k <= dim):
        raise ValueError(f"need 1 <= k <= {dim}, got {k}")

    try:
        if constrain:
            Z = _constraint_complement(problem.constraint)
            vals, vecs = la.eigh(Z.T @ A @ Z, Z.T @ M @ Z)
            vecs = Z @ vecs
        else:
            vals, vecs = la.eigh(A, M)
    except la.LinAlgError as err:  # pragma: no cover - dense eigh rarely fails
        raise RuntimeError(f"generalized eigensolver did not converge: {err}") from err

    norm_a = np.linalg.norm(A, 2)
    pairs = []
    for i in range(k):
        v = vecs[:, i]
        v = v / np.sqrt(v @ M @ v)
        res = np.linalg.norm(A @ v - vals[i] * (M @ v))
        if res > residual_tol * max(norm_a, abs(vals[i])) * np.linalg.norm(v):
            raise RuntimeError(
                f"eigenpair {i} residual {res:.3e} exceeds tolerance "
                f"(|A|={norm_a:.3e}, mu={vals[i]:.6e})")
        pairs.append(EigenPair(mu=float(vals[i]), vector=v, mode=problem.mode, s=problem.s))
    return pairs


def minmax_sample(problem: SpectralProblem, n: int, trials: int, seed: int = 0) -> float:
    """Min over sampled n-dim admissible subspaces of the max Rayleigh quotient.

    Trial 0 is the span of the first n eigenvectors, so the sampled minimum
    attains the n-th discrete eigenvalue; random trials can only exceed it.
    """
    A, M = problem.A, problem.M
    dim = A.shape[0]
    if not (1 <= n <= dim - (1 if problem.constraint is not None else 0)):
        raise ValueError("subspace dimension out of range")
    if trials < 1:
        raise ValueError("need at least one trial")

    rng = np.random.default_rng(seed)
    eigvecs = np.column_stack([p.vector for p in solve_generalized(problem, n)])

    best = np.inf
    for t in range(trials):
        if t == 0:
            X = eigvecs
        else:
            X = rng.standard_normal((dim, n))
            if problem.constraint is not None:
                m = problem.constraint
                X = X - np.outer(m, m @ X) / (m @ m)
        try:
            vals = la.eigh(X.T @ A @ X, X.T @ M @ X, eigvals_only=True)
        except la.LinAlgError:  # rank-deficient sample, draw again
            continue
        best = min(best, float(vals[-1]))
    return best


def weak_residual(pair: EigenPair, problem: SpectralProblem, tests) -> float:
    """max over test vectors of |a(u,v) - mu (u,v)_M|, scaled by |A||u||v|."""
    u = pair.vector
    r = problem.A @ u - pair.mu * (problem.M @ u)
    scale = np.linalg.norm(problem.A, 2) * np.linalg.norm(u)
    worst = 0.0
    for v in np.atleast_2d(np.asarray(tests, dtype=float)):
        worst = max(worst, abs(v @ r) / (np.linalg.norm(v) * scale))
    return worst


def cluster_eigenvalues(pairs: list[EigenPair], rtol: float = 1e-8) -> list[list[EigenPair]]:
    """Group ascending eigenpairs into degenerate multiplets.

    Symmetry-induced degeneracies must not be split by solver noise, so
    values within rtol (relative to their magnitude) fall into one cluster.
    """
    ordered = sorted(pairs, key=lambda p: p.mu)
    clusters: list[list[EigenPair]] = []
    for p in ordered:
        if clusters and abs(p.mu - clusters[-1][0].mu) <= rtol * max(1.0, abs(clusters[-1][0].mu)):
            clusters[-1].append(p)
        else:
            clusters.append([p])
    return clusters


def solve_disk_modes(s, grid: RadialGrid, l_max: int, k: int = 4,
                     tables: KernelTables | None = None):
    """Solve the constrained pencils for modes 0..l_max on one grid.

    Returns {l: (problem, pairs)} where the l = 0 spectrum excludes the
    trivial constant mode (zero-mean restriction).
    """
    if tables is None:
        tables = KernelTables(grid, s)
    out = {}
    for l in range(l_max + 1):
        problem = assemble_mode_problem(l, s, grid, tables=tables)
        kk = min(k, problem.n_dof - (1 if l == 0 else 0))
        out[l] = (problem, solve_generalized(problem, kk))
    return out


def first_nontrivial(results, rtol: float = 1e-8):
    """First nontrivial eigenvalue across modes and its degenerate multiplet.

    results: {l: (problem, pairs)} from solve_disk_modes.  Returns
    (mu1, members) with members = [(l, EigenPair), ...]; a mode-l >= 1
    member stands for the two-dimensional cos/sin pair.
    """
    flat = [(pair.mu, l, pair) for l, (_, pairs) in results.items() for pair in pairs]
    if not flat:
        raise ValueError("no eigenpairs supplied")
    flat.sort(key=lambda t: t[0])
    mu1 = flat[0][0]
    members = [(l, p) for mu, l, p in flat if abs(mu - mu1) <= rtol * max(1.0, abs(mu1))]
    return mu1, members

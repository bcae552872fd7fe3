"""Galerkin assembly of the nonlocal Neumann quadratic form on the disk.

Per mode l the trial space is the span of piecewise-linear radial hats
phi_i(r) cos(l theta), each carried together with its minimal exterior
extension.  The scaled stiffness entry is

    A_ij = c_{2,s}/2 * pi_l * [ S1_ij + S2_ij + 2 * CROSS_ij ],

with the interior x interior part split diagonally-stably as

    S1 = iint (phi_i(r)-phi_i(rho))(phi_j(r)-phi_j(rho)) K_0(r,rho) r rho
    S2 = iint (phi_i(r)phi_j(rho)+phi_i(rho)phi_j(r)) (K_0-K_l)(r,rho) r rho

(the bracket [..]K_0 - [..]K_l of the angular reduction recombined so that
each piece is separately integrable), and the interior x exterior block
condensed through the discrete minimal-extension map, which coincides with
the Schur complement of the exterior degrees of freedom.

Singular quadrature.  Cell pairs touching the diagonal use the split
(w = rho - r, t = r) with a Gauss-Jacobi rule carrying the exact w^{1-2s}
weight, so the s -> 1 concentration of the energy at the diagonal is
captured with no cutoff; pairs sharing one node use Duffy triangles with
the xi^{2-2s} Jacobi weight.  Hat differences on these point sets are
formed from exact local increments (w/h etc.), never by subtracting nearby
hat values.  The difference kernel's own w^{1-2s} singularity is subtracted
analytically for s > 0.6 and resolved by geometrically graded panels
otherwise (its closed-form coefficient has a pole at s = 1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .angular import diff_diag_coeff, kernel_batch
from .extension import extension_radial_mode
from .geometry import PolarGrid, RadialGrid
from .kernelmath import as_frac_order, riesz_constant

_S_SUBTRACT = 0.6  # above this, subtract the leading w^{1-2s} term of K_0-K_l


# ----------------------------------------------------------------------
# hat basis
# ----------------------------------------------------------------------

def hat_local(breaks: np.ndarray, pts: np.ndarray):
    """Indices/values of the two hats active at each point, shape (n_pts, 2)."""
    pts = np.asarray(pts, dtype=float)
    idx = np.clip(np.searchsorted(breaks, pts, side="right") - 1, 0, len(breaks) - 2)
    h = breaks[idx + 1] - breaks[idx]
    xi = (pts - breaks[idx]) / h
    return np.stack([idx, idx + 1], axis=1), np.stack([1.0 - xi, xi], axis=1)


def hat_matrix(breaks: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Dense (n_pts, n_dof) matrix of hat values."""
    idx, val = hat_local(breaks, pts)
    P = np.zeros((len(np.atleast_1d(pts)), len(breaks)))
    rows = np.arange(len(P))[:, None]
    np.add.at(P, (rows, idx), val)
    return P


# ----------------------------------------------------------------------
# quadrature building blocks
# ----------------------------------------------------------------------

def _gauss_jacobi_01(q: int, beta: float):
    """Nodes/weights with sum w_i f(x_i) = int_0^1 x^beta f(x) dx."""
    x, w = roots_jacobi(q, 0.0, beta)
    return 0.5 * (1.0 + x), w * 0.5 ** (beta + 1.0)


def _geometric_w_panels(h: float, n_panels: int, ratio: float, q: int):
    """Plain Gauss panels on (0, h] refined geometrically toward 0."""
    edges = [h * ratio ** (-k) for k in range(n_panels + 1)]
    x, w = leggauss(q)
    nodes, weights = [], []
    for hi, lo in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * x)
        weights.append(0.5 * (hi - lo) * w)
    return np.concatenate(nodes), np.concatenate(weights)


# ----------------------------------------------------------------------
# kernel tables: point sets + kernel batches per (grid, s)
# ----------------------------------------------------------------------

@dataclass
class _PointSet:
    r: np.ndarray
    rho: np.ndarray
    w_geo: np.ndarray            # quadrature weight incl. Jacobian, symmetry, r*rho
    extra: dict = field(default_factory=dict)


class KernelTables:
    """Precomputed singular-quadrature point sets and kernel values.

    Mode-independent K_0 batches are computed once per (grid, s); the
    difference batches K_0 - K_l are filled lazily per mode and shared
    read-only, matching the concurrency model of the assembly.
    """

    def __init__(self, grid: RadialGrid, s, q_w: int = 16, q_t: int = 6,
                 q_xi: int = 12, q_eta: int = 6):
        self.grid = grid
        self.s = as_frac_order(s)
        self._d_cache: dict[int, dict[str, np.ndarray]] = {}
        self._kl_cross_cache: dict[int, np.ndarray] = {}
        self._build_point_sets(q_w, q_t, q_xi, q_eta)
        breaks = grid.breaks_int
        self.hats = {name: (hat_local(breaks, ps.r), hat_local(breaks, ps.rho))
                     for name, ps in self.point_sets.items()}
        self.k0 = {name: kernel_batch(ps.r, ps.rho, self.s, 0, ("k0",))["k0"]
                   for name, ps in (("sep", self.sep), ("diag", self.diag), ("adj", self.adj))}
        self.k0_cross = kernel_batch(self.cross_r, self.cross_rho, self.s, 0, ("k0",))["k0"] \
            .reshape(len(grid.interior_nodes), len(grid.exterior_nodes))

    def _build_point_sets(self, q_w, q_t, q_xi, q_eta):
        s, grid = self.s, self.grid
        breaks = grid.breaks_int
        n_cells = grid.n_cells
        q = grid.q
        nodes = grid.interior_nodes.reshape(n_cells, q)
        wts = grid.interior_weights.reshape(n_cells, q)

        # --- separated pairs |a-b| >= 2, symmetry factor 2 ---
        aa, bb = np.triu_indices(n_cells, k=2)
        r = np.repeat(nodes[aa], q, axis=1).ravel()
        rho = np.tile(nodes[bb], (1, q)).ravel()
        wg = 2.0 * (np.repeat(wts[aa], q, axis=1) * np.tile(wts[bb], (1, q))).ravel()
        self.sep = _PointSet(r, rho, wg * r * rho)

        # --- diagonal cells: Gauss-Jacobi in w (weight w^{1-2s}) x Gauss in t ---
        wj_x, wj_w = _gauss_jacobi_01(q_w, 1.0 - 2.0 * s)
        tg_x, tg_w = leggauss(q_t)
        self.diag = self._wt_point_set(wj_x, wj_w, tg_x, tg_w, jacobi=True)

        # --- diagonal cells, graded plain panels (bounded difference parts) ---
        gx, gw = _geometric_w_panels(1.0, n_panels=11, ratio=8.0, q=4)
        self.diag_b = self._wt_point_set(gx, gw, tg_x, tg_w, jacobi=False)

        # --- adjacent pairs: Duffy triangles, xi^{2-2s} Jacobi weight ---
        xj_x, xj_w = _gauss_jacobi_01(q_xi, 2.0 - 2.0 * s)
        eg_x, eg_w = leggauss(q_eta)
        eta = 0.5 + 0.5 * eg_x
        weta = 0.5 * eg_w
        rs, rhos, wgs, xis, wvals, albe = [], [], [], [], [], []
        for a in range(n_cells - 1):
            xc = breaks[a + 1]
            ha = xc - breaks[a]
            hb = breaks[a + 2] - xc
            for swap in (False, True):
                al = ha * (xj_x[:, None] if not swap else xj_x[:, None] * eta[None, :])
                be = hb * (xj_x[:, None] * eta[None, :] if not swap else xj_x[:, None])
                al = np.broadcast_to(al, (q_xi, q_eta))
                be = np.broadcast_to(be, (q_xi, q_eta))
                rr = (xc - al).ravel()
                pp = (xc + be).ravel()
                W = 2.0 * (xj_w[:, None] * weta[None, :] * ha * hb).ravel()
                rs.append(rr)
                rhos.append(pp)
                wgs.append(W * rr * pp)
                xis.append(np.broadcast_to(xj_x[:, None], (q_xi, q_eta)).ravel())
                wvals.append((al + be).ravel())
                albe.append(np.stack([al.ravel() / ha, be.ravel() / hb], axis=1))
        r, rho = np.concatenate(rs), np.concatenate(rhos)
        self.adj = _PointSet(r, rho, np.concatenate(wgs),
                             {"xi": np.concatenate(xis), "w": np.concatenate(wvals),
                              "albe": np.concatenate(albe, axis=0)})

        # --- adjacent pairs, graded tensor rectangles (bounded difference parts) ---
        sub = np.array([0.0, 1e-3, 3e-2, 0.2, 1.0])
        g4_x, g4_w = leggauss(4)
        rs, rhos, wgs, wvals = [], [], [], []
        for a in range(n_cells - 1):
            xc = breaks[a + 1]
            ha = xc - breaks[a]
            hb = breaks[a + 2] - xc
            ea, eb = ha * sub, hb * sub
            for i in range(len(sub) - 1):
                al = 0.5 * (ea[i] + ea[i + 1]) + 0.5 * (ea[i + 1] - ea[i]) * g4_x
                wal = 0.5 * (ea[i + 1] - ea[i]) * g4_w
                for j in range(len(sub) - 1):
                    be = 0.5 * (eb[j] + eb[j + 1]) + 0.5 * (eb[j + 1] - eb[j]) * g4_x
                    wbe = 0.5 * (eb[j + 1] - eb[j]) * g4_w
                    rr = np.repeat(xc - al, 4)
                    pp = np.tile(xc + be, 4)
                    W = 2.0 * (wal[:, None] * wbe[None, :]).ravel()
                    rs.append(rr)
                    rhos.append(pp)
                    wgs.append(W * rr * pp)
                    wvals.append(pp - rr)
        r, rho = np.concatenate(rs), np.concatenate(rhos)
        self.adj_b = _PointSet(r, rho, np.concatenate(wgs), {"w": np.concatenate(wvals)})

        # --- interior x exterior tensor (exterior nodes are the exterior dofs) ---
        ne, ni = len(grid.exterior_nodes), len(grid.interior_nodes)
        self.cross_r = np.repeat(grid.interior_nodes, ne)
        self.cross_rho = np.tile(grid.exterior_nodes, ni)
        self.omega_int = grid.interior_weights * grid.interior_nodes
        self.a_ext = grid.exterior_weights * grid.exterior_nodes

        self.point_sets = {"sep": self.sep, "diag": self.diag, "diag_b": self.diag_b,
                           "adj": self.adj, "adj_b": self.adj_b}

    def _wt_point_set(self, w_nodes01, w_wts01, tg_x, tg_w, jacobi: bool) -> _PointSet:
        """(w, t) split of every diagonal cell; w rule given on (0, 1]."""
        s, grid = self.s, self.grid
        breaks = grid.breaks_int
        rs, rhos, wgs, wvals, cells, hs = [], [], [], [], [], []
        for a in range(grid.n_cells):
            xa, xb = breaks[a], breaks[a + 1]
            h = xb - xa
            wv = h * w_nodes01
            Wv = w_wts01 * (h ** (2.0 - 2.0 * s) if jacobi else h)
            tlen = (xb - wv) - xa
            t = xa + tlen[:, None] * (0.5 + 0.5 * tg_x)[None, :]
            Wt = tlen[:, None] * 0.5 * tg_w[None, :]
            W = 2.0 * Wv[:, None] * Wt          # x2: both halves of the square
            rr = t.ravel()
            pp = (t + wv[:, None]).ravel()
            rs.append(rr)
            rhos.append(pp)
            wgs.append(W.ravel() * rr * pp)
            wvals.append(np.broadcast_to(wv[:, None], t.shape).ravel())
            cells.append(np.full(t.size, a))
            hs.append(np.full(t.size, h))
        return _PointSet(np.concatenate(rs), np.concatenate(rhos), np.concatenate(wgs),
                         {"w": np.concatenate(wvals), "cell": np.concatenate(cells),
                          "h": np.concatenate(hs)})

    def d_values(self, l: int) -> dict[str, np.ndarray]:
        """Difference-kernel batches K_0 - K_l on sep/diag_b/adj_b (cached)."""
        if l not in self._d_cache:
            out = {}
            for name in ("sep", "diag_b", "adj_b"):
                ps = self.point_sets[name]
                out[name] = (kernel_batch(ps.r, ps.rho, self.s, l, ("d",))["d"]
                             if l > 0 else np.zeros_like(ps.r))
            self._d_cache[l] = out
        return self._d_cache[l]

    def kl_cross(self, l: int) -> np.ndarray:
        """K_l on the interior x exterior tensor set (cached per l)."""
        if l not in self._kl_cross_cache:
            if l == 0:
                self._kl_cross_cache[l] = self.k0_cross
            else:
                kl = kernel_batch(self.cross_r, self.cross_rho, self.s, l, ("kl",))["kl"]
                self._kl_cross_cache[l] = kl.reshape(self.k0_cross.shape)
        return self._kl_cross_cache[l]


# ----------------------------------------------------------------------
# scatter helpers
# ----------------------------------------------------------------------

_CHUNK = 200_000


def _scatter_outer(A, weight, idx_a, val_a, idx_b, val_b, symmetrize):
    """A[idx_a_i, idx_b_j] += weight * val_a_i * val_b_j (optionally + transpose)."""
    for st in range(0, len(weight), _CHUNK):
        sl = slice(st, st + _CHUNK)
        contrib = np.einsum("p,pi,pj->pij", weight[sl], val_a[sl], val_b[sl])
        np.add.at(A, (idx_a[sl][:, :, None], idx_b[sl][:, None, :]), contrib)
        if symmetrize:
            np.add.at(A, (idx_b[sl][:, :, None], idx_a[sl][:, None, :]),
                      np.transpose(contrib, (0, 2, 1)))


def _scatter_diff_sep(A, weight, hats_pair):
    (ir, vr), (ip, vp) = hats_pair
    idx = np.concatenate([ir, ip], axis=1)
    val = np.concatenate([vr, -vp], axis=1)
    _scatter_outer(A, weight, idx, val, idx, val, symmetrize=False)


def _scatter_diff_diag(A, weight, ps: _PointSet):
    # within one cell phi_a(r)-phi_a(rho) = +w/h and phi_{a+1}: -w/h, exactly
    cell = ps.extra["cell"].astype(int)
    d = ps.extra["w"] / ps.extra["h"]
    idx = np.stack([cell, cell + 1], axis=1)
    val = np.stack([d, -d], axis=1)
    _scatter_outer(A, weight, idx, val, idx, val, symmetrize=False)


def _scatter_diff_adj(A, weight, ps: _PointSet, breaks):
    # hats around the shared node xc: exact increments, no cancellation
    a = np.clip(np.searchsorted(breaks, ps.r, side="right") - 1, 0, len(breaks) - 2).astype(int)
    alpha_n = ps.extra["albe"][:, 0]   # (xc - r)/ha
    beta_n = ps.extra["albe"][:, 1]    # (rho - xc)/hb
    idx = np.stack([a, a + 1, a + 2], axis=1)
    val = np.stack([alpha_n, beta_n - alpha_n, -beta_n], axis=1)
    _scatter_outer(A, weight, idx, val, idx, val, symmetrize=False)


# ----------------------------------------------------------------------
# spectral problem
# ----------------------------------------------------------------------

@dataclass
class SpectralProblem:
    """Assembled pencil (A, M) for one angular mode on the disk.

    A is the c_{2,s}/2-scaled seminorm form with exterior dofs condensed
    through the minimal extension; the cross_* blocks are retained so the
    energy with explicit exterior values stays available.
    """

    A: np.ndarray
    M: np.ndarray
    mode: int
    s: float
    grid: RadialGrid
    constraint: np.ndarray | None
    angular_factor: float
    basis_at_quad: np.ndarray      # hats at interior quadrature nodes
    ext_map: np.ndarray            # E[i, nu]: extension of hat i at exterior node nu
    S_omega: np.ndarray            # raw interior x interior block (S1 + S2)
    cross_G: np.ndarray
    cross_B: np.ndarray
    cross_c0: np.ndarray
    a_ext: np.ndarray

    @property
    def n_dof(self) -> int:
        return self.A.shape[0]

    def seminorm_quadratic(self, x) -> float:
        """Raw [u~]^2 (no c/2 factor) of the minimally extended trial field x."""
        x = np.asarray(x, dtype=float)
        return 2.0 / riesz_constant(2, self.s) * float(x @ self.A @ x)

    def energy_with_exterior(self, x, t) -> float:
        """Raw seminorm of trial field x carrying explicit exterior values t."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        cross = float(x @ self.cross_G @ x
                      + np.sum(self.a_ext * (self.cross_c0 * t * t
                                             - 2.0 * t * (self.cross_B.T @ x))))
        return self.angular_factor * (float(x @ self.S_omega @ x) + 2.0 * cross)

    def extension_values(self, x) -> np.ndarray:
        """Exterior-node values of the minimal extension of the trial field x."""
        return self.ext_map.T @ np.asarray(x, dtype=float)

    def condensed_from_blocks(self) -> np.ndarray:
        """Re-derive A by eliminating exterior dofs from the retained blocks."""
        schur = (self.cross_B * (self.a_ext / self.cross_c0)[None, :]) @ self.cross_B.T
        raw = self.angular_factor * (self.S_omega + 2.0 * (self.cross_G - schur))
        return 0.5 * riesz_constant(2, self.s) * raw


def assemble_mode_problem(l: int, s, grid: RadialGrid, tables: KernelTables | None = None,
                          basis_breaks: np.ndarray | None = None) -> SpectralProblem:
    """Assemble the stiffness/mass pencil for Fourier mode l on the disk."""
    s = as_frac_order(s)
    if l < 0 or l != int(l):
        raise ValueError("mode l must be a nonnegative integer")
    l = int(l)
    if basis_breaks is not None and not np.array_equal(np.asarray(basis_breaks, dtype=float),
                                                       grid.breaks_int):
        raise ValueError("basis breakpoints do not match the grid")
    if tables is None:
        tables = KernelTables(grid, s)
    elif tables.grid is not grid or tables.s != s:
        raise ValueError("kernel tables built for a different grid or fractional order")

    breaks = grid.breaks_int
    n_dof = len(breaks)
    pi_l = 2.0 * math.pi if l == 0 else math.pi
    subtract = l > 0 and s > _S_SUBTRACT
    dcoef = diff_diag_coeff(s, l) if subtract else 0.0

    S = np.zeros((n_dof, n_dof))

    # ---- S1: difference structure against K_0 ----
    ps = tables.sep
    _scatter_diff_sep(S, ps.w_geo * tables.k0["sep"], tables.hats["sep"])
    ps = tables.diag
    _scatter_diff_diag(S, ps.w_geo * tables.k0["diag"] * ps.extra["w"] ** (2.0 * s - 1.0), ps)
    ps = tables.adj
    _scatter_diff_adj(S, ps.w_geo * tables.k0["adj"] * ps.extra["xi"] ** (2.0 * s - 1.0),
                      ps, breaks)

    # ---- S2: product structure against K_0 - K_l ----
    if l > 0:
        dvals = tables.d_values(l)

        ps = tables.sep
        (ir, vr), (ip, vp) = tables.hats["sep"]
        _scatter_outer(S, ps.w_geo * dvals["sep"], ir, vr, ip, vp, symmetrize=True)

        for name in ("diag_b", "adj_b"):
            ps = tables.point_sets[name]
            d = dvals[name]
            if subtract:
                d = d - dcoef * (ps.r * ps.rho) ** -1.5 * ps.extra["w"] ** (1.0 - 2.0 * s)
            (ir, vr), (ip, vp) = tables.hats[name]
            _scatter_outer(S, ps.w_geo * d, ir, vr, ip, vp, symmetrize=True)

        if subtract:
            # leading w^{1-2s} part under the exact Jacobi weight
            ps = tables.diag
            (ir, vr), (ip, vp) = tables.hats["diag"]
            _scatter_outer(S, ps.w_geo * dcoef * (ps.r * ps.rho) ** -1.5,
                           ir, vr, ip, vp, symmetrize=True)
            ps = tables.adj
            (ir, vr), (ip, vp) = tables.hats["adj"]
            w = (ps.w_geo * dcoef * (ps.r * ps.rho) ** -1.5
                 * (ps.extra["w"] / ps.extra["xi"]) ** (1.0 - 2.0 * s))
            _scatter_outer(S, w, ir, vr, ip, vp, symmetrize=True)

    # ---- cross block, exterior dofs condensed (Schur = minimal extension) ----
    P = hat_matrix(breaks, grid.interior_nodes)
    omega = tables.omega_int
    k0x = tables.k0_cross
    klx = tables.kl_cross(l)
    c0 = omega @ k0x
    B = P.T @ (omega[:, None] * klx)
    k0row = k0x @ tables.a_ext
    G = P.T @ ((omega * k0row)[:, None] * P)
    CROSS = G - (B * (tables.a_ext / c0)[None, :]) @ B.T
    E = B / c0[None, :]

    A = 0.5 * riesz_constant(2, s) * pi_l * (S + 2.0 * CROSS)
    A = 0.5 * (A + A.T)
    M = pi_l * (P.T @ (omega[:, None] * P))
    M = 0.5 * (M + M.T)

    constraint = 2.0 * math.pi * (P.T @ omega) if l == 0 else None
    return SpectralProblem(A=A, M=M, mode=l, s=s, grid=grid, constraint=constraint,
                           angular_factor=pi_l, basis_at_quad=P, ext_map=E,
                           S_omega=S, cross_G=G, cross_B=B, cross_c0=c0,
                           a_ext=tables.a_ext)


def rayleigh(problem: SpectralProblem, x) -> float:
    """Rayleigh quotient x'Ax / x'Mx."""
    x = np.asarray(x, dtype=float)
    xmx = float(x @ problem.M @ x)
    if xmx == 0.0:
        raise ValueError("Rayleigh quotient of the zero vector")
    return float(x @ problem.A @ x) / xmx


def dump_matrices(problem: SpectralProblem, prefix: str) -> tuple[str, str]:
    """Write A and M as row-major whitespace-separated text files.

    Returns the two paths (prefix_A.txt, prefix_M.txt); meant for external
    verification of the assembled pencil.
    """
    path_a, path_m = f"{prefix}_A.txt", f"{prefix}_M.txt"
    np.savetxt(path_a, problem.A, fmt="%.17g")
    np.savetxt(path_m, problem.M, fmt="%.17g")
    return path_a, path_m


# ----------------------------------------------------------------------
# full-2D validation path
# ----------------------------------------------------------------------

def _psi_rule(scale: float, n_osc: int = 8):
    """Graded composite Gauss rule on (0, pi] resolving the given peak scale."""
    depth = int(np.clip(math.ceil(math.log2(math.pi / max(scale, 1e-15))), 2, 52))
    pts = {0.0, math.pi}
    for j in range(1, n_osc):
        pts.add(math.pi * j / n_osc)
    for k in range(1, depth + 1):
        pts.add(math.pi * 0.5 ** k)
    breaks = np.array(sorted(pts))
    x, w = leggauss(8)
    a, b = breaks[:-1][:, None], breaks[1:][:, None]
    return (0.5 * (a + b) + 0.5 * (b - a) * x[None, :]).ravel(), \
           (0.5 * (b - a) * w[None, :]).ravel()


def _angular_energy(r, rho, s, u_left, u_right, thetas):
    """F(r,rho) = int dtheta int_{-pi}^{pi} dpsi |uL(r,th) - uR(rho,th+psi)|^2 k,

    with k = ((r-rho)^2 + 4 r rho sin^2(psi/2))^{-1-s}; the psi rule is
    graded to the peak width of each pair.
    """
    r = np.asarray(r, dtype=float)
    rho = np.asarray(rho, dtype=float)
    out = np.empty_like(r)
    dth = thetas[1] - thetas[0]
    eps = np.abs(r - rho) / (2.0 * np.sqrt(r * rho))
    depth_key = np.clip(np.ceil(np.log2(math.pi / np.clip(2 * eps, 1e-15, math.pi))), 2, 52)
    for d in np.unique(depth_key):
        idx = np.nonzero(depth_key == d)[0]
        psi, wpsi = _psi_rule(math.pi * 0.5 ** d)
        step = max(1, int(2e6) // (len(thetas) * len(psi)))
        for st in range(0, len(idx), step):
            ii = idx[st:st + step]
            rr = r[ii][:, None, None]
            pp = rho[ii][:, None, None]
            th = thetas[None, :, None]
            ps_ = psi[None, None, :]
            du = u_left(rr, th) - u_right(pp, th + ps_)
            ker = ((rr - pp) ** 2 + 4.0 * rr * pp * np.sin(0.5 * ps_) ** 2) ** (-1.0 - s)
            out[ii] = np.einsum("ptq,q->p", du * du * ker, wpsi) * dth * 2.0
    return out


def _default_exterior(polar: PolarGrid, u, s: float):
    """Exterior callable from the 2D minimal-extension formula on u's samples."""
    xy = polar.interior_xy().reshape(-1, 2)
    w = polar.interior_node_weights().ravel()
    uv = u(polar.radial.interior_nodes[:, None], polar.thetas[None, :]).ravel()

    def u_ext(rho, phi):
        rho_b, phi_b = np.broadcast_arrays(np.asarray(rho, dtype=float), phi)
        shape = rho_b.shape
        pts = np.stack([rho_b.ravel() * np.cos(np.broadcast_to(phi_b, shape).ravel()),
                        rho_b.ravel() * np.sin(np.broadcast_to(phi_b, shape).ravel())], axis=1)
        out = np.empty(len(pts))
        chunk = max(1, int(4e6) // len(xy))
        for st in range(0, len(pts), chunk):
            blk = pts[st:st + chunk]
            d2 = ((blk[:, None, :] - xy[None, :, :]) ** 2).sum(axis=-1)
            ker = w[None, :] * d2 ** (-(1.0 + s))
            out[st:st + len(blk)] = (ker @ uv) / ker.sum(axis=1)
        return out.reshape(shape)

    return u_ext


def make_mode_callable(grid: RadialGrid, s, parts):
    """(interior, exterior) callables for sums of f(r) cos/sin(l theta) terms.

    parts: iterable of (l, kind, coeffs_at_breakpoints), kind "cos"/"sin";
    the interior profile is the exact hat interpolant of the coefficients.
    The exterior callable evaluates the per-mode extension formula at each
    requested radius (a fast path for comparisons where the independence of
    the 2D extension formula is not the point).
    """
    s = as_frac_order(s)
    terms = []
    for l, kind, coeffs in parts:
        fn = np.cos if kind == "cos" else np.sin
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != grid.breaks_int.shape:
            raise ValueError("coefficients must live on the grid breakpoints")
        terms.append((int(l), fn, coeffs))

    def u_int(r, theta):
        r_b, th_b = np.broadcast_arrays(np.asarray(r, dtype=float), theta)
        out = np.zeros(r_b.shape)
        for l, fn, coeffs in terms:
            prof = np.interp(r_b.ravel(), grid.breaks_int, coeffs).reshape(r_b.shape)
            out = out + prof * fn(l * th_b)
        return out

    def u_ext(rho, phi):
        rho_b, ph_b = np.broadcast_arrays(np.asarray(rho, dtype=float), phi)
        flat = rho_b.ravel()
        uniq, inv = np.unique(flat, return_inverse=True)
        out = np.zeros(flat.shape)
        for l, fn, coeffs in terms:
            f_nodes = np.interp(grid.interior_nodes, grid.breaks_int, coeffs)
            prof_u = np.atleast_1d(extension_radial_mode(f_nodes, l, s, grid, r=uniq))
            out = out + prof_u[inv] * fn(l * np.broadcast_to(ph_b, rho_b.shape).ravel())
        return out.reshape(rho_b.shape)

    return u_int, u_ext


def assemble_full_2d(s, polar: PolarGrid, u, u_exterior=None) -> float:
    """Direct tensor quadrature of the Gagliardo energy over R^4 minus (B^c)^2.

    u and u_exterior are callables of (r, theta) accepting broadcast arrays;
    when u_exterior is omitted, the minimal extension is evaluated from u's
    samples on the polar grid.  Three-block decomposition B x B + 2 B x B^c,
    O(n^4)-style validation oracle intended for coarse grids.
    """
    s = as_frac_order(s)
    grid = polar.radial
    if u_exterior is None:
        u_exterior = _default_exterior(polar, u, s)

    breaks = grid.breaks_int
    n_cells = grid.n_cells
    q = grid.q
    nodes = grid.interior_nodes.reshape(n_cells, q)
    wts = grid.interior_weights.reshape(n_cells, q)
    th = polar.thetas
    use_jacobi = s > _S_SUBTRACT

    total = 0.0

    # B x B: separated radial cell pairs
    aa, bb = np.triu_indices(n_cells, k=2)
    if len(aa):
        r = np.repeat(nodes[aa], q, axis=1).ravel()
        rho = np.tile(nodes[bb], (1, q)).ravel()
        w = 2.0 * (np.repeat(wts[aa], q, axis=1) * np.tile(wts[bb], (1, q))).ravel()
        total += np.sum(w * r * rho * _angular_energy(r, rho, s, u, u, th))

    # B x B: diagonal radial cells
    tg_x, tg_w = leggauss(4)
    if use_jacobi:
        wj_x, wj_w = _gauss_jacobi_01(12, 1.0 - 2.0 * s)
    else:
        wj_x, wj_w = _geometric_w_panels(1.0, n_panels=10, ratio=8.0, q=4)
    for a in range(n_cells):
        xa, xb = breaks[a], breaks[a + 1]
        h = xb - xa
        wv = h * wj_x
        Wv = wj_w * (h ** (2.0 - 2.0 * s) if use_jacobi else h)
        tlen = (xb - wv) - xa
        t = xa + tlen[:, None] * (0.5 + 0.5 * tg_x)[None, :]
        Wt = tlen[:, None] * 0.5 * tg_w[None, :]
        r = t.ravel()
        rho = (t + wv[:, None]).ravel()
        wfac = (2.0 * Wv[:, None] * Wt).ravel() * r * rho
        if use_jacobi:
            wfac = wfac * np.broadcast_to(wv[:, None], t.shape).ravel() ** (2.0 * s - 1.0)
        total += np.sum(wfac * _angular_energy(r, rho, s, u, u, th))

    # B x B: adjacent radial cells
    if use_jacobi:
        xj_x, xj_w = _gauss_jacobi_01(10, 2.0 - 2.0 * s)
        eg_x, eg_w = leggauss(4)
        eta = 0.5 + 0.5 * eg_x
        weta = 0.5 * eg_w
        for a in range(n_cells - 1):
            xc = breaks[a + 1]
            ha, hb = xc - breaks[a], breaks[a + 2] - xc
            for swap in (False, True):
                al = ha * (xj_x[:, None] if not swap else xj_x[:, None] * eta[None, :])
                be = hb * (xj_x[:, None] * eta[None, :] if not swap else xj_x[:, None])
                al = np.broadcast_to(al, (10, 4))
                be = np.broadcast_to(be, (10, 4))
                r = (xc - al).ravel()
                rho = (xc + be).ravel()
                W = 2.0 * (xj_w[:, None] * weta[None, :] * ha * hb).ravel()
                xi = np.broadcast_to(xj_x[:, None], (10, 4)).ravel()
                wfac = W * r * rho * xi ** (2.0 * s - 1.0)
                total += np.sum(wfac * _angular_energy(r, rho, s, u, u, th))
    else:
        sub = np.array([0.0, 1e-3, 3e-2, 0.2, 1.0])
        g4_x, g4_w = leggauss(4)
        for a in range(n_cells - 1):
            xc = breaks[a + 1]
            ha, hb = xc - breaks[a], breaks[a + 2] - xc
            ea, eb = ha * sub, hb * sub
            for i in range(len(sub) - 1):
                al = 0.5 * (ea[i] + ea[i + 1]) + 0.5 * (ea[i + 1] - ea[i]) * g4_x
                wal = 0.5 * (ea[i + 1] - ea[i]) * g4_w
                for j in range(len(sub) - 1):
                    be = 0.5 * (eb[j] + eb[j + 1]) + 0.5 * (eb[j + 1] - eb[j]) * g4_x
                    wbe = 0.5 * (eb[j + 1] - eb[j]) * g4_w
                    r = np.repeat(xc - al, 4)
                    rho = np.tile(xc + be, 4)
                    W = 2.0 * (wal[:, None] * wbe[None, :]).ravel()
                    total += np.sum(W * r * rho * _angular_energy(r, rho, s, u, u, th))

    # B x B^c, counted twice in the decomposition
    ne = len(grid.exterior_nodes)
    r = np.repeat(grid.interior_nodes, ne)
    rho = np.tile(grid.exterior_nodes, len(grid.interior_nodes))
    w = np.repeat(grid.interior_weights, ne) * np.tile(grid.exterior_weights,
                                                       len(grid.interior_nodes))
    total += 2.0 * np.sum(w * r * rho * _angular_energy(r, rho, s, u, u_exterior, th))

    return float(total)

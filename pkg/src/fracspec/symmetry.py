"""Polarization, foliated Schwarz checks, nodal domains, and the eigenspace
classifier for sampled fields on the polar grid.

The discrete seminorm here is the lattice double sum over quadrature nodes
with the exact pair kernel and the diagonal excluded.  Because the node
set, weights and kernel are invariant under the reflections used, the
polarization inequality holds *exactly* for this discrete energy (it is a
sum of pointwise four-point inequalities), which is what the polarization
test suite exercises.  Accurate integral quadrature lives in the assembly
module instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import PolarGrid
from .kernelmath import as_frac_order


@dataclass(frozen=True)
class Direction:
    """Unit vector in R^2 (the normal of a reflection hyperplane)."""

    e: tuple

    def __post_init__(self):
        e = np.asarray(self.e, dtype=float)
        if e.shape != (2,) or abs(np.hypot(e[0], e[1]) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit 2-vector")
        object.__setattr__(self, "e", (float(e[0]), float(e[1])))

    @property
    def angle(self) -> float:
        return math.atan2(self.e[1], self.e[0])

    @classmethod
    def from_angle(cls, gamma: float) -> "Direction":
        return cls((math.cos(gamma), math.sin(gamma)))


E1 = Direction((1.0, 0.0))
E2 = Direction((0.0, 1.0))


@dataclass
class SampledField:
    """Values on a polar grid, interior (n_r, n_theta) plus exterior rings."""

    grid: PolarGrid
    values_int: np.ndarray
    values_ext: np.ndarray

    def __post_init__(self):
        self.values_int = np.asarray(self.values_int, dtype=float)
        self.values_ext = np.asarray(self.values_ext, dtype=float)
        ni = (len(self.grid.radial.interior_nodes), self.grid.n_theta)
        ne = (len(self.grid.radial.exterior_nodes), self.grid.n_theta)
        if self.values_int.shape != ni or self.values_ext.shape != ne:
            raise ValueError(f"expected shapes {ni} and {ne}")

    @classmethod
    def from_mode(cls, polar: PolarGrid, f_int, f_ext, l: int, kind: str) -> "SampledField":
        fn = np.cos if kind == "cos" else np.sin
        ang = fn(l * polar.thetas)
        return cls(polar, np.outer(np.asarray(f_int, dtype=float), ang),
                   np.outer(np.asarray(f_ext, dtype=float), ang))

    @classmethod
    def from_callable(cls, polar: PolarGrid, u, u_exterior=None) -> "SampledField":
        r_i = polar.radial.interior_nodes[:, None]
        r_e = polar.radial.exterior_nodes[:, None]
        th = polar.thetas[None, :]
        vi = u(r_i, th)
        ve = (u_exterior or u)(r_e, th)
        return cls(polar, np.broadcast_to(vi, (r_i.size, polar.n_theta)).copy(),
                   np.broadcast_to(ve, (r_e.size, polar.n_theta)).copy())

    def l2_norm(self) -> float:
        """Discrete L^2(B) norm (interior nodes only)."""
        w = self.grid.interior_node_weights()
        return math.sqrt(float(np.sum(w * self.values_int**2)))

    def mean(self) -> float:
        w = self.grid.interior_node_weights()
        return float(np.sum(w * self.values_int))

    def inner(self, other: "SampledField") -> float:
        w = self.grid.interior_node_weights()
        return float(np.sum(w * self.values_int * other.values_int))


def _reflection_index_map(grid: PolarGrid, e: Direction) -> np.ndarray:
    """Column permutation realizing theta -> 2 gamma + pi - theta on the grid."""
    n = grid.n_theta
    m_float = (2.0 * e.angle + math.pi) / grid.dtheta
    m = round(m_float)
    if abs(m_float - m) > 1e-9:
        raise ValueError("grid is not closed under reflection across this direction")
    return (m - np.arange(n)) % n


def polarize(u: SampledField, e: Direction) -> SampledField:
    """Two-point rearrangement across the hyperplane with normal e.

    min(u, u o sigma_e) on the halfspace x.e >= 0, max on the other; node
    values are only permuted/selected, so L^2(B) norm and mean are exact.
    """
    jmap = _reflection_index_map(u.grid, e)
    side = np.cos(u.grid.thetas - e.angle) >= 0.0  # x.e sign per angle column
    out_i = np.where(side[None, :],
                     np.minimum(u.values_int, u.values_int[:, jmap]),
                     np.maximum(u.values_int, u.values_int[:, jmap]))
    out_e = np.where(side[None, :],
                     np.minimum(u.values_ext, u.values_ext[:, jmap]),
                     np.maximum(u.values_ext, u.values_ext[:, jmap]))
    return SampledField(u.grid, out_i, out_e)


def reflect(u: SampledField, e: Direction) -> SampledField:
    """u o sigma_e on the grid."""
    jmap = _reflection_index_map(u.grid, e)
    return SampledField(u.grid, u.values_int[:, jmap], u.values_ext[:, jmap])


# ----------------------------------------------------------------------
# discrete seminorm
# ----------------------------------------------------------------------

_SEMINORM_CACHE: dict = {}


class _SeminormOperator:
    def __init__(self, polar: PolarGrid, s: float):
        xi = polar.interior_xy().reshape(-1, 2)
        xe = polar.exterior_xy().reshape(-1, 2)
        wi = polar.interior_node_weights().ravel()
        we = polar.exterior_node_weights().ravel()
        xy = np.vstack([xi, xe])
        w = np.concatenate([wi, we])
        n, ni = len(xy), len(xi)

        d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=-1)
        np.fill_diagonal(d2, 1.0)
        G = (w[:, None] * w[None, :]) * d2 ** (-(1.0 + s))
        np.fill_diagonal(G, 0.0)
        G[ni:, ni:] = 0.0  # the energy excludes exterior x exterior pairs
        self.G = G
        self.rowsum = G.sum(axis=1)
        self.n_int = ni

    def value(self, u_all: np.ndarray) -> float:
        return 2.0 * float(u_all @ (self.rowsum * u_all) - u_all @ (self.G @ u_all))


def _seminorm_operator(polar: PolarGrid, s: float) -> _SeminormOperator:
    key = (id(polar), float(s))
    if key not in _SEMINORM_CACHE:
        if len(_SEMINORM_CACHE) > 8:
            _SEMINORM_CACHE.clear()
        _SEMINORM_CACHE[key] = _SeminormOperator(polar, s)
    return _SEMINORM_CACHE[key]


def seminorm_discrete(u: SampledField, s) -> float:
    """Discrete three-block Gagliardo energy of the sampled field.

    Double sum over node pairs (interior-interior and, twice, the
    interior-exterior block) with weights w_p w_q |x_p - x_q|^{-2-2s};
    nonnegative, zero exactly on constants.
    """
    s = as_frac_order(s)
    op = _seminorm_operator(u.grid, s)
    return op.value(np.concatenate([u.values_int.ravel(), u.values_ext.ravel()]))


def four_point_identity(a: float, b: float, c: float, d: float) -> float:
    """(a-c)^2 - (b-c)^2 - (a-d)^2 + (b-d)^2, checked against 2(b-a)(c-d)."""
    lhs = (a - c) ** 2 - (b - c) ** 2 - (a - d) ** 2 + (b - d) ** 2
    rhs = 2.0 * (b - a) * (c - d)
    scale = max(1.0, a * a, b * b, c * c, d * d)
    if abs(lhs - rhs) > 1e-12 * scale:
        raise AssertionError(f"four-point identity violated: {lhs} vs {rhs}")
    return lhs


# ----------------------------------------------------------------------
# symmetry diagnostics
# ----------------------------------------------------------------------

def _ring_fourier(values: np.ndarray) -> np.ndarray:
    """Complex Fourier coefficients c_k, k = 0..n/2, per ring (rows)."""
    return np.fft.rfft(values, axis=1) / values.shape[1]


def antisymmetry_error(u: SampledField, e: Direction) -> float:
    """Relative L^2 defect of u + u o sigma_e (0 for exact antisymmetry)."""
    w = u.grid.interior_node_weights()
    mirrored = reflect(u, e)
    num = float(np.sum(w * (u.values_int + mirrored.values_int) ** 2))
    den = float(np.sum(w * u.values_int**2))
    if den == 0.0:
        raise ValueError("cannot test antisymmetry of the zero field")
    return math.sqrt(num / den)


def foliated_schwarz_check(u: SampledField, p: Direction, tol: float = 1e-9) -> bool:
    """Axial symmetry about R p with angularly nonincreasing ring profiles.

    Verified per interior ring through the angular Fourier expansion: with
    b_k = c_k e^{i k gamma}, axial symmetry about gamma means Im b_k = 0,
    and the profile b_0 + 2 sum Re(b_k) cos(k tau) must be nonincreasing on
    tau in [0, pi].  Exact for trigonometric-polynomial fields; no off-grid
    interpolation involved.
    """
    gamma = p.angle
    vals = u.values_int
    scale = np.max(np.abs(vals))
    if scale == 0.0:
        return True
    c = _ring_fourier(vals)
    k = np.arange(c.shape[1])
    b = c * np.exp(1j * k * gamma)[None, :]
    if np.max(np.abs(b.imag)) > tol * scale:
        return False
    tau = np.linspace(0.0, math.pi, 512)
    basis = np.cos(np.outer(k, tau))
    prof = (b.real * np.where(k == 0, 1.0, 2.0)[None, :]) @ basis
    return bool(np.all(np.diff(prof, axis=1) <= tol * scale))


def nodal_domains(u: SampledField, zero_tol: float | None = None) -> int:
    """Connected components of {|u| > tol} in B under grid adjacency.

    Flood fill with wrap-around in theta; edges join only nodes of equal
    sign (the discrete counterpart of components of {u != 0}, since a
    nodal line missing every grid node must not merge opposite lobes).
    """
    vals = u.values_int
    scale = np.max(np.abs(vals))
    if zero_tol is None:
        zero_tol = 1e-6 * scale
    active = np.abs(vals) > zero_tol
    if not active.any():
        raise ValueError("numerically zero field")
    sign = np.sign(vals)
    nr, nth = vals.shape
    labels = np.full(vals.shape, -1, dtype=int)
    count = 0
    for i0 in range(nr):
        for j0 in range(nth):
            if not active[i0, j0] or labels[i0, j0] >= 0:
                continue
            stack = [(i0, j0)]
            labels[i0, j0] = count
            while stack:
                i, j = stack.pop()
                for ii, jj in ((i - 1, j), (i + 1, j), (i, (j - 1) % nth), (i, (j + 1) % nth)):
                    if 0 <= ii < nr and active[ii, jj] and labels[ii, jj] < 0 \
                            and sign[ii, jj] == sign[i, j]:
                        labels[ii, jj] = count
                        stack.append((ii, jj))
            count += 1
    return count


def positive_lobe_direction(u: SampledField) -> Direction:
    """Normalized first angular Fourier moment on a mid-radius ring.

    For a ring profile A cos(theta - phi) the moment sum_j u_j e^{-i theta_j}
    equals A (n/2) e^{-i phi}, so the lobe sits at minus the moment's phase.
    """
    nr = u.values_int.shape[0]
    ring = u.values_int[nr // 2]
    c1 = np.sum(ring * np.exp(-1j * u.grid.thetas))
    if abs(c1) < 1e-12 * max(1.0, np.max(np.abs(ring))):
        return E1
    return Direction.from_angle(-float(np.angle(c1)))


# ----------------------------------------------------------------------
# eigenspace classifier
# ----------------------------------------------------------------------

@dataclass
class SymmetryReport:
    """Structure of one eigenspace multiplet against the radial/antisymmetric dichotomy."""

    eigenvalue: float
    dimension: int
    radial_count: int
    antisym_axes: list = field(default_factory=list)
    nodal_counts: list = field(default_factory=list)
    schwarz_directions: list = field(default_factory=list)
    verdict: str = "mixed"

    def as_dict(self) -> dict:
        return {
            "eigenvalue": self.eigenvalue,
            "dimension": self.dimension,
            "radial_count": self.radial_count,
            "antisym_axes": [list(a) for a in self.antisym_axes],
            "nodal_counts": list(self.nodal_counts),
            "schwarz_directions": [list(p) for p in self.schwarz_directions],
            "verdict": self.verdict,
        }


def _mode_antisym_axis(l: int, kind: str) -> Direction:
    """Hyperplane normal across which f(r) cos/sin(l theta) is antisymmetric."""
    if kind == "cos":
        gamma = math.pi * (1.0 - l) / (2.0 * l)
    else:
        gamma = math.pi * (2.0 - l) / (2.0 * l)
    return Direction.from_angle(gamma)


def fields_from_pair(problem, pair, polar: PolarGrid) -> list[SampledField]:
    """Sampled eigenfields of one eigenpair (cos and sin copies for l >= 1)."""
    f_int = problem.basis_at_quad @ pair.vector
    f_ext = problem.extension_values(pair.vector)
    if pair.mode == 0:
        return [SampledField.from_mode(polar, f_int, f_ext, 0, "cos")]
    return [SampledField.from_mode(polar, f_int, f_ext, pair.mode, k) for k in ("cos", "sin")]


def classify_eigenspace(multiplet, problems, polar: PolarGrid,
                        antisym_tol: float = 1e-6) -> SymmetryReport:
    """Classify a degenerate multiplet per the radial/antisymmetric dichotomy.

    multiplet: [(l, EigenPair)] at one eigenvalue; problems: {l: SpectralProblem}.
    Counts radial members, verifies each antisymmetric member (reflection
    defect, exactly two nodal domains, foliated Schwarz symmetry about its
    positive lobe) and enforces uniqueness per axis via a Gram test.
    """
    if not multiplet:
        raise ValueError("empty multiplet")
    mus = [pair.mu for _, pair in multiplet]
    if max(mus) - min(mus) > 1e-6 * max(1.0, abs(mus[0])):
        raise ValueError("inconsistent multiplet: eigenvalues disagree beyond cluster tolerance")

    report = SymmetryReport(eigenvalue=float(np.mean(mus)), dimension=0, radial_count=0)
    antisym_members = []  # (axis angle, field)
    all_anti = True

    for l, pair in multiplet:
        problem = problems[l]
        if problem.mode != l:
            raise ValueError("problem/mode mismatch in multiplet")
        fields = fields_from_pair(problem, pair, polar)
        report.dimension += len(fields)
        if l == 0:
            report.radial_count += 1
            all_anti = False
            report.nodal_counts.append(nodal_domains(fields[0]))
            continue
        for kind, fld in zip(("cos", "sin"), fields):
            axis = _mode_antisym_axis(l, kind)
            err = antisymmetry_error(fld, axis)
            ncount = nodal_domains(fld)
            p = positive_lobe_direction(fld)
            fs = foliated_schwarz_check(fld, p, tol=1e-6 * np.max(np.abs(fld.values_int)))
            report.nodal_counts.append(ncount)
            if err <= antisym_tol and ncount == 2 and fs:
                report.antisym_axes.append(np.asarray(axis.e))
                report.schwarz_directions.append(np.asarray(p.e))
                antisym_members.append((axis.angle % math.pi, fld))
            else:
                all_anti = False

    # at most one antisymmetric member per axis, modulo scaling
    for i in range(len(antisym_members)):
        for j in range(i + 1, len(antisym_members)):
            gi, fi = antisym_members[i]
            gj, fj = antisym_members[j]
            if abs(gi - gj) < 1e-9:
                cosang = abs(fi.inner(fj)) / (fi.l2_norm() * fj.l2_norm())
                if cosang < 1.0 - 1e-6:
                    raise ValueError("inconsistent multiplet: two independent "
                                     "antisymmetric members share one axis")

    n_anti = len(antisym_members)
    if report.radial_count > 0 and n_anti == 0:
        report.verdict = "all-radial"
    elif all_anti and n_anti == report.dimension and n_anti > 0:
        report.verdict = "all-antisymmetric"
    else:
        report.verdict = "mixed"
    return report

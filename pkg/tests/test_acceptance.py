"""Acceptance suite: every criterion asserted at its stated tolerance,
one PASS line printed per criterion (run with -s to see them)."""

import math

import mpmath as mp
import numpy as np
import pytest

from fracspec.assembly import (KernelTables, assemble_full_2d, assemble_mode_problem,
                               make_mode_callable)
from fracspec.eigen import first_nontrivial, minmax_sample, solve_generalized
from fracspec.extension import InteriorFunction, extend_minimal, neumann_residual
from fracspec.geometry import make_polar_grid, make_radial_grid, tail_bound
from fracspec.kernelmath import bbm_constant, riesz_constant
from fracspec.localref import local_spectrum, theta_root
from fracspec.symmetry import (E1, E2, SampledField, classify_eigenspace, polarize,
                               reflect, seminorm_discrete)

MU1_LOCAL = theta_root(1, 2, 1) ** 2  # 3.38995771667...; 3.3900 in round figures

_cache: dict = {}


def _grid(s: float, n: int):
    key = ("grid", s, n)
    if key not in _cache:
        rinf = tail_bound(s, 2, 1.0, 1e-3)
        grid = make_radial_grid(1.0, n, rinf, max(12, n // 2), grading=2.0)
        _cache[key] = (grid, KernelTables(grid, s))
    return _cache[key]


def _problem(l: int, s: float, n: int):
    key = ("prob", l, s, n)
    if key not in _cache:
        grid, tables = _grid(s, n)
        _cache[key] = assemble_mode_problem(l, s, grid, tables=tables)
    return _cache[key]


def _report(name: str, detail: str):
    print(f"[{name}] PASS  {detail}")


def test_a1_zero_mode():
    details = []
    for s in (0.25, 0.5, 0.75, 0.95):
        p0 = _problem(0, s, 48)
        pair0 = solve_generalized(p0, 1, constrain=False)[0]
        mu1 = solve_generalized(p0, 1)[0].mu
        assert abs(pair0.mu) <= 1e-8 * mu1
        ones = np.ones(p0.n_dof)
        ones /= math.sqrt(ones @ p0.M @ ones)
        assert abs(pair0.vector @ p0.M @ ones) >= 1.0 - 1e-8
        details.append(f"s={s}: mu0={pair0.mu:.2e}")
    _report("A1", "; ".join(details))


def test_a2_local_oracle():
    mp.mp.dps = 30

    def mp_root(fn, count, step=0.01, z0=0.05):
        roots, z_prev, f_prev = [], mp.mpf(z0), fn(mp.mpf(z0))
        z = mp.mpf(z0)
        while len(roots) < count:
            z += step
            f_cur = fn(z)
            if mp.sign(f_cur) != mp.sign(f_prev):
                lo, hi = z_prev, z
                for _ in range(80):
                    mid = (lo + hi) / 2
                    if mp.sign(fn(mid)) == mp.sign(fn(lo)):
                        lo = mid
                    else:
                        hi = mid
                roots.append(float((lo + hi) / 2))
            z_prev, f_prev = z, f_cur
        return roots[-1]

    # independent oracle: numerically differentiated Theta_l at 10x scan resolution
    theta0 = lambda r: mp.diff(lambda t: mp.besselj(0, t), r)
    theta1 = lambda r: mp.diff(lambda t: mp.besselj(1, t), r)
    j0 = lambda r: mp.besselj(0, r)

    ref_jp11 = mp_root(theta1, 1)
    ref_jp01 = mp_root(theta0, 1)
    ref_j01 = mp_root(j0, 1)
    assert theta_root(1, 2, 1) == pytest.approx(ref_jp11, rel=1e-8)
    assert theta_root(0, 2, 1) == pytest.approx(ref_jp01, rel=1e-8)
    spec = local_spectrum(2, 1.0, 6)
    assert spec.dirichlet_first == pytest.approx(ref_j01**2, rel=1e-8)
    for r in (0.5, 0.9):
        assert spec.friedland_chain(r)
    _report("A2", f"j'_11={ref_jp11:.9f}, j'_01={ref_jp01:.9f}, j_01={ref_j01:.9f}; "
                  f"chain holds at r=0.5, 0.9")


def _converged_mu1(s: float) -> tuple:
    n, prev = 24, None
    while True:
        mu = solve_generalized(_problem(1, s, n), 1)[0].mu
        if prev is not None and abs(mu - prev) / abs(prev) < 0.005:
            return mu, n
        prev, n = mu, 2 * n
        assert n <= 192, "mesh refinement did not settle"


def test_a3_stability_sweep():
    svals = (0.7, 0.9, 0.95, 0.99)
    gaps = []
    meshes = []
    for s in svals:
        mu, n = _converged_mu1(s)
        gaps.append(abs(mu - MU1_LOCAL) / MU1_LOCAL)
        meshes.append(n)
    assert all(b < a for a, b in zip(gaps, gaps[1:])), f"gaps not monotone: {gaps}"
    assert gaps[-1] <= 0.05
    _report("A3", "gaps " + ", ".join(f"s={s}: {g:.4f}" for s, g in zip(svals, gaps))
            + f" (meshes {meshes})")


def test_a4_antisymmetric_eigenspace():
    details = []
    for s in (0.9, 0.95, 0.99):
        grid, tables = _grid(s, 48)
        results = {l: (_problem(l, s, 48), solve_generalized(_problem(l, s, 48), 3))
                   for l in range(3)}
        mu1, members = first_nontrivial(results)
        assert [l for l, _ in members] == [1], f"minimal branch not l=1 at s={s}"
        pair = members[0][1]
        assert pair.multiplicity == 2  # = N
        polar = make_polar_grid(grid, 64)
        problems = {l: prob for l, (prob, _) in results.items()}
        report = classify_eigenspace(members, problems, polar, antisym_tol=1e-6)
        assert report.verdict == "all-antisymmetric"
        assert report.dimension == 2
        assert report.nodal_counts == [2, 2]
        details.append(f"s={s}: mu1={mu1:.5f}")
    _report("A4", "; ".join(details) + "; verdict all-antisymmetric, dim 2, nodal (2,2)")


def test_a5_polarization_suite():
    s = 0.5
    grid = make_radial_grid(1.0, 8, 4.0, 6, grading=1.5, q=3)
    polar = make_polar_grid(grid, 32)
    ni = (len(grid.interior_nodes), polar.n_theta)
    ne = (len(grid.exterior_nodes), polar.n_theta)
    rng = np.random.default_rng(12345)

    worst = -np.inf
    for _ in range(1000):
        u = SampledField(polar, rng.standard_normal(ni), rng.standard_normal(ne))
        e = (E1, E2)[rng.integers(2)]
        pu = polarize(u, e)
        worst = max(worst, seminorm_discrete(pu, s) - seminorm_discrete(u, s))
        assert seminorm_discrete(pu, s) <= seminorm_discrete(u, s) + 1e-12
        assert abs(pu.l2_norm() - u.l2_norm()) <= 1e-12
        assert abs(pu.mean() - u.mean()) <= 1e-12

    # crafted field violating both equality alternatives: strict decrease
    v = SampledField(polar, rng.standard_normal(ni), rng.standard_normal(ne))
    pv = polarize(v, E1)
    assert not np.array_equal(pv.values_int, v.values_int)
    assert not np.array_equal(pv.values_int, reflect(v, E1).values_int)
    assert seminorm_discrete(pv, s) < seminorm_discrete(v, s) - 1e-9

    # crafted symmetric / antisymmetric fields: exact equality cases
    w = SampledField(polar, rng.standard_normal(ni), rng.standard_normal(ne))
    sym = SampledField(polar, w.values_int + reflect(w, E1).values_int,
                       w.values_ext + reflect(w, E1).values_ext)
    psym = polarize(sym, E1)
    assert np.array_equal(psym.values_int, sym.values_int)
    assert abs(seminorm_discrete(psym, s) - seminorm_discrete(sym, s)) <= 1e-12
    f = grid.interior_nodes * (1.1 - grid.interior_nodes)
    anti = SampledField.from_mode(polar, f, np.zeros(len(grid.exterior_nodes)), 1, "cos")
    panti = polarize(anti, E1)
    assert np.array_equal(panti.values_int, reflect(anti, E1).values_int)
    _report("A5", f"1000 fields, worst increase {worst:.2e} <= 1e-12; "
                  "strict decrease and equality cases verified")


def test_a6_minimal_extension():
    s = 0.6
    fn = lambda r, th: r * np.cos(th)
    rng = np.random.default_rng(99)
    probes = [(float(r), float(a)) for r, a in
              zip(rng.uniform(1.05, 4.0, 20), rng.uniform(0, 2 * np.pi, 20))]
    probes_xy = [(r * math.cos(a), r * math.sin(a)) for r, a in probes]

    def residuals(n):
        grid = make_radial_grid(1.0, n, 8.0, 8, grading=2.0)
        polar = make_polar_grid(grid, 8 * n)
        u = InteriorFunction(polar, grid.interior_nodes[:, None] * np.cos(polar.thetas)[None, :])
        v = extend_minimal(u, s)
        # two-level evaluation IS the certified quadrature-error estimate;
        # the residual proper uses a much finer reference rule
        res = np.array([abs(neumann_residual(v, x, s, u=fn, refine=4)) for x in probes_xy])
        cert = np.array([abs(neumann_residual(v, x, s, u=fn, refine=2)) for x in probes_xy])
        return res, cert

    res16, cert16 = residuals(16)
    floor = 1e-13
    assert np.all(res16 <= 10.0 * np.maximum(cert16, floor))
    res8, _ = residuals(8)
    assert res16.max() < res8.max()

    # seminorm optimality: [u~] <= [u~ + phi], strict for ||phi|| > 0
    grid, _ = _grid(s, 24)
    problem = _problem(1, s, 24)
    x = np.random.default_rng(7).standard_normal(problem.n_dof)
    t = problem.extension_values(x)
    base = problem.energy_with_exterior(x, t)
    rng2 = np.random.default_rng(8)
    for _ in range(100):
        phi = rng2.standard_normal(len(t))
        assert problem.energy_with_exterior(x, t + phi) > base
    _report("A6", f"max residual n=8: {res8.max():.2e} -> n=16: {res16.max():.2e}; "
                  "100 exterior perturbations strictly increase the seminorm")


def test_a7_bbm_limit():
    target = bbm_constant(2) * math.pi  # K_2 * int |grad x_1|^2 = pi^2/2
    hs, vals = [], []
    for s in (0.9, 0.99, 0.999):
        grid, tables = _grid(s, 48)
        problem = assemble_mode_problem(1, s, grid, tables=tables)
        energy = problem.seminorm_quadratic(grid.breaks_int.copy())
        hs.append(1.0 - s)
        vals.append((1.0 - s) * energy)
    # Richardson with h and h^2 corrections through all three points
    V = np.vander(np.asarray(hs), 3, increasing=True)
    limit = np.linalg.solve(V, np.asarray(vals))[0]
    assert limit == pytest.approx(target, rel=0.02)
    _report("A7", f"extrapolated {limit:.6f} vs target {target:.6f} "
                  f"(rel {abs(limit-target)/target:.2e}); resolves the K_N convention")


def test_a8_mode_reduction_equivalence():
    s = 0.5
    grid = make_radial_grid(1.0, 10, 6.0, 8, grading=2.0, q=3)
    polar = make_polar_grid(grid, 32)
    rels = []
    for l in (0, 1, 2):
        coeffs = grid.breaks_int ** max(l, 1) * (1.2 - grid.breaks_int)
        quad_mode = assemble_mode_problem(l, s, grid).seminorm_quadratic(coeffs)
        ui, ue = make_mode_callable(grid, s, [(l, "cos", coeffs)])
        quad_full = assemble_full_2d(s, polar, ui, ue)
        rels.append(abs(quad_full - quad_mode) / quad_mode)
        assert rels[-1] <= 1e-3
    c1 = grid.breaks_int * (1.2 - grid.breaks_int)
    c2 = grid.breaks_int**2 * (1.2 - grid.breaks_int)
    up, uep = make_mode_callable(grid, s, [(1, "cos", c1), (2, "cos", c2)])
    um, uem = make_mode_callable(grid, s, [(1, "cos", c1), (2, "cos", -c2)])
    cross = 0.25 * (assemble_full_2d(s, polar, up, uep) - assemble_full_2d(s, polar, um, uem))
    d1 = assemble_mode_problem(1, s, grid).seminorm_quadratic(c1)
    d2 = assemble_mode_problem(2, s, grid).seminorm_quadratic(c2)
    cross_rel = abs(cross) / math.sqrt(d1 * d2)
    assert cross_rel <= 1e-6
    _report("A8", f"rel errors l=0,1,2: {rels[0]:.1e}, {rels[1]:.1e}, {rels[2]:.1e}; "
                  f"cross-mode {cross_rel:.1e}")


def test_a9_minmax_sampling():
    s = 0.6
    grid = make_radial_grid(1.0, 19, 8.0, 8)  # 20-dim problem
    problem = assemble_mode_problem(1, s, grid)
    pairs = solve_generalized(problem, 3)
    for n in (1, 2, 3):
        attained = minmax_sample(problem, n, trials=1, seed=0)
        assert attained == pytest.approx(pairs[n - 1].mu, rel=1e-10)
        sampled = minmax_sample(problem, n, trials=500, seed=42)
        assert sampled >= pairs[n - 1].mu - 1e-10
    _report("A9", "500 random subspaces never fall below mu_n, eigenvector span attains it")


def test_a10_constant_consistency():
    val = riesz_constant(2, 0.999) / (2.0 * (1.0 - 0.999)) * bbm_constant(2)
    assert 0.99 <= val <= 1.01
    _report("A10", f"c/(2(1-s)) * K_2 = {val:.6f} at s = 0.999")


# The threshold s* of the antisymmetry theorem is deliberately not asserted
# anywhere: the suite reports observed branch ordering per s only.

import numpy as np
import pytest

from fracspec.geometry import Ball, make_polar_grid, make_radial_grid, tail_bound


def test_interior_weights_sum_to_radius():
    grid = make_radial_grid(1.0, 16, 4.0, 8, grading=1.0)
    assert np.sum(grid.interior_weights) == pytest.approx(1.0, abs=1e-12)
    grid2 = make_radial_grid(2.5, 16, 10.0, 8, grading=3.0)
    assert np.sum(grid2.interior_weights) == pytest.approx(2.5, abs=1e-12)


def test_grading_clusters_toward_boundary():
    grid = make_radial_grid(1.0, 16, 4.0, 8, grading=2.0)
    cells = np.diff(grid.breaks_int)
    assert np.argmin(cells) == len(cells) - 1  # smallest interior cell at r = R
    uni = make_radial_grid(1.0, 16, 4.0, 8, grading=1.0)
    assert np.allclose(np.diff(uni.breaks_int), 1.0 / 16, atol=1e-14)
    ext_cells = np.diff(grid.breaks_ext)
    assert ext_cells[0] < ext_cells[-1] / 10.0  # exterior cells cluster toward R+


def test_polynomial_exactness():
    grid = make_radial_grid(1.0, 8, 4.0, 8, grading=1.7, q=4)
    # q = 4 Gauss per panel integrates degree <= 7 exactly
    for deg in range(8):
        exact = 1.0 / (deg + 1.0)
        got = np.sum(grid.interior_weights * grid.interior_nodes**deg)
        assert got == pytest.approx(exact, rel=1e-12)


def test_refinement_consistency():
    exact = np.cos(1.0) + np.sin(1.0) - 1.0  # int_0^1 cos(r) r dr
    errs = []
    for n in (4, 8, 16):
        g = make_radial_grid(1.0, n, 4.0, 8, grading=1.0, q=2)
        errs.append(abs(np.sum(g.interior_weights * g.interior_nodes * np.cos(g.interior_nodes)) - exact))
    # q = 2 composite Gauss is order 4
    assert errs[1] < errs[0] / 8.0
    assert errs[2] < errs[1] / 8.0


def test_exterior_rule_integrates_kernel_tail():
    s = 0.5
    rinf = tail_bound(s, 2, 1.0, 1e-4)
    grid = make_radial_grid(1.0, 16, rinf, 32, grading=2.0, q=6)
    got = np.sum(grid.exterior_weights * grid.exterior_nodes ** (-1.0 - 2.0 * s))
    exact = (1.0 - rinf ** (-2.0 * s)) / (2.0 * s)  # antiderivative of r^{-1-2s}
    assert got == pytest.approx(exact, rel=1e-6)


def test_construction_errors():
    with pytest.raises(ValueError):
        make_radial_grid(1.0, 2, 4.0, 8)
    with pytest.raises(ValueError):
        make_radial_grid(1.0, 8, 4.0, 2)
    with pytest.raises(ValueError):
        make_radial_grid(1.0, 8, 0.5, 8)
    with pytest.raises(ValueError):
        make_radial_grid(1.0, 8, 4.0, 8, grading=0.5)
    with pytest.raises(ValueError):
        Ball(-1.0)


def test_tail_bound_properties():
    r1 = tail_bound(0.5, 2, 1.0, 1e-4)
    assert np.isfinite(r1) and r1 > 1.0
    # the analytic bound holds at the returned radius
    s, R = 0.5, 1.0

    def tail(a):
        return a ** (-2 * s) / (2 * s) + R * a ** (-1 - 2 * s) / (1 + 2 * s)

    assert tail(r1 - R) <= 1e-4 * tail(R)
    # halving tol never shrinks R_inf
    assert tail_bound(0.5, 2, 1.0, 5e-5) >= r1
    # faster kernel decay allows a smaller box
    assert tail_bound(0.9, 2, 1.0, 1e-4) < tail_bound(0.1, 2, 1.0, 1e-4)


def test_polar_grid_validation(small_grid):
    with pytest.raises(ValueError):
        make_polar_grid(small_grid, 6)
    with pytest.raises(ValueError):
        make_polar_grid(small_grid, 33)
    polar = make_polar_grid(small_grid, 32)
    assert polar.thetas.shape == (32,)
    w = polar.interior_node_weights()
    # node weights tile the disk: sum = pi R^2
    assert np.sum(w) == pytest.approx(np.pi, rel=1e-12)


def test_grid_refine_keeps_shape(small_grid):
    fine = small_grid.refine(2)
    assert fine.n_cells == 2 * small_grid.n_cells
    assert fine.R_inf == small_grid.R_inf

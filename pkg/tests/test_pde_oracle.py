import math

import numpy as np
import pytest

from weylheat import pde_oracle as po
from weylheat.errors import DomainError, InvalidParameter
from weylheat.gauss_kernels import EvalPoint


@pytest.mark.parametrize("eta", ["sgn", "N1", "N2", "triv"])
def test_fd_matches_square_kernels(eta):
    expr = po.kernel_expr("i2", eta)
    y = (1.5, 0.75)
    sol = po.solve_heat_fd(po.auto_grid(expr, y, 0.5, 0.04), y, 0.5)
    c = po.compare_fd(sol)
    assert c.n_compared > 100
    assert c.max_rel_error < 0.02


def test_half_line_dirichlet():
    c = po.halfspace_fd(h=0.02)
    assert c.passed


def test_neumann_mass_conserved():
    expr = po.kernel_expr("i2", "triv")
    y = (1.5, 0.75)
    sol = po.solve_heat_fd(po.auto_grid(expr, y, 0.3, 0.05), y, 0.3, record_mass=True)
    assert sol.mass_drift() < 1e-10


def test_dirichlet_walls_pinned():
    expr = po.kernel_expr("i2", "sgn")
    y = (1.5, 0.75)
    sol = po.solve_heat_fd(po.auto_grid(expr, y, 0.3, 0.05), y, 0.3)
    assert np.all(sol.values[sol.grid.pinned] == 0.0)


def test_self_convergence_order():
    st = po.self_convergence(po.kernel_expr("i2", "sgn"), (1.0, 0.5), 0.25, 0.07)
    assert abs(st.order - 2.0) <= 0.3
    assert abs(st.error_order - 2.0) <= 0.3


def test_symmetry_through_solver():
    expr = po.kernel_expr("i2", "N1")
    assert po.symmetry_defect(expr, (1.6, 0.6), (1.2, 0.4), 0.3, 0.05) < 1e-10


def test_wall_slope_finite_positive():
    # u(x)/dist along the inward normal of {x2 = 0} on the lattice
    expr = po.kernel_expr("i2", "sgn")
    h = 0.025
    y = (1.5, 0.75)
    sol = po.solve_heat_fd(po.auto_grid(expr, y, 0.5, h), y, 0.5)
    i1 = int(round(1.5 / h))
    nodes = np.array([[i1, j] for j in (1, 2, 3, 4)])
    slopes = sol.at(nodes) / (nodes[:, 1] * h)
    assert np.all(slopes > 0) and np.all(np.isfinite(slopes))
    assert np.ptp(slopes) / slopes.mean() < 0.05


def test_source_near_wall_rejected():
    expr = po.kernel_expr("i2", "sgn")
    with pytest.raises(DomainError):
        po.solve_heat_fd(po.auto_grid(expr, (1.5, 0.05), 0.5, 0.05), (1.5, 0.05), 0.5)


def test_hex_chamber_has_no_lattice():
    with pytest.raises(InvalidParameter):
        po.make_grid(po.kernel_expr("i2", "sgn", m=3), 0.1, 2.0)


@pytest.mark.parametrize("case", po.SEMIGROUP_CASES, ids=lambda c: c.name)
def test_semigroup(case):
    r = po.semigroup_check(case.expr(), case.x, case.y, case.t, case.s)
    assert r.defect < case.threshold


@pytest.mark.parametrize("system,eta,kw,x,y", [
    ("i2", "sgn", {}, (1.5, 0.5), (1.2, 0.3)),
    ("i2", "N2", {}, (1.5, 0.5), (1.0, 0.7)),
    ("i2", "sgn", {"m": 3}, (1.5, 0.2), (1.0, -0.3)),
    ("orth", "1", {"d": 2, "k": 1}, (0.3, 1.0), (-0.5, 0.7)),
])
def test_heat_equation_residual(system, eta, kw, x, y):
    expr = po.kernel_expr(system, eta, **kw)
    res, ratios = po.residual_orders(expr, EvalPoint(x, y, 0.4), 0.004)
    assert res[-1] < 1e-5
    assert all(3.5 < r < 4.5 for r in ratios)


def test_residual_rejects_wall_points():
    expr = po.kernel_expr("i2", "sgn")
    with pytest.raises(DomainError):
        po.residual_check(expr, EvalPoint((1.0, 0.001), (1.0, 0.5), 0.5), 0.01)


def test_kernel_expr_geometry():
    e = po.kernel_expr("i2", "sgn")
    assert e.inside((2.0, 1.0)) and not e.inside((1.0, 2.0))
    assert e.distance((2.0, 1.0)) == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(InvalidParameter):
        po.kernel_expr("i2", "sgn", m=5)

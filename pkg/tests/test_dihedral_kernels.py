import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from weylheat.dihedral_kernels import (bound_dihedral, change_variables, dihedral_eval, g4_limit_s0,
                                       g_function, kernel_dihedral_array, kernel_I3, kernel_I4, psi_I4,
                                       psi_I4_primed_N1, scaled_psi_I4)
from weylheat.errors import DomainError, InvalidParameter
from weylheat.gauss_kernels import EvalPoint, gauss_kernel

SQRT3 = math.sqrt(3.0)


def _cone_point(m, r, a):
    lo = 0.0 if m % 2 == 0 else -math.pi / (2 * m)
    ang = lo + a * math.pi / m
    return np.array([r * math.cos(ang), r * math.sin(ang)])


radius = st.floats(0.1, 5.0)
angle = st.floats(0.02, 0.98)


def test_sgn_vanishes_on_wall():
    assert kernel_I4("sgn", EvalPoint([2.0, 0.0], [1.5, 0.5], 0.5)) == 0.0
    assert kernel_I4("sgn", EvalPoint([1.0, 1.0], [1.5, 0.5], 0.5)) == 0.0


def test_sgn_linear_vanishing():
    y = [2.0, 0.7]
    ratios = [kernel_I4("sgn", EvalPoint([2.0, e], y, 0.5)) / e for e in (1e-3, 1e-4, 1e-5)]
    assert ratios[0] > 0
    assert ratios[2] == pytest.approx(ratios[1], rel=1e-3)


def test_n2_wall_behaviour():
    y = [2.0, 0.7]
    assert kernel_I4("N2", EvalPoint([1.3, 0.0], y, 0.5)) == 0.0
    assert kernel_I4("N2", EvalPoint([1.3, 1.3], y, 0.5)) > 0


def test_triv_long_time():
    x, y = np.array([[2.0, 1.0]]), np.array([[3.0, 1.0]])
    vals = [t * kernel_dihedral_array(4, "triv", x, y, t)[0] for t in (1e5, 1e6, 1e7)]
    # all eight images tend to (4 pi t)^{-1}
    assert vals[2] == pytest.approx(vals[1], rel=1e-4)
    assert vals[2] == pytest.approx(8 / (4 * math.pi), rel=1e-5)


@given(radius, angle, radius, angle, st.floats(0.2, 3.0))
def test_n1_primed_form(r1, a1, r2, a2, t):
    x, y = _cone_point(4, r1, a1), _cone_point(4, r2, a2)
    direct = psi_I4("N1", t, x, y)
    primed = psi_I4_primed_N1(t, x, y)
    assume(primed > 1e-250)
    assert direct == pytest.approx(primed, rel=1e-13)


@given(radius, angle, radius, angle, st.floats(0.2, 3.0))
def test_ordering(r1, a1, r2, a2, t):
    x, y = _cone_point(4, r1, a1), _cone_point(4, r2, a2)
    v = {e: scaled_psi_I4(e, x, y, t) for e in ("sgn", "N1", "N2", "triv")}
    for mid in ("N1", "N2"):
        assert v["sgn"] <= v[mid] * (1 + 1e-14)
        assert v[mid] <= v["triv"] * (1 + 1e-14)


@given(radius, angle, radius, angle)
def test_square_factorization_at_half(r1, a1, r2, a2):
    x, y = _cone_point(4, r1, a1), _cone_point(4, r2, a2)
    s, X, Y = change_variables(4, x, y)
    with mpmath.workdps(60):
        x1, x2, y1, y2 = (mpmath.mpf(float(v)) for v in (*x, *y))
        psi = mpmath.sinh(x1 * y1) * mpmath.sinh(x2 * y2) - mpmath.sinh(x2 * y1) * mpmath.sinh(x1 * y2)
        lhs = float(mpmath.exp(-(x1 * y1 + x2 * y2)) * psi)
    rhs = 0.25 * -math.expm1(-2 * X) * -math.expm1(-2 * s * Y) * g_function(4, s, X, Y)
    assume(lhs > 1e-280)
    assert rhs == pytest.approx(lhs, rel=1e-12)


def test_g4_edges_and_monotone():
    assert g_function(4, 0.4, 2.0, 2.0) == 0.0
    assert g_function(4, 0.4, 2.0, 2.0 - 1e-12) < 1e-11
    assert g_function(4, 0.4, 2.0 + 1e-12, 2.0) < 1e-11
    X = np.linspace(1.01, 30, 400)
    G = g_function(4, 0.3, X, 1.0)
    assert np.all(np.diff(G) > 0)


def test_g4_limits():
    X, Y = 2.5, 1.2
    assert g4_limit_s0(X, Y) == pytest.approx(1 - X * math.sinh(Y) / (Y * math.sinh(X)), rel=1e-13)
    s = 0.35
    near = g_function(4, s, X, 1e-9)
    assert near == pytest.approx(1 - math.sinh(s * X) / (s * math.sinh(X)), rel=1e-7)


@given(st.floats(-0.99, 0.99), st.floats(0.01, 30), st.floats(0.01, 30))
def test_g3_swap_symmetry(s, X, Y):
    assert g_function(3, s, X, Y) == pytest.approx(g_function(3, -s, Y, X), rel=1e-12, abs=1e-300)


@given(st.floats(0.01, 0.99), st.floats(0.01, 40), st.floats(0.0, 1.0))
def test_g_in_unit_interval(s, X, frac):
    G = g_function(4, s, X, frac * X)
    assert 0.0 <= G < 1.0


def test_change_variables_examples():
    assert change_variables(4, [2.0, 1.0], [3.0, 1.0]) == pytest.approx((1 / 3, 6.0, 3.0))
    s, X, Y = change_variables(3, [2.0, 0.0], [1.0, 0.0], strict=False)
    assert (s, X, Y) == pytest.approx((0.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        change_variables(4, [2.0, 0.0], [3.0, 1.0])


@given(radius, angle, radius, angle)
def test_change_variables_identity(r1, a1, r2, a2):
    x, y = _cone_point(4, r1, a1), _cone_point(4, r2, a2)
    s, X, Y = change_variables(4, x, y)
    lhs = (x[0] - x[1]) * (y[0] - y[1])
    assert lhs == pytest.approx((1 - s) * (X - Y), rel=1e-12, abs=1e-14)


def test_bounds_examples():
    p = EvalPoint([2.0, 0.5], [1.0, 0.3], 0.7)
    assert bound_dihedral(4, "triv", p) == pytest.approx(gauss_kernel(2, 0.7, p.x - p.y), rel=1e-14)
    assert bound_dihedral(3, "sgn", EvalPoint([SQRT3, 1.0], [2.0, 0.1], 0.5)) == pytest.approx(0.0, abs=1e-15)


@given(radius, angle, st.floats(0.2, 3.0))
def test_i3_sgn_vanishes_on_boundary(r2, a2, t):
    y = _cone_point(3, r2, a2)
    for x in ([SQRT3, 1.0], [SQRT3, -1.0]):
        assert abs(kernel_I3("sgn", EvalPoint(x, y, t))) <= 1e-14 * gauss_kernel(2, t, np.zeros(2))


def test_dihedral_eval_scales_to_half():
    ev = dihedral_eval(4, "det", EvalPoint([2.0, 1.0], [3.0, 1.0], 2.0))
    assert ev.eta == "sgn" and ev.point.t == pytest.approx(0.5)
    with pytest.raises(InvalidParameter):
        dihedral_eval(3, "N1", EvalPoint([2.0, 0.0], [3.0, 0.0], 1.0))

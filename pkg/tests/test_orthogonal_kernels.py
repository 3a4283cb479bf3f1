import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weylheat.errors import InvalidParameter
from weylheat.estimate_lab import inequality_suite
from weylheat.gauss_kernels import EvalPoint, gauss_kernel, kernel_reflection_sum, make_spec
from weylheat.orthogonal_kernels import (OrthogonalSpec, bound_orthogonal, bound_orthogonal_array,
                                         halfspace_bound_compare, kernel_orthogonal, kernel_orthogonal_array,
                                         log_bound_orthogonal_array, log_kernel_orthogonal_array)
from weylheat.reflection_core import build_system


def test_half_line_dirichlet_closed_form():
    spec = OrthogonalSpec(1, 1, (1,))
    p = EvalPoint([1.0], [1.0], 0.25)
    assert kernel_orthogonal(spec, p) == pytest.approx((1 - math.exp(-4)) / math.sqrt(math.pi), rel=1e-14)
    assert kernel_orthogonal(spec, p) == pytest.approx(
        gauss_kernel(1, 0.25, [0.0]) - gauss_kernel(1, 0.25, [2.0]), rel=1e-14)


def test_neumann_dominates_free():
    spec = OrthogonalSpec(3, 2, (0, 0))
    x, y = np.array([0.3, 1.0, 2.0]), np.array([-1.0, 0.5, 0.2])
    assert kernel_orthogonal(spec, EvalPoint(x, y, 0.7)) >= gauss_kernel(3, 0.7, x - y)


def test_bound_examples():
    x, y, t = np.array([0.4, 1.3]), np.array([2.0, 0.2]), 0.9
    free = gauss_kernel(2, t, x - y)
    assert bound_orthogonal(OrthogonalSpec(2, 2, (0, 0)), EvalPoint(x, y, t)) == pytest.approx(free, rel=1e-15)
    one = OrthogonalSpec(1, 1, (1,))
    a = 1.3 * 0.2
    assert bound_orthogonal(one, EvalPoint([1.3], [0.2], t)) == pytest.approx(
        a / (a + t) * gauss_kernel(1, t, [1.1]), rel=1e-14)


def test_long_time_decay_exponent():
    spec = OrthogonalSpec(3, 2, (1, 0))
    x, y = np.array([[0.5, 1.0, 2.0]]), np.array([[-1.0, 2.0, 1.0]])
    ts = np.array([1e5, 1e6])
    lk = log_kernel_orthogonal_array(spec, np.repeat(x, 2, 0), np.repeat(y, 2, 0), ts)
    slope = (lk[1] - lk[0]) / math.log(10)
    assert slope == pytest.approx(spec.decay_exponent, abs=1e-3)


def test_spec_validation():
    with pytest.raises(InvalidParameter):
        OrthogonalSpec(2, 3, (0, 0, 0))
    with pytest.raises(InvalidParameter):
        OrthogonalSpec(2, 1, (2,))
    assert OrthogonalSpec.parse(3, 2, "10").J_eta == (1,)
    assert OrthogonalSpec.parse(3, 2, "det").dirichlet_coords == (1, 2)


coord = st.floats(-3, 3)
pos = st.floats(0.05, 4)


@given(coord, pos, pos, coord, pos, pos, st.floats(0.2, 2.0), st.sampled_from(["00", "01", "10", "11"]))
def test_tensorization_matches_image_sum(x1, x2, x3, y1, y2, y3, t, eta):
    spec = OrthogonalSpec.parse(3, 2, eta)
    label = {"00": "triv", "11": "det"}.get(eta, "eta=" + eta)
    ks = make_spec(build_system("orthogonal", d=3, k=2), label)
    p = EvalPoint([x1, x2, x3], [y1, y2, y3], t)
    kv = kernel_reflection_sum(ks, p, "extended")
    if kv.digits_lost < 6:
        assert kernel_orthogonal(spec, p) == pytest.approx(kv.value, rel=1e-12)


def test_two_sided_ratio_is_bounded_on_grid():
    spec = OrthogonalSpec(1, 1, (1,))
    g = np.geomspace(1e-3, 1e3, 120)
    xx, yy = np.meshgrid(g, g)
    x, y = xx.reshape(-1, 1), yy.reshape(-1, 1)
    t = np.full(len(x), 0.5)
    lr = log_kernel_orthogonal_array(spec, x, y, t) - log_bound_orthogonal_array(spec, x, y, t)
    # the ratio is (1 - e^{-u})(1 + 1/u) with u = xy/t, whose range is (1, 1.29843)
    u = np.geomspace(1e-6, 1e6, 200001)
    top = float(np.max(-np.expm1(-u) * (1 + 1 / u)))
    assert np.all(np.isfinite(lr))
    assert np.exp(lr.min()) >= 1.0 - 1e-12
    assert np.exp(lr.max()) <= top * (1 + 1e-9)


def test_halfspace_compare_forced_value():
    c = halfspace_bound_compare(EvalPoint([100.0], [0.01], 1.0))
    assert c.discrepancy == pytest.approx(101 * 1.01 / 2, rel=1e-12)
    assert c.discrepancy > 50
    mild = halfspace_bound_compare(EvalPoint([1.0], [1.0], 1.0))
    assert 0.1 < mild.ratio_sharp < 10 and 0.1 < mild.ratio_literature < 10


def test_ort2_inequality_holds():
    (res,) = inequality_suite(["ort2"])
    assert res.passed and not res.witnesses

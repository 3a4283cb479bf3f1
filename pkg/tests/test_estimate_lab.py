import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weylheat import estimate_lab as el
from weylheat.dihedral_kernels import log_bound_dihedral_array, log_kernel_dihedral_array
from weylheat.errors import CheckFailure, DomainError, InvalidParameter


@given(st.floats(0.1, 5), st.floats(0.02, 0.98), st.floats(0.1, 5), st.floats(0.02, 0.98),
       st.floats(0.1, 3.0), st.floats(0.05, 20.0), st.sampled_from(["sgn", "N1", "N2", "triv"]))
def test_ratio_scale_invariance(r1, a1, r2, a2, t, lam, eta):
    x = np.array([[r1 * math.cos(a1 * math.pi / 4), r1 * math.sin(a1 * math.pi / 4)]])
    y = np.array([[r2 * math.cos(a2 * math.pi / 4), r2 * math.sin(a2 * math.pi / 4)]])
    def log_ratio(x, y, t):
        return (log_kernel_dihedral_array(4, eta, x, y, np.array([t]))
                - log_bound_dihedral_array(4, eta, x, y, np.array([t])))[0]
    a = log_ratio(x, y, t)
    b = log_ratio(x / lam, y / lam, t / lam ** 2)
    assert math.exp(a - b) == pytest.approx(1.0, abs=1e-12)


def test_axis_validation():
    with pytest.raises(InvalidParameter):
        el.Axis("x", 0.0, 1.0)
    with pytest.raises(InvalidParameter):
        el.Axis("x", 1.0, 1.0, "linear")
    with pytest.raises(InvalidParameter):
        el.Axis("x", 0.0, 1.0, "cubic")


def test_plan_is_deterministic_and_respects_region():
    plan = el.claim_plan("mid", 3000, seed=4)
    a, b = plan.sample(), plan.sample()
    for k in a:
        assert np.array_equal(a[k], b[k])
    assert np.all(a["X"] > np.maximum(1.0, a["Y"]))
    assert np.all(a["X"] <= a["Y"] + 1.0 / (1.0 - a["s"]))
    assert plan.sizes()[-1] == 3000


@pytest.mark.parametrize("which", ["near", "mid", "far", "small", "A", "B", "C", "D"])
def test_claim_regions(which):
    v = el.claim_plan(which, 2000, seed=1).sample()
    s, X, Y = v["s"], v["X"], v["Y"]
    if which == "near":
        assert np.all((0 < Y) & (Y < X) & (X <= 1))
    elif which == "far":
        assert np.all(X > Y + 1 / (1 - s))
    elif which == "small":
        assert np.all(X + Y < 1)
    elif which != "mid":
        T, U = (1 - s) * X, (1 + s) * Y
        assert np.all(X + Y >= 1)
        assert np.all((T < 1) if which in "AB" else (T >= 1))
        assert np.all((U < 1) if which in "AC" else (U >= 1))


def test_thin_region_raises():
    plan = el.SamplingPlan((el.Axis("x", 0.0, 1.0, "linear"),), 100, region=lambda v: v["x"] < 0,
                           region_name="empty", max_draw_factor=2)
    with pytest.raises(DomainError):
        plan.sample()


def test_ratio_scan_flags_nonpositive():
    plan = el.SamplingPlan((el.Axis("x", 0.1, 1.0),), 50)
    with pytest.raises(CheckFailure):
        el.ratio_scan(lambda v: np.where(v["x"] > 0.5, -np.inf, 0.0), lambda v: np.zeros_like(v["x"]), plan)


def test_ratio_scan_on_known_ratio():
    # (1 - e^{-u})(1 + 1/u) has infimum 1 and maximum 1.29843 on u > 0
    plan = el.SamplingPlan((el.Axis("u", 1e-6, 1e6),), 20000)
    rep = el.ratio_scan(lambda v: np.log(-np.expm1(-v["u"])) + np.log1p(1 / v["u"]),
                        lambda v: np.zeros_like(v["u"]), plan, name="toy")
    assert rep.min_ratio == pytest.approx(1.0, abs=1e-5)
    assert rep.max_ratio == pytest.approx(1.29843, rel=1e-4)
    assert rep.passed and rep.drift < el.DRIFT_LIMIT


@pytest.mark.parametrize("name", el.KERNEL_SCANS + el.CLAIM_SCANS + el.PROFILE_SCANS + ("new-derivative",))
def test_scans_bounded_and_stable(name):
    rep = el.run_scan(name)
    assert rep.n_samples >= 10000
    assert rep.passed, (rep.min_ratio, rep.max_ratio, rep.drift)
    assert 0 < rep.max_ratio < np.inf
    if rep.sided == "two":
        assert 0 < rep.min_ratio <= rep.max_ratio


def test_claim_far_lower_bound():
    rep = el.run_scan("g4-far", 10000)
    assert rep.min_ratio > 1 - 1 / math.sinh(1.0)


def test_run_scan_unknown():
    with pytest.raises(InvalidParameter):
        el.run_scan("no-such-scan")


def test_slopes():
    for r in el.slope_suite():
        assert r.passed, (r.name, r.slope, r.expected)


def test_long_time_slope_needs_range():
    with pytest.raises(InvalidParameter):
        el.long_time_slope(lambda t: -np.log(t), 1.0, 10.0)


def test_inequality_suite_passes():
    for r in el.inequality_suite():
        assert r.passed and not r.witnesses, r.name


def test_inequality_constants():
    eps1, eps2 = el.case_b_epsilons()
    assert eps1 == pytest.approx(2 / (math.e ** 2 - 1), rel=1e-14)
    assert eps1 == pytest.approx(0.31304, abs=1e-5)
    s = np.linspace(0.0, 1.0, 1001)[:-1]
    assert np.all(el.case_d_corner(s) <= 1 / math.cosh(1.0) + 1e-13)


@given(st.floats(1e-6, 700))
def test_ass_bracket(u):
    r = math.exp(float(el.log_sinh(u)) - (math.log(u / (u + 1)) + u))
    assert 0.5 - 1e-12 <= r <= 1.0 + 1e-12


def test_ort4_report():
    rep = el.ort4_inconsistency()
    assert rep.discrepancy_at_probe == pytest.approx(101 * 1.01 / 2, rel=1e-12)
    assert rep.grows and rep.sharp_plateaus
    assert max(rep.max_discrepancy) > 50


def test_conjecture_scan_m3_matches_theorem():
    rep = el.conjecture_scan(3, 1000)
    thm = el.run_scan("i3-sgn", 1000, seed=0)
    assert rep.passed and rep.meta["conjectural"] is False
    assert rep.min_ratio > 0 and thm.min_ratio > 0


def test_conjecture_scan_m5_metadata():
    rep = el.conjecture_scan(5, 300, keep_samples=True)
    assert rep.meta["conjectural"] is True
    assert rep.meta["grid_extent"] == [1e-2, 1e2]
    assert 0 < rep.min_ratio <= rep.max_ratio < np.inf
    assert len(rep.ratios) == 300

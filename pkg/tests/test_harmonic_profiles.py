import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weylheat import harmonic_profiles as hp
from weylheat.dihedral_kernels import bound_dihedral_array, log_kernel_dihedral_array
from weylheat.errors import InvalidParameter


def _zero_angles(m):
    offset = 0.0 if m % 2 == 0 else 0.5
    return np.array([math.pi * (j + offset) / m for j in range(2 * m)])


def _cone_points(m, rng, n):
    lo = 0.0 if m % 2 == 0 else -math.pi / (2 * m)
    r = np.exp(rng.uniform(math.log(0.1), math.log(5.0), (2, n)))
    a = lo + rng.uniform(0.02, 0.98, (2, n)) * math.pi / m
    x = np.stack([r[0] * np.cos(a[0]), r[0] * np.sin(a[0])], axis=-1)
    y = np.stack([r[1] * np.cos(a[1]), r[1] * np.sin(a[1])], axis=-1)
    return x, y


@pytest.mark.parametrize("m", range(1, 11))
def test_exact_laplacian_vanishes(m):
    assert hp.profile(m).laplacian_coefficients() == {}


@pytest.mark.parametrize("m", range(1, 9))
def test_stencil_residual(m):
    rng = np.random.default_rng(m)
    for _ in range(20):
        r, a = math.exp(rng.uniform(-1, 1.5)), rng.uniform(0, 2 * math.pi)
        assert hp.harmonicity_residual(m, [r * math.cos(a), r * math.sin(a)]) < 1e-8


def test_stencil_detects_non_harmonic():
    # |x|^2 has Laplacian 4
    assert hp.stencil_laplacian(lambda z: float(z @ z), np.array([0.7, -0.2]), 1e-3) == pytest.approx(4.0)


@given(st.integers(1, 10), st.floats(0.1, 3.0), st.floats(0, 2 * math.pi), st.floats(0.1, 10.0))
def test_homogeneity(m, r, a, lam):
    prof = hp.profile(m)
    x = np.array([r * math.cos(a), r * math.sin(a)])
    base = float(prof(x))
    scaled = float(prof(lam * x))
    assert scaled == pytest.approx(lam ** m * base, rel=1e-13, abs=1e-13 * lam ** m * r ** m)


@pytest.mark.parametrize("m", range(1, 9))
def test_zero_set_is_the_rays(m):
    prof = hp.profile(m)
    zeros = _zero_angles(m)
    on = np.stack([np.cos(zeros), np.sin(zeros)], axis=-1) * 2.0
    assert np.max(np.abs(prof(on))) < 1e-12 * 2.0 ** m * prof.leading
    theta = np.linspace(0, 2 * math.pi, 20001)
    gap = np.min(np.abs(np.angle(np.exp(1j * (theta[:, None] - zeros[None, :])))), axis=1)
    away = theta[gap > 1e-3]
    vals = prof(np.stack([np.cos(away), np.sin(away)], axis=-1))
    assert np.all(vals != 0.0)


@pytest.mark.parametrize("m", range(1, 9))
def test_positive_in_cone_and_factors_agree(m):
    rng = np.random.default_rng(10 + m)
    prof = hp.profile(m)
    x, _ = _cone_points(m, rng, 500)
    assert np.all(prof(x) > 0)
    rho = np.hypot(x[:, 0], x[:, 1])
    scale = rho ** m * max(1, sum(abs(c) for c in prof.coefficients.values()))
    assert np.max(np.abs(prof(x) - prof.coefficient_form(x)) / scale) < 1e-12


@pytest.mark.parametrize("m", [3, 4])
def test_conjecture_bound_matches_theorem_bound(m):
    rng = np.random.default_rng(m)
    x, y = _cone_points(m, rng, 2000)
    t = np.exp(rng.uniform(math.log(0.2), math.log(2.0), 2000))
    cb = hp.conjecture_bound(m, x, y, t)
    tb = bound_dihedral_array(m, "sgn", x, y, t)
    assert np.max(np.abs(cb - tb) / tb) <= 4e-16


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_bound_forms_are_comparable(m):
    rng = np.random.default_rng(20 + m)
    x, y = _cone_points(m, rng, 3000)
    t = np.full(3000, 0.5)
    base = hp.conjecture_bound(m, x, y, t)
    for form in ("reduced", "distance"):
        r = hp.conjecture_bound(m, x, y, t, form=form) / base
        r = r[np.isfinite(r) & (base > 0)]
        assert r.min() > 0 and r.max() < np.inf
        assert r.max() / r.min() < 1e4


@pytest.mark.parametrize("m", [3, 4])
def test_proved_cases_kernel_within_bound_constants(m):
    rng = np.random.default_rng(30 + m)
    x, y = _cone_points(m, rng, 2000)
    t = np.full(2000, 0.5)
    lr = log_kernel_dihedral_array(m, "sgn", x, y, t) - hp.log_conjecture_bound(m, x, y, t)
    assert np.all(np.isfinite(lr))


@pytest.mark.parametrize("m", [5, 6])
def test_multiprecision_cone_kernel_positive(m):
    rng = np.random.default_rng(m)
    x, y = _cone_points(m, rng, 5)
    for i in range(5):
        lk, digits = hp.log_dirichlet_cone_kernel_mp(m, x[i], y[i], 0.5)
        assert math.isfinite(lk) and digits >= 0


def test_halfspace_intersection_positive():
    rng = np.random.default_rng(7)
    for m in (3, 4):
        assert hp.hyperplane_angle(m) == pytest.approx(math.pi / m, rel=1e-14)
        n1, n2 = hp.supporting_normals(m)
        x = rng.uniform(-2.0, 2.0, (400, 3))
        y = rng.uniform(-2.0, 2.0, (400, 3))
        inside = ((x[:, 1:] @ n1 > 0) & (x[:, 1:] @ n2 > 0) & (y[:, 1:] @ n1 > 0) & (y[:, 1:] @ n2 > 0))
        assert np.all(hp.in_cone(m, x[inside, 1:], closed=False))
        k = hp.halfspace_intersection_kernel(3, m, x[inside], y[inside], 0.5)
        b = hp.halfspace_intersection_bound(3, m, x[inside], y[inside], 0.5)
        assert np.all(k > 0) and np.all(b > 0)


def test_gsc_compare_finite():
    rng = np.random.default_rng(3)
    x, y = _cone_points(4, rng, 100)
    c = hp.gsc_compare(4, x, y, 1.0, 0.1)
    assert np.all(np.isfinite(c.profile_left_ratio)) and np.all(np.isfinite(c.profile_right_ratio))
    with pytest.raises(InvalidParameter):
        hp.gsc_compare(4, x, y, 1.0, 0.0)


def test_profile_validation():
    with pytest.raises(InvalidParameter):
        hp.profile(0)
    assert hp.profile(5).conjectural and not hp.profile(4).conjectural

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weylheat import series_oracle as so
from weylheat.errors import InvalidParameter


def test_square_identity_random():
    rng = np.random.default_rng(0)
    s, X, Y = rng.uniform(0, 1, (3, 1000))
    S = so.square_direct(s, X, Y)
    P = so.series_square_I4(s, X, Y).value
    assert np.max(np.abs(S - s * X * Y * P) / np.maximum(1.0, np.abs(S))) < 1e-12


def test_small_identity_random():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 1, 1000)
    Y = rng.uniform(0, 1, 1000) * (1 - X)
    s = rng.uniform(-1, 1, 1000)
    S = so.small_I3_direct(s, X, Y)
    P = so.series_small_I3(s, X, Y).value
    assert np.max(np.abs(S - (1 - s * s) * X * Y * (X + Y) * P) / np.maximum(1.0, np.abs(S))) < 1e-12


def test_case_a_identity_random():
    rng = np.random.default_rng(2)
    X = rng.uniform(0, 1, 1000)
    Y = rng.uniform(0, 1, 1000) * (1 - X)
    s = rng.uniform(-1, 1, 1000)
    S = 4.0 * so.caseA_direct(s, X, Y)
    P = so.series_caseA_I3(s, X, Y).value
    assert np.max(np.abs(S - (1 - s * s) * X * Y * P) / np.maximum(1.0, np.abs(S))) < 1e-12


@given(st.floats(0.001, 0.999), st.floats(0.01, 3.0), st.floats(0.0, 1.0), st.integers(1, 12))
def test_square_blocks_nonnegative(s, X, frac, m):
    assert so.square_block(m, s, X, frac * X) >= 0.0


def test_printed_low_order_values():
    s, X, Y = 0.3, 0.7, 0.2
    assert so.square_block(1, s, X, Y, weighted=False) == 16.0
    assert so.square_weight(0, 1) == Fraction(1, 6)
    assert so.small_I3_block(3, s, X, Y) == 0.5
    assert so.small_I3_block(4, s, X, Y) == pytest.approx(s * (X - Y) / 6, rel=1e-15)
    assert so.caseA_block(3, s, X, Y) == pytest.approx(4 * (X + Y), rel=1e-15)
    assert so.caseA_Q(4, 2, s) == -32.0


@pytest.mark.parametrize("m", [5, 7, 9, 11, 13])
def test_block_sum_majorant_odd(m):
    r = 1.5
    rng = np.random.default_rng(m)
    s, X, Y = rng.uniform(-r, r, (3, 4000))
    assert np.max(np.abs(so.small_I3_block(m, s, X, Y))) <= so.block_sum_majorant(m, r)


@pytest.mark.parametrize("m", range(3, 16))
def test_series_majorants_dominate_blocks(m):
    rng = np.random.default_rng(100 + m)
    rho, sigma = 0.9, 1.0
    s = rng.uniform(-sigma, sigma, 2000)
    X, Y = rng.uniform(-rho, rho, (2, 2000))
    assert np.max(np.abs(so.small_I3_block(m, s, X, Y))) <= so.small_I3_majorant(m, rho, sigma)
    assert np.max(np.abs(so.caseA_block(m, s, X, Y))) <= so.caseA_majorant(m, rho, sigma)
    assert np.max(np.abs(so.square_block(m, s, X, Y))) <= so.square_majorant(m, rho, sigma)


def test_boundary_values():
    assert so.series_small_I3(0.4, 0.0, 0.0).value == so.boundary_values_I3("P_s00", 0.4) == 0.5
    for sign in (1, -1):
        for X in (1e-3, 0.3, 0.9):
            P = so.series_small_I3(float(sign), X, 0.0).value
            assert P == pytest.approx(so.boundary_values_I3("P_pm1_X0", sign, X), rel=1e-8)
    for T in (0.05, 0.4, 1.5):
        U = 1e-9
        limit = so.caseA_star(1.0, T, U) / (4 * T * U)
        assert limit == pytest.approx(so.boundary_values_I3("Pstar_1T0", T), rel=1e-6)
    assert so.boundary_values_I3("Pstar_100") == 0.25
    with pytest.raises(InvalidParameter):
        so.boundary_values_I3("nope")


def test_case_a_star_limit_quarter():
    tiny = 1e-10
    assert so.caseA_star(1.0, tiny, tiny) / (4 * tiny * tiny) == pytest.approx(0.25, abs=1e-9)


def test_cosh1_minus_half_is_not_a_lower_bound():
    # P(±1, X, 0) tends to 1/2 as X -> 0, below cosh 1 - 1/2
    small = so.boundary_values_I3("P_pm1_X0", 1, 1e-4)
    assert small == pytest.approx(0.5, abs=1e-3)
    assert small < so.cosh1_minus_half()


def test_square_polynomial_matches_block():
    s, X, Y = 0.37, 0.81, 0.29
    for m in (1, 2, 3, 4):
        poly = so.square_block_polynomial(m)
        assert so.eval_polynomial(poly, s, X, Y) == pytest.approx(so.square_block(m, s, X, Y), rel=1e-13)


def test_radius_guard():
    with pytest.raises(InvalidParameter):
        so.series_small_I3(0.1, 3.0, 0.1, radius=2.0)

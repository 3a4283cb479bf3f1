"""Power-series evaluators for the small-argument factorisations.

Three identities are covered, each of the form ``S = prefactor * P`` with
``P`` a convergent sum of polynomial blocks ``P_m``:

* square chamber:   S(s,X,Y) = s X Y P(s,X,Y), where S is the difference of
  products of ``sinh(u)/u`` terms; P_m built from the polynomials
  ``Phat_{j,m-j}`` and weights ``1/((2j+1)!(2k+1)!)``.
* hexagonal chamber, small arguments:
  sinh(X+Y) - e^{sX} sinh Y - e^{-sY} sinh X = (1-s^2) X Y (X+Y) P(s,X,Y),
  with odd and even blocks written through Q_{m,j}(s) and R_{m,j}(X,Y).
* hexagonal chamber, one-sided regime:
  4 [1 - e^{-2(X+Y)} - e^{-(1-s)X}(1-e^{-2Y}) - e^{-(1+s)Y}(1-e^{-2X})]
      = (1-s^2) X Y P(s,X,Y).

Every evaluator returns the truncation order and a rigorous majorant of the
neglected tail.  Coefficients are exact rationals until the final float
conversion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, InvalidParameter

ORDER_CAP = 80
DEFAULT_RADIUS = 2.0
DEFAULT_TOL = 1e-16


@dataclass(frozen=True)
class SeriesResult:
    value: float | np.ndarray
    truncation_order: int
    tail_bound: float | np.ndarray


def _as_arrays(*args):
    arrs = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in args))
    return [np.array(a) for a in arrs]


def _finish(value, order, tail, scalar):
    if scalar:
        return SeriesResult(float(value), order, float(tail))
    return SeriesResult(value, order, tail)


def _run(blocks, majorant, max_order, tol, start, scalar, radius_check=None):
    """Accumulate blocks until the majorant of the tail drops below tol."""
    value = 0.0
    for m in range(start, max_order + 1):
        value = value + blocks(m)
        tail = _tail(majorant, m)
        limit = tol if tol is not None else DEFAULT_TOL * np.maximum(np.abs(value), 1e-300)
        if np.all(tail < limit):
            return _finish(value, m, tail, scalar)
    raise ConvergenceError(f"tolerance not reached within order {max_order}")


def _tail(majorant, m, extra: int = 60):
    total = 0.0
    for n in range(m + 1, m + 1 + extra):
        term = majorant(n)
        total = total + term
        if np.all(term < 1e-40 * np.maximum(total, 1e-300)):
            break
    return total


def _pow_table(base, n):
    out = [np.ones_like(base)]
    for _ in range(n):
        out.append(out[-1] * base)
    return out


# ------------------------------------------------- square chamber series

@lru_cache(maxsize=None)
def square_weight(j: int, k: int) -> Fraction:
    return Fraction(1, math.factorial(2 * j + 1) * math.factorial(2 * k + 1))


def _sum_h(a, b, n_max):
    """H_n = sum_{i<n} a^i b^{n-1-i} for n = 1..n_max (all terms positive if a, b >= 0)."""
    H = [None, np.ones_like(a)]
    apow = np.ones_like(a)
    for n in range(2, n_max + 1):
        apow = apow * a
        H.append(b * H[n - 1] + apow)
    return H


class _SquareBlocks:
    def __init__(self, s, X, Y, max_order):
        self.wxy = (X - Y) * (X + Y)
        self.ws = (1.0 - s) * (1.0 + s)
        self.Hxy = _sum_h((X - Y) ** 2, (X + Y) ** 2, max_order)
        self.Hs = _sum_h((1.0 - s) ** 2, (1.0 + s) ** 2, max_order)
        self.w2 = _pow_table(self.wxy * self.wxy * self.ws * self.ws, max_order // 2 + 1)

    def block(self, m: int, weighted: bool = True):
        total = 0.0
        for j in range((m - 1) // 2 + 1):
            n = m - 2 * j
            term = 16.0 * self.w2[j] * self.Hxy[n] * self.Hs[n]
            if weighted:
                term = term * float(square_weight(j, m - j))
            total = total + term
        return total


def square_majorant(m: int, r: float, sigma: float = 1.0) -> float:
    """|P_m| <= 16 m^2 (4 r sigma)^{2m-2} 2^{2m+1} / (2m+2)!  on |X|,|Y| <= r, |s| <= sigma."""
    return 16.0 * m * m * math.exp((2 * m - 2) * math.log(4.0 * r * sigma)
                                   + (2 * m + 1) * math.log(2.0) - math.lgamma(2 * m + 3))


def square_block(m: int, s, X, Y, weighted: bool = True):
    """The m-th block P_m; with ``weighted=False`` the weights are dropped (m=1 gives 16)."""
    if m < 1:
        raise InvalidParameter("blocks start at m = 1")
    s, X, Y = _as_arrays(s, X, Y)
    out = _SquareBlocks(s, X, Y, m).block(m, weighted)
    return float(out) if np.ndim(out) == 0 else out


def series_square_I4(s, X, Y, tol: float | None = None, radius: float | None = None,
                     max_order: int = ORDER_CAP) -> SeriesResult:
    """P with S(s,X,Y) = s X Y P(s,X,Y) for the square-chamber sinh identity."""
    scalar = all(np.ndim(v) == 0 for v in (s, X, Y))
    s, X, Y = _as_arrays(s, X, Y)
    r = max(float(np.max(np.abs(X), initial=0.0)), float(np.max(np.abs(Y), initial=0.0)), 1e-300)
    if radius is not None and r > radius:
        raise InvalidParameter(f"|X|, |Y| must not exceed the radius {radius}")
    sigma = max(1.0, float(np.max(np.abs(s), initial=0.0)))
    blocks = _SquareBlocks(s, X, Y, max_order)
    return _run(lambda m: blocks.block(m), lambda m: square_majorant(m, r, sigma),
                max_order, tol, 1, scalar)


def square_direct(s, X, Y):
    """The sinh-product difference S(s,X,Y) evaluated directly."""
    s, X, Y = _as_arrays(s, X, Y)

    def sinhc(u):
        return np.where(u == 0.0, 1.0, np.sinh(u) / np.where(u == 0.0, 1.0, u))

    return (sinhc((1 + s) * (X + Y)) * sinhc((1 - s) * (X - Y))
            - sinhc((1 - s) * (X + Y)) * sinhc((1 + s) * (X - Y)))


def _binom_expand(p_plus: int, p_minus: int) -> dict[tuple[int, int], int]:
    """Integer coefficients of (X+Y)^p_plus (X-Y)^p_minus."""
    out: dict[tuple[int, int], int] = {}
    for a in range(p_plus + 1):
        ca = math.comb(p_plus, a)
        for b in range(p_minus + 1):
            cb = math.comb(p_minus, b) * (-1) ** (p_minus - b)
            key = (a + b, p_plus + p_minus - a - b)
            out[key] = out.get(key, 0) + ca * cb
    return out


@lru_cache(maxsize=None)
def phat_polynomial(j: int, k: int) -> tuple[tuple[tuple[int, int], int], ...]:
    """Exact integer coefficients of Phat_{jk}(X,Y) = P_{jk}(X,Y) / (X Y)."""
    first = _binom_expand(2 * j, 2 * k)
    second = _binom_expand(2 * k, 2 * j)
    coeffs: dict[tuple[int, int], int] = {}
    for key in set(first) | set(second):
        c = first.get(key, 0) - second.get(key, 0)
        if c == 0:
            continue
        px, py = key
        if px < 1 or py < 1:
            raise AssertionError("P_jk must be divisible by XY")
        coeffs[(px - 1, py - 1)] = c
    return tuple(sorted(coeffs.items()))


@lru_cache(maxsize=None)
def square_block_polynomial(m: int) -> tuple[tuple[tuple[int, int, int], Fraction], ...]:
    """P_m as exact rational coefficients of s^a X^b Y^c."""
    out: dict[tuple[int, int, int], Fraction] = {}
    for j in range((m - 1) // 2 + 1):
        k = m - j
        w = square_weight(j, k)
        poly = phat_polynomial(j, k)
        for (ax, ay), cxy in poly:
            for (bx, by), cs in poly:
                key = (by, ax, ay)  # Phat(1, s): X -> 1, Y -> s
                out[key] = out.get(key, Fraction(0)) + w * cxy * cs
    return tuple(sorted((k, v) for k, v in out.items() if v != 0))


def eval_polynomial(poly, s, X, Y):
    total = 0
    for (a, b, c), coef in poly:
        total += coef * s ** a * X ** b * Y ** c
    return total


# --------------------------------------- hexagonal chamber, small regime

@lru_cache(maxsize=None)
def _inv_fact_pair(a: int, b: int) -> float:
    return float(Fraction(1, math.factorial(a) * math.factorial(b)))


def _alt_sum(X, Y, q):
    """sum_{i=0}^{q} (-1)^i X^{q-i} Y^i, which equals (X^{q+1} + Y^{q+1})/(X+Y) for even q."""
    total = 0.0
    for i in range(q + 1):
        total = total + (-1) ** i * X ** (q - i) * Y ** i
    return total


def small_I3_Q(m: int, j: int, s):
    """Q_{m,j}(s) as the polynomial it is (values at s = ±1 included)."""
    s2 = np.asarray(s, dtype=float) ** 2
    if m % 2:
        n = (m - 1) // 2 - j
        return sum(s2 ** i for i in range(n))
    n = m // 2 - 2 * j - 1
    return s2 ** j * sum(s2 ** i for i in range(n))


def small_I3_R(m: int, j: int, X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if m % 2:
        r = min(2 * j, m - 2 - 2 * j)
        q = m - 3 - 2 * r
        return (X * Y) ** r * _alt_sum(X, Y, q)
    top = m // 2 - 2 * j - 2
    return (X * Y) ** (2 * j) * sum(X ** (2 * (top - i)) * Y ** (2 * i) for i in range(top + 1))


def small_I3_block(m: int, s, X, Y):
    if m < 3:
        raise InvalidParameter("blocks start at m = 3")
    s, X, Y = _as_arrays(s, X, Y)
    total = 0.0
    if m % 2:
        for j in range((m - 3) // 2 + 1):
            total = total + small_I3_Q(m, j, s) * small_I3_R(m, j, X, Y) * _inv_fact_pair(2 * j + 1, m - 2 * j - 1)
    else:
        for j in range(m // 4):
            total = total + small_I3_Q(m, j, s) * small_I3_R(m, j, X, Y) * _inv_fact_pair(2 * j + 1, m - 2 * j - 1)
        total = s * (X - Y) * total
    return float(total) if np.ndim(total) == 0 else total


def small_I3_majorant(m: int, rho: float, sigma: float = 1.0) -> float:
    """|P_m| <= m^2 2^{m-1} (sigma rho)^{m-3} / m!  for |X|,|Y| <= rho, |s| <= sigma."""
    return m * m * math.exp((m - 1) * math.log(2.0) + (m - 3) * math.log(max(sigma * rho, 1e-300))
                            - math.lgamma(m + 1))


def block_sum_majorant(m: int, r: float) -> float:
    """m^3 r^{2(m-3)} / Gamma((m-1)/2), stated for odd m on (-r, r)^3 with r > 1."""
    return m ** 3 * r ** (2 * (m - 3)) / math.gamma((m - 1) / 2.0)


def series_small_I3(s, X, Y, tol: float | None = None, radius: float | None = None,
                    max_order: int = ORDER_CAP) -> SeriesResult:
    """P with sinh(X+Y) - e^{sX} sinh Y - e^{-sY} sinh X = (1-s^2) X Y (X+Y) P."""
    scalar = all(np.ndim(v) == 0 for v in (s, X, Y))
    s, X, Y = _as_arrays(s, X, Y)
    rho = max(float(np.max(np.abs(X), initial=0.0)), float(np.max(np.abs(Y), initial=0.0)))
    if radius is not None and rho > radius:
        raise InvalidParameter(f"|X|, |Y| must not exceed the radius {radius}")
    sigma = max(1.0, float(np.max(np.abs(s), initial=0.0)))
    return _run(lambda m: small_I3_block(m, s, X, Y),
                lambda m: small_I3_majorant(m, max(rho, 1e-300), sigma),
                max_order, tol, 3, scalar)


def small_I3_direct(s, X, Y):
    s, X, Y = _as_arrays(s, X, Y)
    return np.sinh(X + Y) - np.exp(s * X) * np.sinh(Y) - np.exp(-s * Y) * np.sinh(X)


# -------------------------------------- hexagonal chamber, one-sided regime

def caseA_Q(m: int, j: int, s):
    """Q_{m,j}(s) = (-1)^{m+1} 2^m (sum_{k<=m-j-2} ((1+s)/2)^k + sum_{k<=j-2} ((1-s)/2)^k)."""
    s = np.asarray(s, dtype=float)
    a = sum(((1 + s) / 2) ** k for k in range(m - j - 1)) if m - j - 2 >= 0 else 0.0
    b = sum(((1 - s) / 2) ** k for k in range(j - 1)) if j - 2 >= 0 else 0.0
    return (-1) ** (m + 1) * 2.0 ** m * (a + b)


def caseA_block(m: int, s, X, Y):
    if m < 3:
        raise InvalidParameter("blocks start at m = 3")
    s, X, Y = _as_arrays(s, X, Y)
    total = 0.0
    for j in range(1, m // 2 + 1):
        w = _inv_fact_pair(j, m - j)
        if m % 2 == 0 and j == m // 2:
            total = total + caseA_Q(m, j, s) * (X * Y) ** (j - 1) * w
        else:
            total = total + (caseA_Q(m, j, s) * X ** (j - 1) * Y ** (m - j - 1)
                             + caseA_Q(m, j, -s) * X ** (m - j - 1) * Y ** (j - 1)) * w
    return float(total) if np.ndim(total) == 0 else total


def caseA_majorant(m: int, rho: float, sigma: float = 1.0) -> float:
    """|P_m| <= (m-2) 2^{2m+1} kappa^m rho^{m-2} / m!, kappa = max(1, (1+sigma)/2)."""
    kappa = max(1.0, (1.0 + sigma) / 2.0)
    return (m - 2) * math.exp((2 * m + 1) * math.log(2.0) + m * math.log(kappa)
                              + (m - 2) * math.log(max(rho, 1e-300)) - math.lgamma(m + 1))


def series_caseA_I3(s, X, Y, tol: float | None = None, radius: float | None = None,
                    max_order: int = ORDER_CAP) -> SeriesResult:
    """P with 4 S_A(s,X,Y) = (1-s^2) X Y P(s,X,Y); see ``caseA_direct``."""
    scalar = all(np.ndim(v) == 0 for v in (s, X, Y))
    s, X, Y = _as_arrays(s, X, Y)
    rho = max(float(np.max(np.abs(X), initial=0.0)), float(np.max(np.abs(Y), initial=0.0)))
    if radius is not None and rho > radius:
        raise InvalidParameter(f"|X|, |Y| must not exceed the radius {radius}")
    sigma = max(1.0, float(np.max(np.abs(s), initial=0.0)))
    return _run(lambda m: caseA_block(m, s, X, Y),
                lambda m: caseA_majorant(m, max(rho, 1e-300), sigma),
                max_order, tol, 3, scalar)


def caseA_direct(s, X, Y):
    """S_A = 1 - e^{-2(X+Y)} - e^{-(1-s)X}(1 - e^{-2Y}) - e^{-(1+s)Y}(1 - e^{-2X}).

    Equals 2 e^{-(X+Y)} times the small-regime S.  The halved-argument form
    1 - e^{-(X+Y)} - e^{-(1-s)X/2}(1-e^{-Y}) - e^{-(1+s)Y/2}(1-e^{-X}) is
    ``caseA_direct(s, X/2, Y/2)``.
    """
    s, X, Y = _as_arrays(s, X, Y)
    return (1.0 - np.exp(-2 * (X + Y)) - np.exp(-(1 - s) * X) * -np.expm1(-2 * Y)
            - np.exp(-(1 + s) * Y) * -np.expm1(-2 * X))


def caseA_star(s, T, U):
    """S* in the compact coordinates T = (1-s)X/2, U = (1+s)Y/2 of the halved form."""
    s, T, U = _as_arrays(s, T, U)
    with np.errstate(divide="ignore", invalid="ignore"):
        A = np.where(np.abs(s) < 1, 2 * T / (1 - s), np.inf)
        B = np.where(np.abs(s) < 1, 2 * U / (1 + s), np.inf)
        val = (1 - np.exp(-A - B) - np.exp(-T) * -np.expm1(-B) - np.exp(-U) * -np.expm1(-A))
    edge_p = (-np.expm1(-T)) * (-np.expm1(-U))
    edge_m = (-np.expm1(T)) * (-np.expm1(U))
    return np.where(s >= 1, edge_p, np.where(s <= -1, edge_m, val))


# --------------------------------------------------------- boundary values

def boundary_values_I3(which: str, *args: float) -> float:
    """Closed-form boundary evaluations of the hexagonal-chamber series.

    ``P_s00`` (s):       small-regime P(s, 0, 0) = P_3 = 1/2 for every s
    ``P_pm1_X0`` (±1, X): small-regime P(±1, X, 0)
                         = sinh X / (2X) ± (cosh X - sinh X / X) / (2X)
    ``Pstar_1T0`` (T):   (1 - e^{-T}) / (4T), the limit of S*/(4TU) as U -> 0 at s = 1
    ``Pstar_100`` ():    1/4
    """
    if which == "P_s00":
        return 0.5
    if which == "P_pm1_X0":
        sign, X = args
        if sign not in (1, -1):
            raise InvalidParameter("first argument must be +1 or -1")
        X = float(X)
        if abs(X) < 0.5:
            # the closed form cancels for small X; sum its power series instead
            odd = sum(k * X ** (2 * k - 2) / math.factorial(2 * k) for k in range(1, 16))
            even = sum((k - 1) * X ** (2 * k - 3) / math.factorial(2 * k - 1) for k in range(2, 16))
            return float(odd + sign * even)
        sx = math.sinh(X) / X
        return float(sx / 2.0 + sign * (math.cosh(X) - sx) / (2.0 * X))
    if which == "Pstar_1T0":
        (T,) = args
        if T == 0:
            return 0.25
        return float(-math.expm1(-T) / (4.0 * T))
    if which == "Pstar_100":
        return 0.25
    raise InvalidParameter(f"unknown boundary selector {which!r}")


def cosh1_minus_half() -> float:
    """cosh 1 - 1/2.  Not a lower bound for P(±1, X, 0): that function tends to 1/2 as X -> 0."""
    return math.cosh(1.0) - 0.5

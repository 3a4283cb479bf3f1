"""Closed forms for the square (I2(4)) and hexagonal (I2(3)) chamber kernels.

Square chamber {0 < x2 < x1}.  With a = x1y1/2t, b = x2y2/2t, c = x2y1/2t,
d = x1y2/2t the image sum equals ``4 p_t(x-y) E`` where ``E = e^{-(a+b)} Psi``
is bounded by 1 and is evaluated in a form free of large exponentials:

    triv  E = [(1+e^{-2a})(1+e^{-2b}) + e^{-2u2}(1+e^{-2c})(1+e^{-2d})] / 4
    N2    E = [(1-e^{-2a})(1-e^{-2b}) + e^{-2u2}(1-e^{-2c})(1-e^{-2d})] / 4
    N1    E = [(1-e^{-2u1})(1-e^{-2u2}) + e^{-2b}(1-e^{-2u3})(1-e^{-2u4})] / 4
    sgn   E = (1-e^{-2a})(1-e^{-2b}) G(s, a, c) / 4,   s = y2/y1

where u1..u4 are the halved products of (x1±x2) and (y1±y2) over 2t.

Hexagonal chamber {|x2| < x1/√3}.  The Dirichlet image sum equals
``p_t(x-y) (1 - e^{-x1y1/t}) G3(s, X, Y)`` with X = (x1-√3x2)y1/4t,
Y = (x1+√3x2)y1/4t, s = √3y2/y1.  The trivial kernel is the image sum
itself, which has six positive terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ddouble import two_prod
from .errors import DomainError, InvalidParameter
from .gauss_kernels import EvalPoint, gauss_density, log_gauss_density, scale_reduce, half_time_scale
from .series_oracle import series_square_I4, series_small_I3

SQRT3 = math.sqrt(3.0)
_SQRT3_LO = 1.0035084221806903e-16
LABELS_I4 = ("sgn", "N1", "N2", "triv")
LABELS_I3 = ("sgn", "triv")
_ALIASES = {"det": "sgn", "dirichlet": "sgn", "neumann": "triv", "sgn": "sgn",
            "triv": "triv", "N1": "N1", "N2": "N2", "n1": "N1", "n2": "N2"}
# switch to the power series below these arguments
SERIES_X_I4 = 2.0
SERIES_SUM_I3 = 2.0


def canonical_label(m: int, eta: str) -> str:
    label = _ALIASES.get(eta)
    allowed = LABELS_I4 if m == 4 else LABELS_I3 if m == 3 else ()
    if label not in allowed:
        raise InvalidParameter(f"unsupported homomorphism {eta!r} for I2({m})")
    return label


def _pts(x, y, t):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    if x.shape[-1] != 2 or y.shape[-1] != 2:
        raise DomainError("dihedral kernels live in R^2")
    if np.any(t <= 0):
        raise InvalidParameter("t must be positive")
    return x, y, t


def _om(u):
    """1 - e^{-u} without cancellation."""
    return -np.expm1(-u)


def lin_form(a, b, u_hi: float, u_lo: float, sign: float):
    """a + sign*u*b with u = u_hi + u_lo given to double-double accuracy.

    Linear forms vanishing on a wall come out with full relative accuracy
    near that wall.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p, e = two_prod(u_hi, b)
    return (a + sign * p) + sign * (e + u_lo * b)


def _lin3(a, b, sign: float):
    return lin_form(a, b, SQRT3, _SQRT3_LO, sign)


# --------------------------------------------------------------- log sinhc

_SINHC_COEF = [1.0 / math.factorial(2 * k + 1) for k in range(1, 13)]


def _lsc(u):
    """log(sinh u / u) for u >= 0."""
    u = np.asarray(u, dtype=float)
    small = u <= 1.0
    us = np.where(small, u, 0.0)
    u2 = us * us
    f = 0.0
    p = np.ones_like(us)
    for c in _SINHC_COEF:
        p = p * u2
        f = f + c * p
    ul = np.where(small, 1.0, u)
    big = ul + np.log(_om(2.0 * ul)) - np.log(2.0 * ul)
    return np.where(small, np.log1p(f), big)


def _dlsc(u, v, diff=None):
    """log sinhc(u) - log sinhc(v) for u >= v >= 0, accurate when u - v is small.

    ``diff`` may supply u - v computed more accurately than by subtraction.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    diff = u - v if diff is None else np.asarray(diff, dtype=float)
    both_small = u <= 1.0
    both_big = v >= 0.5
    # small arguments: difference of the sinhc power series, factored by u^2 - v^2
    us = np.where(both_small, u, 0.0)
    vs = np.where(both_small, v, 0.0)
    u2, v2 = us * us, vs * vs
    H = np.ones_like(us)
    upow = np.ones_like(us)
    fdiff = _SINHC_COEF[0] * H
    fv = _SINHC_COEF[0] * v2
    vpow = v2.copy()
    for c in _SINHC_COEF[1:]:
        upow = upow * u2
        H = v2 * H + upow
        fdiff = fdiff + c * H
        vpow = vpow * v2
        fv = fv + c * vpow
    fdiff = np.where(both_small, diff, 0.0) * (us + vs) * fdiff
    small_val = np.log1p(fdiff / (1.0 + fv))
    # large arguments: linear part, log(1 - e^{-2u}) difference, log ratio
    ub = np.where(both_big, u, 1.0)
    vb = np.where(both_big, v, 1.0)
    db = np.where(both_big, diff, 0.0)
    big_val = db + _dL(ub, vb, db) - np.log1p(db / vb)
    other = _lsc(u) - _lsc(v)
    return np.where(both_small, small_val, np.where(both_big, big_val, other))


def _dL(u, v, diff=None):
    """log(1 - e^{-2u}) - log(1 - e^{-2v}) for u >= v > 0."""
    diff = u - v if diff is None else diff
    return np.log1p(np.exp(-2.0 * v) * _om(2.0 * diff) / _om(2.0 * v))


def _langevin_coefficients(n: int) -> list[float]:
    import mpmath

    return [float(mpmath.mpf(2) ** (2 * k) * mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k))
            for k in range(1, n + 1)]


_LANGEVIN = _langevin_coefficients(20)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _langevin(u):
    """coth(u) - 1/u for u >= 0, series below 1 to avoid the subtraction."""
    u = np.asarray(u, dtype=float)
    small = u <= 1.0
    us = np.where(small, u, 0.0)
    u2 = us * us
    acc = np.zeros_like(us)
    for c in reversed(_LANGEVIN):
        acc = acc * u2 + c
    ub = np.where(small, 1.0, u)
    e = np.exp(-2.0 * ub)
    big = (1.0 + e) / (1.0 - e) - 1.0 / ub
    return np.where(small, us * acc, big)


def _phi_diff(a, b, d):
    """(a coth a - 1) - (b coth b - 1) for a >= 1, a - b = d >= 0."""
    big = b >= 0.5
    bb = np.where(big, b, 1.0)
    db = np.where(big, d, 0.0)
    ea = np.exp(-2.0 * a)
    coth_a = (1.0 + ea) / (1.0 - ea)
    # coth b - coth a = 2 e^{-2b} (1 - e^{-2d}) / ((1 - e^{-2a})(1 - e^{-2b}))
    dcoth = 2.0 * np.exp(-2.0 * bb) * _om(2.0 * db) / (_om(2.0 * a) * _om(2.0 * bb))
    close = db * coth_a - bb * dcoth
    plain = a * _langevin(a) - b * _langevin(b)
    return np.where(big, close, plain)


def _delta_near_one(oms, X, Y, XmY):
    """Delta = log[sinh(sX) sinh Y / (sinh X sinh sY)] as minus an integral over sigma in [s, 1].

    The integrand X L(sigma X) - Y L(sigma Y) (L the Langevin function) is
    positive, so the quadrature carries no cancellation between large terms.
    Requires (1 - s) X <= 1 and X > 1 so that sigma X >= 1 on the interval.
    """
    total = 0.0
    for node, w in zip(_GL_NODES, _GL_WEIGHTS):
        sigma = 1.0 - oms * (1.0 - node) / 2.0
        total = total + w * _phi_diff(sigma * X, sigma * Y, sigma * XmY) / sigma
    return -oms / 2.0 * total


# ------------------------------------------------------------- G functions

def _g4(s, X, Y, oms=None, XmY=None):
    """``oms`` = 1 - s and ``XmY`` = X - Y may be passed when known more accurately."""
    s, X, Y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (s, X, Y)))
    oms = np.broadcast_to(1.0 - s if oms is None else np.asarray(oms, dtype=float), s.shape)
    XmY = np.broadcast_to(X - Y if XmY is None else np.asarray(XmY, dtype=float), s.shape)
    out = np.empty(s.shape)
    ser = X <= SERIES_X_I4
    if np.any(ser):
        ss, Xs, Ys = s[ser], X[ser], Y[ser]
        P = series_square_I4(ss, Xs / 2.0, Ys / 2.0, radius=1.0).value
        sinhc_sY = np.exp(_lsc(ss * Ys))
        out[ser] = oms[ser] * (1.0 + ss) * XmY[ser] * (Xs + Ys) * Xs * P / (16.0 * np.sinh(Xs) * sinhc_sY)
    rest = ~ser
    if np.any(rest):
        sr, Xr, Yr, dr = s[rest], X[rest], Y[rest], XmY[rest]
        sY = sr * Yr
        big = sY >= 0.5
        sYb = np.where(big, sY, 1.0)
        sXb = np.where(big, sr * Xr, 1.0)
        Yb = np.where(big, Yr, 1.0)
        Xb = np.where(big, Xr, 1.0)
        delta_big = -oms[rest] * dr + _dL(sXb, sYb, sr * dr) - _dL(Xb, Yb, dr)
        delta_gen = _dlsc(sr * Xr, sY, sr * dr) - _dlsc(Xr, Yr, dr)
        near = oms[rest] * Xr <= 1.0
        delta = np.where(big, delta_big, delta_gen)
        if np.any(near):
            delta[near] = _delta_near_one(oms[rest][near], Xr[near], Yr[near], dr[near])
        out[rest] = -np.expm1(delta)
    return out


def _g3(s, X, Y, oms=None, ops=None):
    """``oms`` = 1 - s and ``ops`` = 1 + s may be passed when known more accurately."""
    s, X, Y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (s, X, Y)))
    oms = np.broadcast_to(1.0 - s if oms is None else np.asarray(oms, dtype=float), s.shape)
    ops = np.broadcast_to(1.0 + s if ops is None else np.asarray(ops, dtype=float), s.shape)
    out = np.empty(s.shape)
    ser = X + Y <= SERIES_SUM_I3
    if np.any(ser):
        ss, Xs, Ys = s[ser], X[ser], Y[ser]
        P = series_small_I3(ss, Xs, Ys, radius=2.0).value
        out[ser] = oms[ser] * ops[ser] * Xs * Ys * P / np.exp(_lsc(Xs + Ys))
    rest = ~ser
    if np.any(rest):
        sr, Xr, Yr, om, op = s[rest], X[rest], Y[rest], oms[rest], ops[rest]
        u = _om(2.0 * Xr)
        v = _om(2.0 * Yr)
        # S' = e^{-(X+Y)} * 2S; two algebraically equal arrangements, each
        # cancellation-free on one side of s = 0
        first = _om(om * Xr) * v - u * np.exp(-op * Yr) * _om(om * Yr)
        second = _om(op * Yr) * u - v * np.exp(-om * Xr) * _om(op * Xr)
        Sp = np.where(sr >= 0.0, first, second)
        out[rest] = Sp / _om(2.0 * (Xr + Yr))
    return out


def g_function(m: int, s, X, Y, check: bool = True):
    """The normalised ratio G for m = 4 or m = 3, with values in [0, 1).

    m = 4:  G = 1 - sinh(sX) sinh(Y) / (sinh(X) sinh(sY)) on 0 <= s <= 1, 0 <= Y <= X
    m = 3:  G = 1 - (e^{sX} sinh Y + e^{-sY} sinh X) / sinh(X+Y) on |s| <= 1, X, Y >= 0
    Boundary points take the continuous extension.
    """
    scalar = all(np.ndim(v) == 0 for v in (s, X, Y))
    s_, X_, Y_ = (np.asarray(v, dtype=float) for v in (s, X, Y))
    if m == 4:
        if check and (np.any(s_ < 0) or np.any(s_ > 1) or np.any(Y_ < 0) or np.any(Y_ > X_)):
            raise DomainError("need 0 <= s <= 1 and 0 <= Y <= X")
        if np.any(X_ == 0):
            raise DomainError("X must be positive")
        out = _g4(s_, X_, Y_)
    elif m == 3:
        if check and (np.any(np.abs(s_) > 1) or np.any(X_ < 0) or np.any(Y_ < 0)):
            raise DomainError("need |s| <= 1 and X, Y >= 0")
        out = _g3(s_, X_, Y_)
    else:
        raise InvalidParameter("g_function is defined for m = 3 and m = 4")
    return float(out) if scalar else out


def g4_limit_s0(X, Y):
    """G(0+, X, Y) = 1 - X sinh(Y) / (Y sinh(X))."""
    return g_function(4, 0.0, X, Y)


# -------------------------------------------------------- change of variables

def change_variables(m: int, x, y, t: float = 0.5, strict: bool = True):
    """Reduced variables (s, X, Y) at time t (the defaults give the t = 1/2 forms).

    m = 4: X = x1y1/2t, Y = x2y1/2t, s = y2/y1.
    m = 3: X = (x1-√3x2)y1/4t, Y = (x1+√3x2)y1/4t, s = √3y2/y1.
    With ``strict`` a boundary input (degenerate X, Y or |s| = 1, s = 0) raises DomainError.
    """
    x, y, t = _pts(x, y, t)
    x1, x2, y1, y2 = x[..., 0], x[..., 1], y[..., 0], y[..., 1]
    if np.any(y1 <= 0):
        raise DomainError("y1 must be positive")
    if m == 4:
        X = x1 * y1 / (2 * t)
        Y = x2 * y1 / (2 * t)
        s = y2 / y1
        degenerate = (Y <= 0) | (Y >= X) | (s <= 0) | (s >= 1)
    elif m == 3:
        X = _lin3(x1, x2, -1.0) * y1 / (4 * t)
        Y = _lin3(x1, x2, 1.0) * y1 / (4 * t)
        s = SQRT3 * y2 / y1
        degenerate = (X <= 0) | (Y <= 0) | (np.abs(s) >= 1)
    else:
        raise InvalidParameter("reduced variables exist for m = 3 and m = 4")
    if strict and np.any(degenerate):
        raise DomainError("boundary input: a reduced variable is degenerate")
    if np.ndim(s) == 0:
        return float(s), float(X), float(Y)
    return s, X, Y


@dataclass(frozen=True)
class DihedralEval:
    m: int
    eta: str
    point: EvalPoint
    reduced_vars: tuple[float, float, float]


def dihedral_eval(m: int, eta: str, point: EvalPoint) -> DihedralEval:
    """Scale the point to t = 1/2 and attach its reduced variables."""
    label = canonical_label(m, eta)
    red = scale_reduce(point, half_time_scale(point.t))
    return DihedralEval(m, label, red, change_variables(m, red.x, red.y, 0.5, strict=False))


# ------------------------------------------------------------ square chamber

def _i4_parts(x, y, t):
    x1, x2, y1, y2 = x[..., 0], x[..., 1], y[..., 0], y[..., 1]
    tt = 2.0 * t
    a = x1 * y1 / tt
    b = x2 * y2 / tt
    c = x2 * y1 / tt
    d = x1 * y2 / tt
    u2 = (x1 - x2) * (y1 - y2) / (2.0 * tt)
    return a, b, c, d, u2


def scaled_psi_I4(eta: str, x, y, t) -> np.ndarray:
    """E = e^{-<x,y>/2t} Psi_eta, bounded by 1 on the chamber closure."""
    label = canonical_label(4, eta)
    x, y, t = _pts(x, y, t)
    a, b, c, d, u2 = _i4_parts(x, y, t)
    x1, x2, y1, y2 = x[..., 0], x[..., 1], y[..., 0], y[..., 1]
    if label == "triv":
        return 0.25 * ((1 + np.exp(-2 * a)) * (1 + np.exp(-2 * b))
                       + np.exp(-2 * u2) * (1 + np.exp(-2 * c)) * (1 + np.exp(-2 * d)))
    if label == "N2":
        return 0.25 * (_om(2 * a) * _om(2 * b) + np.exp(-2 * u2) * _om(2 * c) * _om(2 * d))
    if label == "N1":
        tt = 4.0 * t
        u1 = (x1 + x2) * (y1 + y2) / tt
        u3 = (x1 + x2) * (y1 - y2) / tt
        u4 = (x1 - x2) * (y1 + y2) / tt
        return 0.25 * (_om(2 * u1) * _om(2 * u2) + np.exp(-2 * b) * _om(2 * u3) * _om(2 * u4))
    # sgn
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(y1 > 0, y2 / np.where(y1 > 0, y1, 1.0), 0.0)
        oms = (y1 - y2) / np.where(y1 > 0, y1, 1.0)
    XmY = (x1 - x2) * y1 / (2.0 * t)
    inside = (a > 0) & (b > 0) & (XmY > 0) & (oms > 0)
    G = np.zeros(np.shape(a))
    if np.any(inside):
        sh = np.shape(a)
        G[inside] = _g4(*(np.broadcast_to(v, sh)[inside] for v in (s, a, c, oms, XmY)))
    return 0.25 * _om(2 * a) * _om(2 * b) * G


def psi_I4(eta: str, t, x, y):
    """Psi_{t,eta}(x, y) itself (grows like e^{<x,y>/2t})."""
    x, y, t = _pts(x, y, t)
    a, b, *_ = _i4_parts(x, y, t)
    out = np.exp(a + b) * scaled_psi_I4(eta, x, y, t)
    return float(out) if np.ndim(out) == 0 else out


def psi_I4_primed_N1(t, x, y):
    """Psi_N1 through the explicitly positive sinh-sinh form."""
    x, y, t = _pts(x, y, t)
    x1, x2, y1, y2 = x[..., 0], x[..., 1], y[..., 0], y[..., 1]
    tt = 4.0 * t
    out = (np.sinh((x1 + x2) * (y1 + y2) / tt) * np.sinh((x1 - x2) * (y1 - y2) / tt)
           + np.sinh((x1 + x2) * (y1 - y2) / tt) * np.sinh((x1 - x2) * (y1 + y2) / tt))
    return float(out) if np.ndim(out) == 0 else out


def psi_I4_naive(eta: str, t, x, y):
    """Psi as the printed sinh/cosh difference, without any rearrangement."""
    label = canonical_label(4, eta)
    x, y, t = _pts(x, y, t)
    a, b, c, d, _ = _i4_parts(x, y, t)
    f, sign = (np.sinh, -1.0) if label == "sgn" else (np.cosh, -1.0) if label == "N1" else \
        (np.sinh, 1.0) if label == "N2" else (np.cosh, 1.0)
    out = f(a) * f(b) + sign * f(c) * f(d)
    return float(out) if np.ndim(out) == 0 else out


def kernel_I4_array(eta: str, x, y, t) -> np.ndarray:
    x, y, t = _pts(x, y, t)
    diff = x - y
    return 4.0 * gauss_density(2, t, np.einsum("...i,...i->...", diff, diff)) * scaled_psi_I4(eta, x, y, t)


def log_kernel_I4_array(eta: str, x, y, t) -> np.ndarray:
    x, y, t = _pts(x, y, t)
    diff = x - y
    with np.errstate(divide="ignore"):
        return (math.log(4.0) + log_gauss_density(2, t, np.einsum("...i,...i->...", diff, diff))
                + np.log(scaled_psi_I4(eta, x, y, t)))


def kernel_I4(eta: str, point: EvalPoint) -> float:
    return float(kernel_I4_array(eta, point.x, point.y, point.t))


# --------------------------------------------------------- hexagonal chamber

_I3_MATS = None


def _i3_matrices() -> np.ndarray:
    global _I3_MATS
    if _I3_MATS is None:
        from .reflection_core import build_system, enumerate_group
        _I3_MATS = enumerate_group(build_system("dihedral", m=3)).matrices
    return _I3_MATS


def scaled_phi_I3(eta: str, x, y, t) -> np.ndarray:
    """Image sum divided by p_t(x-y); for sgn this is (1 - e^{-x1y1/t}) G3."""
    label = canonical_label(3, eta)
    x, y, t = _pts(x, y, t)
    x1, x2, y1, y2 = x[..., 0], x[..., 1], y[..., 0], y[..., 1]
    if label == "triv":
        gx = np.einsum("gij,...j->...gi", _i3_matrices(), x)
        inner = np.einsum("...gi,...i->...g", gx, y)
        base = np.einsum("...i,...i->...", x, y)
        return np.sum(np.exp((inner - base[..., None]) / (2.0 * np.asarray(t)[..., None])), axis=-1)
    X = _lin3(x1, x2, -1.0) * y1 / (4 * t)
    Y = _lin3(x1, x2, 1.0) * y1 / (4 * t)
    y1s = np.where(y1 > 0, y1, 1.0)
    s = SQRT3 * y2 / y1s
    oms = _lin3(y1, y2, -1.0) / y1s
    ops = _lin3(y1, y2, 1.0) / y1s
    inside = (X > 0) & (Y > 0) & (oms > 0) & (ops > 0) & (y1 > 0)
    G = np.zeros(np.shape(X))
    if np.any(inside):
        sh = np.shape(X)
        G[inside] = _g3(*(np.broadcast_to(v, sh)[inside] for v in (s, X, Y, oms, ops)))
    return _om(x1 * y1 / t) * G


def kernel_I3_array(eta: str, x, y, t) -> np.ndarray:
    x, y, t = _pts(x, y, t)
    diff = x - y
    return gauss_density(2, t, np.einsum("...i,...i->...", diff, diff)) * scaled_phi_I3(eta, x, y, t)


def log_kernel_I3_array(eta: str, x, y, t) -> np.ndarray:
    x, y, t = _pts(x, y, t)
    diff = x - y
    with np.errstate(divide="ignore"):
        return (log_gauss_density(2, t, np.einsum("...i,...i->...", diff, diff))
                + np.log(scaled_phi_I3(eta, x, y, t)))


def kernel_I3(eta: str, point: EvalPoint) -> float:
    return float(kernel_I3_array(eta, point.x, point.y, point.t))


def phi_I3_naive(eta: str, t, x, y):
    """Phi_{t,sgn} as printed (three sinh terms), for comparison only."""
    canonical_label(3, eta)
    x, y, t = _pts(x, y, t)
    x1, x2, y1, y2 = x[..., 0], x[..., 1], y[..., 0], y[..., 1]
    tt = 4.0 * t
    out = (np.exp(x2 * y2 / (2 * t)) * np.sinh(x1 * y1 / (2 * t))
           - np.exp((SQRT3 * x1 - x2) * y2 / tt) * np.sinh((x1 + SQRT3 * x2) * y1 / tt)
           - np.exp((-SQRT3 * x1 - x2) * y2 / tt) * np.sinh((x1 - SQRT3 * x2) * y1 / tt))
    return float(out) if np.ndim(out) == 0 else out


# ------------------------------------------------------------------ bounds

def _frac(A, t):
    return A / (A + t)


def _bound_factors(m: int, label: str, x, y, t) -> list:
    x1, x2, y1, y2 = x[..., 0], x[..., 1], y[..., 0], y[..., 1]
    if m == 4:
        if label == "sgn":
            prods = [x1 * y1, x2 * y2, (x1 - x2) * (y1 - y2), (x1 + x2) * (y1 + y2)]
        elif label == "N2":
            prods = [x1 * y1, x2 * y2]
        elif label == "N1":
            prods = [x1 * y1, (x1 - x2) * (y1 - y2)]
        else:
            prods = []
    elif label == "sgn":
        prods = [x1 * y1, _lin3(x1, x2, -1.0) * _lin3(y1, y2, -1.0),
                 _lin3(x1, x2, 1.0) * _lin3(y1, y2, 1.0)]
    else:
        prods = []
    return [_frac(A, t) for A in prods]


def bound_dihedral_array(m: int, eta: str, x, y, t) -> np.ndarray:
    """Product of A/(A+t) factors times p_t(x-y), one factor per Dirichlet wall family."""
    label = canonical_label(m, eta)
    x, y, t = _pts(x, y, t)
    diff = x - y
    out = gauss_density(2, t, np.einsum("...i,...i->...", diff, diff))
    for f in _bound_factors(m, label, x, y, t):
        out = out * f
    return out


def log_bound_dihedral_array(m: int, eta: str, x, y, t) -> np.ndarray:
    label = canonical_label(m, eta)
    x, y, t = _pts(x, y, t)
    diff = x - y
    out = log_gauss_density(2, t, np.einsum("...i,...i->...", diff, diff))
    for f in _bound_factors(m, label, x, y, t):
        out = out + np.log(f)
    return out


def bound_dihedral(m: int, eta: str, point: EvalPoint) -> float:
    if m not in (3, 4):
        raise InvalidParameter("bounds are available for m = 3 and m = 4")
    return float(bound_dihedral_array(m, eta, point.x, point.y, point.t))


def kernel_dihedral_array(m: int, eta: str, x, y, t) -> np.ndarray:
    if m == 4:
        return kernel_I4_array(eta, x, y, t)
    if m == 3:
        return kernel_I3_array(eta, x, y, t)
    raise InvalidParameter("closed forms exist for m = 3 and m = 4 only")


def log_kernel_dihedral_array(m: int, eta: str, x, y, t) -> np.ndarray:
    if m == 4:
        return log_kernel_I4_array(eta, x, y, t)
    if m == 3:
        return log_kernel_I3_array(eta, x, y, t)
    raise InvalidParameter("closed forms exist for m = 3 and m = 4 only")

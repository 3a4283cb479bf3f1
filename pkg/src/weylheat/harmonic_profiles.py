"""Harmonic profiles of the planar cones and the bounds built from them.

The cone C(m) is {0 < theta < pi/m} for even m and {|theta| < pi/2m} for odd
m.  Its profile h_m = rho^m sin(m theta) (even) or rho^m cos(m theta) (odd)
factors into m linear forms, whose products with the matching forms at y
give the factor-product bound for the Dirichlet kernel.  That bound is a
theorem for m <= 4 and an open conjecture beyond; everything derived from it
for m >= 5 is flagged as conjectural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .dihedral_kernels import kernel_dihedral_array, lin_form, log_kernel_dihedral_array
from .errors import ConvergenceError, DomainError, InvalidParameter
from .gauss_kernels import gauss_density, log_gauss_density

FORMS = ("factor-product", "reduced", "distance")


@dataclass(frozen=True)
class LinearFactor:
    """The form x1 + sign*u*x2, or a coordinate when ``coord`` is set."""
    u_hi: float = 0.0
    u_lo: float = 0.0
    sign: float = 0.0
    coord: int | None = None

    def __call__(self, x1, x2):
        if self.coord == 0:
            return np.asarray(x1, dtype=float)
        if self.coord == 1:
            return np.asarray(x2, dtype=float)
        return lin_form(x1, x2, self.u_hi, self.u_lo, self.sign)

    @property
    def normal(self) -> tuple[float, float]:
        if self.coord == 0:
            return (1.0, 0.0)
        if self.coord == 1:
            return (0.0, 1.0)
        return (1.0, self.sign * self.u_hi)


@dataclass(frozen=True)
class Profile:
    m: int
    coefficients: dict[tuple[int, int], int]
    roots: tuple[float, ...]
    factored: tuple[LinearFactor, ...]
    leading: int
    conjectural: bool = field(default=False)

    def __call__(self, x) -> np.ndarray:
        """Factored evaluation, stable near the zero rays."""
        x = np.asarray(x, dtype=float)
        out = float(self.leading) * np.ones(x.shape[:-1])
        for f in self.factored:
            out = out * f(x[..., 0], x[..., 1])
        return out

    def coefficient_form(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for (p1, p2), c in self.coefficients.items():
            out = out + c * x[..., 0] ** p1 * x[..., 1] ** p2
        return out

    def factor_values(self, x) -> np.ndarray:
        """Values of the m linear factors, stacked on the last axis."""
        x = np.asarray(x, dtype=float)
        return np.stack([f(x[..., 0], x[..., 1]) for f in self.factored], axis=-1)

    def reduced(self, x) -> np.ndarray:
        """h_m without its leading constant (the product of the linear factors)."""
        return np.prod(self.factor_values(x), axis=-1)

    def laplacian_coefficients(self) -> dict[tuple[int, int], int]:
        """Exact Laplacian of the coefficient form (identically zero for a harmonic profile)."""
        out: dict[tuple[int, int], int] = {}
        for (p1, p2), c in self.coefficients.items():
            if p1 >= 2:
                key = (p1 - 2, p2)
                out[key] = out.get(key, 0) + c * p1 * (p1 - 1)
            if p2 >= 2:
                key = (p1, p2 - 2)
                out[key] = out.get(key, 0) + c * p2 * (p2 - 1)
        return {k: v for k, v in out.items() if v != 0}


def _cot_dd(num: int, den: int) -> tuple[float, float]:
    """cot(pi*num/den) as a double-double pair, correctly rounded in the high part."""
    with mpmath.workdps(50):
        v = mpmath.cot(mpmath.pi * num / den)
        hi = float(v)
        return hi, float(v - hi)


@lru_cache(maxsize=None)
def profile(m: int) -> Profile:
    if not isinstance(m, int) or m < 1:
        raise InvalidParameter("m must be a positive integer")
    coeffs: dict[tuple[int, int], int] = {}
    factors: list[LinearFactor] = [LinearFactor(coord=0)]
    roots: list[float] = []
    if m % 2 == 0:
        for j in range(m // 2):
            coeffs[(m - 2 * j - 1, 2 * j + 1)] = (-1) ** j * math.comb(m, 2 * j + 1)
        factors.append(LinearFactor(coord=1))
        leading = m
        # u_{j,m} = cot(pi j / m), j = 1 .. m/2 - 1; cot(pi j / m) = cot(2 pi j / 2m)
        root_args = [(2 * j, 2 * m) for j in range(1, m // 2)]
    else:
        for j in range((m - 1) // 2 + 1):
            coeffs[(m - 2 * j, 2 * j)] = (-1) ** j * math.comb(m, 2 * j)
        leading = 1
        # u_{j,m} = cot(pi (j + 1/2) / m), j = 0 .. (m-3)/2
        root_args = [(2 * j + 1, 2 * m) for j in range((m - 3) // 2 + 1)] if m >= 3 else []
    for num, den in root_args:
        hi, lo = _cot_dd(num, den)
        roots.append(hi)
        factors.append(LinearFactor(hi, lo, -1.0))
        factors.append(LinearFactor(hi, lo, 1.0))
    return Profile(m, coeffs, tuple(roots), tuple(factors), leading, conjectural=m >= 5)


# ----------------------------------------------------------- harmonicity

def stencil_laplacian(f, x, h: float) -> float:
    """Five-point Laplacian of f at x with spacing h."""
    x = np.asarray(x, dtype=float)
    e1 = np.array([h, 0.0])
    e2 = np.array([0.0, h])
    vals = [f(x + e1), f(x - e1), f(x + e2), f(x - e2), f(x)]
    return float((vals[0] + vals[1] + vals[2] + vals[3] - 4.0 * vals[4]) / (h * h))


def harmonicity_residual(m: int, x, rel_step: float = 1e-3) -> float:
    """Richardson-extrapolated five-point Laplacian of h_m, relative to m^2 |x|^{m-2}.

    A degree-m polynomial with generic (non-harmonic) second derivatives gives
    a residual of order one on this scale.
    """
    prof = profile(m)
    x = np.asarray(x, dtype=float)
    rho = float(np.hypot(*x))
    if rho == 0:
        raise DomainError("x must be non-zero")
    h = rel_step * rho

    def f(z):
        return float(prof.coefficient_form(z))

    coarse = stencil_laplacian(f, x, h)
    fine = stencil_laplacian(f, x, h / 2)
    extrap = (4.0 * fine - coarse) / 3.0
    return abs(extrap) / (m * m * rho ** max(m - 2, 0))


# --------------------------------------------------------- cone geometry

def cone_rays(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions of the two boundary half-lines L1, L2 of C(m)."""
    if m % 2 == 0:
        return np.array([1.0, 0.0]), np.array([math.cos(math.pi / m), math.sin(math.pi / m)])
    a = math.pi / (2 * m)
    return np.array([math.cos(a), -math.sin(a)]), np.array([math.cos(a), math.sin(a)])


def bisector(m: int) -> np.ndarray:
    """Unit vector along the symmetry line of C(m)."""
    if m % 2 == 0:
        a = math.pi / (2 * m)
        return np.array([math.cos(a), math.sin(a)])
    return np.array([1.0, 0.0])


def in_cone(m: int, x, closed: bool = True) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    theta = np.arctan2(x[..., 1], x[..., 0])
    lo, hi = (0.0, math.pi / m) if m % 2 == 0 else (-math.pi / (2 * m), math.pi / (2 * m))
    tol = 1e-12
    if closed:
        return (theta >= lo - tol) & (theta <= hi + tol)
    return (theta > lo) & (theta < hi)


def ray_distance(direction: np.ndarray, x) -> np.ndarray:
    """Distance from x to the closed half-line {s*direction : s >= 0}."""
    x = np.asarray(x, dtype=float)
    proj = x @ direction
    perp = np.abs(x[..., 0] * direction[1] - x[..., 1] * direction[0])
    return np.where(proj >= 0, perp, np.hypot(x[..., 0], x[..., 1]))


def _frac(A, t):
    return A / (A + t)


def _wedge(A, t):
    return np.minimum(1.0, A / t)


def conjecture_bound(m: int, x, y, t, form: str = "factor-product") -> np.ndarray:
    """Right-hand side of the factor-product bound and its two equivalent rewrites.

    ``factor-product``  prod_j h_j(x)h_j(y)/(h_j(x)h_j(y)+t) times p_t(x-y)
    ``reduced``         comparable factors merged into (x1y1/(x1y1+t))^{m-2}
    ``distance``        (1 ∧ d_v d_v/t)^{m-2} (1 ∧ d_L1 d_L1/t)(1 ∧ d_L2 d_L2/t) p_t(x-y)
    """
    if form not in FORMS:
        raise InvalidParameter(f"form must be one of {FORMS}")
    prof = profile(m)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise InvalidParameter("t must be positive")
    diff = x - y
    out = gauss_density(2, t, np.einsum("...i,...i->...", diff, diff))
    x1, x2, y1, y2 = x[..., 0], x[..., 1], y[..., 0], y[..., 1]
    if form == "factor-product" or (form == "reduced" and m <= 2):
        for f in prof.factored:
            out = out * _frac(f(x1, x2) * f(y1, y2), t)
        return out
    if form == "reduced":
        out = out * _frac(x1 * y1, t) ** (m - 2)
        if m % 2 == 0:
            f_minus = prof.factored[2]
            out = out * _frac(x2 * y2, t) * _frac(f_minus(x1, x2) * f_minus(y1, y2), t)
        else:
            fm, fp = prof.factored[1], prof.factored[2]
            out = out * _frac(fm(x1, x2) * fm(y1, y2), t) * _frac(fp(x1, x2) * fp(y1, y2), t)
        return out
    if m < 2:
        raise InvalidParameter("the distance form needs m >= 2")
    L1, L2 = cone_rays(m)
    dv = np.hypot(x1, x2) * np.hypot(y1, y2)
    d1 = ray_distance(L1, x) * ray_distance(L1, y)
    d2 = ray_distance(L2, x) * ray_distance(L2, y)
    return out * _wedge(dv, t) ** (m - 2) * _wedge(d1, t) * _wedge(d2, t)


def log_conjecture_bound(m: int, x, y, t) -> np.ndarray:
    """Logarithm of the factor-product form; avoids Gaussian underflow in scans."""
    prof = profile(m)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise InvalidParameter("t must be positive")
    diff = x - y
    out = log_gauss_density(2, t, np.einsum("...i,...i->...", diff, diff))
    for f in prof.factored:
        out = out + np.log(_frac(f(x[..., 0], x[..., 1]) * f(y[..., 0], y[..., 1]), t))
    return out


def log_dirichlet_cone_kernel_mp(m: int, x, y, t: float, min_digits: int = 15,
                                 max_dps: int = 640) -> tuple[float, float]:
    """(log p_t(x, y), digits lost) for the Dirichlet kernel of C(m), any m >= 1.

    Image sum in polar form: rotations by 2*pi*j/m with sign +1, reflections in
    the lines at angle beta_k with sign -1.  The working precision doubles until
    at least ``min_digits`` digits survive the cancellation.
    """
    if m < 1:
        raise InvalidParameter("m must be positive")
    if not t > 0:
        raise InvalidParameter("t must be positive")
    x = [float(v) for v in np.asarray(x, dtype=float).reshape(-1)]
    y = [float(v) for v in np.asarray(y, dtype=float).reshape(-1)]
    if not (in_cone(m, np.array(x), closed=False) and in_cone(m, np.array(y), closed=False)):
        raise DomainError("x and y must lie in the open cone")
    dps = 40
    while dps <= max_dps:
        with mpmath.workdps(dps):
            x1, x2, y1, y2 = (mpmath.mpf(v) for v in (*x, *y))
            tt = mpmath.mpf(t)
            rx, ry = mpmath.hypot(x1, x2), mpmath.hypot(y1, y2)
            ax, ay = mpmath.atan2(x2, x1), mpmath.atan2(y2, y1)
            c = rx * ry / (2 * tt)
            base = mpmath.cos(ax - ay)
            # first wall angle: 0 for even m, -pi/2m for odd m
            b0 = mpmath.mpf(0) if m % 2 == 0 else -mpmath.pi / (2 * m)
            total = mpmath.mpf(0)
            absum = mpmath.mpf(0)
            for j in range(m):
                rot = mpmath.exp(c * (mpmath.cos(ax - ay + 2 * mpmath.pi * j / m) - base))
                ref = mpmath.exp(c * (mpmath.cos(2 * (b0 + mpmath.pi * j / m) - ax - ay) - base))
                total += rot - ref
                absum += rot + ref
            if total > 0:
                lost = float(mpmath.log10(absum / total))
                if lost < dps - min_digits:
                    d2 = (x1 - y1) ** 2 + (x2 - y2) ** 2
                    val = mpmath.log(total) - d2 / (4 * tt) - mpmath.log(4 * mpmath.pi * tt)
                    return float(val), lost
        dps *= 2
    raise ConvergenceError(f"cancellation exceeds {max_dps} digits")


# ------------------------------------------------- intersection of half-spaces

def supporting_normals(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Inward unit normals (restricted to the last two coordinates) of the two half-spaces."""
    if m % 2 == 0:
        return np.array([0.0, 1.0]), np.array([math.sin(math.pi / m), -math.cos(math.pi / m)])
    a = math.pi / (2 * m)
    return np.array([math.sin(a), math.cos(a)]), np.array([math.sin(a), -math.cos(a)])


def hyperplane_angle(m: int) -> float:
    """pi minus the angle between the inward normals; equals pi/m."""
    v1, v2 = supporting_normals(m)
    return math.pi - math.acos(float(np.clip(v1 @ v2, -1.0, 1.0)))


def _split(d: int, m: int, x, y):
    if d < 3:
        raise InvalidParameter("the half-space intersection needs d >= 3")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != d or y.shape[-1] != d:
        raise DomainError(f"expected points in R^{d}")
    xf, xc = x[..., : d - 2], x[..., d - 2:]
    yf, yc = y[..., : d - 2], y[..., d - 2:]
    if not (np.all(in_cone(m, xc)) and np.all(in_cone(m, yc))):
        raise DomainError("points must lie in the closed intersection of the half-spaces")
    return xf, xc, yf, yc


def halfspace_intersection_kernel(d: int, m: int, x, y, t) -> np.ndarray:
    """Free Gaussian in the first d-2 coordinates times the planar Dirichlet cone kernel."""
    xf, xc, yf, yc = _split(d, m, x, y)
    t = np.asarray(t, dtype=float)
    df = xf - yf
    free = gauss_density(d - 2, t, np.einsum("...i,...i->...", df, df))
    if m in (3, 4):
        return free * kernel_dihedral_array(m, "sgn", xc, yc, t)
    from .gauss_kernels import make_spec, reflection_sum_batch
    from .reflection_core import build_system

    spec = make_spec(build_system("dihedral", m=m), "det")
    planar = reflection_sum_batch(spec, np.atleast_2d(xc), np.atleast_2d(yc), np.atleast_1d(t), compensated=True)
    return free * planar.reshape(np.shape(free))


def halfspace_intersection_bound(d: int, m: int, x, y, t) -> np.ndarray:
    """Edge/facet distance form with the full d-dimensional Gaussian."""
    xf, xc, yf, yc = _split(d, m, x, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    L1, L2 = cone_rays(m)
    dE = np.hypot(xc[..., 0], xc[..., 1]) * np.hypot(yc[..., 0], yc[..., 1])
    dS1 = ray_distance(L1, xc) * ray_distance(L1, yc)
    dS2 = ray_distance(L2, xc) * ray_distance(L2, yc)
    diff = x - y
    return (gauss_density(d, t, np.einsum("...i,...i->...", diff, diff))
            * _wedge(dE, t) ** (m - 2) * _wedge(dS1, t) * _wedge(dS2, t))


def log_halfspace_intersection_kernel(d: int, m: int, x, y, t) -> np.ndarray:
    """Log of the intersection kernel for m = 3, 4, safe against Gaussian underflow."""
    if m not in (3, 4):
        raise InvalidParameter("log evaluation uses the closed forms, m = 3 or 4")
    xf, xc, yf, yc = _split(d, m, x, y)
    t = np.asarray(t, dtype=float)
    df = xf - yf
    return (log_gauss_density(d - 2, t, np.einsum("...i,...i->...", df, df))
            + log_kernel_dihedral_array(m, "sgn", xc, yc, t))


def log_halfspace_intersection_bound(d: int, m: int, x, y, t) -> np.ndarray:
    xf, xc, yf, yc = _split(d, m, x, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    L1, L2 = cone_rays(m)
    dE = np.hypot(xc[..., 0], xc[..., 1]) * np.hypot(yc[..., 0], yc[..., 1])
    dS1 = ray_distance(L1, xc) * ray_distance(L1, yc)
    dS2 = ray_distance(L2, xc) * ray_distance(L2, yc)
    diff = x - y
    return (log_gauss_density(d, t, np.einsum("...i,...i->...", diff, diff))
            + (m - 2) * np.log(_wedge(dE, t)) + np.log(_wedge(dS1, t)) + np.log(_wedge(dS2, t)))


# ---------------------------------------------------------- GSC comparison

@dataclass(frozen=True)
class GscComparison:
    adjusted_x: np.ndarray
    adjusted_y: np.ndarray
    gsc_value: np.ndarray
    profile_left_ratio: np.ndarray
    profile_right_ratio: np.ndarray


def denominator_product(m: int, x, y, t) -> np.ndarray:
    """D_m(x, y, t) = prod_j (h_j(x) h_j(y) + t) over the linear factors of h_m."""
    prof = profile(m)
    fx = prof.factor_values(x)
    fy = prof.factor_values(y)
    t = np.asarray(t, dtype=float)
    return np.prod(fx * fy + t[..., None], axis=-1)


def gsc_compare(m: int, x, y, t=1.0, epsilon: float = 0.1) -> GscComparison:
    """Quantities comparing the factor-product bound with the adjusted-point form.

    The adjusted point is z + sqrt(t) v with v the bisector; the reported
    ratios are D/(h(x*)h(y*)) and h(x*)h(y*)e^{-eps|x-y|^2/t}/D, which the
    comparison requires to be bounded above.
    """
    if m < 2:
        raise InvalidParameter("m must be at least 2")
    if not epsilon > 0:
        raise InvalidParameter("epsilon must be positive")
    prof = profile(m)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    v = bisector(m)
    rt = np.sqrt(t)[..., None]
    xs = x + rt * v
    ys = y + rt * v
    hxs = prof.reduced(xs)
    hys = prof.reduced(ys)
    D = denominator_product(m, x, y, t)
    diff = x - y
    gauss = np.exp(-epsilon * np.einsum("...i,...i->...", diff, diff) / t)
    gsc = prof.reduced(x) * prof.reduced(y) / (hxs * hys)
    return GscComparison(xs, ys, gsc, hxs * hys * gauss / D, D / (hxs * hys))

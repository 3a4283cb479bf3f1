"""Measured equivalence constants, decay exponents and scalar inequalities.

A two-sided estimate ``K ≃ B`` is checked by sampling a region, taking the
ratio K/B in log space and recording its extremes over nested refinements of
the sample set.  Passing means finite positive extremes whose last refinement
moved them by less than ``DRIFT_LIMIT``.  None of this is a proof.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize
from scipy.special import expit

from . import dihedral_kernels as dk
from . import harmonic_profiles as hp
from .errors import CheckFailure, DomainError, InvalidParameter
from .orthogonal_kernels import (OrthogonalSpec, halfspace_ratios_array, log_bound_orthogonal_array,
                                 log_kernel_orthogonal_array)

DRIFT_LIMIT = 0.05
DEFAULT_SAMPLES = 20000
DEFAULT_REFINEMENTS = 4
LN2 = math.log(2.0)


# ------------------------------------------------------------------ sampling

@dataclass(frozen=True)
class Axis:
    """One sampled variable.

    ``log``     log-uniform on [lo, hi]
    ``linear``  uniform on [lo, hi]
    ``logit``   lo + (hi-lo) * expit(z), z uniform on ±decades*ln10, so both
                ends of the interval are resolved logarithmically
    """
    name: str
    lo: float
    hi: float
    scale: str = "log"
    decades: float = 6.0

    def __post_init__(self):
        if self.scale not in ("log", "linear", "logit"):
            raise InvalidParameter(f"unknown axis scale {self.scale!r}")
        if not self.lo < self.hi or (self.scale == "log" and self.lo <= 0):
            raise InvalidParameter(f"bad range for axis {self.name}")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        if self.scale == "log":
            return np.exp(math.log(self.lo) + u * (math.log(self.hi) - math.log(self.lo)))
        if self.scale == "linear":
            return self.lo + u * (self.hi - self.lo)
        z = (2.0 * u - 1.0) * self.decades * math.log(10.0)
        return self.lo + (self.hi - self.lo) * expit(z)


Samples = dict[str, np.ndarray]


@dataclass(frozen=True)
class SamplingPlan:
    axes: tuple[Axis, ...]
    n_samples: int = DEFAULT_SAMPLES
    refinements: int = DEFAULT_REFINEMENTS
    seed: int = 0
    transform: Callable[[Samples], Samples] | None = None
    region: Callable[[Samples], np.ndarray] | None = None
    region_name: str = ""
    max_draw_factor: int = 200

    def __post_init__(self):
        if self.n_samples < 1 or self.refinements < 1:
            raise InvalidParameter("need n_samples >= 1 and refinements >= 1")

    def with_(self, **changes) -> "SamplingPlan":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return SamplingPlan(**fields)

    def sample(self) -> Samples:
        """Deterministic given the seed; every returned sample satisfies the region."""
        rng = np.random.default_rng(self.seed)
        n = self.n_samples
        batch = max(4096, n)
        parts: list[Samples] = []
        have = drawn = 0
        while have < n:
            raw = {ax.name: ax.draw(rng, batch) for ax in self.axes}
            vals = self.transform(raw) if self.transform else raw
            if self.region is not None:
                mask = np.asarray(self.region(vals), dtype=bool)
                vals = {k: v[mask] for k, v in vals.items()}
            parts.append(vals)
            have += len(next(iter(vals.values())))
            drawn += batch
            if have < n and drawn > self.max_draw_factor * n:
                raise DomainError(f"region {self.region_name or '?'} is too thin to sample")
        return {k: np.concatenate([p[k] for p in parts])[:n] for k in parts[0]}

    def sizes(self) -> list[int]:
        return [max(1, self.n_samples >> (self.refinements - 1 - i)) for i in range(self.refinements)]

    def metadata(self) -> dict:
        return {
            "axes": [[a.name, a.lo, a.hi, a.scale] for a in self.axes],
            "n_samples": self.n_samples,
            "refinements": self.sizes(),
            "seed": self.seed,
            "region": self.region_name,
        }


def _point(samples: Samples, i: int) -> dict[str, float]:
    return {k: float(v[i]) for k, v in samples.items()}


# ------------------------------------------------------------------ reports

@dataclass
class RatioReport:
    name: str
    min_ratio: float
    max_ratio: float
    argmin: dict
    argmax: dict
    n_samples: int
    refinement_history: list[tuple[int, float, float]]
    sided: str = "two"
    anchor: str = "plumbing"
    meta: dict = field(default_factory=dict)
    samples: Samples | None = field(default=None, repr=False, compare=False)
    ratios: np.ndarray | None = field(default=None, repr=False, compare=False)
    log_kernel: np.ndarray | None = field(default=None, repr=False, compare=False)
    log_bound: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def drift(self) -> float:
        if len(self.refinement_history) < 2:
            return math.inf
        (_, a0, b0), (_, a1, b1) = self.refinement_history[-2:]
        db = abs(b1 - b0) / abs(b1) if b1 else math.inf
        if self.sided == "upper":
            return db
        da = abs(a1 - a0) / abs(a1) if a1 else math.inf
        return max(da, db)

    @property
    def passed(self) -> bool:
        finite = math.isfinite(self.max_ratio) and self.max_ratio > 0
        if self.sided == "two":
            finite = finite and math.isfinite(self.min_ratio) and self.min_ratio > 0
        return finite and self.min_ratio <= self.max_ratio and self.drift < DRIFT_LIMIT

    def merge(self, other: "RatioReport") -> "RatioReport":
        """Combine reports over disjoint sample partitions (min of mins, max of maxes)."""
        lo = self if self.min_ratio <= other.min_ratio else other
        hi = self if self.max_ratio >= other.max_ratio else other
        return RatioReport(self.name, lo.min_ratio, hi.max_ratio, lo.argmin, hi.argmax,
                           self.n_samples + other.n_samples,
                           self.refinement_history + other.refinement_history[-1:],
                           self.sided, self.anchor, dict(self.meta))


LogExpr = Callable[[Samples], np.ndarray]


def ratio_scan(kernel_expr: LogExpr, bound_expr: LogExpr, plan: SamplingPlan, *,
               name: str = "", anchor: str = "plumbing", sided: str = "two",
               keep_samples: bool = False) -> RatioReport:
    """Extremes of kernel/bound over the plan's samples.

    Both expressions return natural logarithms.  A NaN or -inf (non-positive
    value) raises CheckFailure carrying the offending sample.
    """
    if sided not in ("two", "upper"):
        raise InvalidParameter("sided must be 'two' or 'upper'")
    samples = plan.sample()
    lk = np.asarray(kernel_expr(samples), dtype=float)
    lb = np.asarray(bound_expr(samples), dtype=float)
    lr = lk - lb
    bad = ~np.isfinite(lk) | ~np.isfinite(lb)
    if sided == "upper":
        bad = np.isnan(lr) | (lr == np.inf)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise CheckFailure(f"{name or 'scan'}: non-positive or non-finite evaluation",
                           _point(samples, i))
    return _report(name, lr, samples, plan, anchor, sided, keep_samples, logs=(lk, lb))


def _report(name, log_ratio, samples, plan, anchor, sided, keep, meta=None, logs=None) -> RatioReport:
    history = []
    n = len(log_ratio)
    for size in plan.sizes():
        part = log_ratio[: min(size, n)]
        history.append((int(len(part)), float(np.exp(part.min())), float(np.exp(part.max()))))
    imin = int(np.argmin(log_ratio))
    imax = int(np.argmax(log_ratio))
    out = RatioReport(name, float(np.exp(log_ratio[imin])), float(np.exp(log_ratio[imax])),
                      _point(samples, imin), _point(samples, imax), n, history, sided, anchor,
                      {**plan.metadata(), **(meta or {})})
    if keep:
        out.samples = samples
        out.ratios = np.exp(log_ratio)
        if logs is not None:
            out.log_kernel, out.log_bound = logs
    return out


# ----------------------------------------------------- chamber point samplers

RHO_LO, RHO_HI = 1e-3, 1e3


def _angle_range(m: int) -> tuple[float, float]:
    if m % 2 == 0:
        return 0.0, math.pi / m
    return -math.pi / (2 * m), math.pi / (2 * m)


def chamber_plan(m: int, n: int = DEFAULT_SAMPLES, seed: int = 0,
                 rho: tuple[float, float] = (RHO_LO, RHO_HI), t: float = 0.5,
                 extra_free: int = 0) -> SamplingPlan:
    """Pairs x, y in the planar cone of aperture pi/m, radii log-uniform, t fixed.

    Scale invariance of every ratio lets t stay fixed.  ``extra_free`` prepends
    unconstrained coordinates (for product domains), drawn uniformly on [-10, 10].
    """
    lo, hi = _angle_range(m)
    axes = [Axis("rx", *rho), Axis("ry", *rho), Axis("ax", 0.0, 1.0, "logit"),
            Axis("ay", 0.0, 1.0, "logit")]
    axes += [Axis(f"f{p}{i}", -10.0, 10.0, "linear") for p in "xy" for i in range(extra_free)]

    def build(raw: Samples) -> Samples:
        thx = lo + (hi - lo) * raw["ax"]
        thy = lo + (hi - lo) * raw["ay"]
        out = {f"x{i}": raw[f"fx{i}"] for i in range(extra_free)}
        out.update({f"y{i}": raw[f"fy{i}"] for i in range(extra_free)})
        k = extra_free
        out[f"x{k}"] = raw["rx"] * np.cos(thx)
        out[f"x{k + 1}"] = raw["rx"] * np.sin(thx)
        out[f"y{k}"] = raw["ry"] * np.cos(thy)
        out[f"y{k + 1}"] = raw["ry"] * np.sin(thy)
        out["t"] = np.full_like(raw["rx"], t)
        return out

    def region(v: Samples) -> np.ndarray:
        k = extra_free
        xs = np.stack([v[f"x{k}"], v[f"x{k + 1}"]], axis=-1)
        ys = np.stack([v[f"y{k}"], v[f"y{k + 1}"]], axis=-1)
        return hp.in_cone(m, xs, closed=False) & hp.in_cone(m, ys, closed=False)

    return SamplingPlan(tuple(axes), n, DEFAULT_REFINEMENTS, seed, build, region,
                        f"C(m={m}) x C(m={m})")


def orthant_plan(spec: OrthogonalSpec, n: int = DEFAULT_SAMPLES, seed: int = 0,
                 t: float = 0.5) -> SamplingPlan:
    """Free coordinates uniform on [-10, 10], reflected ones log-uniform on [1e-3, 1e3]."""
    free = spec.d - spec.k
    axes = []
    for p in "xy":
        axes += [Axis(f"{p}{i}", -10.0, 10.0, "linear") for i in range(free)]
        axes += [Axis(f"{p}{i}", RHO_LO, RHO_HI) for i in range(free, spec.d)]

    def build(raw: Samples) -> Samples:
        out = dict(raw)
        out["t"] = np.full_like(raw["x0"], t)
        return out

    return SamplingPlan(tuple(axes), n, DEFAULT_REFINEMENTS, seed, build, None,
                        f"R^{free} x (0,inf)^{spec.k}")


def _xy(v: Samples, d: int, offset: int = 0) -> tuple[np.ndarray, np.ndarray]:
    x = np.stack([v[f"x{i}"] for i in range(offset, offset + d)], axis=-1)
    y = np.stack([v[f"y{i}"] for i in range(offset, offset + d)], axis=-1)
    return x, y


# ------------------------------------------------ reduced-variable regions

def _st(name="s", lo=0.0, hi=1.0) -> Axis:
    return Axis(name, lo, hi, "logit")


def claim_plan(which: str, n: int = DEFAULT_SAMPLES, seed: int = 0) -> SamplingPlan:
    """Regions of the square-chamber claims and the hexagonal-chamber regimes.

    near     Y < X <= 1, 0 < s < 1
    mid      max(1, Y) < X <= Y + 1/(1-s)
    far      X > Y + 1/(1-s)
    small    X + Y < 1, |s| < 1
    A..D     X + Y >= 1 split by (1-s)X <> 1 and (1+s)Y <> 1
    """
    if which == "near":
        axes = (_st(), Axis("X", 1e-6, 1.0), Axis("r", 0.0, 1.0, "logit"))

        def build(r):
            return {"s": r["s"], "X": r["X"], "Y": r["X"] * r["r"]}

        region = lambda v: (v["Y"] > 0) & (v["Y"] < v["X"]) & (v["X"] <= 1.0)
        desc = "Y<X<=1"
    elif which == "mid":
        axes = (_st(), Axis("Y", 1e-3, 1e3), Axis("w", 0.0, 1.0, "logit"))

        def build(r):
            s, Y = r["s"], r["Y"]
            base = np.maximum(1.0, Y)
            top = Y + 1.0 / (1.0 - s)
            return {"s": s, "X": base + r["w"] * (top - base), "Y": Y}

        region = lambda v: ((v["X"] > np.maximum(1.0, v["Y"]))
                            & (v["X"] <= v["Y"] + 1.0 / (1.0 - v["s"])))
        desc = "max(1,Y)<X<=Y+1/(1-s)"
    elif which == "far":
        axes = (_st(), Axis("Y", 1e-3, 1e3), Axis("e", 1e-6, 1e3))

        def build(r):
            s, Y = r["s"], r["Y"]
            return {"s": s, "X": Y + 1.0 / (1.0 - s) + r["e"], "Y": Y}

        region = lambda v: v["X"] > v["Y"] + 1.0 / (1.0 - v["s"])
        desc = "X>Y+1/(1-s)"
    elif which == "small":
        axes = (_st(lo=-1.0), Axis("sigma", 1e-6, 1.0), Axis("f", 0.0, 1.0, "logit"))

        def build(r):
            return {"s": r["s"], "X": r["sigma"] * r["f"], "Y": r["sigma"] * (1.0 - r["f"])}

        region = lambda v: (v["X"] > 0) & (v["Y"] > 0) & (v["X"] + v["Y"] < 1.0)
        desc = "X+Y<1"
    elif which in ("A", "B", "C", "D"):
        # T = (1-s)X and U = (1+s)Y; a side below 1 is drawn on the logit scale of (0, 1),
        # a side above 1 as 1 + log-uniform excess, so both ends of each range are resolved
        def side(name, below):
            return Axis(name, 0.0, 1.0, "logit") if below else Axis(name, 1e-6, 1e3)

        axes = (_st(lo=-1.0), side("T", which in ("A", "B")), side("U", which in ("A", "C")))

        def build(r, which=which):
            s = r["s"]
            T = r["T"] if which in ("A", "B") else 1.0 + r["T"]
            U = r["U"] if which in ("A", "C") else 1.0 + r["U"]
            return {"s": s, "X": T / (1.0 - s), "Y": U / (1.0 + s)}

        def region(v, which=which):
            T = (1.0 - v["s"]) * v["X"]
            U = (1.0 + v["s"]) * v["Y"]
            okT = T < 1.0 if which in ("A", "B") else T >= 1.0
            okU = U < 1.0 if which in ("A", "C") else U >= 1.0
            return (v["X"] + v["Y"] >= 1.0) & okT & okU & (np.abs(v["s"]) < 1.0)

        desc = f"X+Y>=1, case {which}"
    else:
        raise InvalidParameter(f"unknown region {which!r}")
    return SamplingPlan(axes, n, DEFAULT_REFINEMENTS, seed, build, region, desc)


# ------------------------------------------------------- helper functions

def log_sinh(u):
    u = np.asarray(u, dtype=float)
    return u - LN2 + np.log(-np.expm1(-2.0 * u))


def log_sinhc(u):
    """log(sinh(u)/u) for u >= 0, accurate for small u."""
    u = np.asarray(u, dtype=float)
    small = u < 0.5
    us = np.where(small, u, 0.0)
    u2 = us * us
    acc = np.zeros_like(us)
    term = np.ones_like(us)
    for k in range(1, 12):
        term = term * u2 / ((2 * k) * (2 * k + 1))
        acc = acc + term
    big = np.where(small, 1.0, u)
    return np.where(small, np.log1p(acc), log_sinh(big) - np.log(big))


def LX_scaled(s, X):
    """e^{-X} L_X(s) with L_X(s) = [sinh((1+s)X) - (1+s)/(1-s) sinh((1-s)X)] / sinh(sX)."""
    s = np.asarray(s, dtype=float)
    X = np.asarray(X, dtype=float)
    q = (1.0 + s) / (1.0 - s)
    num = -np.expm1(-2.0 * (1.0 + s) * X) - q * (np.exp(-2.0 * s * X) - np.exp(-2.0 * X))
    return num / -np.expm1(-2.0 * s * X)


def LX_bracket_scaled(X):
    """e^{-X} times the bracket 2cosh X (1 - tanh X / X) <= L_X <= 2cosh X."""
    X = np.asarray(X, dtype=float)
    upper = 1.0 + np.exp(-2.0 * X)
    return upper * (1.0 - np.tanh(X) / X), upper


def log_dG_dX_i4(s, X, Y):
    """log of the X-derivative of the square-chamber G, valid for X > 0, 0 < s < 1."""
    s = np.asarray(s, dtype=float)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return (np.log(0.5 * (1.0 - s)) + log_sinh(Y) - log_sinh(s * Y) + log_sinh(s * X)
            - 2.0 * log_sinh(X) + X + np.log(LX_scaled(s, X)))


def case_d_corner(s):
    """F_s(1/(1-s), 1/(1+s)) = (1 + 2/(coth a + coth b)) / e with a, b = 1/(1∓s)."""
    s = np.abs(np.asarray(s, dtype=float))
    a = 1.0 / (1.0 - s)
    b = 1.0 / (1.0 + s)
    return (1.0 + 2.0 / (1.0 / np.tanh(a) + 1.0 / np.tanh(b))) / math.e


def _f_caseB(T):
    T = np.asarray(T, dtype=float)
    safe = np.where(T == 0, 1.0, T)
    return np.where(T == 0, 1.0, -np.expm1(-safe) / safe)


def _g_caseB(U):
    U = np.asarray(U, dtype=float)
    safe = np.where(U == 0, 1.0, U)
    with np.errstate(over="ignore"):
        return np.where(U == 0, 1.0, np.expm1(safe) / safe)


def case_b_epsilons() -> tuple[float, float]:
    """(eps1, eps2): eps1 = 2/(e^2-1), eps2 = sup over [0,2] of f(2-U)/g(U)."""
    eps1 = 2.0 / math.expm1(2.0)
    h = lambda U: float(_f_caseB(2.0 - U) / _g_caseB(U))
    grid = np.linspace(0.0, 2.0, 2001)
    vals = _f_caseB(2.0 - grid) / _g_caseB(grid)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(lambda U: -h(U), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12})
    return eps1, max(float(vals.max()), -float(res.fun))


def far_aux(s, y):
    """G_s(y) from the Claim-3 argument and its y -> 0+ value."""
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    a = 1.0 / (1.0 - s)
    b = s * a
    pref = np.exp(log_sinh(b) - log_sinh(a))
    val = pref * (1.0 / np.tanh(s * y) + 1.0 / np.tanh(b)) / (1.0 / np.tanh(y) + 1.0 / np.tanh(a))
    return val, pref / s


def comparable_factors(m: int) -> list[int]:
    """Indices of profile factors that stay away from zero on the closed cone minus the vertex."""
    prof = hp.profile(m)
    rays = hp.cone_rays(m)
    out = []
    for i, f in enumerate(prof.factored):
        if i == 0:
            continue
        if all(abs(float(f(r[0], r[1]))) > 1e-12 for r in rays):
            out.append(i)
    return out


# --------------------------------------------------------- named ratio scans

@dataclass(frozen=True)
class ScanCase:
    name: str
    anchor: str
    plan: Callable[[int, int], SamplingPlan]
    log_kernel: LogExpr
    log_bound: LogExpr
    sided: str = "two"
    description: str = ""
    default_n: int = DEFAULT_SAMPLES


def _dihedral_case(name, m, eta, anchor, desc) -> ScanCase:
    return ScanCase(
        name, anchor, lambda n, seed: chamber_plan(m, n, seed),
        lambda v: dk.log_kernel_dihedral_array(m, eta, *_xy(v, 2), v["t"]),
        lambda v: dk.log_bound_dihedral_array(m, eta, *_xy(v, 2), v["t"]),
        description=desc)


def _orth_case(name, d, k, eta, anchor) -> ScanCase:
    spec = OrthogonalSpec(d, k, eta)
    return ScanCase(
        name, anchor, lambda n, seed: orthant_plan(spec, n, seed),
        lambda v: log_kernel_orthogonal_array(spec, *_xy(v, d), v["t"]),
        lambda v: log_bound_orthogonal_array(spec, *_xy(v, d), v["t"]),
        description=f"d={d}, k={k}, eta={''.join(map(str, eta))}")


def _claim_case(name, which, anchor, log_g, log_target, desc) -> ScanCase:
    return ScanCase(name, anchor, lambda n, seed: claim_plan(which, n, seed),
                    log_g, log_target, description=desc)


def _log_g4(v):
    return np.log(dk.g_function(4, v["s"], v["X"], v["Y"]))


def _log_g3(v):
    return np.log(dk.g_function(3, v["s"], v["X"], v["Y"]))


def _log_small_lhs(v):
    # sinh(X+Y) G3 is the left-hand side of the small-regime estimate
    return log_sinh(v["X"] + v["Y"]) + _log_g3(v)


def _log_one(v):
    return np.zeros_like(v["s"])


def _profile_compare_case(m: int) -> ScanCase:
    idx = comparable_factors(m)
    prof = hp.profile(m)

    def lk(v):
        x, y = _xy(v, 2)
        t = v["t"]
        ref = np.log(hp._frac(x[..., 0] * y[..., 0], t))
        vals = [np.log(hp._frac(prof.factored[i](x[..., 0], x[..., 1])
                                * prof.factored[i](y[..., 0], y[..., 1]), t)) - ref for i in idx]
        # min and max over the comparable factors, concatenated
        stack = np.stack(vals)
        return np.concatenate([stack.min(axis=0), stack.max(axis=0)])

    return ScanCase(f"profile-compare-m{m}", "hip2", lambda n, seed: chamber_plan(m, n, seed), lk, lambda v: np.zeros(2 * len(v["t"])),
                    description=f"comparable factors {idx} against x1y1/(x1y1+t)")


def _profile_side_case(m: int, side: str, eps: float = 0.1) -> ScanCase:
    def lk(v):
        x, y = _xy(v, 2)
        g = hp.gsc_compare(m, x, y, v["t"], eps)
        log_right = np.log(g.profile_right_ratio)
        if side == "right":
            return log_right
        diff = x - y
        return -log_right - eps * np.einsum("...i,...i->...", diff, diff) / v["t"]

    return ScanCase(f"profile-{side}-m{m}", "uuu",
                    lambda n, seed: chamber_plan(m, n, seed, t=1.0), lk,
                    lambda v: np.zeros_like(v["t"]), sided="upper",
                    description=f"epsilon={eps}" if side == "left" else "",
                    # the maximiser is a thin set near the vertex; more samples keep drift low
                    default_n=4 * DEFAULT_SAMPLES)


def _intersection_case(m: int, d: int = 3) -> ScanCase:
    def lk(v):
        return hp.log_halfspace_intersection_kernel(d, m, *_xy(v, d), v["t"])

    def lb(v):
        return hp.log_halfspace_intersection_bound(d, m, *_xy(v, d), v["t"])

    return ScanCase(f"intersection-d{d}-m{m}", "hip222",
                    lambda n, seed: chamber_plan(m, n, seed, extra_free=d - 2), lk, lb,
                    description=f"d={d}")


def _new_case() -> ScanCase:
    return ScanCase("new-derivative", "new", lambda n, seed: claim_plan("mid", n, seed),
                    lambda v: log_dG_dX_i4(v["s"], v["X"], v["Y"]),
                    lambda v: np.log1p(-v["s"]), description="d/dX G against 1-s")


def _build_cases() -> dict[str, ScanCase]:
    cases = [
        _orth_case("orth-d1-k1-eta1", 1, 1, (1,), "orto"),
        _orth_case("orth-d2-k2-eta10", 2, 2, (1, 0), "orto"),
        _orth_case("orth-d3-k2-eta11", 3, 2, (1, 1), "orto"),
        _dihedral_case("i3-sgn", 3, "sgn", "sgn1", "hexagonal chamber, Dirichlet"),
        _dihedral_case("i4-sgn", 4, "sgn", "sgn", "square chamber, Dirichlet"),
        _dihedral_case("i4-n2", 4, "N2", "XY", "Dirichlet on x2 = 0, Neumann on the diagonal"),
        _dihedral_case("i4-n1", 4, "N1", "N1", "Dirichlet on the diagonal, Neumann on x2 = 0"),
        _dihedral_case("i4-triv", 4, "triv", "Neu", "Neumann everywhere"),
        _dihedral_case("i3-triv", 3, "triv", "Neu", "Neumann everywhere"),
        _claim_case("g4-near", "near", "cl3", _log_g4,
                    lambda v: np.log1p(-v["s"]) + np.log(v["X"] - v["Y"]) + np.log(v["X"]),
                    "G against (1-s)(X-Y)X"),
        _claim_case("g4-mid", "mid", "cl2", _log_g4,
                    lambda v: np.log1p(-v["s"]) + np.log(v["X"] - v["Y"]), "G against (1-s)(X-Y)"),
        _claim_case("g4-far", "far", "cl1", _log_g4, _log_one, "G against 1"),
        _claim_case("g3-small", "small", "lala2", _log_small_lhs,
                    lambda v: (np.log1p(-v["s"]) + np.log1p(v["s"]) + np.log(v["X"])
                               + np.log(v["Y"]) + np.log(v["X"] + v["Y"])),
                    "S against (1-s^2)XY(X+Y)"),
        _claim_case("g3-A", "A", "lala5:A", _log_g3,
                    lambda v: (np.log1p(-v["s"]) + np.log1p(v["s"]) + np.log(v["X"]) + np.log(v["Y"])),
                    "G against (1-s^2)XY"),
        _claim_case("g3-B", "B", "lala5:B", _log_g3,
                    lambda v: np.log1p(-v["s"]) + np.log(v["X"]), "G against (1-s)X"),
        _claim_case("g3-C", "C", "lala5:C", _log_g3,
                    lambda v: np.log1p(v["s"]) + np.log(v["Y"]), "G against (1+s)Y"),
        _claim_case("g3-D", "D", "lala5:D", _log_g3, _log_one, "G against 1"),
        _new_case(),
        _profile_compare_case(4), _profile_compare_case(6),
        _profile_side_case(4, "left"), _profile_side_case(4, "right"), _profile_side_case(6, "left"), _profile_side_case(6, "right"),
        _intersection_case(3), _intersection_case(4),
    ]
    return {c.name: c for c in cases}


SCAN_CASES: dict[str, ScanCase] = _build_cases()
KERNEL_SCANS = ("orth-d1-k1-eta1", "orth-d2-k2-eta10", "orth-d3-k2-eta11", "i3-sgn",
                "i4-sgn", "i4-n2", "i4-n1", "i4-triv", "i3-triv")
CLAIM_SCANS = ("g4-near", "g4-mid", "g4-far", "g3-small", "g3-A", "g3-B", "g3-C", "g3-D")
PROFILE_SCANS = ("profile-compare-m4", "profile-compare-m6", "profile-left-m4", "profile-right-m4",
                  "profile-left-m6", "profile-right-m6", "intersection-d3-m3", "intersection-d3-m4")


def run_scan(name: str, n: int | None = None, seed: int = 0,
             keep_samples: bool = False) -> RatioReport:
    try:
        case = SCAN_CASES[name]
    except KeyError:
        raise InvalidParameter(f"unknown scan {name!r}") from None
    plan = case.plan(n or case.default_n, seed)
    if case.name.startswith("profile-compare-"):
        return _profile_compare_scan(case, plan, keep_samples)
    report = ratio_scan(case.log_kernel, case.log_bound, plan, name=case.name,
                        anchor=case.anchor, sided=case.sided, keep_samples=keep_samples)
    if case.description:
        report.meta["description"] = case.description
    return report


def _profile_compare_scan(case: ScanCase, plan: SamplingPlan, keep: bool) -> RatioReport:
    # min over factors drives min_ratio, max over factors drives max_ratio
    samples = plan.sample()
    both = case.log_kernel(samples)
    n = len(samples["t"])
    lo, hi = both[:n], both[n:]
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        i = int(np.flatnonzero(~np.isfinite(lo) | ~np.isfinite(hi))[0])
        raise CheckFailure(f"{case.name}: non-finite factor ratio", _point(samples, i))
    history = []
    for size in plan.sizes():
        history.append((min(size, n), float(np.exp(lo[:size].min())), float(np.exp(hi[:size].max()))))
    imin, imax = int(np.argmin(lo)), int(np.argmax(hi))
    out = RatioReport(case.name, float(np.exp(lo[imin])), float(np.exp(hi[imax])),
                      _point(samples, imin), _point(samples, imax), n, history, "two", case.anchor,
                      {**plan.metadata(), "description": case.description})
    if keep:
        out.samples = samples
        out.ratios = np.exp(hi)
    return out


# ----------------------------------------------------------- conjecture

def conjecture_scan(m: int, n: int = 4000, seed: int = 0,
                    rho: tuple[float, float] = (1e-2, 1e2), keep_samples: bool = False) -> RatioReport:
    """Measured [c, C] of the Dirichlet cone kernel against the factor-product form.

    For m >= 5 the estimate is conjectural, which the report states.  The
    kernel comes from the image sum in adaptive multiprecision, so no sample is
    dropped for cancellation; the grid extent is part of the metadata.
    """
    if m < 1:
        raise InvalidParameter("m must be positive")
    plan = chamber_plan(m, n, seed, rho=rho)
    samples = plan.sample()
    x, y = _xy(samples, 2)
    t = samples["t"]
    if m in (3, 4):
        lk = dk.log_kernel_dihedral_array(m, "sgn", x, y, t)
        digits = np.zeros(n)
    else:
        lk = np.empty(n)
        digits = np.empty(n)
        for i in range(n):
            lk[i], digits[i] = hp.log_dirichlet_cone_kernel_mp(m, x[i], y[i], float(t[i]))
    lb = hp.log_conjecture_bound(m, x, y, t)
    meta = {"conjectural": m >= 5, "grid_extent": list(rho), "max_digits_lost": float(digits.max())}
    return _report(f"conjecture-m{m}", lk - lb, samples, plan, "conjecture:hip",
                   "two", keep_samples, meta, logs=(lk, lb))


# ---------------------------------------------------------- long-time decay

@dataclass(frozen=True)
class SlopeCase:
    name: str
    expected: float
    log_kernel_t: Callable[[np.ndarray], np.ndarray]
    anchor: str


def long_time_slope(log_kernel_t: Callable[[np.ndarray], np.ndarray], t_lo: float, t_hi: float,
                    n: int = 41) -> float:
    """Least-squares slope of log p_t against log t on a log-uniform t-sample."""
    if not (t_lo > 0 and t_hi / t_lo >= 1e3):
        raise InvalidParameter("need t_hi / t_lo >= 1e3")
    ts = np.geomspace(t_lo, t_hi, n)
    lk = np.asarray(log_kernel_t(ts), dtype=float)
    if not np.all(np.isfinite(lk)):
        raise CheckFailure("log kernel is not finite on the time sample",
                           {"t": float(ts[np.flatnonzero(~np.isfinite(lk))[0]])})
    return float(np.polyfit(np.log(ts), lk, 1)[0])


def _slope_dihedral(m, eta, x, y):
    X = np.array(x, dtype=float)
    Y = np.array(y, dtype=float)
    return lambda ts: dk.log_kernel_dihedral_array(m, eta, np.broadcast_to(X, (len(ts), 2)),
                                                   np.broadcast_to(Y, (len(ts), 2)), ts)


def _slope_orth(d, k, eta, x, y):
    spec = OrthogonalSpec(d, k, eta)
    X = np.array(x, dtype=float)
    Y = np.array(y, dtype=float)
    return lambda ts: log_kernel_orthogonal_array(spec, np.broadcast_to(X, (len(ts), d)),
                                                  np.broadcast_to(Y, (len(ts), d)), ts)


SLOPE_CASES: dict[str, SlopeCase] = {c.name: c for c in (
    SlopeCase("slope-i4-triv", -1.0, _slope_dihedral(4, "triv", (2, 1), (3, 1)), "long2"),
    SlopeCase("slope-i4-N1", -3.0, _slope_dihedral(4, "N1", (2, 1), (3, 1)), "long2"),
    SlopeCase("slope-i4-N2", -3.0, _slope_dihedral(4, "N2", (2, 1), (3, 1)), "long2"),
    SlopeCase("slope-i4-sgn", -5.0, _slope_dihedral(4, "sgn", (2, 1), (3, 1)), "long2"),
    SlopeCase("slope-i3-sgn", -4.0, _slope_dihedral(3, "sgn", (2, 0.3), (3, -0.4)), "sgn1"),
    SlopeCase("slope-orth-d1-k1-eta1", -1.5, _slope_orth(1, 1, (1,), (1,), (2,)), "long"),
    SlopeCase("slope-orth-d2-k2-eta10", -2.0, _slope_orth(2, 2, (1, 0), (1, 2), (2, 1)), "long"),
    SlopeCase("slope-orth-d3-k2-eta11", -3.5, _slope_orth(3, 2, (1, 1), (0.5, 1, 2), (-1, 2, 1)),
              "long"),
)}


@dataclass(frozen=True)
class SlopeResult:
    name: str
    slope: float
    expected: float
    tolerance: float
    anchor: str

    @property
    def passed(self) -> bool:
        return abs(self.slope - self.expected) <= self.tolerance


def slope_suite(names: Sequence[str] | None = None, t_lo: float = 1e4, t_hi: float = 1e7,
                tolerance: float = 0.05) -> list[SlopeResult]:
    out = []
    for name in names or SLOPE_CASES:
        c = SLOPE_CASES[name]
        out.append(SlopeResult(name, long_time_slope(c.log_kernel_t, t_lo, t_hi), c.expected,
                               tolerance, c.anchor))
    return out


# ---------------------------------------------------------- inequality suite

@dataclass
class InequalityResult:
    name: str
    anchor: str
    passed: bool
    n_checked: int
    measured: dict
    witnesses: list[dict]


def _witnesses(mask: np.ndarray, cols: dict[str, np.ndarray], limit: int = 5) -> list[dict]:
    idx = np.flatnonzero(mask)[:limit]
    return [{k: float(np.broadcast_to(v, mask.shape)[i]) for k, v in cols.items()} for i in idx]


def _grid(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    A, B = np.meshgrid(a, b, indexing="ij")
    return A, B


def _logit_grid(lo, hi, n, decades=6.0):
    z = np.linspace(-decades, decades, n) * math.log(10.0)
    return lo + (hi - lo) * expit(z)


def _ineq_sinh_ratio(n: int, rng) -> InequalityResult:
    k = int(round(math.sqrt(n)))
    s = _logit_grid(0.0, 1.0, k)
    x = np.geomspace(1e-3, 1e3, k)
    S, Xg = _grid(s, x)
    f = log_sinh(S * Xg) - log_sinh(Xg)
    step = np.diff(f, axis=1)
    tol = 1e-13 * np.maximum(1.0, np.abs(f[:, 1:]))
    bad = step > tol
    return InequalityResult("sinh-ratio-monotone", "sinh-ratio", not bad.any(),
                            f.size, {"max_increment": float(step.max())},
                            _witnesses(bad, {"s": S[:, 1:], "x": Xg[:, 1:]}))


def _ineq_lx_bracket(n: int, rng) -> InequalityResult:
    k = int(round(math.sqrt(n)))
    X = np.geomspace(1.0 + 1e-9, 1e3, k)
    s = np.linspace(1e-3, 1.0 - 1e-3, k)
    Xg, S = _grid(X, s)
    L = LX_scaled(S, Xg)
    lo, hi = LX_bracket_scaled(Xg)
    tol = 1e-12
    below = L < lo * (1 - tol)
    above = L > hi * (1 + tol)
    mono = np.diff(L, axis=1) < -tol * L[:, 1:]
    bad = below | above
    ok = not bad.any() and not mono.any() and bool(np.all(L > 0))
    at2 = np.array(LX_bracket_scaled(2.0)) * math.exp(2.0)
    return InequalityResult("LX-bracket", "inacz", ok, L.size,
                            {"bracket_at_X2": [float(at2[0]), float(at2[1])],
                             "min_L_over_lower": float((L / lo).min()),
                             "max_L_over_upper": float((L / hi).max())},
                            _witnesses(bad, {"s": S, "X": Xg}) + _witnesses(mono, {"s": S[:, 1:], "X": Xg[:, 1:]}))


def _ineq_ine(n: int, rng) -> InequalityResult:
    k = int(round(math.sqrt(n)))
    a = np.geomspace(1e-3, 1e3, k)
    A, B = _grid(a, a)
    gap = log_sinhc(A + B) - log_sinhc(A) - log_sinhc(B)
    bad = gap <= -1e-13 * np.maximum(1.0, log_sinhc(A + B))
    return InequalityResult("ine", "ine", not bad.any(), gap.size,
                            {"min_log_gap": float(gap.min())}, _witnesses(bad, {"A": A, "B": B}))


def _chamber4_points(n, rng):
    r = np.exp(rng.uniform(math.log(RHO_LO), math.log(RHO_HI), (2, n)))
    th = rng.uniform(0.0, math.pi / 4, (2, n))
    return r[0] * np.cos(th[0]), r[0] * np.sin(th[0]), r[1] * np.cos(th[1]), r[1] * np.sin(th[1])


def _ineq_phi2(n: int, rng) -> InequalityResult:
    x1, x2, y1, y2 = _chamber4_points(n, rng)
    D = (x1 - x2) * (y1 - y2)
    lphi = np.log1p(x1 * y1) - np.log1p(x2 * y1) + np.log1p(x2 * y2) - np.log1p(x1 * y2) - D
    bad = lphi > 1e-12 * (1.0 + D + np.log1p(x1 * y1))
    return InequalityResult("phi2-bounded", "XY:phi2", not bad.any(), n,
                            {"sup": float(np.exp(lphi.max())), "threshold": 1.0},
                            _witnesses(bad, {"x1": x1, "x2": x2, "y1": y1, "y2": y2}))


def _ineq_phi1(n: int, rng) -> InequalityResult:
    x1, x2, y1, y2 = _chamber4_points(n, rng)
    P = (x1 + x2) * (y1 + y2)
    Q = (x1 + x2) * (y1 - y2)
    R = (x1 - x2) * (y1 - y2)
    S = (x1 - x2) * (y1 + y2)
    lphi = np.log1p(P) - np.log1p(Q) + np.log1p(R) - np.log1p(S) - 2.0 * x2 * y2
    cap = math.log(2.0) - 0.5
    bad = lphi > cap + 1e-12 * (1.0 + 2.0 * x2 * y2 + np.log1p(P))
    return InequalityResult("phi1-bounded", "N1:phi1", not bad.any(), n,
                            {"sup": float(np.exp(lphi.max())), "threshold": math.exp(cap)},
                            _witnesses(bad, {"x1": x1, "x2": x2, "y1": y1, "y2": y2}))


def _ineq_case_d(n: int, rng) -> InequalityResult:
    s = _logit_grid(0.0, 1.0, n)
    corner = case_d_corner(s)
    limit = 1.0 / math.cosh(1.0)
    bad_corner = corner > limit * (1 + 1e-13)
    plan = claim_plan("D", n, int(rng.integers(2**31)))
    v = plan.sample()
    F = 1.0 - dk.g_function(3, v["s"], v["X"], v["Y"])
    bad_F = F > case_d_corner(v["s"]) + 1e-13
    return InequalityResult("caseD-corner", "bound2", not (bad_corner.any() or bad_F.any()),
                            2 * n, {"max_corner": float(corner.max()), "limit": limit,
                                    "max_F_minus_corner": float((F - case_d_corner(v["s"])).max())},
                            _witnesses(bad_corner, {"s": s}) + _witnesses(bad_F, v))


def _ineq_case_b(n: int, rng) -> InequalityResult:
    eps1, eps2 = case_b_epsilons()
    k = int(round(math.sqrt(n)))
    while True:
        # refine until n grid points fall inside the domain T + U >= 2
        g = np.geomspace(1e-3, 1e3, k)
        T, U = _grid(g, g)
        mask = T + U >= 2.0
        if mask.sum() >= n:
            break
        k = int(math.ceil(k * math.sqrt(n / max(mask.sum(), 1)))) + 1
    ratio = _f_caseB(T) / _g_caseB(U)
    eps = max(eps1, eps2)
    bad = mask & (ratio >= eps * (1 + 1e-13))
    ok = not bad.any() and eps < 1.0
    return InequalityResult("caseB-epsilon", "bond3", ok, int(mask.sum()),
                            {"eps1": eps1, "eps2": eps2, "sup_ratio": float(ratio[mask].max())},
                            _witnesses(bad, {"T": T, "U": U}))


def _ineq_ass(n: int, rng) -> InequalityResult:
    u = np.geomspace(1e-6, 1e6, n)
    r = -np.expm1(-2.0 * u) * (u + 1.0) / (2.0 * u)
    bad = (r < 0.5 * (1 - 1e-15)) | (r > 1.0 + 1e-15)
    return InequalityResult("ass", "ass", not bad.any(), n,
                            {"inf": float(r.min()), "sup": float(r.max())}, _witnesses(bad, {"u": u}))


def _ineq_far_aux(n: int, rng) -> InequalityResult:
    k = int(round(math.sqrt(n)))
    s = _logit_grid(0.0, 1.0, k, decades=4.0)
    y = np.geomspace(1e-3, 1e3, k)
    S, Yg = _grid(s, y)
    val, at0 = far_aux(S, Yg)
    lim = 1.0 / math.sinh(1.0)
    bad = (val >= at0 * (1 + 1e-13)) | (at0 >= lim * (1 + 1e-13))
    return InequalityResult("far-aux", "cl1:aux", not bad.any(), val.size,
                            {"sup": float(val.max()), "limit": lim}, _witnesses(bad, {"s": S, "y": Yg}))


def _ineq_ort2(n: int, rng, eps: float = 0.1) -> InequalityResult:
    k = int(round(math.sqrt(n)))
    a = np.geomspace(1e-3, 1e3, k)
    A, B = _grid(a, a)
    lr = np.log1p(A) + np.log1p(B) - np.log1p(A * B) - eps * (A - B) ** 2
    sup = float(np.exp(lr.max()))
    return InequalityResult("ort2", "ort2", math.isfinite(sup), lr.size,
                            {"epsilon": eps, "sup": sup}, [])


def _ineq_new_monotone(n: int, rng) -> InequalityResult:
    k = int(round(math.sqrt(n)))
    j = max(2, int(round(math.sqrt(k))))
    s = _logit_grid(0.0, 1.0, j, decades=4.0)
    Y = np.geomspace(1e-3, 1e3, j)
    S, Yg = _grid(s, Y)
    S, Yg = S.ravel(), Yg.ravel()
    base = np.maximum(1.0, Yg)
    top = Yg + 1.0 / (1.0 - S)
    w = np.linspace(0.0, 1.0, k + 1)[1:]
    Xg = base[:, None] + w[None, :] * (top - base)[:, None]
    G = dk.g_function(4, np.broadcast_to(S[:, None], Xg.shape), Xg,
                      np.broadcast_to(Yg[:, None], Xg.shape))
    step = np.diff(G, axis=1)
    bad = step < -1e-15 * np.maximum(G[:, 1:], 1e-300)
    return InequalityResult("dGdX-positive", "new", not bad.any(), G.size,
                            {"min_increment": float(step.min())},
                            _witnesses(bad, {"s": S[:, None], "X": Xg[:, 1:], "Y": Yg[:, None]}))


INEQUALITIES: dict[str, tuple[Callable, str]] = {
    "sinh-ratio-monotone": (_ineq_sinh_ratio, "sinh-ratio"),
    "LX-bracket": (_ineq_lx_bracket, "inacz"),
    "ine": (_ineq_ine, "ine"),
    "phi1-bounded": (_ineq_phi1, "N1:phi1"),
    "phi2-bounded": (_ineq_phi2, "XY:phi2"),
    "caseD-corner": (_ineq_case_d, "bound2"),
    "caseB-epsilon": (_ineq_case_b, "bond3"),
    "ass": (_ineq_ass, "ass"),
    "far-aux": (_ineq_far_aux, "cl1:aux"),
    "dGdX-positive": (_ineq_new_monotone, "new"),
    "ort2": (_ineq_ort2, "ort2"),
}


def inequality_suite(selection: Sequence[str] | None = None, n: int = 10000,
                     seed: int = 0) -> list[InequalityResult]:
    names = list(selection) if selection else list(INEQUALITIES)
    out = []
    for name in names:
        if name not in INEQUALITIES:
            raise InvalidParameter(f"unknown inequality {name!r}")
        rng = np.random.default_rng([seed, len(out)])
        out.append(INEQUALITIES[name][0](n, rng))
    return out


# ------------------------------------------------ half-space literature form

@dataclass(frozen=True)
class Ort4Report:
    extents: list[float]
    max_discrepancy: list[float]
    max_literature_ratio: list[float]
    max_sharp_ratio: list[float]
    discrepancy_at_probe: float

    @property
    def grows(self) -> bool:
        d = self.max_discrepancy
        return all(b > a for a, b in zip(d, d[1:]))

    @property
    def sharp_plateaus(self) -> bool:
        r = self.max_sharp_ratio
        return abs(r[-1] - r[-2]) <= 0.01 * r[-1]


def ort4_inconsistency(extents: Sequence[float] = (10.0, 100.0, 1000.0, 1e4),
                       points: int = 201) -> Ort4Report:
    """Half-space Dirichlet kernel against the sharp and the literature bound shapes.

    At extent E the grid is x_d, y_d log-spaced on [1/E, E] with t = 1; the
    discrepancy between the two shapes is (x_d+√t)(y_d+√t)/(x_d y_d+t).
    """
    dis, lit, sharp = [], [], []
    for E in extents:
        g = np.geomspace(1.0 / E, E, points)
        xd, yd = _grid(g, g)
        r_sharp, r_lit = halfspace_ratios_array(xd, yd, 1.0)
        dis.append(float((r_lit / r_sharp).max()))
        lit.append(float(r_lit.max()))
        sharp.append(float(r_sharp.max()))
    rs, rl = halfspace_ratios_array(np.array(100.0), np.array(0.01), np.array(1.0))
    return Ort4Report(list(extents), dis, lit, sharp, float(rl / rs))

"""Gaussian kernel and the signed image sum over a reflection group.

The image sum ``sum_g eta(g) p_t(gx - y)`` is the generic evaluator for every
chamber.  It alternates in sign as soon as ``eta`` is non-trivial, so three
precision tiers are offered:

``standard``     plain left-to-right float sum,
``compensated``  terms paired across a Dirichlet reflection so that each pair
                 is a single ``-expm1`` product, then a Neumaier sum,
``extended``     exponents and sum in double-double arithmetic.

``auto`` starts with ``compensated`` and escalates to ``extended`` when the
cancellation diagnostic reports more than 12 lost digits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .ddouble import DD, dd_exp, dd_sum, neumaier_sum, two_prod
from .errors import DomainError, InvalidParameter
from .reflection_core import (RootSystem, SignHomomorphism, WeylGroup, enumerate_group,
                              find_homomorphism)

PRECISIONS = ("standard", "compensated", "extended", "auto")
SEVERE_DIGITS = 12.0
MAX_DIGITS = 32.0


def _check_t(t) -> None:
    if np.any(np.asarray(t) <= 0):
        raise InvalidParameter("t must be positive")


def gauss_kernel(d: int, t: float, w: Sequence[float]) -> float:
    """(4 pi t)^{-d/2} exp(-|w|^2 / 4t)."""
    _check_t(t)
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.size != d:
        raise DomainError(f"expected a vector in R^{d}")
    return float((4.0 * math.pi * t) ** (-d / 2.0) * math.exp(-(w @ w) / (4.0 * t)))


def gauss_density(d: int, t, sqnorm):
    """Vectorised Gaussian in terms of the squared norm."""
    t = np.asarray(t, dtype=float)
    return (4.0 * np.pi * t) ** (-d / 2.0) * np.exp(-np.asarray(sqnorm) / (4.0 * t))


def log_gauss_density(d: int, t, sqnorm):
    t = np.asarray(t, dtype=float)
    return -(d / 2.0) * np.log(4.0 * np.pi * t) - np.asarray(sqnorm) / (4.0 * t)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    system: RootSystem
    eta: SignHomomorphism
    precision: str = "auto"

    def __post_init__(self):
        if self.precision not in PRECISIONS:
            raise InvalidParameter(f"precision must be one of {PRECISIONS}")
        if self.eta.group.system is not self.system:
            raise InvalidParameter("homomorphism belongs to a different system")

    @property
    def group(self) -> WeylGroup:
        return self.eta.group


def make_spec(system: RootSystem, label: str, precision: str = "auto") -> KernelSpec:
    return KernelSpec(system, find_homomorphism(enumerate_group(system), label), precision)


@dataclass(frozen=True, eq=False)
class EvalPoint:
    x: np.ndarray
    y: np.ndarray
    t: float

    def __init__(self, x, y, t):
        object.__setattr__(self, "x", np.asarray(x, dtype=float).reshape(-1))
        object.__setattr__(self, "y", np.asarray(y, dtype=float).reshape(-1))
        object.__setattr__(self, "t", float(t))
        if self.t <= 0 or not math.isfinite(self.t):
            raise InvalidParameter("t must be positive")
        if self.x.shape != self.y.shape:
            raise DomainError("x and y must have the same dimension")

    def swapped(self) -> "EvalPoint":
        return EvalPoint(self.y, self.x, self.t)


def scale_reduce(point: EvalPoint, lam: float) -> EvalPoint:
    """(x, y, t) -> (x/lam, y/lam, t/lam^2).

    Kernels on cones satisfy p_t(x, y) = lam^{-d} p_{t/lam^2}(x/lam, y/lam).
    """
    if not lam > 0:
        raise InvalidParameter("lambda must be positive")
    return EvalPoint(point.x / lam, point.y / lam, point.t / lam ** 2)


def half_time_scale(t: float) -> float:
    """The lambda that sends t to 1/2."""
    return math.sqrt(2.0 * t)


# ------------------------------------------------------------- image sum

@dataclass(frozen=True)
class KernelValue:
    value: float
    digits_lost: float
    severe: bool
    precision: str

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class CancellationReport:
    digits_lost: float
    largest_term: float


def _validate(spec: KernelSpec, point: EvalPoint) -> None:
    d = spec.system.dimension
    if point.x.size != d:
        raise DomainError(f"dimension mismatch: point in R^{point.x.size}, system in R^{d}")


def _exponents(spec: KernelSpec, point: EvalPoint) -> np.ndarray:
    """-|gx - y|^2 / 4t for every group element, in group order."""
    gx = spec.group.matrices @ point.x
    diff = gx - point.y
    return -np.einsum("ij,ij->i", diff, diff) / (4.0 * point.t)


def _norm(d: int, t: float) -> float:
    return (4.0 * math.pi * t) ** (-d / 2.0)


def _standard_sum(spec: KernelSpec, point: EvalPoint) -> tuple[float, np.ndarray]:
    terms = spec.eta.array * np.exp(_exponents(spec, point)) * _norm(spec.system.dimension, point.t)
    total = 0.0
    for v in terms.tolist():
        total += v
    return total, terms


@lru_cache(maxsize=None)
def _pairing(group: WeylGroup, eta_values: tuple[int, ...]) -> tuple[int, tuple[tuple[int, int], ...]] | None:
    """Cosets {g, s g} for the first simple reflection s with eta(s) = -1."""
    gens = group.system.simple_roots
    for i, a in enumerate(gens):
        s_idx = group.index_of(np.eye(group.system.dimension) - 2.0 * np.outer(a, a) / (a @ a))
        if eta_values[s_idx] < 0:
            pairs = []
            used = set()
            for g in group.elements:
                if g.index in used:
                    continue
                partner = int(group.table[s_idx, g.index])
                used.update((g.index, partner))
                pairs.append((g.index, partner))
            return i, tuple(pairs)
    return None


def _compensated_sum(spec: KernelSpec, point: EvalPoint) -> float:
    total, log_scale = _compensated_parts(spec, point)
    return total * math.exp(log_scale)


def _compensated_parts(spec: KernelSpec, point: EvalPoint) -> tuple[float, float]:
    d = spec.system.dimension
    t = point.t
    expo = _exponents(spec, point)
    ref = expo[spec.group.identity_index]
    eta = spec.eta.values
    pairing = _pairing(spec.group, eta)
    if pairing is None:
        total = neumaier_sum(np.exp(expo - ref).tolist())
    else:
        i, pairs = pairing
        a = spec.system.simple_roots[i]
        a = a / np.linalg.norm(a)
        ay = float(a @ point.y)
        vals = []
        for g, _ in pairs:
            agx = float(a @ (spec.group.matrices[g] @ point.x))
            # eta(g) e^{u} + eta(sg) e^{u - <a,gx><a,y>/t} = eta(g) e^u (-expm1(...))
            vals.append(eta[g] * math.exp(expo[g] - ref) * -math.expm1(-agx * ay / t))
        total = neumaier_sum(vals)
    return total, ref + math.log(_norm(d, t))


@lru_cache(maxsize=None)
def _dd_matrices(group: WeylGroup) -> list[list[list[DD]]]:
    out = []
    for mat in group.hp_matrices:
        n = mat.rows
        out.append([[DD.from_mpf(mat[i, j]) for j in range(n)] for i in range(n)])
    return out


def _extended_sum(spec: KernelSpec, point: EvalPoint) -> tuple[DD, float]:
    """Returns (sum of eta(g) exp(<gx,y>/2t - <x,y>/2t) in dd, common log factor)."""
    x = point.x.tolist()
    y = point.y.tolist()
    d = len(x)
    t2 = 2.0 * point.t
    mats = _dd_matrices(spec.group)
    xy_prods = [[DD(*two_prod(x[j], y[i])) for j in range(d)] for i in range(d)]
    inner = []
    for mat in mats:
        acc = DD(0.0)
        for i in range(d):
            for j in range(d):
                e = mat[i][j]
                if e.hi == 0.0 and e.lo == 0.0:
                    continue
                acc = acc + e * xy_prods[i][j]
        inner.append(acc / t2)
    ref = inner[spec.group.identity_index]
    terms = [dd_exp(v - ref) * float(s) for v, s in zip(inner, spec.eta.values)]
    diff = point.x - point.y
    log_common = -(diff @ diff) / (4.0 * point.t) + math.log(_norm(d, point.t))
    return dd_sum(terms), log_common


def _dd_to_float_scaled(total: DD, log_common: float) -> float:
    return float(total) * math.exp(log_common)


def cancellation_diagnostic(spec: KernelSpec, point: EvalPoint) -> CancellationReport:
    """digits_lost = log10(sum|terms| / |sum terms|), clipped to [0, 32]."""
    _validate(spec, point)
    expo = _exponents(spec, point)
    ref = expo.max()
    abs_sum = float(np.sum(np.exp(expo - ref)))
    largest = math.exp(ref) * _norm(spec.system.dimension, point.t)
    if np.all(spec.eta.array > 0):
        return CancellationReport(0.0, largest)
    total, log_scale = _compensated_parts(spec, point)
    approx = total * math.exp(log_scale - ref - math.log(_norm(spec.system.dimension, point.t)))
    if approx != 0.0 and math.log10(abs_sum / abs(approx)) < 8.0:
        digits = math.log10(abs_sum / abs(approx))
    else:
        total, _ = _extended_sum(spec, point)
        # total is normalised by the identity term, which is the largest one
        scale = math.exp(expo[spec.group.identity_index] - ref)
        exact = abs(float(total)) * scale
        digits = MAX_DIGITS if exact == 0.0 else math.log10(abs_sum / exact)
    return CancellationReport(float(min(max(digits, 0.0), MAX_DIGITS)), largest)


def kernel_reflection_sum(spec: KernelSpec, point: EvalPoint,
                          precision: str | None = None) -> KernelValue:
    """Signed image sum with a cancellation flag (more than 12 digits lost)."""
    _validate(spec, point)
    prec = precision or spec.precision
    if prec not in PRECISIONS:
        raise InvalidParameter(f"precision must be one of {PRECISIONS}")
    diag = cancellation_diagnostic(spec, point)
    severe = diag.digits_lost > SEVERE_DIGITS
    if prec == "standard":
        value, _ = _standard_sum(spec, point)
    elif prec == "compensated" or (prec == "auto" and not severe):
        value = _compensated_sum(spec, point)
        prec = "compensated"
    else:
        total, log_common = _extended_sum(spec, point)
        value = _dd_to_float_scaled(total, log_common)
        prec = "extended"
    return KernelValue(value, diag.digits_lost, severe, prec)


def log_kernel_reflection_sum(spec: KernelSpec, point: EvalPoint) -> tuple[float, float]:
    """(log of the image sum, digits lost), immune to underflow of the Gaussian.

    Uses the compensated sum unless more than 12 digits cancel, then double-double.
    Returns -inf for the log when the sum is not positive.
    """
    _validate(spec, point)
    diag = cancellation_diagnostic(spec, point)
    if diag.digits_lost <= SEVERE_DIGITS:
        total, log_scale = _compensated_parts(spec, point)
    else:
        dd_total, log_scale = _extended_sum(spec, point)
        total = float(dd_total)
    if not total > 0:
        return -math.inf, diag.digits_lost
    return math.log(total) + log_scale, diag.digits_lost


def reflection_sum_value(spec: KernelSpec, point: EvalPoint, precision: str | None = None) -> float:
    return kernel_reflection_sum(spec, point, precision).value


def reflection_sum_batch(spec: KernelSpec, x: np.ndarray, y: np.ndarray, t: np.ndarray,
                         compensated: bool = False) -> np.ndarray:
    """Vectorised standard-precision image sum over many points."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:1])
    _check_t(t)
    gx = np.einsum("gij,nj->ngi", spec.group.matrices, x)
    diff = gx - y[:, None, :]
    expo = -np.einsum("ngi,ngi->ng", diff, diff) / (4.0 * t[:, None])
    ref = expo.max(axis=1, keepdims=True)
    terms = spec.eta.array[None, :] * np.exp(expo - ref)
    if compensated:
        s = np.array([neumaier_sum(row) for row in terms.tolist()])
    else:
        s = terms.sum(axis=1)
    return s * np.exp(ref[:, 0]) * _norm(spec.system.dimension, t)

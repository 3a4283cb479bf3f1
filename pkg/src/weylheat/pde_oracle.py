"""Direct numerical checks of the chamber kernels.

Three independent routes back the closed forms:

* an explicit finite-difference heat solver on the chamber lattice, where
  facet conditions enter through mirrored ghost nodes;
* the semigroup identity p_{t+s} = p_t * p_s, integrated by adaptive cubature;
* the heat-equation residual of the kernel under central differences.

The solver only handles chambers whose reflections are symmetries of the
square lattice Z^d (the square chamber and products of half-lines).  For the
square chamber {0 < x2 < x1} both walls, x2 = 0 and x1 = x2, map lattice nodes
to lattice nodes, so a ghost neighbour outside the chamber is exactly the
mirror image of a chamber node, carrying the sign eta of that reflection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .dihedral_kernels import canonical_label, kernel_I3_array, kernel_I4_array
from .errors import ConvergenceError, DomainError, InvalidParameter
from .gauss_kernels import EvalPoint, gauss_density
from .orthogonal_kernels import OrthogonalSpec, kernel_orthogonal_array

GRID_CAP = 400
# exp(-r^2/4t) < 1e-14 once r > TAIL_WIDTH * sqrt(t)
TAIL_WIDTH = math.sqrt(4.0 * math.log(1e14))
T0_FACTOR = 25.0
SOURCE_MARGIN = 5


# ---------------------------------------------------------------- kernels

@dataclass(frozen=True)
class KernelExpr:
    """A chamber kernel together with the geometry the checks need.

    ``walls`` lists (normal, sign) pairs: the chamber is {<normal, x> > 0}
    and ``sign`` is eta of the reflection in that wall (-1 Dirichlet,
    +1 Neumann).  ``wedge`` gives the polar angle range for planar chambers.
    """

    name: str
    dim: int
    fn: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    walls: tuple[tuple[tuple[float, ...], int], ...]
    group_order: int
    wedge: tuple[float, float] | None = None

    def __call__(self, x, y, t):
        return self.fn(np.asarray(x, float), np.asarray(y, float), np.asarray(t, float))

    def distance(self, x) -> float:
        """Distance from x to the nearest wall (inf when there are no walls)."""
        x = np.asarray(x, float)
        best = math.inf
        for normal, _ in self.walls:
            n = np.asarray(normal, float)
            best = min(best, float(n @ x) / float(np.linalg.norm(n)))
        if self.wedge is not None and self.dim == 2:
            # distance to a ray, not to its full line
            r = float(np.hypot(*x))
            th = math.atan2(x[1], x[0])
            gap = min(th - self.wedge[0], self.wedge[1] - th)
            best = r * math.sin(gap) if gap < math.pi / 2 else r
        return best

    def inside(self, x) -> bool:
        x = np.asarray(x, float)
        return all(float(np.asarray(n, float) @ x) > 0 for n, _ in self.walls)


def kernel_expr(system: str, eta: str, *, m: int = 4, d: int = 1, k: int = 1) -> KernelExpr:
    """Build the kernel callable for ``system`` in {"i2", "orth"}."""
    if system == "i2":
        label = canonical_label(m, eta)
        if m == 4:
            sign2 = -1 if label in ("sgn", "N2") else 1     # wall x2 = 0
            sign1 = -1 if label in ("sgn", "N1") else 1     # wall x1 = x2
            return KernelExpr(f"I2(4)/{label}", 2, lambda x, y, t: kernel_I4_array(label, x, y, t),
                              (((0.0, 1.0), sign2), ((1.0, -1.0), sign1)), 8, (0.0, math.pi / 4))
        if m == 3:
            sign = -1 if label == "sgn" else 1
            r3 = math.sqrt(3.0)
            return KernelExpr(f"I2(3)/{label}", 2, lambda x, y, t: kernel_I3_array(label, x, y, t),
                              (((1.0, -r3), sign), ((1.0, r3), sign)), 6, (-math.pi / 6, math.pi / 6))
        raise InvalidParameter("direct checks cover I2(3) and I2(4) only")
    if system == "orth":
        spec = OrthogonalSpec.parse(d, k, eta)
        walls = []
        for j, bit in enumerate(spec.eta):
            normal = [0.0] * d
            normal[d - k + j] = 1.0
            walls.append((tuple(normal), -1 if bit else 1))
        name = f"orth(d={d},k={k},eta={''.join(map(str, spec.eta))})"
        return KernelExpr(name, d, lambda x, y, t: kernel_orthogonal_array(spec, x, y, t),
                          tuple(walls), 2 ** k)
    raise InvalidParameter(f"unknown system {system!r}")


# ---------------------------------------------------------------- lattice

@dataclass
class PDEGrid:
    """Chamber lattice h*Z^d truncated to the box [-R, R]^d.

    ``nodes`` holds integer coordinates.  ``nbr``/``nsign`` give, for each
    node and each of the 2d lattice directions, the index of the neighbour
    after mirroring back into the chamber and the accumulated eta sign;
    index ``n_nodes`` is a zero sentinel (outside the truncation box).
    """

    h: float
    R: float
    tau: float
    expr: KernelExpr
    nodes: np.ndarray
    nbr: np.ndarray
    nsign: np.ndarray
    pinned: np.ndarray          # nodes on Dirichlet walls, held at zero
    weight: np.ndarray          # 1/|stabiliser|, for the lattice mass
    facets: dict = field(default_factory=dict)

    @property
    def coords(self) -> np.ndarray:
        return self.nodes * self.h

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def extent(self) -> tuple[int, ...]:
        return tuple(int(np.ptp(self.nodes[:, i])) + 1 for i in range(self.nodes.shape[1]))


def _lattice_reflections(expr: KernelExpr) -> list[tuple[np.ndarray, np.ndarray, int]]:
    out = []
    for normal, sign in expr.walls:
        n = np.asarray(normal, float)
        mat = np.eye(expr.dim) - 2.0 * np.outer(n, n) / (n @ n)
        if not np.allclose(mat, np.rint(mat)):
            raise InvalidParameter(f"{expr.name}: walls are not lattice symmetries; "
                                   "the finite-difference oracle needs a square-lattice chamber")
        out.append((n, np.rint(mat).astype(np.int64), sign))
    return out


def _fold(z: np.ndarray, refl) -> tuple[np.ndarray, np.ndarray]:
    """Mirror integer points into the closed chamber; returns (points, signs)."""
    z = z.copy()
    sign = np.ones(len(z), dtype=np.int64)
    for _ in range(4 * len(refl) + 4):
        moved = False
        for n, mat, s in refl:
            bad = z @ n < -1e-9
            if np.any(bad):
                z[bad] = z[bad] @ mat.T
                sign[bad] *= s
                moved = True
        if not moved:
            return z, sign
    raise DomainError("lattice folding did not terminate")


def make_grid(expr: KernelExpr, h: float, R: float, tau: float | None = None) -> PDEGrid:
    refl = _lattice_reflections(expr)
    d = expr.dim
    if tau is None:
        tau = h * h / (2.5 * d)
    if tau > h * h / (2 * d) * (1 + 1e-12):
        raise InvalidParameter(f"explicit scheme unstable: tau={tau:g} > h^2/{2 * d}")
    N = int(math.floor(R / h + 1e-9))
    axes = [np.arange(-N, N + 1)] * d
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    keep = np.ones(len(pts), bool)
    for n, _, _ in refl:
        keep &= pts @ n >= -1e-9
    nodes = pts[keep]
    widths = [int(np.ptp(nodes[:, i])) + 1 for i in range(d)]
    if (d > 1 and max(widths) > GRID_CAP) or math.prod(widths) > GRID_CAP ** 2:
        raise InvalidParameter(f"grid exceeds {GRID_CAP}x{GRID_CAP} nodes; increase h or reduce R")
    index = {tuple(p): i for i, p in enumerate(nodes.tolist())}
    sentinel = len(nodes)
    nbr = np.full((2 * d, len(nodes)), sentinel, dtype=np.int64)
    nsign = np.zeros((2 * d, len(nodes)))
    for k in range(2 * d):
        step = np.zeros(d, dtype=np.int64)
        step[k // 2] = 1 if k % 2 == 0 else -1
        folded, sign = _fold(nodes + step, refl)
        for i, (p, s) in enumerate(zip(folded.tolist(), sign.tolist())):
            j = index.get(tuple(p))
            if j is not None:
                nbr[k, i] = j
                nsign[k, i] = s
    pinned = np.zeros(len(nodes), bool)
    stab = np.ones(len(nodes))
    for n, _, s in refl:
        on = np.abs(nodes @ n) < 1e-9
        stab[on] *= 2
        if s < 0:
            pinned |= on
    # a node on two walls has a stabiliser of order 2m, not 4
    if d == 2 and len(refl) == 2:
        corner = np.all(nodes == 0, axis=1)
        stab[corner] = expr.group_order
    facets = {f"wall{i}": ("dirichlet" if s < 0 else "neumann") for i, (_, _, s) in enumerate(refl)}
    facets["outer"] = "dirichlet"
    return PDEGrid(h, N * h, tau, expr, nodes, nbr, nsign, pinned, 1.0 / stab, facets)


def auto_grid(expr: KernelExpr, y_source, t_final: float, h: float) -> PDEGrid:
    """Grid whose box edge sits where the kernel is below 1e-14 of its peak."""
    y = np.asarray(y_source, float)
    R = float(np.max(np.abs(y))) + TAIL_WIDTH * math.sqrt(t_final) + 2 * h
    return make_grid(expr, h, R)


@dataclass
class HeatSolution:
    grid: PDEGrid
    y: np.ndarray
    t0: float
    t_final: float
    values: np.ndarray
    steps: int
    mass_history: np.ndarray

    def reference(self) -> np.ndarray:
        g = self.grid
        return g.expr(g.coords, np.broadcast_to(self.y, g.coords.shape), self.t_final)

    def mass_drift(self) -> float:
        m = self.mass_history
        return float(np.max(np.abs(m - m[0])) / abs(m[0]))

    def at(self, nodes: np.ndarray) -> np.ndarray:
        lookup = {tuple(p): i for i, p in enumerate(self.grid.nodes.tolist())}
        return self.values[[lookup[tuple(p)] for p in nodes.tolist()]]


def _check_source(grid: PDEGrid, y: np.ndarray) -> None:
    expr = grid.expr
    if not expr.inside(y):
        raise DomainError("source must lie in the open chamber")
    margin = SOURCE_MARGIN * grid.h
    if expr.walls and expr.distance(y) < margin:
        raise DomainError(f"source within {SOURCE_MARGIN}h of a wall")
    if grid.R - float(np.max(np.abs(y))) < margin:
        raise DomainError(f"source within {SOURCE_MARGIN}h of the truncation box")


def solve_heat_fd(grid: PDEGrid, y_source, t_final: float, t0: float | None = None,
                  record_mass: bool = False) -> HeatSolution:
    """Explicit Euler from the exact kernel at t0 = 25 h^2 up to t_final."""
    y = np.asarray(y_source, float)
    _check_source(grid, y)
    if t0 is None:
        t0 = T0_FACTOR * grid.h ** 2
    span = t_final - t0
    if span < 20 * grid.tau:
        raise InvalidParameter("t_final must exceed t0 by at least 20 time steps")
    steps = int(math.ceil(span / grid.tau))
    tau = span / steps
    lam = tau / grid.h ** 2
    d = grid.expr.dim

    u = np.zeros(grid.n_nodes + 1)
    u[:-1] = grid.expr(grid.coords, np.broadcast_to(y, grid.coords.shape), t0)
    u[:-1][grid.pinned] = 0.0
    nbr, nsign, pinned, w = grid.nbr, grid.nsign, grid.pinned, grid.weight
    masses = [float(w @ u[:-1])] if record_mass else []
    for _ in range(steps):
        lap = (nsign * u[nbr]).sum(axis=0) - 2 * d * u[:-1]
        u[:-1] += lam * lap
        u[:-1][pinned] = 0.0
        if record_mass:
            masses.append(float(w @ u[:-1]))
    return HeatSolution(grid, y, t0, t_final, u[:-1].copy(), steps, np.asarray(masses))


# ---------------------------------------------------------------- comparisons

@dataclass(frozen=True)
class FDComparison:
    name: str
    h: float
    max_rel_error: float
    n_compared: int
    worst_node: tuple[float, ...]
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.threshold


def compare_fd(sol: HeatSolution, floor: float = 1e-3, threshold: float = 0.02) -> FDComparison:
    """Relative error at nodes where the kernel exceeds ``floor`` times its peak."""
    ref = sol.reference()
    mask = ref > floor * ref.max()
    rel = np.abs(sol.values[mask] - ref[mask]) / ref[mask]
    i = int(np.argmax(rel))
    worst = tuple(float(v) for v in sol.grid.coords[mask][i])
    return FDComparison(sol.grid.expr.name, sol.grid.h, float(rel[i]), int(mask.sum()), worst, threshold)


@dataclass(frozen=True)
class ConvergenceStudy:
    name: str
    hs: tuple[float, ...]
    self_differences: tuple[float, ...]
    errors: tuple[float, ...]

    @property
    def order(self) -> float:
        a, b = self.self_differences[-2:]
        return math.log2(a / b)

    @property
    def error_order(self) -> float:
        a, b = self.errors[-2:]
        return math.log2(a / b)


def self_convergence(expr: KernelExpr, y_source, t_final: float, h: float, levels: int = 3,
                     floor: float = 1e-3) -> ConvergenceStudy:
    """Solve at h, h/2, h/4, ... and compare on the coarsest nodes (max norm).

    Every level starts from the same t0 = 25 h^2 (coarsest h), so all levels
    discretise one continuous problem and the differences isolate the O(h^2)
    lattice error.
    """
    y = np.asarray(y_source, float)
    R = float(np.max(np.abs(y))) + TAIL_WIDTH * math.sqrt(t_final) + 2 * h
    R = h * math.ceil(R / h)
    t0 = T0_FACTOR * h * h
    sols = []
    for j in range(levels):
        hj = h / 2 ** j
        sols.append(solve_heat_fd(make_grid(expr, hj, R + 1e-9 * hj), y, t_final, t0=t0))
    coarse = sols[0].grid.nodes
    ref = sols[0].reference()
    mask = ref > floor * ref.max()
    nodes = coarse[mask]
    peak = ref.max()
    vals = [s.at(nodes * 2 ** j) for j, s in enumerate(sols)]
    diffs = tuple(float(np.max(np.abs(vals[j] - vals[j + 1]))) / peak for j in range(levels - 1))
    errs = tuple(float(np.max(np.abs(v - ref[mask]))) / peak for v in vals)
    return ConvergenceStudy(expr.name, tuple(h / 2 ** j for j in range(levels)), diffs, errs)


def symmetry_defect(expr: KernelExpr, x, y, t_final: float, h: float) -> float:
    """|u_y(x) - u_x(y)| / u_y(x) with both points on the lattice."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    R = max(np.max(np.abs(x)), np.max(np.abs(y))) + TAIL_WIDTH * math.sqrt(t_final) + 2 * h
    grid = make_grid(expr, h, R)
    a = solve_heat_fd(grid, y, t_final).at(np.rint(x / h).astype(np.int64)[None])[0]
    b = solve_heat_fd(grid, x, t_final).at(np.rint(y / h).astype(np.int64)[None])[0]
    return abs(a - b) / abs(a)


# ---------------------------------------------------------------- semigroup

@dataclass(frozen=True)
class SemigroupResult:
    name: str
    defect: float
    convolution: float
    direct: float
    error_estimate: float
    t: float
    s: float


def semigroup_check(expr: KernelExpr, x, y, t: float, s: float, rtol: float = 1e-10) -> SemigroupResult:
    """Relative defect of p_{t+s}(x,y) = int_C p_t(x,z) p_s(z,y) dz.

    The integrand is dominated by |W|^2 p_t(x-z) p_s(z-y), a Gaussian in z
    about (s x + t y)/(t + s); the domain is cut where that majorant drops
    below 1e-16 of p_{t+s}(x, y).
    """
    if t <= 0 or s <= 0:
        raise InvalidParameter("t and s must be positive")
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    d = expr.dim
    direct = float(expr(x, y, t + s))
    if not direct > 0 and not direct < 0:
        raise DomainError("kernel vanishes at (x, y)")
    centre = (s * x + t * y) / (t + s)
    sigma = t * s / (t + s)
    diff = x - y
    free = float(gauss_density(d, t + s, diff @ diff))
    log_ratio = math.log(expr.group_order ** 2 * free / abs(direct) / 1e-16)
    radius = math.sqrt(4 * sigma * max(log_ratio, 1.0))

    def integrand(z):
        xs = np.broadcast_to(x, z.shape)
        ys = np.broadcast_to(y, z.shape)
        return expr(xs, z, t) * expr(z, ys, s)

    if d == 1:
        lo = max(0.0, float(centre[0]) - radius) if expr.walls else float(centre[0]) - radius
        hi = float(centre[0]) + radius
        val, err = integrate.quad(lambda z: float(integrand(np.array([[z]]))[0]), lo, hi,
                                  epsabs=0.0, epsrel=rtol, limit=200)
    elif d == 2 and expr.wedge is not None:
        rc = float(np.hypot(*centre))
        r_lo, r_hi = max(0.0, rc - radius), rc + radius
        th0, th1 = expr.wedge

        def polar(p):
            r, th = p[:, 0], p[:, 1]
            z = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
            return integrand(z) * r

        res = integrate.cubature(polar, [r_lo, th0], [r_hi, th1], rtol=rtol, atol=0.0,
                                 max_subdivisions=20000)
        if res.status != "converged":
            raise ConvergenceError(f"cubature did not converge for {expr.name}")
        val, err = float(res.estimate), float(res.error)
    else:
        raise InvalidParameter("semigroup check covers 1D half-lines and planar wedges")
    return SemigroupResult(expr.name, abs(val - direct) / abs(direct), val, direct, err / abs(direct), t, s)


# ---------------------------------------------------------------- residual

@dataclass(frozen=True)
class ResidualResult:
    h: float
    residual: float
    dt: float
    laplacian: float


def residual_check(expr: KernelExpr, point: EvalPoint, h: float) -> ResidualResult:
    """|d_t p - Lap_x p| / |d_t p| with central differences.

    ``h`` is scale-relative: the space step is h*sqrt(t), the time step h*t.
    """
    t = point.t
    dx = h * math.sqrt(t)
    dt = h * t
    x = np.asarray(point.x, float)
    y = np.asarray(point.y, float)
    if expr.walls and expr.distance(x) < 3 * dx:
        raise DomainError("x must be at least 3h from the chamber walls")
    d = expr.dim
    offsets = [np.zeros(d)]
    for i in range(d):
        e = np.zeros(d)
        e[i] = dx
        offsets += [e, -e]
    xs = np.array([x + o for o in offsets])
    vals = expr(xs, np.broadcast_to(y, xs.shape), t)
    lap = (vals[1:].sum() - 2 * d * vals[0]) / dx ** 2
    ys = np.broadcast_to(y, (2, d))
    pt = expr(np.broadcast_to(x, (2, d)), ys, np.array([t + dt, t - dt]))
    ddt = (pt[0] - pt[1]) / (2 * dt)
    return ResidualResult(h, abs(ddt - lap) / abs(ddt), float(ddt), float(lap))


def residual_orders(expr: KernelExpr, point: EvalPoint, h: float, halvings: int = 2) -> tuple[list[float], list[float]]:
    """Residuals at h, h/2, ... and the successive ratios (about 4 for O(h^2))."""
    res = [residual_check(expr, point, h / 2 ** j).residual for j in range(halvings + 1)]
    return res, [res[j] / res[j + 1] for j in range(halvings)]


# ---------------------------------------------------------------- campaign

def halfspace_fd(y: float = 1.0, t_final: float = 0.5, h: float = 0.01) -> FDComparison:
    """Dirichlet half-line against p(x-y) - p(x+y)."""
    expr = kernel_expr("orth", "1", d=1, k=1)
    sol = solve_heat_fd(auto_grid(expr, [y], t_final, h), [y], t_final)
    return compare_fd(sol, threshold=0.01)


@dataclass(frozen=True)
class SemigroupCase:
    name: str
    system: str
    eta: str
    x: tuple[float, ...]
    y: tuple[float, ...]
    t: float
    s: float
    threshold: float = 1e-6
    params: dict = field(default_factory=dict)

    def expr(self) -> KernelExpr:
        return kernel_expr(self.system, self.eta, **self.params)


SEMIGROUP_CASES = (
    SemigroupCase("i4-triv", "i2", "triv", (2.0, 1.0), (2.0, 1.0), 0.25, 0.25),
    SemigroupCase("i4-sgn", "i2", "sgn", (2.0, 1.0), (1.5, 0.4), 0.5, 0.5),
    SemigroupCase("i4-N1", "i2", "N1", (1.0, 0.2), (1.5, 0.4), 0.3, 0.6),
    SemigroupCase("i4-N2", "i2", "N2", (2.0, 1.0), (1.0, 0.9), 0.4, 0.2),
    SemigroupCase("i3-sgn", "i2", "sgn", (2.0, 0.3), (1.5, -0.2), 0.5, 0.5, params={"m": 3}),
    SemigroupCase("i3-triv", "i2", "triv", (1.0, 0.1), (0.5, 0.2), 0.25, 0.75, params={"m": 3}),
    SemigroupCase("orth-d1-k1-eta1", "orth", "1", (1.0,), (0.5,), 0.3, 0.7, threshold=1e-8),
    SemigroupCase("orth-d1-k1-eta0", "orth", "0", (0.2,), (1.5,), 0.5, 0.5, threshold=1e-8),
)


def semigroup_suite(names=None) -> list[tuple[SemigroupCase, SemigroupResult]]:
    cases = [c for c in SEMIGROUP_CASES if names is None or c.name in names]
    return [(c, semigroup_check(c.expr(), c.x, c.y, c.t, c.s)) for c in cases]


@dataclass(frozen=True)
class FDCampaign:
    comparisons: tuple[FDComparison, ...]
    studies: tuple[ConvergenceStudy, ...]
    halfspace: FDComparison
    mass_drift: float

    @property
    def passed(self) -> bool:
        return (all(c.passed for c in self.comparisons) and self.halfspace.passed
                and all(abs(s.order - 2.0) <= 0.3 for s in self.studies)
                and self.mass_drift < 1e-10)


def fd_campaign(etas=("sgn", "triv"), y=(1.5, 0.75), t_final: float = 0.5, h: float = 0.03,
                study_h: float = 0.07) -> FDCampaign:
    """Square-chamber kernels against the lattice solver, plus convergence order."""
    comps, studies, drift = [], [], 0.0
    for eta in etas:
        expr = kernel_expr("i2", eta)
        sol = solve_heat_fd(auto_grid(expr, y, t_final, h), y, t_final,
                            record_mass=canonical_label(4, eta) == "triv")
        comps.append(compare_fd(sol))
        if len(sol.mass_history):
            drift = max(drift, sol.mass_drift())
        studies.append(self_convergence(expr, (1.0, 0.5), 0.25, study_h))
    return FDCampaign(tuple(comps), tuple(studies), halfspace_fd(), drift)

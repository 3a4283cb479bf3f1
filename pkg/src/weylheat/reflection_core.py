"""Root systems, their reflection groups, sign homomorphisms and chambers.

Two families are supported: the orthogonal systems ``{±e_{d-k+1}, ..., ±e_d}``
in R^d and the planar dihedral systems I2(m) with roots ``exp(i*pi*j/m)``.
Group elements carry both a float matrix and the word of simple reflections
that produced them, so that higher-precision copies can be rebuilt on demand.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import mpmath
import numpy as np

from .errors import DomainError, GroupTooLarge, InvalidParameter

HASH_TOL = 1e-9
GROUP_CAP = 4096
_HP_DPS = 40


@dataclass(frozen=True, eq=False)
class Chamber:
    """Open cone ``{x : <x, a> > 0 for every simple normal a}``."""

    simple_normals: tuple[np.ndarray, ...]
    dimension: int
    kind: str
    witness: np.ndarray
    # free coordinates are not constrained (orthogonal case with k < d)
    free_coords: tuple[int, ...] = ()

    def contains(self, x: Sequence[float]) -> bool:
        x = np.asarray(x, dtype=float)
        return all(float(a @ x) > 0.0 for a in self.simple_normals)


@dataclass(frozen=True, eq=False)
class RootSystem:
    kind: str  # "orthogonal" or "dihedral"
    params: tuple[int, ...]  # (d, k) or (m,)
    roots: tuple[np.ndarray, ...]
    positive_roots: tuple[np.ndarray, ...]
    simple_roots: tuple[np.ndarray, ...]
    dimension: int
    chamber: Chamber
    # high-precision copies of the simple roots, as mpmath vectors
    simple_roots_hp: tuple[tuple, ...] = field(repr=False, default=())

    @property
    def name(self) -> str:
        if self.kind == "dihedral":
            return f"I2({self.params[0]})"
        d, k = self.params
        return f"R_{k}(d={d})"

    @property
    def m(self) -> int:
        if self.kind != "dihedral":
            raise AttributeError("only dihedral systems have m")
        return self.params[0]


def reflect(alpha: np.ndarray, x: np.ndarray) -> np.ndarray:
    """s_alpha(x) = x - 2<alpha,x>/<alpha,alpha> alpha."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    return x - 2.0 * (alpha @ x) / (alpha @ alpha) * alpha


def reflection_matrix(alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    return np.eye(alpha.size) - 2.0 * np.outer(alpha, alpha) / (alpha @ alpha)


def _snap(v: float) -> float:
    for target in (0.0, 0.5, -0.5, 1.0, -1.0):
        if abs(v - target) < 1e-30:
            return target
    return v


def build_system(kind: str, *, d: int | None = None, k: int | None = None,
                 m: int | None = None) -> RootSystem:
    """Construct ``orthogonal`` (needs d, k) or ``dihedral`` (needs m)."""
    if kind in ("orthogonal", "orth"):
        if d is None or k is None:
            raise InvalidParameter("orthogonal system needs d and k")
        return _build_orthogonal(int(d), int(k))
    if kind in ("dihedral", "i2"):
        if m is None:
            raise InvalidParameter("dihedral system needs m")
        return _build_dihedral(int(m))
    raise InvalidParameter(f"unknown system kind {kind!r}")


@lru_cache(maxsize=None)
def _build_orthogonal(d: int, k: int) -> RootSystem:
    if d < 1:
        raise InvalidParameter("d must be >= 1")
    if k < 1 or k > d:
        raise InvalidParameter(f"need 1 <= k <= d, got k={k}, d={d}")
    eye = np.eye(d)
    pos = tuple(eye[j].copy() for j in range(d - k, d))
    roots = tuple(itertools.chain.from_iterable((v, -v) for v in pos))
    witness = np.ones(d)
    chamber = Chamber(pos, d, "orthogonal", witness, tuple(range(d - k)))
    hp = tuple(tuple(mpmath.mpf(int(c)) for c in v) for v in pos)
    return RootSystem("orthogonal", (d, k), roots, pos, pos, d, chamber, hp)


def _dihedral_simple_hp(m: int) -> list[tuple]:
    with mpmath.workdps(_HP_DPS):
        if m == 1:
            return [(mpmath.mpf(1), mpmath.mpf(0))]
        if m % 2 == 0:
            a = mpmath.pi / m
            return [(mpmath.mpf(0), mpmath.mpf(1)), (mpmath.sin(a), -mpmath.cos(a))]
        phi = mpmath.pi / (2 * m)
        return [(mpmath.sin(phi), mpmath.cos(phi)), (mpmath.sin(phi), -mpmath.cos(phi))]


@lru_cache(maxsize=None)
def _build_dihedral(m: int) -> RootSystem:
    if m < 1:
        raise InvalidParameter("m must be >= 1")
    roots = []
    with mpmath.workdps(_HP_DPS):
        for j in range(2 * m):
            a = mpmath.pi * j / m
            roots.append(np.array([_snap(float(mpmath.cos(a))), _snap(float(mpmath.sin(a)))]))
    simple_hp = _dihedral_simple_hp(m)
    simple = tuple(np.array([_snap(float(c)) for c in v]) for v in simple_hp)
    if m % 2 == 0:
        witness = np.array([np.cos(np.pi / (2 * m)), np.sin(np.pi / (2 * m))])
    else:
        witness = np.array([1.0, 0.0])
    positive = tuple(r for r in roots if r @ witness > 0)
    chamber = Chamber(simple, 2, "dihedral", witness)
    return RootSystem("dihedral", (m,), tuple(roots), positive, simple, 2, chamber,
                      tuple(simple_hp))


def check_closure(system: RootSystem, tol: float = 1e-12) -> bool:
    """Every reflection maps the root set onto itself, and R ∩ Rα = {±α}."""
    R = np.array(system.roots)
    for a in system.roots:
        image = (reflection_matrix(a) @ R.T).T
        for v in image:
            if np.min(np.linalg.norm(R - v, axis=1)) > tol:
                return False
        # multiples of a among the roots
        cos = (R @ a) / (np.linalg.norm(R, axis=1) * np.linalg.norm(a))
        parallel = np.sum(np.abs(np.abs(cos) - 1.0) < tol)
        if parallel != 2:
            return False
    return True


# ---------------------------------------------------------------- groups

@dataclass(frozen=True, eq=False)
class GroupElement:
    matrix: np.ndarray
    word: tuple[int, ...]
    index: int

    @property
    def det(self) -> int:
        return 1 if np.linalg.det(self.matrix) > 0 else -1


class WeylGroup:
    """Finite reflection group with a precomputed multiplication table."""

    def __init__(self, system: RootSystem, elements: list[GroupElement]):
        self.system = system
        self.elements = tuple(elements)
        self._lookup = {_matrix_key(g.matrix): g.index for g in elements}
        n = len(elements)
        table = np.empty((n, n), dtype=np.int64)
        for g in elements:
            for h in elements:
                table[g.index, h.index] = self.index_of(g.matrix @ h.matrix)
        self.table = table

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def index_of(self, matrix: np.ndarray) -> int:
        key = _matrix_key(matrix)
        try:
            return self._lookup[key]
        except KeyError:
            raise DomainError("matrix is not a group element") from None

    @cached_property
    def identity_index(self) -> int:
        return self.index_of(np.eye(self.system.dimension))

    @cached_property
    def matrices(self) -> np.ndarray:
        return np.array([g.matrix for g in self.elements])

    @cached_property
    def hp_matrices(self) -> list:
        """Matrices rebuilt from words in 40-digit arithmetic."""
        gens = []
        with mpmath.workdps(_HP_DPS):
            for a in self.system.simple_roots_hp:
                av = mpmath.matrix(a)
                nrm = (av.T * av)[0]
                gens.append(mpmath.eye(len(a)) - 2 * av * av.T / nrm)
            out = []
            for g in self.elements:
                mat = mpmath.eye(self.system.dimension)
                for i in g.word:
                    mat = gens[i] * mat
                out.append(mat)
        return out


def _matrix_key(matrix: np.ndarray) -> tuple:
    return tuple(np.round(np.asarray(matrix) / HASH_TOL).astype(np.int64).ravel().tolist())


@lru_cache(maxsize=None)
def _enumerate_cached(kind: str, params: tuple, cap: int) -> WeylGroup:
    system = _build_orthogonal(*params) if kind == "orthogonal" else _build_dihedral(*params)
    return _bfs(system, cap)


def enumerate_group(system: RootSystem, cap: int = GROUP_CAP) -> WeylGroup:
    """Close the simple reflections under composition (breadth first)."""
    return _enumerate_cached(system.kind, system.params, cap)


def _bfs(system: RootSystem, cap: int) -> WeylGroup:
    d = system.dimension
    gens = [reflection_matrix(a) for a in system.simple_roots]
    gens = [np.vectorize(_snap)(np.where(np.abs(g) < 1e-15, 0.0, g)) for g in gens]
    identity = GroupElement(np.eye(d), (), 0)
    elements = [identity]
    seen = {_matrix_key(identity.matrix)}
    frontier = [identity]
    while frontier:
        nxt = []
        for g in frontier:
            for i, s in enumerate(gens):
                mat = s @ g.matrix
                key = _matrix_key(mat)
                if key in seen:
                    continue
                if len(elements) >= cap:
                    raise GroupTooLarge(f"group exceeds {cap} elements; malformed system?")
                seen.add(key)
                el = GroupElement(mat, (i,) + g.word, len(elements))
                elements.append(el)
                nxt.append(el)
        frontier = nxt
    # replace float matrices by correctly rounded ones rebuilt from the words
    group = WeylGroup(system, elements)
    hp = group.hp_matrices
    clean = []
    for g, mhp in zip(elements, hp):
        mat = np.array([[_snap(float(mhp[i, j])) for j in range(d)] for i in range(d)])
        clean.append(GroupElement(mat, g.word, g.index))
    return WeylGroup(system, clean)


def apply_element(g: GroupElement, x: Sequence[float]) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != g.matrix.shape[0]:
        raise DomainError(f"dimension mismatch: {x.shape[-1]} vs {g.matrix.shape[0]}")
    return x @ g.matrix.T


# ------------------------------------------------------- homomorphisms

@dataclass(frozen=True, eq=False)
class SignHomomorphism:
    label: str
    generator_signs: tuple[int, ...]
    values: tuple[int, ...]
    group: WeylGroup = field(repr=False)

    @property
    def bits(self) -> tuple[int, ...]:
        """1 marks a Dirichlet facet (sign -1), 0 a Neumann facet."""
        return tuple(1 if s < 0 else 0 for s in self.generator_signs)

    def __call__(self, g: GroupElement | int) -> int:
        idx = g if isinstance(g, (int, np.integer)) else g.index
        return self.values[idx]

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


_ALIASES = {"sgn": "det", "neumann": "triv", "dirichlet": "det"}


def _label_for(system: RootSystem, signs: tuple[int, ...]) -> str:
    if all(s > 0 for s in signs):
        return "triv"
    if all(s < 0 for s in signs):
        return "det"
    if system.kind == "dihedral" and system.params[0] == 4:
        # generator 0 is the wall {x2 = 0}, generator 1 the diagonal
        return "N1" if signs == (1, -1) else "N2"
    return "eta=" + "".join("1" if s < 0 else "0" for s in signs)


def enumerate_homomorphisms(group: WeylGroup) -> list[SignHomomorphism]:
    """All multiplicative maps W -> {±1}, found by brute force on generators."""
    n_gen = len(group.system.simple_roots)
    out = []
    for signs in itertools.product((1, -1), repeat=n_gen):
        values = []
        for g in group.elements:
            v = 1
            for i in g.word:
                v *= signs[i]
            values.append(v)
        vals = np.array(values)
        if not np.all(vals[group.table] == np.outer(vals, vals)):
            continue
        out.append(SignHomomorphism(_label_for(group.system, signs), signs,
                                    tuple(int(v) for v in values), group))
    out.sort(key=lambda h: (h.label != "triv", h.label != "det", h.label))
    return out


def find_homomorphism(group: WeylGroup, label: str) -> SignHomomorphism:
    """Look up by label; accepts ``sgn`` for ``det`` and raw bit strings."""
    key = _ALIASES.get(label, label)
    homs = enumerate_homomorphisms(group)
    for h in homs:
        if h.label == key:
            return h
    bits = key[4:] if key.startswith("eta=") else key
    if bits and set(bits) <= {"0", "1"}:
        for h in homs:
            if "".join(map(str, h.bits)) == bits:
                return h
    raise InvalidParameter(
        f"no homomorphism {label!r} for {group.system.name}; "
        f"available: {[h.label for h in homs]}")


# ------------------------------------------------------------ geometry

@dataclass(frozen=True)
class ChamberGeometry:
    inside: bool
    facet_distances: tuple[float, ...]
    vertex_distance: float


def _facet_rays(system: RootSystem) -> list[np.ndarray]:
    """Unit direction of each boundary half-line (dihedral only)."""
    rays = []
    normals = system.chamber.simple_normals
    for i, a in enumerate(normals):
        r = np.array([-a[1], a[0]])
        others = [b for j, b in enumerate(normals) if j != i]
        if others and any(b @ r < 0 for b in others):
            r = -r
        rays.append(r / np.linalg.norm(r))
    return rays


def chamber_geometry(system: RootSystem, x: Sequence[float]) -> ChamberGeometry:
    """Membership plus Euclidean distances to each facet and to the vertex/edge.

    For orthogonal systems with k < d the "vertex" is the edge
    R^{d-k} x {0}; its distance is the norm of the reflected coordinates.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (system.dimension,):
        raise DomainError(f"expected a point in R^{system.dimension}")
    inside = system.chamber.contains(x)
    if system.kind == "dihedral":
        dists = []
        if system.params[0] == 1:
            dists.append(abs(float(x[0])))
        else:
            for a, r in zip(system.chamber.simple_normals, _facet_rays(system)):
                along = float(r @ x)
                dists.append(abs(float(a @ x)) if along >= 0 else float(np.linalg.norm(x)))
        vertex = float(np.linalg.norm(x))
    else:
        d, k = system.params
        refl = x[d - k:]
        dists = []
        for j in range(k):
            others = np.delete(refl, j)
            neg = np.minimum(others, 0.0)
            dists.append(float(np.sqrt(refl[j] ** 2 + neg @ neg)))
        vertex = float(np.linalg.norm(refl))
    if not inside:
        # outside or on the boundary: clamp to the signed picture
        dists = [0.0 if float(a @ x) <= 0 else dd
                 for a, dd in zip(system.chamber.simple_normals, dists)]
    return ChamberGeometry(inside, tuple(dists), vertex)


def facet_sign_vector(system: RootSystem, x: np.ndarray) -> tuple[int, ...]:
    """Signs of <x, alpha> over the positive roots; identifies the chamber of x."""
    return tuple(int(np.sign(a @ x)) for a in system.positive_roots)

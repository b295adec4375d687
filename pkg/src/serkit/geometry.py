"""Voronoi regions as halfspace polyhedra and their simplicial cone fans.

A symbol's decision region is ``{x : A x <= b}`` in coordinates centred on
that symbol.  Each facet of the (bounded or box-clipped) region, together
with the origin, spans a polyhedral cone; triangulating the facet splits
the cone into simplicial cones.  Every cone carries the halfspace of its
facet, so a ray in direction ``u`` leaves the region at distance
``b / (a @ u)``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .constellation import Constellation, ReducedConstellation, reduce

__all__ = [
    "AngleBox",
    "ConeFan",
    "Decomposition",
    "GeometryError",
    "Halfspace",
    "Polyhedron",
    "SimplicialCone",
    "angle_box",
    "cartesian_to_hyperspherical",
    "clip_polyhedron",
    "cone_fan",
    "cone_frame",
    "decompose",
    "facet_vertices",
    "hyperspherical_to_cartesian",
    "rbar",
    "remove_redundant",
    "triangulate_cone",
    "voronoi_region",
]

BOUNDARY_TOL = 1e-8
DET_TOL = 1e-10
LP_TOL = 1e-9


class GeometryError(RuntimeError):
    """Raised on degenerate geometry that should not occur for valid input."""


@dataclass(frozen=True)
class Halfspace:
    """The set ``{x : a @ x <= b}`` with unit outward normal ``a``.

    ``artificial`` marks the faces of a clipping box rather than a
    bisector between two symbols.
    """

    a: np.ndarray
    b: float
    artificial: bool = False
    neighbor: int | None = None

    def __post_init__(self) -> None:
        a = np.array(self.a, dtype=float).reshape(-1)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise GeometryError("halfspace normal must be a unit vector")
        if self.b < 0:
            raise GeometryError("halfspace offset must be nonnegative")


@dataclass(frozen=True)
class Polyhedron:
    halfspaces: tuple[Halfspace, ...]
    symbol_index: int = -1
    bounded: bool = True

    @property
    def dim(self) -> int:
        return self.halfspaces[0].a.size

    @property
    def A(self) -> np.ndarray:
        return np.array([h.a for h in self.halfspaces])

    @property
    def b(self) -> np.ndarray:
        return np.array([h.b for h in self.halfspaces])

    def contains(self, x: np.ndarray, tol: float = BOUNDARY_TOL) -> np.ndarray:
        """Membership test for points stored as rows of ``x``."""
        x = np.atleast_2d(x)
        return np.all(x @ self.A.T <= self.b + tol, axis=1)


@dataclass(frozen=True)
class SimplicialCone:
    """Cone spanned by ``edges`` (unit columns) inside one facet's cone.

    ``facet_index`` points into the owning polyhedron's halfspaces.
    """

    edges: np.ndarray
    facet_index: int
    symbol_index: int
    halfspace: Halfspace

    def __post_init__(self) -> None:
        e = np.array(self.edges, dtype=float)
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)
        if abs(np.linalg.det(e)) <= DET_TOL:
            raise GeometryError("cone edges are linearly dependent")

    @property
    def dim(self) -> int:
        return self.edges.shape[0]

    @property
    def artificial(self) -> bool:
        return self.halfspace.artificial

    def facet_simplex(self) -> np.ndarray:
        """Points where the edges meet the facet hyperplane (rows)."""
        h = self.halfspace
        return (self.edges * (h.b / (h.a @ self.edges))).T

    def contains(self, x: np.ndarray, tol: float = BOUNDARY_TOL) -> np.ndarray:
        """True for rows of ``x`` with nonnegative edge coordinates."""
        lam = np.linalg.solve(self.edges, np.atleast_2d(x).T).T
        scale = np.linalg.norm(np.atleast_2d(x), axis=1)
        return np.all(lam >= -tol * np.maximum(scale, 1.0)[:, None], axis=1)


@dataclass(frozen=True)
class AngleBox:
    max_angles: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.max_angles, dtype=float)
        if np.any(m <= 0) or np.any(m > np.pi + 1e-12):
            raise GeometryError("angle bounds must lie in (0, pi]")
        m.setflags(write=False)
        object.__setattr__(self, "max_angles", m)


@dataclass(frozen=True)
class ConeFan:
    """Cone over one facet: the facet's halfspace index and its vertices."""

    facet_index: int
    vertices: np.ndarray


@dataclass(frozen=True)
class Decomposition:
    """Clipped Voronoi regions and simplicial cones of every symbol."""

    reduced: ReducedConstellation
    regions: tuple[Polyhedron, ...]
    cones: tuple[tuple[SimplicialCone, ...], ...]
    clip_radius: float
    unclipped_bounded: tuple[bool, ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.reduced.reduced_dim

    def to_json(self) -> str:
        """Debug dump of regions, cones, edges and angle boxes."""
        out = {"dim": self.dim, "clip_radius": self.clip_radius, "symbols": []}
        for i, (reg, cones) in enumerate(zip(self.regions, self.cones)):
            out["symbols"].append(
                {
                    "index": i,
                    "halfspaces": [
                        {"a": h.a.tolist(), "b": h.b, "artificial": h.artificial, "neighbor": h.neighbor}
                        for h in reg.halfspaces
                    ],
                    "cones": [
                        {
                            "facet": c.facet_index,
                            "edges": c.edges.T.tolist(),
                            "angle_box": angle_box(c).max_angles.tolist() if c.dim >= 2 else [],
                        }
                        for c in cones
                    ],
                }
            )
        return json.dumps(out, indent=2, sort_keys=True)


# Halfspace systems -------------------------------------------------------


def _lp_max(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> tuple[float, bool]:
    """Maximise ``c @ x`` on ``A x <= b``; return (value, bounded)."""
    res = linprog(-c, A_ub=A, b_ub=b, bounds=[(None, None)] * c.size, method="highs")
    if res.status == 3:
        return np.inf, False
    if res.status != 0:
        raise GeometryError(f"LP failed: {res.message}")
    return -res.fun, True


def remove_redundant(halfspaces, symbol_index: int = -1) -> Polyhedron:
    """Drop halfspaces implied by the others.

    Halfspace ``h`` is kept iff the maximum of ``a_h @ x`` over the other
    constraints exceeds ``b_h``.  The LP is capped by ``a_h @ x <= b_h + 1``
    so it stays bounded.  Exact duplicates keep their first occurrence.
    Output order follows input order.
    """
    hs = list(halfspaces)
    if not hs:
        raise GeometryError("empty halfspace system")
    if any(h.b <= 0 for h in hs):
        raise GeometryError("origin must be strictly feasible (all offsets positive)")
    A = np.array([h.a for h in hs])
    b = np.array([h.b for h in hs])
    scale = max(1.0, float(np.max(b)))
    alive = np.ones(len(hs), dtype=bool)
    for k in range(len(hs)):
        dup = np.all(np.abs(A[:k] - A[k]) < 1e-12, axis=1) & (np.abs(b[:k] - b[k]) < 1e-12 * scale)
        if np.any(dup & alive[:k]):
            alive[k] = False
    for k in range(len(hs)):
        if not alive[k]:
            continue
        others = alive.copy()
        others[k] = False
        A_k = np.vstack([A[others], A[k]])
        b_k = np.append(b[others], b[k] + 1.0)
        val, _ = _lp_max(A[k], A_k, b_k)
        if val <= b[k] + LP_TOL * scale:
            alive[k] = False
    kept = tuple(h for h, keep in zip(hs, alive) if keep)
    return Polyhedron(kept, symbol_index, _is_bounded(kept))


def _is_bounded(hs) -> bool:
    A = np.array([h.a for h in hs])
    b = np.array([h.b for h in hs])
    for k in range(A.shape[1]):
        for sgn in (1.0, -1.0):
            c = np.zeros(A.shape[1])
            c[k] = sgn
            _, bounded = _lp_max(c, A, b)
            if not bounded:
                return False
    return True


def voronoi_region(r: ReducedConstellation, i: int) -> Polyhedron:
    """Non-redundant halfspace description of symbol ``i``'s region.

    Coordinates are centred on the symbol, so every offset is half the
    distance to a neighbour.
    """
    pts = np.asarray(r.points, dtype=float)
    if not 0 <= i < pts.shape[1]:
        raise IndexError(f"symbol index {i} out of range")
    hs = []
    for j in range(pts.shape[1]):
        if j == i:
            continue
        d = pts[:, j] - pts[:, i]
        n = np.linalg.norm(d)
        hs.append(Halfspace(d / n, n / 2, neighbor=j))
    return remove_redundant(hs, symbol_index=i)


def clip_polyhedron(p: Polyhedron, radius: float) -> Polyhedron:
    """Intersect with the box ``|x_k| <= radius`` (box faces are artificial)."""
    n = p.dim
    box = []
    for k in range(n):
        for sgn in (1.0, -1.0):
            a = np.zeros(n)
            a[k] = sgn
            box.append(Halfspace(a, radius, artificial=True))
    return remove_redundant(list(p.halfspaces) + box, p.symbol_index)


# Vertex enumeration and fans ---------------------------------------------


def facet_vertices(p: Polyhedron) -> tuple[np.ndarray, list[np.ndarray]]:
    """Vertices of a bounded polyhedron and, per halfspace, the tight ones.

    Vertices are found by solving every N-subset of hyperplanes and keeping
    feasible solutions.
    """
    A, b = p.A, p.b
    n = A.shape[1]
    scale = max(1.0, float(np.max(b)))
    combos = np.array(list(itertools.combinations(range(len(b)), n)))
    As = A[combos]
    bs = b[combos]
    det = np.linalg.det(As)
    ok = np.abs(det) > 1e-12
    x = np.linalg.solve(As[ok], bs[ok][..., None])[..., 0]
    feas = np.all(x @ A.T <= b + 1e-9 * scale, axis=1)
    x = x[feas]
    verts: list[np.ndarray] = []
    for v in x:
        if not any(np.linalg.norm(v - w) <= 1e-9 * scale for w in verts):
            verts.append(v)
    if not verts:
        raise GeometryError("polyhedron has no vertices (is it bounded?)")
    V = np.array(verts)
    order = np.lexsort(np.round(V, 12).T[::-1])
    V = V[order]
    slack = b[None, :] - V @ A.T
    tight = np.abs(slack) <= 1e-9 * scale
    per_facet = [np.flatnonzero(tight[:, f]) for f in range(len(b))]
    return V, per_facet


def cone_fan(p: Polyhedron) -> list[ConeFan]:
    """One polyhedral cone per facet, described by the facet's vertices."""
    if not p.bounded:
        raise GeometryError("cone_fan needs a bounded polyhedron; clip it first")
    V, per_facet = facet_vertices(p)
    fans = []
    for f, idx in enumerate(per_facet):
        if _affine_rank(V[idx]) != p.dim - 1:
            raise GeometryError(f"degenerate facet {f}")
        fans.append(ConeFan(f, V[idx]))
    return fans


def _affine_rank(pts: np.ndarray, tol: float = 1e-9) -> int:
    if len(pts) <= 1:
        return 0
    d = pts[1:] - pts[0]
    s = np.linalg.svd(d, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def _affine_basis(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Origin and orthonormal basis (rows) of the affine hull of ``pts``."""
    o = pts[0]
    _, s, vt = np.linalg.svd(pts - o)
    k = int(np.sum(s > 1e-9 * max(1.0, s[0] if s.size else 1.0)))
    return o, vt[:k]


def _lex_first(pts: np.ndarray) -> int:
    return int(np.lexsort(np.round(pts, 12).T[::-1])[0])


def _fan_triangulate(pts: np.ndarray) -> list[tuple[int, ...]]:
    """Triangulate a convex polytope given by its vertices.

    Fan from the lexicographically lowest vertex over the boundary faces
    that avoid it, recursing on those faces.  Indices refer to ``pts``.
    """
    o, basis = _affine_basis(pts)
    d = basis.shape[0]
    if d == 0:
        return [(0,)]
    y = (pts - o) @ basis.T
    if d == 1:
        t = y[:, 0]
        return [(int(np.argmin(t)), int(np.argmax(t)))]
    apex = _lex_first(pts)
    hull = ConvexHull(y)
    faces: dict[frozenset, None] = {}
    scale = max(1.0, float(np.max(np.abs(y))))
    for eq in np.unique(np.round(hull.equations, 9), axis=0):
        on = np.flatnonzero(np.abs(y @ eq[:-1] + eq[-1]) <= 1e-8 * scale)
        key = frozenset(on.tolist())
        if apex not in key:
            faces.setdefault(key, None)
    simplices = []
    for key in sorted(faces, key=lambda s: sorted(s)):
        sub = np.array(sorted(key))
        for s in _fan_triangulate(pts[sub]):
            simplices.append((apex,) + tuple(int(sub[k]) for k in s))
    return simplices


def triangulate_cone(
    fan: ConeFan | np.ndarray,
    halfspace: Halfspace | None = None,
    facet_index: int = -1,
    symbol_index: int = -1,
) -> list[SimplicialCone]:
    """Split the cone over a facet into simplicial cones.

    ``fan`` is a :class:`ConeFan` or the facet's vertices as rows.  The
    facet is fan-triangulated from its lexicographically lowest vertex.
    """
    if isinstance(fan, ConeFan):
        verts = fan.vertices
        facet_index = fan.facet_index if facet_index < 0 else facet_index
    else:
        verts = np.asarray(fan, dtype=float)
    n = verts.shape[1]
    if _affine_rank(verts) != n - 1:
        raise GeometryError("cone vertices do not span a facet of dimension N-1")
    if halfspace is None:
        o, basis = _affine_basis(verts)
        normal = np.linalg.svd(np.vstack([basis, np.zeros(n)]))[2][-1] if n > 1 else np.ones(1)
        off = float(normal @ o)
        if off < 0:
            normal, off = -normal, -off
        halfspace = Halfspace(normal / np.linalg.norm(normal), off)
    cones = []
    for simp in _fan_triangulate(verts):
        e = verts[list(simp)].T
        e = e / np.linalg.norm(e, axis=0)
        cones.append(SimplicialCone(e, facet_index, symbol_index, halfspace))
    return cones


@lru_cache(maxsize=64)
def _decompose_cached(key: bytes, shape: tuple[int, int], clip: float):
    pts = np.frombuffer(key, dtype=float).reshape(shape)
    red = ReducedConstellation(pts, shape[0], np.eye(shape[0]), np.ones(shape[0]))
    return _decompose(red, clip)


def default_clip_radius(r: ReducedConstellation, rho_min: float = 1e-2) -> float:
    """Clip box half-width ``d_max + 10 / sqrt(rho_min)``."""
    from scipy.spatial.distance import pdist

    return float(np.max(pdist(r.points.T)) + 10.0 / np.sqrt(rho_min))


def _decompose(red: ReducedConstellation, clip: float) -> Decomposition:
    n = red.reduced_dim
    regions, cones, bounded = [], [], []
    for i in range(red.size):
        reg = voronoi_region(red, i)
        bounded.append(reg.bounded)
        if n == 1:
            regions.append(reg)
            cones.append(())
            continue
        reg = clip_polyhedron(reg, clip)
        regions.append(reg)
        sc = []
        for fan in cone_fan(reg):
            sc.extend(triangulate_cone(fan, reg.halfspaces[fan.facet_index], fan.facet_index, i))
        cones.append(tuple(sc))
    return Decomposition(red, tuple(regions), tuple(cones), clip, tuple(bounded))


def decompose(
    c: Constellation | ReducedConstellation,
    clip_radius: float | None = None,
) -> Decomposition:
    """Regions and simplicial cones of every symbol, box-clipped.

    Results are cached on the reduced point matrix and clip radius.
    """
    red = c if isinstance(c, ReducedConstellation) else reduce(c)
    if red.reduced_dim == 0:
        raise GeometryError("constellation has zero rank")
    if red.reduced_dim > 4:
        raise GeometryError(f"reduced dimension {red.reduced_dim} exceeds the supported maximum of 4")
    clip = default_clip_radius(red) if clip_radius is None else float(clip_radius)
    pts = np.ascontiguousarray(red.points, dtype=float)
    dec = _decompose_cached(pts.tobytes(), pts.shape, clip)
    return Decomposition(red, dec.regions, dec.cones, clip, dec.unclipped_bounded)


# Hyperspherical coordinates ----------------------------------------------


def cone_frame(cone: SimplicialCone) -> np.ndarray:
    """Orthonormal frame (columns) from Gram-Schmidt on the cone edges."""
    q, r = np.linalg.qr(cone.edges)
    return q * np.sign(np.diag(r))


def hyperspherical_to_cartesian(r, phi, frame: np.ndarray | None = None) -> np.ndarray:
    """Map radius and angles to a point.

    ``x_k = r cos(phi_k) prod_{j<k} sin(phi_j)`` for ``k < N`` and
    ``x_N = r prod_j sin(phi_j)``, expressed in ``frame`` (identity by
    default).  ``phi`` may carry leading batch axes; the last axis holds
    the N-1 angles.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.ndim == 0:
        phi = phi[None]
    n = phi.shape[-1] + 1
    s = np.sin(phi)
    prod = np.concatenate([np.ones(phi.shape[:-1] + (1,)), np.cumprod(s, axis=-1)], axis=-1)
    c = np.concatenate([np.cos(phi), np.ones(phi.shape[:-1] + (1,))], axis=-1)
    x = np.asarray(r, dtype=float)[..., None] * prod * c
    if frame is None:
        return x
    if frame.shape != (n, n):
        raise ValueError("frame dimension does not match angle count")
    return x @ frame.T


def cartesian_to_hyperspherical(x, frame: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Inverse of :func:`hyperspherical_to_cartesian` on its valid domain.

    The last frame coordinate must be nonnegative.
    """
    x = np.asarray(x, dtype=float)
    c = x if frame is None else frame.T @ x
    r = float(np.linalg.norm(c))
    if r == 0.0:
        raise ValueError("zero vector has no direction")
    n = c.size
    tail = np.sqrt(np.cumsum((c**2)[::-1])[::-1])
    phi = np.zeros(n - 1)
    for k in range(n - 1):
        phi[k] = 0.0 if tail[k] == 0 else np.arccos(np.clip(c[k] / tail[k], -1.0, 1.0))
    return r, phi


def angle_box(cone: SimplicialCone) -> AngleBox:
    """``phi_max_k = arccos(v_N @ v_k)`` for k = 1..N-1."""
    e = cone.edges
    cosines = np.clip(e[:, -1] @ e[:, :-1], -1.0, 1.0)
    ang = np.arccos(cosines)
    if np.any(ang <= 0):
        raise GeometryError("coincident cone edges")
    return AngleBox(ang)


def rbar(h: Halfspace, phi, frame: np.ndarray | None = None):
    """Distance along direction ``u(phi)`` to the hyperplane ``a @ x = b``.

    Returns ``inf`` where the ray never meets the hyperplane.
    """
    u = hyperspherical_to_cartesian(1.0, phi, frame)
    den = u @ h.a
    with np.errstate(divide="ignore"):
        out = np.where(den > 0, h.b / np.where(den > 0, den, 1.0), np.inf)
    return float(out) if out.ndim == 0 else out

"""Convex polytopes in half-space and vertex form, plus the basic queries
(support, membership, ray shooting, polarity, affine images)."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, cKDTree

UNIT_TOL = 1e-12
VERTEX_TOL = 1e-9
INTERIOR_TOL = 1e-9
MEMBER_TOL = 1e-12


class GeometryError(ValueError):
    """Raised for malformed or degenerate bodies and unsupported requests."""


@dataclass(frozen=True)
class HalfSpace:
    """The kept side ``{x : <normal, x> <= offset}`` with a unit normal."""

    normal: np.ndarray
    offset: float


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """A bounded full-dimensional polytope.

    ``normals`` (m, d) and ``offsets`` (m,) describe the H-representation;
    normals are rescaled to unit length on construction. ``vertices`` (k, d)
    is the optional V-representation. ``simplices`` caches a known
    simplicial decomposition (s, d+1, d) for shapes built analytically; it
    is carried through affine maps but never serialized.
    """

    dim: int
    normals: np.ndarray
    offsets: np.ndarray
    vertices: np.ndarray | None = None
    label: str = ""
    simplices: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        d = int(self.dim)
        if d < 1:
            raise GeometryError("dimension must be >= 1")
        a = np.asarray(self.normals, dtype=float).reshape(-1, d)
        b = np.asarray(self.offsets, dtype=float).reshape(-1)
        if a.shape[0] != b.shape[0]:
            raise GeometryError("normals and offsets disagree in length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise GeometryError("non-finite half-space data")
        norms = np.linalg.norm(a, axis=1)
        if np.any(norms < 1e-300):
            raise GeometryError("zero half-space normal")
        a = a / norms[:, None]
        b = b / norms
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "normals", a)
        object.__setattr__(self, "offsets", b)
        if self.vertices is not None:
            v = np.array(self.vertices, dtype=float).reshape(-1, d)
            if not np.all(np.isfinite(v)):
                raise GeometryError("non-finite vertex")
            v.setflags(write=False)
            object.__setattr__(self, "vertices", v)
        if self.simplices is not None:
            s = np.array(self.simplices, dtype=float).reshape(-1, d + 1, d)
            s.setflags(write=False)
            object.__setattr__(self, "simplices", s)

    @property
    def halfspaces(self) -> list[HalfSpace]:
        return [HalfSpace(n, float(o)) for n, o in zip(self.normals, self.offsets)]

    @property
    def has_vrep(self) -> bool:
        return self.vertices is not None

    def with_label(self, label: str) -> "ConvexBody":
        return ConvexBody(self.dim, self.normals, self.offsets, self.vertices,
                          label, self.simplices)

    def check(self) -> "ConvexBody":
        """Verify boundedness, interior and (if present) rep consistency."""
        d = self.dim
        if self.normals.shape[0] < d + 1:
            raise GeometryError("too few half-spaces for a bounded body")
        # bounding-box probe along +-e_i
        for i in range(d):
            for sgn in (1.0, -1.0):
                c = np.zeros(d)
                c[i] = -sgn
                res = linprog(c, A_ub=self.normals, b_ub=self.offsets,
                              bounds=[(None, None)] * d, method="highs")
                if res.status == 2:
                    raise GeometryError("empty half-space system")
                if res.status == 3:
                    raise GeometryError("unbounded half-space system")
        _, radius = chebyshev_center(self)
        if radius <= INTERIOR_TOL:
            raise GeometryError("body has empty interior")
        if self.vertices is not None:
            slack = self.offsets[None, :] - self.vertices @ self.normals.T
            if slack.min() < -VERTEX_TOL:
                raise GeometryError("vertex violates a half-space")
            if d <= 3:
                tight = (np.abs(slack) <= VERTEX_TOL).sum(axis=0)
                if np.any(tight < d):
                    raise GeometryError("half-space not tight at d vertices")
        return self


def chebyshev_center(body: ConvexBody) -> tuple[np.ndarray, float]:
    """Center and radius of the largest inscribed ball (one LP)."""
    d = body.dim
    c = np.zeros(d + 1)
    c[-1] = -1.0
    a_ub = np.hstack([body.normals, np.ones((body.normals.shape[0], 1))])
    res = linprog(c, A_ub=a_ub, b_ub=body.offsets,
                  bounds=[(None, None)] * d + [(0, None)], method="highs")
    if res.status != 0:
        raise GeometryError(f"chebyshev center LP failed: {res.message}")
    return res.x[:d], float(res.x[-1])


def interior_point(body: ConvexBody) -> np.ndarray:
    if body.vertices is not None:
        return body.vertices.mean(axis=0)
    return chebyshev_center(body)[0]


# ---------------------------------------------------------------- constructors

def _cube(dim, s):
    verts = np.array(list(itertools.product((-s, s), repeat=dim)), dtype=float)
    eye = np.eye(dim)
    normals = np.vstack([eye, -eye])
    offsets = np.full(2 * dim, s)
    simplices = None
    if dim <= 8:
        simplices = []
        for perm in itertools.permutations(range(dim)):
            p = np.full(dim, -s)
            chain = [p.copy()]
            for k in perm:
                p[k] = s
                chain.append(p.copy())
            simplices.append(chain)
        simplices = np.array(simplices)
    return normals, offsets, verts, simplices


def _simplex(dim, scale):
    verts = np.vstack([np.zeros(dim), scale * np.eye(dim)])
    normals = np.vstack([-np.eye(dim), np.ones((1, dim))])
    offsets = np.concatenate([np.zeros(dim), [scale]])
    return normals, offsets, verts, verts[None, :, :]


def _cross(dim, r):
    eye = np.eye(dim)
    verts = r * np.vstack([eye, -eye])
    normals = np.array(list(itertools.product((-1.0, 1.0), repeat=dim)))
    offsets = np.full(len(normals), r)
    simplices = None
    if dim <= 12:
        simplices = np.array([
            np.vstack([np.zeros(dim), r * np.diag(signs)])
            for signs in itertools.product((-1.0, 1.0), repeat=dim)
        ])
    return normals, offsets, verts, simplices


def _polygon(n, radius):
    ang = 2.0 * np.pi * np.arange(n) / n
    verts = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    mid = ang + np.pi / n
    normals = np.column_stack([np.cos(mid), np.sin(mid)])
    offsets = np.full(n, radius * math.cos(math.pi / n))
    nxt = np.roll(verts, -1, axis=0)
    simplices = np.stack([np.zeros_like(verts), verts, nxt], axis=1)
    return normals, offsets, verts, simplices


def make_standard_body(shape: str, dim: int, **params) -> ConvexBody:
    """Build a cube, simplex, cross-polytope or regular polygon.

    Parameters
    ----------
    shape : {"cube", "simplex", "cross_polytope", "disk_polygon"}
    dim : int
    params :
        cube: ``s`` (half side, default 1) or ``unit_volume=True``;
        simplex: ``scale`` (default 1), the body ``{x_i >= 0, sum x_i <= scale}``;
        cross_polytope: ``r`` (default 1);
        disk_polygon: ``n`` vertices (default 32) and circumradius ``r``.
    """
    if dim < 1:
        raise GeometryError("dim must be >= 1")
    if shape == "cube":
        s = 0.5 if params.get("unit_volume") else float(params.get("s", 1.0))
        parts = _cube(dim, s)
        label = f"cube{dim}"
    elif shape == "simplex":
        parts = _simplex(dim, float(params.get("scale", 1.0)))
        label = f"simplex{dim}"
    elif shape == "cross_polytope":
        parts = _cross(dim, float(params.get("r", 1.0)))
        label = f"cross{dim}"
    elif shape == "disk_polygon":
        if dim != 2:
            raise GeometryError("disk_polygon exists only in dimension 2")
        n = int(params.get("n", 32))
        if n < 3:
            raise GeometryError("disk_polygon needs n >= 3")
        parts = _polygon(n, float(params.get("r", 1.0)))
        label = f"polygon{n}"
    else:
        raise GeometryError(f"unsupported shape {shape!r}")
    if dim == 1 and shape in ("cube", "cross_polytope"):
        # both degenerate to a segment; keep the facet list minimal
        normals, offsets, verts, simp = parts
        _, keep = np.unique(normals, axis=0, return_index=True)
        parts = normals[np.sort(keep)], offsets[np.sort(keep)], verts, simp
    normals, offsets, verts, simp = parts
    return ConvexBody(dim, normals, offsets, verts, params.get("label", label), simp)


# ---------------------------------------------------------------- queries

def support(body: ConvexBody, direction) -> float | np.ndarray:
    """``max <y, v>`` over the vertices; accepts one direction or a stack."""
    if body.vertices is None:
        raise GeometryError("support needs a vertex representation")
    y = np.asarray(direction, dtype=float)
    vals = body.vertices @ y.T
    return vals.max(axis=0) if y.ndim > 1 else float(vals.max())


def margins(body: ConvexBody, points) -> np.ndarray:
    p = np.atleast_2d(np.asarray(points, dtype=float))
    return (body.offsets[None, :] - p @ body.normals.T).min(axis=1)


def membership(body: ConvexBody, point) -> tuple[bool, float]:
    m = float(margins(body, point)[0])
    return m >= -MEMBER_TOL, m


def ray_shoot(body: ConvexBody, center, direction) -> float:
    """Distance from an interior ``center`` to the boundary along ``direction``."""
    x = np.asarray(center, dtype=float)
    u = np.asarray(direction, dtype=float)
    slack = body.offsets - body.normals @ x
    if slack.min() <= INTERIOR_TOL:
        raise GeometryError("ray_shoot center is not strictly interior")
    rate = body.normals @ u
    pos = rate > 0
    if not np.any(pos):
        raise GeometryError("unbounded ray")
    return float(np.min(slack[pos] / rate[pos]))


def gauge(body: ConvexBody, points, center=None) -> np.ndarray:
    """Minkowski functional of ``body - center`` evaluated at ``points - center``."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    x = np.zeros(body.dim) if center is None else np.asarray(center, dtype=float)
    slack = body.offsets - body.normals @ x
    if slack.min() <= INTERIOR_TOL:
        raise GeometryError("gauge center is not strictly interior")
    vals = ((p - x) @ body.normals.T) / slack[None, :]
    return np.maximum(vals.max(axis=1), 0.0)


# ---------------------------------------------------------------- conversions

def unique_rows(x: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Indices of the first row in each cluster of rows closer than ``tol``."""
    x = np.atleast_2d(x)
    if len(x) < 2:
        return np.arange(len(x))
    drop = set()
    for i, j in sorted(cKDTree(x).query_pairs(tol, p=np.inf)):
        if i not in drop:
            drop.add(j)
    return np.array([i for i in range(len(x)) if i not in drop], dtype=int)


def _dedupe_rows(a: np.ndarray, b: np.ndarray, tol: float = 1e-9):
    keep = unique_rows(np.hstack([a, b[:, None]]), tol)
    return a[keep], b[keep]


def vrep_to_hrep(body_or_vertices, label: str = "") -> ConvexBody:
    """Facets of the convex hull of a vertex set (d <= 3)."""
    if isinstance(body_or_vertices, ConvexBody):
        pts = body_or_vertices.vertices
        label = label or body_or_vertices.label
        if pts is None:
            raise GeometryError("no vertices to convert")
    else:
        pts = np.asarray(body_or_vertices, dtype=float)
    pts = np.atleast_2d(pts)
    d = pts.shape[1]
    if d > 3:
        raise GeometryError("exact V->H conversion supports d <= 3 only")
    if d == 1:
        lo, hi = pts.min(), pts.max()
        if hi - lo <= INTERIOR_TOL:
            raise GeometryError("degenerate segment")
        return ConvexBody(1, [[-1.0], [1.0]], [-lo, hi], [[lo], [hi]], label)
    try:
        hull = ConvexHull(pts)
    except Exception as exc:  # qhull raises its own error type
        raise GeometryError(f"hull failed: {exc}") from exc
    normals = hull.equations[:, :d]
    offsets = -hull.equations[:, d]
    normals, offsets = _dedupe_rows(normals, offsets)
    verts = pts[np.sort(hull.vertices)]
    return ConvexBody(d, normals, offsets, verts, label)


def hrep_to_vrep(body: ConvexBody) -> ConvexBody:
    """Vertices of an H-polytope (d <= 3); redundant half-spaces are dropped."""
    d = body.dim
    if d > 3:
        raise GeometryError("exact H->V conversion supports d <= 3 only")
    if d == 1:
        a = body.normals[:, 0]
        hi = np.min(body.offsets[a > 0] / a[a > 0])
        lo = np.max(body.offsets[a < 0] / a[a < 0])
        if hi - lo <= INTERIOR_TOL:
            raise GeometryError("empty or degenerate interval")
        return ConvexBody(1, [[-1.0], [1.0]], [-lo, hi], [[lo], [hi]],
                          body.label, body.simplices)
    center, radius = chebyshev_center(body)
    if radius <= INTERIOR_TOL:
        raise GeometryError("body has empty interior")
    hs = np.hstack([body.normals, -body.offsets[:, None]])
    try:
        pts = HalfspaceIntersection(hs, center).intersections
    except Exception as exc:
        raise GeometryError(f"half-space intersection failed: {exc}") from exc
    hull = ConvexHull(pts)
    verts = pts[hull.vertices]
    # merge numerically coincident vertices produced by degenerate facets
    verts = verts[unique_rows(verts, 1e-10)]
    slack = body.offsets[None, :] - verts @ body.normals.T
    tight = (np.abs(slack) <= VERTEX_TOL).sum(axis=0) >= d
    normals, offsets = _dedupe_rows(body.normals[tight], body.offsets[tight])
    order = np.lexsort(verts.T[::-1])
    return ConvexBody(d, normals, offsets, verts[order], body.label, body.simplices)


def facet_normals(body: ConvexBody) -> np.ndarray:
    """Half-space normals that are tight on at least d vertices."""
    if body.vertices is None:
        return body.normals.copy()
    slack = body.offsets[None, :] - body.vertices @ body.normals.T
    tight = (np.abs(slack) <= VERTEX_TOL).sum(axis=0) >= body.dim
    return body.normals[tight]


# ---------------------------------------------------------------- transforms

def affine_image(body: ConvexBody, matrix, shift=None) -> ConvexBody:
    """Image of ``body`` under ``x -> M x + b``."""
    d = body.dim
    m = np.asarray(matrix, dtype=float).reshape(d, d)
    b = np.zeros(d) if shift is None else np.asarray(shift, dtype=float).reshape(d)
    if abs(np.linalg.det(m)) <= 1e-12:
        raise GeometryError("affine map is singular")
    minv_t = np.linalg.inv(m).T
    normals = body.normals @ minv_t.T
    offsets = body.offsets + normals @ b
    verts = None if body.vertices is None else body.vertices @ m.T + b
    simp = None if body.simplices is None else body.simplices @ m.T + b
    return ConvexBody(d, normals, offsets, verts, body.label, simp)


def translate(body: ConvexBody, shift) -> ConvexBody:
    return affine_image(body, np.eye(body.dim), shift)


def scale(body: ConvexBody, factor: float, center=None) -> ConvexBody:
    """Homothety ``x -> c + factor (x - c)``."""
    c = np.zeros(body.dim) if center is None else np.asarray(center, dtype=float)
    return affine_image(body, factor * np.eye(body.dim), (1.0 - factor) * c)


def polar(body: ConvexBody) -> ConvexBody:
    """Polar body ``{y : <y, x> <= 1 for all x in K}`` (origin must be interior)."""
    if body.vertices is None:
        raise GeometryError("polar needs both representations")
    if body.offsets.min() <= INTERIOR_TOL:
        raise GeometryError("origin is not interior")
    slack = body.offsets[None, :] - body.vertices @ body.normals.T
    tight = (np.abs(slack) <= VERTEX_TOL).sum(axis=0) >= body.dim
    new_verts = body.normals[tight] / body.offsets[tight][:, None]
    new_normals = body.vertices
    new_offsets = np.ones(len(new_normals))
    label = f"polar({body.label})" if body.label else "polar"
    return ConvexBody(body.dim, new_normals, new_offsets, new_verts, label)


# ---------------------------------------------------------------- json

def body_to_dict(body: ConvexBody) -> dict:
    out = {
        "dim": body.dim,
        "label": body.label,
        "halfspaces": [{"normal": [float(x) for x in n], "offset": float(o)}
                       for n, o in zip(body.normals, body.offsets)],
    }
    if body.vertices is not None:
        out["vertices"] = [[float(x) for x in v] for v in body.vertices]
    return out


def body_from_dict(data: dict) -> ConvexBody:
    try:
        d = int(data["dim"])
        hs = data["halfspaces"]
        normals = np.array([h["normal"] for h in hs], dtype=float).reshape(-1, d)
        offsets = np.array([h["offset"] for h in hs], dtype=float)
        verts = data.get("vertices")
        if verts is not None:
            verts = np.array(verts, dtype=float).reshape(-1, d)
    except (KeyError, TypeError, ValueError) as exc:
        raise GeometryError(f"malformed body JSON: {exc}") from exc
    return ConvexBody(d, normals, offsets, verts, str(data.get("label", "")))

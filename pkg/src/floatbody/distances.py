"""Hausdorff, logarithmic Hausdorff and Banach-Mazur (upper bound) distances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .body import (INTERIOR_TOL, ConvexBody, GeometryError, facet_normals, gauge,
                   hrep_to_vrep, margins, polar, support)
from .logconcave import CheckReport


@dataclass(frozen=True)
class DistanceReport:
    dH: float
    dLAtCentroid: float
    dLOptimized: float
    dBMUpper: float
    witnessDirection: np.ndarray
    center: np.ndarray
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "dH": self.dH,
            "dLAtCentroid": self.dLAtCentroid,
            "dLOptimized": self.dLOptimized,
            "dBMUpper": self.dBMUpper,
            "witnessDirection": [float(x) for x in self.witnessDirection],
            "center": [float(x) for x in self.center],
            **self.notes,
        }


# ---------------------------------------------------------------- Hausdorff

def _unit(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.where(n > 0, n, 1.0)


def _hausdorff_candidates_2d(a: ConvexBody, b: ConvexBody) -> np.ndarray:
    """Directions containing the maximizer of |h_A - h_B| in the plane.

    Between consecutive outer normals of either polygon both support
    functions are linear, ``<v_A - v_B, u>``, so the maximum sits at an
    arc endpoint or at ``±(v_A - v_B)``. Extra candidates never hurt.
    """
    normals = np.vstack([facet_normals(a), facet_normals(b)])
    ang = np.sort(np.unique(np.round(np.arctan2(normals[:, 1], normals[:, 0]), 15)))
    nxt = np.concatenate([ang[1:], ang[:1] + 2 * np.pi])
    mid = 0.5 * (ang + nxt)
    um = np.column_stack([np.cos(mid), np.sin(mid)])
    va = a.vertices[np.argmax(um @ a.vertices.T, axis=1)]
    vb = b.vertices[np.argmax(um @ b.vertices.T, axis=1)]
    diff = va - vb
    diff = diff[np.linalg.norm(diff, axis=1) > 0]
    ends = np.column_stack([np.cos(ang), np.sin(ang)])
    return np.vstack([ends, _unit(diff), -_unit(diff)])


def hausdorff(a: ConvexBody, b: ConvexBody, directions=None) -> tuple[float, bool, np.ndarray]:
    """``max_u |h_A(u) - h_B(u)|`` over a direction set.

    Returns ``(value, exact, witness)``. With ``directions=None`` in the
    plane the candidate set is exact; elsewhere a direction set is sampled
    and the value is a lower bound.
    """
    if a.vertices is None or b.vertices is None:
        raise GeometryError("hausdorff needs vertex representations")
    if a.dim != b.dim:
        raise GeometryError("dimension mismatch")
    exact = False
    if directions is None:
        if a.dim == 2:
            dirs = _hausdorff_candidates_2d(a, b)
            exact = True
        elif a.dim == 1:
            dirs = np.array([[1.0], [-1.0]])
            exact = True
        else:
            from .floating import direction_set

            dirs = np.vstack([direction_set(a.dim, 4096, a),
                              facet_normals(b)])
    else:
        dirs = _unit(np.atleast_2d(np.asarray(directions, dtype=float)))
    gap = np.abs(support(a, dirs) - support(b, dirs))
    i = int(np.argmax(gap))
    return float(gap[i]), exact, dirs[i]


# ---------------------------------------------------------------- log-Hausdorff

def _require_interior(body: ConvexBody, x, name: str):
    if float(margins(body, x)[0]) <= INTERIOR_TOL:
        raise GeometryError(f"center is not interior to {name}")


def _max_gauge_over(target: ConvexBody, source: ConvexBody, x) -> tuple[float, np.ndarray]:
    """``max_{y in source} ||y - x||_{target - x}`` and its maximizer."""
    if source.vertices is not None:
        g = gauge(target, source.vertices, x)
        i = int(np.argmax(g))
        return float(g[i]), source.vertices[i]
    # no vertices: one LP per facet of the target
    slack = target.offsets - target.normals @ x
    best, arg = -math.inf, None
    for n, s in zip(target.normals, slack):
        res = linprog(-n, A_ub=source.normals, b_ub=source.offsets,
                      bounds=[(None, None)] * source.dim, method="highs")
        if res.status != 0:
            raise GeometryError(f"support LP failed: {res.message}")
        val = (float(n @ res.x) - float(n @ x)) / s
        if val > best:
            best, arg = val, res.x
    return max(best, 0.0), arg


def log_hausdorff_at(a: ConvexBody, b: ConvexBody, x) -> tuple[float, np.ndarray]:
    """Smallest ``lam >= 1`` with ``(A-x)/lam + x ⊆ B ⊆ lam (A-x) + x``.

    Both containments are decided on extreme points, so the value equals
    ``exp(sup_u |log rho_A(u) - log rho_B(u)|)`` with radial functions taken
    about ``x``. Bodies without vertices are handled by linear programs.
    Returns the value and a unit witness direction.
    """
    x = np.asarray(x, dtype=float)
    _require_interior(a, x, "A")
    _require_interior(b, x, "B")
    lam1, p1 = _max_gauge_over(b, a, x)
    lam2, p2 = _max_gauge_over(a, b, x)
    p = p1 if lam1 >= lam2 else p2
    w = p - x
    nw = np.linalg.norm(w)
    witness = w / nw if nw > 0 else np.eye(a.dim)[0]
    return max(1.0, lam1, lam2), witness


def _containment_rows(a: ConvexBody, b: ConvexBody):
    """Rows (G, h) with ``G @ [y, mu] <= h`` for ``mu v + y`` containments."""
    rows, rhs = [], []
    for src, dst in ((a, b), (b, a)):
        # mu * v + y in dst for every vertex v of src
        nv = dst.normals @ src.vertices.T  # (m, k)
        g = np.hstack([np.repeat(dst.normals, len(src.vertices), axis=0),
                       nv.reshape(-1, 1)])
        rows.append(g)
        rhs.append(np.repeat(dst.offsets, len(src.vertices)))
    return np.vstack(rows), np.concatenate(rhs)


def _with_vertices(body: ConvexBody) -> ConvexBody:
    if body.vertices is not None:
        return body
    return hrep_to_vrep(body)


def optimize_center(a: ConvexBody, b: ConvexBody) -> tuple[float, np.ndarray]:
    """Infimum over centers of the log-Hausdorff value, as one LP.

    With ``mu = 1/lam`` and ``y = (1 - mu) x`` both containments read
    ``mu v + y ∈ target`` for the vertices ``v`` of the other body, which is
    linear in ``(y, mu)``. Maximizing ``mu`` gives the exact infimum.
    """
    a, b = _with_vertices(a), _with_vertices(b)
    d = a.dim
    g, h = _containment_rows(a, b)
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=g, b_ub=h, bounds=[(None, None)] * d + [(0.0, 1.0)],
                  method="highs")
    if res.status != 0 or res.x[-1] <= 0:
        raise GeometryError("bodies have disjoint interiors")
    mu = float(res.x[-1])
    if mu >= 1.0 - 1e-12:
        from .measure import centroid

        return 1.0, centroid(a)
    return 1.0 / mu, _interior_center(a, b, g, h, mu * (1.0 - 1e-6))


def _interior_center(a, b, g, h, mu):
    """A center strictly inside both bodies that attains ``1/mu``.

    The optimum of the LP may sit on the boundary (the infimum is then not
    attained by an admissible center); relaxing ``mu`` slightly and
    maximizing the margin of ``x`` recovers an interior witness.
    """
    d = a.dim
    # variables (y, s) with y = (1 - mu) x; rows: containments, then x in A and B
    normals = np.vstack([a.normals, b.normals])
    offsets = np.concatenate([a.offsets, b.offsets])
    rows = np.vstack([np.hstack([g[:, :d], np.zeros((len(g), 1))]),
                      np.hstack([normals, (1.0 - mu) * np.ones((len(normals), 1))])])
    rhs = np.concatenate([h - mu * g[:, d], (1.0 - mu) * offsets])
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=rows, b_ub=rhs, bounds=[(None, None)] * d + [(None, 1.0)],
                  method="highs")
    if res.status != 0:
        raise GeometryError(f"center LP failed: {res.message}")
    return res.x[:d] / (1.0 - mu)


def optimize_center_bisect(a: ConvexBody, b: ConvexBody, hi: float,
                           tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """Same infimum by bisection on ``lam`` with a feasibility LP in ``x``."""
    a, b = _with_vertices(a), _with_vertices(b)
    d = a.dim
    g, h = _containment_rows(a, b)

    def feasible(lam):
        mu = 1.0 / lam
        # mu v + (1 - mu) x: move the mu column to the right-hand side
        res = linprog(np.zeros(d), A_ub=(1.0 - mu) * g[:, :d], b_ub=h - mu * g[:, d],
                      bounds=[(None, None)] * d, method="highs")
        return res.status == 0, (res.x if res.status == 0 else None)

    lo = 1.0
    ok, x = feasible(hi)
    if not ok:
        raise GeometryError("upper bracket is infeasible")
    if feasible(1.0 + 1e-15)[0]:
        return 1.0, feasible(1.0 + 1e-15)[1]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok, xm = feasible(mid)
        if ok:
            hi, x = mid, xm
        else:
            lo = mid
    return hi, x


def log_hausdorff(a: ConvexBody, b: ConvexBody, center=None) -> DistanceReport:
    """Full distance report between two bodies.

    ``center`` defaults to the centroid of ``a`` and must be interior to
    both. The optimized value needs vertex representations, which are
    computed on demand in dimension <= 3; otherwise the centroid value is
    reported in its place and flagged.
    """
    from .measure import centroid

    if a.dim != b.dim:
        raise GeometryError("dimension mismatch")
    if center is None:
        try:
            center = centroid(a)
        except GeometryError:
            center = a.vertices.mean(axis=0) if a.vertices is not None else None
    x = np.asarray(center, dtype=float)
    notes = {}
    try:
        at_c, witness = log_hausdorff_at(a, b, x)
    except GeometryError:
        at_c, witness = math.inf, np.eye(a.dim)[0]
    optimized = True
    try:
        opt, xopt = optimize_center(a, b)
    except GeometryError as exc:
        if "disjoint" in str(exc):
            raise
        opt, xopt, optimized = at_c, x, False
    notes["optimized"] = optimized
    opt = min(opt, at_c)
    av, bv = a, b
    if av.vertices is None and a.dim <= 3:
        av = hrep_to_vrep(a)
    if bv.vertices is None and b.dim <= 3:
        bv = hrep_to_vrep(b)
    if av.vertices is not None and bv.vertices is not None:
        dh, exact, _ = hausdorff(av, bv)
        notes["dHExact"] = exact
    else:
        dh = math.nan
        notes["dHExact"] = False
    return DistanceReport(float(dh), float(at_c), float(opt), float(opt) ** 2,
                          witness, xopt, notes)


def bm_upper(report: DistanceReport) -> float:
    return report.dLOptimized ** 2


def bm_theorem_bound(delta: float, dim: int) -> float:
    """``1 + 24 delta^(1/d)``: the Banach-Mazur bound against the floating body."""
    return 1.0 + 24.0 * delta ** (1.0 / dim)


def polar_duality_check(a: ConvexBody, b: ConvexBody, tol: float = 1e-6) -> CheckReport:
    """``d_L(A, B, 0) = d_L(A°, B°, 0)`` up to ``tol`` in log scale."""
    origin = np.zeros(a.dim)
    lhs, _ = log_hausdorff_at(a, b, origin)
    rhs, _ = log_hausdorff_at(polar(a), polar(b), origin)
    rep = CheckReport("polar duality", tol=tol)
    diff = abs(math.log(lhs) - math.log(rhs))
    rep.add("|log dL - log dL(polar)|", -math.inf, diff, 0.0)
    return rep

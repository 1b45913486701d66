"""Convex floating bodies on finite direction sets.

``K_delta`` is the intersection of all half-spaces that keep at least a
``1 - delta`` fraction of the volume. On a finite set of directions the
corresponding cuts give an outer polyhedral approximation; per-direction
cut levels are exact (simplex clipping) or empirical (Monte Carlo).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .body import (ConvexBody, GeometryError, body_to_dict, facet_normals, margins,
                   support, unique_rows)
from .logconcave import E_INV, CheckReport
from .measure import (cap_quantile, cap_volume_fraction, centroid, marginal_density,
                      mc_cap_quantile, sample_uniform)


def default_direction_count(dim: int) -> int:
    return {1: 2, 2: 64, 3: 256}.get(dim, 1024)


def thread_count() -> int:
    env = os.environ.get("FLOATBODY_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _fill_directions(dim: int, n: int, seed: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = 2.0 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if dim == 3:
        # Fibonacci sphere
        i = np.arange(n) + 0.5
        z = 1.0 - 2.0 * i / n
        r = np.sqrt(1.0 - z * z)
        phi = np.pi * (3.0 - math.sqrt(5.0)) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    g = np.random.default_rng(seed).standard_normal((n, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _dedupe_directions(dirs: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    return dirs[unique_rows(dirs, tol)]


def direction_set(dim: int, n: int, body: ConvexBody | None = None,
                  seed: int = 0) -> np.ndarray:
    """Unit directions: ``±e_i``, the body's facet normals, then a sphere fill.

    The fill is evenly spaced angles in 2-D, a Fibonacci sphere in 3-D and
    normalized Gaussians (seeded) beyond. At least ``n`` directions are
    returned unless the required ones already exceed ``n``.
    """
    if n < 2 * dim:
        raise GeometryError(f"need at least {2 * dim} directions")
    eye = np.eye(dim)
    required = [eye, -eye]
    if body is not None:
        required.append(facet_normals(body))
    req = _dedupe_directions(np.vstack(required))
    fill = _fill_directions(dim, n, seed)
    allv = _dedupe_directions(np.vstack([req, fill]))
    return allv[:max(n, len(req))]


@dataclass(frozen=True)
class FloatingBodyApprox:
    delta: float
    directions: np.ndarray
    depths: np.ndarray
    outer: ConvexBody
    inner_scale: float
    mode: str = "exact"
    mc_samples: int | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        out = {
            "delta": float(self.delta),
            "mode": self.mode,
            "directions": [[float(x) for x in u] for u in self.directions],
            "depths": [float(x) for x in self.depths],
            "outer": body_to_dict(self.outer),
            "innerScale": float(self.inner_scale),
        }
        if self.mode == "mc":
            out["mcSamples"] = self.mc_samples
            out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FloatingBodyApprox":
        from .body import body_from_dict

        return cls(float(data["delta"]), np.asarray(data["directions"], dtype=float),
                   np.asarray(data["depths"], dtype=float), body_from_dict(data["outer"]),
                   float(data["innerScale"]), data.get("mode", "exact"),
                   data.get("mcSamples"), data.get("seed"))


def _exact_depths(body: ConvexBody, dirs: np.ndarray, delta: float) -> np.ndarray:
    workers = min(thread_count(), max(1, len(dirs) // 32))
    if workers <= 1:
        return np.atleast_1d(cap_quantile(body, dirs, delta))
    chunks = np.array_split(dirs, workers)
    with ThreadPoolExecutor(workers) as pool:
        parts = list(pool.map(lambda c: np.atleast_1d(cap_quantile(body, c, delta)), chunks))
    return np.concatenate(parts)


def floating_body(body: ConvexBody, delta: float, n: int | None = None,
                  mode: str = "exact", seed: int = 0, samples: int | None = None,
                  directions=None) -> FloatingBodyApprox:
    """Outer approximation of ``K_delta`` from cuts along a direction set.

    Raises ``GeometryError`` for ``delta`` outside ``(0, 1/e)`` and if the
    centroid ends up outside the approximation, which would be a bug: a
    half-space of mass below ``1/e`` can never contain the centroid.
    """
    if not 0.0 < delta < E_INV:
        raise GeometryError("delta must lie in (0, 1/e)")
    d = body.dim
    if directions is None:
        dirs = direction_set(d, n or default_direction_count(d), body, seed)
    else:
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    if mode == "exact":
        depths = _exact_depths(body, dirs, delta)
        c = centroid(body)
    elif mode == "mc":
        samples = samples or int(max(10 ** 6, math.ceil(100.0 / delta)))
        if samples < 10.0 / delta:
            raise GeometryError("mc mode needs at least 10/delta samples")
        pts = sample_uniform(body, samples, seed)
        depths = mc_cap_quantile(pts, dirs, delta)
        try:
            c = centroid(body)
        except GeometryError:
            c = pts.mean(axis=0)
    else:
        raise GeometryError(f"unknown mode {mode!r}")
    if body.vertices is not None:
        h = support(body, dirs)
        if np.any(depths > h + 1e-12):
            raise GeometryError("cut depth exceeds the support function")
    label = f"float({body.label},{delta:g})"
    outer = ConvexBody(d, dirs, depths, None, label)
    if float(margins(outer, c)[0]) < -1e-9:
        raise GeometryError("centroid excluded from floating body: internal error")
    return FloatingBodyApprox(float(delta), dirs, np.asarray(depths, dtype=float), outer,
                              1.0 - 4.0 * delta ** (1.0 / d), mode,
                              samples if mode == "mc" else None,
                              seed if mode == "mc" else None)


def inner_bound_check(body: ConvexBody, fb: FloatingBodyApprox,
                      tol: float = 1e-9) -> CheckReport:
    """Per-direction ``t - <c,u> >= (1 - 4 delta^(1/d)) (h(u) - <c,u>)``.

    Measured from the centroid ``c``, which is the same as translating the
    body so that its centroid sits at the origin.
    """
    c = centroid(body)
    cu = fb.directions @ c
    h = support(body, fb.directions) - cu
    rel = fb.depths - cu
    rep = CheckReport("inner bound", tol=tol)
    for i in range(len(rel)):
        rep.add(f"t[{i}]", fb.inner_scale * h[i], rel[i], math.inf)
    return rep


@dataclass(frozen=True)
class CapBoundBreakdown:
    theta: np.ndarray
    t: float
    hK: float
    median: float
    psiT: float
    aT: float
    alpha: float
    beta: float
    primaryLB: float
    secondaryLB: float
    combinedLB: float

    def holds(self, tol: float = 1e-9) -> bool:
        return (self.aT >= self.primaryLB - tol and self.aT >= self.secondaryLB - tol
                and self.aT >= self.combinedLB - tol)


def cap_bound_breakdown(body: ConvexBody, theta, t: float, median: float | None = None,
                        ) -> CapBoundBreakdown:
    """Both lower bounds for a cap mass and their minimax combination.

    Valid for ``t`` between the median level and the support value. At
    ``t = h`` the second bound degenerates and is reported as ``-inf``.
    """
    th = np.asarray(theta, dtype=float)
    th = th / np.linalg.norm(th)
    d = body.dim
    h = float(support(body, th))
    m = float(cap_quantile(body, th, 0.5)) if median is None else float(median)
    span = h - m
    if t < m - 1e-12 * max(1.0, abs(span)) or t > h + 1e-12:
        raise GeometryError("t must lie in [median, support]")
    t = min(max(t, m), h)
    psi = float(marginal_density(body, th, t))
    a_t = float(cap_volume_fraction(body, th, t))
    gap = h - t
    alpha = gap / d
    if gap > 0:
        beta = (span ** d - gap ** d) / (d * gap ** (d - 1))
        secondary = 0.5 - beta * psi
    else:
        beta = math.inf
        secondary = -math.inf
    combined = 0.5 * (gap / span) ** d if span > 0 else 0.0
    return CapBoundBreakdown(th, float(t), h, m, psi, a_t, alpha, beta,
                             alpha * psi, secondary, combined)


def theorem1_sandwich(body_iso: ConvexBody, fb: FloatingBodyApprox, LK: float,
                      tol: float = 1e-9) -> CheckReport:
    """Every cut level lies in ``[(1/e - delta) L_K, 10 ln(2/delta) L_K]``.

    Also records the ball radius obtained with the midpoint
    ``delta' = (delta + 1/e) / 2``, which is always below the lower bound.
    """
    delta = fb.delta
    r_lower = (E_INV - delta) * LK
    r_upper = 10.0 * math.log(2.0 / delta) * LK
    delta_mid = 0.5 * (delta + E_INV)
    c = centroid(body_iso)
    rel = fb.depths - fb.directions @ c
    rep = CheckReport("isotropic sandwich", tol=tol)
    rep.add("min depth", r_lower, rel.min(), r_upper)
    rep.add("max depth", r_lower, rel.max(), r_upper)
    rep.add("inscribed radius (delta')", -math.inf, (E_INV - delta_mid) * LK, r_lower)
    for i, v in enumerate(rel):
        rep.add(f"t[{i}]", r_lower, v, r_upper)
    return rep

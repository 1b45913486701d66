"""Volumes, moments, cap fractions and sampling for polytopes.

Everything exact goes through a simplicial decomposition. The mass of a
simplex on one side of a hyperplane depends only on the heights of its
vertices, so caps are computed by repeatedly splitting a simplex along an
edge that crosses the cutting plane until every piece lies on one side.
"""

from __future__ import annotations

import csv
import io
import math
import weakref
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, Delaunay

from .body import ConvexBody, GeometryError, chebyshev_center, margins

MAX_ROWS = 400_000
MAX_DECOMP_DIM = 8


@dataclass(frozen=True)
class SimplicialDecomposition:
    simplices: np.ndarray  # (s, d+1, d)
    volumes: np.ndarray  # (s,)

    @property
    def total_volume(self) -> float:
        return float(self.volumes.sum())

    @property
    def weights(self) -> np.ndarray:
        return self.volumes / self.volumes.sum()


@dataclass(frozen=True)
class SectionProfile:
    direction: np.ndarray
    h_plus: float
    h_minus: float
    grid: np.ndarray
    psi: np.ndarray
    A: np.ndarray
    median: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "psi", "A"])
        for row in zip(self.grid, self.psi, self.A):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def simplex_volumes(simplices: np.ndarray) -> np.ndarray:
    d = simplices.shape[-1]
    edges = simplices[:, 1:, :] - simplices[:, :1, :]
    return np.abs(np.linalg.det(edges)) / math.factorial(d)


_DECOMP_CACHE: "weakref.WeakKeyDictionary[ConvexBody, SimplicialDecomposition]" = (
    weakref.WeakKeyDictionary())


def decompose(body: ConvexBody) -> SimplicialDecomposition:
    """Split the body into simplices with disjoint interiors."""
    cached = _DECOMP_CACHE.get(body)
    if cached is not None:
        return cached
    d = body.dim
    if body.simplices is not None:
        simp = np.asarray(body.simplices)
    elif body.vertices is None:
        raise GeometryError("decomposition needs a vertex representation")
    elif d == 1:
        v = body.vertices[:, 0]
        simp = np.array([[[v.min()], [v.max()]]])
    elif d <= 3:
        verts = body.vertices
        apex = verts.mean(axis=0)
        hull = ConvexHull(verts)
        facets = verts[hull.simplices]  # (f, d, d)
        simp = np.concatenate(
            [np.broadcast_to(apex, (len(facets), 1, d)), facets], axis=1)
    elif d <= MAX_DECOMP_DIM:
        tri = Delaunay(body.vertices)
        simp = body.vertices[tri.simplices]
    else:
        raise GeometryError(f"no exact decomposition available in dimension {d}")
    vols = simplex_volumes(simp)
    keep = vols > 1e-14
    out = SimplicialDecomposition(np.ascontiguousarray(simp[keep]), vols[keep])
    _DECOMP_CACHE[body] = out
    return out


def volume(body: ConvexBody) -> float:
    return decompose(body).total_volume


def centroid(body: ConvexBody) -> np.ndarray:
    dec = decompose(body)
    return dec.weights @ dec.simplices.mean(axis=1)


def second_moment(body: ConvexBody, about=None) -> np.ndarray:
    """``E[(X-a)(X-a)^T]`` for X uniform on the body."""
    dec = decompose(body)
    d = body.dim
    a = dec.simplices.reshape(-1, d).mean(axis=0) if about is None else np.asarray(about)
    v = dec.simplices - a
    s = v.sum(axis=1)
    per = np.einsum("skI,skJ->sIJ", v, v) + np.einsum("sI,sJ->sIJ", s, s)
    per /= (d + 1) * (d + 2)
    return np.einsum("s,sIJ->IJ", dec.weights, per)


def covariance(body: ConvexBody) -> np.ndarray:
    c = centroid(body)
    m = second_moment(body, about=c)
    return 0.5 * (m + m.T)


# ---------------------------------------------------------------- cap splitting

def _split_mass(heights: np.ndarray, weights: np.ndarray, groups: np.ndarray,
                t: np.ndarray, ngroups: int) -> tuple[np.ndarray, np.ndarray]:
    """Mass above ``t`` and marginal density at ``t`` (limit from above).

    ``heights`` is (N, d+1): projections of each simplex's vertices. A row
    straddling the plane is split along an edge (a above, b below) at the
    crossing point m; the piece with b replaced by m keeps the fraction
    ``(h_a - t) / (h_a - h_b)`` of the mass, the piece with a replaced keeps
    ``(t - h_b) / (h_a - h_b)``. Pieces with exactly one vertex above the
    plane and d vertices on it contribute ``d / (h_apex - t)`` density.
    """
    d = heights.shape[1] - 1
    mass = np.zeros(ngroups)
    dens = np.zeros(ngroups)
    h, w, g, tt = heights, weights, groups, t
    while len(h):
        above = h > tt[:, None]
        below = h < tt[:, None]
        has_a = above.any(axis=1)
        has_b = below.any(axis=1)
        full = ~has_b & has_a
        if full.any():
            mass += np.bincount(g[full], w[full], ngroups)
            one = full & (above.sum(axis=1) == 1)
            if one.any():
                apex = np.where(above[one], h[one], -np.inf).max(axis=1)
                dens += np.bincount(g[one], w[one] * d / (apex - tt[one]), ngroups)
        split = has_a & has_b
        if not split.any():
            break
        h, w, g, tt = h[split], w[split], g[split], tt[split]
        above, below = above[split], below[split]
        ia = above.argmax(axis=1)
        ib = below.argmax(axis=1)
        rows = np.arange(len(h))
        ha = h[rows, ia]
        hb = h[rows, ib]
        # both fractions from their own gaps: 1 - s would cancel badly
        span = ha - hb
        keep_a = (ha - tt) / span
        keep_b = (tt - hb) / span
        h1 = h.copy()
        h1[rows, ib] = tt
        h2 = h.copy()
        h2[rows, ia] = tt
        h = np.concatenate([h1, h2])
        w = np.concatenate([w * keep_a, w * keep_b])
        g = np.concatenate([g, g])
        tt = np.concatenate([tt, tt])
    return mass, dens


def _heights(dec: SimplicialDecomposition, thetas: np.ndarray) -> np.ndarray:
    # (ndir, s, d+1)
    return np.einsum("skd,nd->nsk", dec.simplices, thetas)


def _cap_eval(dec: SimplicialDecomposition, heights: np.ndarray, t: np.ndarray):
    """Cap mass and density for each direction at its own level ``t``."""
    ndir, ns, k = heights.shape
    mass = np.empty(ndir)
    dens = np.empty(ndir)
    # chunk directions so the splitting tree stays bounded in memory
    fanout = math.comb(k, k // 2)
    step = max(1, MAX_ROWS // max(1, ns * fanout))
    wts = dec.weights
    for lo in range(0, ndir, step):
        hi = min(ndir, lo + step)
        n = hi - lo
        hrows = heights[lo:hi].reshape(-1, k)
        w = np.tile(wts, n)
        g = np.repeat(np.arange(n), ns)
        tt = np.repeat(t[lo:hi], ns)
        m, dn = _split_mass(hrows, w, g, tt, n)
        mass[lo:hi] = m
        dens[lo:hi] = dn
    return np.clip(mass, 0.0, 1.0), dens


def _as_dirs(theta) -> tuple[np.ndarray, bool]:
    th = np.asarray(theta, dtype=float)
    single = th.ndim == 1
    return np.atleast_2d(th), single


def cap_volume_fraction(body: ConvexBody, theta, t):
    """``vol(K ∩ {<x,theta> >= t}) / vol(K)``; vectorized over directions."""
    dec = decompose(body)
    th, single = _as_dirs(theta)
    tt = np.broadcast_to(np.asarray(t, dtype=float), (len(th),)).copy()
    mass, _ = _cap_eval(dec, _heights(dec, th), tt)
    return float(mass[0]) if single else mass


def marginal_density(body: ConvexBody, theta, t):
    """Density of ``<X, theta>`` at ``t`` (right limit), X uniform on the body."""
    dec = decompose(body)
    th, single = _as_dirs(theta)
    tt = np.broadcast_to(np.asarray(t, dtype=float), (len(th),)).copy()
    _, dens = _cap_eval(dec, _heights(dec, th), tt)
    return float(dens[0]) if single else dens


def cap_quantile(body: ConvexBody, theta, delta):
    """Level ``t`` whose cap ``{<x,theta> >= t}`` holds a ``delta`` fraction.

    Lockstep bisection over all requested directions; stops once every
    bracket is narrower than ``1e-12`` of the support width.
    """
    delta_arr = np.asarray(delta, dtype=float)
    if np.any((delta_arr <= 0) | (delta_arr >= 1)):
        raise GeometryError("delta must lie in (0, 1)")
    dec = decompose(body)
    th, single = _as_dirs(theta)
    heights = _heights(dec, th)
    lo = heights.min(axis=(1, 2))
    hi = heights.max(axis=(1, 2))
    target = np.broadcast_to(delta_arr, (len(th),))
    tol = 1e-12 * (hi - lo)
    for _ in range(200):
        active = (hi - lo) > tol
        if not active.any():
            break
        idx = np.flatnonzero(active)
        mid = 0.5 * (lo[idx] + hi[idx])
        mass, _ = _cap_eval(dec, heights[idx], mid)
        up = mass > target[idx]
        lo[idx[up]] = mid[up]
        hi[idx[~up]] = mid[~up]
    out = 0.5 * (lo + hi)
    return float(out[0]) if single else out


def median_depth(body: ConvexBody, theta):
    return cap_quantile(body, theta, 0.5)


def section_profile(body: ConvexBody, theta, grid_size: int = 257,
                    method: str = "exact") -> SectionProfile:
    """Sampled section function and cap masses along ``theta``.

    ``method="exact"`` evaluates the marginal density from the simplex
    splitting; ``"difference"`` takes central differences of the exact cap
    masses (second-order accurate in the grid step).
    """
    if grid_size < 16:
        raise GeometryError("grid_size must be >= 16")
    th = np.asarray(theta, dtype=float)
    th = th / np.linalg.norm(th)
    dec = decompose(body)
    hts = _heights(dec, th[None, :])
    h_plus = float(hts.max())
    h_minus = float(-hts.min())
    grid = np.linspace(-h_minus, h_plus, grid_size)
    rep = np.broadcast_to(hts, (grid_size,) + hts.shape[1:])
    A, psi = _cap_eval(dec, rep, grid.copy())
    A[0], A[-1] = 1.0, 0.0
    if method == "difference":
        step = grid[1] - grid[0]
        eps = 1e-3 * step
        plus, _ = _cap_eval(dec, rep, grid + eps)
        minus, _ = _cap_eval(dec, rep, grid - eps)
        psi = (minus - plus) / (2 * eps)
        psi[0] = (A[0] - plus[0]) / eps
        psi[-1] = (minus[-1] - A[-1]) / eps
    elif method != "exact":
        raise GeometryError(f"unknown profile method {method!r}")
    psi = np.maximum(psi, 0.0)
    med = cap_quantile(body, th, 0.5)
    return SectionProfile(th, h_plus, h_minus, grid, psi, A, med)


# ---------------------------------------------------------------- sampling

def bounding_box(body: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    if body.vertices is not None:
        return body.vertices.min(axis=0), body.vertices.max(axis=0)
    from scipy.optimize import linprog

    d = body.dim
    lo, hi = np.empty(d), np.empty(d)
    for i in range(d):
        c = np.zeros(d)
        c[i] = 1.0
        for sgn, arr in ((1.0, lo), (-1.0, hi)):
            res = linprog(sgn * c, A_ub=body.normals, b_ub=body.offsets,
                          bounds=[(None, None)] * d, method="highs")
            if res.status != 0:
                raise GeometryError("bounding box probe failed")
            arr[i] = res.x[i]
    return lo, hi


def _rejection(body, n, rng):
    lo, hi = bounding_box(body)
    out = []
    got = 0
    drawn = 0
    batch = max(1024, 2 * n)
    while got < n:
        x = rng.uniform(lo, hi, size=(batch, body.dim))
        drawn += batch
        ok = x[margins(body, x) >= 0.0]
        out.append(ok)
        got += len(ok)
        if drawn >= 1_000_000 and got / drawn < 1e-6:
            raise GeometryError("rejection efficiency below 1e-6")
        if got < n:
            rate = max(got / drawn, 1e-6)
            batch = int(min(5_000_000, 1.1 * (n - got) / rate + 1024))
    return np.concatenate(out)[:n]


def _hit_and_run(body, n, rng, chains=None):
    d = body.dim
    k = min(n, chains or 10_000)
    per = -(-n // k)
    x = np.tile(chebyshev_center(body)[0], (k, 1))
    A, b = body.normals, body.offsets
    burn, thin = 8 * d * d, d * d

    def step(x):
        u = rng.standard_normal((k, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        slack = np.maximum(b[None, :] - x @ A.T, 0.0)
        rate = u @ A.T
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = slack / rate
        upper = np.where(rate > 0, ratio, np.inf).min(axis=1)
        lower = np.where(rate < 0, ratio, -np.inf).max(axis=1)
        lam = lower + (upper - lower) * rng.random(k)
        return x + lam[:, None] * u

    for _ in range(burn):
        x = step(x)
    out = np.empty((per, k, d))
    for i in range(per):
        for _ in range(thin):
            x = step(x)
        out[i] = x
    return out.reshape(-1, d)[:n]


def sample_uniform(body: ConvexBody, n: int, seed: int, method: str | None = None,
                   ) -> np.ndarray:
    """Uniform points in the body, reproducible from ``seed``.

    Rejection from the bounding box for d <= 4, vectorized hit-and-run
    (independent chains, burn-in 8d^2, thinning d^2) otherwise.
    """
    if n < 1:
        raise GeometryError("n must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    method = method or ("rejection" if body.dim <= 4 else "hit_and_run")
    if method == "rejection":
        return _rejection(body, n, rng)
    if method == "hit_and_run":
        return _hit_and_run(body, n, rng)
    raise GeometryError(f"unknown sampler {method!r}")


def order_stat_index(n: int, delta: float) -> int:
    """1-based index ``ceil((1 - delta) n)``, robust to float noise."""
    return max(1, min(n, math.ceil(round((1.0 - delta) * n, 9))))


def mc_cap_quantile(points, theta, delta: float, min_tail: float = 10.0):
    """Empirical level cutting off a ``delta`` fraction of ``points``.

    Returns the order statistic ``ceil((1 - delta) n)`` of the projections.
    ``n * delta`` must reach ``min_tail`` unless the caller lowers it.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(pts)
    if n * delta < min_tail:
        raise GeometryError("mc_cap_quantile needs n * delta >= 10")
    th, single = _as_dirs(theta)
    k = order_stat_index(n, delta) - 1
    out = np.empty(len(th))
    step = max(1, 2_000_000 // n)
    for lo in range(0, len(th), step):
        proj = pts @ th[lo:lo + step].T
        out[lo:lo + step] = np.partition(proj, k, axis=0)[k]
    return float(out[0]) if single else out


def ball_volume(d: int) -> float:
    """Volume of the Euclidean unit ball in dimension d."""
    if d < 1:
        raise GeometryError("d must be >= 1")
    return math.exp(0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0))

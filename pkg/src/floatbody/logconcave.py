"""One-dimensional log-concave densities with piecewise log-linear logs.

A density is given by knots ``t_0 < ... < t_k`` and log-values ``g_i``; in
between, ``log f`` is linear. Optional exponential tails extend the support
to -inf (``left_slope > 0``) or +inf (``right_slope < 0``). All integrals
are closed-form, so CDF, quantile and moments are exact up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

E_INV = math.exp(-1.0)
BOUNDARY_TOL = 1e-9


class DensityError(ValueError):
    pass


def _phi(z: float, j: int) -> float:
    """``int_0^1 v^j e^{z v} dv`` for j in {0, 1, 2}."""
    if abs(z) < 0.5:
        # series: sum_k z^k / (k! (k + j + 1))
        total, term = 0.0, 1.0
        for k in range(40):
            total += term / (k + j + 1)
            term *= z / (k + 1)
        return total
    ez = math.exp(z)
    if j == 0:
        return math.expm1(z) / z
    if j == 1:
        return (ez * (z - 1.0) + 1.0) / (z * z)
    return (ez * (z * z - 2.0 * z + 2.0) - 2.0) / (z ** 3)


def _piece_moments(a: float, b: float, ga: float, gb: float):
    """Integrals of ``t^j exp(linear log)`` over ``[a, b]``, j = 0, 1, 2.

    The exponent is anchored at the larger endpoint value so that
    ``exp`` never overflows.
    """
    length = b - a
    if length <= 0:
        return 0.0, 0.0, 0.0
    if ga >= gb:
        z = gb - ga  # <= 0, integrate forward from a
        base, sgn, anchor = ga, 1.0, a
    else:
        z = ga - gb  # < 0, integrate backward from b
        base, sgn, anchor = gb, -1.0, b
    scale = math.exp(base) * length
    i0 = scale * _phi(z, 0)
    i1 = scale * length * _phi(z, 1)
    i2 = scale * length * length * _phi(z, 2)
    # t = anchor + sgn * u
    m0 = i0
    m1 = anchor * i0 + sgn * i1
    m2 = anchor * anchor * i0 + 2.0 * sgn * anchor * i1 + i2
    return m0, m1, m2


def _tail_moments(anchor: float, g: float, slope: float, sgn: float):
    """Moments of ``exp(g - lam u)`` for ``t = anchor + sgn u``, u >= 0."""
    lam = abs(slope)
    c = math.exp(g)
    i0, i1, i2 = c / lam, c / lam ** 2, 2.0 * c / lam ** 3
    return i0, anchor * i0 + sgn * i1, anchor * anchor * i0 + 2 * sgn * anchor * i1 + i2


@dataclass(frozen=True)
class PiecewiseLogLinearDensity:
    """Normalized log-concave density; see module docstring."""

    knots: np.ndarray
    log_values: np.ndarray
    left_slope: float | None = None
    right_slope: float | None = None
    name: str = ""
    log_norm: float = field(default=0.0, repr=False)
    mean: float = field(default=0.0, init=False)
    variance: float = field(default=0.0, init=False)
    _masses: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.knots, dtype=float).reshape(-1)
        g = np.asarray(self.log_values, dtype=float).reshape(-1)
        if t.size == 0 or t.size != g.size:
            raise DensityError("knots and log_values must be non-empty and aligned")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(g))):
            raise DensityError("knots and log_values must be finite")
        if np.any(np.diff(t) <= 0):
            raise DensityError("knots must be strictly increasing")
        if t.size == 1 and (self.left_slope is None or self.right_slope is None):
            raise DensityError("a single knot needs tails on both sides")
        slopes = list(np.diff(g) / np.diff(t))
        if self.left_slope is not None:
            if not self.left_slope > 0:
                raise DensityError("left tail needs a positive log-slope")
            slopes.insert(0, float(self.left_slope))
        if self.right_slope is not None:
            if not self.right_slope < 0:
                raise DensityError("right tail needs a negative log-slope")
            slopes.append(float(self.right_slope))
        if np.any(np.diff(slopes) > 1e-12 * (1.0 + np.abs(slopes[:-1]))):
            raise DensityError("log-density is not concave")
        moments = []
        if self.left_slope is not None:
            moments.append(_tail_moments(t[0], g[0], self.left_slope, -1.0))
        for i in range(t.size - 1):
            moments.append(_piece_moments(t[i], t[i + 1], g[i], g[i + 1]))
        if self.right_slope is not None:
            moments.append(_tail_moments(t[-1], g[-1], self.right_slope, 1.0))
        mom = np.array(moments)
        z = mom[:, 0].sum()
        g = g - math.log(z)
        mom = mom / z
        mean = mom[:, 1].sum()
        var = mom[:, 2].sum() - mean * mean
        if not var > 0:
            raise DensityError("variance must be positive")
        t.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "knots", t)
        object.__setattr__(self, "log_values", g)
        object.__setattr__(self, "log_norm", float(math.log(z)) + self.log_norm)
        object.__setattr__(self, "mean", float(mean))
        object.__setattr__(self, "variance", float(var))
        object.__setattr__(self, "_masses", mom[:, 0].copy())

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def support(self) -> tuple[float, float]:
        lo = -math.inf if self.left_slope is not None else float(self.knots[0])
        hi = math.inf if self.right_slope is not None else float(self.knots[-1])
        return lo, hi

    # pieces are indexed in the same order as _masses
    def _pieces(self):
        t, g = self.knots, self.log_values
        out = []
        if self.left_slope is not None:
            out.append(("left", -math.inf, t[0]))
        for i in range(t.size - 1):
            out.append(("mid", t[i], t[i + 1], i))
        if self.right_slope is not None:
            out.append(("right", t[-1], math.inf))
        return out

    def log_pdf(self, x: float) -> float:
        t, g = self.knots, self.log_values
        lo, hi = self.support
        if x < lo or x > hi:
            return -math.inf
        if x < t[0]:
            return g[0] + self.left_slope * (x - t[0])
        if x > t[-1]:
            return g[-1] + self.right_slope * (x - t[-1])
        i = min(int(np.searchsorted(t, x, side="right")) - 1, t.size - 2)
        if t.size == 1:
            return float(g[0])
        w = (x - t[i]) / (t[i + 1] - t[i])
        return float(g[i] + w * (g[i + 1] - g[i]))

    def pdf(self, x: float) -> float:
        return math.exp(self.log_pdf(x))

    def sup_pdf(self) -> float:
        # a log-linear piece peaks at one of its ends
        return float(np.exp(self.log_values.max()))

    def cdf(self, x: float) -> float:
        lo, hi = self.support
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        t, g = self.knots, self.log_values
        total = 0.0
        for k, piece in enumerate(self._pieces()):
            kind, a, b = piece[0], piece[1], piece[2]
            if x >= b:
                total += self._masses[k]
                continue
            if kind == "left":
                lam = self.left_slope
                total += math.exp(g[0] + lam * (x - t[0])) / lam
            elif kind == "mid":
                i = piece[3]
                gx = self.log_pdf(x)
                total += _piece_moments(a, x, g[i], gx)[0]
            else:
                lam = -self.right_slope
                total += math.exp(g[-1]) / lam * -math.expm1(-lam * (x - t[-1]))
            break
        return min(max(total, 0.0), 1.0)

    def sf(self, x: float) -> float:
        """``1 - F(x)``, computed from the upper pieces to keep tail accuracy."""
        lo, hi = self.support
        if x <= lo:
            return 1.0
        if x >= hi:
            return 0.0
        pieces = self._pieces()
        total = 0.0
        t, g = self.knots, self.log_values
        for k in range(len(pieces) - 1, -1, -1):
            kind, a, b = pieces[k][0], pieces[k][1], pieces[k][2]
            if x <= a:
                total += self._masses[k]
                continue
            if kind == "right":
                lam = -self.right_slope
                total += math.exp(g[-1] - lam * (x - t[-1])) / lam
            elif kind == "mid":
                i = pieces[k][3]
                total += _piece_moments(x, b, self.log_pdf(x), g[i + 1])[0]
            else:
                lam = self.left_slope
                total += math.exp(g[0]) / lam * -math.expm1(lam * (x - t[0]))
            break
        return min(max(total, 0.0), 1.0)

    def quantile(self, p: float) -> float:
        """Inverse CDF, solved in closed form inside the located piece."""
        if not 0.0 < p < 1.0:
            raise DensityError("p must lie in (0, 1)")
        t, g = self.knots, self.log_values
        remaining = p
        pieces = self._pieces()
        for k, piece in enumerate(pieces):
            mass = self._masses[k]
            if remaining > mass and k < len(pieces) - 1:
                remaining -= mass
                continue
            kind, a, b = piece[0], piece[1], piece[2]
            remaining = min(remaining, mass)
            if kind == "left":
                lam = self.left_slope
                return float(t[0] + (math.log(remaining * lam) - g[0]) / lam)
            if kind == "right":
                lam = -self.right_slope
                r = remaining * lam * math.exp(-g[-1])
                return float(t[-1] - math.log1p(-r) / lam)
            i = piece[3]
            s = (g[i + 1] - g[i]) / (b - a)
            r = remaining * math.exp(-g[i])
            if abs(s * (b - a)) < 1e-12:
                u = r
            else:
                u = math.log1p(r * s) / s
            return float(min(max(a + u, a), b))
        raise AssertionError("unreachable")

    @property
    def median(self) -> float:
        return self.quantile(0.5)

    def affine(self, loc: float, scale: float) -> "PiecewiseLogLinearDensity":
        """Density of ``loc + scale * X``; ``scale > 0``."""
        if not scale > 0:
            raise DensityError("scale must be positive")
        return PiecewiseLogLinearDensity(
            loc + scale * self.knots, self.log_values - math.log(scale),
            None if self.left_slope is None else self.left_slope / scale,
            None if self.right_slope is None else self.right_slope / scale,
            self.name)

    def standardized(self) -> "PiecewiseLogLinearDensity":
        """Mean 0, variance 1 version of this density."""
        s = self.std
        return self.affine(-self.mean / s, 1.0 / s)

    def to_dict(self) -> dict:
        out = {"knots": [float(x) for x in self.knots],
               "logValues": [float(x) for x in self.log_values]}
        if self.left_slope is not None:
            out["leftSlope"] = float(self.left_slope)
        if self.right_slope is not None:
            out["rightSlope"] = float(self.right_slope)
        if self.name:
            out["name"] = self.name
        return out


# ---------------------------------------------------------------- families

def _from_log_function(f, a, b, n, name, spacing=None):
    x = np.linspace(a, b, n) if spacing is None else spacing
    return PiecewiseLogLinearDensity(x, [f(v) for v in x], name=name)


def make_density(spec) -> PiecewiseLogLinearDensity:
    """Build a density from a dict (JSON form) or a family name.

    Families: exponential, uniform, laplace, triangular,
    truncated_exponential, gaussian. The first four default to the
    standardized (mean 0, variance 1) member.
    """
    if isinstance(spec, str):
        spec = {"family": spec}
    if "knots" in spec:
        return PiecewiseLogLinearDensity(
            spec["knots"], spec["logValues"], spec.get("leftSlope"),
            spec.get("rightSlope"), spec.get("name", ""))
    family = spec.get("family")
    p = dict(spec.get("params") or {})
    if family == "exponential":
        # rate lam, shifted so the mean is zero: support [-1/lam, inf)
        lam = float(p.get("rate", 1.0))
        a = -1.0 / lam
        return PiecewiseLogLinearDensity([a, a + 1.0 / lam], [0.0, -1.0],
                                         right_slope=-lam, name="exponential")
    if family == "uniform":
        half = float(p.get("half_width", math.sqrt(3.0)))
        return PiecewiseLogLinearDensity([-half, half], [0.0, 0.0], name="uniform")
    if family == "laplace":
        b = float(p.get("b", 1.0 / math.sqrt(2.0)))
        return PiecewiseLogLinearDensity([0.0], [0.0], 1.0 / b, -1.0 / b, name="laplace")
    if family == "triangular":
        # decreasing triangle on [-a, 2a] (mode at -a, mean 0); the zero at 2a
        # is approached by log-linear interpolation of log(2a - x)
        a = float(p.get("a", 1.0))
        n = int(p.get("n", 400))
        gap = 2e-5 * 3 * a
        # geometric refinement toward the vanishing end
        u = np.geomspace(gap, 3 * a, n)[::-1]
        x = 2 * a - u
        return _from_log_function(lambda v: math.log(2 * a - v), None, None, n,
                                  "triangular", spacing=x)
    if family == "truncated_exponential":
        lam = float(p.get("rate", 1.0))
        width = float(p.get("width", 3.0))
        return PiecewiseLogLinearDensity([0.0, width], [0.0, -lam * width],
                                         name="truncated_exponential")
    if family == "gaussian":
        lim = float(p.get("limit", 8.0))
        n = int(p.get("n", 64))
        return _from_log_function(lambda v: -0.5 * v * v, -lim, lim, n, "gaussian")
    raise DensityError(f"unknown density family {family!r}")


BATTERY = ("exponential", "uniform", "laplace", "triangular",
           "truncated_exponential", "gaussian")


def density_battery() -> list[PiecewiseLogLinearDensity]:
    return [make_density(name) for name in BATTERY]


# ---------------------------------------------------------------- checks

@dataclass
class CheckReport:
    name: str
    rows: list = field(default_factory=list)  # (quantity, lower, value, upper)
    tol: float = BOUNDARY_TOL

    def add(self, quantity, lower, value, upper):
        self.rows.append((quantity, float(lower), float(value), float(upper)))

    def row_pass(self, row) -> bool:
        _, lo, v, hi = row
        return lo - self.tol <= v <= hi + self.tol

    @property
    def passed(self) -> bool:
        return all(self.row_pass(r) for r in self.rows)

    def value(self, quantity: str) -> float:
        for r in self.rows:
            if r[0] == quantity:
                return r[2]
        raise KeyError(quantity)


def check_rigidity(density: PiecewiseLogLinearDensity) -> CheckReport:
    """Density at 0, at the median and its sup, after standardizing."""
    f = density.standardized()
    rep = CheckReport(f"rigidity:{density.name}")
    f0 = f.pdf(0.0)
    fm = f.pdf(f.median)
    rep.add("f(0)", 1.0 / 8.0, f0, 1.0)
    rep.add("sup f", -math.inf, f.sup_pdf(), 1.0)
    rep.add("f(0)<=sup f", -math.inf, f0 - f.sup_pdf(), 0.0)
    rep.add("f(m)", 1.0 / math.sqrt(12.0), fm, 1.0 / math.sqrt(2.0))
    return rep


def check_quantile_bracket(density: PiecewiseLogLinearDensity, rho: float) -> CheckReport:
    """``(1/e - rho) sigma <= F^{-1}(1 - rho) - mean <= 10 ln(2/rho) sigma``."""
    if not 0.0 < rho < E_INV:
        raise DensityError("rho must lie in (0, 1/e)")
    rep = CheckReport(f"quantile:{density.name}")
    q = density.quantile(1.0 - rho) - density.mean
    s = density.std
    rep.add(f"F^-1(1-{rho:g})", (E_INV - rho) * s, q, 10.0 * math.log(2.0 / rho) * s)
    return rep


def check_tail(density: PiecewiseLogLinearDensity, t_grid) -> CheckReport:
    """``1 - F(t) <= 2 exp(-t/10)`` on the standardized density for t >= 0."""
    f = density.standardized()
    rep = CheckReport(f"tail:{density.name}")
    for t in np.asarray(t_grid, dtype=float):
        if t < 0:
            continue
        rep.add(f"1-F({t:g})", -math.inf, f.sf(t), 2.0 * math.exp(-t / 10.0))
    return rep


def check_centroid_mass(density: PiecewiseLogLinearDensity) -> CheckReport:
    rep = CheckReport(f"centroid_mass:{density.name}")
    rep.add("1-F(mean)", E_INV, density.sf(density.mean), 1.0 - E_INV)
    return rep


def midpoint_concavity_defect(values) -> float:
    """Smallest ``v_i - (v_{i-1} + v_{i+1}) / 2`` over interior points."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return 0.0
    return float(np.min(v[1:-1] - 0.5 * (v[:-2] + v[2:])))


def check_brunn(profile, d: int, tol: float = 1e-7) -> CheckReport:
    """Midpoint concavity of ``psi^(1/(d-1))`` on the interior of the grid."""
    if d < 2:
        raise DensityError("Brunn's check needs d >= 2")
    rep = CheckReport("brunn", tol=tol)
    root = np.power(np.asarray(profile.psi, dtype=float)[1:-1], 1.0 / (d - 1))
    rep.add("midpoint defect", 0.0, min(0.0, midpoint_concavity_defect(root)), math.inf)
    return rep


def check_log_concave_profile(profile, tol: float = 1e-7) -> CheckReport:
    """Midpoint test for log-concavity of a sampled section function.

    Evaluated as ``psi_i^2 >= psi_{i-1} psi_{i+1}``, which avoids taking logs
    of values that vanish at the ends of the support.
    """
    rep = CheckReport("log-concave profile", tol=tol)
    p = np.asarray(profile.psi, dtype=float)[1:-1]
    if p.size >= 3:
        defect = float(np.min(p[1:-1] ** 2 - p[:-2] * p[2:]))
    else:
        defect = 0.0
    rep.add("psi^2 - neighbours", 0.0, min(0.0, defect), math.inf)
    return rep

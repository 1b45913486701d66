"""Verification suites producing flat CSV rows.

Each suite returns a list of :class:`VerificationRow`; a row passes iff
``lower - tolerance <= value <= upper + tolerance``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields

import numpy as np

from .body import make_standard_body, support
from .distances import bm_theorem_bound, log_hausdorff, log_hausdorff_at
from .floating import (cap_bound_breakdown, direction_set, floating_body,
                       inner_bound_check, theorem1_sandwich)
from .isotropic import check_central_section, to_isotropic
from .logconcave import (E_INV, check_brunn, check_centroid_mass,
                         check_log_concave_profile, check_quantile_bracket, check_rigidity,
                         check_tail, density_battery)
from .measure import ball_volume, cap_quantile, centroid, section_profile

BODIES = ("cube", "simplex", "cross_polytope")
LEMMA_RHOS = (0.01, 0.05, 0.1, 0.2, 0.3)
TAIL_GRID = np.arange(0.0, 10.0 + 1e-12, 0.25)
THM3_FLOOR = 0.5


@dataclass
class VerificationRow:
    suite: str
    body: str
    dim: int
    delta: float
    quantity: str
    lower: float
    value: float
    upper: float
    passed: bool
    tolerance: float


def make_row(suite, body, dim, delta, quantity, lower, value, upper, tol):
    lower, value, upper = float(lower), float(value), float(upper)
    ok = lower - tol <= value <= upper + tol
    return VerificationRow(suite, body, int(dim), float(delta), quantity,
                           lower, value, upper, bool(ok), float(tol))


def report_rows(report, suite, body, dim, delta, skip_prefix=None):
    out = []
    for q, lo, v, hi in report.rows:
        if skip_prefix and q.startswith(skip_prefix):
            continue
        out.append(make_row(suite, body, dim, delta, q, lo, v, hi, report.tol))
    return out


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [f.name for f in fields(VerificationRow)]
    w.writerow(["pass" if n == "passed" else n for n in names])
    for r in sorted(rows, key=lambda r: (r.suite, r.body, r.dim, r.delta)):
        w.writerow([_fmt(getattr(r, n)) for n in names])
    return buf.getvalue()


def all_pass(rows) -> bool:
    return all(r.passed for r in rows)


# ---------------------------------------------------------------- small-delta inclusion

def verify_thm2(dims=(2, 3), deltas=None, bodies=BODIES, n=None):
    """Inner inclusion, distance bound, simplex sharpness, Banach-Mazur bound."""
    rows = []
    for d in dims:
        if d not in (2, 3):
            raise ValueError("the inclusion suite runs in dimensions 2 and 3")
        dl = deltas if deltas is not None else (8.0 ** -d, 8.0 ** -d / 4.0)
        for delta in dl:
            if not 0 < delta <= 8.0 ** -d:
                raise ValueError(f"delta {delta} exceeds 8^-{d}")
            u = delta ** (1.0 / d)
            for shape in bodies:
                k = make_standard_body(shape, d)
                name = k.label
                fb = floating_body(k, delta, n)
                rows += report_rows(inner_bound_check(k, fb), "thm2-inner", name, d, delta)
                rep = log_hausdorff(k, fb.outer, center=centroid(k))
                rows.append(make_row("thm2-distance", name, d, delta, "dL(K,outer,centroid)",
                                     1.0, rep.dLAtCentroid, 1.0 + 8.0 * u, 1e-6))
                rows.append(make_row("thm2-bm", name, d, delta, "dL_opt^2",
                                     1.0, rep.dBMUpper, bm_theorem_bound(delta, d), 1e-6))
                if shape == "simplex":
                    e1 = np.eye(d)[0]
                    i = int(np.argmin(np.linalg.norm(fb.directions - e1, axis=1)))
                    rows.append(make_row("thm2-sharpness", name, d, delta, "depth(e1)",
                                         1.0 - u, fb.depths[i], 1.0 - u, 1e-9))
                    rows.append(make_row("thm2-sharpness", name, d, delta, "dL_opt(K,outer)",
                                         1.0 + 0.5 * u, rep.dLOptimized, math.inf, 1e-6))
    return rows


# ---------------------------------------------------------------- isotropic sandwich

def verify_thm1(dims=(2, 3), deltas=(0.05, 0.1, 0.2, 0.3), bodies=BODIES, n=None):
    """Cut levels of isotropic bodies between the two radii."""
    rows = []
    for d in dims:
        for shape in bodies:
            k = make_standard_body(shape, d)
            iso, form = to_isotropic(k)
            for delta in deltas:
                if not 0 < delta < E_INV:
                    raise ValueError("delta must lie in (0, 1/e)")
                fb = floating_body(iso, delta, n)
                rep = theorem1_sandwich(iso, fb, form.LK)
                rows += report_rows(rep, "thm1-sandwich", iso.label, d, delta, "t[")
    return rows


# ---------------------------------------------------------------- one-dimensional densities

def verify_lemmas(battery=None, rhos=LEMMA_RHOS, t_grid=TAIL_GRID):
    rows = []
    for f in battery or density_battery():
        rows += report_rows(check_rigidity(f), "lemma-rigidity", f.name, 1, 0.0)
        for rho in rhos:
            rows += report_rows(check_quantile_bracket(f, rho), "lemma-quantile",
                                f.name, 1, rho)
        rows += report_rows(check_tail(f, t_grid), "lemma-tail", f.name, 1, 0.0)
        rows += report_rows(check_centroid_mass(f), "lemma-centroid-mass", f.name, 1, 0.0)
    return rows


# ---------------------------------------------------------------- sections

def verify_sections(dims=(2, 3), bodies=("cube", "simplex"), n_fan=32, grid=20,
                    profile_grid=257):
    """Central sections, cap lower bounds and Brunn concavity."""
    rows = []
    for d in dims:
        for shape in bodies:
            k = make_standard_body(shape, d)
            iso, form = to_isotropic(k)
            fan = direction_set(d, n_fan, None, seed=0)[:n_fan]
            rows += report_rows(check_central_section(iso, fan, form.LK),
                                "central-section", iso.label, d, 0.0)
            for j, th in enumerate(direction_set(d, 2 * d + 4, k)[: 2 * d + 4]):
                m = float(cap_quantile(k, th, 0.5))
                h = float(support(k, th))
                worst = math.inf
                at_median = None
                for t in np.linspace(m, h, grid):
                    b = cap_bound_breakdown(k, th, float(t), median=m)
                    worst = min(worst, b.aT - b.primaryLB, b.aT - b.secondaryLB,
                                b.aT - b.combinedLB)
                    if at_median is None:
                        at_median = b
                rows.append(make_row("cap-bounds", k.label, d, 0.0,
                                     f"min A-LB dir{j}", 0.0, worst, math.inf, 1e-9))
                rows.append(make_row("cap-bounds", k.label, d, 0.0,
                                     f"A(m)-combinedLB(m) dir{j}", 0.0,
                                     at_median.aT - at_median.combinedLB, 0.0, 1e-9))
                prof = section_profile(k, th, profile_grid)
                rows += report_rows(check_brunn(prof, d), "brunn", k.label, d, 0.0)
                rows += report_rows(check_log_concave_profile(prof), "log-concave-profile",
                                    k.label, d, 0.0)
    return rows


# ---------------------------------------------------------------- dimension trend

@dataclass(frozen=True)
class Theorem3Report:
    dim: int
    delta: float
    dL: float
    vd: float
    ratio: float
    radiusUpper: float
    mode: str


def thm3_trend(dims=range(2, 7), delta=0.1, shape="cube", mc_from=4, samples=None,
               seed=0, n=None):
    """Log-Hausdorff distance to the floating body across dimensions.

    Returns ``(reports, rows)``. Rows pin the ratio above a fixed floor and
    check that every cut level is within the ball of radius
    ``10 L_K ln(2/delta)``.
    """
    reports, rows = [], []
    for d in dims:
        k = make_standard_body(shape, d)
        iso, form = to_isotropic(k)
        mode = "mc" if d >= mc_from else "exact"
        fb = floating_body(iso, delta, n, mode=mode, seed=seed, samples=samples)
        c = centroid(iso)
        dl, _ = log_hausdorff_at(iso, fb.outer, c)
        ratio = dl * math.log(2.0 / delta) / d ** 0.25
        r_up = float(10.0 * form.LK * math.log(2.0 / delta))
        reports.append(Theorem3Report(d, delta, dl, ball_volume(d), ratio, r_up, mode))
        rows.append(make_row("thm3-trend", iso.label, d, delta, "ratio",
                             THM3_FLOOR, ratio, math.inf, 0.0))
        rows.append(make_row("thm3-trend", iso.label, d, delta, "max depth",
                             -math.inf, float(np.max(fb.depths - fb.directions @ c)),
                             r_up, 1e-9))
    return reports, rows


def thm3_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dim", "delta", "dL", "vd", "ratio", "radiusUpper", "mode"])
    for r in reports:
        w.writerow([r.dim, repr(r.delta), repr(r.dL), repr(r.vd), repr(r.ratio),
                    repr(r.radiusUpper), r.mode])
    return buf.getvalue()

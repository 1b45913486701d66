"""Isotropic position: centroid at 0, unit volume, covariance L_K^2 I."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .body import ConvexBody, GeometryError, affine_image
from .logconcave import E_INV, CheckReport
from .measure import cap_quantile, centroid, covariance, marginal_density, volume

MAX_CONDITION = 1e10


@dataclass(frozen=True)
class IsotropicForm:
    """``x -> matrix @ (x - shift)`` maps the body to isotropic position."""

    matrix: np.ndarray
    shift: np.ndarray
    LK: float

    def to_dict(self) -> dict:
        return {"matrix": [[float(x) for x in row] for row in self.matrix],
                "shift": [float(x) for x in self.shift], "LK": float(self.LK)}

    @classmethod
    def from_dict(cls, data: dict) -> "IsotropicForm":
        return cls(np.asarray(data["matrix"], dtype=float),
                   np.asarray(data["shift"], dtype=float), float(data["LK"]))

    def apply(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.shift) @ self.matrix.T


def inverse_sqrt_spd(cov: np.ndarray) -> np.ndarray:
    """Principal inverse square root of a symmetric positive definite matrix."""
    w, q = np.linalg.eigh(0.5 * (cov + cov.T))
    if w.min() <= 0 or w.max() / w.min() > MAX_CONDITION:
        raise GeometryError("covariance is singular or badly conditioned")
    return (q / np.sqrt(w)) @ q.T


def to_isotropic(body: ConvexBody) -> tuple[ConvexBody, IsotropicForm]:
    d = body.dim
    b = centroid(body)
    cov = covariance(body)
    white = inverse_sqrt_spd(cov)
    # whitening scales volume by det(cov)^(-1/2); rescale to unit volume
    vol_white = volume(body) * abs(np.linalg.det(white))
    s = vol_white ** (-1.0 / d)
    m = s * white
    iso = affine_image(body, m, -m @ b)
    label = f"iso({body.label})" if body.label else "iso"
    return iso.with_label(label), IsotropicForm(m, b, float(s))


def isotropic_constant(body: ConvexBody) -> float:
    return to_isotropic(body)[1].LK


def isotropy_residuals(body: ConvexBody, LK: float) -> dict:
    """Deviation from unit volume, zero centroid and covariance LK^2 I."""
    cov = covariance(body)
    return {
        "volume": abs(volume(body) - 1.0),
        "centroid": float(np.linalg.norm(centroid(body))),
        "covariance": float(np.max(np.abs(cov - LK * LK * np.eye(body.dim)))),
    }


def check_halfspace_depth_bracket(body_iso: ConvexBody, theta, rho: float, LK: float,
                                  tol: float = 1e-9) -> CheckReport:
    """Level of a cap of mass ``rho`` lies in ``[(1/e - rho) L, 10 ln(2/rho) L]``."""
    if not 0.0 < rho < E_INV:
        raise GeometryError("rho must lie in (0, 1/e)")
    th = np.atleast_2d(np.asarray(theta, dtype=float))
    depths = np.atleast_1d(cap_quantile(body_iso, th, rho))
    rep = CheckReport("halfspace depth", tol=tol)
    lo, hi = (E_INV - rho) * LK, 10.0 * math.log(2.0 / rho) * LK
    for i, t in enumerate(depths):
        rep.add(f"t[{i}]", lo, t, hi)
    return rep


def check_central_section(body_iso: ConvexBody, theta, LK: float,
                          tol: float = 1e-9) -> CheckReport:
    """Central section mass ``psi_theta(0)`` in ``[1/(8 L), 1/L]``.

    With unit volume the section function at the centroid hyperplane is the
    integral of the uniform density over that hyperplane.
    """
    th = np.atleast_2d(np.asarray(theta, dtype=float))
    th = th / np.linalg.norm(th, axis=1, keepdims=True)
    c = centroid(body_iso)
    vals = np.atleast_1d(marginal_density(body_iso, th, th @ c))
    rep = CheckReport("central section", tol=tol)
    for i, v in enumerate(vals):
        rep.add(f"psi[{i}](0)", 1.0 / (8.0 * LK), v, 1.0 / LK)
    rep.add("max/min", 1.0, vals.max() / vals.min(), 8.0)
    return rep

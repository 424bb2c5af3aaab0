"""Euclidean helpers: ball volumes, sphere caps, affine planes.

Conventions used throughout the toolkit:
  - omega(n)  = volume of the unit ball in R^n
  - sigma(n)  = area of the unit sphere S^{n-1} bounding it, i.e. n * omega(n)
  - balls are closed; a k-plane is stored as a base point plus k orthonormal
    row vectors (k = 0 is a point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc, gammaln

from .errors import InputError


def omega(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1.0))


def sigma(n: int) -> float:
    """Area of the unit sphere S^{n-1} in R^n."""
    return n * omega(n)


def cap_area_fraction(n: int, cos_theta):
    """Fraction of S^{n-1} lying within angle theta of a pole.

    Vectorized in cos_theta; exact endpoints (fraction 0 at cos=1,
    1 at cos=-1).  Uses the regularized incomplete beta function.
    """
    c = np.clip(np.asarray(cos_theta, dtype=float), -1.0, 1.0)
    s2 = 1.0 - c * c
    half = 0.5 * betainc(0.5 * (n - 1), 0.5, s2)
    return np.where(c >= 0.0, half, 1.0 - half)


def sphere_ball_intersection_area(n: int, s, d, t):
    """Area of the sphere {|z| = s} inside the ball B_t(x) with |x| = d.

    Vectorized in s.  Degenerate cases: full sphere when s <= t - d,
    empty when s >= t + d (or s < d - t).
    """
    s = np.asarray(s, dtype=float)
    area = sigma(n) * s ** (n - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_t = (s * s + d * d - t * t) / (2.0 * s * d) if d > 0 else None
    if d == 0.0:
        return np.where(s <= t, area, 0.0)
    frac = cap_area_fraction(n, np.where(np.isfinite(cos_t), cos_t, 1.0))
    out = area * frac
    out = np.where(s <= t - d, area, out)
    out = np.where((s >= t + d) | (s <= d - t), 0.0, out)
    return out


def random_directions(n: int, count: int, seed: int) -> np.ndarray:
    """Deterministic set of unit vectors in R^n (seeded Gaussian, normalized)."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, n))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return v / norms


def orthonormalize(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Gram-Schmidt on the rows; drops rows that fall below tol in norm."""
    basis: list[np.ndarray] = []
    for v in np.atleast_2d(np.asarray(vectors, dtype=float)):
        w = v.copy()
        for b in basis:
            w -= np.dot(w, b) * b
        nw = np.linalg.norm(w)
        if nw > tol:
            basis.append(w / nw)
    if not basis:
        return np.zeros((0, vectors.shape[-1]))
    return np.array(basis)


@dataclass(frozen=True)
class AffinePlane:
    """A k-dimensional affine plane: base point plus orthonormal basis rows."""

    base: np.ndarray
    basis: np.ndarray  # shape (k, n); k may be 0

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 2 or basis.shape[1] != base.shape[0]:
            raise InputError("plane basis must be (k, n) matching the base point")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "basis", basis)

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.base.shape[0]

    def project(self, points: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float)) - self.base
        if self.k == 0:
            return np.broadcast_to(self.base, p.shape).copy()
        coeff = p @ self.basis.T
        return self.base + coeff @ self.basis

    def dist2(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        diff = points - self.project(points)
        return np.einsum("ij,ij->i", diff, diff)

    def dist(self, points: np.ndarray) -> np.ndarray:
        return np.sqrt(self.dist2(points))

    def angle_to(self, other: "AffinePlane") -> float:
        """Largest principal angle between the two linear parts (radians)."""
        if self.k != other.k:
            return math.pi / 2.0
        if self.k == 0:
            return 0.0
        s = np.linalg.svd(self.basis @ other.basis.T, compute_uv=False)
        s = np.clip(s, -1.0, 1.0)
        return float(np.arccos(s.min()))

    def meets_ball(self, center: np.ndarray, radius: float) -> bool:
        return float(self.dist(np.asarray(center, dtype=float)[None, :])[0]) <= radius


def dist_to_affine_span(point: np.ndarray, base: np.ndarray,
                        increments: np.ndarray) -> float:
    """Distance from `point` to base + span(increments) (rows, may be empty)."""
    diff = np.asarray(point, dtype=float) - np.asarray(base, dtype=float)
    incs = np.atleast_2d(np.asarray(increments, dtype=float))
    if incs.size == 0:
        return float(np.linalg.norm(diff))
    basis = orthonormalize(incs)
    if basis.shape[0] == 0:
        return float(np.linalg.norm(diff))
    resid = diff - basis.T @ (basis @ diff)
    return float(np.linalg.norm(resid))


def check_finite(arr: np.ndarray, what: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"non-finite values in {what}")
    return arr

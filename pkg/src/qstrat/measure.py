"""Discretized Radon measures with ball queries, densities theta, and blow-ups.

Two concrete representations are provided here:

  * WeightedPointMeasure -- finite atomic measure with a KD-tree index.
    Ball queries are exact: they return precisely the atoms with
    |position - center| <= radius (closed ball) and reduce the weights in
    ascending atom-id order, so results are reproducible bit for bit.
  * GridDensity -- scalar density samples on a regular grid, read as the
    measure (value * h^n per cell).  Ball masses use cell-center membership.

Any object exposing ``dim``, ``mass_in_ball`` and ``mass_in_ball_many`` can
stand in for a measure elsewhere in the toolkit (the synthetic generators
add table-backed analytic measures with the same surface).
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InputError
from .geometry import check_finite

_WPM_FORMAT = "wpm-v1"
_GRD_MAGIC = b"GRD1"


@dataclass(frozen=True)
class DensityExponent:
    """Scaling exponent p in theta(x, r) = r^(p-n) mu(B_r(x)).

    p = 4 is the curvature-energy case; p = 2 the harmonic-map energy case.
    """

    p: float

    def validate(self, dim: int) -> "DensityExponent":
        if not (2.0 <= self.p <= dim):
            raise InputError(f"density exponent p={self.p} outside [2, n={dim}]")
        return self


class WeightedPointMeasure:
    """Finite atomic approximation of a Radon measure."""

    def __init__(self, points: np.ndarray, weights: np.ndarray):
        points = check_finite(np.atleast_2d(np.asarray(points, dtype=float)),
                              "atom positions")
        weights = check_finite(np.asarray(weights, dtype=float).ravel(),
                               "atom weights")
        if points.ndim != 2:
            raise InputError("points must be a (N, n) array")
        if points.shape[0] != weights.shape[0]:
            raise InputError("points and weights must have equal length")
        if points.shape[1] < 1:
            raise InputError("ambient dimension must be >= 1")
        if np.any(weights < 0.0):
            raise InputError("weights must be nonnegative")
        self.points = points
        self.weights = weights
        self.dim = points.shape[1]
        self.total_mass = float(np.sum(weights))
        self._tree = cKDTree(points) if len(points) else None
        self._resolution = None

    def __len__(self) -> int:
        return self.points.shape[0]

    # -- queries ---------------------------------------------------------

    def ball_indices(self, x: np.ndarray, r: float) -> np.ndarray:
        """Atom ids inside the closed ball, ascending (index order fixes
        the reduction order regardless of tree construction)."""
        if r < 0.0 or not math.isfinite(r):
            raise InputError(f"ball radius must be finite and >= 0, got {r}")
        x = check_finite(np.asarray(x, dtype=float).ravel(), "ball center")
        if x.shape[0] != self.dim:
            raise InputError("center dimension mismatch")
        if self._tree is None:
            return np.empty(0, dtype=np.intp)
        idx = self._tree.query_ball_point(x, r, return_sorted=True)
        return np.asarray(idx, dtype=np.intp)

    def mass_in_ball(self, x: np.ndarray, r: float) -> float:
        idx = self.ball_indices(x, r)
        if idx.size == 0:
            return 0.0
        return float(np.sum(self.weights[idx]))

    def mass_in_ball_many(self, centers: np.ndarray, radii) -> np.ndarray:
        """Masses for a batch of closed balls; radii may be scalar or per-center."""
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        radii = np.broadcast_to(np.asarray(radii, dtype=float), centers.shape[:1])
        if self._tree is None:
            return np.zeros(centers.shape[0])
        out = np.empty(centers.shape[0])
        lists = self._tree.query_ball_point(centers, radii, return_sorted=True)
        w = self.weights
        for i, idx in enumerate(lists):
            out[i] = np.sum(w[np.asarray(idx, dtype=np.intp)]) if idx else 0.0
        return out

    def atoms_in_ball(self, x: np.ndarray, r: float) -> np.ndarray:
        idx = self.ball_indices(x, r)
        return self.points[idx]

    # -- metadata --------------------------------------------------------

    @property
    def resolution(self) -> float:
        """Scale floor: 1%-quantile of nearest-neighbor distances."""
        if self._resolution is None:
            if len(self) < 2:
                res = math.inf
            else:
                d, _ = self._tree.query(self.points, k=2)
                res = float(np.quantile(d[:, 1], 0.01))
            self._resolution = res
        return self._resolution

    def bounding_radius(self, center: np.ndarray) -> float:
        if len(self) == 0:
            return 0.0
        diff = self.points - np.asarray(center, dtype=float)
        return float(np.sqrt(np.einsum("ij,ij->i", diff, diff).max()))

    def translated(self, shift: np.ndarray) -> "WeightedPointMeasure":
        return WeightedPointMeasure(self.points + np.asarray(shift, dtype=float),
                                    self.weights.copy())


class GridDensity:
    """Nonnegative density samples on a regular grid (row-major values)."""

    def __init__(self, origin: np.ndarray, spacing: float, values: np.ndarray):
        origin = check_finite(np.asarray(origin, dtype=float).ravel(), "grid origin")
        values = np.asarray(values, dtype=float)
        if spacing <= 0.0 or not math.isfinite(spacing):
            raise InputError(f"grid spacing must be positive, got {spacing}")
        if values.ndim != origin.shape[0]:
            raise InputError("values rank must equal the ambient dimension")
        if not np.all(np.isfinite(values)):
            raise InputError("non-finite density values")
        if np.any(values < 0.0):
            raise InputError("density values must be nonnegative")
        self.origin = origin
        self.spacing = float(spacing)
        self.values = values
        self.dim = origin.shape[0]
        self.extents = values.shape
        self.total_mass = float(np.sum(values)) * self.spacing ** self.dim

    @property
    def resolution(self) -> float:
        return self.spacing

    def cell_center(self, index) -> np.ndarray:
        return self.origin + (np.asarray(index, dtype=float) + 0.5) * self.spacing

    def axis_centers(self, axis: int) -> np.ndarray:
        return self.origin[axis] + (np.arange(self.extents[axis]) + 0.5) * self.spacing

    def _window(self, x: np.ndarray, r: float):
        lo, hi = [], []
        for ax in range(self.dim):
            a = int(math.floor((x[ax] - r - self.origin[ax]) / self.spacing - 0.5))
            b = int(math.ceil((x[ax] + r - self.origin[ax]) / self.spacing - 0.5))
            lo.append(max(a, 0))
            hi.append(min(b + 1, self.extents[ax]))
        return lo, hi

    def mass_in_ball(self, x: np.ndarray, r: float) -> float:
        """Midpoint-rule ball mass: each cell contributes its full mass iff
        its center lies in the closed ball.  Slabbed along axis 0 so memory
        stays bounded by one slab of the index window."""
        if r < 0.0 or not math.isfinite(r):
            raise InputError(f"ball radius must be finite and >= 0, got {r}")
        x = check_finite(np.asarray(x, dtype=float).ravel(), "ball center")
        if x.shape[0] != self.dim:
            raise InputError("center dimension mismatch")
        lo, hi = self._window(x, r)
        if any(l >= h for l, h in zip(lo, hi)):
            return 0.0
        rest_d2 = np.zeros(tuple(h - l for l, h in zip(lo[1:], hi[1:])))
        for ax in range(1, self.dim):
            c = self.axis_centers(ax)[lo[ax]:hi[ax]] - x[ax]
            shape = [1] * (self.dim - 1)
            shape[ax - 1] = c.shape[0]
            rest_d2 = rest_d2 + (c * c).reshape(shape)
        c0 = self.axis_centers(0)[lo[0]:hi[0]] - x[0]
        sel = tuple(slice(l, h) for l, h in zip(lo[1:], hi[1:]))
        r2 = r * r
        total = 0.0
        for i in range(c0.shape[0]):
            slab = self.values[lo[0] + i][sel]
            mask = rest_d2 + c0[i] * c0[i] <= r2
            total += float(np.sum(slab[mask]))
        return total * self.spacing ** self.dim

    def mass_in_ball_many(self, centers: np.ndarray, radii) -> np.ndarray:
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        radii = np.broadcast_to(np.asarray(radii, dtype=float), centers.shape[:1])
        return np.array([self.mass_in_ball(c, r) for c, r in zip(centers, radii)])

    def to_point_measure(self, max_cells: int = 50_000_000) -> WeightedPointMeasure:
        """Induced atomic measure: one atom per cell center, weight value*h^n."""
        ncells = int(np.prod(self.extents))
        if ncells > max_cells:
            raise InputError(f"grid too large to materialize ({ncells} cells)")
        axes = [self.axis_centers(ax) for ax in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        w = self.values.ravel() * self.spacing ** self.dim
        return WeightedPointMeasure(pts, w)


class RescaledMeasure:
    """Blow-up view of an arbitrary ball-queryable measure.

    mass(E) = lam^(p-n) * base(lam*E + x); theta of the view at (0, r)
    equals theta of the base at (x, lam*r) exactly.
    """

    def __init__(self, base, x: np.ndarray, lam: float, exponent: DensityExponent):
        if lam <= 0.0 or not math.isfinite(lam):
            raise InputError(f"blow-up scale must be positive, got {lam}")
        self.base = base
        self.center = check_finite(np.asarray(x, dtype=float).ravel(), "blow-up center")
        self.lam = float(lam)
        self.dim = base.dim
        self.exponent = exponent.validate(base.dim)
        self._factor = self.lam ** (exponent.p - base.dim)

    @property
    def resolution(self) -> float:
        return getattr(self.base, "resolution", 0.0) / self.lam

    def mass_in_ball(self, x: np.ndarray, r: float) -> float:
        x = np.asarray(x, dtype=float).ravel()
        return self._factor * self.base.mass_in_ball(self.center + self.lam * x,
                                                     self.lam * r)

    def mass_in_ball_many(self, centers: np.ndarray, radii) -> np.ndarray:
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        radii = np.asarray(radii, dtype=float)
        return self._factor * self.base.mass_in_ball_many(
            self.center + self.lam * centers, self.lam * radii)


# -- operations ----------------------------------------------------------


def mass_in_ball(mu, x: np.ndarray, r: float) -> float:
    """mu(B_r(x)) for the closed ball; dispatches on the measure's own method."""
    if r <= 0.0:
        raise InputError(f"ball radius must be positive, got {r}")
    return mu.mass_in_ball(x, r)


def theta(mu, x: np.ndarray, r: float, exponent: DensityExponent) -> float:
    """Monotone density theta(x, r) = r^(p-n) mu(B_r(x))."""
    if r <= 0.0 or not math.isfinite(r):
        raise InputError(f"theta radius must be positive, got {r}")
    exponent.validate(mu.dim)
    return r ** (exponent.p - mu.dim) * mu.mass_in_ball(x, r)


def theta_many(mu, centers: np.ndarray, radii, exponent: DensityExponent) -> np.ndarray:
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.broadcast_to(np.asarray(radii, dtype=float), centers.shape[:1])
    if np.any(radii <= 0.0):
        raise InputError("theta radii must be positive")
    exponent.validate(mu.dim)
    masses = mu.mass_in_ball_many(centers, radii)
    return radii ** (exponent.p - mu.dim) * masses


def rescale_blowup(mu, x: np.ndarray, lam: float, exponent: DensityExponent):
    """Blow-up mu_lam with mu_lam(E) = lam^(p-n) mu(lam E + x).

    Point measures map to point measures (atom at (q-x)/lam with weight
    lam^(p-n) w); other measures return a rescaled view with the same
    query surface.
    """
    if lam <= 0.0 or not math.isfinite(lam):
        raise InputError(f"blow-up scale must be positive, got {lam}")
    exponent.validate(mu.dim)
    x = check_finite(np.asarray(x, dtype=float).ravel(), "blow-up center")
    if isinstance(mu, WeightedPointMeasure):
        factor = lam ** (exponent.p - mu.dim)
        return WeightedPointMeasure((mu.points - x) / lam, mu.weights * factor)
    if isinstance(mu, GridDensity):
        return rescale_blowup(mu.to_point_measure(), x, lam, exponent)
    return RescaledMeasure(mu, x, lam, exponent)


# -- file formats --------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_wpm(path: str, mu: WeightedPointMeasure) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": mu.dim, "format": _WPM_FORMAT}) + "\n")
        for p, w in zip(mu.points, mu.weights):
            fh.write('{"x":[' + ",".join(_fmt(c) for c in p)
                     + '],"w":' + _fmt(w) + "}\n")


def read_wpm(path: str) -> WeightedPointMeasure:
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad wpm header: {exc}") from exc
        if header.get("format") != _WPM_FORMAT or "dim" not in header:
            raise InputError("not a wpm-v1 file")
        dim = int(header["dim"])
        pts, wts = [], []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                x = rec["x"]
                w = rec["w"]
            except (json.JSONDecodeError, KeyError) as exc:
                raise InputError(f"bad atom record on line {lineno}") from exc
            if len(x) != dim:
                raise InputError(f"atom dimension mismatch on line {lineno}")
            pts.append(x)
            wts.append(w)
    if not pts:
        return WeightedPointMeasure(np.zeros((0, dim)), np.zeros(0))
    return WeightedPointMeasure(np.asarray(pts), np.asarray(wts))


def write_grd(path: str, grid: GridDensity) -> None:
    with open(path, "wb") as fh:
        fh.write(_GRD_MAGIC)
        fh.write(struct.pack("<I", grid.dim))
        fh.write(np.asarray(grid.origin, dtype="<f8").tobytes())
        fh.write(struct.pack("<d", grid.spacing))
        fh.write(np.asarray(grid.extents, dtype="<u4").tobytes())
        fh.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes())


def read_grd(path: str) -> GridDensity:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _GRD_MAGIC:
            raise InputError("not a GRD1 file")
        (dim,) = struct.unpack("<I", fh.read(4))
        origin = np.frombuffer(fh.read(8 * dim), dtype="<f8")
        (spacing,) = struct.unpack("<d", fh.read(8))
        extents = np.frombuffer(fh.read(4 * dim), dtype="<u4").astype(int)
        count = int(np.prod(extents))
        values = np.frombuffer(fh.read(8 * count), dtype="<f8")
        if values.shape[0] != count:
            raise InputError("truncated GRD1 payload")
        return GridDensity(origin, spacing, values.reshape(tuple(extents)).copy())

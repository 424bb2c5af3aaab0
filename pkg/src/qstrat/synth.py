"""Synthetic measures and curvature fields with known ground truth.

Everything here is deterministic: all randomness flows from an explicit
seed, and identical specs produce bit-identical artifacts.

The cone generators return both a sampled representation (atoms / grid,
for I/O and perturbation tests) and an analytic measure whose ball masses
come from a precomputed one-variable profile table,

    mu(B_t(y)) = c * t^(n-4) * G(dist(y, V) / t),

which is exact for the homogeneous density c * d(x, V)^-4 by scaling and
translation invariance along the plane V.  The tables make tip drops and
symmetry scans cheap (vectorized interpolation) and accurate to ~1e-6,
far below every tolerance asserted on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import InputError, NonintegrableError
from .field import CurvatureField
from .geometry import AffinePlane, omega, random_directions, sigma
from .measure import GridDensity, WeightedPointMeasure
from .quadrature import radial_ball_mass

Array = np.ndarray


# -- 't Hooft symbols and the instanton field ------------------------------


def thooft_symbols() -> Array:
    """Self-dual 't Hooft symbols eta^a_ij, shape (3, 4, 4)."""
    eta = np.zeros((3, 4, 4))
    for a in range(3):
        i, j = (a + 1) % 3, (a + 2) % 3
        eta[a, i, j] = 1.0
        eta[a, j, i] = -1.0
        eta[a, a, 3] = 1.0
        eta[a, 3, a] = -1.0
    return eta


def hodge_dual_4d(F: Array) -> Array:
    """(star F)^a_ij = (1/2) eps_ijkl F^a_kl for (..., 4, 4) components."""
    eps = np.zeros((4, 4, 4, 4))
    from itertools import permutations
    for perm in permutations(range(4)):
        sign = 1.0
        p = list(perm)
        for i in range(4):
            for j in range(i + 1, 4):
                if p[i] > p[j]:
                    sign = -sign
        eps[perm] = sign
    return 0.5 * np.einsum("ijkl,...kl->...ij", eps, F)


@dataclass
class InstantonPackage:
    """Closed-form self-dual test field: |F|^2 = 48 rho^4 / (|x-c|^2 + rho^2)^4."""

    rho: float
    center: Array
    field: CurvatureField

    def norm2_profile(self) -> Callable[[Array], Array]:
        rho4 = self.rho ** 4

        def g(s: Array) -> Array:
            s = np.asarray(s, dtype=float)
            return 48.0 * rho4 / (s * s + self.rho ** 2) ** 4

        return g

    def density_measure(self) -> "RadialDensityMeasure":
        return RadialDensityMeasure(self.center, self.norm2_profile(), 4,
                                    name="instanton-density")

    def theta_exact(self, r: float, p: float = 4.0) -> float:
        """Closed-form theta(center, r) for the density above (n = 4)."""
        u = r * r + self.rho ** 2
        rho2 = self.rho ** 2
        integral = 48.0 * math.pi ** 2 * self.rho ** 4 * (
            -0.5 / u ** 2 + (rho2 / 3.0) / u ** 3
            + (0.5 - 1.0 / 3.0) / rho2 ** 2)
        return r ** (p - 4.0) * integral

    def total_energy_exact(self) -> float:
        return 8.0 * math.pi ** 2


def gen_instanton(rho: float, center: Optional[Array] = None,
                  domain_radius: float = 1e6) -> InstantonPackage:
    """Standard unit-charge self-dual curvature, scaled so that
    |F|^2(x) = 48 rho^4 / (|x - center|^2 + rho^2)^4 (n = 4, internal dim 3)."""
    if rho <= 0.0:
        raise InputError("instanton scale must be positive")
    c = np.zeros(4) if center is None else np.asarray(center, dtype=float).ravel()
    eta = thooft_symbols()

    def sampler(pts: Array) -> Array:
        rel = pts - c
        r2 = np.einsum("ij,ij->i", rel, rel)
        amp = 2.0 * rho ** 2 / (r2 + rho ** 2) ** 2
        return amp[:, None, None, None] * eta[None, :, :, :]

    def norm2_fast(pts: Array) -> Array:
        rel = pts - c
        r2 = np.einsum("ij,ij->i", rel, rel)
        return 48.0 * rho ** 4 / (r2 + rho ** 2) ** 4

    def contract_norm2_fast(pts: Array, v: Array) -> Array:
        # sum_a eta^a_ij eta^a_kj = 3 delta_ik, so |iota_v F|^2 = |v|^2 |F|^2 / 4
        v2 = np.einsum("ij,ij->i", v, v)
        return 0.25 * v2 * norm2_fast(pts)

    field = CurvatureField(
        dim=4, lie_dim=3, sampler=sampler, domain_center=c,
        domain_radius=domain_radius, norm2_fast=norm2_fast,
        contract_norm2_fast=contract_norm2_fast, radial_center=c,
        radial_norm2=lambda s: 48.0 * rho ** 4 / (np.asarray(s) ** 2 + rho ** 2) ** 4,
        name=f"instanton(rho={rho})")
    return InstantonPackage(rho=rho, center=c, field=field)


# -- analytic measures -----------------------------------------------------


class RadialDensityMeasure:
    """Measure with density g(|x - center|); ball masses by 1-d reduction."""

    def __init__(self, center: Array, profile: Callable[[Array], Array],
                 dim: int, inner_cut: float = 0.0, intervals: int = 2048,
                 name: str = "radial-density"):
        self.center = np.asarray(center, dtype=float).ravel()
        self.profile = profile
        self.dim = dim
        self.inner_cut = inner_cut
        self.intervals = intervals
        self.name = name
        self.resolution = 0.0
        self.total_mass = math.inf

    def mass_in_ball(self, x: Array, r: float) -> float:
        d = float(np.linalg.norm(np.asarray(x, dtype=float).ravel() - self.center))
        return radial_ball_mass(self.profile, self.dim, d, float(r),
                                self.inner_cut, self.intervals)

    def mass_in_ball_many(self, centers: Array, radii) -> Array:
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        radii = np.broadcast_to(np.asarray(radii, dtype=float), centers.shape[:1])
        d = np.linalg.norm(centers - self.center, axis=1)
        out = np.empty(centers.shape[0])
        for i in range(centers.shape[0]):
            out[i] = radial_ball_mass(self.profile, self.dim, float(d[i]),
                                      float(radii[i]), self.inner_cut,
                                      self.intervals)
        return out


class UniformMeasure:
    """Constant density c on all of R^n: mu(B_t) = c omega(n) t^n."""

    def __init__(self, dim: int, density: float = 1.0):
        self.dim = dim
        self.density = float(density)
        self.resolution = 0.0
        self.total_mass = math.inf
        self._cell = self.density * omega(dim)

    def mass_in_ball(self, x: Array, r: float) -> float:
        return self._cell * float(r) ** self.dim

    def mass_in_ball_many(self, centers: Array, radii) -> Array:
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        radii = np.broadcast_to(np.asarray(radii, dtype=float), centers.shape[:1])
        return self._cell * radii ** self.dim


def cone_profile_anchor(n: int, k: int) -> float:
    """Closed form for G(0): the unit-ball mass of d(x, V_k)^-4 seen from
    an on-plane point.  k = 0 gives sigma(n)/(n-4); otherwise
    omega_k sigma(m) B((m-4)/2, (k+2)/2) / 2 with m = n - k."""
    m = n - k
    if k == 0:
        return sigma(n) / (n - 4)
    from scipy.special import beta as beta_fn
    return omega(k) * sigma(m) * 0.5 * beta_fn(0.5 * (m - 4), 0.5 * (k + 2))


@lru_cache(maxsize=8)
def _cone_profile_table(n: int, k: int) -> tuple[Array, Array, float]:
    """Table of G(u) = mass(B_1(y), density d(x,V_k)^-4) at dist(y,V) = u.

    Returns (u_grid, values, tail_switch).  Beyond the last grid point the
    two-term far-field expansion G(u) ~ omega(n) u^-4 (1 + q/u^2) applies.
    """
    m = n - k
    if m < 5:
        raise NonintegrableError(
            f"d(x,V)^-4 is not locally integrable for n-k={m} < 5")
    u_grid = np.concatenate([
        np.linspace(0.0, 3.0, 4501),
        np.geomspace(3.0, 24.0, 1200)[1:],
    ])
    vals = np.empty(u_grid.shape[0])
    if k == 0:
        # Split the reduced integral at s = 1-u: below it the sphere lies
        # fully inside the ball and g * area = sigma(n) s^(n-5) integrates in
        # closed form; above it the integrand is bounded away from s = 0.
        def g(s):
            s = np.asarray(s, dtype=float)
            with np.errstate(divide="ignore"):
                return np.where(s > 0, s ** -4.0, 0.0)
        for i, u in enumerate(u_grid):
            if u < 1.0:
                inner = sigma(n) * (1.0 - u) ** (n - 4) / (n - 4)
                outer = _simpson_profile_area(g, n, float(u), 1.0,
                                              1.0 - float(u), 1.0 + float(u))
                vals[i] = inner + outer
            else:
                vals[i] = radial_ball_mass(g, n, float(u), 1.0, 0.0, 8192)
        return u_grid, vals, float(u_grid[-1])

    # k >= 1: G(u) = omega_k sigma(m-1) int rho^(m-5) J(rho, u) drho with
    # J the polar-angle integral, evaluated through zeta = sqrt(a + b cos)
    # so the (...)^{k/2} factor is smooth at the support edge.
    from numpy.polynomial.legendre import leggauss
    from scipy.special import beta as beta_fn
    zeta_nodes, zeta_w = leggauss(48)
    pw = 0.5 * (m - 3)
    chi_full = beta_fn(0.5, pw + 1.0)  # int_{-1}^{1} (1-chi^2)^pw dchi

    def J_column(rho: Array, u: float) -> Array:
        a = 1.0 - rho * rho - u * u
        b = 2.0 * rho * u
        hi2 = a + b                     # zeta^2 at cos = +1
        lo2 = np.maximum(a - b, 0.0)    # zeta^2 at cos = -1 (clipped to support)
        hi = np.sqrt(np.maximum(hi2, 0.0))
        lo = np.sqrt(lo2)
        mid = 0.5 * (hi + lo)
        half = 0.5 * (hi - lo)
        z = mid[:, None] + half[:, None] * zeta_nodes[None, :]
        bsafe = np.where(b > 0.0, b, 1.0)
        chi = np.clip((z * z - a[:, None]) / bsafe[:, None], -1.0, 1.0)
        poly = np.maximum(1.0 - chi * chi, 0.0) ** pw
        integ = poly * z ** (k + 1) * 2.0 / bsafe[:, None]
        col = half * np.einsum("rz,z->r", integ, zeta_w)
        col[hi2 <= 0.0] = 0.0
        # b -> 0 limit (rho or u vanishing): J = (a)_+^{k/2} * chi_full
        tiny = b <= 1e-9
        if np.any(tiny):
            col[tiny] = np.maximum(a[tiny], 0.0) ** (0.5 * k) * chi_full
        return col

    const = omega(k) * sigma(m - 1)
    for i, u in enumerate(u_grid):
        if u == 0.0:
            # exact on-plane anchor
            vals[i] = cone_profile_anchor(n, k)
            continue
        lo_r, hi_r = max(0.0, u - 1.0), u + 1.0
        panels = sorted({lo_r, abs(1.0 - u), 1.0 + u})
        panels = [p for p in panels if lo_r <= p <= hi_r]
        if panels[0] != lo_r:
            panels.insert(0, lo_r)
        total = 0.0
        for aa, bb in zip(panels[:-1], panels[1:]):
            if bb <= aa:
                continue
            rho = np.linspace(aa, bb, 1537)
            col = J_column(rho, float(u)) * rho ** (m - 5)
            total += float(np.trapezoid(col, rho))
        vals[i] = const * total
    return u_grid, vals, float(u_grid[-1])


class HomogeneousConeMeasure:
    """Density c * dist(x, V_k)^-4 with exact scaling: mass = c t^(n-4) G(d/t)."""

    def __init__(self, dim: int, k: int, amplitude: float = 1.0,
                 plane: Optional[AffinePlane] = None):
        if not (0 <= k <= dim - 5):
            raise NonintegrableError(
                f"homogeneous cone needs n-k >= 5, got n={dim}, k={k}")
        self.dim = dim
        self.k = k
        self.amplitude = float(amplitude)
        if plane is None:
            basis = np.eye(dim)[:k]
            plane = AffinePlane(np.zeros(dim), basis)
        self.plane = plane
        self.resolution = 0.0
        self.total_mass = math.inf
        self._u, self._g, self._switch = _cone_profile_table(dim, k)
        m = dim - k
        self._tail_q = 2.0 * (6 - m) / (dim + 2.0)

    @property
    def plane_theta(self) -> float:
        """theta at on-plane points (constant in scale): c * G(0)."""
        return self.amplitude * float(self._g[0])

    def _profile(self, u: Array) -> Array:
        u = np.asarray(u, dtype=float)
        core = np.interp(u, self._u, self._g)
        with np.errstate(divide="ignore"):
            tail = omega(self.dim) * u ** -4.0 * (1.0 + self._tail_q / (u * u))
        return np.where(u <= self._switch, core, tail)

    def mass_in_ball(self, x: Array, r: float) -> float:
        return float(self.mass_in_ball_many(np.asarray(x, dtype=float)[None, :], r)[0])

    def mass_in_ball_many(self, centers: Array, radii) -> Array:
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        radii = np.broadcast_to(np.asarray(radii, dtype=float),
                                centers.shape[:1]).astype(float)
        d = self.plane.dist(centers)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(radii > 0, d / radii, np.inf)
        return self.amplitude * radii ** (self.dim - 4.0) * self._profile(u)


class SegmentMeasure:
    """Theta * H^1 restricted to a segment; exact chord-length ball masses."""

    def __init__(self, a: Array, b: Array, weight: float = 1.0):
        self.a = np.asarray(a, dtype=float).ravel()
        self.b = np.asarray(b, dtype=float).ravel()
        self.weight = float(weight)
        self.dim = self.a.shape[0]
        seg = self.b - self.a
        self.length = float(np.linalg.norm(seg))
        self._dir = seg / self.length
        self.total_mass = self.weight * self.length
        self.resolution = 0.0

    def mass_in_ball(self, x: Array, r: float) -> float:
        return float(self.mass_in_ball_many(np.asarray(x)[None, :], r)[0])

    def mass_in_ball_many(self, centers: Array, radii) -> Array:
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        radii = np.broadcast_to(np.asarray(radii, dtype=float), centers.shape[:1])
        rel = centers - self.a
        t0 = rel @ self._dir
        perp2 = np.einsum("ij,ij->i", rel, rel) - t0 * t0
        half = np.sqrt(np.maximum(radii * radii - perp2, 0.0))
        lo = np.maximum(t0 - half, 0.0)
        hi = np.minimum(t0 + half, self.length)
        return self.weight * np.maximum(hi - lo, 0.0)


# -- cone curvature fields -------------------------------------------------


def _block_seed_form(d: int) -> Array:
    w = np.zeros((d, d))
    for i in range(0, d - 1, 2):
        w[i, i + 1] = 1.0
        w[i + 1, i] = -1.0
    return w


def _projected_form(unit: Array, seed: Array) -> Array:
    """B = P seed P with P = I - unit unit^T, batched over rows of `unit`."""
    su = np.einsum("ij,nj->ni", seed, unit)          # seed @ u
    us = np.einsum("nj,ji->ni", unit, seed)          # u^T seed
    B = seed[None, :, :] \
        - np.einsum("ni,nj->nij", unit, us) \
        - np.einsum("ni,nj->nij", su, unit)
    return B


@dataclass
class ConePackage:
    """A homogeneous cone: analytic measure, curvature field, samplers."""

    dim: int
    k: int
    amplitude: float
    inner_cut: float
    measure: HomogeneousConeMeasure
    field: CurvatureField
    plane: AffinePlane

    def point_measure(self, atoms: int = 120_000, seed: int = 0,
                      r_min: float = 1e-3, r_max: float = 2.0,
                      plane_extent: float = 2.0) -> WeightedPointMeasure:
        return _cone_point_measure(self.dim, self.k, self.amplitude, atoms,
                                   seed, r_min, r_max, plane_extent)

    def grid(self, h: float, extent: float = 1.0,
             max_cells: int = 40_000_000) -> GridDensity:
        return _cone_grid(self.dim, self.k, self.amplitude, self.inner_cut,
                          h, extent, max_cells)


def _cone_field(n: int, k: int, c: float, inner_cut: float) -> CurvatureField:
    d = n - k
    seed = _block_seed_form(d)

    def sampler(pts: Array) -> Array:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        w = pts[:, k:]
        dist = np.linalg.norm(w, axis=1)
        safe = np.where(dist == 0.0, 1.0, dist)
        unit = w / safe[:, None]
        B = _projected_form(unit, seed)
        nrm = np.sqrt(np.einsum("nij,nij->n", B, B))
        nrm = np.where(nrm == 0.0, 1.0, nrm)
        amp = np.where(dist == 0.0, 0.0, math.sqrt(c) / (safe * safe * nrm))
        out = np.zeros((pts.shape[0], 1, n, n))
        out[:, 0, k:, k:] = amp[:, None, None] * B
        return out

    def norm2_fast(pts: Array) -> Array:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        dist2 = np.einsum("ij,ij->i", pts[:, k:], pts[:, k:])
        with np.errstate(divide="ignore"):
            return np.where(dist2 > 0.0, c / (dist2 * dist2), 0.0)

    plane = AffinePlane(np.zeros(n), np.eye(n)[:k]) if k else None
    return CurvatureField(
        dim=n, lie_dim=1, sampler=sampler, domain_center=np.zeros(n),
        domain_radius=1e6, norm2_fast=norm2_fast,
        singular_radius=max(inner_cut, 1e-12),
        singular_points=np.zeros((1, n)) if k == 0 else np.zeros((0, n)),
        singular_plane=plane, name=f"cone(n={n},k={k})")


def _cone_point_measure(n: int, k: int, c: float, atoms: int, seed: int,
                        r_min: float, r_max: float,
                        plane_extent: float) -> WeightedPointMeasure:
    """Deterministic stratified sampling: geometric cross-distance bands with
    exact band masses, spread over seeded directions (and a plane lattice for
    k >= 1)."""
    m = n - k
    bands = 48
    edges = np.geomspace(r_min, r_max, bands + 1)
    # mass of {s1 < d(x,V) <= s2} per unit k-volume: c sigma(m) int s^(m-5) ds
    band_mass = c * sigma(m) * (edges[1:] ** (m - 4) - edges[:-1] ** (m - 4)) \
        / (m - 4)
    mids = np.sqrt(edges[:-1] * edges[1:])
    if k == 0:
        per_band = max(8, atoms // bands)
        pts_list, w_list = [], []
        for j in range(bands):
            dirs = random_directions(m, per_band, seed * 1009 + j)
            pts_list.append(mids[j] * dirs)
            w_list.append(np.full(per_band, band_mass[j] / per_band))
        return WeightedPointMeasure(np.vstack(pts_list), np.concatenate(w_list))

    stations_per_axis = max(4, int(round((atoms / (bands * 12)) ** (1.0 / k))))
    station_h = 2.0 * plane_extent / stations_per_axis
    axes = [(-plane_extent + (np.arange(stations_per_axis) + 0.5) * station_h)
            for _ in range(k)]
    mesh = np.meshgrid(*axes, indexing="ij")
    stations = np.stack([g.ravel() for g in mesh], axis=1)
    per_cell = max(4, atoms // (bands * stations.shape[0]))
    pts_list, w_list = [], []
    for j in range(bands):
        dirs = random_directions(m, per_cell, seed * 1009 + j)
        cross = mids[j] * dirs
        block = np.zeros((stations.shape[0] * per_cell, n))
        block[:, :k] = np.repeat(stations, per_cell, axis=0)
        block[:, k:] = np.tile(cross, (stations.shape[0], 1))
        w = band_mass[j] * station_h ** k / per_cell
        pts_list.append(block)
        w_list.append(np.full(block.shape[0], w))
    return WeightedPointMeasure(np.vstack(pts_list), np.concatenate(w_list))


def _cone_grid(n: int, k: int, c: float, inner_cut: float, h: float,
               extent: float, max_cells: int) -> GridDensity:
    counts = [max(2, int(round(2.0 * extent / h)))] * n
    if int(np.prod(counts)) > max_cells:
        raise InputError(f"cone grid would need {np.prod(counts)} cells")
    origin = np.full(n, -extent)
    axes = [origin[ax] + (np.arange(counts[ax]) + 0.5) * h for ax in range(n)]
    mesh = np.meshgrid(*axes[k:], indexing="ij")
    cross2 = np.zeros(mesh[0].shape)
    for g in mesh:
        cross2 += g * g
    dist = np.sqrt(cross2)
    vals_cross = np.where(dist >= inner_cut, c / np.maximum(dist, 1e-300) ** 4, 0.0)
    shape = tuple(counts)
    vals = np.broadcast_to(vals_cross, shape).copy()
    return GridDensity(origin, h, vals)


def gen_radial_cone(n: int, c: float = 1.0, inner_cut: float = 1e-3) -> ConePackage:
    """Density c |x|^-4 with a purely angular field (radial contraction 0)."""
    if n < 5:
        raise NonintegrableError("radial |x|^-4 cone needs n >= 5")
    if inner_cut <= 0.0:
        raise InputError("inner_cut must be positive")
    measure = HomogeneousConeMeasure(n, 0, c)
    field = _cone_field(n, 0, c, inner_cut)
    plane = AffinePlane(np.zeros(n), np.zeros((0, n)))
    return ConePackage(n, 0, c, inner_cut, measure, field, plane)


def gen_k_symmetric_cone(n: int, k: int, c: float = 1.0,
                         inner_cut: float = 1e-3) -> ConePackage:
    """Density c d(x, V_k)^-4, field annihilating V_k and the cross-radial
    direction; V_k = span(e_1..e_k)."""
    if n - k < 5:
        raise NonintegrableError("d(x,V_k)^-4 cone needs n - k >= 5")
    if not (1 <= k <= n - 5):
        raise InputError(f"k must be in [1, n-5], got {k}")
    measure = HomogeneousConeMeasure(n, k, c)
    field = _cone_field(n, k, c, inner_cut)
    plane = AffinePlane(np.zeros(n), np.eye(n)[:k])
    return ConePackage(n, k, c, inner_cut, measure, field, plane)


# -- defect measures and perturbations -------------------------------------


def gen_defect_measure(kind: str, weight: float, samples: int, n: int = 5,
                       radius: float = 1.0, k: int = 2) -> WeightedPointMeasure:
    """Atoms equi-spaced on a model set, weight = Theta * local H^k element."""
    if samples < 10:
        raise InputError("defect measures need at least 10 samples")
    if kind == "segment":
        t = (np.arange(samples) + 0.5) / samples * radius
        pts = np.zeros((samples, n))
        pts[:, 0] = t - 0.5 * radius
        w = np.full(samples, weight * radius / samples)
        return WeightedPointMeasure(pts, w)
    if kind == "circle":
        ang = 2.0 * math.pi * (np.arange(samples) + 0.5) / samples
        pts = np.zeros((samples, n))
        pts[:, 0] = radius * np.cos(ang)
        pts[:, 1] = radius * np.sin(ang)
        w = np.full(samples, weight * 2.0 * math.pi * radius / samples)
        return WeightedPointMeasure(pts, w)
    if kind == "k_disk":
        h = radius * (omega(k) / samples) ** (1.0 / k)
        m = int(math.ceil(radius / h))
        axes = [(np.arange(-m, m) + 0.5) * h for _ in range(k)]
        mesh = np.meshgrid(*axes, indexing="ij")
        flat = np.stack([g.ravel() for g in mesh], axis=1)
        keep = np.einsum("ij,ij->i", flat, flat) <= radius * radius
        flat = flat[keep]
        pts = np.zeros((flat.shape[0], n))
        pts[:, :k] = flat
        w = np.full(flat.shape[0], weight * h ** k)
        return WeightedPointMeasure(pts, w)
    raise InputError(f"unknown defect-measure kind {kind!r}")


def perturb(mu: WeightedPointMeasure, noise_scale: float,
            seed: int) -> WeightedPointMeasure:
    """Jitter atom positions by noise_scale * uniform[-1, 1]^n; weights kept.

    The draw is made at unit scale and multiplied by noise_scale, so a fixed
    seed gives displacements exactly proportional to the scale.
    """
    if noise_scale < 0.0:
        raise InputError("noise_scale must be >= 0")
    rng = np.random.default_rng(seed)
    jitter = rng.uniform(-1.0, 1.0, size=mu.points.shape)
    return WeightedPointMeasure(mu.points + noise_scale * jitter,
                                mu.weights.copy())


def gen_uniform_grid(n: int, density: float, extent: float, h: float,
                     max_cells: int = 40_000_000) -> GridDensity:
    counts = max(2, int(round(2.0 * extent / h)))
    if counts ** n > max_cells:
        raise InputError(f"uniform grid would need {counts ** n} cells")
    origin = np.full(n, -extent)
    vals = np.full((counts,) * n, float(density))
    return GridDensity(origin, h, vals)


# -- spec-driven construction ----------------------------------------------


@dataclass(frozen=True)
class SynthSpec:
    """Reproducible description of a synthetic artifact."""

    kind: str  # radial_cone | k_symmetric_cone | instanton | defect_measure
    #            | uniform | perturbed
    n: int = 5
    k: int = 1
    amplitude: float = 1.0
    rho: float = 1.0
    inner_cut: float = 1e-3
    shape: str = "segment"
    weight: float = 1.0
    samples: int = 1000
    radius: float = 1.0
    density: float = 1.0
    extent: float = 1.0
    h: float = 0.0625
    noise_scale: float = 0.0
    seed: int = 0
    base: Optional["SynthSpec"] = None


def build_synth(spec: SynthSpec):
    """Materialize a SynthSpec; identical specs give bit-identical artifacts."""
    if spec.kind == "radial_cone":
        return gen_radial_cone(spec.n, spec.amplitude, spec.inner_cut)
    if spec.kind == "k_symmetric_cone":
        return gen_k_symmetric_cone(spec.n, spec.k, spec.amplitude, spec.inner_cut)
    if spec.kind == "instanton":
        return gen_instanton(spec.rho)
    if spec.kind == "defect_measure":
        return gen_defect_measure(spec.shape, spec.weight, spec.samples,
                                  spec.n, spec.radius, spec.k)
    if spec.kind == "uniform":
        return gen_uniform_grid(spec.n, spec.density, spec.extent, spec.h)
    if spec.kind == "perturbed":
        if spec.base is None:
            raise InputError("perturbed spec needs a base spec")
        base = build_synth(spec.base)
        if not isinstance(base, WeightedPointMeasure):
            raise InputError("perturbed base must build a point measure")
        return perturb(base, spec.noise_scale, spec.seed)
    raise InputError(f"unknown synthetic kind {spec.kind!r}")

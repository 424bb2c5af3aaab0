"""Midpoint quadrature over balls and annuli on regular grids.

The engine evaluates integrands on cell centers p + h*(k + 1/2), k integer,
so the grid is symmetric about the ball center and no cell center coincides
with it.  A single pass produces cumulative sums over any ascending list of
radii: the last two axes are treated as a block sorted once by squared
radius, so per-slab ball membership is a prefix lookup and the integrand is
only evaluated inside the largest ball.  Accumulation order is fixed
(slab-major, Kahan-compensated), which keeps results independent of thread
count and reproducible to the last bit.

Integrands with an integrable singularity at the center are handled by
excising a small ball (default radius 2h) and reporting it, so callers can
fold the excision into their error budgets.

For densities that are exact functions of |z - c| the module also provides
1-d reduced ball masses via sphere/ball intersection areas; these are used
as fast, grid-free evaluators by the synthetic generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .geometry import sphere_ball_intersection_area

DEFAULT_EXCISE_CELLS = 2.0  # excision radius in units of h for singular kernels


@dataclass(frozen=True)
class QuadratureSpec:
    """Grid spacing plus bookkeeping knobs for the midpoint engine."""

    h: float
    excise: float = 0.0  # radius around the center to drop (0 = keep all)

    def __post_init__(self):
        if self.h <= 0.0 or not math.isfinite(self.h):
            raise InputError(f"quadrature spacing must be positive, got {self.h}")
        if self.excise < 0.0:
            raise InputError("excision radius must be >= 0")

    def refined(self, factor: float = 0.5) -> "QuadratureSpec":
        return QuadratureSpec(self.h * factor, self.excise)

    def with_excise_cells(self, cells: float = DEFAULT_EXCISE_CELLS) -> "QuadratureSpec":
        return QuadratureSpec(self.h, cells * self.h)


def _axis_offsets(r: float, h: float) -> np.ndarray:
    m = int(math.ceil(r / h + 0.5))
    return h * (np.arange(-m, m) + 0.5)


def ball_sums(f, n: int, center: np.ndarray, radii, h: float,
              excise: float = 0.0) -> np.ndarray:
    """Cumulative midpoint sums h^n * sum f(c) over excise < |c - center| <= r_j.

    `f` maps an (N, n) array of points to (N,) values; `radii` must be
    ascending.  Returns one value per radius.
    """
    center = np.asarray(center, dtype=float).ravel()
    if center.shape[0] != n:
        raise InputError("center dimension mismatch")
    radii = np.asarray(radii, dtype=float).ravel()
    if radii.size == 0:
        return np.zeros(0)
    if np.any(np.diff(radii) < 0.0):
        raise InputError("radii must be ascending")
    rmax = float(radii[-1])
    offsets = [_axis_offsets(rmax, h) for _ in range(n)]

    n_rest = min(2, n)
    rest_axes = list(range(n - n_rest, n))
    lead_axes = list(range(0, n - n_rest))

    # rest block: flattened last axes, sorted by squared radius once
    rest_off = [offsets[ax] for ax in rest_axes]
    if n_rest == 2:
        r2_rest = (rest_off[0][:, None] ** 2 + rest_off[1][None, :] ** 2).ravel()
        la, lb = rest_off[0].shape[0], rest_off[1].shape[0]
        order = np.argsort(r2_rest, kind="stable")
        ia, ib = np.divmod(order, lb)
        rest_coords = (rest_off[0][ia], rest_off[1][ib])
    else:
        r2_rest = rest_off[0] ** 2
        order = np.argsort(r2_rest, kind="stable")
        rest_coords = (rest_off[0][order],)
    r2_rest_sorted = r2_rest[order]

    # lead block: every combination of the remaining axes, pre-filtered
    if lead_axes:
        lead_off = [offsets[ax] for ax in lead_axes]
        mesh = np.meshgrid(*lead_off, indexing="ij")
        lead_pts = np.stack([m.ravel() for m in mesh], axis=1)
        lead_r2 = np.einsum("ij,ij->i", lead_pts, lead_pts)
        keep = lead_r2 <= rmax * rmax
        lead_pts, lead_r2 = lead_pts[keep], lead_r2[keep]
    else:
        lead_pts = np.zeros((1, 0))
        lead_r2 = np.zeros(1)

    edges = radii * radii
    exc2 = excise * excise
    sums = np.zeros(radii.shape[0])
    comp = np.zeros(radii.shape[0])  # Kahan compensation
    hn = h ** n
    for lp, lr2 in zip(lead_pts, lead_r2):
        pos = np.searchsorted(r2_rest_sorted, edges - lr2, side="right")
        top = int(pos[-1])
        if top == 0:
            continue
        skip = int(np.searchsorted(r2_rest_sorted, exc2 - lr2, side="right")) \
            if excise > 0.0 else 0
        if skip >= top:
            continue
        pts = np.empty((top - skip, n))
        pts[:, :len(lead_axes)] = center[:len(lead_axes)] + lp
        for j, ax in enumerate(rest_axes):
            pts[:, ax] = center[ax] + rest_coords[j][skip:top]
        vals = f(pts)
        cs = np.concatenate(([0.0], np.cumsum(vals)))
        contrib = cs[np.clip(pos - skip, 0, top - skip)] * hn
        # compensated accumulation keeps the slab-major order reproducible
        y = contrib - comp
        t = sums + y
        comp = (t - sums) - y
        sums = t
    return sums


def integrate_ball(f, n: int, center: np.ndarray, r: float, h: float,
                   excise: float = 0.0) -> float:
    if r <= 0.0:
        raise InputError(f"ball radius must be positive, got {r}")
    return float(ball_sums(f, n, center, [r], h, excise)[0])


def integrate_annulus(f, n: int, center: np.ndarray, r_inner: float,
                      r_outer: float, h: float, excise: float = 0.0) -> float:
    """Midpoint sum over cells with r_inner < |c - center| <= r_outer."""
    if not (0.0 <= r_inner < r_outer):
        raise InputError("annulus radii must satisfy 0 <= inner < outer")
    s = ball_sums(f, n, center, [r_inner, r_outer], h, excise) \
        if r_inner > 0.0 else ball_sums(f, n, center, [r_outer], h, excise)
    return float(s[-1] - s[0]) if r_inner > 0.0 else float(s[0])


def excision_budget(f_scale: float, n: int, p: float, excise: float) -> float:
    """Crude bound for the mass dropped by excising B_excise around a
    |x|^(p-n)-weighted integrable singularity of strength f_scale."""
    if excise <= 0.0:
        return 0.0
    return f_scale * excise ** p * (1.0 + n)


# -- radial reductions -----------------------------------------------------


def _panel_nodes(lo: float, hi: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Simpson nodes/weights on [lo, hi] (count intervals, even)."""
    count += count % 2
    x = np.linspace(lo, hi, count + 1)
    w = np.full(count + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= (hi - lo) / (3.0 * count)
    return x, w


def radial_ball_mass(g, n: int, dist: float, t: float,
                     inner_cut: float = 0.0, intervals: int = 4096) -> float:
    """Integral of g(|z|) over the ball B_t(x) with |x| = dist.

    Reduces to a 1-d integral against sphere/ball intersection areas.
    `inner_cut` drops the region |z| < inner_cut (for singular profiles
    whose generators excise the vertex).
    """
    lo = max(0.0, dist - t, inner_cut)
    hi = dist + t
    if hi <= lo:
        return 0.0
    kink = abs(dist - t)
    panels = []
    if lo < kink < hi:
        panels = [(lo, kink), (kink, hi)]
    else:
        panels = [(lo, hi)]
    total = 0.0
    for a, b in panels:
        if b <= a:
            continue
        x, w = _panel_nodes(a, b, intervals)
        area = sphere_ball_intersection_area(n, x, dist, t)
        total += float(np.sum(w * g(x) * area))
    return total


def radial_ball_mass_many(g, n: int, dists: np.ndarray, ts: np.ndarray,
                          inner_cut: float = 0.0, intervals: int = 1024) -> np.ndarray:
    """Vectorized radial_ball_mass over query batches (one Simpson panel pair
    per query, nodes broadcast across the batch)."""
    dists = np.asarray(dists, dtype=float).ravel()
    ts = np.broadcast_to(np.asarray(ts, dtype=float), dists.shape)
    out = np.empty(dists.shape[0])
    for i in range(dists.shape[0]):
        out[i] = radial_ball_mass(g, n, float(dists[i]), float(ts[i]),
                                  inner_cut, intervals)
    return out


def quadrature_error_estimate(value_h: float, value_coarse: float,
                              floor: float = 0.0) -> float:
    """First-order error proxy: |I_h - I_2h| with an optional absolute floor."""
    return max(abs(value_h - value_coarse), floor)

"""Sampled curvature 2-form fields and the identities they must satisfy.

A field holds a batch sampler x -> F^a_ij(x) (antisymmetric in ij, with an
opaque internal index a) on a ball domain.  Generators may attach closed-form
fast paths for |F|^2 and |iota_v F|^2; every operation falls back to the
generic tensor path, and the fast paths are cross-checked against it in the
test suite.

Sign and index conventions:
    (iota_v F)^a_j = sum_i v_i F^a_ij          (contraction in the first slot)
    |F|^2         = sum_{a,i,j} (F^a_ij)^2     (= 2 * sum over i<j)
    jacobian J[i, l] = d X_l / d x_i           (VectorFieldSpec)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, InputError
from .measure import DensityExponent
from .quadrature import (QuadratureSpec, ball_sums, integrate_annulus,
                         integrate_ball, quadrature_error_estimate)

Array = np.ndarray


@dataclass
class CurvatureField:
    """Curvature samples F^a_ij(x) on the ball B_domain_radius(domain_center)."""

    dim: int
    lie_dim: int
    sampler: Callable[[Array], Array]  # (N, n) -> (N, m, n, n)
    domain_center: Array
    domain_radius: float
    norm2_fast: Optional[Callable[[Array], Array]] = None
    contract_norm2_fast: Optional[Callable[[Array, Array], Array]] = None
    radial_center: Optional[Array] = None  # |F|^2 is a function of |x - this|
    radial_norm2: Optional[Callable[[Array], Array]] = None
    singular_radius: float = 0.0  # quadratures excise this around singular points
    singular_points: Array = dc_field(default_factory=lambda: np.zeros((0, 0)))
    singular_plane: object = None  # AffinePlane the density blows up on, if any
    name: str = "field"

    def __post_init__(self):
        self.domain_center = np.asarray(self.domain_center, dtype=float).ravel()
        if self.domain_center.shape[0] != self.dim:
            raise InputError("domain center dimension mismatch")

    # -- domain ----------------------------------------------------------

    def contains_ball(self, center: Array, radius: float) -> bool:
        center = np.asarray(center, dtype=float).ravel()
        gap = self.domain_radius - np.linalg.norm(center - self.domain_center)
        return radius <= gap + 1e-12

    def require_ball(self, center: Array, radius: float) -> None:
        if not self.contains_ball(center, radius):
            raise DomainError(
                f"ball of radius {radius} around {np.asarray(center)} exceeds the "
                f"domain of field '{self.name}'")

    def excision_for(self, center: Array, radius: float, spec: QuadratureSpec) -> float:
        """Excision radius to use when integrating over B_radius(center)."""
        exc = spec.excise
        if self.singular_radius > 0.0:
            near = False
            if self.singular_points.size:
                d = np.linalg.norm(self.singular_points
                                   - np.asarray(center, dtype=float), axis=1)
                near = bool(np.any(d <= radius + self.singular_radius))
            if not near and self.singular_plane is not None:
                dp = float(self.singular_plane.dist(
                    np.asarray(center, dtype=float)[None, :])[0])
                near = dp <= radius + self.singular_radius
            if near:
                exc = max(exc, self.singular_radius, 2.0 * spec.h)
        return exc

    # -- sampling --------------------------------------------------------

    def sample(self, x: Array) -> Array:
        """F at a single point, shape (lie_dim, n, n)."""
        x = np.asarray(x, dtype=float).ravel()
        if not self.contains_ball(x, 0.0):
            raise DomainError(f"point outside the domain of field '{self.name}'")
        return self.sampler(x[None, :])[0]

    def norm2_many(self, pts: Array) -> Array:
        if self.norm2_fast is not None:
            return self.norm2_fast(pts)
        F = self.sampler(pts)
        return np.einsum("naij,naij->n", F, F)

    def contract_norm2_many(self, pts: Array, v: Array) -> Array:
        """|iota_v F|^2 at each point; v is (n,) shared or (N, n) per point."""
        v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            v = np.broadcast_to(v, pts.shape)
        if self.contract_norm2_fast is not None:
            return self.contract_norm2_fast(pts, v)
        F = self.sampler(pts)
        iv = np.einsum("ni,naij->naj", v, F)
        return np.einsum("naj,naj->n", iv, iv)


@dataclass
class VectorFieldSpec:
    """Compactly supported smooth vector field with its Jacobian."""

    sampler: Callable[[Array], Array]   # (N, n) -> (N, n)
    jacobian: Callable[[Array], Array]  # (N, n) -> (N, n, n), J[i,l] = d_i X_l
    support_center: Array
    support_radius: float

    def __post_init__(self):
        self.support_center = np.asarray(self.support_center, dtype=float).ravel()

    def divergence(self, pts: Array) -> Array:
        return np.einsum("nii->n", self.jacobian(pts))

    def fd_check(self, probes: Array, step: float = 1e-4) -> float:
        """Max deviation between the declared Jacobian and central differences."""
        probes = np.atleast_2d(np.asarray(probes, dtype=float))
        jac = self.jacobian(probes)
        worst = 0.0
        n = probes.shape[1]
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            fd = (self.sampler(probes + e) - self.sampler(probes - e)) / (2 * step)
            worst = max(worst, float(np.abs(fd - jac[:, i, :]).max()))
        return worst


def _bump(t: Array) -> Array:
    """exp(1 - 1/(1-t^2)) for t < 1, 0 otherwise."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0 - 1e-9
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


def _bump_q(t: Array) -> Array:
    """xi'(t)/t = -2 (1-t^2)^-2 xi(t), smooth through t = 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0 - 1e-9
    ti = t[inside]
    out[inside] = -2.0 / (1.0 - ti * ti) ** 2 * np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


def bump_translation_field(center: Array, radius: float,
                           direction: int, dim: int) -> VectorFieldSpec:
    """X = xi(|x-c|/R) e_dir: a bump-supported translation."""
    center = np.asarray(center, dtype=float).ravel()

    def sampler(pts: Array) -> Array:
        s = np.linalg.norm(pts - center, axis=1) / radius
        out = np.zeros_like(pts)
        out[:, direction] = _bump(s)
        return out

    def jacobian(pts: Array) -> Array:
        rel = pts - center
        t = np.linalg.norm(rel, axis=1) / radius
        q = _bump_q(t) / radius ** 2
        jac = np.zeros(pts.shape + (dim,))
        jac[:, :, direction] = q[:, None] * rel
        return jac

    return VectorFieldSpec(sampler, jacobian, center, radius)


def bump_rotation_field(center: Array, radius: float,
                        axis_a: int, axis_b: int, dim: int) -> VectorFieldSpec:
    """X = xi(|x-c|/R) M (x-c) with M the (a,b) rotation generator; div X = 0."""
    center = np.asarray(center, dtype=float).ravel()
    M = np.zeros((dim, dim))
    M[axis_a, axis_b] = 1.0
    M[axis_b, axis_a] = -1.0

    def sampler(pts: Array) -> Array:
        rel = pts - center
        t = np.linalg.norm(rel, axis=1) / radius
        return _bump(t)[:, None] * (rel @ M.T)

    def jacobian(pts: Array) -> Array:
        rel = pts - center
        t = np.linalg.norm(rel, axis=1) / radius
        xi = _bump(t)
        q = _bump_q(t) / radius ** 2
        mx = rel @ M.T
        jac = q[:, None, None] * rel[:, :, None] * mx[:, None, :]
        jac += xi[:, None, None] * M[None, :, :]
        return jac

    return VectorFieldSpec(sampler, jacobian, center, radius)


# -- operations ------------------------------------------------------------


def contract(F: CurvatureField, v: Array, x: Array) -> Array:
    """(iota_v F)^a_j = sum_i v_i F^a_ij at the point x; shape (lie_dim, n)."""
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != F.dim:
        raise InputError("contraction vector dimension mismatch")
    Fx = F.sample(x)
    return np.einsum("i,aij->aj", v, Fx)


def contract_norm2(F: CurvatureField, v: Array, x: Array) -> float:
    iv = contract(F, v, x)
    return float(np.einsum("aj,aj->", iv, iv))


def stationarity_residual(F: CurvatureField, X: VectorFieldSpec,
                          spec: QuadratureSpec) -> float:
    """Midpoint value of the inner-variation integral; zero (up to quadrature
    error) exactly when the field is stationary."""
    F.require_ball(X.support_center, X.support_radius)

    def integrand(pts: Array) -> Array:
        jac = X.jacobian(pts)
        div = np.einsum("nii->n", jac)
        Ft = F.sampler(pts)
        cross = np.einsum("nil,nalj,naij->n", jac, Ft, Ft)
        return F.norm2_many(pts) * div - 4.0 * cross

    exc = F.excision_for(X.support_center, X.support_radius, spec)
    return integrate_ball(integrand, F.dim, X.support_center,
                          X.support_radius, spec.h, exc)


@dataclass(frozen=True)
class MonotonicityResult:
    lhs: float
    rhs: float
    gap: float
    error_estimate: float
    h: float
    excised: float


def _radial_direction(pts: Array, p: Array) -> Array:
    rel = pts - p
    dist = np.linalg.norm(rel, axis=1)
    dist[dist == 0.0] = 1.0
    return rel / dist[:, None]


def _theta_and_annulus_sums(F: CurvatureField, p: Array, radii: np.ndarray,
                            exponent: DensityExponent, spec: QuadratureSpec):
    """One grid pass each for the density and the weighted radial contraction,
    cumulative over `radii`."""
    n = F.dim
    p = np.asarray(p, dtype=float).ravel()
    exc = F.excision_for(p, float(radii[-1]), spec)

    mass_sums = ball_sums(F.norm2_many, n, p, radii, spec.h, exc)

    def ann_integrand(pts: Array) -> Array:
        rel = pts - p
        dist = np.linalg.norm(rel, axis=1)
        v = rel / np.where(dist == 0.0, 1.0, dist)[:, None]
        w = 4.0 * dist ** (exponent.p - n)
        return w * F.contract_norm2_many(pts, v)

    kernel_exc = exc if n == exponent.p else max(exc, 2.0 * spec.h)
    ann_sums = ball_sums(ann_integrand, n, p, radii, spec.h, kernel_exc)
    return mass_sums, ann_sums, exc, kernel_exc


def monotonicity_check(F: CurvatureField, p: Array, r_inner: float,
                       r_outer: float, exponent: DensityExponent,
                       spec: QuadratureSpec) -> MonotonicityResult:
    """Both sides of the density-drop identity on the annulus (r_inner, r_outer].

    lhs = theta(p, r_outer) - theta(p, r_inner) from the density |F|^2;
    rhs = annulus integral of 4 |x-p|^(p-n) |iota_(radial) F|^2.
    """
    if not (0.0 < r_inner < r_outer):
        raise InputError("monotonicity radii must satisfy 0 < inner < outer")
    F.require_ball(p, r_outer)
    exponent.validate(F.dim)

    def one(h_spec: QuadratureSpec):
        radii = np.array([r_inner, r_outer])
        mass, ann, exc, _ = _theta_and_annulus_sums(F, p, radii, exponent, h_spec)
        n = F.dim
        lhs = r_outer ** (exponent.p - n) * mass[1] \
            - r_inner ** (exponent.p - n) * mass[0]
        rhs = ann[1] - ann[0]
        return lhs, rhs, exc

    lhs, rhs, exc = one(spec)
    lhs2, rhs2, _ = one(QuadratureSpec(2.0 * spec.h, spec.excise))
    floor = 1e-9 * (abs(lhs) + abs(rhs) + 1.0)
    err = quadrature_error_estimate(lhs - rhs, lhs2 - rhs2, floor) \
        + abs(lhs - lhs2) + abs(rhs - rhs2)
    return MonotonicityResult(float(lhs), float(rhs), float(lhs - rhs),
                              float(err), spec.h, exc)


def monotonicity_pairs(F: CurvatureField, p: Array,
                       pairs: Sequence[tuple[float, float]],
                       exponent: DensityExponent, spec: QuadratureSpec,
                       with_error: bool = True) -> list[MonotonicityResult]:
    """Batched monotonicity_check: all pairs share two grid passes.

    Cell sets per radius agree with the per-pair path, so the assembled
    lhs/rhs match monotonicity_check bit for bit.
    """
    for s, r in pairs:
        if not (0.0 < s < r):
            raise InputError("monotonicity radii must satisfy 0 < inner < outer")
    exponent.validate(F.dim)
    radii = np.unique(np.asarray([v for pr in pairs for v in pr], dtype=float))
    F.require_ball(p, float(radii[-1]))

    def sums(h_spec):
        return _theta_and_annulus_sums(F, p, radii, exponent, h_spec)

    mass, ann, exc, _ = sums(spec)
    if with_error:
        mass2, ann2, _, _ = sums(QuadratureSpec(2.0 * spec.h, spec.excise))
    n = F.dim
    out = []
    for s, r in pairs:
        i, j = np.searchsorted(radii, [s, r])
        lhs = r ** (exponent.p - n) * mass[j] - s ** (exponent.p - n) * mass[i]
        rhs = ann[j] - ann[i]
        if with_error:
            lhs2 = r ** (exponent.p - n) * mass2[j] - s ** (exponent.p - n) * mass2[i]
            rhs2 = ann2[j] - ann2[i]
            floor = 1e-9 * (abs(lhs) + abs(rhs) + 1.0)
            err = quadrature_error_estimate(lhs - rhs, lhs2 - rhs2, floor) \
                + abs(lhs - lhs2) + abs(rhs - rhs2)
        else:
            err = math.nan
        out.append(MonotonicityResult(float(lhs), float(rhs), float(lhs - rhs),
                                      float(err), spec.h, exc))
    return out


@dataclass
class SphereFunction:
    """C^1 weight on the unit sphere with its tangential gradient."""

    value: Callable[[Array], Array]      # (N, n) unit vectors -> (N,)
    gradient: Callable[[Array], Array]   # (N, n) -> (N, n), tangent to the sphere


@dataclass(frozen=True)
class PsiMonotonicityResult:
    lhs: float
    rhs_annulus: float
    rhs_correction: float
    gap: float
    error_estimate: float
    h: float


def psi_monotonicity_check(F: CurvatureField, p: Array, r_inner: float,
                           r_outer: float, phi: SphereFunction,
                           exponent: DensityExponent,
                           spec: QuadratureSpec) -> PsiMonotonicityResult:
    """Weighted drop identity with psi(x) = phi((x-p)/|x-p|):

    lhs  = rho^(p-n) int_{B_rho} psi |F|^2  -  sigma^(p-n) int_{B_sigma} psi |F|^2
    rhs  = int_{annulus} 4 |x-p|^(p-n) psi |iota_r F|^2
           - int_sigma^rho 4 tau^(p-1-n) (int_{B_tau} |x-p| <iota_r F, iota_{grad psi} F>) dtau
    """
    if not (0.0 < r_inner < r_outer):
        raise InputError("psi-monotonicity radii must satisfy 0 < inner < outer")
    F.require_ball(p, r_outer)
    exponent.validate(F.dim)
    n = F.dim
    pp = np.asarray(p, dtype=float).ravel()

    def weighted_norm2(pts: Array) -> Array:
        u = _radial_direction(pts, pp)
        return phi.value(u) * F.norm2_many(pts)

    def annulus_term(pts: Array) -> Array:
        rel = pts - pp
        dist = np.linalg.norm(rel, axis=1)
        u = rel / np.where(dist == 0.0, 1.0, dist)[:, None]
        w = 4.0 * dist ** (exponent.p - n) * phi.value(u)
        return w * F.contract_norm2_many(pts, u)

    def correction_term(pts: Array) -> Array:
        rel = pts - pp
        dist = np.linalg.norm(rel, axis=1)
        safe = np.where(dist == 0.0, 1.0, dist)
        u = rel / safe[:, None]
        grad_psi = phi.gradient(u) / safe[:, None]
        Ft = F.sampler(pts)
        iv = np.einsum("ni,naij->naj", u, Ft)
        iw = np.einsum("ni,naij->naj", grad_psi, Ft)
        inner = np.einsum("naj,naj->n", iv, iw)
        if exponent.p == n:
            tau_w = 4.0 * np.log(r_outer / np.maximum(dist, r_inner))
        else:
            a = exponent.p - n
            tau_w = 4.0 * (r_outer ** a - np.maximum(dist, r_inner) ** a) / a
        return dist * inner * tau_w

    exc = F.excision_for(pp, r_outer, spec)
    kernel_exc = exc if n == exponent.p else max(exc, 2.0 * spec.h)

    def one(h_spec: QuadratureSpec):
        wsums = ball_sums(weighted_norm2, n, pp, [r_inner, r_outer], h_spec.h, exc)
        lhs = r_outer ** (exponent.p - n) * wsums[1] \
            - r_inner ** (exponent.p - n) * wsums[0]
        rhs1 = integrate_annulus(annulus_term, n, pp, r_inner, r_outer,
                                 h_spec.h, kernel_exc)
        corr = integrate_ball(correction_term, n, pp, r_outer, h_spec.h,
                              max(kernel_exc, 2.0 * h_spec.h))
        return lhs, rhs1, corr

    lhs, rhs1, corr = one(spec)
    lhs2, rhs12, corr2 = one(QuadratureSpec(2.0 * spec.h, spec.excise))
    gap = lhs - (rhs1 - corr)
    gap2 = lhs2 - (rhs12 - corr2)
    floor = 1e-9 * (abs(lhs) + abs(rhs1) + abs(corr) + 1.0)
    err = quadrature_error_estimate(gap, gap2, floor)
    return PsiMonotonicityResult(float(lhs), float(rhs1), float(-corr),
                                 float(gap), float(err), spec.h)


def radial_defect_integral(F: CurvatureField, z: Array, ball_center: Array,
                           ball_radius: float, spec: QuadratureSpec,
                           mode: str = "center-rays") -> float:
    """int_B |iota_(z - y) F(y)|^2 dV(y): the contraction direction at the
    integration point y is the unnormalized vector z - y."""
    if mode != "center-rays":
        raise InputError(f"unsupported defect-integral mode {mode!r}")
    F.require_ball(ball_center, ball_radius)
    z = np.asarray(z, dtype=float).ravel()

    def integrand(pts: Array) -> Array:
        return F.contract_norm2_many(pts, z - pts)

    exc = F.excision_for(ball_center, ball_radius, spec)
    return integrate_ball(integrand, F.dim, ball_center, ball_radius,
                          spec.h, exc)


def dyadic_radial_sum(F: CurvatureField, z: Array, scales: Sequence[float],
                      eps1: float, exponent: DensityExponent,
                      spec: QuadratureSpec) -> tuple[float, list[float]]:
    """sum_beta t_beta^(2-n) int_{B_(eps1 t_beta)(z)} |iota_(z-y)F|^2 dV(y)
    over the dyadic scale set; returns (total, per-scale terms)."""
    if eps1 <= 0.0:
        raise InputError("eps1 must be positive")
    scales = sorted(float(s) for s in scales)
    if not scales:
        return 0.0, []
    exponent.validate(F.dim)
    z = np.asarray(z, dtype=float).ravel()
    F.require_ball(z, eps1 * scales[-1])

    def integrand(pts: Array) -> Array:
        return F.contract_norm2_many(pts, z - pts)

    exc = F.excision_for(z, eps1 * scales[-1], spec)
    radii = np.asarray([eps1 * s for s in scales])
    sums = ball_sums(integrand, F.dim, z, radii, spec.h, exc)
    n = F.dim
    terms = [s ** (2.0 - n) * float(v) for s, v in zip(scales, sums)]
    return float(sum(terms)), terms


def dyadic_tail_constant(n: int) -> float:
    """Geometric-tail constant in the annulus-by-annulus dyadic bound:
    sum <= C(n) eps1^(n-2) * (theta drop across the scanned scales)."""
    return 1.0 / (4.0 * (1.0 - 2.0 ** (2 - n)))

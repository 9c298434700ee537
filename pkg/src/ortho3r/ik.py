"""Inverse geometric model: posture enumeration and solution counting.

For a section target (rho, z) the constraints are rho^2 = a^2 + G^2 and
z = -F*sin(t2) with F = d3 + d4*cos(t3), G = d4*sin(t3) + r2 and
a = 1 + F*cos(t2).  Eliminating t2 gives, per sign branch sgn = sign(a),
the univariate residual

    R(t3) = (sgn*sqrt(rho^2 - G^2) - 1)^2 + z^2 - F^2

whose real roots are the postures.  The sqrt term is extended by zero
where rho^2 < G^2, which makes R continuous across the domain edge (the
edge value 1 + z^2 - F^2 is the true limit), so roots sitting next to the
edge are still bracketed.  A dense scan over t3 followed by Brent
refinement is degeneracy-proof where the quartic in tan(t3/2) is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .model import (
    CartesianPoint,
    JointConfig,
    Params,
    SectionPoint,
    det_j_closed,
    fk,
    to_section,
    wrap_angle,
)
from .singular import det_tolerance

DEFAULT_SCAN_SAMPLES = 2048
DEDUP_ANGLE_TOL = 1e-6
RESIDUAL_REFINE_TOL = 1e-12


@dataclass(frozen=True)
class SectionSolution:
    """One (theta2, theta3) posture for a section target."""

    theta2: float
    theta3: float
    residual: float
    on_boundary: bool  # |det J| under the singularity tolerance


@dataclass
class PostureSet:
    """All joint solutions for a Cartesian target."""

    solutions: list[JointConfig]
    target: CartesianPoint
    residual_max: float
    boundary_flags: list[bool] = field(default_factory=list)
    axis_degenerate: bool = False  # target on the Z axis: theta1 set to 0

    def __len__(self) -> int:
        return len(self.solutions)


def _scan_tables(p: Params, n: int):
    t3 = np.linspace(-np.pi, np.pi, n, endpoint=False)
    F = p.d3 + p.d4 * np.cos(t3)
    G = p.d4 * np.sin(t3) + p.r2
    return t3, F, G


def _residual_fn(p: Params, rho: float, z: float, sgn: float):
    rho2, z2 = rho * rho, z * z

    def res(t3: float) -> float:
        F = p.d3 + p.d4 * math.cos(t3)
        G = p.d4 * math.sin(t3) + p.r2
        disc = rho2 - G * G
        root = math.sqrt(disc) if disc > 0.0 else 0.0
        return (sgn * root - 1.0) ** 2 + z2 - F * F

    return res


def _brackets(vals: np.ndarray, valid: np.ndarray, edge: np.ndarray):
    """Index pairs (i, i+1 cyclic) bracketing a root, honoring domain edges.

    vals holds R at valid samples; edge holds the continuous extension value
    at the domain-edge crossing inside each sample gap.
    """
    nxt = np.roll(np.arange(len(vals)), -1)
    v_n, val_n = valid[nxt], vals[nxt]
    out = []
    for i in range(len(vals)):
        j = nxt[i]
        if valid[i] and v_n[i]:
            if vals[i] * val_n[i] < 0.0:
                out.append(i)
        elif valid[i] and not v_n[i]:
            if vals[i] * edge[i] < 0.0:
                out.append(i)
        elif not valid[i] and v_n[i]:
            if edge[i] * vals[j] < 0.0:
                out.append(i)
    return out


def ik_section(
    p: Params, s: SectionPoint, n: int = DEFAULT_SCAN_SAMPLES
) -> list[SectionSolution]:
    """All (theta2, theta3) postures reaching the section point s.

    Unreachable points return an empty list.  Solutions within the
    singularity tolerance of a branch carry on_boundary = True.
    """
    rho, z = s.rho, s.z
    if rho == 0.0:
        return _ik_on_axis(p, z)
    t3, F, G = _scan_tables(p, n)
    disc = rho * rho - G * G
    valid = disc >= 0.0
    sq = np.sqrt(np.where(valid, disc, 0.0))
    base = z * z - F * F
    Gn2 = np.roll(G, -1) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = (rho * rho - G * G) / (Gn2 - G * G)
    frac = np.clip(np.where(np.isfinite(frac), frac, 0.5), 0.0, 1.0)
    Fstar = F + frac * (np.roll(F, -1) - F)
    edge = 1.0 + z * z - Fstar * Fstar
    step = 2.0 * np.pi / n
    found: list[SectionSolution] = []
    dip_tol = 1e-4 * p.reach() ** 2
    for sgn in (1.0, -1.0):
        R = np.where(valid, (sgn * sq - 1.0) ** 2 + base, np.nan)
        res = _residual_fn(p, rho, z, sgn)
        roots: list[float] = []
        for i in _brackets(R, valid, edge):
            lo, hi = t3[i], t3[i] + step
            try:
                roots.append(brentq(res, lo, hi, xtol=1e-14, rtol=8.9e-16))
            except ValueError:
                continue  # endpoint values straddle only through the edge kink
        roots += _near_tangent_roots(res, t3, R, step, dip_tol)
        for root in roots:
            sol = _solution_from_theta3(p, rho, z, sgn, root)
            if sol is not None:
                found.append(sol)
    return _dedupe(found)


def _near_tangent_roots(res, t3, R, step, dip_tol):
    """Root pairs closer than the scan step: refine shallow extrema of R.

    A sampled local minimum just above zero (or maximum just below) can
    hide two roots between its neighbors; a bounded scalar minimization
    decides and, if the extremum crosses zero, both roots are bracketed.
    """
    from scipy.optimize import minimize_scalar

    out: list[float] = []
    prev = np.roll(R, 1)
    nxt = np.roll(R, -1)
    with np.errstate(invalid="ignore"):
        dips = (R < prev) & (R <= nxt) & (R > 0.0) & (R < dip_tol)
        peaks = (R > prev) & (R >= nxt) & (R < 0.0) & (R > -dip_tol)
    for sign, mask in ((1.0, dips), (-1.0, peaks)):
        for i in np.nonzero(mask)[0]:
            lo, hi = t3[i] - step, t3[i] + step
            m = minimize_scalar(
                lambda t: sign * res(t),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-14},
            )
            if sign * m.fun >= 0.0:
                continue
            for a, b in ((lo, m.x), (m.x, hi)):
                if res(a) * res(b) < 0.0:
                    out.append(brentq(res, a, b, xtol=1e-14, rtol=8.9e-16))
    return out


def _solution_from_theta3(p, rho, z, sgn, t3):
    F = p.d3 + p.d4 * math.cos(t3)
    G = p.d4 * math.sin(t3) + p.r2
    if abs(F) < 1e-14 * p.reach():
        return None  # effector on axis 2; postures form a continuum, skip
    disc = rho * rho - G * G
    a = sgn * math.sqrt(disc) if disc > 0.0 else 0.0
    c2 = (a - 1.0) / F
    s2 = -z / F
    nrm = math.hypot(c2, s2)
    if abs(nrm - 1.0) > 1e-6:
        return None
    t2 = math.atan2(s2 / nrm, c2 / nrm)
    q = JointConfig(0.0, t2, t3)
    pt = fk(p, q)
    resid = math.hypot(math.hypot(pt.x, pt.y) - rho, pt.z - z)
    boundary = abs(det_j_closed(p, q)) < det_tolerance(p)
    return SectionSolution(t2, wrap_angle(t3), resid, boundary)


def _ik_on_axis(p: Params, z: float) -> list[SectionSolution]:
    """Targets with rho = 0: need G(t3) = 0 and (1 + z^2) = F^2."""
    if p.r2 > p.d4:
        return []
    s3 = -p.r2 / p.d4
    out = []
    for t3 in (math.asin(s3), wrap_angle(math.pi - math.asin(s3))):
        F = p.d3 + p.d4 * math.cos(t3)
        rhs = F * F - 1.0 - z * z
        if abs(rhs) > 1e-9 * p.reach() ** 2:
            continue
        if abs(F) < 1e-14:
            continue
        c2 = -1.0 / F
        s2 = -z / F
        nrm = math.hypot(c2, s2)
        if abs(nrm - 1.0) > 1e-6:
            continue
        t2 = math.atan2(s2, c2)
        q = JointConfig(0.0, t2, t3)
        boundary = abs(det_j_closed(p, q)) < det_tolerance(p)
        out.append(SectionSolution(t2, t3, 0.0, boundary))
    return _dedupe(out)


def _dedupe(sols: list[SectionSolution]) -> list[SectionSolution]:
    kept: list[SectionSolution] = []
    for s in sols:
        dup = False
        for k in kept:
            d2 = abs(wrap_angle(s.theta2 - k.theta2))
            d3 = abs(wrap_angle(s.theta3 - k.theta3))
            if max(d2, d3) < DEDUP_ANGLE_TOL:
                dup = True
                break
        if not dup:
            kept.append(s)
    return kept


def ik_full(
    p: Params, target: CartesianPoint, n: int = DEFAULT_SCAN_SAMPLES
) -> PostureSet:
    """All joint solutions for a Cartesian target.

    theta1 follows from rotating the section solution into the target's
    azimuth: theta1 = atan2(y, x) - atan2(G, a).  On the Z axis theta1 is
    indeterminate and reported as 0 with axis_degenerate set.
    """
    rho = math.hypot(target.x, target.y)
    axis = rho == 0.0
    sec = ik_section(p, SectionPoint(rho, target.z), n)
    sols, flags = [], []
    res_max = 0.0
    for s in sec:
        F = p.d3 + p.d4 * math.cos(s.theta3)
        G = p.d4 * math.sin(s.theta3) + p.r2
        a = 1.0 + F * math.cos(s.theta2)
        t1 = 0.0 if axis else math.atan2(target.y, target.x) - math.atan2(G, a)
        q = JointConfig(t1, s.theta2, s.theta3)
        pt = fk(p, q)
        resid = math.dist(
            (pt.x, pt.y, pt.z), (target.x, target.y, target.z)
        )
        sols.append(q)
        flags.append(s.on_boundary)
        res_max = max(res_max, resid)
    return PostureSet(sols, target, res_max, flags, axis_degenerate=axis)


def count_solutions(p: Params, s: SectionPoint, n: int = DEFAULT_SCAN_SAMPLES) -> int:
    """Boundary-tolerant posture count: near-singular roots are not counted."""
    return sum(1 for sol in ik_section(p, s, n) if not sol.on_boundary)


def count_grid(
    p: Params,
    rho: np.ndarray,
    z_values: np.ndarray,
    n_theta: int = DEFAULT_SCAN_SAMPLES,
) -> np.ndarray:
    """Posture counts over a (rho x z) grid, vectorized row by row.

    Uses the same edge-extended residual as ik_section but counts sign
    changes without refining roots; exact-zero samples and tangencies are
    boundary cases of measure zero on a generic grid.
    """
    t3, F, G = _scan_tables(p, n_theta)
    F2, G2 = F * F, G * G
    Fn = np.roll(F, -1)
    G2n = np.roll(G2, -1)
    dG2 = G2n - G2
    rho = np.asarray(rho, float)
    out = np.zeros((len(rho), len(z_values)), np.int64)
    rho2 = (rho * rho)[:, None]
    disc = rho2 - G2[None, :]
    V = disc >= 0.0
    sq = np.sqrt(np.where(V, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = disc / dG2[None, :]
    frac = np.clip(np.where(np.isfinite(frac), frac, 0.5), 0.0, 1.0)
    Fstar = F[None, :] + frac * (Fn - F)[None, :]
    Vn = np.roll(V, -1, axis=1)
    vv = V & Vn
    vx = V & ~Vn
    xv = ~V & Vn
    plus = (sq - 1.0) ** 2
    minus = (-sq - 1.0) ** 2
    Fs2 = Fstar * Fstar
    for iz, z in enumerate(np.asarray(z_values, float)):
        base = z * z - F2[None, :]
        edge = 1.0 + z * z - Fs2
        cnt = np.zeros(len(rho), np.int64)
        for quad in (plus, minus):
            R = quad + base
            Rn = np.roll(R, -1, axis=1)
            cnt += np.count_nonzero(vv & (R * Rn < 0.0), axis=1)
            cnt += np.count_nonzero(vx & (R * edge < 0.0), axis=1)
            cnt += np.count_nonzero(xv & (edge * Rn < 0.0), axis=1)
        out[:, iz] = cnt
    return out

"""Singularity branches, workspace singular curves, cusps, nodes and aspects.

The determinant factors as d4 * F * h with F = d3 + d4*cos(t3) and
h = sin(t3) + (d3*sin(t3) - r2*cos(t3))*cos(t2).  The h = 0 locus always
forms two disjoint closed loops on the joint-space torus (branches S1 and
S2); the F = 0 locus contributes two extra lines t3 = +/-arccos(-d3/d4)
whenever d3 <= d4.

Each loop is a graph over an arc of t3: writing u(t3) = -s3/(d3*s3 - r2*c3),
the loop is {t2 = +/-arccos(u(t3))} over the arc where |u| <= 1, and u is
strictly increasing from -1 to +1 along the arc.  The arc containing t3 = 0
carries the maximum-reach configuration and is labeled S2 (outer curve WS2);
the arc containing t3 = pi is S1 (inner curve WS1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import Params, fk_section_grid, wrap_angle, wrap_angles


class BranchResolutionError(RuntimeError):
    """Raised when a branch polyline is too coarse to be continuous."""


class StructuralInstabilityWarning(UserWarning):
    """Emitted when geometry sits within tolerance of a separating surface."""


# |det J| below this (times d4 * reach^2) counts as singular
SINGULARITY_RTOL = 1e-9
# half-width in d4 around each separating surface where counts are unstable
INSTABILITY_BAND = 1e-6
# torus distance under which two branches are considered intersecting
GENERIC_DISTANCE_TOL = 1e-6


def det_tolerance(p: Params) -> float:
    """Scale-invariant threshold on |det J| for 'on a singular branch'."""
    return SINGULARITY_RTOL * p.d4 * p.reach() ** 2


@dataclass(frozen=True)
class SingularBranch:
    """One traced singularity branch with its workspace image."""

    branch_id: str  # "S1" | "S2" | "axis+" | "axis-"
    theta2: np.ndarray
    theta3: np.ndarray
    rho: np.ndarray
    z: np.ndarray
    closed: bool = True

    def __len__(self) -> int:
        return len(self.theta2)


@dataclass(frozen=True)
class SingularPoint:
    """A cusp or node of the workspace singular curves."""

    rho: float
    z: float
    # joint-space preimages (one for cusps, the two crossing ones for nodes)
    preimages: tuple = ()
    branch_ids: tuple = ()


@dataclass
class SingularPointSet:
    cusps: list = field(default_factory=list)
    nodes: list = field(default_factory=list)
    unstable: bool = False


def branch_arcs(p: Params) -> tuple[tuple[float, float], tuple[float, float]]:
    """The two t3 arcs carrying S1 and S2, as (lo, hi) with hi possibly > pi.

    Endpoints are the zeros of (d3-1)*s3 - r2*c3 and (d3+1)*s3 - r2*c3;
    between consecutive zeros the solvability condition |u| <= 1 holds on
    exactly the two arcs containing t3 = pi (S1) and t3 = 0 (S2).
    """
    t_a = math.atan2(p.r2, p.d3 - 1.0)
    t_b = math.atan2(p.r2, p.d3 + 1.0)
    return (t_a, t_b + math.pi), (t_a - math.pi, t_b)


def axis_line_theta3(p: Params) -> tuple[float, ...]:
    """t3 values of the extra singular lines (effector meets axis 2)."""
    if p.d3 > p.d4:
        return ()
    t = math.acos(-p.d3 / p.d4)
    if t == math.pi:  # d3 == d4: both lines coincide at the wrap angle
        return (math.pi,)
    return (t, -t)


def _u(theta3, p: Params):
    s3, c3 = np.sin(theta3), np.cos(theta3)
    return -s3 / (p.d3 * s3 - p.r2 * c3)


def branch_theta2(p: Params, theta3: float) -> tuple[float, ...]:
    """The 0..2 values of theta2 solving the loop factor at this theta3."""
    s3, c3 = math.sin(theta3), math.cos(theta3)
    den = p.d3 * s3 - p.r2 * c3
    if den == 0.0:
        # factor reduces to s3, which cannot vanish together with den
        return ()
    ratio = -s3 / den
    if abs(ratio) > 1.0:
        return ()
    t2 = math.acos(ratio)
    if t2 == 0.0:
        return (0.0,)
    if t2 == math.pi:
        return (wrap_angle(math.pi),)
    return (t2, -t2)


def _arc_theta3(lo: float, hi: float, n: int) -> np.ndarray:
    # cosine-clustered so theta2 = arccos(u) is sampled nearly uniformly
    s = np.linspace(0.0, 1.0, n)
    return lo + (hi - lo) * 0.5 * (1.0 - np.cos(np.pi * s))


def _loop_arrays(p: Params, lo: float, hi: float, n: int):
    """Closed-loop sample arrays (theta2, theta3) over one arc."""
    t3 = _arc_theta3(lo, hi, n)
    u = np.clip(_u(t3, p), -1.0, 1.0)
    t2 = np.arccos(u)
    theta3 = np.concatenate([t3, t3[::-1][1:]])
    theta2 = np.concatenate([t2, -t2[::-1][1:]])
    return theta2, theta3


def trace_branches(p: Params, n: int = 1024) -> list[SingularBranch]:
    """Trace S1, S2 (and the axis lines for d3 <= d4) at resolution n."""
    if n < 64:
        raise ValueError(f"resolution n must be >= 64, got {n}")
    (lo1, hi1), (lo2, hi2) = branch_arcs(p)
    out = []
    for bid, (lo, hi) in (("S1", (lo1, hi1)), ("S2", (lo2, hi2))):
        t2, t3 = _loop_arrays(p, lo, hi, n)
        rho, z = fk_section_grid(p, t2, t3)
        d2 = np.abs(np.diff(np.concatenate([t2, t2[:1]])))
        d2 = np.minimum(d2, 2.0 * np.pi - d2)
        d3_ = np.abs(np.diff(np.concatenate([t3, t3[:1]])))
        d3_ = np.minimum(d3_, 2.0 * np.pi - d3_)
        step = np.hypot(d2, d3_).max()
        if step > 0.5:
            raise BranchResolutionError(
                f"branch {bid} polyline step {step:.3f} rad at n={n}; increase n"
            )
        out.append(SingularBranch(bid, wrap_angles(t2), wrap_angles(t3), rho, z))
    for t3_line, bid in zip(axis_line_theta3(p), ("axis+", "axis-")):
        t2 = np.linspace(-np.pi, np.pi, n, endpoint=False)
        t3 = np.full_like(t2, t3_line)
        rho, z = fk_section_grid(p, t2, t3)
        out.append(SingularBranch(bid, t2, wrap_angles(t3), rho, z))
    return out


def _branch_fields(p: Params, t2, t3):
    """(rho, z, f1, f2) along the loop: f1, f2 are the z- and rho-components
    of the image tangent, taken along the in-curve direction from grad(h)."""
    c2, s2 = np.cos(t2), np.sin(t2)
    c3, s3 = np.cos(t3), np.sin(t3)
    den = p.d3 * s3 - p.r2 * c3
    den_p = p.d3 * c3 + p.r2 * s3
    F = p.d3 + p.d4 * c3
    Fp = -p.d4 * s3
    G = p.d4 * s3 + p.r2
    Gp = p.d4 * c3
    a = 1.0 + F * c2
    rho = np.hypot(a, G)
    v2 = -(c3 + den_p * c2)  # -dh/dt3
    v3 = -den * s2           # +dh/dt2
    with np.errstate(divide="ignore", invalid="ignore"):
        drho_t2 = np.where(rho > 0, -a * F * s2 / rho, 0.0)
        drho_t3 = np.where(rho > 0, (a * Fp * c2 + G * Gp) / rho, 0.0)
    f1 = (-F * c2) * v2 + (-Fp * s2) * v3
    f2 = drho_t2 * v2 + drho_t3 * v3
    return rho, -F * s2, f1, f2


CUSP_THETA3_TOL = 1e-10
_CUSP_OTHER_RTOL = 1e-6
_AXIS_RHO_RTOL = 1e-7


def find_cusps(p: Params, n: int = 3001) -> list[SingularPoint]:
    """Cusps: points on S1/S2 where the (rho, z) image tangent vanishes.

    Along each arccos sheet both tangent components are scanned for sign
    changes; a crossing of one component is a cusp when the other component
    vanishes there too (folds leave the other component finite).  Crossings
    of the rho = 0 axis are rejected: the half-section coordinate rho is
    not differentiable there and the curve point is not a cusp.
    """
    reach = p.reach()
    scale = max(1.0, p.d4 * reach)
    found: list[SingularPoint] = []
    for bid, (lo, hi) in zip(("S1", "S2"), branch_arcs(p)):
        t3 = _arc_theta3(lo, hi, n)
        u = np.clip(_u(t3, p), -1.0, 1.0)
        base_t2 = np.arccos(u)
        for sheet in (1.0, -1.0):
            t2 = sheet * base_t2
            rho, z, f1, f2 = _branch_fields(p, t2, t3)
            for which, f in ((0, f1), (1, f2)):
                idx = np.where(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
                for i in idx:
                    lo3, hi3, flo = t3[i], t3[i + 1], f[i]
                    while hi3 - lo3 > CUSP_THETA3_TOL:
                        mid = 0.5 * (lo3 + hi3)
                        t2m = sheet * math.acos(
                            min(1.0, max(-1.0, float(_u(mid, p))))
                        )
                        vals = _branch_fields(p, t2m, mid)
                        if flo * vals[2 + which] <= 0:
                            hi3 = mid
                        else:
                            lo3, flo = mid, vals[2 + which]
                    mid = 0.5 * (lo3 + hi3)
                    t2m = sheet * math.acos(min(1.0, max(-1.0, float(_u(mid, p)))))
                    rr, zz, f1m, f2m = _branch_fields(p, t2m, mid)
                    other = (f2m, f1m)[which]
                    if rr < _AXIS_RHO_RTOL * reach:
                        continue
                    if abs(other) < _CUSP_OTHER_RTOL * scale:
                        found.append(
                            SingularPoint(
                                float(rr), float(zz), ((t2m, mid),), (bid,)
                            )
                        )
    return _dedupe_points(found, 1e-6 * reach)


def _dedupe_points(pts: list[SingularPoint], tol: float) -> list[SingularPoint]:
    kept: list[SingularPoint] = []
    for c in pts:
        if not any(math.hypot(c.rho - k.rho, c.z - k.z) < tol for k in kept):
            kept.append(c)
    return kept


def count_cusps(p: Params, n: int = 3001) -> int:
    """Number of cusps on the workspace singular curves."""
    _warn_if_unstable(p, "count_cusps")
    return len(find_cusps(p, n))


def _segment_hits(P: np.ndarray, Q: np.ndarray, chunk: int = 512):
    """Indices (i, j, frac_i, frac_j) of proper crossings between polylines."""
    A, B = P[:-1], P[1:]
    C, D = Q[:-1], Q[1:]
    d2 = (D - C)[None, :, :]
    hits = []
    for i0 in range(0, len(A), chunk):
        a = A[i0 : i0 + chunk]
        d1 = (B[i0 : i0 + chunk] - a)[:, None, :]
        ac = C[None, :, :] - a[:, None, :]
        den = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (ac[..., 0] * d2[..., 1] - ac[..., 1] * d2[..., 0]) / den
            s = (ac[..., 0] * d1[..., 1] - ac[..., 1] * d1[..., 0]) / den
        ok = (t >= 0.0) & (t < 1.0) & (s >= 0.0) & (s < 1.0)
        for ii, jj in zip(*np.nonzero(ok)):
            hits.append((i0 + int(ii), int(jj), float(t[ii, jj]), float(s[ii, jj])))
    return hits


NODE_POSITION_TOL = 1e-9
_NODE_MIN_PARAM_SEP = 12  # samples; below this a hit is a cusp beak, not a node


def _loop_param_points(p: Params, arc, n):
    t2, t3 = _loop_arrays(p, arc[0], arc[1], n)
    rho, z = fk_section_grid(p, t2, t3)
    return t2, t3, np.column_stack([rho, z])


def _h_and_grad(p: Params, t2, t3):
    c2, s2 = math.cos(t2), math.sin(t2)
    c3, s3 = math.cos(t3), math.sin(t3)
    den = p.d3 * s3 - p.r2 * c3
    h = s3 + den * c2
    h2 = -den * s2
    h3 = c3 + (p.d3 * c3 + p.r2 * s3) * c2
    return h, h2, h3


def _rz_and_grad(p: Params, t2, t3):
    c2, s2 = math.cos(t2), math.sin(t2)
    c3, s3 = math.cos(t3), math.sin(t3)
    F = p.d3 + p.d4 * c3
    Fp = -p.d4 * s3
    G = p.d4 * s3 + p.r2
    Gp = p.d4 * c3
    a = 1.0 + F * c2
    rho = math.hypot(a, G)
    dr2 = -a * F * s2 / rho
    dr3 = (a * Fp * c2 + G * Gp) / rho
    return rho, -F * s2, dr2, dr3, -F * c2, -Fp * s2


def _refine_crossing(p: Params, loops, la, ia, lb, ib, n):
    """Polish a chord crossing into an exact node with Newton iterations.

    Unknowns x = (t2a, t3a, t2b, t3b); equations: both points on the
    singular curve (h = 0) and equal (rho, z) images.  Non-transversal
    candidates fail to converge and are dropped.
    """
    (t2a, t3a), (t2b, t3b) = loops[la], loops[lb]
    x = np.array(
        [
            0.5 * (t2a[ia] + t2a[ia + 1]),
            0.5 * (t3a[ia] + t3a[ia + 1]),
            0.5 * (t2b[ib] + t2b[ib + 1]),
            0.5 * (t3b[ib] + t3b[ib + 1]),
        ]
    )
    scale = max(1.0, p.reach())
    for _ in range(50):
        ha, ha2, ha3 = _h_and_grad(p, x[0], x[1])
        hb, hb2, hb3 = _h_and_grad(p, x[2], x[3])
        ra, za, dra2, dra3, dza2, dza3 = _rz_and_grad(p, x[0], x[1])
        rb, zb, drb2, drb3, dzb2, dzb3 = _rz_and_grad(p, x[2], x[3])
        F = np.array([ha, hb, ra - rb, za - zb])
        if np.max(np.abs(F)) < 1e-13 * scale:
            break
        J = np.array(
            [
                [ha2, ha3, 0.0, 0.0],
                [0.0, 0.0, hb2, hb3],
                [dra2, dra3, -drb2, -drb3],
                [dza2, dza3, -dzb2, -dzb3],
            ]
        )
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return None
        step = np.linalg.norm(dx)
        if step > 0.5:  # diverging from the local candidate
            return None
        x = x + dx
    else:
        return None
    sep = max(
        _circ_dist(x[0], x[2]),
        _circ_dist(x[1], x[3]),
    )
    if la == lb and sep < 1e-3:
        return None  # collapsed onto the trivial a == b solution set
    ra, za, *_ = _rz_and_grad(p, x[0], x[1])
    rb, zb, *_ = _rz_and_grad(p, x[2], x[3])
    if math.hypot(ra - rb, za - zb) > NODE_POSITION_TOL * scale:
        return None
    names = ("S1", "S2")
    return SingularPoint(
        float(ra),
        float(za),
        ((float(x[0]), float(x[1])), (float(x[2]), float(x[3]))),
        (names[la], names[lb]),
    )


def find_nodes(p: Params, n: int = 3000) -> list[SingularPoint]:
    """Nodes: transversal self- and mutual crossings of the WS1/WS2 curves.

    Candidate crossings come from chunked polyline segment tests; each is
    refined by local resampling of the exact curves until the two preimage
    parameter boxes give the same (rho, z) within NODE_POSITION_TOL.  Hits
    with nearly coincident preimages are cusp beaks and are discarded.
    """
    reach = p.reach()
    arcs = branch_arcs(p)
    loops = []
    polys = []
    for arc in arcs:
        t2, t3, P = _loop_param_points(p, arc, n)
        loops.append((t2, t3))
        polys.append(P)
    cands = []
    for li, P in enumerate(polys):
        for i, j, fi, fj in _segment_hits(P, P):
            if i >= j:
                continue
            sep = min(j - i, (len(P) - 1) - (j - i))
            if sep < _NODE_MIN_PARAM_SEP:
                continue
            cands.append((li, i, li, j))
    for i, j, fi, fj in _segment_hits(polys[0], polys[1]):
        cands.append((0, i, 1, j))
    nodes = []
    for la, ia, lb, ib in cands:
        pt = _refine_crossing(p, loops, la, ia, lb, ib, n)
        if pt is not None:
            nodes.append(pt)
    return _dedupe_points(nodes, 1e-5 * reach)


def count_nodes(p: Params, n: int = 3000) -> int:
    """Number of nodes of the workspace singular curves."""
    _warn_if_unstable(p, "count_nodes")
    return len(find_nodes(p, n))


def singular_point_set(p: Params, n: int = 3000) -> SingularPointSet:
    from .classify import is_unstable

    return SingularPointSet(
        cusps=find_cusps(p, max(n, 2001) | 1),
        nodes=find_nodes(p, n),
        unstable=is_unstable(p),
    )


def count_aspects(p: Params, n: int = 512) -> int:
    """Connected singularity-free domains of the (t2, t3) torus.

    det J keeps one sign inside an aspect and flips across every singular
    curve, so aspects are the torus-connected components of each sign set.
    """
    if n < 256:
        raise ValueError(f"resolution n must be >= 256, got {n}")
    from .model import det_j_grid

    t = -np.pi + (np.arange(n) + 0.5) * (2.0 * np.pi / n)
    T2, T3 = np.meshgrid(t, t, indexing="ij")
    sign = det_j_grid(p, T2, T3) > 0.0
    total = 0
    for mask in (sign, ~sign):
        total += _torus_components(mask)
    return total


def _torus_components(mask: np.ndarray) -> int:
    from scipy import ndimage

    lab, nlab = ndimage.label(mask)
    if nlab == 0:
        return 0
    parent = list(range(nlab + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for a, b in zip(lab[0, :], lab[-1, :]):
        if a and b:
            union(int(a), int(b))
    for a, b in zip(lab[:, 0], lab[:, -1]):
        if a and b:
            union(int(a), int(b))
    return len({find(k) for k in range(1, nlab + 1)})


def branch_distance(p: Params, n: int = 2048) -> float:
    """Minimum torus distance between distinct singularity branches.

    S1 and S2 live over disjoint t3 arcs, so their distance is bounded by
    the arc gaps; the axis lines (d3 <= d4) intersect a loop exactly when
    their t3 falls inside that loop's arc, which this measures exactly.
    """
    (lo1, hi1), (lo2, hi2) = branch_arcs(p)
    gap = min(_circ_dist(hi2, lo1), _circ_dist(hi1, lo2 + 2.0 * np.pi))
    dmin = gap
    for t_line in axis_line_theta3(p):
        for lo, hi in ((lo1, hi1), (lo2, hi2)):
            dmin = min(dmin, _interval_circ_dist(t_line, lo, hi))
    return float(dmin)


def _circ_dist(a: float, b: float) -> float:
    d = abs(a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def _interval_circ_dist(t: float, lo: float, hi: float) -> float:
    """Circular distance from angle t to the arc [lo, hi] (hi may exceed pi)."""
    width = hi - lo
    rel = (t - lo) % (2.0 * math.pi)
    if rel <= width:
        return 0.0
    return min(rel - width, 2.0 * math.pi - rel)


def is_generic(p: Params, tol: float = GENERIC_DISTANCE_TOL) -> bool:
    """True when no two distinct joint-space singularity branches meet."""
    return branch_distance(p) > tol


def _warn_if_unstable(p: Params, what: str) -> None:
    from .classify import is_unstable

    if is_unstable(p):
        warnings.warn(
            f"{what}: geometry lies within {INSTABILITY_BAND} of a separating "
            "surface; the count is structurally unstable here",
            StructuralInstabilityWarning,
            stacklevel=3,
        )

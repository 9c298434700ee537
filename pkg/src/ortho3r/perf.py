"""Performance indices over joint space and workspace.

Joint-space index: the inverse condition number 1/K = sigma_min/sigma_max
of the position Jacobian, swept over a uniform (theta2, theta3) grid --
theta1 drops out because rotating the base changes no singular value.
Workspace index: proportions of the 2- and 4-posture regions of the
(rho, z) half section relative to the quarter disc of radius reach(p);
this section measure is what the reported reference values use, the
solid-of-revolution measure is available as an option.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .model import JointConfig, Params, jacobian

DEFAULT_SWEEP_N = 720
DEFAULT_SECTION_N = 400


@dataclass(frozen=True)
class KinvReport:
    kinv_mean: float
    kinv_max: float
    argmax: JointConfig
    grid_step: float


@dataclass(frozen=True)
class VolumeReport:
    p4: float
    p2: float
    p_total: float
    rho_max: float
    grid: tuple[int, int]
    measure: str = "section"


@dataclass(frozen=True)
class IsoMap:
    kind: str  # kinv_mean | kinv_max | p4 | p2 | p_total
    d3_values: np.ndarray
    d4_values: np.ndarray
    r2: float
    values: np.ndarray  # shape (len(d4_values), len(d3_values))

    def __post_init__(self):
        if self.values.shape != (len(self.d4_values), len(self.d3_values)):
            raise ValueError("values shape must be (n_d4, n_d3)")

    def to_csv(self) -> str:
        lines = [
            "# ortho3r isomap v1",
            f"# kind={self.kind} r2={self.r2:.10g}",
            "# columns: d3 = " + ",".join(f"{v:.10g}" for v in self.d3_values),
            "# rows:    d4 = " + ",".join(f"{v:.10g}" for v in self.d4_values),
        ]
        for row in self.values:
            lines.append(",".join(f"{v:.10g}" for v in row))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "schema": "ortho3r-isomap-v1",
            "kind": self.kind,
            "r2": self.r2,
            "d3": [float(v) for v in self.d3_values],
            "d4": [float(v) for v in self.d4_values],
            "values": [[float(v) for v in row] for row in self.values],
        }


def inv_condition(p: Params, q: JointConfig) -> float:
    """sigma_min/sigma_max of the Jacobian: 1 isotropic, 0 singular."""
    sv = np.linalg.svd(jacobian(p, q), compute_uv=False)
    if sv[0] == 0.0:
        return 0.0
    return float(sv[2] / sv[0])


def _kinv_grid(p: Params, n: int) -> np.ndarray:
    t = np.linspace(-np.pi, np.pi, n, endpoint=False)
    T2, T3 = np.meshgrid(t, t, indexing="ij")
    c2, s2 = np.cos(T2), np.sin(T2)
    c3, s3 = np.cos(T3), np.sin(T3)
    F = p.d3 + p.d4 * c3
    G = p.d4 * s3 + p.r2
    a = 1.0 + F * c2
    Z = np.zeros_like(F)
    J = np.empty(F.shape + (3, 3))
    J[..., 0, 0] = -G
    J[..., 0, 1] = -F * s2
    J[..., 0, 2] = -p.d4 * s3 * c2
    J[..., 1, 0] = a
    J[..., 1, 1] = Z
    J[..., 1, 2] = p.d4 * c3
    J[..., 2, 0] = Z
    J[..., 2, 1] = -F * c2
    J[..., 2, 2] = p.d4 * s3 * s2
    sv = np.linalg.svd(J, compute_uv=False)
    return sv[..., 2] / sv[..., 0]


def kinv_sweep(p: Params, n: int = DEFAULT_SWEEP_N) -> KinvReport:
    """Mean and max of 1/K over an n x n grid of (theta2, theta3).

    The max is polished by a local simplex ascent from the best grid cell;
    the mean is the plain arithmetic mean over the uniform grid.
    """
    if n < 180:
        raise ValueError(f"sweep resolution must be >= 180, got {n}")
    kinv = _kinv_grid(p, n)
    step = 2.0 * np.pi / n
    i, j = np.unravel_index(np.argmax(kinv), kinv.shape)
    t = -np.pi + np.arange(n) * step
    res = minimize(
        lambda q: -inv_condition(p, JointConfig(0.0, q[0], q[1])),
        [t[i], t[j]],
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400},
    )
    kmax = max(float(kinv[i, j]), -float(res.fun))
    q = JointConfig(0.0, float(res.x[0]), float(res.x[1]))
    return KinvReport(float(kinv.mean()), min(kmax, 1.0), q, step)


def volume_proportions(
    p: Params,
    n_rho: int = DEFAULT_SECTION_N,
    n_z: int = DEFAULT_SECTION_N,
    n_theta: int = 2048,
    measure: str = "section",
) -> VolumeReport:
    """Proportions of the 2- and 4-posture regions of the workspace.

    measure="section": cell-count fractions of the positive-z quarter disc
    of radius reach(p) (the measure behind the reference values).
    measure="solid": solid-of-revolution volumes (cell weight
    2*2*pi*rho*drho*dz) against the bounding sphere (4/3)*pi*reach^3.
    """
    if n_rho < 200 or n_z < 200:
        raise ValueError("section resolutions must be >= 200")
    if measure not in ("section", "solid"):
        raise ValueError(f"unknown measure {measure!r}")
    from .ik import count_grid

    rmax = p.reach()
    drho, dz = rmax / n_rho, rmax / n_z
    rho = (np.arange(n_rho) + 0.5) * drho
    zs = (np.arange(n_z) + 0.5) * dz
    counts = count_grid(p, rho, zs, n_theta)
    if measure == "section":
        quarter = 0.25 * math.pi * rmax * rmax
        w = np.full(counts.shape[0], drho * dz)
        denom = quarter
    else:
        w = 2.0 * 2.0 * math.pi * rho * drho * dz
        denom = 4.0 / 3.0 * math.pi * rmax**3
    p2 = float((w[:, None] * (counts == 2)).sum() / denom)
    p4 = float((w[:, None] * (counts == 4)).sum() / denom)
    return VolumeReport(p4, p2, p2 + p4, rmax, (n_rho, n_z), measure)


_KINDS = ("kinv_mean", "kinv_max", "p4", "p2", "p_total")


def iso_map(
    kind: str,
    d3_values: np.ndarray,
    d4_values: np.ndarray,
    r2: float,
    inner_n: int = 240,
    section_n: int = 200,
) -> IsoMap:
    """Scalar performance field over a (d3, d4) parameter section."""
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    d3_values = np.asarray(d3_values, float)
    d4_values = np.asarray(d4_values, float)
    vals = np.empty((len(d4_values), len(d3_values)))
    for i, d4 in enumerate(d4_values):
        for j, d3 in enumerate(d3_values):
            p = Params(float(d3), float(d4), r2)
            if kind.startswith("kinv"):
                kinv = _kinv_grid(p, inner_n)
                vals[i, j] = kinv.mean() if kind == "kinv_mean" else kinv.max()
            else:
                rep = volume_proportions(p, section_n, section_n, n_theta=1024)
                vals[i, j] = getattr(rep, kind if kind != "p_total" else "p_total")
    return IsoMap(kind, d3_values, d4_values, r2, vals)


def isotropic_on_e2(
    r2: float = 1.0,
    bounds: tuple[float, float] = (0.3, 3.0),
    coarse_n: int = 180,
) -> tuple[float, float]:
    """(d3, kinv_max) of the best manipulator on the surface d4 = d3.

    1-D search along the E2 line; the family admits a fully isotropic
    posture there (kinv_max = 1).
    """

    def neg_kmax(t: float) -> float:
        rep = kinv_sweep(Params(t, t, r2), n=max(coarse_n, 180))
        return -rep.kinv_max

    res = minimize_scalar(
        neg_kmax, bounds=bounds, method="bounded", options={"xatol": 1e-4}
    )
    return float(res.x), float(-res.fun)

"""Geometry, forward kinematics and Jacobian of 3R orthogonal positioning arms.

The family: three revolute joints with mutually orthogonal consecutive axes
(twists -90 deg then +90 deg), no offset on the third body, all lengths
normalized by the length of the second body.  A manipulator is fully
described by the three positive numbers (d3, d4, r2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    t = math.fmod(theta + math.pi, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    return t - math.pi


def wrap_angles(theta: np.ndarray) -> np.ndarray:
    """Vectorized wrap to [-pi, pi)."""
    return np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi


@dataclass(frozen=True)
class Params:
    """Normalized geometry (d2 = 1) of one manipulator of the family.

    d2_scale restores physical units on demand; every internal computation
    runs on the normalized chain.
    """

    d3: float
    d4: float
    r2: float
    d2_scale: float = 1.0

    def __post_init__(self):
        for name in ("d3", "d4", "r2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(
                    f"{name} must be strictly positive and finite, got {v!r}"
                    " (degenerate geometries are outside the classified family)"
                )
        if not (math.isfinite(self.d2_scale) and self.d2_scale > 0.0):
            raise ValueError(f"d2_scale must be positive, got {self.d2_scale!r}")

    def reach(self) -> float:
        """Radius of the smallest origin-centered sphere holding the workspace."""
        return self.d4 + math.hypot(self.r2, self.d3 + 1.0)


@dataclass(frozen=True)
class JointConfig:
    """Joint angles in radians, stored wrapped to [-pi, pi)."""

    theta1: float
    theta2: float
    theta3: float

    def __post_init__(self):
        object.__setattr__(self, "theta1", wrap_angle(self.theta1))
        object.__setattr__(self, "theta2", wrap_angle(self.theta2))
        object.__setattr__(self, "theta3", wrap_angle(self.theta3))

    def as_array(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2, self.theta3])


@dataclass(frozen=True)
class CartesianPoint:
    """End-point position in the fixed base frame."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(map(math.isfinite, (self.x, self.y, self.z))):
            raise ValueError("coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


@dataclass(frozen=True)
class SectionPoint:
    """Point of the (rho, z) half cross-section of the axisymmetric workspace."""

    rho: float
    z: float

    def __post_init__(self):
        if self.rho < 0.0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")


def _fgah(p: Params, theta2: float, theta3: float):
    """Shared intermediates: F (wrist extension), G (lateral offset), a."""
    F = p.d3 + p.d4 * math.cos(theta3)
    G = p.d4 * math.sin(theta3) + p.r2
    a = 1.0 + F * math.cos(theta2)
    return F, G, a


def fk(p: Params, q: JointConfig) -> CartesianPoint:
    """Position of the end point for joint angles q.

    Closed form of the orthogonal chain: with F = d3 + d4*cos(t3),
    G = d4*sin(t3) + r2 and a = 1 + F*cos(t2),

        x = a*cos(t1) - G*sin(t1)
        y = a*sin(t1) + G*cos(t1)
        z = -F*sin(t2)
    """
    F, G, a = _fgah(p, q.theta2, q.theta3)
    c1, s1 = math.cos(q.theta1), math.sin(q.theta1)
    s = p.d2_scale
    return CartesianPoint(
        s * (a * c1 - G * s1),
        s * (a * s1 + G * c1),
        s * (-F * math.sin(q.theta2)),
    )


def jacobian(p: Params, q: JointConfig) -> np.ndarray:
    """Analytic 3x3 position Jacobian d(x,y,z)/d(t1,t2,t3).

    Every entry is a length, so singular values are directly comparable;
    no homogenization is needed for this positioning family.
    """
    c1, s1 = math.cos(q.theta1), math.sin(q.theta1)
    c2, s2 = math.cos(q.theta2), math.sin(q.theta2)
    c3, s3 = math.cos(q.theta3), math.sin(q.theta3)
    F, G, a = _fgah(p, q.theta2, q.theta3)
    d4 = p.d4
    J = np.array(
        [
            [-(a * s1 + G * c1), -F * s2 * c1, -d4 * (s3 * c2 * c1 + c3 * s1)],
            [a * c1 - G * s1, -F * s2 * s1, -d4 * (s3 * c2 * s1 - c3 * c1)],
            [0.0, -F * c2, d4 * s3 * s2],
        ]
    )
    return p.d2_scale * J


def det_j_closed(p: Params, q: JointConfig) -> float:
    """Closed-form Jacobian determinant d4*(d3 + d4*c3)*(s3 + (d3*s3 - r2*c3)*c2).

    Independent of theta1; vanishing locus is the singularity set.
    """
    c2 = math.cos(q.theta2)
    c3, s3 = math.cos(q.theta3), math.sin(q.theta3)
    F = p.d3 + p.d4 * c3
    val = p.d4 * F * (s3 + (p.d3 * s3 - p.r2 * c3) * c2)
    return p.d2_scale**3 * val


def det_j_grid(p: Params, theta2: np.ndarray, theta3: np.ndarray) -> np.ndarray:
    """Vectorized det_j_closed over broadcastable angle arrays (normalized units)."""
    c2 = np.cos(theta2)
    c3, s3 = np.cos(theta3), np.sin(theta3)
    F = p.d3 + p.d4 * c3
    return p.d4 * F * (s3 + (p.d3 * s3 - p.r2 * c3) * c2)


def reach(p: Params) -> float:
    """Reach rho_max = d4 + sqrt(r2^2 + (d3+1)^2), in d2_scale units."""
    return p.d2_scale * p.reach()


def to_section(pt: CartesianPoint) -> SectionPoint:
    """Project a Cartesian point to the (rho, z) half cross-section."""
    return SectionPoint(math.hypot(pt.x, pt.y), pt.z)


def fk_section_grid(
    p: Params, theta2: np.ndarray, theta3: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(rho, z) images of joint angles, vectorized (normalized units)."""
    c3, s3 = np.cos(theta3), np.sin(theta3)
    F = p.d3 + p.d4 * c3
    G = p.d4 * s3 + p.r2
    a = 1.0 + F * np.cos(theta2)
    return np.hypot(a, G), -F * np.sin(theta2)

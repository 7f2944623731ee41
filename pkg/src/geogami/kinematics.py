"""Planar body-frame geometry, mass-weighted offset, and world-frame COM.

The body is a four-corner ring with point masses at the ray endpoints and
a central mass at the geometric origin.  Rolling is the no-slip coordinate
phi with support radius R, so the body center translates along (R*phi, 0).
Positions are mm, angles radians; everything is double precision.

All functions are pure; states are immutable snapshots, safe for parallel
trajectory evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np


class RadiusInversionError(ValueError):
    """A contraction reached or exceeded the rest radius."""


CANONICAL_RAY_ANGLES: Tuple[float, float, float, float] = (
    math.pi / 2, 0.0, 3 * math.pi / 2, math.pi)


@dataclass(frozen=True)
class MassLayout:
    """Central mass plus four corner point masses on body-fixed rays."""

    central_mass: float = 0.25
    corner_masses: Tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    ray_angles: Tuple[float, float, float, float] = CANONICAL_RAY_ANGLES
    rest_radii: Tuple[float, float, float, float] = (94.4, 94.4, 94.4, 94.4)

    def __post_init__(self) -> None:
        if self.central_mass < 0:
            raise ValueError("central mass must be >= 0")
        if len(self.corner_masses) != 4 or len(self.ray_angles) != 4 \
                or len(self.rest_radii) != 4:
            raise ValueError("layout needs exactly 4 corners")
        if any(m < 0 for m in self.corner_masses):
            raise ValueError("corner masses must be >= 0")
        if self.total_mass <= 0:
            raise ValueError("total mass must be > 0")
        if any(r <= 0 for r in self.rest_radii):
            raise ValueError("rest radii must be > 0")
        if len({round(a % (2 * math.pi), 12) for a in self.ray_angles}) != 4:
            raise ValueError("ray angles must be distinct")

    @property
    def total_mass(self) -> float:
        return self.central_mass + sum(self.corner_masses)


def instantaneous_radius(rest_radius: float, contraction: float) -> float:
    """Instantaneous ray radius r_i = R_i - u_i (mm)."""
    if contraction < 0:
        raise ValueError(f"contraction must be >= 0, got {contraction}")
    if contraction >= rest_radius:
        raise RadiusInversionError(
            f"contraction {contraction} mm reaches rest radius {rest_radius} mm")
    return rest_radius - contraction


def radii(layout: MassLayout,
          contractions: Sequence[float]) -> Tuple[float, float, float, float]:
    """Per-corner instantaneous radii for a contraction vector."""
    if len(contractions) != 4:
        raise ValueError("need 4 contractions")
    return tuple(instantaneous_radius(R, u)
                 for R, u in zip(layout.rest_radii, contractions))


@dataclass(frozen=True)
class BodyState:
    """Snapshot of roll angle, support radius, contractions, and radii."""

    roll_angle: float
    support_radius: float
    contractions: Tuple[float, float, float, float]
    radii: Tuple[float, float, float, float]
    time: float = 0.0

    def __post_init__(self) -> None:
        if self.support_radius <= 0:
            raise ValueError("support radius must be > 0")
        if any(r <= 0 for r in self.radii):
            raise RadiusInversionError(f"non-positive radius in {self.radii}")

    @classmethod
    def from_contractions(cls, layout: MassLayout, contractions: Sequence[float],
                          roll_angle: float = 0.0,
                          support_radius: Optional[float] = None,
                          time: float = 0.0) -> "BodyState":
        contractions = tuple(float(u) for u in contractions)
        if support_radius is None:
            support_radius = max(layout.rest_radii)
        return cls(roll_angle=roll_angle, support_radius=support_radius,
                   contractions=contractions,
                   radii=radii(layout, contractions), time=time)

    @classmethod
    def at_rest(cls, layout: MassLayout, roll_angle: float = 0.0,
                support_radius: Optional[float] = None) -> "BodyState":
        return cls.from_contractions(layout, (0.0, 0.0, 0.0, 0.0),
                                     roll_angle, support_radius)


def body_center(roll_angle: float, support_radius: float) -> np.ndarray:
    """World position of the body center under no-slip rolling: (R*phi, 0)."""
    return np.array([support_radius * roll_angle, 0.0])


def rotation_matrix(roll_angle: float) -> np.ndarray:
    """Planar rotation matrix [[cos, -sin], [sin, cos]]."""
    c, s = math.cos(roll_angle), math.sin(roll_angle)
    return np.array([[c, -s], [s, c]])


def mass_offset_xy(layout: MassLayout,
                   radii_values: Sequence[float]) -> Tuple[float, float]:
    """Scalar components of the body-frame mass offset (hot-loop friendly)."""
    total = layout.total_mass
    if total <= 0:
        raise ValueError("total mass must be > 0")
    x = 0.0
    y = 0.0
    for m, r, a in zip(layout.corner_masses, radii_values, layout.ray_angles):
        x += m * r * math.cos(a)
        y += m * r * math.sin(a)
    return x / total, y / total


def body_mass_offset(layout: MassLayout, radii_values: Sequence[float]) -> np.ndarray:
    """Mass-weighted COM offset in the body frame.

    d_b = (1/M_T) * sum_i m_i * r_i * (cos a_i, sin a_i); at the canonical
    ray angles this reduces to
    ((m2*r2 - m4*r4)/M_T, (m1*r1 - m3*r3)/M_T).
    """
    return np.array(mass_offset_xy(layout, radii_values))


def world_com(layout: MassLayout, state: BodyState) -> np.ndarray:
    """World-frame center of mass r_G = r_s + R(phi) * d_b."""
    dbx, dby = mass_offset_xy(layout, state.radii)
    c, s = math.cos(state.roll_angle), math.sin(state.roll_angle)
    return np.array([state.support_radius * state.roll_angle + c * dbx - s * dby,
                     s * dbx + c * dby])


def offset_point(state: BodyState) -> np.ndarray:
    """Mass-imbalance offset point of the kinematic model.

    (R*phi + (r2 - r4)*cos(phi), -(r1 - r3)*sin(phi)): the horizontal ray
    pair feeds the x offset through cos(phi), the vertical pair feeds the
    y offset through sin(phi).
    """
    r1, r2, r3, r4 = state.radii
    phi = state.roll_angle
    return np.array([
        state.support_radius * phi + (r2 - r4) * math.cos(phi),
        -(r1 - r3) * math.sin(phi),
    ])


def com_velocity(state: BodyState, roll_rate: float, support_radius_rate: float,
                 radii_rates: Sequence[float]) -> np.ndarray:
    """Analytic time derivative of the offset point.

    The y component is the exact derivative of the offset point above,
    ydot = -(r1dot - r3dot)*sin(phi) - phidot*(r1 - r3)*cos(phi); it is
    validated against central finite differences of offset_point.
    """
    if len(radii_rates) != 4:
        raise ValueError("need 4 radius rates")
    r1, r2, r3, r4 = state.radii
    r1d, r2d, r3d, r4d = radii_rates
    phi = state.roll_angle
    phid = roll_rate
    c, s = math.cos(phi), math.sin(phi)
    xdot = support_radius_rate * phi + state.support_radius * phid \
        + (r2d - r4d) * c - phid * (r2 - r4) * s
    ydot = -(r1d - r3d) * s - phid * (r1 - r3) * c
    return np.array([xdot, ydot])

"""3D primitives for the service area: points, cylindrical blockages, and the
line-of-sight occlusion test.

Blockages are solid vertical cylinders standing on the floor (z = 0). A direct
antenna-to-user path exists only if the closed 3D segment between them misses
every cylinder. Grazing contact (clearance exactly equal to the radius) counts
as blocked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Vec3:
    """Point in meters. The floor is z = 0; antennas sit at z = region height."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite coordinate in {self!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def distance_to(self, other: "Vec3") -> float:
        return math.dist((self.x, self.y, self.z), (other.x, other.y, other.z))


@dataclass(frozen=True)
class Region:
    """Centered rectangular service area.

    Coordinates satisfy x in [-width/2, width/2] and y in [-depth/2, depth/2];
    waveguides (and thus antennas) are mounted at z = height.
    """

    width: float
    depth: float
    height: float

    def __post_init__(self) -> None:
        if self.width <= 0 or self.depth <= 0 or self.height <= 0:
            raise ValueError("region dimensions must be positive")

    def contains_xy(self, x: float, y: float) -> bool:
        return abs(x) <= self.width / 2 and abs(y) <= self.depth / 2


@dataclass(frozen=True)
class Blockage:
    """Solid vertical cylinder {(p, z): |p - center| <= radius, 0 <= z <= height}."""

    center_x: float
    center_y: float
    radius: float
    height: float

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("blockage radius must be positive")
        if self.height <= 0:
            raise ValueError("blockage height must be positive")


def segment_blocked(a: Vec3, b: Vec3, blockage: Blockage) -> bool:
    """True iff the closed segment a->b intersects the solid cylinder.

    Parametrize p(t) = a + t (b - a) for t in [0, 1]. The horizontal
    projection lies inside the footprint disk on a t-interval obtained from a
    quadratic; the altitude lies inside [0, height] on a second interval.
    The segment is blocked iff the two intervals overlap within [0, 1].
    """
    if a == b:
        raise ValueError("degenerate segment: endpoints coincide")

    # Disk containment of the horizontal projection: |w + t v|^2 <= r^2.
    wx = a.x - blockage.center_x
    wy = a.y - blockage.center_y
    vx = b.x - a.x
    vy = b.y - a.y
    aa = vx * vx + vy * vy
    bb = 2.0 * (wx * vx + wy * vy)
    cc = wx * wx + wy * wy - blockage.radius * blockage.radius
    if aa == 0.0:
        # Projection is a single point; either always inside or never.
        if cc > 0.0:
            return False
        t_lo, t_hi = 0.0, 1.0
    else:
        disc = bb * bb - 4.0 * aa * cc
        if disc < 0.0:
            return False
        root = math.sqrt(disc)
        t_lo = max((-bb - root) / (2.0 * aa), 0.0)
        t_hi = min((-bb + root) / (2.0 * aa), 1.0)
        if t_lo > t_hi:
            return False

    # Altitude window: 0 <= z(t) <= height.
    dz = b.z - a.z
    if dz == 0.0:
        if not 0.0 <= a.z <= blockage.height:
            return False
        z_lo, z_hi = 0.0, 1.0
    else:
        t0 = (0.0 - a.z) / dz
        t1 = (blockage.height - a.z) / dz
        z_lo = max(min(t0, t1), 0.0)
        z_hi = min(max(t0, t1), 1.0)
        if z_lo > z_hi:
            return False

    return max(t_lo, z_lo) <= min(t_hi, z_hi)


def los_indicator(antenna: Vec3, user: Vec3, blockages: Sequence[Blockage]) -> int:
    """Binary flag: 1 if the direct antenna-user segment clears every blockage."""
    for blockage in blockages:
        if segment_blocked(antenna, user, blockage):
            return 0
    return 1


def blocked_pairs(starts: np.ndarray, ends: np.ndarray, blockage: Blockage) -> np.ndarray:
    """Vectorized segment-vs-cylinder test for every (start, end) pair.

    ``starts`` has shape (A, 3) and ``ends`` shape (U, 3); returns a boolean
    (A, U) array matching :func:`segment_blocked` elementwise. Used to build
    the full LoS indicator grid in one pass per blockage.
    """
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    w = starts[:, None, :2] - np.array([blockage.center_x, blockage.center_y])
    v = ends[None, :, :2] - starts[:, None, :2]
    aa = (v * v).sum(axis=-1)
    bb = 2.0 * (w * v).sum(axis=-1)
    cc = (w * w).sum(axis=-1) - blockage.radius**2

    point_like = aa == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = bb * bb - 4.0 * aa * cc
        root = np.sqrt(np.maximum(disc, 0.0))
        t_lo = np.maximum((-bb - root) / (2.0 * aa), 0.0)
        t_hi = np.minimum((-bb + root) / (2.0 * aa), 1.0)
    disk_hit = np.where(
        point_like,
        cc <= 0.0,
        (disc >= 0.0) & (t_lo <= t_hi),
    )
    t_lo = np.where(point_like, 0.0, t_lo)
    t_hi = np.where(point_like, 1.0, t_hi)

    az = starts[:, None, 2]
    dz = ends[None, :, 2] - az
    level = dz == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = (0.0 - az) / dz
        t1 = (blockage.height - az) / dz
        z_lo = np.maximum(np.minimum(t0, t1), 0.0)
        z_hi = np.minimum(np.maximum(t0, t1), 1.0)
    level_inside = (az >= 0.0) & (az <= blockage.height)
    z_hit = np.where(level, np.broadcast_to(level_inside, z_lo.shape), z_lo <= z_hi)
    z_lo = np.where(level, 0.0, z_lo)
    z_hi = np.where(level, 1.0, z_hi)

    overlap = np.maximum(t_lo, z_lo) <= np.minimum(t_hi, z_hi)
    return disk_hit & z_hit & overlap

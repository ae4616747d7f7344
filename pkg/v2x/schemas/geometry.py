import math
import numpy as np

from dataclasses import dataclass


GEOM_TOL:float = 1e-9   # Absolute tolerance (meters) for every geometric comparison


def wrap_angle(angle:float) -> float:
    """Wraps the given angle (radians) into [-pi, pi)."""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True, slots=True)
class Vec3:

    x:float     # meters
    y:float     # meters
    z:float     # meters

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f'Vec3 components must be finite, got ({self.x}, {self.y}, {self.z}).')

    def __add__(self, other:'Vec3') -> 'Vec3':
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other:'Vec3') -> 'Vec3':
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scale(self, k:float) -> 'Vec3':
        return Vec3(self.x * k, self.y * k, self.z * k)

    def dot(self, other:'Vec3') -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    @classmethod
    def from_array(cls, arr) -> 'Vec3':
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))


@dataclass(frozen=True, slots=True)
class Segment:
    """A directed line segment; LOS queries require positive length."""

    start:Vec3
    end:Vec3

    def length(self) -> float:
        return (self.end - self.start).norm()


@dataclass(frozen=True, slots=True)
class OrientedBox:
    """A box rotated about the vertical axis. Vehicles and buildings (yaw 0) are both boxes."""

    center:Vec3         # meters
    half_extents:Vec3   # meters, all > 0
    yaw:float           # radians, stored wrapped into [-pi, pi)

    def __post_init__(self):
        h = self.half_extents
        if min(h.x, h.y, h.z) <= 0:
            raise ValueError(f'OrientedBox half_extents must all be > 0, got ({h.x}, {h.y}, {h.z}).')
        if not math.isfinite(self.yaw):
            raise ValueError(f'OrientedBox yaw must be finite, got {self.yaw}.')

        # Frozen dataclass, so bypass __setattr__ to normalize the yaw
        object.__setattr__(self, 'yaw', wrap_angle(float(self.yaw)))

    def contains(self, p:Vec3, tol:float=GEOM_TOL) -> bool:
        """Checks if the given point lies inside or on the box."""
        dx, dy, dz = p.x - self.center.x, p.y - self.center.y, p.z - self.center.z
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        h = self.half_extents
        return abs(lx) <= h.x + tol and abs(ly) <= h.y + tol and abs(dz) <= h.z + tol


@dataclass(frozen=True, slots=True)
class LosResult:
    """Outcome of a LOS query: clear, or blocked by the obstacle with the smallest entry parameter."""

    clear:bool
    blocker:str|None = None
    entry_t:float|None = None   # Entry parameter of the reported blocker along a->b

"""Static obstacle scenes and a range/FOV-limited lidar simulator.

Scenes are built from axis-aligned boxes and vertical cylinders. The lidar
model casts a deterministic grid of rays (elevation-major, then azimuth) and
returns world-frame hit points for every ray that intersects a primitive
within range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_EPS = 1e-12


def _vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector components must be finite")
    return a


@dataclass(frozen=True)
class AxisAlignedBox:
    min_corner: np.ndarray
    max_corner: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "min_corner", _vec3(self.min_corner))
        object.__setattr__(self, "max_corner", _vec3(self.max_corner))
        if not np.all(self.min_corner < self.max_corner):
            raise ValueError("box requires min < max componentwise")

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.min_corner) and np.all(p <= self.max_corner))

    def distance(self, p) -> float:
        """Distance from p to the solid box (0 inside)."""
        p = np.asarray(p, dtype=float)
        d = np.maximum(self.min_corner - p, 0.0) + np.maximum(p - self.max_corner, 0.0)
        return float(np.linalg.norm(d))

    def surface_distance(self, p) -> float:
        """Unsigned distance from p to the box surface."""
        p = np.asarray(p, dtype=float)
        if self.contains(p):
            return float(min(np.min(p - self.min_corner), np.min(self.max_corner - p)))
        return self.distance(p)

    def raycast(self, origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Slab test. Returns hit parameter t per ray (inf = miss)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / dirs
            t1 = (self.min_corner - origins) * inv
            t2 = (self.max_corner - origins) * inv
        # Parallel rays: replace nan slabs with +/- inf depending on whether
        # the origin lies inside the slab.
        lo = np.where(np.isnan(t1), np.where(
            (origins >= self.min_corner) & (origins <= self.max_corner), -np.inf, np.inf), np.minimum(t1, t2))
        hi = np.where(np.isnan(t2), np.where(
            (origins >= self.min_corner) & (origins <= self.max_corner), np.inf, -np.inf), np.maximum(t1, t2))
        t_enter = np.max(lo, axis=-1)
        t_exit = np.min(hi, axis=-1)
        hit = (t_enter <= t_exit) & (t_exit > _EPS)
        t = np.where(t_enter > _EPS, t_enter, t_exit)
        return np.where(hit, t, np.inf)


@dataclass(frozen=True)
class VerticalCylinder:
    center_xy: np.ndarray
    radius: float
    z_min: float
    z_max: float

    def __post_init__(self):
        c = np.asarray(self.center_xy, dtype=float)
        if c.shape != (2,):
            raise ValueError("cylinder center must be a 2-vector")
        object.__setattr__(self, "center_xy", c)
        if self.radius <= 0:
            raise ValueError("cylinder radius must be positive")
        if self.z_min >= self.z_max:
            raise ValueError("cylinder requires z_min < z_max")

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return (np.hypot(p[0] - self.center_xy[0], p[1] - self.center_xy[1]) <= self.radius
                and self.z_min <= p[2] <= self.z_max)

    def distance(self, p) -> float:
        """Distance from p to the solid cylinder (0 inside)."""
        p = np.asarray(p, dtype=float)
        dr = np.hypot(p[0] - self.center_xy[0], p[1] - self.center_xy[1]) - self.radius
        dz = max(self.z_min - p[2], p[2] - self.z_max)
        dr = max(dr, 0.0)
        dz = max(dz, 0.0)
        return float(np.hypot(dr, dz))

    def surface_distance(self, p) -> float:
        p = np.asarray(p, dtype=float)
        if self.contains(p):
            dr = self.radius - np.hypot(p[0] - self.center_xy[0], p[1] - self.center_xy[1])
            dz = min(p[2] - self.z_min, self.z_max - p[2])
            return float(min(dr, dz))
        return self.distance(p)

    def raycast(self, origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        n = origins.shape[0]
        cands = np.full((n, 3), np.inf)

        # Lateral surface: quadratic in the XY plane.
        ox = origins[:, 0] - self.center_xy[0]
        oy = origins[:, 1] - self.center_xy[1]
        dx, dy = dirs[:, 0], dirs[:, 1]
        a = dx * dx + dy * dy
        b = 2.0 * (ox * dx + oy * dy)
        c = ox * ox + oy * oy - self.radius ** 2
        disc = b * b - 4.0 * a * c
        with np.errstate(divide="ignore", invalid="ignore"):
            sq = np.sqrt(np.maximum(disc, 0.0))
            t_lo = (-b - sq) / (2.0 * a)
            t_hi = (-b + sq) / (2.0 * a)
        for i, t_side in enumerate((t_lo, t_hi)):
            z = origins[:, 2] + t_side * dirs[:, 2]
            ok = (disc >= 0) & (a > _EPS) & (t_side > _EPS) & (z >= self.z_min) & (z <= self.z_max)
            cands[:, i] = np.where(ok, t_side, np.inf)

        # Cap planes.
        dz = dirs[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            for z_cap in (self.z_min, self.z_max):
                t_cap = (z_cap - origins[:, 2]) / dz
                px = origins[:, 0] + t_cap * dirs[:, 0] - self.center_xy[0]
                py = origins[:, 1] + t_cap * dirs[:, 1] - self.center_xy[1]
                ok = (np.abs(dz) > _EPS) & (t_cap > _EPS) & (px * px + py * py <= self.radius ** 2)
                cands = np.column_stack([cands, np.where(ok, t_cap, np.inf)])

        return np.min(cands, axis=1)


Primitive = AxisAlignedBox | VerticalCylinder


@dataclass(frozen=True)
class Scene:
    obstacles: tuple
    world_bounds: AxisAlignedBox

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        for i, ob in enumerate(self.obstacles):
            if isinstance(ob, AxisAlignedBox):
                lo, hi = ob.min_corner, ob.max_corner
            elif isinstance(ob, VerticalCylinder):
                lo = np.array([ob.center_xy[0] - ob.radius, ob.center_xy[1] - ob.radius, ob.z_min])
                hi = np.array([ob.center_xy[0] + ob.radius, ob.center_xy[1] + ob.radius, ob.z_max])
            else:
                raise ValueError(f"obstacle {i}: unsupported primitive {type(ob).__name__}")
            if not (np.all(lo >= self.world_bounds.min_corner) and np.all(hi <= self.world_bounds.max_corner)):
                raise ValueError(f"obstacle {i} extends outside world_bounds")

    def clearance(self, p) -> float:
        """Distance from p to the nearest obstacle (0 inside any obstacle)."""
        if not self.obstacles:
            return float("inf")
        return min(ob.distance(p) for ob in self.obstacles)

    def surface_distance(self, p) -> float:
        if not self.obstacles:
            return float("inf")
        return min(ob.surface_distance(p) for ob in self.obstacles)


@dataclass(frozen=True)
class LidarModel:
    """Spinning-lidar geometry; defaults mirror a VLP-16-class sensor."""

    range_max: float = 100.0
    fov_h: float = 360.0          # degrees
    fov_v: float = 30.0           # degrees
    rays_h: int = 360
    channels_v: int = 16
    mount_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    noise_std: float = 0.0        # additive range noise, meters
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mount_offset", _vec3(self.mount_offset))
        if self.range_max <= 0:
            raise ValueError("range_max must be positive")
        if not (0.0 < self.fov_h <= 360.0) or not (0.0 < self.fov_v <= 360.0):
            raise ValueError("fov_h and fov_v must lie in (0, 360] degrees")
        if self.rays_h < 1 or self.channels_v < 1:
            raise ValueError("rays_h and channels_v must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")

    def azimuths(self, yaw: float) -> np.ndarray:
        fov = np.deg2rad(self.fov_h)
        if self.rays_h == 1:
            return np.array([yaw])
        if self.fov_h >= 360.0 - 1e-12:
            # Full revolution: endpoint would duplicate the first sample.
            return yaw - fov / 2.0 + np.arange(self.rays_h) * (fov / self.rays_h)
        return yaw - fov / 2.0 + np.arange(self.rays_h) * (fov / (self.rays_h - 1))

    def elevations(self) -> np.ndarray:
        fov = np.deg2rad(self.fov_v)
        if self.channels_v == 1:
            return np.array([0.0])
        return -fov / 2.0 + np.arange(self.channels_v) * (fov / (self.channels_v - 1))


def raycast(scene: Scene, sensor_pose: dict, lidar: LidarModel) -> np.ndarray:
    """Simulate one scan; returns an (M, 3) array of world-frame hit points.

    Ray order is elevation-major then azimuth; misses are dropped. Pure:
    identical inputs produce bit-identical clouds.
    """
    position = _vec3(sensor_pose["position"])
    yaw = float(sensor_pose["yaw"])
    if not scene.world_bounds.contains(position):
        raise ValueError("sensor pose outside world_bounds")

    cy, sy = np.cos(yaw), np.sin(yaw)
    off = lidar.mount_offset
    origin = position + np.array([cy * off[0] - sy * off[1], sy * off[0] + cy * off[1], off[2]])

    az = lidar.azimuths(yaw)
    el = lidar.elevations()
    # Elevation-major grid of unit directions.
    el_g, az_g = np.meshgrid(el, az, indexing="ij")
    ce = np.cos(el_g).ravel()
    dirs = np.column_stack([ce * np.cos(az_g).ravel(), ce * np.sin(az_g).ravel(), np.sin(el_g).ravel()])
    origins = np.broadcast_to(origin, dirs.shape)

    t_best = np.full(dirs.shape[0], np.inf)
    for ob in scene.obstacles:
        t_best = np.minimum(t_best, ob.raycast(origins, dirs))

    if lidar.noise_std > 0:
        rng = np.random.default_rng(lidar.seed)
        noise = rng.normal(0.0, lidar.noise_std, size=t_best.shape)
        t_best = np.where(np.isfinite(t_best), np.maximum(t_best + noise, 0.0), t_best)

    hit = t_best <= lidar.range_max
    return origin + t_best[hit, None] * dirs[hit]

"""Synthetic single-wall world with a ray-cast pinhole camera.

World frame is north-east-down: x forward towards the wall, y to the right,
z down (heights are negative z). The UAV camera looks along the body x axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pose import CAMERA_FROM_BODY, CameraIntrinsics, CameraPose, WindowGeometry, project_point, rot_z

DOWN = np.array([0.0, 0.0, 1.0])


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle on the wall, centre given in world coordinates."""

    center: tuple[float, float, float]
    width: float
    height: float
    color: tuple[int, int, int] = (128, 128, 128)


@dataclass(frozen=True)
class WorldModel:
    wall_point: tuple[float, float, float] = (10.0, 0.0, 0.0)
    # inward normal: from the approach side into the building
    wall_normal: tuple[float, float, float] = (1.0, 0.0, 0.0)
    window: Rect = Rect((10.0, 0.0, -1.5), 1.0, 0.8, (20, 20, 28))
    wall_color: tuple[int, int, int] = (200, 200, 200)
    background_color: tuple[int, int, int] = (90, 120, 160)
    decoys: tuple[Rect, ...] = (
        Rect((10.0, -2.3, -1.4), 1.3, 1.0, (128, 128, 128)),
        Rect((10.0, 2.3, -1.6), 1.2, 0.95, (150, 110, 90)),
    )
    noise_sigma: float = 0.0

    def __post_init__(self):
        errors = self.validation_errors()
        if errors:
            raise ValueError("; ".join(errors))

    def validation_errors(self) -> list[str]:
        errs = []
        n = np.asarray(self.wall_normal, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            errs.append("wall_normal: must be unit length")
        elif abs(n @ DOWN) > 1 - 1e-9:
            errs.append("wall_normal: wall must not be horizontal")
        if self.noise_sigma < 0:
            errs.append("noise_sigma: must be >= 0")
        if errs:
            return errs
        rects = [("window", self.window)] + [(f"decoy.{i}", d) for i, d in enumerate(self.decoys)]
        for name, r in rects:
            if not (r.width > 0 and r.height > 0):
                errs.append(f"{name}: width and height must be positive")
            elif abs((np.asarray(r.center) - self.wall_point) @ n) > 1e-9:
                errs.append(f"{name}: centre is not on the wall plane")
        if not errs:
            boxes = [(name, self.plane_box(r)) for name, r in rects]
            for (na, a), (nb, b) in _pairs(boxes):
                if a[0] < b[1] and b[0] < a[1] and a[2] < b[3] and b[2] < a[3]:
                    errs.append(f"{nb}: overlaps {na}")
        return errs

    @property
    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Wall frame: right, down, inward normal (window plane X, Y, Z)."""
        n = np.asarray(self.wall_normal, dtype=float)
        right = np.cross(DOWN, n)
        right /= np.linalg.norm(right)
        down = np.cross(n, right)
        return right, down, n

    def plane_coords(self, pts) -> np.ndarray:
        """Wall-plane (right, down) coordinates relative to the window centre."""
        right, down, _ = self.axes
        rel = np.asarray(pts, dtype=float) - np.asarray(self.window.center)
        return np.stack([rel @ right, rel @ down], axis=-1)

    def plane_box(self, r: Rect) -> tuple[float, float, float, float]:
        cu, cv = self.plane_coords(r.center)
        return (cu - r.width / 2, cu + r.width / 2, cv - r.height / 2, cv + r.height / 2)

    @property
    def geometry(self) -> WindowGeometry:
        return WindowGeometry(self.window.width, self.window.height)

    @property
    def window_corners_world(self) -> np.ndarray:
        right, down, _ = self.axes
        c = np.asarray(self.window.center)
        return np.array([c + u * right + v * down for u, v in self.geometry.corners])


def _pairs(items):
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            yield items[i], items[j]


@dataclass(frozen=True)
class UavState:
    x: float
    y: float
    z: float
    yaw: float = 0.0

    def __post_init__(self):
        if not -math.pi < self.yaw <= math.pi:
            raise ValueError(f"yaw must lie in (-pi, pi], got {self.yaw}")

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class NavCommand:
    """Body-frame increments.

    ``forward`` along the camera axis, ``lateral`` positive to the LEFT,
    ``vertical`` positive down, ``yaw`` positive turning right. Lateral is
    left-positive so that a positive relative yaw (turned right) is reduced
    by a negative lateral step.
    """

    forward: float = 0.0
    lateral: float = 0.0
    vertical: float = 0.0
    yaw: float = 0.0

    @property
    def translates(self) -> bool:
        return self.forward != 0.0 or self.lateral != 0.0 or self.vertical != 0.0


@dataclass(frozen=True)
class StepLimits:
    forward: float = 0.25
    lateral: float = 0.25
    vertical: float = 0.25
    yaw: float = math.radians(10.0)


def step(uav: UavState, cmd: NavCommand, limits: StepLimits = StepLimits()) -> UavState:
    """Apply a command kinematically: yaw first, then translate in the new body frame."""
    for name in ("forward", "lateral", "vertical", "yaw"):
        v = getattr(cmd, name)
        if not abs(v) <= getattr(limits, name):
            raise ValueError(f"command {name}={v:.6g} exceeds the limit {getattr(limits, name):.6g}")
    yaw = wrap_angle(uav.yaw + cmd.yaw)
    c, s = math.cos(yaw), math.sin(yaw)
    return UavState(
        x=uav.x + c * cmd.forward + s * cmd.lateral,
        y=uav.y + s * cmd.forward - c * cmd.lateral,
        z=uav.z + cmd.vertical,
        yaw=yaw,
    )


def world_from_camera(uav: UavState) -> np.ndarray:
    """Rotation taking camera-frame vectors to world vectors."""
    return rot_z(uav.yaw) @ CAMERA_FROM_BODY.T


def camera_pose(world: WorldModel, uav: UavState) -> CameraPose:
    """True pose of the camera relative to the window plane frame."""
    right, down, n = world.axes
    plane_to_world = np.column_stack([right, down, n])
    cam_from_world = world_from_camera(uav).T
    R = cam_from_world @ plane_to_world
    t = cam_from_world @ (np.asarray(world.window.center) - uav.position)
    return CameraPose(R=R, t=t)


def _ray_labels(world: WorldModel, uav: UavState, K: CameraIntrinsics, u, v) -> np.ndarray:
    """Surface hit by the ray through pixel position ``(u, v)`` (broadcast arrays).

    0 is background, 1 the wall, then the decoys in order and last the window.
    """
    p0 = np.asarray(world.wall_point, dtype=float)
    right, down, n = world.axes
    cam = uav.position
    a = (np.asarray(u, dtype=float) - K.cx) / K.fx
    b = (np.asarray(v, dtype=float) - K.cy) / K.fy
    W = world_from_camera(uav)

    def along(axis):
        # axis . (W @ [a, b, 1]) for every ray
        c = axis @ W
        return c[0] * a + c[1] * b + c[2]

    denom = along(n)
    num = (p0 - cam) @ n
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = num / denom
    hit = np.isfinite(dist) & (dist > 0)
    dist = np.where(hit, dist, 0.0)
    rel = cam - np.asarray(world.window.center)
    pu = rel @ right + dist * along(right)
    pv = rel @ down + dist * along(down)
    label = hit.astype(np.uint8)
    for k, r in enumerate(world.decoys + (world.window,)):
        u0, u1, v0, v1 = world.plane_box(r)
        label[hit & (pu >= u0) & (pu < u1) & (pv >= v0) & (pv < v1)] = k + 2
    return label


def render(world: WorldModel, uav: UavState, K: CameraIntrinsics, width: int, height: int,
           seed: int = 0, samples: int = 1) -> np.ndarray:
    """Ray-cast the wall as seen from the UAV camera.

    Pixel centres sit at integer coordinates. With the default ``samples=1``
    one ray is cast through each pixel centre. With ``samples > 1`` each
    pixel averages that many rays spread over its area (see
    :func:`pixel_sample_offsets`). Only pixels crossed by a boundary need the
    extra rays (their corner and centre labels disagree, or a rectangle
    corner projects inside them); every other pixel is uniform.
    """
    p0 = np.asarray(world.wall_point, dtype=float)
    _, _, n = world.axes
    if abs((uav.position - p0) @ n) < 1e-9:
        raise ValueError("camera lies on the wall plane")
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")

    rects = world.decoys + (world.window,)
    palette = np.array(
        [world.background_color, world.wall_color] + [r.color for r in rects], dtype=np.float64
    )
    cols = np.arange(width, dtype=float)
    rows = np.arange(height, dtype=float)
    label = _ray_labels(world, uav, K, cols[None, :], rows[:, None])
    img = palette[label]

    if samples > 1:
        corners = _ray_labels(
            world, uav, K, np.append(cols, width)[None, :] - 0.5, np.append(rows, height)[:, None] - 0.5
        )
        mixed = np.zeros((height, width), dtype=bool)
        for dy in (0, 1):
            for dx in (0, 1):
                mixed |= corners[dy:dy + height, dx:dx + width] != label
        pose = camera_pose(world, uav)
        for r in rects:
            for x, y in _rect_plane_corners(world, r):
                xc = pose.R @ np.array([x, y, 0.0]) + pose.t
                if xc[2] > 0:
                    px, py = K.fx * xc[0] / xc[2] + K.cx, K.fy * xc[1] / xc[2] + K.cy
                    ix, iy = int(np.floor(px + 0.5)), int(np.floor(py + 0.5))
                    if 0 <= ix < width and 0 <= iy < height:
                        mixed[iy, ix] = True
        iy, ix = np.nonzero(mixed)
        if len(iy):
            du, dv = pixel_sample_offsets(samples)
            sub = _ray_labels(world, uav, K, ix[:, None] + du[None, :], iy[:, None] + dv[None, :])
            img[iy, ix] = palette[sub].sum(axis=1) / samples

    if world.noise_sigma > 0:
        rng = np.random.default_rng(seed)
        img = img + rng.normal(0.0, world.noise_sigma, img.shape)
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def pixel_sample_offsets(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n`` sample offsets in ``[-0.5, 0.5)^2`` on a rank-1 (Fibonacci style) lattice.

    Every sample has its own column and its own row, so the coverage of an
    edge parallel to either pixel axis is resolved to ``1 / n`` pixel, and
    the golden-ratio generator keeps the points evenly spread in between.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    g = max(1, int(round(n * (math.sqrt(5.0) - 1.0) / 2.0)))
    while math.gcd(g, n) != 1:
        g += 1
    k = np.arange(n)
    return (k + 0.5) / n - 0.5, ((k * g) % n + 0.5) / n - 0.5


def _rect_plane_corners(world: WorldModel, r: Rect):
    u0, u1, v0, v1 = world.plane_box(r)
    return [(u0, v0), (u1, v0), (u1, v1), (u0, v1)]


@dataclass(frozen=True)
class GroundTruth:
    relative_yaw: float
    corners: np.ndarray | None  # TL, TR, BR, BL pixels; None if any corner is behind the camera
    crossed: bool


def relative_yaw(world: WorldModel, uav: UavState) -> float:
    """Signed heading of the camera relative to the inward wall normal (right positive)."""
    n = np.asarray(world.wall_normal, dtype=float)
    return wrap_angle(uav.yaw - math.atan2(n[1], n[0]))


def crossed_window(world: WorldModel, uav: UavState) -> bool:
    """True once the UAV is past the wall plane within the opening."""
    right, down, n = world.axes
    depth = (uav.position - np.asarray(world.wall_point)) @ n
    if depth <= 0:
        return False
    u, v = world.plane_coords(uav.position)
    return abs(u) <= world.window.width / 2 and abs(v) <= world.window.height / 2


def window_corner_pixels(world: WorldModel, uav: UavState, K: CameraIntrinsics) -> np.ndarray:
    pose = camera_pose(world, uav)
    return np.array([project_point(K, pose, c) for c in world.geometry.corners])


def ground_truth(world: WorldModel, uav: UavState, K: CameraIntrinsics) -> GroundTruth:
    try:
        corners = window_corner_pixels(world, uav, K)
    except ValueError:
        corners = None
    return GroundTruth(relative_yaw(world, uav), corners, crossed_window(world, uav))


def facing_state(world: WorldModel, distance: float, lateral: float = 0.0, vertical: float = 0.0,
                 yaw_offset: float = 0.0) -> UavState:
    """UAV ``distance`` in front of the window centre, heading along the normal plus ``yaw_offset``."""
    right, down, n = world.axes
    p = np.asarray(world.window.center) - distance * n + lateral * right + vertical * down
    heading = math.atan2(n[1], n[0])
    return UavState(float(p[0]), float(p[1]), float(p[2]), wrap_angle(heading + yaw_offset))


@dataclass(frozen=True)
class Camera:
    """Intrinsics, image size and rays per pixel.

    The simulated sensor integrates light over each pixel area with
    ``samples`` rays, like a real camera; ``samples=1`` gives point samples
    through the pixel centres.
    """

    K: CameraIntrinsics = field(default_factory=lambda: CameraIntrinsics(380.0, 380.0, 320.0, 240.0))
    width: int = 640
    height: int = 480
    samples: int = 256

    def render(self, world: WorldModel, uav: UavState, seed: int = 0) -> np.ndarray:
        return render(world, uav, self.K, self.width, self.height, seed=seed, samples=self.samples)


def reference_histogram(world: WorldModel, camera: Camera, distance: float = 4.0) -> np.ndarray:
    """Colour histogram of the window interior seen head-on: the target template."""
    from .detect.histogram import region_histogram

    uav = facing_state(world, distance)
    frame = camera.render(world, uav)
    return region_histogram(frame, window_corner_pixels(world, uav, camera.K))

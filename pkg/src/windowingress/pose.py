"""Planar homography estimation and camera pose recovery.

Frames
------
Window plane: origin at the window centre, X to the right along the wall,
Y downwards, Z pointing through the opening (away from an approaching camera).
Window points have Z = 0.

Camera (optical): x right, y down, z along the optical axis. A pose ``(R, t)``
maps window-plane coordinates to camera coordinates, ``x_c = R @ X + t``.

Relative angles: the camera attitude expressed in vehicle-style axes
(x forward, y right, z down) relative to the window, i.e. the rotation
``B.T @ R.T @ B`` with ``B = CAMERA_FROM_BODY``. Euler angles use the
Z-Y-X composition ``R = Rz(psi) @ Ry(phi) @ Rx(theta)``, so ``psi`` is the
heading of the camera relative to the window normal (positive when turned
to the right), ``phi`` the pitch and ``theta`` the roll.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# camera optical axes expressed from forward-right-down body axes
CAMERA_FROM_BODY = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])

GIMBAL_EPS = 1e-9


class PoseError(ValueError):
    """Pose could not be estimated from the given data."""


class DegenerateHomographyError(PoseError):
    pass


class BehindCameraError(PoseError):
    pass


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def inverse(self) -> np.ndarray:
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ]
        )


@dataclass(frozen=True)
class CameraPose:
    R: np.ndarray
    t: np.ndarray
    # how far [r1 r2] was from orthonormal before projection onto SO(3)
    residual: float = 0.0


class EulerAngles(NamedTuple):
    theta: float  # roll
    phi: float  # pitch
    psi: float  # yaw

    def degrees(self) -> tuple[float, float, float]:
        return tuple(float(np.degrees(a)) for a in self)


@dataclass(frozen=True)
class WindowGeometry:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"window size must be positive, got {self.width} x {self.height}")

    @property
    def corners(self) -> np.ndarray:
        """Plane coordinates TL, TR, BR, BL, matching the detector's corner order."""
        w, h = self.width / 2.0, self.height / 2.0
        return np.array([[-w, -h], [w, -h], [w, h], [-w, h]])


def normalize_homography(H) -> np.ndarray:
    H = np.asarray(H, dtype=np.float64)
    if abs(H[2, 2]) > 1e-12 * np.abs(H).max():
        return H / H[2, 2]
    return H / np.linalg.norm(H)


def _hartley(pts: np.ndarray) -> np.ndarray:
    centre = pts.mean(axis=0)
    mean_dist = np.mean(np.hypot(*(pts - centre).T))
    if mean_dist == 0:
        raise DegenerateHomographyError("all points coincide")
    s = np.sqrt(2.0) / mean_dist
    return np.array([[s, 0.0, -s * centre[0]], [0.0, s, -s * centre[1]], [0.0, 0.0, 1.0]])


def _has_collinear_triple(pts: np.ndarray, tol: float = 1e-9) -> bool:
    scale = max(np.ptp(pts, axis=0).max(), 1e-300)
    for a, b, c in itertools.combinations(pts, 3):
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) <= tol * scale * scale:
            return True
    return False


def estimate_homography(world_pts, image_pts) -> np.ndarray:
    """Normalized DLT from plane points ``(X, Y)`` to pixels ``(x, y)``."""
    src = np.asarray(world_pts, dtype=np.float64).reshape(-1, 2)
    dst = np.asarray(image_pts, dtype=np.float64).reshape(-1, 2)
    if len(src) != len(dst):
        raise ValueError(f"got {len(src)} world points but {len(dst)} image points")
    if len(src) < 4:
        raise DegenerateHomographyError(f"need at least 4 correspondences, got {len(src)}")
    if len(src) == 4 and (_has_collinear_triple(src) or _has_collinear_triple(dst)):
        raise DegenerateHomographyError("three of the four points are collinear")

    Ts, Td = _hartley(src), _hartley(dst)
    s = src @ Ts[:2, :2].T + Ts[:2, 2]
    d = dst @ Td[:2, :2].T + Td[:2, 2]
    n = len(s)
    A = np.zeros((2 * n, 9))
    X, Y = s[:, 0], s[:, 1]
    u, v = d[:, 0], d[:, 1]
    A[0::2, 0:3] = np.column_stack([-X, -Y, -np.ones(n)])
    A[0::2, 6:9] = np.column_stack([u * X, u * Y, u])
    A[1::2, 3:6] = np.column_stack([-X, -Y, -np.ones(n)])
    A[1::2, 6:9] = np.column_stack([v * X, v * Y, v])
    _, sv, vt = np.linalg.svd(A)
    if sv[7] <= 1e-10 * sv[0]:
        raise DegenerateHomographyError("correspondences do not determine a unique homography")
    Hn = vt[-1].reshape(3, 3)
    H = np.linalg.inv(Td) @ Hn @ Ts
    if abs(np.linalg.det(H)) <= 1e-12 * np.abs(H).max() ** 3:
        raise DegenerateHomographyError("estimated homography is singular")
    return normalize_homography(H)


def apply_homography(H, pts) -> np.ndarray:
    p = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    q = np.column_stack([p, np.ones(len(p))]) @ np.asarray(H).T
    return q[:, :2] / q[:, 2:3]


def reprojection_error(H, world_pts, image_pts) -> np.ndarray:
    diff = apply_homography(H, world_pts) - np.asarray(image_pts, dtype=np.float64).reshape(-1, 2)
    return np.hypot(diff[:, 0], diff[:, 1])


def decompose_homography(H, K: CameraIntrinsics) -> CameraPose:
    """Split a plane-to-image homography into ``R`` and ``t`` given intrinsics.

    The overall scale is fixed by making the first rotation column unit
    length, with the sign chosen so the plane lies in front of the camera.
    """
    H = np.asarray(H, dtype=np.float64)
    M = K.inverse @ H
    m1, m2, m3 = M[:, 0], M[:, 1], M[:, 2]
    n1 = np.linalg.norm(m1)
    n2 = np.linalg.norm(m2)
    if n1 < 1e-12 * max(np.abs(M).max(), 1e-300) or n2 == 0:
        raise DegenerateHomographyError("first homography column vanishes after removing K")
    lam = 1.0 / n1
    if lam * m3[2] < 0:
        lam = -lam
    r1 = lam * m1
    r2 = lam * m2
    r3 = np.cross(r1, r2)
    U, _, Vt = np.linalg.svd(np.column_stack([r1, r2, r3]))
    R = U @ Vt
    if np.linalg.det(R) < 0:
        U[:, -1] = -U[:, -1]
        R = U @ Vt
    residual = max(abs(n2 / n1 - 1.0), abs(float(m1 @ m2)) / (n1 * n2))
    return CameraPose(R=R, t=lam * m3, residual=float(residual))


def _check_rotation(R: np.ndarray, tol: float = 1e-6) -> None:
    if R.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {R.shape}")
    if np.abs(R.T @ R - np.eye(3)).max() > tol or np.linalg.det(R) < 0:
        raise ValueError("matrix is not a proper rotation")


def euler_from_rotation(R) -> EulerAngles:
    """Roll, pitch, yaw of ``R = Rz(psi) @ Ry(phi) @ Rx(theta)``.

    At gimbal lock (pitch of +-90 deg) roll is set to zero and the coupled
    angle is reported as yaw.
    """
    R = np.asarray(R, dtype=np.float64)
    _check_rotation(R)
    cos_phi = np.hypot(R[2, 1], R[2, 2])
    phi = np.arctan2(-R[2, 0], cos_phi)
    if cos_phi < GIMBAL_EPS:
        return EulerAngles(0.0, float(phi), float(np.arctan2(-R[0, 1], R[1, 1])))
    theta = np.arctan2(R[2, 1], R[2, 2])
    psi = np.arctan2(R[1, 0], R[0, 0])
    return EulerAngles(float(theta), float(phi), float(psi))


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_euler(angles) -> np.ndarray:
    theta, phi, psi = angles
    return rot_z(psi) @ rot_y(phi) @ rot_x(theta)


def project_point(K: CameraIntrinsics, pose: CameraPose, world_pt) -> np.ndarray:
    """Pixel coordinates of a 3D point given in the pose's reference frame."""
    X = np.asarray(world_pt, dtype=np.float64)
    if X.shape == (2,):
        X = np.append(X, 0.0)
    xc = pose.R @ X + pose.t
    if xc[2] <= 0:
        raise BehindCameraError(f"point has non-positive depth {xc[2]:.6g}")
    return dehomogenize(K.matrix @ xc)


def dehomogenize(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x[:2] / x[2]


def relative_rotation(R) -> np.ndarray:
    """Camera attitude in the window frame, in forward-right-down axes."""
    B = CAMERA_FROM_BODY
    return B.T @ np.asarray(R).T @ B


def pose_from_attitude(attitude, t) -> CameraPose:
    """Inverse of :func:`relative_rotation`, for building synthetic poses."""
    B = CAMERA_FROM_BODY
    R = (B @ np.asarray(attitude) @ B.T).T
    return CameraPose(R=R, t=np.asarray(t, dtype=np.float64))


def window_pose(candidate, geometry: WindowGeometry, K: CameraIntrinsics, max_residual: float = 0.1):
    """Pose of the camera relative to a detected window and its relative angles.

    ``candidate`` is a :class:`WindowCandidate` or a ``(4, 2)`` corner array,
    ordered TL, TR, BR, BL. A :class:`PoseError` is raised when the corners
    cannot come from the given window seen from the front, which is what a
    wrong corner order produces.
    """
    corners = getattr(candidate, "corners", candidate)
    H = estimate_homography(geometry.corners, corners)
    pose = decompose_homography(H, K)
    if pose.residual > max_residual:
        raise PoseError(f"corners inconsistent with a {geometry.width}x{geometry.height} window "
                        f"(residual {pose.residual:.3g})")
    if float(pose.R[:, 2] @ pose.t) <= 0:
        raise PoseError("window normal faces the camera; corner order is probably reversed")
    return pose, euler_from_rotation(relative_rotation(pose.R))

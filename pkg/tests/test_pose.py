import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windowingress.pose import (
    BehindCameraError,
    CameraIntrinsics,
    CameraPose,
    DegenerateHomographyError,
    EulerAngles,
    PoseError,
    WindowGeometry,
    apply_homography,
    decompose_homography,
    estimate_homography,
    euler_from_rotation,
    pose_from_attitude,
    project_point,
    reprojection_error,
    rot_x,
    rot_y,
    rot_z,
    rotation_from_euler,
    window_pose,
)

K = CameraIntrinsics(380.0, 380.0, 320.0, 240.0)
WINDOW = WindowGeometry(1.0, 0.8)
angle = st.floats(-math.pi + 1e-6, math.pi)
pitch = st.floats(-math.radians(85), math.radians(85))


def planar_h(K, pose):
    """Forward model: H = K [r1 r2 t] maps window-plane points to pixels."""
    return K.matrix @ np.column_stack([pose.R[:, 0], pose.R[:, 1], pose.t])


def yawed_pose(psi, t):
    return pose_from_attitude(rotation_from_euler((0.0, 0.0, psi)), t)


def test_homography_identity_and_translation():
    sq = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], float)
    assert np.allclose(estimate_homography(sq, sq), np.eye(3), atol=1e-12)
    pts = np.array([(0, 0), (4, 0), (4, 3), (0, 3)], float)
    H = estimate_homography(pts, pts + (10, 5))
    assert np.allclose(H, [[1, 0, 10], [0, 1, 5], [0, 0, 1]], atol=1e-9)


def test_homography_exact_window_projection():
    pose = yawed_pose(math.radians(25), (0.2, -0.1, 4.0))
    img = np.array([project_point(K, pose, p) for p in WINDOW.corners])
    H = estimate_homography(WINDOW.corners, img)
    assert reprojection_error(H, WINDOW.corners, img).max() < 1e-6
    assert H[2, 2] == 1.0


def test_homography_degenerate_rejected():
    line = np.array([(0, 0), (1, 1), (2, 2), (3, 0)], float)
    with pytest.raises(DegenerateHomographyError):
        estimate_homography(line, line)
    with pytest.raises(DegenerateHomographyError):
        estimate_homography(line[:3], line[:3])


def test_homography_noise_tolerance():
    rng = np.random.default_rng(5)
    for _ in range(200):
        pose = yawed_pose(rng.uniform(-0.8, 0.8), (rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(2, 10)))
        img = np.array([project_point(K, pose, p) for p in WINDOW.corners])
        noisy = img + rng.uniform(-0.25, 0.25, img.shape)
        H = estimate_homography(WINDOW.corners, noisy)
        assert reprojection_error(H, WINDOW.corners, noisy).max() < 0.5


def test_decompose_identity_pose():
    H = K.matrix @ np.column_stack([[1, 0, 0], [0, 1, 0], [0, 0, 5]])
    pose = decompose_homography(H, K)
    assert np.allclose(pose.R, np.eye(3), atol=1e-12)
    assert np.allclose(pose.t, (0, 0, 5), atol=1e-12)
    scaled = decompose_homography(2 * H, K)
    assert np.array_equal(scaled.R, pose.R) and np.array_equal(scaled.t, pose.t)


def test_decompose_negative_scale_keeps_plane_in_front():
    pose = yawed_pose(0.3, (0.1, 0.0, 6.0))
    got = decompose_homography(-3.7 * planar_h(K, pose), K)
    assert np.allclose(got.R, pose.R, atol=1e-9) and np.allclose(got.t, pose.t, atol=1e-9)


def test_decompose_yaw_20():
    pose = yawed_pose(math.radians(20), (0.3, 0.0, 4.0))
    _, angles = window_pose(apply_homography(planar_h(K, pose), WINDOW.corners), WINDOW, K)
    assert abs(angles.psi - math.radians(20)) < 1e-6


def test_decompose_degenerate():
    H = np.zeros((3, 3))
    H[:, 2] = 1
    with pytest.raises(DegenerateHomographyError):
        decompose_homography(H, K)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1, 1), st.floats(-1, 1), st.floats(2, 20), st.floats(0.01, 100))
def test_decompose_properties(psi, tx, ty, tz, c):
    pose = yawed_pose(psi, (tx, ty, tz))
    H = planar_h(K, pose)
    got = decompose_homography(H, K)
    assert np.abs(got.R.T @ got.R - np.eye(3)).max() < 1e-9
    assert abs(np.linalg.det(got.R) - 1) < 1e-9
    assert got.t[2] > 0
    again = decompose_homography(c * H, K)
    assert np.allclose(again.R, got.R, atol=1e-12) and np.allclose(again.t, got.t, rtol=1e-12, atol=1e-12)


def test_euler_examples():
    assert euler_from_rotation(np.eye(3)) == (0.0, 0.0, 0.0)
    e = euler_from_rotation(rot_z(math.radians(30)))
    assert np.allclose(e, (0, 0, math.radians(30)), atol=1e-12)
    g = euler_from_rotation(rot_y(math.radians(90)))
    assert g.theta == 0.0 and abs(g.phi - math.pi / 2) < 1e-12


def test_rotation_from_euler_matches_trig():
    th, ph, ps = (math.radians(v) for v in (10, 20, 30))
    ct, st_, cp, sp, cs, ss = math.cos(th), math.sin(th), math.cos(ph), math.sin(ph), math.cos(ps), math.sin(ps)
    expected = np.array([
        [cs * cp, cs * sp * st_ - ss * ct, cs * sp * ct + ss * st_],
        [ss * cp, ss * sp * st_ + cs * ct, ss * sp * ct - cs * st_],
        [-sp, cp * st_, cp * ct],
    ])
    R = rotation_from_euler(EulerAngles(th, ph, ps))
    assert np.allclose(R, expected, atol=1e-15)
    assert np.allclose(R, rot_z(ps) @ rot_y(ph) @ rot_x(th), atol=1e-15)
    assert np.array_equal(rotation_from_euler((0, 0, 0)), np.eye(3))


def test_euler_rejects_non_rotation():
    with pytest.raises(ValueError):
        euler_from_rotation(2 * np.eye(3))
    with pytest.raises(ValueError):
        euler_from_rotation(np.diag([1.0, 1.0, -1.0]))


@settings(max_examples=300, deadline=None)
@given(angle, pitch, angle)
def test_euler_round_trip(theta, phi, psi):
    got = euler_from_rotation(rotation_from_euler((theta, phi, psi)))
    assert np.allclose(got, (theta, phi, psi), atol=1e-9)
    assert -math.pi / 2 <= got.phi <= math.pi / 2


def test_project_point_examples():
    k = CameraIntrinsics(500.0, 500.0, 320.0, 320.0)
    ident = CameraPose(np.eye(3), np.zeros(3))
    assert np.allclose(project_point(k, ident, (1, 0, 5)), (420, 320))
    assert np.allclose(project_point(k, ident, (0, 0, 7)), (320, 320))
    with pytest.raises(BehindCameraError):
        project_point(k, ident, (0, 0, -1))


def test_window_pose_wrong_order_flagged():
    pose = yawed_pose(0.2, (0.0, 0.0, 5.0))
    img = np.array([project_point(K, pose, p) for p in WINDOW.corners])
    with pytest.raises(PoseError):
        window_pose(img[::-1], WINDOW, K)
    with pytest.raises(PoseError):
        window_pose(img[[1, 2, 3, 0]], WINDOW, K)


def test_intrinsics_and_geometry_validation():
    with pytest.raises(ValueError):
        CameraIntrinsics(0.0, 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        WindowGeometry(0.0, 1.0)
    assert np.allclose(K.inverse @ K.matrix, np.eye(3))

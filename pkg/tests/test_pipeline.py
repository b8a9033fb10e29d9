import math

import numpy as np
import pytest

from windowingress import simworld
from windowingress.detect import (
    DetectParams,
    annotate,
    detect_window,
    passes_constraints,
    region_histogram,
    bhattacharyya_distance,
    run_pipeline,
)


@pytest.fixture(scope="module")
def head_on(world, camera):
    uav = simworld.facing_state(world, 6.0)
    return uav, camera.render(world, uav)


def test_head_on_centroid_within_3px(world, camera, reference, head_on):
    uav, frame = head_on
    cand = detect_window(frame, reference)
    truth = simworld.ground_truth(world, uav, camera.K).corners.mean(axis=0)
    assert cand is not None
    assert np.hypot(*(cand.centroid - truth)) <= 3


def test_decoys_rejected_target_selected(world, camera, reference, head_on):
    uav, frame = head_on
    params = DetectParams()
    trace = run_pipeline(frame, params)
    assert len(trace.candidates) >= 2
    cand = detect_window(frame, reference, params)
    truth = simworld.ground_truth(world, uav, camera.K).corners
    assert np.abs(cand.corners - truth).max() < 1
    for other in trace.candidates:
        if np.abs(other.centroid - cand.centroid).max() > 5:
            d = bhattacharyya_distance(region_histogram(frame, other.corners), reference)
            assert d > params.bhattacharyya_threshold


def test_selected_candidate_invariants(head_on, reference):
    _, frame = head_on
    params = DetectParams()
    cand = detect_window(frame, reference, params)
    assert passes_constraints(cand, params, frame.shape[:2])
    assert cand.hist_distance <= params.bhattacharyya_threshold
    assert np.allclose(cand.centroid, cand.corners.mean(axis=0))
    for other in run_pipeline(frame, params).candidates:
        d = bhattacharyya_distance(region_histogram(frame, other.corners), reference)
        if d <= params.bhattacharyya_threshold:
            assert cand.hist_distance <= d + 1e-12


def test_blank_wall_is_absent(world, camera, reference):
    blank = simworld.WorldModel(window=simworld.Rect((10.0, 30.0, -1.5), 1.0, 0.8, (20, 20, 28)), decoys=())
    frame = camera.render(blank, simworld.facing_state(world, 6.0))
    assert detect_window(frame, reference) is None


def test_detection_is_deterministic(head_on, reference):
    _, frame = head_on
    a = detect_window(frame, reference, DetectParams(seed=3))
    b = detect_window(frame, reference, DetectParams(seed=3))
    assert np.array_equal(a.corners, b.corners)


def test_yawed_view_point_sampled(world, reference):
    # a plain point-sampled camera still finds the window when turned 15 deg
    cam = simworld.Camera(samples=1)
    uav = simworld.facing_state(world, 5.0, yaw_offset=math.radians(15))
    cand = detect_window(cam.render(world, uav), reference)
    truth = simworld.ground_truth(world, uav, cam.K).corners
    assert cand is not None and np.abs(cand.corners - truth).max() < 1.5


def test_annotate_marks_outline(head_on, reference):
    _, frame = head_on
    cand = detect_window(frame, reference)
    out = annotate(frame, cand)
    assert out.shape == frame.shape and out.dtype == np.uint8
    assert ((out == (0, 255, 0)).all(axis=2)).sum() > 100
    x, y = np.floor(cand.centroid + 0.5).astype(int)
    assert tuple(out[y, x]) == (255, 255, 0)
    assert np.array_equal(annotate(frame, None), frame)

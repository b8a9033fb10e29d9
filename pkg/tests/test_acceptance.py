"""Acceptance criteria 1-9, one test each.

Every test records a one-line verdict; the lines are printed together at the
end of the pytest run (see ``conftest.py``) and when this file is run as a
script.
"""
import math
import time

import numpy as np
import pytest

from windowingress import cli, imaging, nav, simworld
from windowingress.detect import (
    DetectParams,
    LineSegment,
    approx_polygon,
    bhattacharyya_distance,
    contour_perimeter,
    convex_hull,
    detect_window,
    filter_candidates,
    find_contours,
    hough_lines_p,
    polygon_area,
    rasterize_segments,
    region_histogram,
    run_pipeline,
    select_window,
)
from windowingress.pose import (
    CameraIntrinsics,
    decompose_homography,
    euler_from_rotation,
    pose_from_attitude,
    rotation_from_euler,
    window_pose,
)

RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (bool(ok), detail)
    assert ok, f"criterion {n}: {detail}"


def floats(cols, name):
    return np.array([float(v) for v in cols[name]])


def test_criterion_1_pose_sweep(world, camera, reference):
    errors = []
    t0 = time.perf_counter()
    for d in (4.0, 6.0, 8.0):
        for yaw in (-30, -20, -10, 0, 10, 20, 30):
            uav = simworld.facing_state(world, d, yaw_offset=math.radians(yaw))
            frame = camera.render(world, uav)
            cand = detect_window(frame, reference)
            if cand is None:
                errors.append(math.inf)
                continue
            try:
                _, angles = window_pose(cand, world.geometry, camera.K)
            except ValueError:
                errors.append(math.inf)
                continue
            truth = simworld.ground_truth(world, uav, camera.K).relative_yaw
            errors.append(abs(math.degrees(angles.psi - truth)))
    elapsed = time.perf_counter() - t0
    good = sum(e <= 2.0 for e in errors)
    finite = [e for e in errors if math.isfinite(e)]
    record(1, good >= 0.95 * 21 and elapsed < 30.0,
           f"{good}/21 cases within 2 deg (worst {max(finite):.3f} deg), {elapsed:.1f} s incl. rendering")


def test_criterion_2_homography_oracle():
    rng = np.random.default_rng(2024)
    K = CameraIntrinsics(380.0, 380.0, 320.0, 240.0)
    worst_r = worst_t = 0.0
    for _ in range(1000):
        attitude = rotation_from_euler((rng.uniform(-0.35, 0.35), rng.uniform(-0.35, 0.35),
                                        rng.uniform(-math.radians(60), math.radians(60))))
        t = np.array([rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(2, 20)])
        pose = pose_from_attitude(attitude, t)
        H = K.matrix @ np.column_stack([pose.R[:, 0], pose.R[:, 1], pose.t])
        H *= rng.uniform(0.1, 10) * rng.choice([-1, 1])
        got = decompose_homography(H, K)
        worst_r = max(worst_r, np.linalg.norm(got.R - pose.R))
        worst_t = max(worst_t, np.linalg.norm(got.t - pose.t) / np.linalg.norm(pose.t))
    record(2, worst_r < 1e-6 and worst_t < 1e-6,
           f"1000 poses, worst R error {worst_r:.2e} (Frobenius), worst relative t error {worst_t:.2e}")


def test_criterion_3_euler_round_trip():
    rng = np.random.default_rng(3)
    n = 100_000
    theta = rng.uniform(-math.pi, math.pi, n)
    phi = rng.uniform(-math.radians(85), math.radians(85), n)
    psi = rng.uniform(-math.pi, math.pi, n)
    worst = 0.0
    for a in zip(theta, phi, psi):
        got = euler_from_rotation(rotation_from_euler(a))
        diff = np.abs(np.array(got) - np.array(a))
        diff = np.minimum(diff, 2 * math.pi - diff)  # +-pi are the same angle
        worst = max(worst, float(diff.max()))
    record(3, worst < 1e-9, f"{n} triples, worst error {worst:.2e} rad")


def test_criterion_4_angle_convergence(default_run, default_log):
    status, _ = default_run
    phases = default_log["phase"]
    est = floats(default_log, "est_psi_deg")
    seen = est[np.isfinite(est)]
    frames = len(phases) - 1
    crossing = abs(seen[-1])
    peak = np.abs(seen).max()
    ok = (status == cli.EXIT_OK and phases[-1] == "Ingressed" and frames <= 500
          and crossing < 3.0 and crossing < 0.2 * peak)
    record(4, ok, f"ingressed after {frames} frames; |psi| at crossing {crossing:.2f} deg, "
                  f"peak {peak:.2f} deg, ratio {crossing / peak:.3f}")


def test_criterion_5_opening_width(default_log):
    total = floats(default_log, "opening_total_px")
    left = floats(default_log, "opening_left_px")
    right = floats(default_log, "opening_right_px")
    true_psi = floats(default_log, "true_psi_deg")
    detected = np.isfinite(total)
    at_crossing = total[detected][-1]
    ratio = at_crossing / total[detected].max()
    match = np.sign(left[detected] - right[detected]) == np.sign(true_psi[detected])
    frac = match.mean()
    record(5, ratio >= 0.95 and frac >= 0.9,
           f"total width at crossing / max = {ratio:.3f}; left-right sign matches yaw in "
           f"{match.sum()}/{detected.sum()} detected frames ({100 * frac:.1f}%)")


def test_criterion_6_false_positives(world, camera, reference, default_log):
    assert len(world.decoys) == 2
    colors = {world.window.color} | {d.color for d in world.decoys}
    assert len(colors) == 3
    params = DetectParams()
    picks = {"filtered": 0, "unfiltered": 0}
    frames = 0
    for k in range(0, len(default_log["phase"]) - 1, 3):
        uav = simworld.UavState(*(float(default_log[c][k]) for c in ("x", "y", "z", "yaw")))
        truth = simworld.ground_truth(world, uav, camera.K).corners
        if truth is None or truth[:, 0].min() < 0 or truth[:, 0].max() > camera.width \
                or truth[:, 1].min() < 0 or truth[:, 1].max() > camera.height:
            continue
        frames += 1
        frame = camera.render(world, uav, seed=k)
        trace = run_pipeline(frame, params.replace(seed=k))
        for key, ref in (("filtered", reference), ("unfiltered", None)):
            cand = select_window(trace.candidates, frame, ref, params)
            if cand is not None and np.hypot(*(cand.centroid - truth.mean(axis=0))) <= 5:
                picks[key] += 1
    rate = picks["filtered"] / frames
    err_on, err_off = 1 - rate, 1 - picks["unfiltered"] / frames
    record(6, rate >= 0.95 and err_off > err_on,
           f"{frames} frames on the nominal path: true window selected in {100 * rate:.1f}%; "
           f"error rate {100 * err_on:.1f}% with the histogram filter, {100 * err_off:.1f}% without")


def replay_translations(cols, bound_deg):
    """Frames whose |psi| exceeded the bound and whether the UAV moved afterwards."""
    est = floats(cols, "est_psi_deg")
    pos = np.column_stack([floats(cols, c) for c in ("x", "y", "z")])
    flagged = moved = 0
    for k in range(len(est) - 1):
        if np.isfinite(est[k]) and abs(est[k]) > bound_deg:
            flagged += 1
            moved += not np.array_equal(pos[k], pos[k + 1])
    return flagged, moved


def test_criterion_7_valid_angle_rule(world, default_log):
    default_bound = math.degrees(nav.NavParams().validity_bound)
    # the default run never sees the window beyond 45 deg, so also replay a run
    # whose bound (10 deg) is below its 15 deg starting error
    strict = nav.NavParams(validity_bound=math.radians(10.0))
    cam = simworld.Camera(CameraIntrinsics(190.0, 190.0, 160.0, 120.0), 320, 240, samples=16)
    start = simworld.facing_state(world, 6.0, lateral=1.0, yaw_offset=math.radians(15))
    strict_log = nav.run_mission(world, start, cam, nav_params=strict, max_steps=40)
    lines = []
    moved_total = flagged_total = 0
    for name, cols, bound in (("default", default_log, default_bound),
                              ("10 deg bound", nav.parse_log_csv(strict_log.to_csv()), 10.0)):
        flagged, moved = replay_translations(cols, bound)
        flagged_total += flagged
        moved_total += moved
        lines.append(f"{name}: {moved}/{flagged} over-bound frames translated")
    record(7, moved_total == 0 and flagged_total > 0, "replayed logs; " + "; ".join(lines))


def test_criterion_8_imaging_examples():
    checks = {}
    imp = np.zeros((5, 5), np.uint8)
    imp[2, 2] = 255
    checks["impulse blur = 52"] = imaging.gaussian_blur(imp, 3, 1.0)[2, 2] == 52
    checks["pure red -> 76"] = (imaging.rgb_to_gray(np.full((2, 2, 3), (255, 0, 0), np.uint8)) == 76).all()
    checks["blur of constant"] = (imaging.gaussian_blur(np.full((6, 6), 128, np.uint8)) == 128).all()
    checks["pyr_down 8x8 -> 4x4"] = imaging.pyr_down(np.full((8, 8), 100, np.uint8)).shape == (4, 4)
    rt = imaging.pyr_up(imaging.pyr_down(np.full((8, 8), 100, np.uint8)))
    checks["pyramid round trip"] = np.abs(rt.astype(int) - 100).max() <= 1
    eq = imaging.equalize_histogram(np.array([[50, 100], [100, 50]], np.uint8))
    checks["equalize 50/100 -> 0/255"] = sorted(np.unique(eq)) == [0, 255]
    step = np.zeros((20, 20), np.uint8)
    step[:, 10:] = 255
    cols = np.unique(np.nonzero(imaging.canny(step, 50, 150))[1])
    checks["canny step within 1 px"] = len(cols) == 1 and abs(cols[0] - 9.5) <= 1
    step[:, 10:] = 10
    checks["weak step -> empty"] = not imaging.canny(step, 20, 150).any()
    dot = np.zeros((9, 9), bool)
    dot[4, 4] = True
    once = imaging.dilate(dot, 1)
    checks["dilate 3x3 then 5x5"] = once.sum() == 9 and imaging.dilate(once, 1).sum() == 25
    line = np.zeros((60, 140), bool)
    line[30, 20:120] = True
    (seg,) = hough_lines_p(line, votes=50, min_line_length=30)
    ends = sorted([seg.p0, seg.p1])
    checks["hough 100 px line"] = np.hypot(ends[0][0] - 20, ends[0][1] - 30) <= 2 \
        and np.hypot(ends[1][0] - 119, ends[1][1] - 30) <= 2
    gap = np.zeros((40, 140), bool)
    gap[20, 10:50] = gap[20, 70:110] = True
    checks["hough gap splits"] = len(hough_lines_p(gap, votes=20, min_line_length=30, max_line_gap=5)) == 2
    checks["rasterize row 5"] = rasterize_segments([LineSegment((0, 5), (9, 5))], 10, 10)[5].sum() == 10
    checks["rasterize diagonal"] = np.array_equal(
        rasterize_segments([LineSegment((0, 0), (9, 9))], 10, 10), np.eye(10, dtype=bool))
    box = np.zeros((16, 26), bool)
    box[3, 3:23] = box[12, 3:23] = True
    box[3:13, 3] = box[3:13, 22] = True
    (cnt,) = find_contours(box)
    checks["20x10 contour ~56 points"] = abs(len(cnt) - 56) <= 4
    checks["RDP rectangle 4 vertices"] = len(approx_polygon(cnt, 0.02 * contour_perimeter(cnt))) == 4
    checks["unit square area"] = polygon_area([(0, 0), (1, 0), (1, 1), (0, 1)]) == 1.0
    arrow = np.array([(0, 0), (4, 0), (2, 1), (4, 4)], float)
    checks["arrow hull"] = polygon_area(convex_hull(arrow)) > polygon_area(arrow)
    sq = np.array([(50, 50), (150, 50), (150, 150), (50, 150)], float)
    p = DetectParams(area_min=1e3, area_max=1e5)
    checks["100x100 square accepted"] = len(filter_candidates([sq], p)) == 1
    checks["200x10 rejected"] = filter_candidates([np.array([(0, 0), (200, 0), (200, 10), (0, 10)], float)],
                                                  p.replace(area_min=100)) == []
    green = np.zeros((20, 20, 3), np.uint8)
    green[..., 1] = 255
    checks["green region one bin"] = region_histogram(green, [(2, 2), (17, 2), (17, 17), (2, 17)]).max() == 1
    checks["bhattacharyya 0.5412"] = round(bhattacharyya_distance([1.0, 0.0], [0.5, 0.5]), 4) == 0.5412
    failed = [name for name, ok in checks.items() if not ok]
    record(8, not failed, f"{len(checks) - len(failed)}/{len(checks)} imaging/detect examples"
                          + (f"; failed: {', '.join(failed)}" if failed else ""))


def test_criterion_9_determinism(default_run, tmp_path):
    out = tmp_path / "again.csv"
    status = cli.main(["simulate", "--output", str(out)])
    same = out.read_bytes() == default_run[1].encode()
    record(9, status == default_run[0] and same,
           f"second default simulate run {'is' if same else 'is NOT'} byte-identical "
           f"({len(default_run[1].encode())} bytes)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))

"""Detection walkthrough: one rendered frame through every pipeline stage.

Run with ``python3 notebooks/detection_walkthrough.py [outdir]``. Each stage is
written as a PGM/PPM so it can be opened in any image viewer.
"""
import math
import sys
from pathlib import Path

import numpy as np

from windowingress import simworld as sw
from windowingress.detect import annotate, detect_window, run_pipeline, select_window, DetectParams
from windowingress.pnm import encode_pnm
from windowingress.pose import window_pose

out = Path(sys.argv[1] if len(sys.argv) > 1 else "walkthrough")
out.mkdir(exist_ok=True)

# A wall with the dark target window and two decoys, seen from 6 units out,
# half a unit to the right and turned 12 degrees off the wall normal.
world = sw.WorldModel()
camera = sw.Camera()
uav = sw.facing_state(world, 6.0, lateral=0.5, yaw_offset=math.radians(12))
frame = camera.render(world, uav)
(out / "0_frame.ppm").write_bytes(encode_pnm(frame))

# Stage by stage: blur, Canny edges, Hough segments drawn thick, dilation,
# contours and their Douglas-Peucker polygons.
params = DetectParams()
trace = run_pipeline(frame, params)
(out / "1_smoothed.pgm").write_bytes(encode_pnm(np.clip(trace.smoothed + 0.5, 0, 255).astype(np.uint8)))
for name, mask in (("2_edges", trace.edges), ("3_lines", trace.line_map), ("4_dilated", trace.dilated)):
    (out / f"{name}.pgm").write_bytes(encode_pnm(mask.astype(np.uint8) * 255))
print(f"{int(trace.edges.sum())} edge pixels, {len(trace.segments)} segments, "
      f"{len(trace.contours)} contours, {len(trace.polygons)} polygons")
print(f"{len(trace.candidates)} quadrilaterals pass the geometric constraints")

# Geometry alone cannot tell the three rectangles apart. The colour
# histogram of each interior against the reference picks the target.
reference = sw.reference_histogram(world, camera)
blind = select_window(trace.candidates, frame, None, params)
chosen = select_window(trace.candidates, frame, reference, params)
for c in trace.candidates:
    print(f"  centroid ({c.centroid[0]:6.1f}, {c.centroid[1]:6.1f})  area {c.area:7.0f}")
print("without the filter (largest area):", np.round(blind.centroid, 1) if blind else None)
print("with the filter:", np.round(chosen.centroid, 1) if chosen else None,
      f"Bhattacharyya {chosen.hist_distance:.3f}" if chosen else "")

# Compare the refined corners with the simulator's projection.
truth = sw.ground_truth(world, uav, camera.K)
cand = detect_window(frame, reference, params)
print("corner error (px):", np.round(np.abs(cand.corners - truth.corners).max(), 3))

# Pose from the homography of the four corners.
pose, angles = window_pose(cand, world.geometry, camera.K)
print(f"psi estimated {math.degrees(angles.psi):.2f} deg, true {math.degrees(truth.relative_yaw):.2f} deg")
print("translation (window frame):", np.round(pose.t, 3))
(out / "5_annotated.ppm").write_bytes(encode_pnm(annotate(frame, cand)))
print(f"stages written to {out}/")

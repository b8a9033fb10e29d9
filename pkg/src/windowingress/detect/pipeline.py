"""End-to-end window detection on a single RGB frame."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import imaging
from .candidates import DetectParams, WindowCandidate, passes_constraints
from .contours import approx_polygon, contour_perimeter, find_contours
from .histogram import DegenerateRegionError, bhattacharyya_distance, region_histogram
from .lines import LineSegment, bresenham, bridge_corners, hough_lines_p, rasterize_segments

REFINE_BAND_PX = 10.0
# second, tighter pass once the sides are close
REFINE_FINE_BAND_PX = 3.0


@dataclass
class DetectionTrace:
    """Intermediate products of one pass through the pipeline."""

    smoothed: np.ndarray
    edges: np.ndarray
    segments: list[LineSegment]
    line_map: np.ndarray
    dilated: np.ndarray
    contours: list[np.ndarray]
    polygons: list[np.ndarray]
    candidates: list[WindowCandidate] = field(default_factory=list)


def smooth(gray, params: DetectParams) -> np.ndarray:
    """Blur, pyramid down/up round trips, then histogram equalization."""
    g = imaging.gaussian_blur(gray, params.blur_kernel, params.blur_sigma)
    h, w = g.shape
    levels = []
    for _ in range(params.pyramid_depth):
        if min(g.shape) < 2:
            break
        levels.append(g.shape)
        g = imaging.pyr_down(g)
    for shape in reversed(levels):
        g = imaging.pyr_up(g)[:shape[0], :shape[1]]
    return imaging.equalize_histogram(g[:h, :w])


def _bilinear(img: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    h, w = img.shape
    x = np.clip(x, 0, w - 1.000001)
    y = np.clip(y, 0, h - 1.000001)
    x0 = np.floor(x).astype(int)
    y0 = np.floor(y).astype(int)
    fx = x - x0
    fy = y - y0
    return (
        img[y0, x0] * (1 - fx) * (1 - fy)
        + img[y0, x0 + 1] * fx * (1 - fy)
        + img[y0 + 1, x0] * (1 - fx) * fy
        + img[y0 + 1, x0 + 1] * fx * fy
    )


def _fit_line(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    centre = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - centre, full_matrices=False)
    return centre, vt[0]


def _intersect(p0, d0, p1, d1):
    a = np.array([d0, -d1]).T
    if abs(np.linalg.det(a)) < 1e-9:
        return None
    s = np.linalg.solve(a, p1 - p0)
    return p0 + s[0] * d0


def refine_corners(corners, magnitude, band: float = REFINE_BAND_PX) -> np.ndarray:
    """Snap a coarse quadrilateral onto the gradient ridge along its sides.

    Each side is sampled about once per pixel over its middle 70%. At every
    sample the gradient magnitude is read across the side for ``band`` pixels
    either way; the sub-pixel peak (parabola through the maximum and its
    neighbours) becomes a support point. A line is fitted to each side's
    support and adjacent lines are intersected. The coarse corners are
    returned unchanged if a side has too little support or a corner would
    move further than ``2 * band``.
    """
    c = np.asarray(corners, dtype=np.float64)
    offsets = np.arange(-int(band), int(band) + 1, dtype=np.float64)
    lines = []
    for i in range(4):
        a, b = c[i], c[(i + 1) % 4]
        d = b - a
        length = float(np.hypot(*d))
        if length < 4:
            return c
        u = d / length
        n = np.array([-u[1], u[0]])
        ts = np.linspace(0.15, 0.85, max(int(0.7 * length), 5))
        base = a + ts[:, None] * d
        px = base[:, None, 0] + offsets[None, :] * n[0]
        py = base[:, None, 1] + offsets[None, :] * n[1]
        prof = _bilinear(magnitude, px, py)
        k = np.argmax(prof, axis=1)
        interior = (k > 0) & (k < len(offsets) - 1) & (prof.max(axis=1) > 0)
        if interior.sum() < 5:
            return c
        rows = np.flatnonzero(interior)
        kk = k[rows]
        m0 = prof[rows, kk]
        mm = prof[rows, kk - 1]
        mp = prof[rows, kk + 1]
        denom = mm - 2.0 * m0 + mp
        safe = np.where(denom < 0, denom, -1.0)
        shift = np.where(denom < 0, 0.5 * (mm - mp) / safe, 0.0)
        support = base[rows] + (offsets[kk] + shift)[:, None] * n
        lines.append(_fit_line(support))
    out = np.empty_like(c)
    for i in range(4):
        p = _intersect(*lines[i - 1], *lines[i])
        if p is None or np.hypot(*(p - c[i])) > 2 * band:
            return c
        out[i] = p
    return out


def _step_positions(gray: np.ndarray, a: np.ndarray, b: np.ndarray, band: int, min_contrast: float):
    """Sub-pixel crossings of the straight step edge running from ``a`` to ``b``.

    Works column by column for edges closer to horizontal and row by row
    otherwise. Each column of ``2 * band + 1`` pixels around the edge is
    treated as a step between the two end levels; the edge sits where the
    integrated intensity says it must. For area-sampled images of a straight
    edge this recovers the crossing at the column centre exactly.
    """
    g = gray if abs(b[0] - a[0]) >= abs(b[1] - a[1]) else gray.T
    if g is not gray:
        a, b = a[::-1], b[::-1]
    h, w = g.shape
    lo, hi = sorted((a[0], b[0]))
    span = hi - lo
    if not (np.isfinite(span) and span > 0):
        return np.empty((0, 2))
    cols = np.arange(int(np.ceil(lo + 0.15 * span)), int(np.floor(hi - 0.15 * span)) + 1)
    if len(cols) == 0:
        return np.empty((0, 2))
    slope = (b[1] - a[1]) / (b[0] - a[0])
    centre = np.floor(a[1] + (cols - a[0]) * slope + 0.5).astype(int)
    offs = np.arange(-band, band + 1)
    rows = centre[:, None] + offs[None, :]
    ok = (cols >= 0) & (cols < w) & (rows[:, 0] >= 0) & (rows[:, -1] < h)
    cols, rows = cols[ok], rows[ok]
    prof = g[rows, cols[:, None]].astype(np.float64)
    top = prof[:, :2].mean(axis=1)
    bottom = prof[:, -2:].mean(axis=1)
    contrast = top - bottom
    keep = np.abs(contrast) >= min_contrast
    prof, top, bottom, contrast = prof[keep], top[keep], bottom[keep], contrast[keep]
    # pixel k covers [k - 0.5, k + 0.5]; the top level fills the span above the edge
    e = rows[keep, 0] - 0.5 + ((prof - bottom[:, None]).sum(axis=1) / contrast)
    pts = np.column_stack([cols[keep].astype(np.float64), e])
    return pts if g is gray else pts[:, ::-1]


def refine_corners_subpixel(corners, gray, band: int = 3, min_contrast: float = 20.0) -> np.ndarray:
    """Refit each side of a nearly exact quadrilateral to the step edge under it.

    Needs corners within about a pixel; returns them unchanged if a side has
    too few usable columns or a corner would move more than ``band`` pixels.
    """
    c = np.asarray(corners, dtype=np.float64)
    g = np.asarray(gray, dtype=np.float64)
    lines = []
    for i in range(4):
        pts = _step_positions(g, c[i], c[(i + 1) % 4], band, min_contrast)
        if len(pts) < 5:
            return c
        lines.append(_fit_line(pts))
    out = np.empty_like(c)
    for i in range(4):
        p = _intersect(*lines[i - 1], *lines[i])
        if p is None or np.hypot(*(p - c[i])) > band:
            return c
        out[i] = p
    return out


def run_pipeline(frame, params: DetectParams) -> DetectionTrace:
    """Everything up to and including the geometric candidate screening."""
    rgb = imaging.as_rgb(frame)
    h, w = rgb.shape[:2]
    gray = imaging.rgb_to_gray(rgb)
    smoothed = smooth(gray, params)
    edges = imaging.canny(smoothed, params.canny_low, params.canny_high)
    segments = hough_lines_p(
        edges,
        rho_res=params.hough_rho_res,
        theta_res=params.hough_theta_res,
        votes=params.hough_votes,
        min_line_length=params.hough_min_line_length,
        max_line_gap=params.hough_max_line_gap,
        seed=params.seed,
    )
    segments = segments + bridge_corners(segments, params.hough_max_line_gap)
    line_map = rasterize_segments(segments, w, h, params.line_thickness)
    dilated = imaging.dilate(line_map, params.dilation_radius)
    contours = find_contours(dilated)
    polygons = []
    for cnt in contours:
        if len(cnt) < 3:
            continue
        eps = params.approx_epsilon_frac * contour_perimeter(cnt)
        if eps <= 0:
            continue
        polygons.append(approx_polygon(cnt, eps))

    trace = DetectionTrace(smoothed, edges, segments, line_map, dilated, contours, polygons)
    magnitude = None
    for poly in polygons:
        if len(poly) != 4:
            continue
        corners = poly
        if params.refine_corners:
            if magnitude is None:
                # equalization shifts edges outward, so snap to the merely blurred image
                blurred = imaging.separable_filter(
                    gray, *(2 * [imaging.gaussian_kernel(params.blur_kernel, params.blur_sigma)])
                )
                gx, gy = imaging.sobel_float(blurred)
                magnitude = np.hypot(gx, gy)
            coarse = WindowCandidate.from_corners(poly).corners
            corners = refine_corners(coarse, magnitude)
            if corners is not coarse:
                corners = refine_corners(corners, magnitude, REFINE_FINE_BAND_PX)
                corners = refine_corners_subpixel(corners, gray)
        cand = WindowCandidate.from_corners(corners)
        if passes_constraints(cand, params, (h, w)):
            trace.candidates.append(cand)
    return trace


def select_window(candidates, frame, reference, params: DetectParams) -> WindowCandidate | None:
    """Score candidates against ``reference`` and pick the best one.

    With ``reference=None`` the histogram check is skipped and the largest
    candidate wins.
    """
    if reference is None:
        return max(candidates, key=lambda c: c.area, default=None)
    scored = []
    for cand in candidates:
        try:
            hist = region_histogram(frame, cand.corners)
        except DegenerateRegionError:
            continue
        cand.hist_distance = bhattacharyya_distance(hist, reference)
        if cand.hist_distance <= params.bhattacharyya_threshold:
            scored.append(cand)
    if not scored:
        return None
    return min(scored, key=lambda c: (c.hist_distance, -c.area))


def detect_window(frame, reference, params: DetectParams | None = None) -> WindowCandidate | None:
    """Find the target window in an RGB frame, or ``None`` if it is not visible."""
    params = params or DetectParams()
    trace = run_pipeline(frame, params)
    return select_window(trace.candidates, frame, reference, params)


def annotate(frame, candidate: WindowCandidate | None) -> np.ndarray:
    """Copy of ``frame`` with the window outlined in green and its centroid in yellow."""
    out = np.array(imaging.as_rgb(frame), dtype=np.uint8, copy=True)
    if candidate is None:
        return out
    h, w = out.shape[:2]
    c = np.floor(candidate.corners + 0.5).astype(int)
    for i in range(4):
        (x0, y0), (x1, y1) = c[i], c[(i + 1) % 4]
        for x, y in bresenham(int(x0), int(y0), int(x1), int(y1)):
            for dy in (0, 1):
                for dx in (0, 1):
                    if 0 <= x + dx < w and 0 <= y + dy < h:
                        out[y + dy, x + dx] = (0, 255, 0)
    cx, cy = np.floor(candidate.centroid + 0.5).astype(int)
    yy, xx = np.mgrid[0:h, 0:w]
    out[(xx - cx) ** 2 + (yy - cy) ** 2 <= 9] = (255, 255, 0)
    return out

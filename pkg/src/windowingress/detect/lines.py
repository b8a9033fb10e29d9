"""Progressive probabilistic Hough transform and segment rasterization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LineSegment:
    p0: tuple[float, float]
    p1: tuple[float, float]

    def __post_init__(self):
        if tuple(self.p0) == tuple(self.p1):
            raise ValueError("degenerate segment: p0 == p1")

    @property
    def length(self) -> float:
        return float(np.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]))


# the line is refitted and followed again until its ends stop moving
_MAX_FOLLOW_PASSES = 4


def _corridor(c: int):
    yield 0
    for o in range(1, c + 1):
        yield -o
        yield o


def _walk(mask: np.ndarray, x0: float, y0: float, dir_x: float, dir_y: float, sign: int,
          max_gap: int, corridor: int):
    """Follow a line from ``(x0, y0)`` until more than ``max_gap`` consecutive misses.

    Steps are one pixel along the dominant axis. A step is a hit when any pixel
    within ``corridor`` pixels across the line is set. Returns every hit
    pixel, the hit closest to the line at each step, and the last of those
    (the start pixel if there was none).
    """
    h, w = mask.shape
    x_major = abs(dir_x) > abs(dir_y)
    if x_major:
        step = sign * (1 if dir_x > 0 else -1)
        slope = sign * dir_y / abs(dir_x)
    else:
        step = sign * (1 if dir_y > 0 else -1)
        slope = sign * dir_x / abs(dir_y)
    xs, ys = int(np.floor(x0 + 0.5)), int(np.floor(y0 + 0.5))
    hits = []
    track = []
    end = (xs, ys)
    gap = 0
    k = 0
    while True:
        if x_major:
            x = xs + k * step
            yc = int(np.floor(y0 + k * slope + 0.5))
            if not (0 <= x < w and 0 <= yc < h):
                break
            found = [(x, yc + o) for o in _corridor(corridor) if 0 <= yc + o < h and mask[yc + o, x]]
        else:
            y = ys + k * step
            xc = int(np.floor(x0 + k * slope + 0.5))
            if not (0 <= xc < w and 0 <= y < h):
                break
            found = [(xc + o, y) for o in _corridor(corridor) if 0 <= xc + o < w and mask[y, xc + o]]
        if found:
            gap = 0
            hits.extend(found)
            track.append(found[0])
            end = found[0]
        else:
            gap += 1
            if gap > max_gap:
                break
        k += 1
    return hits, track, end


def hough_lines_p(
    edge_map,
    rho_res: float = 1.0,
    theta_res: float = np.pi / 180.0,
    votes: int = 30,
    min_line_length: float = 30.0,
    max_line_gap: int = 10,
    seed: int = 0,
    corridor: int = 2,
) -> list[LineSegment]:
    """Extract line segments from a binary edge map.

    Edge pixels are visited in a seeded random order. Each pixel votes in the
    (rho, theta) accumulator; once a bin reaches ``votes`` the line through the
    pixel is followed in both directions, tolerating up to ``max_line_gap``
    missing pixels. If the run is at least ``min_line_length`` long its pixels
    are removed from further consideration, their votes are withdrawn and the
    segment is reported; otherwise only the seed pixel is removed.

    The follower accepts pixels up to ``corridor`` pixels either side of the
    line and is rerun along the line refitted to the pixels it tracked until
    the ends settle, so staircase edges lying between accumulator angles are
    not broken up.
    """
    mask = np.array(edge_map, dtype=bool, copy=True)
    if mask.ndim != 2:
        raise ValueError(f"expected a 2D edge map, got shape {mask.shape}")
    h, w = mask.shape
    num_angle = int(round(np.pi / theta_res))
    thetas = np.arange(num_angle) * theta_res
    cos_t = np.cos(thetas) / rho_res
    sin_t = np.sin(thetas) / rho_res
    num_rho = int(round(2 * (w + h) / rho_res)) + 1
    offset = (num_rho - 1) // 2
    accum = np.zeros((num_angle, num_rho), dtype=np.int32)
    voted = np.zeros_like(mask)
    angle_idx = np.arange(num_angle)

    def bins(x: int, y: int) -> np.ndarray:
        return np.floor(x * cos_t + y * sin_t + 0.5).astype(np.intp) + offset

    points = np.argwhere(mask)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(points))
    segments: list[LineSegment] = []

    for idx in order:
        y, x = (int(v) for v in points[idx])
        if not mask[y, x]:
            continue
        r = bins(x, y)
        accum[angle_idx, r] += 1
        voted[y, x] = True
        counts = accum[angle_idx, r]
        best = int(np.argmax(counts))
        if counts[best] < votes:
            continue

        # direction along the line whose normal is (cos t, sin t)
        dir_x, dir_y = -np.sin(thetas[best]), np.cos(thetas[best])
        ox, oy = float(x), float(y)
        prev_ends = None
        for _ in range(_MAX_FOLLOW_PASSES):
            hits = []
            track = []
            ends = []
            for sign in (1, -1):
                run, path, end = _walk(mask, ox, oy, dir_x, dir_y, sign, max_line_gap, corridor)
                hits.extend(run)
                track.extend(path)
                ends.append(end)
            if ends == prev_ends or len(track) < 3:
                break
            prev_ends = ends
            # refit the line to the pixels it tracked and follow it again
            pts = np.unique(np.array(track, dtype=np.float64), axis=0)
            centre = pts.mean(axis=0)
            _, _, vt = np.linalg.svd(pts - centre, full_matrices=False)
            dir_x, dir_y = vt[0]
            ox, oy = centre + ((np.array([x, y]) - centre) @ vt[0]) * vt[0]

        length = np.hypot(ends[0][0] - ends[1][0], ends[0][1] - ends[1][1])
        good = length >= min_line_length and ends[0] != ends[1]

        # a run too short to report only gives up its seed, so the rest of
        # its pixels stay available to a longer line through them
        claimed = set(hits) if good else set()
        claimed.add((x, y))
        for px, py in claimed:
            if mask[py, px]:
                if good and voted[py, px]:
                    accum[angle_idx, bins(px, py)] -= 1
                mask[py, px] = False

        if good:
            segments.append(
                LineSegment((float(ends[1][0]), float(ends[1][1])), (float(ends[0][0]), float(ends[0][1])))
            )
    return segments


def bridge_corners(segments, max_gap: float = 10.0, min_angle_deg: float = 30.0) -> list[LineSegment]:
    """Short segments that close corners left open by the line follower.

    For every pair of segments crossing at more than ``min_angle_deg``, the
    intersection of their supporting lines is found. When it lies within
    ``max_gap`` of an endpoint of each segment, each of those endpoints is
    joined to it. Returns only the new bridges.
    """
    segs = list(segments)
    min_sin = np.sin(np.radians(min_angle_deg))
    bridges = []
    for i in range(len(segs)):
        a0, a1 = np.asarray(segs[i].p0, float), np.asarray(segs[i].p1, float)
        da = a1 - a0
        for j in range(i + 1, len(segs)):
            b0, b1 = np.asarray(segs[j].p0, float), np.asarray(segs[j].p1, float)
            db = b1 - b0
            cross = da[0] * db[1] - da[1] * db[0]
            if abs(cross) < min_sin * np.hypot(*da) * np.hypot(*db):
                continue
            s = ((b0[0] - a0[0]) * db[1] - (b0[1] - a0[1]) * db[0]) / cross
            corner = a0 + s * da
            ends = []
            for p, q in ((a0, a1), (b0, b1)):
                dp, dq = np.hypot(*(corner - p)), np.hypot(*(corner - q))
                ends.append((p, dp) if dp <= dq else (q, dq))
            if all(dist <= max_gap for _, dist in ends):
                for end, dist in ends:
                    if dist >= 0.5:
                        bridges.append(LineSegment(tuple(end), tuple(corner)))
    return bridges


def bresenham(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    pts = []
    while True:
        pts.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return pts
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def rasterize_segments(segments, width: int, height: int, thickness: int = 1) -> np.ndarray:
    """Draw segments into a ``(height, width)`` bool map with a square pen."""
    if thickness < 1:
        raise ValueError(f"thickness must be >= 1, got {thickness}")
    out = np.zeros((height, width), dtype=bool)
    lo = -((thickness - 1) // 2)
    hi = thickness // 2
    for seg in segments:
        x0, y0 = (int(np.floor(v + 0.5)) for v in seg.p0)
        x1, y1 = (int(np.floor(v + 0.5)) for v in seg.p1)
        pts = np.array(bresenham(x0, y0, x1, y1))
        for oy in range(lo, hi + 1):
            for ox in range(lo, hi + 1):
                xs = pts[:, 0] + ox
                ys = pts[:, 1] + oy
                ok = (xs >= 0) & (xs < width) & (ys >= 0) & (ys < height)
                out[ys[ok], xs[ok]] = True
    return out

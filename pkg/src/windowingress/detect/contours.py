"""Boundary tracing and polygon geometry.

Contours and polygons are float arrays of shape ``(n, 2)`` holding ``(x, y)``
pixel coordinates, x to the right and y downwards.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

# clockwise on screen (y down), starting west; entries are (dy, dx)
_MOORE = [(0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1)]
_MOORE_INDEX = {d: i for i, d in enumerate(_MOORE)}
_EIGHT = np.ones((3, 3), dtype=bool)


def _trace(mask: np.ndarray, start: tuple[int, int]) -> list[tuple[int, int]]:
    """Moore-neighbour trace with Jacob's stopping criterion.

    ``mask`` must be padded so that no set pixel touches the array edge and
    ``start`` must be the first set pixel in raster order (its west neighbour
    is therefore background).
    """
    sy, sx = start
    back0 = (sy, sx - 1)
    p, back = start, back0
    out = [start]
    limit = 4 * int(mask.sum()) + 8
    for _ in range(limit):
        py, px = p
        i0 = _MOORE_INDEX[(back[0] - py, back[1] - px)]
        nxt = None
        prev = back
        for k in range(1, 9):
            dy, dx = _MOORE[(i0 + k) % 8]
            c = (py + dy, px + dx)
            if mask[c]:
                nxt = c
                break
            prev = c
        if nxt is None:
            return out  # isolated pixel
        if nxt == start and prev == back0:
            return out
        out.append(nxt)
        p, back = nxt, prev
    return out


def find_contours(edge_map) -> list[np.ndarray]:
    """Outer boundary of every 8-connected component, one contour each.

    Holes are ignored. Components are returned in raster order of their
    first pixel.
    """
    m = np.asarray(edge_map, dtype=bool)
    if m.ndim != 2:
        raise ValueError(f"expected a 2D edge map, got shape {m.shape}")
    labels, n = ndimage.label(m, structure=_EIGHT)
    contours = []
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        comp = np.pad(labels[sl] == lab, 1)
        ys, xs = np.nonzero(comp)
        first = int(np.argmin(ys * comp.shape[1] + xs))
        pts = _trace(comp, (int(ys[first]), int(xs[first])))
        arr = np.array(pts, dtype=np.float64)
        # back to image (x, y) coordinates
        contour = np.column_stack([arr[:, 1] + sl[1].start - 1, arr[:, 0] + sl[0].start - 1])
        contours.append(contour)
    return contours


def contour_perimeter(contour, closed: bool = True) -> float:
    pts = np.asarray(contour, dtype=np.float64)
    if len(pts) < 2:
        return 0.0
    d = np.diff(pts, axis=0)
    total = float(np.hypot(d[:, 0], d[:, 1]).sum())
    if closed:
        total += float(np.hypot(*(pts[0] - pts[-1])))
    return total


def _segment_distances(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(*(pts - a).T)
    t = np.clip(((pts - a) @ ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.hypot(*(pts - proj).T)


def _rdp_open(pts: np.ndarray, epsilon: float) -> list[int]:
    keep = np.zeros(len(pts), dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, len(pts) - 1)]
    while stack:
        i, j = stack.pop()
        if j - i < 2:
            continue
        d = _segment_distances(pts[i + 1:j], pts[i], pts[j])
        k = int(np.argmax(d))
        if d[k] > epsilon:
            k += i + 1
            keep[k] = True
            stack.append((i, k))
            stack.append((k, j))
    return list(np.flatnonzero(keep))


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain; vertices counter-clockwise in (x, y), collinear points dropped."""
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    if len(pts) < 3:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def polygon_area(polygon) -> float:
    """Absolute shoelace area."""
    p = np.asarray(polygon, dtype=np.float64)
    if len(p) < 3:
        return 0.0
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _farthest_pair(pts: np.ndarray) -> tuple[int, int]:
    hull = convex_hull(pts)
    if len(hull) < 2:
        return 0, len(pts) - 1
    d = np.linalg.norm(hull[:, None, :] - hull[None, :, :], axis=2)
    a, b = np.unravel_index(int(np.argmax(d)), d.shape)
    # map hull vertices back to their first occurrence on the contour
    ia = int(np.flatnonzero(np.all(pts == hull[a], axis=1))[0])
    ib = int(np.flatnonzero(np.all(pts == hull[b], axis=1))[0])
    return min(ia, ib), max(ia, ib)


def approx_polygon(contour, epsilon: float) -> np.ndarray:
    """Ramer-Douglas-Peucker simplification of a closed contour.

    The contour is split at its two mutually farthest points and each half is
    simplified independently, so the result is a subset of the contour points
    in contour order.
    """
    pts = np.asarray(contour, dtype=np.float64)
    if len(pts) < 3:
        raise ValueError(f"contour needs at least 3 points, got {len(pts)}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    i, j = _farthest_pair(pts)
    first = pts[i:j + 1]
    second = np.concatenate([pts[j:], pts[:i + 1]])
    k1 = _rdp_open(first, epsilon)
    k2 = _rdp_open(second, epsilon)
    verts = [first[k] for k in k1[:-1]] + [second[k] for k in k2[:-1]]
    out = np.array(verts)
    # drop repeated consecutive vertices (only possible with repeated contour points)
    keep = np.any(out != np.roll(out, 1, axis=0), axis=1)
    return out[keep] if keep.any() else out[:1]

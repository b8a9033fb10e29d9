"""Colour histograms and the Bhattacharyya distance used to reject look-alikes."""
from __future__ import annotations

import numpy as np

from ..imaging import as_rgb

BINS_PER_CHANNEL = 8


class DegenerateRegionError(ValueError):
    """The quadrilateral covers no pixel centres."""


def points_in_polygon(xs: np.ndarray, ys: np.ndarray, polygon) -> np.ndarray:
    """Even-odd crossing test, vectorized over the query points."""
    poly = np.asarray(polygon, dtype=np.float64)
    inside = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        if y0 == y1:
            continue
        crosses = (y0 > ys) != (y1 > ys)
        x_at = x0 + (ys - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (xs < x_at)
    return inside


def on_boundary(xs: np.ndarray, ys: np.ndarray, polygon, tol: float = 1e-9) -> np.ndarray:
    """Query points lying on an edge of the polygon."""
    poly = np.asarray(polygon, dtype=np.float64)
    out = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
    for i in range(len(poly)):
        a, b = poly[i], poly[(i + 1) % len(poly)]
        d = b - a
        length2 = float(d @ d)
        if length2 == 0:
            out |= (xs == a[0]) & (ys == a[1])
            continue
        cross = (xs - a[0]) * d[1] - (ys - a[1]) * d[0]
        dot = (xs - a[0]) * d[0] + (ys - a[1]) * d[1]
        out |= (np.abs(cross) <= tol * np.sqrt(length2)) & (dot >= 0) & (dot <= length2)
    return out


def region_mask(shape, corners) -> np.ndarray:
    """Pixels whose centres fall strictly inside the quadrilateral."""
    h, w = shape[:2]
    c = np.asarray(corners, dtype=np.float64)
    x0 = max(int(np.floor(c[:, 0].min())), 0)
    x1 = min(int(np.ceil(c[:, 0].max())), w - 1)
    y0 = max(int(np.floor(c[:, 1].min())), 0)
    y1 = min(int(np.ceil(c[:, 1].max())), h - 1)
    mask = np.zeros((h, w), dtype=bool)
    if x1 < x0 or y1 < y0:
        return mask
    ys, xs = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    xs, ys = xs.astype(float), ys.astype(float)
    mask[y0:y1 + 1, x0:x1 + 1] = points_in_polygon(xs, ys, c) & ~on_boundary(xs, ys, c)
    return mask


def color_histogram(pixels: np.ndarray) -> np.ndarray:
    """L1-normalized 8x8x8 RGB histogram of an ``(n, 3)`` uint8 pixel list."""
    if len(pixels) == 0:
        raise DegenerateRegionError("no pixels to histogram")
    q = (np.asarray(pixels, dtype=np.intp) * BINS_PER_CHANNEL) // 256
    flat = (q[:, 0] * BINS_PER_CHANNEL + q[:, 1]) * BINS_PER_CHANNEL + q[:, 2]
    counts = np.bincount(flat, minlength=BINS_PER_CHANNEL ** 3).astype(np.float64)
    return (counts / counts.sum()).reshape((BINS_PER_CHANNEL,) * 3)


def region_histogram(img, corners) -> np.ndarray:
    rgb = as_rgb(img)
    mask = region_mask(rgb.shape, corners)
    if not mask.any():
        raise DegenerateRegionError("quadrilateral contains no pixel centres")
    return color_histogram(rgb[mask])


def bhattacharyya_distance(p, q) -> float:
    """``sqrt(1 - sum(sqrt(p * q)))`` between two L1-normalized histograms."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"histogram shapes differ: {p.shape} vs {q.shape}")
    for name, h in (("p", p), ("q", q)):
        if (h < 0).any() or abs(h.sum() - 1.0) > 1e-6:
            raise ValueError(f"histogram {name} is not L1-normalized (sum={h.sum():.6g})")
    bc = float(np.sqrt(p * q).sum())
    return float(np.sqrt(min(max(1.0 - bc, 0.0), 1.0)))

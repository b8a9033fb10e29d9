"""Raster primitives used by the window detector.

Images are plain numpy arrays:

* gray images are ``uint8`` arrays of shape ``(height, width)``
* RGB images are ``uint8`` arrays of shape ``(height, width, 3)``
* edge maps are ``bool`` arrays of shape ``(height, width)``

Every operation works in float64 internally and quantizes back to ``uint8``
only on return. All convolutions replicate the border pixels.
"""
from __future__ import annotations

from collections import deque

import numpy as np

# 5-tap binomial kernel used for pyramid construction
PYRAMID_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0

_SOBEL_SMOOTH = np.array([1.0, 2.0, 1.0])
_SOBEL_DIFF = np.array([-1.0, 0.0, 1.0])


def as_gray(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty (H, W) gray image, got shape {arr.shape}")
    return arr


def as_rgb(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"expected a non-empty (H, W, 3) RGB image, got shape {arr.shape}")
    return arr


def to_uint8(values: np.ndarray) -> np.ndarray:
    """Round half up and clamp to [0, 255]."""
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def rgb_to_gray(img) -> np.ndarray:
    """ITU-R 601 luma: ``round(0.299 R + 0.587 G + 0.114 B)``."""
    rgb = as_rgb(img).astype(np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return to_uint8(luma)


def _convolve_axis(arr: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """Correlate ``arr`` with an odd 1D kernel along ``axis`` (edge replication)."""
    radius = len(kernel) // 2
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(arr, pad, mode="edge")
    n = arr.shape[axis]
    out = np.zeros(arr.shape, dtype=np.float64)
    for k, weight in enumerate(kernel):
        if weight == 0.0:
            continue
        out += weight * np.take(padded, np.arange(k, k + n), axis=axis)
    return out


def separable_filter(arr: np.ndarray, row_kernel: np.ndarray, col_kernel: np.ndarray) -> np.ndarray:
    """Apply ``row_kernel`` along x and ``col_kernel`` along y, float in, float out."""
    tmp = _convolve_axis(np.asarray(arr, dtype=np.float64), row_kernel, axis=1)
    return _convolve_axis(tmp, col_kernel, axis=0)


def gaussian_kernel(kernel_size: int, sigma: float) -> np.ndarray:
    if kernel_size < 3 or kernel_size % 2 == 0:
        raise ValueError(f"kernel_size must be odd and >= 3, got {kernel_size}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = np.arange(kernel_size) - kernel_size // 2
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img, kernel_size: int = 5, sigma: float = 1.4) -> np.ndarray:
    gray = as_gray(img)
    k = gaussian_kernel(kernel_size, sigma)
    return to_uint8(separable_filter(gray, k, k))


def pyr_down(img) -> np.ndarray:
    """Blur with the 5x5 binomial kernel and keep every other row and column.

    The result has shape ``(ceil(h/2), ceil(w/2))``.
    """
    gray = as_gray(img)
    h, w = gray.shape
    if h < 2 or w < 2:
        raise ValueError(f"pyr_down needs an image of at least 2x2, got {w}x{h}")
    blurred = separable_filter(gray, PYRAMID_KERNEL, PYRAMID_KERNEL)
    return to_uint8(blurred[::2, ::2])


def _upsample_axis(arr: np.ndarray, axis: int) -> np.ndarray:
    # Zero insertion followed by the binomial kernel with gain 2 per axis reduces
    # to these two polyphase filters: even taps (1, 6, 1)/8, odd taps (1, 1)/2.
    a = np.moveaxis(arr, axis, 0)
    p = np.concatenate([a[:1], a, a[-1:]], axis=0)
    even = (p[:-2] + 6.0 * p[1:-1] + p[2:]) / 8.0
    odd = (p[1:-1] + p[2:]) / 2.0
    out = np.empty((2 * a.shape[0],) + a.shape[1:], dtype=np.float64)
    out[0::2] = even
    out[1::2] = odd
    return np.moveaxis(out, 0, axis)


def pyr_up(img) -> np.ndarray:
    """Double both dimensions: zero insertion, then binomial blur with 4x gain."""
    gray = as_gray(img).astype(np.float64)
    up = _upsample_axis(_upsample_axis(gray, 1), 0)
    return to_uint8(up)


def equalize_histogram(img) -> np.ndarray:
    gray = as_gray(img)
    if gray.dtype != np.uint8:
        gray = to_uint8(gray.astype(np.float64))
    hist = np.bincount(gray.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    n = gray.size
    cdf_min = cdf[np.flatnonzero(hist)[0]]
    if cdf_min == n:
        # constant image: the mapping is undefined, leave it alone
        return gray.copy()
    lut = to_uint8(255.0 * (cdf - cdf_min) / (n - cdf_min))
    return lut[gray]


def sobel(img) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel derivatives ``(gx, gy)``; x grows to the right, y downwards."""
    return sobel_float(np.asarray(as_gray(img), dtype=np.float64))


def sobel_float(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gx = separable_filter(arr, _SOBEL_DIFF, _SOBEL_SMOOTH)
    gy = separable_filter(arr, _SOBEL_SMOOTH, _SOBEL_DIFF)
    return gx, gy


def non_maximum_suppression(magnitude: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Thin gradient ridges to one pixel.

    Directions are quantized to 0, 45, 90 and 135 degrees. A pixel survives if it
    is >= its neighbour behind and strictly > its neighbour ahead along the
    gradient, so a symmetric two-pixel ridge keeps exactly one pixel.
    """
    h, w = magnitude.shape
    padded = np.pad(magnitude, 1, mode="constant")
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    sector = (np.floor((angle + 22.5) / 45.0).astype(int)) % 4
    # (dy, dx) of the neighbour ahead along the gradient for each sector
    steps = [(0, 1), (1, 1), (1, 0), (1, -1)]
    keep = np.zeros((h, w), dtype=bool)
    for s, (dy, dx) in enumerate(steps):
        ahead = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        behind = padded[1 - dy:1 - dy + h, 1 - dx:1 - dx + w]
        keep |= (sector == s) & (magnitude >= behind) & (magnitude > ahead)
    return np.where(keep & (magnitude > 0), magnitude, 0.0)


def hysteresis(thin: np.ndarray, low: float, high: float) -> np.ndarray:
    """Keep weak pixels (>= low) only when 8-connected to a strong one (>= high)."""
    # suppressed pixels are zero and never edges, even when low is 0
    weak = (thin >= low) & (thin > 0)
    out = (thin >= high) & weak
    h, w = thin.shape
    queue = deque(zip(*np.nonzero(out)))
    while queue:
        y, x = queue.popleft()
        for ny in (y - 1, y, y + 1):
            if ny < 0 or ny >= h:
                continue
            for nx in (x - 1, x, x + 1):
                if 0 <= nx < w and weak[ny, nx] and not out[ny, nx]:
                    out[ny, nx] = True
                    queue.append((ny, nx))
    return out


def canny(img, low_threshold: float = 50.0, high_threshold: float = 150.0) -> np.ndarray:
    if not 0 <= low_threshold < high_threshold:
        raise ValueError(
            f"thresholds must satisfy 0 <= low < high, got low={low_threshold} high={high_threshold}"
        )
    gx, gy = sobel(img)
    magnitude = np.hypot(gx, gy)
    thin = non_maximum_suppression(magnitude, gx, gy)
    return hysteresis(thin, low_threshold, high_threshold)


def dilate(edge_map, kernel_radius: int = 1) -> np.ndarray:
    """Binary dilation with a ``(2r+1) x (2r+1)`` square."""
    m = np.asarray(edge_map, dtype=bool)
    if m.ndim != 2:
        raise ValueError(f"expected a 2D edge map, got shape {m.shape}")
    if kernel_radius < 1:
        raise ValueError(f"kernel_radius must be >= 1, got {kernel_radius}")
    r = kernel_radius
    h, w = m.shape
    p = np.pad(m, ((0, 0), (r, r)))
    rows = np.zeros_like(m)
    for k in range(2 * r + 1):
        rows |= p[:, k:k + w]
    p = np.pad(rows, ((r, r), (0, 0)))
    out = np.zeros_like(m)
    for k in range(2 * r + 1):
        out |= p[k:k + h, :]
    return out

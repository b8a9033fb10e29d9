"""Geometric screening of polygons into window candidates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .contours import convex_hull, polygon_area


@dataclass(frozen=True)
class DetectParams:
    """Thresholds for the detection pipeline.

    ``area_min`` / ``area_max`` are absolute pixel areas. When left as ``None``
    they are derived from the frame size through ``area_min_frac`` and
    ``area_max_frac``.
    """

    canny_low: float = 50.0
    canny_high: float = 150.0
    blur_kernel: int = 5
    blur_sigma: float = 1.4
    pyramid_depth: int = 1
    hough_rho_res: float = 1.0
    hough_theta_res: float = math.radians(1.0)
    hough_votes: int = 30
    hough_min_line_length: float = 30.0
    hough_max_line_gap: int = 10
    line_thickness: int = 3
    dilation_radius: int = 1
    approx_epsilon_frac: float = 0.02
    area_min: float | None = None
    area_max: float | None = None
    area_min_frac: float = 0.002
    area_max_frac: float = 0.6
    aspect_min: float = 0.33
    aspect_max: float = 3.0
    hull_ratio_min: float = 0.9
    angle_tolerance_deg: float = 25.0
    bhattacharyya_threshold: float = 0.3
    refine_corners: bool = True
    seed: int = 0

    def __post_init__(self):
        errors = self.validation_errors()
        if errors:
            raise ValueError("; ".join(errors))

    def validation_errors(self) -> list[str]:
        errs = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("area_min", "area_max") and v is None:
                continue
            if f.name in ("refine_corners", "seed"):
                continue
            if f.name == "pyramid_depth":
                if v < 0:
                    errs.append("pyramid_depth: must be >= 0")
                continue
            if not v > 0:
                errs.append(f"{f.name}: must be positive, got {v}")
        if self.blur_kernel % 2 == 0 or self.blur_kernel < 3:
            errs.append(f"blur_kernel: must be odd and >= 3, got {self.blur_kernel}")
        if not self.canny_low < self.canny_high:
            errs.append("canny_low: must be below canny_high")
        if not self.aspect_min < self.aspect_max:
            errs.append("aspect_min: must be below aspect_max")
        if not self.area_min_frac < self.area_max_frac:
            errs.append("area_min_frac: must be below area_max_frac")
        if self.area_min is not None and self.area_max is not None and not self.area_min < self.area_max:
            errs.append("area_min: must be below area_max")
        if not 0 < self.hull_ratio_min <= 1:
            errs.append("hull_ratio_min: must lie in (0, 1]")
        if not 0 < self.bhattacharyya_threshold <= 1:
            errs.append("bhattacharyya_threshold: must lie in (0, 1]")
        return errs

    def area_range(self, frame_shape=None) -> tuple[float, float]:
        lo, hi = self.area_min, self.area_max
        if lo is None or hi is None:
            if frame_shape is None:
                raise ValueError("frame_shape is required when area limits are given as fractions")
            frame_area = float(frame_shape[0] * frame_shape[1])
            lo = self.area_min_frac * frame_area if lo is None else lo
            hi = self.area_max_frac * frame_area if hi is None else hi
        return lo, hi

    def replace(self, **changes) -> "DetectParams":
        return replace(self, **changes)


@dataclass
class WindowCandidate:
    corners: np.ndarray  # (4, 2), clockwise on screen from the corner minimizing x + y
    centroid: np.ndarray
    area: float
    aspect_ratio: float
    hull_ratio: float
    min_angle: float
    max_angle: float
    hist_distance: float = field(default=float("nan"))

    @classmethod
    def from_corners(cls, corners) -> "WindowCandidate":
        c = order_corners(corners)
        area = polygon_area(c)
        hull_area = polygon_area(convex_hull(c))
        span = c.max(axis=0) - c.min(axis=0)
        angles = interior_angles(c)
        return cls(
            corners=c,
            centroid=c.mean(axis=0),
            area=area,
            aspect_ratio=float(span[0] / span[1]) if span[1] > 0 else math.inf,
            hull_ratio=area / hull_area if hull_area > 0 else 0.0,
            min_angle=float(angles.min()),
            max_angle=float(angles.max()),
        )


def order_corners(corners) -> np.ndarray:
    """Order 4 points clockwise on screen, starting at the one minimizing x + y."""
    c = np.asarray(corners, dtype=np.float64).reshape(-1, 2)
    if len(c) != 4:
        raise ValueError(f"expected 4 corners, got {len(c)}")
    center = c.mean(axis=0)
    # y points down, so increasing atan2 sweeps clockwise on screen
    theta = np.arctan2(c[:, 1] - center[1], c[:, 0] - center[0])
    c = c[np.argsort(theta, kind="stable")]
    start = int(np.argmin(c.sum(axis=1)))
    return np.roll(c, -start, axis=0)


def interior_angles(polygon) -> np.ndarray:
    """Angle at each vertex between its two edges, in degrees."""
    p = np.asarray(polygon, dtype=np.float64)
    a = np.roll(p, 1, axis=0) - p
    b = np.roll(p, -1, axis=0) - p
    with np.errstate(divide="ignore", invalid="ignore"):
        # a zero-length edge gives nan, which fails every angle check
        cos = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
    return np.degrees(np.arccos(np.clip(cos, -1.0, 1.0)))


def passes_constraints(cand: WindowCandidate, params: DetectParams, frame_shape=None) -> bool:
    """The five window checks: corners, area, aspect, hull ratio, right angles."""
    lo, hi = params.area_range(frame_shape)
    tol = params.angle_tolerance_deg
    return (
        len(cand.corners) == 4
        and lo <= cand.area <= hi
        and params.aspect_min <= cand.aspect_ratio <= params.aspect_max
        and cand.hull_ratio >= params.hull_ratio_min
        and cand.min_angle >= 90.0 - tol
        and cand.max_angle <= 90.0 + tol
    )


def filter_candidates(polygons, params: DetectParams, frame_shape=None) -> list[WindowCandidate]:
    out = []
    for poly in polygons:
        p = np.asarray(poly, dtype=np.float64)
        if len(p) != 4:
            continue
        if polygon_area(p) <= 0:
            continue
        cand = WindowCandidate.from_corners(p)
        if passes_constraints(cand, params, frame_shape):
            out.append(cand)
    return out

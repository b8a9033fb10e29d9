"""Window detection: edges to lines to contours to scored quadrilaterals."""
from .candidates import (
    DetectParams,
    WindowCandidate,
    filter_candidates,
    interior_angles,
    order_corners,
    passes_constraints,
)
from .contours import approx_polygon, contour_perimeter, convex_hull, find_contours, polygon_area
from .histogram import (
    DegenerateRegionError,
    bhattacharyya_distance,
    color_histogram,
    region_histogram,
    region_mask,
)
from .lines import LineSegment, bresenham, hough_lines_p, rasterize_segments
from .pipeline import (
    DetectionTrace,
    annotate,
    detect_window,
    refine_corners,
    run_pipeline,
    select_window,
    smooth,
)

__all__ = [
    "DegenerateRegionError",
    "DetectParams",
    "DetectionTrace",
    "LineSegment",
    "WindowCandidate",
    "annotate",
    "approx_polygon",
    "bhattacharyya_distance",
    "bresenham",
    "color_histogram",
    "contour_perimeter",
    "convex_hull",
    "detect_window",
    "filter_candidates",
    "find_contours",
    "hough_lines_p",
    "interior_angles",
    "order_corners",
    "passes_constraints",
    "polygon_area",
    "rasterize_segments",
    "refine_corners",
    "region_histogram",
    "region_mask",
    "run_pipeline",
    "select_window",
    "smooth",
]

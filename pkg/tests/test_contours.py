import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windowingress.detect import approx_polygon, contour_perimeter, convex_hull, find_contours, polygon_area
from windowingress.detect.contours import _segment_distances


def outline(w, h, pad=3):
    m = np.zeros((h + 2 * pad, w + 2 * pad), bool)
    m[pad, pad:pad + w] = m[pad + h - 1, pad:pad + w] = True
    m[pad:pad + h, pad] = m[pad:pad + h, pad + w - 1] = True
    return m


def test_empty_map_has_no_contours():
    assert find_contours(np.zeros((10, 10), bool)) == []


def test_rectangle_outline_one_contour():
    cs = find_contours(outline(20, 10))
    assert len(cs) == 1
    # boundary pixels of a 20 x 10 outline: 2 * 20 + 2 * 8 = 56
    assert abs(len(cs[0]) - 56) <= 4


def test_contour_points_are_eight_connected():
    c = find_contours(outline(20, 10))[0]
    steps = np.abs(np.diff(np.vstack([c, c[:1]]), axis=0))
    assert steps.max() <= 1


def test_two_squares_two_contours_and_holes_ignored():
    m = np.zeros((30, 30), bool)
    m[2:8, 2:8] = True
    m[15:25, 15:25] = True
    m[18:22, 18:22] = False
    assert len(find_contours(m)) == 2


def test_rdp_rectangle_four_corners():
    c = find_contours(outline(40, 25))[0]
    poly = approx_polygon(c, 0.02 * contour_perimeter(c))
    assert len(poly) == 4
    expected = np.array([[3, 3], [42, 3], [42, 27], [3, 27]], float)
    for v in poly:
        assert np.abs(expected - v).sum(axis=1).min() <= 1


def test_rdp_circle_many_vertices():
    yy, xx = np.mgrid[0:80, 0:80]
    disk = (xx - 40) ** 2 + (yy - 40) ** 2 <= 30 ** 2
    c = find_contours(disk)[0]
    assert len(approx_polygon(c, 1.0)) > 8


def test_rdp_triangle():
    tri = np.array([[0, 0], [10, 0], [5, 8]], float)
    assert len(approx_polygon(tri, 0.5)) == 3


def test_rdp_rejects_bad_input():
    with pytest.raises(ValueError):
        approx_polygon(np.array([[0, 0], [1, 1]], float), 1.0)
    with pytest.raises(ValueError):
        approx_polygon(np.array([[0, 0], [1, 1], [2, 0]], float), 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 40), st.integers(3, 40), st.floats(0.5, 5))
def test_rdp_subset_and_within_epsilon(w, h, eps):
    c = find_contours(outline(w, h))[0]
    if len(c) < 3:
        return
    poly = approx_polygon(c, eps)
    rows = {tuple(p) for p in c}
    assert all(tuple(v) in rows for v in poly)
    closed = np.vstack([poly, poly[:1]])
    dist = np.min([_segment_distances(c, closed[i], closed[i + 1]) for i in range(len(poly))], axis=0)
    assert dist.max() <= eps + 1e-9


def test_area_and_hull():
    assert polygon_area([(0, 0), (1, 0), (1, 1), (0, 1)]) == 1.0
    square = np.array([(0, 0), (4, 0), (4, 4), (0, 4)], float)
    assert {tuple(p) for p in convex_hull(square)} == {tuple(p) for p in square}
    arrow = np.array([(0, 0), (4, 0), (2, 1), (4, 4)], float)
    hull = convex_hull(arrow)
    assert 3 <= len(hull) <= 4
    assert polygon_area(hull) > polygon_area(arrow)

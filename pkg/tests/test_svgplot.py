import xml.etree.ElementTree as ET

import pytest

from windowingress import nav
from windowingress.svgplot import PlotInputError, mission_svg

SVG = "{http://www.w3.org/2000/svg}"


def log_text(n):
    rows = []
    for k in range(n):
        psi = 15.0 * (1 - k / max(n, 1))
        rows.append(nav.LogRow(k, nav.NavPhase.ALIGN, 2.0, 1.0 - 0.1 * k, -1.5, 0.0, psi, psi,
                               50.0 + k, 40.0 + k, 39.0 + k, True))
    return nav.MissionLog(tuple(rows), False).to_csv()


def test_two_charts():
    root = ET.fromstring(mission_svg(log_text(10)))
    assert len(root.findall(f"{SVG}g")) == 2
    assert len(next(root.iter(f"{SVG}polyline")).get("points").split()) == 10
    text = " ".join(t.text for t in root.iter(f"{SVG}text"))
    assert "Y-position" in text and "left side" in text and "right side" in text


def test_single_row_draws_points():
    root = ET.fromstring(mission_svg(log_text(1)))
    assert len(list(root.iter(f"{SVG}circle"))) >= 4


def test_nan_values_break_lines():
    text = log_text(6).splitlines()
    cells = text[3].split(",")
    cells[nav.LOG_COLUMNS.index("est_psi_deg")] = "nan"
    text[3] = ",".join(cells)
    root = ET.fromstring(mission_svg("\n".join(text) + "\n"))
    assert len(list(root.iter(f"{SVG}polyline"))) >= 5


def test_missing_columns_named():
    with pytest.raises(PlotInputError, match="opening_left_px"):
        mission_svg("step,y,est_psi_deg,opening_total_px,opening_right_px\n0,1,2,3,4\n")
    with pytest.raises(PlotInputError, match="missing columns"):
        mission_svg("")


def test_bad_number_reported():
    with pytest.raises(PlotInputError, match="column y"):
        mission_svg("y,est_psi_deg,opening_total_px,opening_left_px,opening_right_px\nabc,1,2,3,4\n")

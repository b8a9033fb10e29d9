"""Window-ingress navigation: state machine and closed-loop mission runner.

Sign conventions follow :mod:`windowingress.simworld`: relative yaw ``psi`` is
positive when the UAV is turned right of the inward wall normal, a positive
yaw command turns right, ``lateral`` is positive to the left and
``vertical`` positive down. Under these conventions every lateral command
issued in Align has the opposite sign of ``psi``.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .detect import DetectParams, WindowCandidate, detect_window
from .pose import EulerAngles, PoseError, window_pose
from .simworld import (
    Camera,
    NavCommand,
    StepLimits,
    UavState,
    WorldModel,
    crossed_window,
    ground_truth,
    reference_histogram,
    step,
)


class NavPhase(enum.Enum):
    SEARCH = "Search"
    ALIGN = "Align"
    APPROACH = "Approach"
    RECOVER = "Recover"
    INGRESSED = "Ingressed"

    def __str__(self) -> str:
        return self.value


# Every transition nav_step may make. Ingressed is entered only by the mission
# harness, from any phase, when the UAV crosses the opening.
TRANSITIONS = {
    NavPhase.SEARCH: {NavPhase.SEARCH, NavPhase.ALIGN},
    NavPhase.ALIGN: {NavPhase.ALIGN, NavPhase.APPROACH, NavPhase.RECOVER},
    NavPhase.APPROACH: {NavPhase.APPROACH, NavPhase.ALIGN, NavPhase.RECOVER},
    NavPhase.RECOVER: {NavPhase.RECOVER, NavPhase.ALIGN, NavPhase.SEARCH},
    NavPhase.INGRESSED: {NavPhase.INGRESSED},
}


@dataclass(frozen=True)
class NavParams:
    yaw_step: float = math.radians(2.0)
    lateral_step: float = 0.05
    forward_step: float = 0.1
    vertical_gain: float = 0.002  # world units per pixel of row error
    max_vertical_step: float = 0.1
    align_tolerance: float = math.radians(1.5)
    validity_bound: float = math.radians(45.0)
    max_recover_steps: int = 50
    center_tolerance_px: float = 10.0
    # once the opening spans this fraction of the frame width, a lost
    # detection in Approach means the window fills the view: keep going
    commit_fraction: float = 0.4

    def __post_init__(self):
        errors = self.validation_errors()
        if errors:
            raise ValueError("; ".join(errors))

    def validation_errors(self) -> list[str]:
        errs = [f"{f.name}: must be positive, got {getattr(self, f.name)}"
                for f in fields(self) if not getattr(self, f.name) > 0]
        if not self.align_tolerance < self.validity_bound:
            errs.append("align_tolerance: must be below validity_bound")
        if not self.commit_fraction <= 1:
            errs.append("commit_fraction: must be at most 1")
        return errs


@dataclass(frozen=True)
class NavObservation:
    """What the vision front end reports for one frame.

    ``focal_px`` converts the centroid's column offset into a yaw angle; when
    it is missing the yaw correction is a fixed step.
    """

    detection: WindowCandidate | None
    angles: EulerAngles | None
    width: int
    height: int
    focal_px: float | None = None

    def __post_init__(self):
        if self.angles is not None and self.detection is None:
            raise ValueError("angles given without a detection")

    @property
    def usable(self) -> bool:
        return self.detection is not None and self.angles is not None


@dataclass(frozen=True)
class NavState:
    phase: NavPhase = NavPhase.SEARCH
    recover_count: int = 0
    # opening width over frame width at the last usable detection
    last_opening_frac: float = 0.0


def _centering(obs: NavObservation, params: NavParams) -> tuple[float, float, bool]:
    """Yaw and vertical corrections that move the centroid to the frame centre."""
    col, row = obs.detection.centroid
    dc = col - obs.width / 2.0
    dr = row - obs.height / 2.0
    if obs.focal_px:
        yaw = math.atan(dc / obs.focal_px)
    else:
        yaw = math.copysign(params.yaw_step, dc) if abs(dc) > params.center_tolerance_px else 0.0
    yaw = float(np.clip(yaw, -params.yaw_step, params.yaw_step))
    # moving down (positive) lifts a window that sits below the centre row
    vertical = float(np.clip(params.vertical_gain * dr, -params.max_vertical_step, params.max_vertical_step))
    centered = abs(dc) <= params.center_tolerance_px and abs(dr) <= params.center_tolerance_px
    return yaw, vertical, centered


def nav_step(state: NavState, obs: NavObservation, params: NavParams) -> tuple[NavCommand, NavState]:
    """One decision of the state machine.

    A frame whose pose could not be recovered counts as no detection. Phase
    changes issue a zero command, except entering Recover, which already
    backs away from the wall.
    """
    phase = state.phase
    back = NavCommand(forward=-params.forward_step)

    if phase is NavPhase.INGRESSED:
        return NavCommand(), state

    if phase is NavPhase.SEARCH:
        if obs.usable:
            return NavCommand(), NavState(NavPhase.ALIGN, 0, _opening_frac(obs))
        return NavCommand(yaw=params.yaw_step), NavState(NavPhase.SEARCH)

    if phase is NavPhase.RECOVER:
        if obs.usable:
            return NavCommand(), NavState(NavPhase.ALIGN, 0, _opening_frac(obs))
        if state.recover_count >= params.max_recover_steps:
            return NavCommand(), NavState(NavPhase.SEARCH)
        return back, NavState(NavPhase.RECOVER, state.recover_count + 1, state.last_opening_frac)

    if not obs.usable:
        if phase is NavPhase.APPROACH and state.last_opening_frac >= params.commit_fraction:
            return NavCommand(forward=params.forward_step), state
        return back, NavState(NavPhase.RECOVER, 1, state.last_opening_frac)

    psi = obs.angles.psi
    yaw, vertical, centered = _centering(obs, params)
    nxt = NavState(phase, 0, _opening_frac(obs))
    if abs(psi) > params.validity_bound:
        # the angle is not trusted: turn only, never translate
        return NavCommand(yaw=yaw), nxt

    if phase is NavPhase.ALIGN:
        if abs(psi) <= params.align_tolerance and centered:
            return NavCommand(), NavState(NavPhase.APPROACH, 0, nxt.last_opening_frac)
        lateral = 0.0
        if abs(psi) > params.align_tolerance:
            lateral = -math.copysign(params.lateral_step, psi)
        return NavCommand(lateral=lateral, vertical=vertical, yaw=yaw), nxt

    # Approach
    if abs(psi) > params.align_tolerance:
        return NavCommand(), NavState(NavPhase.ALIGN, 0, nxt.last_opening_frac)
    return NavCommand(forward=params.forward_step, vertical=vertical, yaw=yaw), nxt


def _opening_frac(obs: NavObservation) -> float:
    return opening_width(obs.detection)[0] / obs.width


def opening_width(candidate) -> tuple[float, float, float]:
    """``(total, left, right)`` in pixels.

    ``left`` and ``right`` are the lengths of the left (TL-BL) and right
    (TR-BR) edges; ``total`` is the horizontal distance between their
    midpoints.
    """
    c = np.asarray(getattr(candidate, "corners", candidate), dtype=np.float64)
    tl, tr, br, bl = c
    left = float(np.hypot(*(bl - tl)))
    right = float(np.hypot(*(br - tr)))
    total = float(abs((tr[0] + br[0]) / 2.0 - (tl[0] + bl[0]) / 2.0))
    return total, left, right


LOG_COLUMNS = (
    "step", "phase", "x", "y", "z", "yaw", "est_psi_deg", "true_psi_deg",
    "opening_total_px", "opening_left_px", "opening_right_px", "detected",
)


@dataclass(frozen=True)
class LogRow:
    """One frame: the state before the command, what was seen and the phase it was handled in."""

    step: int
    phase: NavPhase
    x: float
    y: float
    z: float
    yaw: float
    est_psi_deg: float
    true_psi_deg: float
    opening_total_px: float
    opening_left_px: float
    opening_right_px: float
    detected: bool


@dataclass(frozen=True)
class MissionLog:
    rows: tuple[LogRow, ...]
    ingressed: bool
    # crossed the wall plane outside the opening
    collided: bool = False
    params: NavParams = field(default_factory=NavParams)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for r in self.rows:
            w.writerow([
                r.step, r.phase.value, *(_fmt(getattr(r, k)) for k in LOG_COLUMNS[2:11]), int(r.detected),
            ])
        return buf.getvalue()

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=np.float64)


def _fmt(v: float) -> str:
    # repr round-trips exactly, so logs can be replayed without loss
    return repr(float(v))


def parse_log_csv(text: str) -> dict[str, list[str]]:
    """Columns of a mission CSV as lists of strings; missing columns are an error."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise ValueError(f"empty mission log: missing columns {', '.join(LOG_COLUMNS)}")
    cols = {name: [] for name in header}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        for name, v in zip(header, row):
            cols[name].append(v)
    return cols


def _in_opening(world: WorldModel, uav: UavState) -> bool:
    u, v = world.plane_coords(uav.position)
    return abs(u) <= world.window.width / 2 and abs(v) <= world.window.height / 2


def run_mission(
    world: WorldModel,
    start: UavState,
    camera: Camera = Camera(),
    detect_params: DetectParams = DetectParams(),
    nav_params: NavParams = NavParams(),
    limits: StepLimits = StepLimits(),
    max_steps: int = 500,
    seed: int = 0,
    reference=None,
) -> MissionLog:
    """Fly the closed loop render, detect, pose, decide, step.

    Stops when the UAV passes through the opening (a last row in phase
    Ingressed is appended), when it crosses the wall plane elsewhere, or
    after ``max_steps`` frames.
    """
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1, got {max_steps}")
    if reference is None:
        reference = reference_histogram(world, camera)
    geometry = world.geometry
    right, down, n = world.axes
    plane_offset = float(np.asarray(world.wall_point) @ n)
    state = NavState()
    uav = start
    rows = []
    ingressed = collided = False
    for k in range(max_steps):
        frame = camera.render(world, uav, seed=seed + k)
        cand = detect_window(frame, reference, detect_params.replace(seed=seed + k))
        angles = None
        if cand is not None:
            try:
                _, angles = window_pose(cand, geometry, camera.K)
            except PoseError:
                cand = None
        gt = ground_truth(world, uav, camera.K)
        widths = opening_width(cand) if cand is not None else (math.nan,) * 3
        rows.append(LogRow(
            k, state.phase, uav.x, uav.y, uav.z, uav.yaw,
            math.degrees(angles.psi) if angles is not None else math.nan,
            math.degrees(gt.relative_yaw), *widths, cand is not None,
        ))
        obs = NavObservation(cand, angles, camera.width, camera.height, camera.K.fx)
        cmd, state = nav_step(state, obs, nav_params)
        before = float(uav.position @ n) - plane_offset
        uav = step(uav, cmd, limits)
        after = float(uav.position @ n) - plane_offset
        # standing in the plane counts as through: the camera cannot render from there
        on_plane = abs(after) < 1e-9
        if crossed_window(world, uav) or (on_plane and _in_opening(world, uav)):
            ingressed = True
            gt = ground_truth(world, uav, camera.K)
            rows.append(LogRow(k + 1, NavPhase.INGRESSED, uav.x, uav.y, uav.z, uav.yaw, math.nan,
                               math.degrees(gt.relative_yaw), math.nan, math.nan, math.nan, False))
            break
        if (before <= 0 < after) or on_plane:
            collided = True
            break
    return MissionLog(tuple(rows), ingressed, collided, nav_params)

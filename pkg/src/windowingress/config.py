"""Plain-text run configuration.

One ``key = value`` per line, ``#`` starts a comment. Keys carry a dotted
section prefix. Numbers are plain decimals, vectors and colours are comma
separated, angles are given in degrees (keys ending in ``_deg``). Every key
is optional; unknown keys and bad values are reported together, one line per
key.

Sections::

    seed                      base seed for Hough sampling and pixel noise
    camera.fx fy cx cy        intrinsics in pixels
    camera.width height       frame size in pixels
    camera.samples            rays per pixel (1 = point sampling)
    window.width height       physical window size in world units
    world.window_center       x, y, z of the window centre
    world.window_color        r, g, b of what is seen through the opening
    world.wall_point          any point on the wall plane
    world.wall_normal         unit normal pointing through the wall
    world.wall_color, world.background_color, world.noise_sigma
    world.decoys = none       drop the default decoys
    world.decoy.N.center / .width / .height / .color
                              decoy N (replaces the default decoys)
    detect.<field>            any DetectParams field (hough_theta_res_deg in degrees)
    nav.<field>               any NavParams field (yaw_step_deg, align_tolerance_deg,
                              validity_bound_deg in degrees)
    limits.forward lateral vertical yaw_deg
                              per-step command bounds
    start.distance            start distance in front of the window
    start.right, start.down   start offset from the window axis
    start.yaw_deg             start heading relative to the wall normal (right positive)
    sim.max_steps             frame budget of a mission
    reference.image           PPM whose pixels form the reference histogram
                              (default: the window interior seen head-on)
"""
from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path

from .detect import DetectParams
from .nav import NavParams
from .pose import CameraIntrinsics, WindowGeometry
from .simworld import Camera, Rect, StepLimits, UavState, WorldModel, facing_state


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` holds one ``key: message`` line per problem."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass(frozen=True)
class StartPose:
    distance: float = 8.0
    right: float = 1.0
    down: float = 0.0
    yaw_deg: float = 15.0

    def state(self, world: WorldModel) -> UavState:
        return facing_state(world, self.distance, self.right, self.down, math.radians(self.yaw_deg))


@dataclass(frozen=True)
class RunConfig:
    camera: Camera = field(default_factory=Camera)
    geometry: WindowGeometry = WindowGeometry(1.0, 0.8)
    world: WorldModel = field(default_factory=WorldModel)
    detect: DetectParams = field(default_factory=DetectParams)
    nav: NavParams = field(default_factory=NavParams)
    limits: StepLimits = field(default_factory=StepLimits)
    start: StartPose = field(default_factory=StartPose)
    max_steps: int = 500
    seed: int = 0
    reference_image: Path | None = None

    def with_seed(self, seed: int) -> "RunConfig":
        return _replace(self, seed=seed)


def _replace(obj, **changes):
    return dataclasses.replace(obj, **changes)


_DEG_FIELDS = {
    "detect.hough_theta_res_deg": "hough_theta_res",
    "nav.yaw_step_deg": "yaw_step",
    "nav.align_tolerance_deg": "align_tolerance",
    "nav.validity_bound_deg": "validity_bound",
    "limits.yaw_deg": "yaw",
}
_INT_FIELDS = {
    "blur_kernel", "pyramid_depth", "hough_votes", "hough_max_line_gap", "line_thickness",
    "dilation_radius", "seed", "max_recover_steps",
}
_DECOY_KEY = re.compile(r"^world\.decoy\.(\d+)\.(center|width|height|color)$")


def parse_lines(text: str) -> tuple[dict[str, str], list[str]]:
    """Split config text into ``{key: raw value}``; also returns syntax errors."""
    values: dict[str, str] = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            errors.append(f"line {lineno}: missing key")
        elif key in values:
            errors.append(f"{key}: given more than once (line {lineno})")
        else:
            values[key] = value
    return values, errors


class _Reader:
    """Typed access to raw values, collecting one error per bad key."""

    def __init__(self, values: dict[str, str]):
        self.values = values
        self.used: set[str] = set()
        self.errors: list[str] = []

    def has(self, key: str) -> bool:
        return key in self.values

    def _raw(self, key):
        self.used.add(key)
        return self.values[key]

    def number(self, key: str, default, integer: bool = False):
        if key not in self.values:
            return default
        raw = self._raw(key)
        try:
            v = float(raw)
        except ValueError:
            self.errors.append(f"{key}: expected a number, got {raw!r}")
            return default
        if not math.isfinite(v):
            self.errors.append(f"{key}: must be finite, got {raw!r}")
            return default
        if integer:
            if v != int(v):
                self.errors.append(f"{key}: expected an integer, got {raw!r}")
                return default
            return int(v)
        return v

    def vector(self, key: str, default, length: int, integer: bool = False):
        if key not in self.values:
            return default
        raw = self._raw(key)
        parts = [p.strip() for p in raw.split(",")]
        try:
            v = [float(p) for p in parts]
        except ValueError:
            self.errors.append(f"{key}: expected {length} comma separated numbers, got {raw!r}")
            return default
        if len(v) != length:
            self.errors.append(f"{key}: expected {length} comma separated numbers, got {len(v)}")
            return default
        if integer:
            if any(x != int(x) or not 0 <= x <= 255 for x in v):
                self.errors.append(f"{key}: colour components must be integers in [0, 255]")
                return default
            return tuple(int(x) for x in v)
        return tuple(v)

    def flag(self, key: str, default: bool) -> bool:
        if key not in self.values:
            return default
        raw = self._raw(key).lower()
        if raw in ("1", "true", "yes", "on"):
            return True
        if raw in ("0", "false", "no", "off"):
            return False
        self.errors.append(f"{key}: expected true or false, got {raw!r}")
        return default


def _build(section: str, cls, kwargs: dict, errors: list[str]):
    """Construct ``cls(**kwargs)``, turning its ``field: message`` errors into keyed ones."""
    try:
        return cls(**kwargs)
    except ValueError as exc:
        renamed = {v: k.split(".", 1)[1] for k, v in _DEG_FIELDS.items() if k.startswith(section + ".")}
        for msg in str(exc).split("; "):
            name, _, rest = msg.partition(":")
            errors.append(f"{section}.{renamed.get(name, name)}:{rest}")
        return None


def _section_fields(r: _Reader, section: str, cls) -> dict:
    kwargs = {}
    for f in fields(cls):
        deg_key = f"{section}.{f.name}_deg"
        key = f"{section}.{f.name}"
        if deg_key in _DEG_FIELDS and _DEG_FIELDS[deg_key] == f.name:
            if r.has(deg_key):
                kwargs[f.name] = math.radians(r.number(deg_key, math.degrees(f.default)))
            continue
        if not r.has(key):
            continue
        if isinstance(f.default, bool):
            kwargs[f.name] = r.flag(key, f.default)
        elif f.default is None:
            if r.values[key].lower() == "none":
                r.used.add(key)
                kwargs[f.name] = None
            else:
                kwargs[f.name] = r.number(key, None)
        else:
            kwargs[f.name] = r.number(key, f.default, integer=f.name in _INT_FIELDS)
    return kwargs


def load_config(text: str, base_dir: Path | None = None) -> RunConfig:
    """Parse and validate config text. Raises :class:`ConfigError` listing every problem."""
    values, errors = parse_lines(text)
    r = _Reader(values)
    defaults = RunConfig()

    seed = r.number("seed", defaults.seed, integer=True)

    cam0 = defaults.camera
    fx = r.number("camera.fx", cam0.K.fx)
    fy = r.number("camera.fy", cam0.K.fy)
    cx = r.number("camera.cx", cam0.K.cx)
    cy = r.number("camera.cy", cam0.K.cy)
    width = r.number("camera.width", cam0.width, integer=True)
    height = r.number("camera.height", cam0.height, integer=True)
    samples = r.number("camera.samples", cam0.samples, integer=True)
    if not fx > 0:
        errors.append("camera.fx: must be positive")
    if not fy > 0:
        errors.append("camera.fy: must be positive")
    if not width >= 1:
        errors.append("camera.width: must be >= 1")
    if not height >= 1:
        errors.append("camera.height: must be >= 1")
    if not samples >= 1:
        errors.append("camera.samples: must be >= 1")
    if width >= 1 and not 0 <= cx < width:
        errors.append("camera.cx: must lie inside the frame")
    if height >= 1 and not 0 <= cy < height:
        errors.append("camera.cy: must lie inside the frame")
    camera = None
    if fx > 0 and fy > 0:
        camera = Camera(CameraIntrinsics(fx, fy, cx, cy), width, height, samples)

    w0 = defaults.world
    ww = r.number("window.width", w0.window.width)
    wh = r.number("window.height", w0.window.height)
    geometry = None
    if not ww > 0:
        errors.append(f"window.width: must be positive, got {ww:g}")
    if not wh > 0:
        errors.append(f"window.height: must be positive, got {wh:g}")
    if ww > 0 and wh > 0:
        geometry = WindowGeometry(ww, wh)

    window = Rect(
        r.vector("world.window_center", w0.window.center, 3),
        ww,
        wh,
        r.vector("world.window_color", w0.window.color, 3, integer=True),
    )
    decoys = w0.decoys
    if r.has("world.decoys"):
        if r._raw("world.decoys").lower() != "none":
            errors.append("world.decoys: only 'none' is accepted; define decoys with world.decoy.N.* keys")
        decoys = ()
    indices = sorted({int(m.group(1)) for k in values if (m := _DECOY_KEY.match(k))})
    if indices:
        decoys = []
        for i in indices:
            p = f"world.decoy.{i}"
            missing = [k for k in ("center", "width", "height") if not r.has(f"{p}.{k}")]
            for k in missing:
                errors.append(f"{p}.{k}: required")
            decoys.append(Rect(
                r.vector(f"{p}.center", (0.0, 0.0, 0.0), 3),
                r.number(f"{p}.width", 1.0),
                r.number(f"{p}.height", 1.0),
                r.vector(f"{p}.color", (128, 128, 128), 3, integer=True),
            ))
        decoys = tuple(decoys)
    world_kwargs = dict(
        wall_point=r.vector("world.wall_point", w0.wall_point, 3),
        wall_normal=r.vector("world.wall_normal", w0.wall_normal, 3),
        window=window,
        wall_color=r.vector("world.wall_color", w0.wall_color, 3, integer=True),
        background_color=r.vector("world.background_color", w0.background_color, 3, integer=True),
        decoys=decoys,
        noise_sigma=r.number("world.noise_sigma", w0.noise_sigma),
    )
    world = None
    if geometry is not None:
        world = _build("world", WorldModel, world_kwargs, errors)

    detect = _build("detect", DetectParams, _section_fields(r, "detect", DetectParams), errors)
    nav = _build("nav", NavParams, _section_fields(r, "nav", NavParams), errors)

    l0 = defaults.limits
    limits = StepLimits(
        r.number("limits.forward", l0.forward),
        r.number("limits.lateral", l0.lateral),
        r.number("limits.vertical", l0.vertical),
        math.radians(r.number("limits.yaw_deg", math.degrees(l0.yaw))),
    )
    for name in ("forward", "lateral", "vertical", "yaw"):
        if not getattr(limits, name) > 0:
            errors.append(f"limits.{name if name != 'yaw' else 'yaw_deg'}: must be positive")
    if nav is not None:
        for name, bound, key in (
            ("forward_step", limits.forward, "nav.forward_step"),
            ("lateral_step", limits.lateral, "nav.lateral_step"),
            ("max_vertical_step", limits.vertical, "nav.max_vertical_step"),
            ("yaw_step", limits.yaw, "nav.yaw_step_deg"),
        ):
            if getattr(nav, name) > bound:
                errors.append(f"{key}: exceeds the matching limits.* bound")

    s0 = defaults.start
    start = StartPose(
        r.number("start.distance", s0.distance),
        r.number("start.right", s0.right),
        r.number("start.down", s0.down),
        r.number("start.yaw_deg", s0.yaw_deg),
    )
    if not start.distance > 0:
        errors.append("start.distance: must be positive (in front of the wall)")
    if not -180.0 < start.yaw_deg <= 180.0:
        errors.append("start.yaw_deg: must lie in (-180, 180]")

    max_steps = r.number("sim.max_steps", defaults.max_steps, integer=True)
    if not max_steps >= 1:
        errors.append("sim.max_steps: must be >= 1")

    reference_image = None
    if r.has("reference.image"):
        reference_image = Path(r._raw("reference.image"))
        if base_dir is not None and not reference_image.is_absolute():
            reference_image = base_dir / reference_image

    for key in values:
        if key not in r.used:
            errors.append(f"{key}: unknown key")
    errors = r.errors + errors
    if errors:
        raise ConfigError(errors)
    return RunConfig(camera, geometry, world, detect, nav, limits, start, max_steps, seed, reference_image)


def read_config(path) -> RunConfig:
    """Load a config file; I/O problems surface as ``OSError``."""
    p = Path(path)
    return load_config(p.read_text(encoding="utf-8"), base_dir=p.parent)


def dump_config(cfg: RunConfig) -> str:
    """The config as text that :func:`load_config` reads back to the same values."""
    lines = [f"seed = {cfg.seed}"]
    K = cfg.camera.K
    lines += [f"camera.fx = {K.fx!r}", f"camera.fy = {K.fy!r}", f"camera.cx = {K.cx!r}", f"camera.cy = {K.cy!r}",
              f"camera.width = {cfg.camera.width}", f"camera.height = {cfg.camera.height}",
              f"camera.samples = {cfg.camera.samples}",
              f"window.width = {cfg.geometry.width!r}", f"window.height = {cfg.geometry.height!r}"]
    w = cfg.world

    def vec(v):
        return ", ".join(repr(float(x)) if isinstance(x, float) else str(x) for x in v)

    lines += [f"world.window_center = {vec(w.window.center)}", f"world.window_color = {vec(w.window.color)}",
              f"world.wall_point = {vec(w.wall_point)}", f"world.wall_normal = {vec(w.wall_normal)}",
              f"world.wall_color = {vec(w.wall_color)}", f"world.background_color = {vec(w.background_color)}",
              f"world.noise_sigma = {w.noise_sigma!r}"]
    if not w.decoys:
        lines.append("world.decoys = none")
    for i, d in enumerate(w.decoys):
        lines += [f"world.decoy.{i}.center = {vec(d.center)}", f"world.decoy.{i}.width = {d.width!r}",
                  f"world.decoy.{i}.height = {d.height!r}", f"world.decoy.{i}.color = {vec(d.color)}"]
    for section, obj in (("detect", cfg.detect), ("nav", cfg.nav)):
        for f in fields(obj):
            v = getattr(obj, f.name)
            deg_key = f"{section}.{f.name}_deg"
            if _DEG_FIELDS.get(deg_key) == f.name:
                lines.append(f"{deg_key} = {math.degrees(v)!r}")
            elif v is None:
                lines.append(f"{section}.{f.name} = none")
            elif isinstance(v, bool):
                lines.append(f"{section}.{f.name} = {'true' if v else 'false'}")
            else:
                lines.append(f"{section}.{f.name} = {v!r}")
    lim = cfg.limits
    lines += [f"limits.forward = {lim.forward!r}", f"limits.lateral = {lim.lateral!r}",
              f"limits.vertical = {lim.vertical!r}", f"limits.yaw_deg = {math.degrees(lim.yaw)!r}"]
    st = cfg.start
    lines += [f"start.distance = {st.distance!r}", f"start.right = {st.right!r}",
              f"start.down = {st.down!r}", f"start.yaw_deg = {st.yaw_deg!r}",
              f"sim.max_steps = {cfg.max_steps}"]
    if cfg.reference_image is not None:
        lines.append(f"reference.image = {cfg.reference_image}")
    return "\n".join(lines) + "\n"

"""``windowingress`` command-line front end.

Exit statuses:

====  ==========================================================
0     success (window found, pose printed, UAV ingressed, file written)
1     negative outcome: no window in the frame, or no ingress within budget
2     usage error (bad subcommand or flags)
3     input error: missing, unreadable or malformed input file
4     configuration error (every bad key is listed)
5     window found but its pose could not be recovered
6     output file could not be written
====  ==========================================================
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, read_config
from .detect import annotate, color_histogram, detect_window
from .nav import opening_width, run_mission
from .pnm import PnmError, encode_pnm, read_pnm
from .pose import PoseError, window_pose
from .simworld import reference_histogram
from .svgplot import PlotInputError, mission_svg

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_CONFIG = 4
EXIT_POSE = 5
EXIT_OUTPUT = 6


class _Failure(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _config(args) -> RunConfig:
    if args.config is None:
        cfg = RunConfig()
    else:
        try:
            cfg = read_config(args.config)
        except ConfigError as exc:
            raise _Failure(EXIT_CONFIG, f"invalid config {args.config}:\n" + "\n".join(f"  {e}" for e in exc.errors))
        except (OSError, UnicodeDecodeError) as exc:
            raise _Failure(EXIT_CONFIG, f"cannot read config {args.config}: {exc}")
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _read_image(path) -> np.ndarray:
    try:
        return read_pnm(path)
    except PnmError as exc:
        raise _Failure(EXIT_INPUT, f"malformed image {path}: {exc}")
    except OSError as exc:
        raise _Failure(EXIT_INPUT, f"cannot read {path}: {exc.strerror or exc}")


def _write(path, data: bytes | str) -> None:
    try:
        if isinstance(data, str):
            Path(path).write_text(data, encoding="utf-8")
        else:
            Path(path).write_bytes(data)
    except OSError as exc:
        raise _Failure(EXIT_OUTPUT, f"cannot write {path}: {exc.strerror or exc}")


def _reference(cfg: RunConfig) -> np.ndarray:
    if cfg.reference_image is None:
        return reference_histogram(cfg.world, cfg.camera)
    img = _read_image(cfg.reference_image)
    if img.ndim != 3:
        raise _Failure(EXIT_INPUT, f"reference image {cfg.reference_image} must be colour (P6)")
    return color_histogram(img.reshape(-1, 3))


def _detect(args, cfg: RunConfig):
    frame = _read_image(args.input)
    cand = detect_window(frame, _reference(cfg), cfg.detect.replace(seed=cfg.seed))
    return frame, cand


def _record(cand) -> dict:
    if cand is None:
        return {"detected": False}
    total, left, right = opening_width(cand)
    return {
        "detected": True,
        "corners": [[float(x), float(y)] for x, y in cand.corners],
        "centroid": [float(v) for v in cand.centroid],
        "area": float(cand.area),
        "aspect_ratio": float(cand.aspect_ratio),
        "hull_ratio": float(cand.hull_ratio),
        "hist_distance": float(cand.hist_distance) if math.isfinite(cand.hist_distance) else None,
        "opening_total_px": total,
        "opening_left_px": left,
        "opening_right_px": right,
    }


def cmd_detect(args) -> int:
    cfg = _config(args)
    frame, cand = _detect(args, cfg)
    if args.output is not None:
        _write(args.output, encode_pnm(annotate(frame, cand)))
    print(json.dumps(_record(cand)))
    return EXIT_OK if cand is not None else EXIT_NEGATIVE


def cmd_pose(args) -> int:
    cfg = _config(args)
    _, cand = _detect(args, cfg)
    if cand is None:
        print("no window detected", file=sys.stderr)
        return EXIT_NEGATIVE
    try:
        pose, angles = window_pose(cand, cfg.geometry, cfg.camera.K)
    except PoseError as exc:
        print(f"pose failed: {exc}", file=sys.stderr)
        return EXIT_POSE
    theta, phi, psi = (math.degrees(a) for a in angles)
    print(json.dumps({
        "theta_deg": theta, "phi_deg": phi, "psi_deg": psi,
        "t": [float(v) for v in pose.t], "R": [[float(v) for v in row] for row in pose.R],
    }))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    log = run_mission(
        cfg.world, cfg.start.state(cfg.world), cfg.camera, cfg.detect, cfg.nav, cfg.limits,
        cfg.max_steps, cfg.seed, _reference(cfg),
    )
    text = log.to_csv()
    if args.output is None:
        sys.stdout.write(text)
    else:
        _write(args.output, text)
    frames = sum(1 for r in log.rows if r.phase.value != "Ingressed")
    if log.ingressed:
        print(f"ingressed after {frames} frames", file=sys.stderr)
        return EXIT_OK
    why = "hit the wall" if log.collided else "step budget exhausted"
    print(f"not ingressed after {frames} frames ({why})", file=sys.stderr)
    return EXIT_NEGATIVE


def cmd_plot(args) -> int:
    try:
        text = Path(args.input).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _Failure(EXIT_INPUT, f"cannot read {args.input}: {exc}")
    try:
        svg = mission_svg(text)
    except PlotInputError as exc:
        raise _Failure(EXIT_INPUT, f"{args.input}: {exc}")
    _write(args.output, svg)
    return EXIT_OK


def cmd_render(args) -> int:
    cfg = _config(args)
    frame = cfg.camera.render(cfg.world, cfg.start.state(cfg.world), seed=cfg.seed)
    _write(args.output, encode_pnm(frame))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="windowingress",
        description="Window detection, pose estimation and simulated ingress.",
        epilog="exit status: 0 ok, 1 no window / not ingressed, 2 usage, 3 input, 4 config, 5 pose, 6 output",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help, input=None, output=None, config=True):
        p = sub.add_parser(name, help=help, description=help)
        if input is not None:
            p.add_argument("--input", required=True, help=input)
        if output is not None:
            p.add_argument("--output", required=output[0], help=output[1])
        if config:
            p.add_argument("--config", help="key = value config file (defaults apply to missing keys)")
            p.add_argument("--seed", type=int, help="overrides the config seed")
        p.set_defaults(func=func)

    add("detect", cmd_detect, "detect the window in one frame; prints a JSON record",
        input="frame (PPM)", output=(False, "annotated frame (PPM)"))
    add("pose", cmd_pose, "detect the window and print its relative pose as JSON", input="frame (PPM)")
    add("simulate", cmd_simulate, "fly a closed-loop mission and write its log",
        output=(False, "mission CSV (default: stdout)"))
    add("plot", cmd_plot, "draw the angle and opening-width charts of a mission log",
        input="mission CSV", output=(True, "SVG file"), config=False)
    add("render", cmd_render, "render the start view of the configured world",
        output=(True, "frame (PPM)"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except _Failure as exc:
        print(f"windowingress {args.command}: {exc}", file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())

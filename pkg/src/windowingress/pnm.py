"""Binary PGM (P5) / PPM (P6) reading and writing, 8-bit only."""
from __future__ import annotations

import os

import numpy as np


class PnmError(ValueError):
    """Raised for unreadable, truncated or unsupported PNM data."""


def _read_header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens: list[bytes] = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < n and not data[i:i + 1].isspace() and data[i:i + 1] != b"#":
            i += 1
        if start == i:
            raise PnmError("truncated header")
        tokens.append(data[start:i])
    # exactly one whitespace byte separates the header from the raster
    if i >= n or not data[i:i + 1].isspace():
        raise PnmError("truncated header")
    return tokens, i + 1


def decode_pnm(data: bytes) -> np.ndarray:
    tokens, offset = _read_header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise PnmError(f"unsupported magic number {magic!r}; only P5 and P6 are read")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise PnmError("non-numeric header field") from exc
    if width < 1 or height < 1:
        raise PnmError(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise PnmError(f"only maxval 255 is supported, got {maxval}")
    channels = 3 if magic == b"P6" else 1
    size = width * height * channels
    raster = data[offset:offset + size]
    if len(raster) < size:
        raise PnmError(f"truncated raster: expected {size} bytes, got {len(raster)}")
    arr = np.frombuffer(raster, dtype=np.uint8).copy()
    if channels == 3:
        return arr.reshape(height, width, 3)
    return arr.reshape(height, width)


def encode_pnm(img) -> bytes:
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        raise PnmError(f"expected uint8 pixels, got {arr.dtype}")
    if arr.ndim == 2:
        magic = b"P5"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
    else:
        raise PnmError(f"cannot encode array of shape {arr.shape}")
    h, w = arr.shape[:2]
    header = b"%s\n%d %d\n255\n" % (magic, w, h)
    return header + np.ascontiguousarray(arr).tobytes()


def read_pnm(path: str | os.PathLike) -> np.ndarray:
    """Read a P5 file as ``(H, W)`` or a P6 file as ``(H, W, 3)`` uint8."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise PnmError(f"cannot read {os.fspath(path)}: {exc.strerror}") from exc
    return decode_pnm(data)


def write_pnm(path: str | os.PathLike, img) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pnm(img))

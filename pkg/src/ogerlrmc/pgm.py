"""Binary PGM (P5) reading and writing, plus a raw float64 dump format."""

import os
import struct

import numpy as np


class PgmError(ValueError):
    pass


def _tokens(data):
    """Yield ``(token, end_offset)`` over the header, skipping ``#`` comments."""
    i, n = 0, len(data)
    while i < n:
        ch = data[i : i + 1]
        if ch.isspace():
            i += 1
        elif ch == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            j = i
            while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def read_pgm(path):
    """Raw ``uint8`` pixels of a P5 file with maxval 255."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise PgmError(f"{path}: not a binary PGM (missing P5 magic)")
    fields = []
    end = 0
    for tok, end in _tokens(data):
        fields.append(tok)
        if len(fields) == 4:
            break
    if len(fields) < 4:
        raise PgmError(f"{path}: malformed header")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError as exc:
        raise PgmError(f"{path}: malformed header") from exc
    if width < 1 or height < 1:
        raise PgmError(f"{path}: malformed header (non-positive size)")
    if maxval != 255:
        raise PgmError(f"{path}: unsupported maxval {maxval}")
    # Exactly one whitespace byte separates the header from the payload.
    start = end + 1
    payload = data[start : start + width * height]
    if len(payload) < width * height:
        raise PgmError(f"{path}: truncated payload ({len(payload)} of {width * height} bytes)")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(pixels, path):
    pixels = np.asarray(pixels, dtype=np.uint8)
    if pixels.ndim != 2:
        raise PgmError("PGM data must be 2-D")
    height, width = pixels.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(np.ascontiguousarray(pixels).tobytes())


def load_image(path):
    """PGM as a float matrix in ``[0, 1]`` (value / 255)."""
    return read_pgm(path).astype(np.float64) / 255.0


def quantize(m):
    """Clamp to ``[0, 1]`` and map to bytes with round-half-up."""
    m = np.clip(np.asarray(m, dtype=np.float64), 0.0, 1.0)
    return np.floor(m * 255.0 + 0.5).astype(np.uint8)


def save_image(m, path):
    write_pgm(quantize(m), path)


def minmax_rescale(m):
    """Map to ``[0, 1]``; a constant matrix becomes mid-gray."""
    m = np.asarray(m, dtype=np.float64)
    lo, hi = float(m.min()), float(m.max())
    if hi - lo <= 1e-12 * max(1.0, abs(hi), abs(lo)):
        return np.full_like(m, 0.5)
    return (m - lo) / (hi - lo)


def write_raw(m, path):
    """Little-endian: uint32 rows, uint32 cols, then float64 data in row-major order."""
    m = np.ascontiguousarray(m, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", *m.shape))
        fh.write(m.tobytes())


def read_raw(path):
    with open(path, "rb") as fh:
        rows, cols = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != rows * cols:
        raise ValueError(f"{os.fspath(path)}: expected {rows * cols} values, found {data.size}")
    return data.reshape(rows, cols).astype(np.float64)

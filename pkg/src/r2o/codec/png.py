"""Minimal grayscale PNG writer/reader (8-bit, single channel).

Writes filter-0 scanlines only; the reader understands filter types 0-4 so
externally produced grayscale files load too.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

_SIGNATURE = b"\x89PNG\r\n\x1a\n"


class PNGError(ValueError):
    pass


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (struct.pack(">I", len(payload)) + tag + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF))


def write_png(pixels: np.ndarray) -> bytes:
    """Encode a HxW uint8 array as an 8-bit grayscale PNG."""
    if pixels.ndim != 2:
        raise PNGError("expected a 2-D grayscale array")
    h, w = pixels.shape
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    raw = b"".join(b"\x00" + pixels[r].tobytes() for r in range(h))
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0)
    return (_SIGNATURE
            + _chunk(b"IHDR", ihdr)
            + _chunk(b"IDAT", zlib.compress(raw, 9))
            + _chunk(b"IEND", b""))


def _unfilter(kind: int, line: bytearray, prev: bytes) -> None:
    if kind == 0:
        return
    n = len(line)
    if kind == 1:
        for i in range(1, n):
            line[i] = (line[i] + line[i - 1]) & 0xFF
    elif kind == 2:
        for i in range(n):
            line[i] = (line[i] + prev[i]) & 0xFF
    elif kind == 3:
        line[0] = (line[0] + prev[0] // 2) & 0xFF
        for i in range(1, n):
            line[i] = (line[i] + (line[i - 1] + prev[i]) // 2) & 0xFF
    elif kind == 4:
        for i in range(n):
            a = line[i - 1] if i else 0
            b = prev[i]
            c = prev[i - 1] if i else 0
            p = a + b - c
            pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
            if pa <= pb and pa <= pc:
                pred = a
            elif pb <= pc:
                pred = b
            else:
                pred = c
            line[i] = (line[i] + pred) & 0xFF
    else:
        raise PNGError(f"unsupported filter type {kind}")


def read_png(data: bytes) -> np.ndarray:
    """Decode an 8-bit grayscale PNG back to a HxW uint8 array."""
    if not data.startswith(_SIGNATURE):
        raise PNGError("not a PNG stream")
    pos = len(_SIGNATURE)
    width = height = None
    idat = b""
    while pos + 8 <= len(data):
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        tag = data[pos + 4:pos + 8]
        payload = data[pos + 8:pos + 8 + length]
        if len(payload) != length:
            raise PNGError("truncated chunk")
        if tag == b"IHDR":
            width, height, depth, color, comp, filt, interlace = \
                struct.unpack(">IIBBBBB", payload)
            if depth != 8 or color != 0:
                raise PNGError("only 8-bit grayscale is supported")
            if comp != 0 or filt != 0 or interlace != 0:
                raise PNGError("unsupported IHDR settings")
        elif tag == b"IDAT":
            idat += payload
        elif tag == b"IEND":
            break
        pos += 12 + length
    if width is None or not idat:
        raise PNGError("missing IHDR or IDAT")
    try:
        raw = zlib.decompress(idat)
    except zlib.error as exc:
        raise PNGError(f"bad IDAT stream: {exc}") from None
    stride = width + 1
    if len(raw) != stride * height:
        raise PNGError("pixel data does not match dimensions")
    out = np.empty((height, width), dtype=np.uint8)
    prev = bytes(width)
    for r in range(height):
        row = raw[r * stride:(r + 1) * stride]
        line = bytearray(row[1:])
        _unfilter(row[0], line, prev)
        out[r] = np.frombuffer(bytes(line), dtype=np.uint8)
        prev = bytes(line)
    return out

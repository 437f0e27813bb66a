"""Grayscale PNG carrier: writer output, reader filters, error paths."""

import struct
import zlib

import numpy as np
import pytest

from r2o.codec.png import PNGError, read_png, write_png

try:
    from PIL import Image
    import io
except ImportError:
    Image = None


def test_round_trip_random(rng):
    for shape in ((1, 1), (7, 3), (64, 64), (120, 37)):
        seed = rng.randrange(2 ** 31)
        pix = np.random.default_rng(seed).integers(0, 256, shape,
                                                   dtype=np.uint8)
        assert np.array_equal(read_png(write_png(pix)), pix)


def test_signature_and_chunks():
    blob = write_png(np.zeros((4, 4), dtype=np.uint8))
    assert blob[:8] == b"\x89PNG\r\n\x1a\n"
    assert b"IHDR" in blob and b"IDAT" in blob and b"IEND" in blob


def test_reader_rejects_junk():
    with pytest.raises(PNGError):
        read_png(b"not a png at all")
    with pytest.raises(PNGError):
        read_png(b"\x89PNG\r\n\x1a\n" + b"\x00" * 16)


def test_reader_rejects_unsupported_color_type():
    # hand-build an RGB IHDR; the reader only speaks 8-bit grayscale
    ihdr = struct.pack(">IIBBBBB", 4, 4, 8, 2, 0, 0, 0)
    chunk = struct.pack(">I", len(ihdr)) + b"IHDR" + ihdr
    chunk += struct.pack(">I", zlib.crc32(b"IHDR" + ihdr))
    with pytest.raises(PNGError):
        read_png(b"\x89PNG\r\n\x1a\n" + chunk)


def _png_with_filter(pix, filter_type):
    """Encode rows with one fixed filter type; exercises the unfilterer."""
    h, w = pix.shape
    raw = bytearray()
    prev = np.zeros(w, dtype=np.int16)
    for r in range(h):
        row = pix[r].astype(np.int16)
        if filter_type == 0:
            out = row
        elif filter_type == 1:
            out = row - np.concatenate(([0], row[:-1]))
        elif filter_type == 2:
            out = row - prev
        elif filter_type == 3:
            left = np.concatenate(([0], row[:-1]))
            out = row - (left + prev) // 2
        else:  # paeth
            left = np.concatenate(([0], row[:-1]))
            upleft = np.concatenate(([0], prev[:-1]))
            p = left + prev - upleft
            pa, pb, pc = (np.abs(p - left), np.abs(p - prev),
                          np.abs(p - upleft))
            pred = np.where((pa <= pb) & (pa <= pc), left,
                            np.where(pb <= pc, prev, upleft))
            out = row - pred
        raw.append(filter_type)
        raw.extend((out % 256).astype(np.uint8).tobytes())
        prev = row
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0)
    body = zlib.compress(bytes(raw))

    def chunk(tag, payload):
        return (struct.pack(">I", len(payload)) + tag + payload
                + struct.pack(">I", zlib.crc32(tag + payload)))

    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr)
            + chunk(b"IDAT", body) + chunk(b"IEND", b""))


@pytest.mark.parametrize("filter_type", [0, 1, 2, 3, 4])
def test_reader_handles_all_filter_types(filter_type, rng):
    pix = np.random.default_rng(rng.randrange(2 ** 31)).integers(
        0, 256, (23, 31), dtype=np.uint8)
    blob = _png_with_filter(pix, filter_type)
    assert np.array_equal(read_png(blob), pix)


@pytest.mark.skipif(Image is None, reason="Pillow not installed")
def test_pillow_reads_writer_output(rng):
    pix = np.random.default_rng(5).integers(0, 256, (50, 40), dtype=np.uint8)
    with Image.open(io.BytesIO(write_png(pix))) as im:
        assert im.mode == "L"
        assert np.array_equal(np.asarray(im), pix)


@pytest.mark.skipif(Image is None, reason="Pillow not installed")
def test_reader_reads_pillow_output(rng):
    pix = np.random.default_rng(6).integers(0, 256, (33, 62), dtype=np.uint8)
    buf = io.BytesIO()
    Image.fromarray(pix, mode="L").save(buf, format="PNG")
    assert np.array_equal(read_png(buf.getvalue()), pix)

"""QR encoding: bitstream assembly, block interleaving, mask choice, render."""

from __future__ import annotations

import numpy as np

from . import gf256, matrix, tables
from .errors import CapacityExceeded, InvalidPayload, TargetTooSmall
from .models import MEDIA_IMAGE, IndirectionPayload, PseudoImage, QrConfig

PAD_BYTES = (0xEC, 0x11)


def serialize_payload(payload: IndirectionPayload) -> bytes:
    """A pseudo-image carries exactly the locator, nothing else."""
    payload.validate()
    if payload.media_class != MEDIA_IMAGE:
        raise InvalidPayload("QR schemata carry image-class payloads only")
    return payload.locator.encode("ascii")


def choose_version(n_bytes: int, ec_level: str, min_version: int = 1) -> int:
    if not tables.MIN_VERSION <= min_version <= tables.MAX_VERSION:
        raise ValueError(f"min_version out of range: {min_version}")
    for version in range(min_version, tables.MAX_VERSION + 1):
        if n_bytes <= tables.byte_capacity(version, ec_level):
            return version
    raise CapacityExceeded(
        f"{n_bytes} bytes exceed version {tables.MAX_VERSION} "
        f"capacity at level {ec_level}")


def build_data_codewords(data: bytes, version: int, ec_level: str) -> list[int]:
    """Byte-mode bitstream with terminator and alternating pad bytes."""
    n_data = tables.data_codewords(version, ec_level)
    cci_bits = 8 if version <= 9 else 16

    bits: list[int] = []

    def push(value: int, width: int) -> None:
        for i in range(width - 1, -1, -1):
            bits.append((value >> i) & 1)

    push(0b0100, 4)
    push(len(data), cci_bits)
    for b in data:
        push(b, 8)

    capacity_bits = 8 * n_data
    if len(bits) > capacity_bits:
        raise CapacityExceeded("bitstream exceeds selected version capacity")
    bits.extend([0] * min(4, capacity_bits - len(bits)))
    while len(bits) % 8:
        bits.append(0)

    out = []
    for i in range(0, len(bits), 8):
        b = 0
        for bit in bits[i:i + 8]:
            b = (b << 1) | bit
        out.append(b)
    for i in range(n_data - len(out)):
        out.append(PAD_BYTES[i % 2])
    return out


def interleave_blocks(data_cw: list[int], version: int, ec_level: str) -> list[int]:
    """Split into RS blocks, append parity, interleave per the standard."""
    ec_per_block, groups = tables.BLOCKS[(version, ec_level)]
    blocks: list[list[int]] = []
    pos = 0
    for count, k in groups:
        for _ in range(count):
            blocks.append(data_cw[pos:pos + k])
            pos += k
    assert pos == len(data_cw)
    parities = [gf256.rs_encode(bytes(b), ec_per_block) for b in blocks]

    out: list[int] = []
    max_k = max(len(b) for b in blocks)
    for j in range(max_k):
        for b in blocks:
            if j < len(b):
                out.append(b[j])
    for j in range(ec_per_block):
        for p in parities:
            out.append(p[j])
    assert len(out) == tables.TOTAL_CODEWORDS[version]
    return out


def encode_symbol(data: bytes, ec_level: str = "M",
                  min_version: int = 1) -> tuple[np.ndarray, int, int]:
    """Encode raw bytes to a module matrix; returns (matrix, version, mask)."""
    version = choose_version(len(data), ec_level, min_version)
    data_cw = build_data_codewords(data, version, ec_level)
    codewords = interleave_blocks(data_cw, version, ec_level)

    best = None
    for mask_id in range(8):
        m = matrix.base_matrix(version)
        matrix.place_codewords(m, version, codewords, mask_id)
        matrix.place_format_info(m, ec_level, mask_id)
        score = matrix.penalty_score(m)
        if best is None or score < best[0]:
            best = (score, mask_id, m)
    _, mask_id, m = best
    return m, version, mask_id


def render(modules: np.ndarray, config: QrConfig,
           quiet_zone: int = 4) -> PseudoImage:
    """Rasterize a module matrix to grayscale pixels per the config."""
    n = modules.shape[0]
    padded = np.zeros((n + 2 * quiet_zone, n + 2 * quiet_zone), dtype=np.uint8)
    padded[quiet_zone:quiet_zone + n, quiet_zone:quiet_zone + n] = modules
    edge = padded.shape[0]

    if config.target_size is not None:
        scale = config.target_size // edge
        if scale < 1:
            raise TargetTooSmall(
                f"target_size {config.target_size} cannot hold a "
                f"{edge}-module symbol")
        canvas_edge = config.target_size
    else:
        scale = config.module_scale
        canvas_edge = edge * scale

    pix = np.where(np.kron(padded, np.ones((scale, scale), dtype=np.uint8)),
                   0, 255).astype(np.uint8)
    if canvas_edge == pix.shape[0]:
        return PseudoImage(pixels=pix, quiet_zone=quiet_zone)
    canvas = np.full((canvas_edge, canvas_edge), 255, dtype=np.uint8)
    off = (canvas_edge - pix.shape[0]) // 2
    canvas[off:off + pix.shape[0], off:off + pix.shape[1]] = pix
    return PseudoImage(pixels=canvas, quiet_zone=quiet_zone,
                       inner_bounds=(off, off, pix.shape[0], pix.shape[1]))


def encode_qr(payload: IndirectionPayload,
              config: QrConfig | None = None) -> PseudoImage:
    """Encode a payload into a square pseudo-image QR symbol."""
    config = config or QrConfig()
    if config.ec_level not in tables.EC_LEVELS:
        raise ValueError(f"unknown EC level {config.ec_level!r}")
    if config.module_scale < 1:
        raise ValueError("module_scale must be >= 1")
    data = serialize_payload(payload)
    modules, _, _ = encode_symbol(data, config.ec_level, config.min_version)
    return render(modules, config)

"""Module-matrix construction: function patterns, placement walk, masking.

Matrices are numpy uint8 arrays with 1 = dark, 0 = light, indexed [row, col].
"""

from __future__ import annotations

import numpy as np

from . import tables


MASK_FUNCS = (
    lambda r, c: (r + c) % 2 == 0,
    lambda r, c: r % 2 == 0,
    lambda r, c: c % 3 == 0,
    lambda r, c: (r + c) % 3 == 0,
    lambda r, c: (r // 2 + c // 3) % 2 == 0,
    lambda r, c: (r * c) % 2 + (r * c) % 3 == 0,
    lambda r, c: ((r * c) % 2 + (r * c) % 3) % 2 == 0,
    lambda r, c: ((r + c) % 2 + (r * c) % 3) % 2 == 0,
)


def _in_finder_corner(n: int, r: int, c: int) -> bool:
    """True for alignment centers that would collide with a finder pattern."""
    return (r < 8 and c < 8) or (r < 8 and c > n - 9) or (r > n - 9 and c < 8)


def function_mask(version: int) -> np.ndarray:
    """Boolean matrix marking every function module (non-data position)."""
    n = tables.size_for_version(version)
    fm = np.zeros((n, n), dtype=bool)

    # finder patterns + separators, as 8x8 corner blocks
    fm[0:8, 0:8] = True
    fm[0:8, n - 8:n] = True
    fm[n - 8:n, 0:8] = True

    # timing
    fm[6, :] = True
    fm[:, 6] = True

    # format information areas + dark module
    fm[8, 0:9] = True
    fm[0:9, 8] = True
    fm[8, n - 8:n] = True
    fm[n - 8:n, 8] = True

    for r in tables.ALIGNMENT[version]:
        for c in tables.ALIGNMENT[version]:
            if _in_finder_corner(n, r, c):
                continue
            fm[r - 2:r + 3, c - 2:c + 3] = True

    if version >= 7:
        fm[0:6, n - 11:n - 8] = True
        fm[n - 11:n - 8, 0:6] = True
    return fm


def base_matrix(version: int) -> np.ndarray:
    """Matrix with all function patterns drawn (format areas left light)."""
    n = tables.size_for_version(version)
    m = np.zeros((n, n), dtype=np.uint8)

    def finder(r0: int, c0: int) -> None:
        m[r0:r0 + 7, c0:c0 + 7] = 1
        m[r0 + 1:r0 + 6, c0 + 1:c0 + 6] = 0
        m[r0 + 2:r0 + 5, c0 + 2:c0 + 5] = 1

    finder(0, 0)
    finder(0, n - 7)
    finder(n - 7, 0)

    for i in range(8, n - 8):
        m[6, i] = m[i, 6] = (i + 1) % 2

    for r in tables.ALIGNMENT[version]:
        for c in tables.ALIGNMENT[version]:
            if _in_finder_corner(n, r, c):
                continue
            m[r - 2:r + 3, c - 2:c + 3] = 1
            m[r - 1:r + 2, c - 1:c + 2] = 0
            m[r, c] = 1

    m[n - 8, 8] = 1  # dark module

    if version >= 7:
        vi = tables.version_info(version)
        for i in range(18):
            bit = (vi >> i) & 1
            m[i // 3, n - 11 + i % 3] = bit
            m[n - 11 + i % 3, i // 3] = bit
    return m


def place_format_info(m: np.ndarray, ec_level: str, mask_id: int) -> None:
    """Write both copies of the 15-bit format word into the matrix."""
    n = m.shape[0]
    f = tables.format_info(ec_level, mask_id)
    for i in range(15):
        bit = (f >> i) & 1
        # copy 1, around the top-left finder (column 6 is timing, skipped)
        if i < 6:
            m[i, 8] = bit
        elif i < 8:
            m[i + 1, 8] = bit
        elif i == 8:
            m[8, 7] = bit
        else:
            m[8, 14 - i] = bit
        # copy 2, split between bottom-left column and top-right row
        if i < 8:
            m[8, n - 1 - i] = bit
        else:
            m[n - 15 + i, 8] = bit


def placement_order(version: int) -> list[tuple[int, int]]:
    """Data-module coordinates in codeword placement order.

    Two-column strips from the right edge, snaking up then down, skipping the
    timing column and every function module.
    """
    n = tables.size_for_version(version)
    fm = function_mask(version)
    order: list[tuple[int, int]] = []
    col = n - 1
    upward = True
    while col > 0:
        if col == 6:
            col -= 1
        rows = range(n - 1, -1, -1) if upward else range(n)
        for r in rows:
            for c in (col, col - 1):
                if not fm[r, c]:
                    order.append((r, c))
        upward = not upward
        col -= 2
    return order


_ORDER_CACHE: dict[int, list[tuple[int, int]]] = {}


def cached_placement_order(version: int) -> list[tuple[int, int]]:
    order = _ORDER_CACHE.get(version)
    if order is None:
        order = _ORDER_CACHE[version] = placement_order(version)
    return order


def place_codewords(m: np.ndarray, version: int, codewords: list[int],
                    mask_id: int) -> None:
    """Write codeword bits (MSB first) with the mask applied at placement."""
    order = cached_placement_order(version)
    mask = MASK_FUNCS[mask_id]
    total_bits = len(codewords) * 8
    for i, (r, c) in enumerate(order):
        if i < total_bits:
            bit = (codewords[i >> 3] >> (7 - (i & 7))) & 1
        else:
            bit = 0  # remainder bits
        if mask(r, c):
            bit ^= 1
        m[r, c] = bit


def read_codewords(m: np.ndarray, version: int, mask_id: int) -> list[int]:
    """Inverse of place_codewords; remainder bits are dropped."""
    order = cached_placement_order(version)
    mask = MASK_FUNCS[mask_id]
    bits = []
    for r, c in order:
        bit = int(m[r, c])
        if mask(r, c):
            bit ^= 1
        bits.append(bit)
    n_codewords = len(bits) // 8
    out = []
    for i in range(n_codewords):
        b = 0
        for j in range(8):
            b = (b << 1) | bits[8 * i + j]
        out.append(b)
    return out


def penalty_score(m: np.ndarray) -> int:
    """Standard four-rule mask evaluation; lower is better."""
    n = m.shape[0]
    total = 0

    # rule 1: same-color runs of length >= 5, rows and columns
    for grid in (m, m.T):
        for line in grid:
            edges = np.flatnonzero(np.diff(line))
            runs = np.diff(np.concatenate(([-1], edges, [n - 1])))
            total += int((runs[runs >= 5] - 2).sum())

    # rule 2: 2x2 blocks of one color
    blocks = m[:-1, :-1] + m[1:, :-1] + m[:-1, 1:] + m[1:, 1:]
    total += 3 * int(np.count_nonzero((blocks == 0) | (blocks == 4)))

    # rule 3: finder-like pattern 1011101 with 4 light modules on either side
    pat = np.array((1, 0, 1, 1, 1, 0, 1, 0, 0, 0, 0), dtype=np.uint8)
    for kernel in (pat, pat[::-1]):
        for grid in (m, m.T):
            win = np.lib.stride_tricks.sliding_window_view(grid, 11, axis=1)
            total += 40 * int(np.count_nonzero((win == kernel).all(axis=2)))
    # rule 4: dark-module proportion
    dark = int(m.sum())
    pct = 100 * dark / (n * n)
    total += 10 * int(abs(pct - 50) // 5)
    return total

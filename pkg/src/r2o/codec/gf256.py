"""GF(256) arithmetic and Reed-Solomon coding over the QR polynomial.

Field: GF(2^8) with primitive polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11d),
generator element 2. Codewords are byte lists, most significant coefficient
first, parity appended. The generator polynomial has consecutive roots
alpha^0 .. alpha^(nsym-1).
"""

from __future__ import annotations


class CorrectionError(Exception):
    """Raised when a codeword's errors exceed the correction capacity."""


_PRIM = 0x11D

# EXP is doubled so products of two log values never need a modulo.
EXP = [0] * 512
LOG = [0] * 256

_x = 1
for _i in range(255):
    EXP[_i] = _x
    LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= _PRIM
for _i in range(255, 512):
    EXP[_i] = EXP[_i - 255]
del _x, _i


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("inverse of 0 in GF(256)")
    return EXP[255 - LOG[a]]


def gf_poly_eval(poly: list[int], x: int) -> int:
    """Evaluate a polynomial given most-significant coefficient first."""
    y = 0
    for c in poly:
        y = gf_mul(y, x) ^ c
    return y


def _generator_poly(nsym: int) -> list[int]:
    g = [1]
    for i in range(nsym):
        # multiply g by (x - alpha^i); subtraction == addition in GF(2^8)
        nxt = [0] * (len(g) + 1)
        for j, c in enumerate(g):
            nxt[j] ^= c
            nxt[j + 1] ^= gf_mul(c, EXP[i])
        g = nxt
    return g


_GEN_CACHE: dict[int, list[int]] = {}


def rs_encode(data: list[int], nsym: int) -> list[int]:
    """Return the nsym parity bytes for data (polynomial long division)."""
    gen = _GEN_CACHE.get(nsym)
    if gen is None:
        gen = _GEN_CACHE[nsym] = _generator_poly(nsym)
    rem = list(data) + [0] * nsym
    for i in range(len(data)):
        coef = rem[i]
        if coef:
            lc = LOG[coef]
            for j in range(1, len(gen)):
                if gen[j]:
                    rem[i + j] ^= EXP[LOG[gen[j]] + lc]
    return rem[len(data):]


def _syndromes(codeword: list[int], nsym: int) -> list[int]:
    return [gf_poly_eval(codeword, EXP[i]) for i in range(nsym)]


def _berlekamp_massey(synd: list[int]) -> list[int]:
    """Error locator lambda(x), least significant coefficient first."""
    c = [1]
    b = [1]
    length = 0
    m = 1
    bb = 1
    for n in range(len(synd)):
        d = synd[n]
        for i in range(1, length + 1):
            d ^= gf_mul(c[i], synd[n - i])
        if d == 0:
            m += 1
            continue
        coef = gf_mul(d, gf_inv(bb))
        if 2 * length <= n:
            t = list(c)
            if len(b) + m > len(c):
                c = c + [0] * (len(b) + m - len(c))
            for i, bi in enumerate(b):
                c[i + m] ^= gf_mul(coef, bi)
            length = n + 1 - length
            b = t
            bb = d
            m = 1
        else:
            if len(b) + m > len(c):
                c = c + [0] * (len(b) + m - len(c))
            for i, bi in enumerate(b):
                c[i + m] ^= gf_mul(coef, bi)
            m += 1
    return c[: length + 1]


def _eval_lsb_first(poly: list[int], x: int) -> int:
    y = 0
    for c in reversed(poly):
        y = gf_mul(y, x) ^ c
    return y


def rs_correct(codeword: list[int], nsym: int) -> list[int]:
    """Correct up to nsym // 2 byte errors in place of a clean return.

    Raises CorrectionError when the error pattern is uncorrectable or the
    corrected word still fails the syndrome check.
    """
    synd = _syndromes(codeword, nsym)
    if max(synd) == 0:
        return list(codeword)

    lam = _berlekamp_massey(synd)
    nerr = len(lam) - 1
    if nerr == 0 or 2 * nerr > nsym:
        raise CorrectionError(f"{nerr} errors exceed capacity {nsym // 2}")

    n = len(codeword)
    # Chien search: error at degree d iff lambda(alpha^-d) == 0.
    positions = []  # byte indexes into codeword
    for d in range(n):
        x = EXP[(255 - d) % 255]
        if _eval_lsb_first(lam, x) == 0:
            positions.append(n - 1 - d)
    if len(positions) != nerr:
        raise CorrectionError("error locator roots do not match error count")

    # Magnitudes: solve sum_k e_k * (alpha^{d_k})^i = S_i, a small Vandermonde
    # system over GF(256), instead of the Forney formula.
    degs = [n - 1 - p for p in positions]
    a = [[EXP[(degs[k] * i) % 255] for k in range(nerr)] + [synd[i]]
         for i in range(nerr)]
    mags = _solve(a, nerr)

    fixed = list(codeword)
    for p, e in zip(positions, mags):
        fixed[p] ^= e
    if max(_syndromes(fixed, nsym)) != 0:
        raise CorrectionError("correction failed syndrome re-check")
    return fixed


def _solve(a: list[list[int]], n: int) -> list[int]:
    """Gaussian elimination over GF(256) on an n x (n+1) augmented matrix."""
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            raise CorrectionError("singular error-location system")
        a[col], a[pivot] = a[pivot], a[col]
        inv = gf_inv(a[col][col])
        a[col] = [gf_mul(v, inv) for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [v ^ gf_mul(f, w) for v, w in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]

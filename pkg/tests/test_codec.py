"""Codec behavior: payloads, symbols, pseudo-text, and the PNG carrier."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from r2o import codec
from r2o.codec import encoder, matrix, tables

URL_ALPHABET = ("abcdefghijklmnopqrstuvwxyz"
                "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-._~/")


def make_url(rng, length):
    prefix = "https://host.example/"
    body = "".join(rng.choice(URL_ALPHABET)
                   for _ in range(max(1, length - len(prefix))))
    return prefix + body


# -- payload validation -----------------------------------------------------

def test_payload_requires_http_scheme():
    for bad in ("ftp://x.example/a", "mailto:a@b", "", "relative/path",
                "http://é.example/x"):
        with pytest.raises(codec.InvalidPayload):
            codec.IndirectionPayload(locator=bad).validate()


def test_payload_accepts_http_and_https():
    for ok in ("http://a.example/f.png", "https://a.example/f.png"):
        codec.IndirectionPayload(locator=ok).validate()


def test_serialize_rejects_text_media_class():
    p = codec.IndirectionPayload(locator="http://a.example/x",
                                 media_class=codec.MEDIA_TEXT)
    with pytest.raises(codec.InvalidPayload):
        codec.serialize_payload(p)


def test_serialized_payload_is_exactly_the_locator_bytes():
    url = "http://a.example/photo.png"
    p = codec.IndirectionPayload(locator=url, extra={"ignored": "yes"})
    assert codec.serialize_payload(p) == url.encode("ascii")


# -- round trips ------------------------------------------------------------

def test_round_trip_short_url():
    url = "http://a.example/p.png"
    image = codec.encode_qr(codec.IndirectionPayload(locator=url))
    got = codec.decode_qr(image)
    assert got.locator == url
    assert got.media_class == codec.MEDIA_IMAGE


def test_round_trip_all_ec_levels(rng):
    url = make_url(rng, 90)
    for level in tables.EC_LEVELS:
        cfg = codec.QrConfig(ec_level=level)
        got = codec.decode_qr(codec.encode_qr(
            codec.IndirectionPayload(locator=url), cfg))
        assert got.locator == url, level


def test_round_trip_spans_versions(rng):
    # walk payload sizes that force a range of symbol versions
    for length in (22, 40, 70, 100, 140, 180, 210):
        url = make_url(rng, length)
        sym, version, mask = encoder.encode_symbol(url.encode())
        assert 1 <= version <= 10
        assert 0 <= mask <= 7
        image = codec.encode_qr(codec.IndirectionPayload(locator=url))
        assert codec.decode_qr(image).locator == url


def test_min_version_is_honored():
    url = "http://a.example/x"
    _, version, _ = encoder.encode_symbol(url.encode(), min_version=6)
    assert version == 6


def test_capacity_exceeded():
    url = "http://a.example/" + "a" * 240  # beyond version 10 at level M
    with pytest.raises(codec.CapacityExceeded):
        codec.encode_qr(codec.IndirectionPayload(locator=url))


@given(st.integers(min_value=20, max_value=150), st.integers())
def test_property_round_trip(length, seed):
    import random
    url = make_url(random.Random(seed), length)
    image = codec.encode_qr(codec.IndirectionPayload(locator=url),
                            codec.QrConfig(target_size=None, module_scale=2))
    assert codec.decode_qr(image).locator == url


# -- decode failure modes ---------------------------------------------------

def test_blank_image_is_not_a_symbol():
    white = codec.PseudoImage(pixels=np.full((80, 80), 255, dtype=np.uint8))
    with pytest.raises(codec.NotAQrSymbol):
        codec.decode_qr(white)


def test_noise_is_not_a_symbol():
    noise = np.random.default_rng(11).integers(0, 256, (120, 120),
                                               dtype=np.uint8)
    with pytest.raises(codec.NotAQrSymbol):
        codec.decode_qr(codec.PseudoImage(pixels=noise))


def test_not_a_symbol_is_not_a_decode_failure():
    # callers branch on the distinction; the types must stay siblings
    assert not issubclass(codec.NotAQrSymbol, codec.DecodeFailure)
    assert not issubclass(codec.DecodeFailure, codec.NotAQrSymbol)


def test_heavy_corruption_raises_decode_failure():
    url = "http://a.example/corrupt-me.png"
    image = codec.encode_qr(codec.IndirectionPayload(locator=url),
                            codec.QrConfig(target_size=None, module_scale=1))
    pix = image.pixels.copy()
    h, w = pix.shape
    pix[h // 2 - 4:h // 2 + 4, 10:w - 10] ^= 255  # stomp an 8-row band
    with pytest.raises((codec.DecodeFailure, codec.NotAQrSymbol)):
        codec.decode_qr(codec.PseudoImage(pixels=pix))


def test_valid_symbol_with_non_locator_payload_fails():
    modules, _, _ = encoder.encode_symbol(b"just some prose, no URL")
    image = encoder.render(modules, codec.QrConfig())
    with pytest.raises(codec.DecodeFailure):
        codec.decode_qr(image)


def test_single_module_flips_are_corrected(rng):
    url = "http://a.example/flip.png"
    image = codec.encode_qr(codec.IndirectionPayload(locator=url),
                            codec.QrConfig(target_size=None, module_scale=1))
    edge = image.width
    for _ in range(25):
        # stay inside the quiet zone: localization relies on a clean border
        r = rng.randrange(4, edge - 4)
        c = rng.randrange(4, edge - 4)
        pix = image.pixels.copy()
        pix[r, c] ^= 255
        assert codec.decode_qr(
            codec.PseudoImage(pixels=pix)).locator == url


# -- rendering, padding, upscaling ------------------------------------------

def test_target_size_render_is_exact():
    image = codec.encode_qr(
        codec.IndirectionPayload(locator="http://a.example/s.png"),
        codec.QrConfig(target_size=512))
    assert (image.width, image.height) == (512, 512)
    assert image.inner_bounds is not None


def test_target_too_small():
    with pytest.raises(codec.TargetTooSmall):
        codec.encode_qr(
            codec.IndirectionPayload(locator="http://a.example/s.png"),
            codec.QrConfig(target_size=16))


def test_module_scale_render():
    url = "http://a.example/s.png"
    image = codec.encode_qr(codec.IndirectionPayload(locator=url),
                            codec.QrConfig(target_size=None, module_scale=3))
    assert image.width % 3 == 0
    assert codec.decode_qr(image).locator == url


def test_pad_with_border_round_trip():
    url = "http://a.example/padded.png"
    image = codec.encode_qr(codec.IndirectionPayload(locator=url),
                            codec.QrConfig(target_size=None, module_scale=2))
    padded = codec.pad_with_border(image, image.width + 37, image.height + 74)
    assert (padded.width, padded.height) == (image.width + 37,
                                             image.height + 74)
    assert codec.decode_qr(padded).locator == url


def test_pad_with_border_identity_and_too_small():
    image = codec.encode_qr(
        codec.IndirectionPayload(locator="http://a.example/x.png"))
    same = codec.pad_with_border(image, image.width, image.height)
    assert np.array_equal(same.pixels, image.pixels)
    assert same.pixels is not image.pixels
    with pytest.raises(codec.TargetTooSmall):
        codec.pad_with_border(image, image.width - 1, image.height)


def test_upscale_round_trip():
    url = "http://a.example/up.png"
    image = codec.encode_qr(codec.IndirectionPayload(locator=url),
                            codec.QrConfig(target_size=None, module_scale=1))
    for factor in (2, 3, 4):
        grown = codec.upscale(image, factor)
        assert grown.width == image.width * factor
        assert codec.decode_qr(grown).locator == url
    assert codec.upscale(image, 1) is image
    with pytest.raises(ValueError):
        codec.upscale(image, 0)


def test_pseudo_image_png_round_trip():
    url = "http://a.example/png.png"
    image = codec.encode_qr(codec.IndirectionPayload(locator=url))
    back = codec.PseudoImage.from_png(image.to_png())
    assert np.array_equal(back.pixels, image.pixels)
    assert codec.decode_qr(back).locator == url


# -- pseudo-text ------------------------------------------------------------

def test_text_indirection_round_trip():
    url = "http://a.example/essay"
    tagged = codec.encode_text_indirection(url)
    assert tagged == url + codec.TEXT_SUFFIX
    assert codec.decode_text_indirection(tagged) == url


def test_text_indirection_fragment_conflict():
    with pytest.raises(codec.FragmentConflict):
        codec.encode_text_indirection("http://a.example/page#section")


def test_text_indirection_rejections_are_falsy():
    for text in ("http://a.example/plain", "no url here",
                 "#r2o", "http://a.example/page#other", 42, None):
        got = codec.decode_text_indirection(text)
        assert got is codec.NotIndirection
        assert not got


# -- matrix internals -------------------------------------------------------

def test_placement_covers_every_data_module():
    for version in (1, 4, 7, 10):
        order = matrix.placement_order(version)
        assert len(order) == len(set(order))
        fm = matrix.function_mask(version)
        n = fm.shape[0]
        # remainder bits keep total placement slots >= 8 * codewords
        assert len(order) == n * n - int(fm.sum())


def test_place_then_read_is_identity(rng):
    for version in (2, 5, 8):
        total = tables.TOTAL_CODEWORDS[version]
        words = [rng.randrange(256) for _ in range(total)]
        for mask_id in (0, 3, 7):
            m = matrix.base_matrix(version)
            matrix.place_codewords(m, version, words, mask_id)
            assert matrix.read_codewords(m, version, mask_id)[:total] == words


def test_penalty_prefers_textured_matrices():
    n = 21
    flat = np.zeros((n, n), dtype=np.uint8)
    checker = np.indices((n, n)).sum(axis=0) % 2
    assert matrix.penalty_score(flat) > matrix.penalty_score(
        checker.astype(np.uint8))

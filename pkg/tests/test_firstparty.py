"""First-party simulator: albums, PNG-only photos, comments, page shape."""

import time
import urllib.error
import urllib.request

import numpy as np
import pytest

from r2o import firstparty
from r2o.codec.png import write_png
from r2o.firstparty import (
    AlbumNotFound,
    FirstPartyService,
    PhotoNotFound,
    UnsupportedMediaType,
    serve_firstparty,
)
from r2o.store import ContentItem


def png_item(edge=96, seed=0):
    pix = np.random.default_rng(seed).integers(0, 256, (edge, edge),
                                               dtype=np.uint8)
    return ContentItem(data=write_png(pix), media_type="image/png")


@pytest.fixture
def svc():
    return FirstPartyService(response_delay_ms=0)


def test_album_and_photo_lifecycle(svc):
    album = svc.create_album("trip")
    photo_id, static_url = svc.upload_photo(album, png_item(), "r2o:1 pic")
    assert static_url == f"/fp/photos/{photo_id}.png"
    photo = svc.get_photo(photo_id)
    assert photo.caption == "r2o:1 pic"
    assert photo.width == photo.height == 96
    assert svc.get_photo_bytes(photo_id) == png_item().data


def test_upload_stores_a_copy(svc):
    album = svc.create_album("a")
    item = png_item()
    mutable = bytearray(item.data)
    photo_id, _ = svc.upload_photo(
        album, ContentItem(data=bytes(mutable), media_type="image/png"), "")
    mutable[50] ^= 0xFF
    assert svc.get_photo_bytes(photo_id) == item.data


def test_png_only(svc):
    album = svc.create_album("a")
    with pytest.raises(UnsupportedMediaType):
        svc.upload_photo(album, ContentItem(data=b"GIF89a...",
                                            media_type="image/gif"), "")
    with pytest.raises(UnsupportedMediaType):
        svc.upload_photo(album, ContentItem(data=b"\x89PNG\r\n\x1a\nbroken",
                                            media_type="image/png"), "")


def test_unknown_ids(svc):
    with pytest.raises(AlbumNotFound):
        svc.upload_photo("deadbeefdeadbeef", png_item(), "")
    with pytest.raises(PhotoNotFound):
        svc.get_photo("deadbeefdeadbeef")
    with pytest.raises(AlbumNotFound):
        svc.render_album_page("deadbeefdeadbeef")


def test_photo_id_from_path(svc):
    album = svc.create_album("a")
    photo_id, static_url = svc.upload_photo(album, png_item(), "")
    assert svc.photo_id_from_path(static_url) == photo_id
    with pytest.raises(PhotoNotFound):
        svc.photo_id_from_path("/elsewhere/abc.png")
    with pytest.raises(PhotoNotFound):
        svc.photo_id_from_path("/fp/photos/abc.jpg")


def test_comments_and_preview(svc):
    album = svc.create_album("a")
    photo_id, _ = svc.upload_photo(album, png_item(), "")
    returned = svc.add_comment(photo_id, "ada", "nice shot")
    comment = svc.get_photo(photo_id).comments[0]
    assert returned is comment
    assert comment.preview_locator is None

    target = "http://off.example/v1/objects/aaaaaaaaaaaaaaaa"
    svc.generate_preview_comment(photo_id, target)
    comment = svc.get_photo(photo_id).comments[1]
    assert comment.author == "r2o"
    assert target in comment.body
    assert comment.preview_locator == target


def test_album_page_is_deterministic_and_escaped(svc):
    album = svc.create_album("summer <2020>")
    photo_id, static_url = svc.upload_photo(
        album, png_item(), 'r2o:1 "quoted" & <tagged>')
    svc.generate_preview_comment(
        photo_id, "http://off.example/v1/objects/" + "b" * 16)
    page_one = svc.render_album_page(album)
    page_two = svc.render_album_page(album)
    assert page_one == page_two
    assert static_url in page_one
    assert "&lt;tagged&gt;" in page_one
    assert 'rel="preview"' in page_one
    assert "<tagged>" not in page_one


def test_page_carries_dimensions(svc):
    album = svc.create_album("a")
    _, static_url = svc.upload_photo(album, png_item(edge=128), "cap")
    page = svc.render_album_page(album)
    assert 'width="128"' in page and 'height="128"' in page


def test_response_delay_applies_only_to_photo_reads():
    svc = FirstPartyService(response_delay_ms=60)
    t0 = time.perf_counter()
    album = svc.create_album("a")
    photo_id, _ = svc.upload_photo(album, png_item(), "")
    svc.add_comment(photo_id, "x", "y")
    svc.render_album_page(album)
    composition_ms = (time.perf_counter() - t0) * 1000
    assert composition_ms < 50, "only static photo reads pay the delay"
    t0 = time.perf_counter()
    svc.get_photo_bytes(photo_id)
    read_ms = (time.perf_counter() - t0) * 1000
    assert read_ms >= 60


def test_seeded_ids_are_reproducible():
    firstparty.seed_ids(4)
    try:
        a = FirstPartyService(response_delay_ms=0).create_album("x")
        firstparty.seed_ids(4)
        b = FirstPartyService(response_delay_ms=0).create_album("y")
    finally:
        firstparty.seed_ids(None)
    assert a == b


# -- HTTP surface -----------------------------------------------------------

@pytest.fixture
def served():
    server = serve_firstparty(("127.0.0.1", 0),
                              FirstPartyService(response_delay_ms=0))
    yield server
    server.shutdown()


def _post(url, body, headers=None):
    req = urllib.request.Request(url, data=body, method="POST",
                                 headers=headers or {})
    with urllib.request.urlopen(req, timeout=5) as resp:
        return resp.status, resp.read()


def test_http_album_photo_page_flow(served):
    base = served.base_url
    status, body = _post(f"{base}/fp/albums", b"holiday")
    assert status == 201 or status == 200
    album_id = body.decode().strip()

    status, body = _post(f"{base}/fp/albums/{album_id}/photos",
                         png_item().data,
                         {"Content-Type": "image/png",
                          "X-Caption": "r2o:1 over http"})
    photo_id, static_url = body.decode().splitlines()[:2]
    assert static_url == f"/fp/photos/{photo_id}.png"

    with urllib.request.urlopen(f"{base}{static_url}", timeout=5) as resp:
        assert resp.headers["Content-Type"] == "image/png"
        assert resp.read() == png_item().data

    status, body = _post(f"{base}/fp/photos/{photo_id}/comments",
                         b"a comment", {"X-Author": "ada"})
    assert body.decode().strip() == "0"

    with urllib.request.urlopen(f"{base}/fp/albums/{album_id}/page",
                                timeout=5) as resp:
        page = resp.read().decode()
    assert static_url in page
    assert "a comment" in page


def test_http_errors(served):
    base = served.base_url
    with pytest.raises(urllib.error.HTTPError) as err:
        urllib.request.urlopen(f"{base}/fp/photos/{'0' * 16}.png", timeout=5)
    assert err.value.code == 404
    with pytest.raises(urllib.error.HTTPError) as err:
        _post(f"{base}/fp/albums/{'0' * 16}/photos", png_item().data,
              {"Content-Type": "image/png"})
    assert err.value.code == 404
    # non-PNG upload to a real album
    status, body = _post(f"{base}/fp/albums", b"t")
    album_id = body.decode().strip()
    with pytest.raises(urllib.error.HTTPError) as err:
        _post(f"{base}/fp/albums/{album_id}/photos", b"JFIF...",
              {"Content-Type": "image/jpeg"})
    assert err.value.code == 415

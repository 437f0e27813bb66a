"""Simulated first-party social service: albums, photos, comments.

Stands in for the social service hosting pseudo-objects. Photos are
PNG-only, pages render deterministically, and comments can carry preview
links to the off-site original. An optional response delay on static photo
reads lets the simulator play the CDN row of the latency table.
"""

from __future__ import annotations

import html
import random
import re
import secrets
import struct
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .store import BindFailure, ContentItem

PHOTO_PATH_PREFIX = "/fp/photos/"
DEFAULT_RESPONSE_DELAY_MS = 11.0  # plays the "facebook_cdn" latency preset

_URL_RE = re.compile(r"https?://\S+")
_PNG_SIG = b"\x89PNG\r\n\x1a\n"

_id_rng: random.Random | None = None


def seed_ids(seed: int | None) -> None:
    """Mint album/photo ids from a seeded stream; None restores secure ids."""
    global _id_rng
    # the string seed keeps equal seeds from colliding across modules
    _id_rng = None if seed is None else random.Random(f"firstparty:{seed}")


class FirstPartyError(Exception):
    pass


class AlbumNotFound(FirstPartyError):
    pass


class PhotoNotFound(FirstPartyError):
    pass


class UnsupportedMediaType(FirstPartyError):
    pass


@dataclass
class Comment:
    author: str
    body: str
    preview_locator: str | None = None


@dataclass
class PhotoObject:
    photo_id: str
    image: ContentItem
    caption: str
    static_url: str
    width: int
    height: int
    comments: list[Comment] = field(default_factory=list)


@dataclass
class Album:
    album_id: str
    title: str
    photo_ids: list[str] = field(default_factory=list)


def _png_dimensions(data: bytes) -> tuple[int, int]:
    """Width/height from the IHDR chunk; raises on non-PNG bytes."""
    if not data.startswith(_PNG_SIG) or len(data) < 24:
        raise UnsupportedMediaType("payload is not a PNG stream")
    w, h = struct.unpack(">II", data[16:24])
    return int(w), int(h)


class FirstPartyService:
    """In-process service core; the HTTP layer is a thin adapter over it."""

    def __init__(self, response_delay_ms: float | None = DEFAULT_RESPONSE_DELAY_MS):
        self.response_delay_ms = response_delay_ms or 0.0
        self._albums: dict[str, Album] = {}
        self._photos: dict[str, PhotoObject] = {}
        self._lock = threading.RLock()

    def _fresh_id(self) -> str:
        if _id_rng is not None:
            return f"{_id_rng.getrandbits(64):016x}"
        return secrets.token_hex(8)

    # -- albums ------------------------------------------------------------

    def create_album(self, title: str) -> str:
        with self._lock:
            album_id = self._fresh_id()
            while album_id in self._albums:
                album_id = self._fresh_id()
            self._albums[album_id] = Album(album_id=album_id, title=title)
            return album_id

    def get_album(self, album_id: str) -> Album:
        with self._lock:
            album = self._albums.get(album_id)
            if album is None:
                raise AlbumNotFound(album_id)
            return album

    # -- photos ------------------------------------------------------------

    def upload_photo(self, album_id: str, image: ContentItem,
                     caption: str = "") -> tuple[str, str]:
        image.validate()
        if image.media_type != "image/png":
            raise UnsupportedMediaType(
                f"photos must be image/png, got {image.media_type!r}")
        width, height = _png_dimensions(image.data)
        with self._lock:
            album = self._albums.get(album_id)
            if album is None:
                raise AlbumNotFound(album_id)
            photo_id = self._fresh_id()
            while photo_id in self._photos:
                photo_id = self._fresh_id()
            static_url = f"{PHOTO_PATH_PREFIX}{photo_id}.png"
            self._photos[photo_id] = PhotoObject(
                photo_id=photo_id,
                image=ContentItem(data=bytes(image.data),
                                  media_type="image/png"),
                caption=caption, static_url=static_url,
                width=width, height=height)
            album.photo_ids.append(photo_id)
            return photo_id, static_url

    def get_photo(self, photo_id: str) -> PhotoObject:
        with self._lock:
            photo = self._photos.get(photo_id)
            if photo is None:
                raise PhotoNotFound(photo_id)
            return photo

    def get_photo_bytes(self, photo_id: str) -> bytes:
        """Static-content read; carries the simulated response delay."""
        photo = self.get_photo(photo_id)
        if self.response_delay_ms:
            time.sleep(self.response_delay_ms / 1000.0)
        return photo.image.data

    def photo_id_from_path(self, path: str) -> str:
        if not (path.startswith(PHOTO_PATH_PREFIX) and path.endswith(".png")):
            raise PhotoNotFound(path)
        return path[len(PHOTO_PATH_PREFIX):-len(".png")]

    # -- comments ----------------------------------------------------------

    def add_comment(self, photo_id: str, author: str, body: str) -> Comment:
        match = _URL_RE.search(body)
        comment = Comment(author=author, body=body,
                          preview_locator=match.group(0) if match else None)
        with self._lock:
            photo = self._photos.get(photo_id)
            if photo is None:
                raise PhotoNotFound(photo_id)
            photo.comments.append(comment)
        return comment

    def generate_preview_comment(self, photo_id: str,
                                 offsite_locator: str) -> Comment:
        return self.add_comment(photo_id, "r2o",
                                f"original: {offsite_locator}")

    # -- rendering ---------------------------------------------------------

    def _render_comment(self, c: Comment) -> str:
        author = html.escape(c.author)
        if c.preview_locator and c.preview_locator in c.body:
            before, after = c.body.split(c.preview_locator, 1)
            url = html.escape(c.preview_locator, quote=True)
            body = (f"{html.escape(before)}"
                    f'<a rel="preview" href="{url}">{url}</a>'
                    f"{html.escape(after)}")
        else:
            body = html.escape(c.body)
        return (f'      <li class="comment">'
                f'<span class="author">{author}</span>: {body}</li>')

    def render_album_page(self, album_id: str) -> str:
        with self._lock:
            album = self._albums.get(album_id)
            if album is None:
                raise AlbumNotFound(album_id)
            photos = [self._photos[pid] for pid in album.photo_ids]
            title = html.escape(album.title)
            parts = [
                "<!DOCTYPE html>",
                '<html><head><meta charset="utf-8">'
                f"<title>{title}</title></head>",
                "<body>",
                f"<h1>{title}</h1>",
            ]
            for p in photos:
                parts.append(f'  <figure class="photo" id="photo-{p.photo_id}">')
                parts.append(
                    f'    <img src="{p.static_url}" width="{p.width}" '
                    f'height="{p.height}" alt="">')
                parts.append(
                    f"    <figcaption>{html.escape(p.caption)}</figcaption>")
                if p.comments:
                    parts.append('    <ul class="comments">')
                    parts.extend(self._render_comment(c) for c in p.comments)
                    parts.append("    </ul>")
                parts.append("  </figure>")
            parts.append("</body></html>")
            return "\n".join(parts) + "\n"


class _FirstPartyHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "r2o-fp/1"
    service: FirstPartyService  # set per bound subclass

    def log_message(self, fmt, *args):
        pass

    def _reply(self, status: int, body: bytes = b"",
               content_type: str = "text/plain") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length", "0"))
        return self.rfile.read(length)

    def do_POST(self):
        svc = self.service
        try:
            if self.path == "/fp/albums":
                album_id = svc.create_album(self._body().decode("utf-8"))
                self._reply(201, (album_id + "\n").encode())
                return
            m = re.fullmatch(r"/fp/albums/([0-9a-f]+)/photos", self.path)
            if m:
                caption = self.headers.get("X-Caption", "")
                item = ContentItem(data=self._body(), media_type="image/png")
                photo_id, static_url = svc.upload_photo(m.group(1), item,
                                                        caption)
                self._reply(201, f"{photo_id}\n{static_url}\n".encode())
                return
            m = re.fullmatch(r"/fp/photos/([0-9a-f]+)/comments", self.path)
            if m:
                author = self.headers.get("X-Author", "")
                comment = svc.add_comment(m.group(1), author,
                                          self._body().decode("utf-8"))
                photo = svc.get_photo(m.group(1))
                index = next(i for i, c in enumerate(photo.comments)
                             if c is comment)
                self._reply(201, f"{index}\n".encode())
                return
            self._reply(404, b"unknown path\n")
        except (AlbumNotFound, PhotoNotFound):
            self._reply(404, b"not found\n")
        except UnsupportedMediaType:
            self._reply(415, b"unsupported media type\n")

    def do_GET(self):
        svc = self.service
        try:
            m = re.fullmatch(r"/fp/photos/([0-9a-f]+)\.png", self.path)
            if m:
                data = svc.get_photo_bytes(m.group(1))
                self._reply(200, data, content_type="image/png")
                return
            m = re.fullmatch(r"/fp/albums/([0-9a-f]+)/page", self.path)
            if m:
                doc = svc.render_album_page(m.group(1))
                self._reply(200, doc.encode("utf-8"),
                            content_type="text/html; charset=utf-8")
                return
            self._reply(404, b"unknown path\n")
        except (AlbumNotFound, PhotoNotFound):
            self._reply(404, b"not found\n")


class FirstPartyServer:
    """Running first-party HTTP service; context manager handle."""

    def __init__(self, httpd: ThreadingHTTPServer, thread: threading.Thread,
                 service: FirstPartyService):
        self._httpd = httpd
        self._thread = thread
        self.service = service
        host, port = httpd.server_address[:2]
        self.base_url = f"http://{host}:{port}"

    def shutdown(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "FirstPartyServer":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()


def serve_firstparty(bind_address: tuple[str, int],
                     service: FirstPartyService | None = None) -> FirstPartyServer:
    """Serve the /fp API over HTTP; returns a handle with .service."""
    service = service or FirstPartyService()
    handler = type("BoundFirstPartyHandler", (_FirstPartyHandler,),
                   {"service": service})
    try:
        httpd = ThreadingHTTPServer(bind_address, handler)
    except OSError as exc:
        raise BindFailure(f"cannot bind {bind_address}: {exc}") from None
    httpd.daemon_threads = True
    thread = threading.Thread(target=httpd.serve_forever,
                              name=f"fp-{httpd.server_address[1]}",
                              daemon=True)
    thread.start()
    return FirstPartyServer(httpd, thread, service)

"""Pluggable off-site content hosting with simulated latency.

Three interchangeable providers (in-memory, filesystem, HTTP client) speak
one locator shape: <base_url>/<16-hex-id>. The HTTP pieces implement the v1
object protocol over stdlib http.server / urllib so desk-scale measurements
cross a real socket. Latency floors are a pre-response sleep of exactly the
configured duration.
"""

from __future__ import annotations

import random
import secrets
import socket
import statistics
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib import error as urlerror
from urllib import request as urlrequest

MAX_PAYLOAD_DEFAULT = 16 * 1024 * 1024
OBJECTS_PATH = "/v1/objects"
_ID_HEX_LEN = 16

# median retrieval times of popular image hosts, ms; shipped as presets
LATENCY_PRESETS = {
    "facebook_cdn": 11,
    "imgur": 12,
    "photobucket": 50,
    "postimage": 51,
    "flickr": 147,
    "dropbox": 306,
    "tinypic": 310,
    "imageshack": 434,
}


class StoreError(Exception):
    pass


class StoreUnavailable(StoreError):
    pass


class NotFound(StoreError):
    pass


class PayloadTooLarge(StoreError):
    pass


class BindFailure(StoreError):
    pass


@dataclass
class ContentItem:
    data: bytes
    media_type: str = "application/octet-stream"
    declared_length: int | None = None

    def __post_init__(self):
        if self.declared_length is None:
            self.declared_length = len(self.data)

    def validate(self) -> "ContentItem":
        if self.declared_length != len(self.data):
            raise ValueError("declared_length disagrees with payload size")
        if not self.media_type:
            raise ValueError("media_type must be non-empty")
        return self


@dataclass(frozen=True)
class ProviderDescriptor:
    name: str
    kind: str  # memory | filesystem | http
    base_url: str
    simulated_latency: float | None = None  # milliseconds, upload and fetch

    def __post_init__(self):
        if self.simulated_latency is not None and self.simulated_latency < 0:
            raise ValueError("simulated_latency must be >= 0")


_id_rng: random.Random | None = None


def seed_ids(seed: int | None) -> None:
    """Mint object ids from a seeded stream; None restores secure ids."""
    global _id_rng
    # the string seed keeps equal seeds from colliding across modules
    _id_rng = None if seed is None else random.Random(f"store:{seed}")


def _fresh_id() -> str:
    if _id_rng is not None:
        return f"{_id_rng.getrandbits(4 * _ID_HEX_LEN):0{_ID_HEX_LEN}x}"
    return secrets.token_hex(_ID_HEX_LEN // 2)


def _is_valid_id(oid: str) -> bool:
    return (len(oid) == _ID_HEX_LEN
            and all(c in "0123456789abcdef" for c in oid))


class _ProviderBase:
    """Shared locator parsing and latency floor."""

    descriptor: ProviderDescriptor
    max_payload: int

    def _sleep_floor(self) -> None:
        s = self.descriptor.simulated_latency
        if s:
            time.sleep(s / 1000.0)

    def _check_size(self, item: ContentItem) -> None:
        item.validate()
        if len(item.data) > self.max_payload:
            raise PayloadTooLarge(
                f"{len(item.data)} bytes exceeds cap {self.max_payload}")

    def _locator_for(self, oid: str) -> str:
        return f"{self.descriptor.base_url}/{oid}"

    def _id_from(self, locator: str) -> str:
        prefix = self.descriptor.base_url + "/"
        if not locator.startswith(prefix):
            raise NotFound(f"locator {locator!r} is not under "
                           f"{self.descriptor.base_url}")
        oid = locator[len(prefix):]
        if not _is_valid_id(oid):
            raise NotFound(f"malformed object id {oid!r}")
        return oid


class MemoryStore(_ProviderBase):
    """Dict-backed provider; the default latency-simulation vehicle."""

    def __init__(self, name: str = "memory",
                 simulated_latency: float | None = None,
                 base_url: str | None = None,
                 max_payload: int = MAX_PAYLOAD_DEFAULT):
        base = base_url or f"http://{name}.offsite.invalid{OBJECTS_PATH}"
        self.descriptor = ProviderDescriptor(
            name=name, kind="memory", base_url=base,
            simulated_latency=simulated_latency)
        self.max_payload = max_payload
        self._objects: dict[str, tuple[bytes, str]] = {}
        self._lock = threading.Lock()

    def upload(self, item: ContentItem) -> str:
        self._check_size(item)
        self._sleep_floor()
        with self._lock:
            oid = _fresh_id()
            while oid in self._objects:
                oid = _fresh_id()
            self._objects[oid] = (bytes(item.data), item.media_type)
        return self._locator_for(oid)

    def fetch(self, locator: str) -> ContentItem:
        oid = self._id_from(locator)
        self._sleep_floor()
        with self._lock:
            found = self._objects.get(oid)
        if found is None:
            raise NotFound(f"no object {oid}")
        data, media_type = found
        return ContentItem(data=data, media_type=media_type)

    def delete(self, locator: str) -> None:
        oid = self._id_from(locator)
        self._sleep_floor()
        with self._lock:
            self._objects.pop(oid, None)

    def __len__(self) -> int:
        with self._lock:
            return len(self._objects)


class FilesystemStore(_ProviderBase):
    """Directory-backed provider: <root>/<id> plus <root>/<id>.meta."""

    def __init__(self, root: str | Path, name: str = "filesystem",
                 simulated_latency: float | None = None,
                 base_url: str | None = None,
                 max_payload: int = MAX_PAYLOAD_DEFAULT):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        base = base_url or f"http://{name}.offsite.invalid{OBJECTS_PATH}"
        self.descriptor = ProviderDescriptor(
            name=name, kind="filesystem", base_url=base,
            simulated_latency=simulated_latency)
        self.max_payload = max_payload
        self._lock = threading.Lock()

    def upload(self, item: ContentItem) -> str:
        self._check_size(item)
        self._sleep_floor()
        with self._lock:
            oid = _fresh_id()
            while (self.root / oid).exists():
                oid = _fresh_id()
            (self.root / oid).write_bytes(item.data)
            (self.root / f"{oid}.meta").write_text(item.media_type + "\n")
        return self._locator_for(oid)

    def fetch(self, locator: str) -> ContentItem:
        oid = self._id_from(locator)
        self._sleep_floor()
        path = self.root / oid
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            raise NotFound(f"no object {oid}") from None
        meta = self.root / f"{oid}.meta"
        media_type = "application/octet-stream"
        if meta.exists():
            media_type = meta.read_text().strip() or media_type
        return ContentItem(data=data, media_type=media_type)

    def delete(self, locator: str) -> None:
        oid = self._id_from(locator)
        self._sleep_floor()
        with self._lock:
            (self.root / oid).unlink(missing_ok=True)
            (self.root / f"{oid}.meta").unlink(missing_ok=True)


class _StoreHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "r2o-store/1"
    backing: _ProviderBase  # set by serve_store

    def log_message(self, fmt, *args):
        pass

    def _object_id(self) -> str | None:
        prefix = OBJECTS_PATH + "/"
        if not self.path.startswith(prefix):
            return None
        oid = self.path[len(prefix):]
        return oid if _is_valid_id(oid) else None

    def _reply(self, status: int, body: bytes = b"",
               content_type: str = "text/plain",
               extra: dict[str, str] | None = None) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for k, v in (extra or {}).items():
            self.send_header(k, v)
        self.end_headers()
        if body:
            self.wfile.write(body)

    def do_POST(self):
        if self.path != OBJECTS_PATH:
            self._reply(404, b"unknown path\n")
            return
        length = int(self.headers.get("Content-Length", "0"))
        if length > self.backing.max_payload:
            self._reply(413, b"payload too large\n")
            return
        body = self.rfile.read(length)
        media_type = self.headers.get("Content-Type",
                                      "application/octet-stream")
        try:
            locator = self.backing.upload(
                ContentItem(data=body, media_type=media_type))
        except PayloadTooLarge:
            self._reply(413, b"payload too large\n")
            return
        oid = locator.rsplit("/", 1)[1]
        public = f"{self.server.public_base_url}/{oid}"
        self._reply(201, (public + "\n").encode(),
                    extra={"Location": f"{OBJECTS_PATH}/{oid}"})

    def do_GET(self):
        oid = self._object_id()
        if oid is None:
            self._reply(404, b"unknown path\n")
            return
        try:
            item = self.backing.fetch(self.backing._locator_for(oid))
        except NotFound:
            self._reply(404, b"no such object\n")
            return
        self._reply(200, item.data, content_type=item.media_type)

    def do_DELETE(self):
        oid = self._object_id()
        if oid is None:
            self._reply(404, b"unknown path\n")
            return
        self.backing.delete(self.backing._locator_for(oid))
        self._reply(204)


class StoreServer:
    """Running HTTP store; context manager with graceful shutdown."""

    def __init__(self, httpd: ThreadingHTTPServer, thread: threading.Thread):
        self._httpd = httpd
        self._thread = thread
        host, port = httpd.server_address[:2]
        self.base_url = f"http://{host}:{port}{OBJECTS_PATH}"

    def shutdown(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "StoreServer":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()


def serve_store(bind_address: tuple[str, int],
                backing: _ProviderBase) -> StoreServer:
    """Serve the v1 object protocol on bind_address backed by a provider."""
    handler = type("BoundStoreHandler", (_StoreHandler,),
                   {"backing": backing})
    try:
        httpd = ThreadingHTTPServer(bind_address, handler)
    except OSError as exc:
        raise BindFailure(f"cannot bind {bind_address}: {exc}") from None
    httpd.daemon_threads = True
    host, port = httpd.server_address[:2]
    httpd.public_base_url = f"http://{host}:{port}{OBJECTS_PATH}"
    thread = threading.Thread(target=httpd.serve_forever,
                              name=f"store-{port}", daemon=True)
    thread.start()
    return StoreServer(httpd, thread)


class HttpStoreClient(_ProviderBase):
    """Client side of the v1 object protocol."""

    def __init__(self, base_url: str, name: str = "http",
                 timeout: float = 10.0,
                 max_payload: int = MAX_PAYLOAD_DEFAULT):
        self.descriptor = ProviderDescriptor(
            name=name, kind="http", base_url=base_url.rstrip("/"))
        self.timeout = timeout
        self.max_payload = max_payload

    def upload(self, item: ContentItem) -> str:
        self._check_size(item)
        req = urlrequest.Request(
            self.descriptor.base_url, data=item.data, method="POST",
            headers={"Content-Type": item.media_type})
        try:
            with urlrequest.urlopen(req, timeout=self.timeout) as resp:
                body = resp.read().decode().strip()
                if resp.status != 201:
                    raise StoreUnavailable(f"unexpected status {resp.status}")
        except urlerror.HTTPError as exc:
            if exc.code == 413:
                raise PayloadTooLarge("server rejected payload") from None
            raise StoreUnavailable(f"upload failed: {exc}") from None
        except (urlerror.URLError, socket.timeout, ConnectionError) as exc:
            raise StoreUnavailable(f"upload failed: {exc}") from None
        return body

    def fetch(self, locator: str) -> ContentItem:
        self._id_from(locator)  # validate shape before any network use
        try:
            with urlrequest.urlopen(locator, timeout=self.timeout) as resp:
                data = resp.read()
                media_type = resp.headers.get("Content-Type",
                                              "application/octet-stream")
        except urlerror.HTTPError as exc:
            if exc.code == 404:
                raise NotFound(locator) from None
            raise StoreUnavailable(f"fetch failed: {exc}") from None
        except (urlerror.URLError, socket.timeout, ConnectionError) as exc:
            raise StoreUnavailable(f"fetch failed: {exc}") from None
        return ContentItem(data=data, media_type=media_type)

    def delete(self, locator: str) -> None:
        self._id_from(locator)
        req = urlrequest.Request(locator, method="DELETE")
        try:
            with urlrequest.urlopen(req, timeout=self.timeout):
                pass
        except urlerror.HTTPError as exc:
            if exc.code != 404:
                raise StoreUnavailable(f"delete failed: {exc}") from None
        except (urlerror.URLError, socket.timeout, ConnectionError) as exc:
            raise StoreUnavailable(f"delete failed: {exc}") from None


def preset_store(name: str, **kwargs) -> MemoryStore:
    """Memory store with one of the shipped latency presets."""
    if name not in LATENCY_PRESETS:
        raise KeyError(f"unknown preset {name!r}; "
                       f"choose from {sorted(LATENCY_PRESETS)}")
    return MemoryStore(name=name, simulated_latency=LATENCY_PRESETS[name],
                       **kwargs)


def measure_store(provider, item_size: int, repetitions: int,
                  interval: float = 0.0) -> list[float]:
    """Upload one random item, fetch it repeatedly; per-fetch times in ms.

    The spacing interval may be zero for desk-scale runs. Callers report the
    median of the samples.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    payload = secrets.token_bytes(item_size)
    locator = provider.upload(ContentItem(data=payload,
                                          media_type="application/octet-stream"))
    samples: list[float] = []
    for i in range(repetitions):
        if i and interval:
            time.sleep(interval)
        t0 = time.perf_counter()
        item = provider.fetch(locator)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        if item.data != payload:
            raise StoreError("fetched bytes differ from uploaded bytes")
        samples.append(elapsed_ms)
    return samples


def median_ms(samples: list[float]) -> float:
    return float(statistics.median(samples))

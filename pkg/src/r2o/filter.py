"""Cheap candidate screening for scanned page elements.

Decides, without decoding anything, whether an element might be a
pseudo-object worth handing to the codec. Rejection reasons are stable
strings so corpus tests can assert exact outcomes. The filter is advisory:
decode failure remains the backstop for false positives.
"""

from __future__ import annotations

from dataclasses import dataclass
from urllib.parse import urlsplit

CAPTION_MARKER_DEFAULT = "r2o:1"

# rule names, cheapest first; the first failing rule is reported
RULE_PREFIX = "prefix"
RULE_SUBTYPE = "subtype"
RULE_BOUNDS = "bounds"
RULE_ASPECT = "aspect_ratio"
RULE_CAPTION = "caption"


@dataclass(frozen=True)
class ElementDescriptor:
    source_url: str
    width: int = 0
    height: int = 0
    media_subtype: str = ""
    caption: str | None = None


@dataclass(frozen=True)
class FilterConfig:
    path_prefixes: tuple[str, ...] = ("/fp/photos/",)
    min_edge: int = 64
    max_edge: int = 1024
    require_square: bool = True
    excluded_subtypes: frozenset[str] = frozenset({"gif"})
    caption_marker: str | None = CAPTION_MARKER_DEFAULT

    def __post_init__(self):
        if not self.path_prefixes:
            raise ValueError("path_prefixes must be non-empty")
        if self.min_edge > self.max_edge:
            raise ValueError("min_edge must not exceed max_edge")
        object.__setattr__(self, "path_prefixes", tuple(self.path_prefixes))
        object.__setattr__(self, "excluded_subtypes",
                           frozenset(s.lower() for s in self.excluded_subtypes))


@dataclass(frozen=True)
class Decision:
    accepted: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.accepted


CANDIDATE = Decision(True)


def _path_of(url: str) -> str:
    if "://" in url:
        return urlsplit(url).path
    return url.split("?", 1)[0].split("#", 1)[0]


def is_candidate(e: ElementDescriptor, cfg: FilterConfig) -> Decision:
    """Apply the screening rules in fixed order; first failure is reported."""
    path = _path_of(e.source_url)
    if not any(path.startswith(p) for p in cfg.path_prefixes):
        return Decision(False, RULE_PREFIX)
    if e.media_subtype.lower() in cfg.excluded_subtypes:
        return Decision(False, RULE_SUBTYPE)
    dims_known = e.width > 0 and e.height > 0
    if dims_known:
        if not (cfg.min_edge <= e.width <= cfg.max_edge
                and cfg.min_edge <= e.height <= cfg.max_edge):
            return Decision(False, RULE_BOUNDS)
        if cfg.require_square and e.width != e.height:
            return Decision(False, RULE_ASPECT)
    if cfg.caption_marker and e.caption is not None:
        if cfg.caption_marker not in e.caption:
            return Decision(False, RULE_CAPTION)
    return CANDIDATE


def make_caption(user_caption: str | None, cfg: FilterConfig) -> str:
    """Produce the caption the write path attaches to a pseudo-object."""
    if not cfg.caption_marker:
        return user_caption or ""
    if user_caption:
        return f"{cfg.caption_marker} {user_caption}"
    return cfg.caption_marker

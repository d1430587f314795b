"""URL standardization for crawl deduplication.

Normalization is a fixed point: applying it to an already-normalized
URL changes nothing.
"""

from dataclasses import dataclass
from urllib.parse import urlsplit

from .errors import InvalidUrl

# query parameters stripped by default; utm_* matched as a prefix
TRACKING_PARAMS = ("fbclid", "gclid")
TRACKING_PREFIXES = ("utm_",)

_DEFAULT_PORTS = {"http": "80", "https": "443"}


@dataclass(frozen=True)
class NormalizedUrl:
    scheme: str
    host: str
    path: str
    query: str

    @property
    def dedup_key(self) -> str:
        return f"{self.scheme}://{self.host}{self.path}" + (
            f"?{self.query}" if self.query else ""
        )

    @property
    def url(self) -> str:
        return self.dedup_key

    def __str__(self) -> str:
        return self.dedup_key


def _is_tracking_param(name: str) -> bool:
    lowered = name.lower()
    if lowered in TRACKING_PARAMS:
        return True
    return any(lowered.startswith(p) for p in TRACKING_PREFIXES)


def normalize_url(raw: str) -> NormalizedUrl:
    """Standardize an absolute URL; raises InvalidUrl otherwise."""
    try:
        parts = urlsplit(raw.strip())
    except ValueError as exc:
        raise InvalidUrl(f"{raw!r}: {exc}") from exc
    if not parts.scheme or not parts.netloc:
        raise InvalidUrl(f"not an absolute URL: {raw!r}")

    scheme = parts.scheme.lower()
    host = parts.hostname or ""
    host = host.lower()
    if host.startswith("www."):
        host = host[4:]
    if parts.port is not None and str(parts.port) != _DEFAULT_PORTS.get(scheme):
        host = f"{host}:{parts.port}"

    path = parts.path or "/"
    if path != "/" and path.endswith("/"):
        path = path.rstrip("/") or "/"
    if not path.startswith("/"):
        path = "/" + path

    kept = []
    for pair in parts.query.split("&"):
        if not pair:
            continue
        name = pair.split("=", 1)[0]
        if not _is_tracking_param(name):
            kept.append(pair)
    query = "&".join(kept)

    return NormalizedUrl(scheme=scheme, host=host, path=path, query=query)

"""Streaming reader for WARC 1.0/1.1 files, plain or gzipped.

Only response and resource records are surfaced; everything else
(request, metadata, warcinfo, ...) is skipped silently. Records are
yielded one at a time so peak memory is bounded by the largest single
record, not by file size.
"""

import gzip
import io
import re
import zlib
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import GzipError, MalformedWarcHeader, TruncatedRecord

_VERSION_RE = re.compile(rb"^WARC/(\d+\.\d+)\r?\n?$")
_STATUS_RE = re.compile(rb"^HTTP/\d\.\d\s+(\d{3})")

SURFACED_TYPES = ("response", "resource")


@dataclass(frozen=True)
class RawWarcRecord:
    """One response/resource record with its HTTP envelope removed."""

    record_type: str
    target_uri: str
    http_status: Optional[int]
    content_type: Optional[str]
    payload: bytes
    payload_offset: int


def _read_headers(stream) -> dict:
    """Read header lines up to the blank separator; keys lowercased."""
    headers = {}
    while True:
        line = stream.readline()
        if not line:
            raise MalformedWarcHeader("EOF inside WARC header block")
        if line in (b"\r\n", b"\n"):
            return headers
        if b":" not in line:
            raise MalformedWarcHeader(f"header line without colon: {line[:60]!r}")
        name, _, value = line.partition(b":")
        headers[name.strip().lower().decode("latin-1")] = value.strip().decode(
            "latin-1", "replace"
        )


def _split_http_payload(payload: bytes):
    """Split an application/http payload into (status, content_type, body)."""
    m = _STATUS_RE.match(payload)
    if not m:
        return None, None, payload
    status = int(m.group(1))
    for sep in (b"\r\n\r\n", b"\n\n"):
        idx = payload.find(sep)
        if idx != -1:
            head, body = payload[:idx], payload[idx + len(sep):]
            break
    else:
        head, body = payload, b""
    content_type = None
    for line in head.split(b"\n")[1:]:
        name, _, value = line.partition(b":")
        if name.strip().lower() == b"content-type":
            content_type = value.strip().decode("latin-1", "replace")
            break
    return status, content_type, body


def _iter_records(stream) -> Iterator[RawWarcRecord]:
    while True:
        line = stream.readline()
        # tolerate record-separator blank lines between records
        while line in (b"\r\n", b"\n"):
            line = stream.readline()
        if not line:
            return
        if not _VERSION_RE.match(line.strip() + b"\n"):
            raise MalformedWarcHeader(f"bad WARC version line: {line[:60]!r}")
        headers = _read_headers(stream)
        try:
            length = int(headers["content-length"])
        except (KeyError, ValueError):
            raise MalformedWarcHeader("missing or invalid Content-Length")
        rec_type = headers.get("warc-type")
        if rec_type is None:
            raise MalformedWarcHeader("missing WARC-Type")
        offset = stream.tell()
        payload = stream.read(length)
        if len(payload) < length:
            raise TruncatedRecord(
                f"record declares {length} bytes, got {len(payload)}"
            )
        if rec_type not in SURFACED_TYPES:
            continue
        uri = headers.get("warc-target-uri", "")
        if uri.startswith("<") and uri.endswith(">"):
            uri = uri[1:-1]
        warc_ct = headers.get("content-type", "")
        if warc_ct.startswith("application/http"):
            status, content_type, body = _split_http_payload(payload)
        else:
            status, content_type, body = None, warc_ct or None, payload
        yield RawWarcRecord(
            record_type=rec_type,
            target_uri=uri,
            http_status=status,
            content_type=content_type,
            payload=body,
            payload_offset=offset,
        )


def open_warc_stream(path) -> Iterator[RawWarcRecord]:
    """Yield RawWarcRecords from a .warc or .warc.gz file in file order."""
    raw = open(path, "rb")
    try:
        magic = raw.read(2)
        raw.seek(0)
        if magic == b"\x1f\x8b":
            # gzip module transparently walks member-per-record files
            stream = io.BufferedReader(gzip.GzipFile(fileobj=raw))
        elif magic == b"":
            return
        else:
            stream = io.BufferedReader(raw)
        try:
            yield from _iter_records(stream)
        except (EOFError, zlib.error, gzip.BadGzipFile) as exc:
            raise GzipError(str(exc)) from exc
    finally:
        raw.close()

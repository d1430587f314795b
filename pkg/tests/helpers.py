"""Shared test helpers: WARC fixture builders and scriptable HTTP servers."""

import gzip
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def http_response_payload(status=200, content_type="text/html; charset=utf-8",
                          body=b""):
    reason = {200: "OK", 404: "Not Found", 500: "Server Error"}.get(status, "X")
    head = (
        f"HTTP/1.1 {status} {reason}\r\n"
        f"Content-Type: {content_type}\r\n"
        f"Content-Length: {len(body)}\r\n\r\n"
    ).encode("ascii")
    return head + body


def warc_record(record_type, uri, payload,
                content_type="application/http; msgtype=response",
                declared_length=None):
    length = len(payload) if declared_length is None else declared_length
    head = (
        "WARC/1.0\r\n"
        f"WARC-Type: {record_type}\r\n"
        f"WARC-Target-URI: {uri}\r\n"
        "WARC-Date: 2024-06-01T00:00:00Z\r\n"
        "WARC-Record-ID: <urn:uuid:00000000-0000-0000-0000-000000000000>\r\n"
        f"Content-Type: {content_type}\r\n"
        f"Content-Length: {length}\r\n\r\n"
    ).encode("ascii")
    return head + payload + b"\r\n\r\n"


def html_page(title, body_text, extra=""):
    return (
        f"<html><head><title>{title}</title></head>"
        f"<body><p>{body_text}</p>{extra}</body></html>"
    ).encode("utf-8")


def response_record(uri, status=200, content_type="text/html; charset=utf-8",
                    body=b"", declared_length=None):
    return warc_record(
        "response", uri, http_response_payload(status, content_type, body),
        declared_length=declared_length,
    )


def build_warc(path, records, gzipped=False):
    if gzipped:
        # one gzip member per record, per the WARC convention
        data = b"".join(gzip.compress(r) for r in records)
    else:
        data = b"".join(records)
    path.write_bytes(data)
    return path


class MockChatServer:
    """Scriptable OpenAI-style /chat/completions endpoint.

    `script` is a list of responses; each entry is either a dict
    {"title": ..., "abstract": ...} (wrapped into a completion), a raw
    string (returned as the assistant message verbatim), or an int HTTP
    status for an error reply. When the script runs out, the last entry
    repeats. Tracks request bodies and the concurrent-connection
    high-water mark.
    """

    def __init__(self, script=None, reply_fn=None):
        self.script = list(script or [])
        self.reply_fn = reply_fn
        self.requests = []
        self.in_flight = 0
        self.high_water = 0
        self._lock = threading.Lock()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length))
                # count concurrency only while the reply is being computed:
                # the decrement must land before the client can observe the
                # response, or a sequential client looks overlapped.
                with outer._lock:
                    outer.requests.append(body)
                    outer.in_flight += 1
                    outer.high_water = max(outer.high_water, outer.in_flight)
                try:
                    entry = outer._next_entry(body)
                finally:
                    with outer._lock:
                        outer.in_flight -= 1
                if isinstance(entry, int):
                    self.send_response(entry)
                    if entry == 429:
                        self.send_header("Retry-After", "0")
                    self.end_headers()
                    self.wfile.write(b"{}")
                    return
                if isinstance(entry, dict):
                    content = json.dumps(entry)
                else:
                    content = entry
                reply = {"choices": [{"message": {"content": content}}]}
                data = json.dumps(reply).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def _next_entry(self, body):
        if self.reply_fn is not None:
            return self.reply_fn(body)
        with self._lock:
            if len(self.script) > 1:
                return self.script.pop(0)
            return self.script[0]

    @property
    def base_url(self):
        host, port = self.server.server_address
        return f"http://{host}:{port}"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()
        return False

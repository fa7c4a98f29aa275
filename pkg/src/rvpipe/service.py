"""Session service: the HTTP/JSON backbone behind the browser UI.

A SessionStore owns the sessions and speaks plain JSON-ready dicts, so all
behavior is testable without sockets; the HTTP layer is a thin adapter on the
standard library server.  Every 64-bit value crosses the wire as a hex string
(clients may not have 64-bit integers); booleans stay booleans.

Endpoints:

    POST /sessions                  {source, options?}   -> {id, state}
    GET  /sessions/{id}/state                            -> {state}
    POST /sessions/{id}/step        {n?}                 -> {state}
    POST /sessions/{id}/back        {n?}                 -> {state}
    POST /sessions/{id}/input       {text}               -> {state}
    POST /sessions/{id}/reset       {options?}           -> {state}
    GET  /sessions/{id}/memory?segment=&addr=&len=       -> window rows
    GET  /sessions/{id}/diagram?mode=full|squashed       -> diagram + csv
    GET  /examples                                       -> built-in programs
    GET  /catalog                                        -> instruction reference

Mutating requests for one session are strictly serialized by a per-session
lock; distinct sessions run in parallel.  Idle sessions expire after a TTL.
"""

from __future__ import annotations

import json
import re
import secrets
import threading
import time
from dataclasses import dataclass, field

from . import diagram as diagram_mod
from .asm import try_assemble
from .history import AtCycleZero, HistoryEntry, Simulation
from .isa import MASK64, catalog
from .machine import WINDOW_LIMIT
from .pipeline import SimOptions, Snapshot, Tag
from .programs import EXAMPLES

MAX_BODY_BYTES = 1 << 20
DEFAULT_TTL = 30 * 60.0
DEFAULT_MAX_SESSIONS = 256


def hex64(value: int) -> str:
    return hex(value & MASK64)


class ServiceError(Exception):
    def __init__(self, http_status: int, code: str, message: str, **extra):
        self.http_status = http_status
        self.code = code
        self.message = message
        self.extra = extra
        super().__init__(message)

    def payload(self) -> dict:
        return {"error": {"code": self.code, "message": self.message, **self.extra}}


def _unknown_session() -> ServiceError:
    return ServiceError(404, "unknown_session", "unknown session")


# ---------------------------------------------------------------------------
# JSON shapes

def tag_json(tag: Tag | None) -> dict | None:
    if tag is None:
        return None
    return {"seq": tag.seq, "addr": hex64(tag.addr), "disasm": tag.disasm,
            "line": tag.source_line, "color": tag.color}


def _event_json(e) -> dict:
    return {"cycle": e.cycle, "kind": e.kind, "stage": e.stage,
            "consumer": tag_json(e.consumer), "producer": tag_json(e.producer),
            "registers": list(e.registers)}


def _signals_json(signals: dict) -> dict:
    return {k: (v if isinstance(v, bool) else hex64(v)) for k, v in signals.items()}


def snapshot_json(snap: Snapshot) -> dict:
    return {
        "cycle": snap.cycle,
        "stages": {s: tag_json(t) for s, t in snap.stages.items()},
        "flushed": [tag_json(t) for t in snap.flushed],
        "forwards": [{"operand": f.operand, "source": f.source} for f in snap.forwards],
        "events": [_event_json(e) for e in snap.events],
        "components": [
            {"id": c.id, "label": c.label, "stage": c.stage,
             "description": c.description, "signals": _signals_json(c.signals)}
            for c in snap.components
        ],
    }


@dataclass
class Session:
    id: str
    source: str
    sim: Simulation
    lock: threading.Lock = field(default_factory=threading.Lock)
    created: float = 0.0
    touched: float = 0.0
    replayed_cycles: set = field(default_factory=set)


class SessionStore:
    def __init__(self, max_sessions: int = DEFAULT_MAX_SESSIONS,
                 ttl: float = DEFAULT_TTL, max_cycles: int | None = None,
                 diagram_cycle_limit: int = 2000, clock=time.monotonic):
        self.max_sessions = max_sessions
        self.ttl = ttl
        self.max_cycles_override = max_cycles
        self.diagram_cycle_limit = diagram_cycle_limit
        self.clock = clock
        self._lock = threading.RLock()
        self._sessions: dict[str, Session] = {}

    # -- bookkeeping ---------------------------------------------------------

    def _sweep(self) -> None:
        now = self.clock()
        with self._lock:
            dead = [sid for sid, s in self._sessions.items()
                    if now - s.touched > self.ttl]
            for sid in dead:
                del self._sessions[sid]

    def _get(self, sid: str) -> Session:
        with self._lock:
            session = self._sessions.get(sid)
            if session is None:
                raise _unknown_session()
            if self.clock() - session.touched > self.ttl:
                del self._sessions[sid]
                raise _unknown_session()
            session.touched = self.clock()
            return session

    def _options(self, body: dict) -> SimOptions:
        opts = body.get("options") or {}
        forwarding = bool(opts.get("forwarding", True))
        max_cycles = int(opts.get("max_cycles", self.max_cycles_override or 10000))
        if self.max_cycles_override is not None:
            max_cycles = min(max_cycles, self.max_cycles_override)
        if max_cycles < 1:
            raise ServiceError(400, "bad_options", "max_cycles must be positive")
        return SimOptions(forwarding=forwarding, max_cycles=max_cycles)

    # -- payloads --------------------------------------------------------------

    def _payload(self, session: Session, at_start: bool = False) -> dict:
        sim = session.sim
        state = sim.state
        snap = sim.snapshot
        pending = None
        if sim.pending is not None and sim.at_frontier:
            pending = {"kind": sim.pending.kind, "cycle": sim.pending.cycle}
        transcript = [
            {"direction": e.direction, "text": e.text, "cycle": e.cycle,
             "replayed": e.direction == "in" and e.cycle in session.replayed_cycles}
            for e in state.transcript
        ]
        stats = sim.stats()
        fault = state.pipe.fault
        return {
            "id": session.id,
            "cycle": sim.cursor,
            "status": sim.status,
            "reason": state.pipe.reason,
            "exit_code": state.pipe.exit_code,
            "fault": None if fault is None else {
                "kind": fault.kind, "message": fault.message, "stage": fault.stage,
                "addr": None if fault.addr is None else hex64(fault.addr),
                "pc": None if fault.pc is None else hex64(fault.pc),
            },
            "at_start": at_start,
            "at_frontier": sim.at_frontier,
            "options": {"forwarding": state.options.forwarding,
                        "max_cycles": state.options.max_cycles},
            "snapshot": snapshot_json(snap),
            "registers": {
                "pc": hex64(state.machine.pc),
                "x": [
                    {"index": r["index"], "name": r["name"], "abi": r["abi"],
                     "value": hex64(r["value"])}
                    for r in state.machine.register_dump()
                ],
            },
            "transcript": {"events": transcript, "pending_prompt": pending},
            "stats": {**stats, "cpi": stats["cpi"]},
        }

    # -- operations --------------------------------------------------------------

    def create(self, body: dict) -> dict:
        self._sweep()
        source = body.get("source")
        if not isinstance(source, str):
            raise ServiceError(400, "bad_request", "body must carry a 'source' string")
        options = self._options(body)
        image, diagnostics = try_assemble(source)
        diags = [
            {"line": d.line, "column": d.column, "severity": d.severity,
             "message": d.message, "snippet": d.snippet}
            for d in diagnostics
        ]
        if image is None:
            raise ServiceError(400, "assembly_failed", "assembly failed",
                               diagnostics=diags)
        with self._lock:
            if len(self._sessions) >= self.max_sessions:
                raise ServiceError(429, "too_many_sessions",
                                   f"session limit ({self.max_sessions}) reached")
            sid = secrets.token_hex(8)
            now = self.clock()
            session = Session(id=sid, source=source, sim=Simulation(image, options),
                              created=now, touched=now)
            self._sessions[sid] = session
        payload = self._payload(session)
        payload["diagnostics"] = diags
        return payload

    def state(self, sid: str) -> dict:
        session = self._get(sid)
        with session.lock:
            return self._payload(session)

    def step(self, sid: str, n: int = 1) -> dict:
        if n < 1:
            raise ServiceError(400, "bad_request", "n must be >= 1")
        session = self._get(sid)
        with session.lock:
            sim = session.sim
            for _ in range(n):
                if sim.status != "running":
                    break
                out = sim.step_forward()
                if not isinstance(out, HistoryEntry):
                    break
            return self._payload(session)

    def back(self, sid: str, n: int = 1) -> dict:
        if n < 1:
            raise ServiceError(400, "bad_request", "n must be >= 1")
        session = self._get(sid)
        with session.lock:
            sim = session.sim
            at_start = sim.cursor == 0
            start_cursor = sim.cursor
            for _ in range(n):
                try:
                    sim.step_back()
                except AtCycleZero:
                    at_start = True
                    break
            # any console input consumed in the rewound span replays from here on
            for cycle in range(sim.cursor + 1, start_cursor + 1):
                entry = sim.log.entry(cycle)
                prev = sim.log.entry(cycle - 1)
                if entry.inputs_consumed > prev.inputs_consumed:
                    session.replayed_cycles.add(cycle)
            return self._payload(session, at_start=at_start)

    def post_input(self, sid: str, text) -> dict:
        if not isinstance(text, str):
            raise ServiceError(400, "bad_request", "body must carry a 'text' string")
        session = self._get(sid)
        with session.lock:
            sim = session.sim
            if sim.status != "awaiting_input":
                raise ServiceError(409, "not_awaiting_input",
                                   "the simulation is not waiting for console input")
            accepted = sim.provide_input(text)
            payload = self._payload(session)
            if not accepted:
                payload["input_rejected"] = {
                    "text": text, "kind": sim.pending.kind,
                    "message": "could not parse input; prompting again",
                }
            return payload

    def reset(self, sid: str, body: dict) -> dict:
        session = self._get(sid)
        with session.lock:
            options = self._options(body if body.get("options") else
                                    {"options": {
                                        "forwarding": session.sim.options.forwarding,
                                        "max_cycles": session.sim.options.max_cycles,
                                    }})
            image, _ = try_assemble(session.source)
            assert image is not None  # it assembled when the session was created
            session.sim = Simulation(image, options)
            session.replayed_cycles = set()
            return self._payload(session)

    def memory(self, sid: str, segment: str, addr_text: str, len_text: str) -> dict:
        session = self._get(sid)
        with session.lock:
            sim = session.sim
            machine = sim.state.machine
            try:
                if addr_text == "":
                    addr = machine.segment_extent(segment)[0]
                else:
                    addr = int(addr_text, 0)
                length = int(len_text, 0) if len_text else 256
            except ValueError as exc:
                raise ServiceError(400, "bad_request", f"bad memory parameters: {exc}")
            if length > WINDOW_LIMIT:
                raise ServiceError(400, "bad_range",
                                   f"window length is capped at {WINDOW_LIMIT}")
            try:
                lo, hi = machine.segment_extent(segment)
                length = min(length, max(0, hi - addr))
                window = machine.memory_window(segment, addr, length, image=sim.image)
            except ValueError as exc:
                raise ServiceError(400, "bad_range", str(exc))
            return {
                "segment": window.segment,
                "start": hex64(window.start),
                "extent": {"lo": hex64(lo), "hi": hex64(hi)},
                "bytes": [{"addr": hex64(a), "value": v} for a, v in window.rows],
                "text_rows": None if window.text_rows is None else [
                    {"addr": hex64(a), "word": hex64(w), "disasm": d, "source_line": sl}
                    for a, w, d, sl in window.text_rows
                ],
            }

    def diagram(self, sid: str, mode: str) -> dict:
        if mode not in ("full", "squashed"):
            raise ServiceError(400, "bad_mode", "mode must be 'full' or 'squashed'")
        session = self._get(sid)
        with session.lock:
            if session.sim.cursor > self.diagram_cycle_limit:
                raise ServiceError(
                    400, "diagram_too_large",
                    f"diagrams are served up to {self.diagram_cycle_limit} cycles "
                    "(rewind, or render locally with the CLI)")
            trace = session.sim.snapshots()
            d = diagram_mod.build(trace)
            if mode == "squashed":
                d = diagram_mod.squash(d)
            return {"diagram": diagram_mod.to_json(d),
                    "csv": diagram_mod.render_csv(d)}

    def examples(self) -> dict:
        return {"examples": [dict(e) for e in EXAMPLES]}

    def catalog_payload(self) -> dict:
        return catalog()

    def session_count(self) -> int:
        with self._lock:
            return len(self._sessions)


# ---------------------------------------------------------------------------
# HTTP adapter (standard library, threaded)

_ROUTES: list[tuple[str, re.Pattern, str]] = [
    ("POST", re.compile(r"^/sessions$"), "create"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/state$"), "state"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/step$"), "step"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/back$"), "back"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/input$"), "input"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/reset$"), "reset"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/memory$"), "memory"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/diagram$"), "diagram"),
    ("GET", re.compile(r"^/examples$"), "examples"),
    ("GET", re.compile(r"^/catalog$"), "catalog"),
]


def make_server(store: SessionStore, host: str = "127.0.0.1", port: int = 0,
                static_dir: str | None = None, log=None):
    """Build (but do not start) a threaded HTTP server around a store."""
    import http.server
    import urllib.parse
    from pathlib import Path

    log = log if log is not None else _default_log
    static_root = Path(static_dir).resolve() if static_dir is not None else None

    class Handler(http.server.BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, *args):  # the structured log below replaces this
            pass

        def _respond(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _serve_static(self, rel: str) -> bool:
            if static_root is None:
                return False
            target = (static_root / rel.lstrip("/")).resolve()
            if rel in ("", "/"):
                target = static_root / "index.html"
            if not str(target).startswith(str(static_root)) or not target.is_file():
                return False
            kinds = {".html": "text/html", ".js": "text/javascript",
                     ".css": "text/css", ".svg": "image/svg+xml",
                     ".json": "application/json"}
            body = target.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", kinds.get(target.suffix, "application/octet-stream"))
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return True

        def _dispatch(self, method: str) -> None:
            started = time.monotonic()
            parsed = urllib.parse.urlparse(self.path)
            path = parsed.path
            query = urllib.parse.parse_qs(parsed.query)
            status = 500
            try:
                body = {}
                if method == "POST":
                    length = int(self.headers.get("Content-Length") or 0)
                    if length > MAX_BODY_BYTES:
                        raise ServiceError(413, "too_large",
                                           f"request body exceeds {MAX_BODY_BYTES} bytes")
                    raw = self.rfile.read(length) if length else b"{}"
                    try:
                        body = json.loads(raw or b"{}")
                    except json.JSONDecodeError:
                        raise ServiceError(400, "bad_json", "request body is not valid JSON")
                for m, pattern, name in _ROUTES:
                    match = pattern.match(path)
                    if m == method and match:
                        payload = self._handle(name, match.groupdict(), body, query)
                        status = 201 if name == "create" else 200
                        self._respond(status, payload)
                        break
                else:
                    if method == "GET" and self._serve_static(path):
                        status = 200
                    else:
                        status = 404
                        self._respond(404, {"error": {"code": "not_found",
                                                      "message": f"no route for {method} {path}"}})
            except ServiceError as exc:
                status = exc.http_status
                self._respond(status, exc.payload())
            except Exception as exc:  # noqa: BLE001 - survive handler bugs
                status = 500
                self._respond(500, {"error": {"code": "internal", "message": str(exc)}})
            finally:
                log({"method": method, "path": self.path, "status": status,
                     "ms": round((time.monotonic() - started) * 1000, 2)})

        def _handle(self, name: str, params: dict, body: dict, query: dict) -> dict:
            sid = params.get("sid", "")
            q = {k: v[0] for k, v in query.items()}
            if name == "create":
                return store.create(body)
            if name == "state":
                return store.state(sid)
            if name == "step":
                return store.step(sid, int(body.get("n", 1)))
            if name == "back":
                return store.back(sid, int(body.get("n", 1)))
            if name == "input":
                return store.post_input(sid, body.get("text"))
            if name == "reset":
                return store.reset(sid, body)
            if name == "memory":
                return store.memory(sid, q.get("segment", "static"),
                                    q.get("addr", ""), q.get("len", ""))
            if name == "diagram":
                return store.diagram(sid, q.get("mode", "full"))
            if name == "examples":
                return store.examples()
            if name == "catalog":
                return store.catalog_payload()
            raise ServiceError(404, "not_found", name)

        def do_GET(self):
            self._dispatch("GET")

        def do_POST(self):
            self._dispatch("POST")

    server = http.server.ThreadingHTTPServer((host, port), Handler)
    server.daemon_threads = True
    return server


def _default_log(record: dict) -> None:
    print(json.dumps({"t": round(time.time(), 3), **record}), flush=True)


def serve(host: str = "127.0.0.1", port: int = 8000,
          store: SessionStore | None = None, static_dir: str | None = None):
    """Run the service until interrupted."""
    store = store or SessionStore()
    server = make_server(store, host, port, static_dir)
    addr = server.server_address
    print(json.dumps({"listening": f"http://{addr[0]}:{addr[1]}"}), flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return server

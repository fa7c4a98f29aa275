#!/usr/bin/env python3
"""Record wire-format payload fixtures for the frontend contract tests.

Starts the real HTTP service on an ephemeral port, drives it through the
documented endpoints, and freezes the JSON responses under
frontend/fixtures/.  The frontend tests never fabricate payloads; they only
replay what the service actually said.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

import http.client

from rvpipe.programs import get_example
from rvpipe.service import SessionStore, make_server

OUT = Path(__file__).resolve().parent.parent / "frontend" / "fixtures"

READ_PROGRAM = "li a7, 5\necall\nmv s0, a0\nli a7, 1\necall\nli a7, 10\necall"
RAW3 = "addi x1, x0, 1\naddi x2, x0, 2\nadd x3, x1, x2"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    server = make_server(SessionStore(), port=0, log=lambda record: None)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()

    def call(method: str, path: str, body=None):
        conn = http.client.HTTPConnection("127.0.0.1", port, timeout=10)
        data = json.dumps(body).encode() if body is not None else None
        conn.request(method, path, body=data,
                     headers={"Content-Type": "application/json"} if data else {})
        resp = conn.getresponse()
        payload = json.loads(resp.read())
        conn.close()
        assert resp.status in (200, 201), (path, resp.status, payload)
        return payload

    def save(name: str, payload) -> None:
        (OUT / f"{name}.json").write_text(json.dumps(payload, indent=1, sort_keys=True))
        print(f"recorded {name}.json")

    created = call("POST", "/sessions", {"source": RAW3})
    sid = created["id"]
    save("state_cycle0_fwd", created)
    save("state_midrun", call("POST", f"/sessions/{sid}/step", {"n": 5}))
    save("state_halted", call("POST", f"/sessions/{sid}/step", {"n": 10}))

    nofwd = call("POST", "/sessions", {"source": RAW3,
                                       "options": {"forwarding": False}})
    save("state_cycle0_nofwd", nofwd)

    reader = call("POST", "/sessions", {"source": READ_PROGRAM})
    rid = reader["id"]
    save("state_awaiting", call("POST", f"/sessions/{rid}/step", {"n": 50}))
    save("state_after_input", call("POST", f"/sessions/{rid}/input", {"text": "42"}))

    loop = call("POST", "/sessions", {"source": get_example("loop_sum")["source"]})
    lid = loop["id"]
    call("POST", f"/sessions/{lid}/step", {"n": 500})
    save("diagram_full", call("GET", f"/sessions/{lid}/diagram?mode=full"))
    save("diagram_squashed", call("GET", f"/sessions/{lid}/diagram?mode=squashed"))
    save("memory_text", call("GET", f"/sessions/{lid}/memory?segment=text&len=40"))
    save("catalog", call("GET", "/catalog"))
    save("examples", call("GET", "/examples"))

    server.shutdown()


if __name__ == "__main__":
    main()

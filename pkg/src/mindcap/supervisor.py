"""Supervisor control plane: telemetry out, commands in, on a separate channel.

The HTTP surface never touches run state directly.  Commands set flags or
queue work that the runner thread applies at its next step boundary, so the
audit log keeps a single writer and every snapshot the dashboard sees is a
fold of a clean record prefix.  The agent has no path to any of this.
"""

from __future__ import annotations

import hmac
import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Dict, List, Optional, Tuple
from urllib.parse import parse_qs, urlparse

from .audit import verify_chain
from .errors import IllegalTransition
from .runner import Report, RunKilled, Scenario, ScenarioRun
from .telemetry import (
    STATE_FINISHED,
    STATE_KILLED,
    STATE_PAUSED,
    STATE_RUNNING,
    TelemetrySnapshot,
    fold_telemetry,
)

COMMAND_ACK_TIMEOUT_S = 10.0
PAUSE_POLL_S = 0.02
HEARTBEAT_S = 0.5


class RunController:
    """Step gate shared between the runner thread and the HTTP handlers.

    The runner calls wait_step at every step boundary; everything the
    supervisor asks for (pause, resume, kill, budget changes) takes effect
    there, in the runner thread, including the audit records.
    """

    def __init__(self, run: ScenarioRun):
        self.run = run
        self._cond = threading.Condition()
        self._state = STATE_RUNNING
        self._pause_requested = False
        self._budget_queue: List[Tuple[Dict[str, object], "_Pending"]] = []
        self._history: List[TelemetrySnapshot] = []
        run.control = self

    @property
    def state(self) -> str:
        with self._cond:
            return self._state

    def snapshots(self) -> List[TelemetrySnapshot]:
        with self._cond:
            return list(self._history)

    def _capture(self) -> None:
        """Runner-thread only: record a telemetry snapshot at this boundary."""
        run = self.run
        snapshot = fold_telemetry(
            run.trail.records(), run.guard.budget, at_tick=run.clock.now
        )
        if not self._history or self._history[-1] != snapshot:
            self._history.append(snapshot)
        self._cond.notify_all()

    def _guard_record(self, detail: str) -> None:
        run = self.run
        run.trail.append(
            tick=run.clock.now, task_id=None, kind="guard", detail=detail
        )

    def _drain_budget_queue(self) -> None:
        while self._budget_queue:
            changes, pending = self._budget_queue.pop(0)
            outcome = self.run.apply_budget_change(changes)
            pending.resolve(outcome)
            self._capture()

    def wait_step(self) -> None:
        """Runner-thread gate: apply pending commands, honor pause/kill."""
        with self._cond:
            self._drain_budget_queue()
            if self._state == STATE_KILLED:
                self._guard_record("kill")
                self._capture()
                raise RunKilled()
            if self._pause_requested:
                self._pause_requested = False
                self._state = STATE_PAUSED
                self._guard_record("pause")
                self._capture()
            while self._state == STATE_PAUSED:
                self._cond.wait(PAUSE_POLL_S)
                self._drain_budget_queue()
                if self._state == STATE_KILLED:
                    self._guard_record("kill")
                    self._capture()
                    raise RunKilled()
                if self._state == STATE_RUNNING:
                    self._guard_record("resume")
                    self._capture()
            self._capture()

    def finish(self) -> None:
        """Runner-thread wrapper calls this once run() returns."""
        with self._cond:
            if self._state not in (STATE_KILLED,):
                self._state = STATE_FINISHED
            self._capture()
            self._cond.notify_all()

    # Supervisor-thread entry points.

    def request_pause(self) -> None:
        deadline = time.monotonic() + COMMAND_ACK_TIMEOUT_S
        with self._cond:
            if self._state != STATE_RUNNING or self._pause_requested:
                raise IllegalTransition(f"pause while {self._state}")
            self._pause_requested = True
            while self._state != STATE_PAUSED:
                if self._state in (STATE_KILLED, STATE_FINISHED):
                    self._pause_requested = False
                    raise IllegalTransition(f"pause while {self._state}")
                if time.monotonic() > deadline:
                    self._pause_requested = False
                    raise IllegalTransition("pause not acknowledged in time")
                self._cond.wait(PAUSE_POLL_S)

    def request_resume(self) -> None:
        deadline = time.monotonic() + COMMAND_ACK_TIMEOUT_S
        with self._cond:
            if self._state != STATE_PAUSED:
                raise IllegalTransition(f"resume while {self._state}")
            self._state = STATE_RUNNING
            self._cond.notify_all()
            # the runner appends the resume record; wait for it so the ack
            # implies the log already shows the transition
            while not self._resume_recorded():
                if time.monotonic() > deadline:
                    break
                self._cond.wait(PAUSE_POLL_S)

    def _resume_recorded(self) -> bool:
        records = self.run.trail.records()
        for record in reversed(records):
            if record.kind == "guard" and record.detail in ("pause", "resume"):
                return record.detail == "resume"
        return False

    def request_kill(self) -> None:
        with self._cond:
            if self._state in (STATE_KILLED, STATE_FINISHED):
                raise IllegalTransition(f"kill while {self._state}")
            self._state = STATE_KILLED
            self._cond.notify_all()

    def request_budget_change(self, changes: Dict[str, object]):
        pending = _Pending()
        with self._cond:
            if self._state in (STATE_KILLED, STATE_FINISHED):
                raise IllegalTransition(f"budget change while {self._state}")
            self._budget_queue.append((changes, pending))
            self._cond.notify_all()
        outcome = pending.wait(COMMAND_ACK_TIMEOUT_S)
        if outcome is None:
            raise IllegalTransition("budget change not applied in time")
        return outcome


class _Pending:
    """One-shot result slot for a queued command."""

    def __init__(self) -> None:
        self._event = threading.Event()
        self._value = None

    def resolve(self, value) -> None:
        self._value = value
        self._event.set()

    def wait(self, timeout: float):
        self._event.wait(timeout)
        return self._value


class _SupervisorHTTPServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True
    api: "SupervisorServer"


class SupervisorServer:
    """HTTP facade over one scenario run."""

    def __init__(
        self,
        scenario: Scenario,
        token: str,
        port: int = 0,
        pace_s: float = 0.0,
    ):
        if not token:
            raise ValueError("supervisor token must be non-empty")
        self.token = token
        self.run = ScenarioRun(scenario, pace_s=pace_s)
        self.controller = RunController(self.run)
        self.report: Optional[Report] = None
        self._httpd = _SupervisorHTTPServer(("127.0.0.1", port), _Handler)
        self._httpd.api = self
        self._runner_thread = threading.Thread(target=self._drive, daemon=True)
        self._server_thread = threading.Thread(
            target=self._httpd.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True
        )

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    def start(self) -> None:
        self._server_thread.start()
        self._runner_thread.start()

    def _drive(self) -> None:
        try:
            self.report = self.run.run()
        finally:
            self.controller.finish()

    def wait(self, timeout: Optional[float] = None) -> None:
        self._runner_thread.join(timeout)

    def shutdown(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def check_token(self, presented: Optional[str]) -> bool:
        if presented is None:
            return False
        return hmac.compare_digest(presented.encode(), self.token.encode())

    def log_bad_token(self, path: str) -> None:
        # Anomaly-grade: a wrong token on the control channel is exactly the
        # kind of event the supervisor needs surfaced.
        self.run.trail.append(
            tick=self.run.clock.now,
            task_id=None,
            kind="anomaly",
            detail=f"BAD_TOKEN path={path}",
        )


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    @property
    def api(self) -> SupervisorServer:
        return self.server.api  # type: ignore[attr-defined]

    def log_message(self, format: str, *args) -> None:
        pass

    def _reply_json(self, status: int, payload: Dict[str, object]) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _reply_text(self, status: int, text: str, content_type: str = "text/plain") -> None:
        body = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _authorized(self, path: str) -> bool:
        token = self.headers.get("X-Supervisor-Token")
        if self.api.check_token(token):
            return True
        self.api.log_bad_token(path)
        self._reply_json(403, {"ok": False, "reason": "bad supervisor token"})
        return False

    def do_GET(self) -> None:
        parsed = urlparse(self.path)
        if not self._authorized(parsed.path):
            return
        if parsed.path == "/telemetry":
            self._stream_telemetry(parsed)
        elif parsed.path == "/audit":
            self._serve_audit(parsed)
        elif parsed.path == "/verify":
            self._serve_verify()
        else:
            self._reply_json(404, {"ok": False, "reason": "unknown endpoint"})

    def do_POST(self) -> None:
        parsed = urlparse(self.path)
        # drain the body unconditionally: leftover bytes would be parsed as
        # the next request line on a keep-alive connection
        body = self._read_body()
        if not self._authorized(parsed.path):
            return
        api = self.api
        try:
            if parsed.path == "/pause":
                api.controller.request_pause()
                self._reply_json(200, {"ok": True, "state": api.controller.state})
            elif parsed.path == "/resume":
                api.controller.request_resume()
                self._reply_json(200, {"ok": True, "state": api.controller.state})
            elif parsed.path == "/kill":
                api.controller.request_kill()
                self._reply_json(200, {"ok": True, "state": api.controller.state})
            elif parsed.path == "/budget":
                self._handle_budget(body)
            else:
                self._reply_json(404, {"ok": False, "reason": "unknown endpoint"})
        except IllegalTransition as exc:
            self._reply_json(409, {"ok": False, "reason": str(exc)})

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _handle_budget(self, body: bytes) -> None:
        try:
            payload = json.loads(body or b"{}")
            if not isinstance(payload, dict) or not payload:
                raise ValueError("body must be a non-empty JSON object")
        except (ValueError, json.JSONDecodeError) as exc:
            self._reply_json(400, {"ok": False, "reason": f"malformed body: {exc}"})
            return
        outcome = self.api.controller.request_budget_change(payload)
        budget = self.api.run.guard.budget
        self._reply_json(
            200,
            {
                "ok": outcome.accepted,
                "reason": outcome.reason,
                "budget": budget.to_pairs(),
            },
        )

    def _serve_audit(self, parsed) -> None:
        params = parse_qs(parsed.query)
        start = int(params.get("from", ["0"])[0])
        records = self.api.run.trail.records()
        lines = "".join(r.to_line() + "\n" for r in records[start:])
        self._reply_text(200, lines)

    def _serve_verify(self) -> None:
        records = self.api.run.trail.records()
        ok, bad = verify_chain(records)
        head = records[-1].hash.hex() if records else ""
        self._reply_json(
            200,
            {"ok": ok, "first_bad_seq": bad, "head_hash": head, "length": len(records)},
        )

    def _stream_telemetry(self, parsed) -> None:
        params = parse_qs(parsed.query)
        since = int(params.get("since", ["-1"])[0])
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        # the stream has no length framing, so its end is the connection
        # closing; without this, keep-alive clients never see EOF
        self.close_connection = True

        controller = self.api.controller
        sent = 0
        last_beat = time.monotonic()
        try:
            while True:
                history = controller.snapshots()
                fresh = [s for s in history[sent:] if s.tick > since]
                sent = len(history)
                for snapshot in fresh:
                    self._sse(snapshot.to_json())
                    last_beat = time.monotonic()
                state = controller.state
                if state in (STATE_KILLED, STATE_FINISHED) and sent >= len(
                    controller.snapshots()
                ):
                    break
                if not fresh and time.monotonic() - last_beat > HEARTBEAT_S:
                    # paused (or idle) runs keep streaming the frozen view
                    if history and history[-1].tick > since:
                        self._sse(history[-1].to_json())
                    last_beat = time.monotonic()
                time.sleep(0.05)
        except (BrokenPipeError, ConnectionResetError):
            return

    def _sse(self, data: str) -> None:
        self.wfile.write(f"data: {data}\n\n".encode("utf-8"))
        self.wfile.flush()

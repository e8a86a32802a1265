"""Session, request, and result types for talking to a scoring server.

The client performs no reward math. It writes one JSON object per line,
reads id-tagged responses off a background thread, and hands the server's
numbers back untouched, so client-observed rewards are bit-identical to
server-computed ones. The pending map (request id to completion slot) is
the only mutable state and is lock-protected; any number of threads may
score concurrently over one session.
"""

from __future__ import annotations

import json
import socket
import subprocess
import threading
from dataclasses import dataclass
from itertools import count
from typing import IO, Iterable

TASKS = ("NER", "RE", "EE")

DEFAULT_TIMEOUT = 30.0


class ClientError(Exception):
    """Base class for every error this client raises deliberately."""


class ValidationError(ClientError):
    """Request rejected on the client side; nothing was sent."""


class SessionClosedError(ClientError):
    """The session is closed or the server went away mid-flight."""


class ScoreTimeoutError(ClientError):
    """No response arrived within the session timeout."""


class ServerError(ClientError):
    """The server answered this request with an error response."""

    def __init__(self, message: str, request_id: str | None = None):
        super().__init__(message)
        self.request_id = request_id


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


@dataclass(frozen=True)
class GroupRequest:
    """One candidate group to score. Validated at construction."""

    task: str
    gold: str
    candidates: tuple[str, ...]
    schema: str | dict | None = None
    config: dict | None = None
    breakdowns: bool = False

    def __post_init__(self):
        _require(isinstance(self.task, str), "task must be a string")
        object.__setattr__(self, "task", self.task.upper())
        _require(self.task in TASKS, f"task must be one of {', '.join(TASKS)}")
        _require(isinstance(self.gold, str), "gold must be a string")
        object.__setattr__(self, "candidates", tuple(self.candidates))
        _require(len(self.candidates) > 0, "candidates must be non-empty")
        _require(
            all(isinstance(c, str) for c in self.candidates),
            "candidates must all be strings",
        )
        _require(
            self.schema is None or isinstance(self.schema, (str, dict)),
            "schema must be a registry id or an inline schema object",
        )
        _require(
            self.config is None or isinstance(self.config, dict),
            "config must be a dict of overrides",
        )


@dataclass(frozen=True)
class GroupScore:
    """Outcome for one request in a batch: scores or an error, never both."""

    rewards: tuple[float, ...] = ()
    advantages: tuple[float, ...] = ()
    breakdowns: tuple[dict, ...] | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


class _Slot:
    """Completion slot for one in-flight request id."""

    __slots__ = ("event", "payload")

    def __init__(self):
        self.event = threading.Event()
        self.payload: dict | ClientError | None = None


class ClientSession:
    """One connection to a scoring server, shared by a training process.

    Build with :meth:`spawn` (child process over stdio, the default mode)
    or :meth:`connect` (TCP). The constructor also accepts any pre-opened
    line-based text streams, which the tests use to fake a server.
    """

    def __init__(
        self,
        reader: IO[str],
        writer: IO[str],
        *,
        default_schema: str | dict | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        process: subprocess.Popen | None = None,
        sock: socket.socket | None = None,
    ):
        self._reader = reader
        self._writer = writer
        self._process = process
        self._sock = sock
        self._default_schema = default_schema
        self._timeout = timeout
        self._pending: dict[str, _Slot] = {}
        self._lock = threading.Lock()
        self._write_lock = threading.Lock()
        self._ids = count(1)
        self._closed = False
        self._pump_thread = threading.Thread(
            target=self._pump, name="score-response-reader", daemon=True
        )
        self._pump_thread.start()

    @classmethod
    def spawn(
        cls,
        command: Iterable[str] = ("sfr-kit", "serve"),
        *,
        schemas: str | None = None,
        config: str | None = None,
        workers: int | None = None,
        default_schema: str | dict | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        stderr: int | None = None,
    ) -> "ClientSession":
        """Start a server as a child process and attach to its stdio."""
        argv = list(command)
        if schemas is not None:
            argv += ["--schemas", str(schemas)]
        if config is not None:
            argv += ["--config", str(config)]
        if workers is not None:
            argv += ["--workers", str(workers)]
        process = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=stderr,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        return cls(
            process.stdout,
            process.stdin,
            default_schema=default_schema,
            timeout=timeout,
            process=process,
        )

    @classmethod
    def connect(
        cls,
        host: str,
        port: int,
        *,
        default_schema: str | dict | None = None,
        timeout: float = DEFAULT_TIMEOUT,
    ) -> "ClientSession":
        """Dial a TCP server started with ``--transport tcp:PORT``."""
        sock = socket.create_connection((host, port), timeout=timeout)
        # response waits are enforced per request slot, not on the socket
        sock.settimeout(None)
        return cls(
            sock.makefile("r", encoding="utf-8"),
            sock.makefile("w", encoding="utf-8"),
            default_schema=default_schema,
            timeout=timeout,
            sock=sock,
        )

    @property
    def closed(self) -> bool:
        return self._closed

    def __enter__(self) -> "ClientSession":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def score_group(
        self,
        task: str,
        gold: str,
        candidates: Iterable[str],
        schema: str | dict | None = None,
        *,
        config: dict | None = None,
    ) -> tuple[list[float], list[float]]:
        """Score one candidate group; returns (rewards, advantages)."""
        request = GroupRequest(task, gold, tuple(candidates), schema, config)
        rid, slot = self._submit(request)
        result = self._resolve(rid, slot)
        return list(result.rewards), list(result.advantages)

    def score_batch(self, requests: Iterable[GroupRequest]) -> list[GroupScore]:
        """Pipeline many requests; results come back in request order.

        Server-side failures (and a session that dies mid-batch) are
        reported per item as ``GroupScore(error=...)``; the batch never
        aborts part way.
        """
        submitted: list[tuple[str, _Slot] | ClientError] = []
        for request in requests:
            if not isinstance(request, GroupRequest):
                raise ValidationError("score_batch takes GroupRequest items")
            try:
                submitted.append(self._submit(request))
            except ClientError as exc:
                submitted.append(exc)
        results: list[GroupScore] = []
        for entry in submitted:
            if isinstance(entry, ClientError):
                results.append(GroupScore(error=str(entry)))
                continue
            rid, slot = entry
            try:
                results.append(self._resolve(rid, slot))
            except ClientError as exc:
                results.append(GroupScore(error=str(exc)))
        return results

    def close(self) -> None:
        """Shut down the transport; pending requests resolve as closed."""
        with self._lock:
            if self._closed:
                return
            self._closed = True
        try:
            self._writer.close()
        except OSError:
            pass
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_WR)
            except OSError:
                pass
        if self._process is not None:
            try:
                self._process.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self._process.kill()
                self._process.wait(timeout=5)
        self._pump_thread.join(timeout=5)
        self._fail_pending(SessionClosedError("session closed"))
        try:
            self._reader.close()
        except OSError:
            pass
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass

    # wire plumbing

    def _submit(self, request: GroupRequest) -> tuple[str, _Slot]:
        schema = request.schema if request.schema is not None else self._default_schema
        _require(schema is not None, "no schema given and the session has no default")
        wire: dict = {
            "id": f"c{next(self._ids)}",
            "task": request.task,
            "schema": schema,
            "gold": request.gold,
            "candidates": list(request.candidates),
        }
        if request.config is not None:
            wire["config"] = request.config
        if request.breakdowns:
            wire["breakdowns"] = True
        rid = wire["id"]
        slot = _Slot()
        with self._lock:
            if self._closed:
                raise SessionClosedError("session is closed")
            self._pending[rid] = slot
        try:
            with self._write_lock:
                self._writer.write(json.dumps(wire, ensure_ascii=False) + "\n")
                self._writer.flush()
        except (OSError, ValueError) as exc:
            with self._lock:
                self._pending.pop(rid, None)
            raise SessionClosedError(f"could not send request: {exc}") from None
        return rid, slot

    def _resolve(self, rid: str, slot: _Slot) -> GroupScore:
        if not slot.event.wait(self._timeout):
            with self._lock:
                self._pending.pop(rid, None)
            raise ScoreTimeoutError(f"no response to {rid} within {self._timeout}s")
        payload = slot.payload
        if isinstance(payload, ClientError):
            raise SessionClosedError(str(payload))
        assert isinstance(payload, dict)
        if payload.get("error") is not None:
            raise ServerError(str(payload["error"]), request_id=rid)
        rewards = payload.get("rewards")
        advantages = payload.get("advantages")
        if not isinstance(rewards, list) or not isinstance(advantages, list):
            raise ServerError("response carried neither rewards nor an error", rid)
        breakdowns = payload.get("breakdowns")
        return GroupScore(
            rewards=tuple(float(r) for r in rewards),
            advantages=tuple(float(a) for a in advantages),
            breakdowns=tuple(breakdowns) if breakdowns is not None else None,
        )

    def _pump(self) -> None:
        error = SessionClosedError("server closed the stream")
        try:
            for line in self._reader:
                line = line.strip()
                if not line:
                    continue
                try:
                    payload = json.loads(line)
                except json.JSONDecodeError:
                    continue
                if not isinstance(payload, dict):
                    continue
                rid = payload.get("id")
                if not isinstance(rid, str):
                    continue
                with self._lock:
                    slot = self._pending.pop(rid, None)
                if slot is not None:
                    slot.payload = payload
                    slot.event.set()
        except (OSError, ValueError) as exc:
            error = SessionClosedError(f"response stream failed: {exc}")
        self._fail_pending(error)

    def _fail_pending(self, error: ClientError) -> None:
        with self._lock:
            slots = list(self._pending.values())
            self._pending.clear()
        for slot in slots:
            slot.payload = error
            slot.event.set()

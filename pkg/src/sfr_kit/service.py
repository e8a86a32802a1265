"""NDJSON reward service over stdio or TCP.

One request per line in, one response per line out. Responses carry the
request id and may arrive out of submission order; clients must correlate by
id. A response holds exactly one of ``rewards`` (with ``advantages``) or
``error``. Malformed input produces an error response, never a crash.

Request:  {"id": ..., "task": "NER|RE|EE", "gold": str, "candidates": [str, ...],
           "schema": "<registry id>" | {inline schema}, "config": {...}?,
           "breakdowns": bool?}
Response: {"id": ..., "rewards": [...], "advantages": [...], "breakdowns": [...]?}
        | {"id": ..., "error": "..."}
"""

from __future__ import annotations

import json
import socketserver
import sys
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass

from .config import DEFAULT_CONFIG, ConfigError, SfrConfig
from .grpo import ADVANTAGE_EPSILON, CandidateGroup, score_group
from .rewards import GoldUnparseableError
from .schema import SchemaError, SchemaRegistry, Task, TaskSchema

DEFAULT_WORKERS = 4


class RequestError(ValueError):
    """Request failed validation; the message goes back in the error response."""


@dataclass(frozen=True)
class ScoreRequest:
    id: object
    task: Task
    gold: str
    candidates: tuple[str, ...]
    schema: TaskSchema
    config: SfrConfig
    breakdowns: bool = False


def parse_request(
    data: dict, registry: SchemaRegistry | None, base_config: SfrConfig
) -> ScoreRequest:
    if not isinstance(data, dict):
        raise RequestError(f"request must be an object, got {type(data).__name__}")
    try:
        task = Task.parse(str(data["task"]))
    except KeyError:
        raise RequestError("request needs a 'task'") from None
    except SchemaError as exc:
        raise RequestError(str(exc)) from None
    gold = data.get("gold")
    if not isinstance(gold, str):
        raise RequestError("'gold' must be a string")
    candidates = data.get("candidates")
    if not isinstance(candidates, list) or not candidates or not all(isinstance(c, str) for c in candidates):
        raise RequestError("'candidates' must be a non-empty list of strings")
    schema_ref = data.get("schema")
    if isinstance(schema_ref, str):
        if registry is None:
            raise RequestError(f"unknown schema {schema_ref!r}: server has no schema registry")
        try:
            schema = registry.get(schema_ref)
        except SchemaError as exc:
            raise RequestError(str(exc)) from None
    elif isinstance(schema_ref, dict):
        try:
            schema = TaskSchema.from_dict(schema_ref)
        except SchemaError as exc:
            raise RequestError(f"bad inline schema: {exc}") from None
    else:
        raise RequestError("request needs a 'schema' (registry id or inline object)")
    if schema.task is not task:
        raise RequestError(f"task {task.value} does not match schema task {schema.task.value}")
    config = base_config
    overrides = data.get("config")
    if overrides is not None:
        if not isinstance(overrides, dict):
            raise RequestError("'config' must be an object")
        try:
            config = base_config.merged(overrides)
        except ConfigError as exc:
            raise RequestError(f"bad config override: {exc}") from None
    return ScoreRequest(
        id=data.get("id"),
        task=task,
        gold=gold,
        candidates=tuple(candidates),
        schema=schema,
        config=config,
        breakdowns=bool(data.get("breakdowns", False)),
    )


def handle_line(
    line: str, registry: SchemaRegistry | None = None, base_config: SfrConfig = DEFAULT_CONFIG
) -> dict:
    """Process one NDJSON request line into a response object. Never raises."""
    request_id = None
    try:
        data = json.loads(line)
        if isinstance(data, dict):
            request_id = data.get("id")
        request = parse_request(data, registry, base_config)
        group = CandidateGroup(
            example_id=str(request.id),
            task=request.task,
            gold=request.gold,
            candidates=request.candidates,
        )
        scored = score_group(group, request.schema, request.config, ADVANTAGE_EPSILON)
        response: dict = {
            "id": request.id,
            "rewards": list(scored.rewards),
            "advantages": list(scored.advantages),
        }
        if request.breakdowns:
            response["breakdowns"] = [b.to_dict() for b in scored.breakdowns]
        return response
    except json.JSONDecodeError as exc:
        return {"id": request_id, "error": f"malformed request line: {exc}"}
    except RequestError as exc:
        return {"id": request_id, "error": str(exc)}
    except GoldUnparseableError as exc:
        return {"id": request_id, "error": f"gold unparseable: {exc}"}
    except Exception as exc:  # last resort: a scoring bug must not kill the stream
        return {"id": request_id, "error": f"internal error: {type(exc).__name__}: {exc}"}


def _pump(
    lines,
    write,
    registry: SchemaRegistry | None,
    base_config: SfrConfig,
    executor: ThreadPoolExecutor,
) -> None:
    """Feed request lines to the executor, writing responses as they finish."""
    lock = threading.Lock()
    pending: list[Future] = []

    def work(line: str) -> None:
        payload = json.dumps(handle_line(line, registry, base_config), ensure_ascii=False)
        with lock:
            write(payload + "\n")

    for line in lines:
        if not line.strip():
            continue
        pending.append(executor.submit(work, line))
    # the write happens inside the work item, so result() returning means the
    # response is out; draining here keeps the stream alive until then
    for future in pending:
        future.result()


def serve_stdio(
    registry: SchemaRegistry | None = None,
    base_config: SfrConfig = DEFAULT_CONFIG,
    workers: int = DEFAULT_WORKERS,
    in_stream=None,
    out_stream=None,
) -> None:
    """Serve until stdin closes. Responses interleave in completion order."""
    in_stream = in_stream if in_stream is not None else sys.stdin
    out_stream = out_stream if out_stream is not None else sys.stdout

    def write(text: str) -> None:
        out_stream.write(text)
        out_stream.flush()

    with ThreadPoolExecutor(max_workers=workers) as executor:
        _pump(in_stream, write, registry, base_config, executor)


def serve_tcp(
    host: str,
    port: int,
    registry: SchemaRegistry | None = None,
    base_config: SfrConfig = DEFAULT_CONFIG,
    workers: int = DEFAULT_WORKERS,
    ready_callback=None,
) -> None:
    """Serve NDJSON over TCP; each connection is its own request stream.

    Binding port 0 picks a free port; the chosen address is announced on
    stderr (and passed to ready_callback when given) once listening.
    """
    executor = ThreadPoolExecutor(max_workers=workers)

    class Handler(socketserver.StreamRequestHandler):
        def handle(self) -> None:
            def write(text: str) -> None:
                try:
                    self.wfile.write(text.encode("utf-8"))
                    self.wfile.flush()
                except (BrokenPipeError, ConnectionResetError, ValueError):
                    pass

            lines = (raw.decode("utf-8", errors="replace") for raw in self.rfile)
            _pump(lines, write, registry, base_config, executor)

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    with Server((host, port), Handler) as server:
        bound_host, bound_port = server.server_address[:2]
        print(f"listening on {bound_host}:{bound_port}", file=sys.stderr, flush=True)
        if ready_callback is not None:
            ready_callback(bound_host, bound_port)
        try:
            server.serve_forever()
        finally:
            executor.shutdown(wait=False)

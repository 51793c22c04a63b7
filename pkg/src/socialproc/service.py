"""HTTP/JSON facade over the engine.

Request and response bodies are the interchange documents of the owning
modules; engine errors map one-to-one onto stable machine codes. Who is
acting comes from the trusted ``X-Collaborator`` header (demo-grade
identity by design, isolated behind ``_identity`` so it can be swapped).

All mutations funnel through the owning entity's lock inside the
library; handlers never hold a global lock across I/O. Each process
exposes its committed trace as an event stream (server-sent events,
with a long-poll fallback) in sequence order.
"""

from __future__ import annotations

import asyncio
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse, StreamingResponse

from . import fixtures
from .adaptation import (
    MetaProcess,
    conclude_meta_process,
    set_process_status,
    start_meta_process,
    transaction_from_dict,
)
from .canonical import canonical_json, content_hash
from .engine import (
    Clock,
    SocialProcess,
    SystemClock,
    enabled_activities,
    fire,
    instantiate,
)
from .environment import ImplementedResource, SocialEnvironment
from .errors import EngineError, NotFound, ReportedError, ValidationFailed
from .implementation import (
    ImplementedSocialProtocol,
    implement_protocol,
    implemented_from_dict,
)
from .interchange import process_to_dict
from .library import FileStore, LibraryEntry, save_artifact
from .model import (
    AbstractSocialProtocol,
    protocol_from_dict,
    validate_abstract_protocol,
)
from .report import ValidationReport

HTTP_STATUS_BY_CODE = {
    "DUPLICATE_ID": 409,
    "UNKNOWN_RESOURCE": 404,
    "UNKNOWN_ROLE": 404,
    "UNKNOWN_COLLABORATOR": 404,
    "UNASSIGNED_ROLE": 400,
    "CROSS_REFERENCE": 400,
    "PROTOCOL_INVALID": 400,
    "INCOMPLETE_MAPPING": 400,
    "RESOURCE_IN_USE": 409,
    "NOT_ENABLED": 409,
    "CONTACT_VIOLATION": 409,
    "PROCESS_NOT_RUNNING": 409,
    "PROCESS_NOT_PAUSED": 409,
    "ILLEGAL_TRANSITION": 409,
    "ADAPTATION_IN_PROGRESS": 409,
    "META_NOT_DECIDED": 409,
    "TRANSACTION_INVALID": 422,
    "MIGRATION_MISSING": 422,
    "REPLAY_DIVERGENCE": 422,
    "NOT_FOUND": 404,
    "VALIDATION_FAILED": 400,
    "CORRUPT_DOCUMENT": 500,
    "STORAGE_FAILURE": 500,
}

LONG_POLL_CAP_SECONDS = 30.0
POLL_INTERVAL_SECONDS = 0.05


@dataclass
class ServiceState:
    """Everything one engine instance serves: registries plus plumbing."""

    environment: SocialEnvironment = field(default_factory=SocialEnvironment)
    clock: Clock = field(default_factory=SystemClock)
    store: FileStore | None = None
    abstract: dict[str, AbstractSocialProtocol] = field(default_factory=dict)
    implemented: dict[str, ImplementedSocialProtocol] = field(default_factory=dict)
    processes: dict[str, SocialProcess] = field(default_factory=dict)
    metas: dict[str, MetaProcess] = field(default_factory=dict)

    def get_abstract(self, protocol_id: str) -> AbstractSocialProtocol:
        if protocol_id not in self.abstract:
            raise NotFound(f"no protocol {protocol_id!r}", [protocol_id])
        return self.abstract[protocol_id]

    def get_implemented(self, protocol_id: str) -> ImplementedSocialProtocol:
        if protocol_id not in self.implemented:
            raise NotFound(f"no implemented protocol {protocol_id!r}", [protocol_id])
        return self.implemented[protocol_id]

    def get_process(self, process_id: str) -> SocialProcess:
        if process_id not in self.processes:
            raise NotFound(f"no process {process_id!r}", [process_id])
        return self.processes[process_id]

    def get_meta(self, meta_id: str) -> MetaProcess:
        if meta_id not in self.metas:
            raise NotFound(f"no meta-process {meta_id!r}", [meta_id])
        return self.metas[meta_id]

    def persist_process(self, process: SocialProcess) -> None:
        if self.store is None:
            return
        save_artifact(
            self.store,
            LibraryEntry(id=process.id, kind="process", document=process_to_dict(process)),
        )

    def persist_environment(self) -> None:
        if self.store is None:
            return
        save_artifact(
            self.store,
            LibraryEntry(id="environment", kind="environment", document=self.environment.to_dict()),
        )


def seed_demo(state: ServiceState) -> None:
    """Load the brainstorming fixture plus a substitute candidate (dan)."""
    env = state.environment
    for resource in fixtures.brainstorming_environment().resources():
        env.ensure_resource(resource)
    env.ensure_resource(ImplementedResource(id="dan", kind="person", label="Dan"))
    env.add_relation("ann", "bob", "works_with")
    env.add_relation("bob", "cecil", "works_with")
    env.add_relation("ann", "dan", "manages")
    abstract = fixtures.brainstorming_protocol()
    implemented = fixtures.brainstorming_implementation(env, abstract)
    state.abstract[abstract.id] = abstract
    state.implemented[implemented.id] = implemented
    process = instantiate(
        implemented,
        fixtures.BRAINSTORMING_ASSIGNMENT,
        env,
        process_id="p1",
        clock=state.clock,
    )
    state.processes[process.id] = process


def _identity(request: Request, body: dict | None = None, query: str | None = None) -> str:
    """Trusted identity: query param, then body field, then header."""
    if query:
        return query
    if body and body.get("collaborator"):
        return body["collaborator"]
    header = request.headers.get("x-collaborator")
    if header:
        return header
    raise ValidationFailed(
        "no collaborator identity (X-Collaborator header, query, or body field)",
        ValidationReport(),
    )


def _trace_after(process: SocialProcess, after: int) -> list[dict]:
    with process.lock:
        return [entry.to_dict() for entry in process.trace if entry.seq > after]


def create_app(state: ServiceState | None = None) -> FastAPI:
    state = state if state is not None else ServiceState()
    app = FastAPI(title="socialproc", version="0.1.0")
    app.state.engine = state

    @app.exception_handler(EngineError)
    async def engine_error_handler(_request: Request, exc: EngineError) -> JSONResponse:
        body: dict[str, Any] = {"code": exc.code, "message": str(exc), "ids": exc.ids}
        if isinstance(exc, ReportedError):
            body["report"] = exc.report.to_dict()
        return JSONResponse(status_code=HTTP_STATUS_BY_CODE.get(exc.code, 500), content=body)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    # -- protocols ---------------------------------------------------------

    @app.post("/protocols", status_code=201)
    def create_protocol(doc: dict) -> dict:
        protocol = protocol_from_dict(doc)
        report = validate_abstract_protocol(protocol)
        if not report.ok:
            raise ValidationFailed("protocol failed validation", report)
        state.abstract[protocol.id] = protocol
        if state.store is not None:
            save_artifact(
                state.store,
                LibraryEntry(
                    id=protocol.id,
                    kind="abstract",
                    document=protocol.to_dict(),
                    tags=frozenset(protocol.tags),
                ),
            )
        return {"id": protocol.id, "hash": content_hash(protocol.to_dict())}

    @app.get("/protocols")
    def list_protocols() -> list[dict]:
        return [
            {"id": p.id, "tags": sorted(p.tags), "hash": content_hash(p.to_dict())}
            for p in sorted(state.abstract.values(), key=lambda p: p.id)
        ]

    @app.get("/protocols/{protocol_id}")
    def get_protocol(protocol_id: str) -> dict:
        return state.get_abstract(protocol_id).to_dict()

    @app.post("/protocols/{protocol_id}/implementations", status_code=201)
    def create_implementation(protocol_id: str, body: dict) -> dict:
        abstract = state.get_abstract(protocol_id)
        new_resources = [
            ImplementedResource(
                id=r["id"], kind=r["kind"], label=r.get("label", ""), locator=r.get("locator")
            )
            for r in body.get("new_resources", [])
        ]
        reference = implemented_from_dict(
            {"id": body.get("id", f"{protocol_id}-impl"), **body}, abstract
        )
        implemented = implement_protocol(
            abstract,
            reference.resource_map,
            reference.activity_map,
            state.environment,
            new_resources=new_resources,
            protocol_id=reference.id,
        )
        state.implemented[implemented.id] = implemented
        state.persist_environment()
        if state.store is not None:
            save_artifact(
                state.store,
                LibraryEntry(
                    id=implemented.id, kind="implemented", document=implemented.to_dict()
                ),
            )
        return implemented.to_dict()

    @app.get("/implementations/{protocol_id}")
    def get_implementation(protocol_id: str) -> dict:
        return state.get_implemented(protocol_id).to_dict()

    # -- processes ---------------------------------------------------------

    @app.post("/processes", status_code=201)
    def create_process(body: dict) -> dict:
        implemented = state.get_implemented(body["implemented_protocol_id"])
        assignment = {
            role: set(members) for role, members in body.get("assignment", {}).items()
        }
        process = instantiate(
            implemented,
            assignment,
            state.environment,
            process_id=body.get("id"),
            clock=state.clock,
        )
        state.processes[process.id] = process
        state.persist_process(process)
        state.persist_environment()
        return process_to_dict(process)

    @app.get("/processes")
    def list_processes() -> list[dict]:
        result = []
        for process in sorted(state.processes.values(), key=lambda p: p.id):
            with process.lock:
                result.append(
                    {
                        "id": process.id,
                        "implemented_protocol_id": process.protocol.id,
                        "status": process.status,
                        "marking": sorted(process.marking),
                    }
                )
        return result

    @app.get("/processes/{process_id}")
    def get_process(process_id: str) -> dict:
        return process_to_dict(state.get_process(process_id))

    @app.get("/processes/{process_id}/protocol")
    def get_process_protocol(process_id: str) -> dict:
        # The instance's own (possibly adapted) protocol, embedded form.
        process = state.get_process(process_id)
        with process.lock:
            return process.protocol.to_full_dict()

    @app.get("/processes/{process_id}/enabled")
    def get_enabled(process_id: str, request: Request, collaborator: str = Query(default="")) -> list[str]:
        process = state.get_process(process_id)
        return enabled_activities(process, _identity(request, query=collaborator))

    @app.post("/processes/{process_id}/fire")
    def post_fire(process_id: str, body: dict, request: Request) -> dict:
        process = state.get_process(process_id)
        event = fire(
            process,
            _identity(request, body=body),
            body["activity"],
            payload=body.get("payload"),
        )
        state.persist_process(process)
        return event.to_dict()

    @app.post("/processes/{process_id}/status")
    def post_status(process_id: str, body: dict) -> dict:
        process = state.get_process(process_id)
        set_process_status(process, body.get("status", ""))
        state.persist_process(process)
        with process.lock:
            return {"id": process.id, "status": process.status}

    # -- adaptation ----------------------------------------------------------

    @app.post("/processes/{process_id}/meta", status_code=201)
    def post_meta(process_id: str, body: dict) -> dict:
        process = state.get_process(process_id)
        participants = {
            role: set(members) for role, members in body.get("participants", {}).items()
        }
        meta = start_meta_process(
            process,
            participants,
            state.environment,
            meta_id=body.get("id"),
            clock=state.clock,
        )
        state.metas[meta.id] = meta
        state.persist_process(process)
        return meta.to_dict()

    @app.get("/processes/{process_id}/meta")
    def get_process_meta(process_id: str) -> dict:
        process = state.get_process(process_id)
        with process.lock:
            meta = process.pending_meta
        if meta is None:
            raise NotFound(f"process {process_id!r} has no pending meta-process", [process_id])
        return meta.to_dict()

    @app.get("/meta/{meta_id}")
    def get_meta(meta_id: str) -> dict:
        meta = state.get_meta(meta_id)
        doc = meta.to_dict()
        doc["process"] = process_to_dict(meta.process)
        return doc

    @app.post("/meta/{meta_id}/fire")
    def post_meta_fire(meta_id: str, body: dict, request: Request) -> dict:
        meta = state.get_meta(meta_id)
        if body.get("transaction") is not None and "payload" not in body:
            # Convenience: accept a structured transaction and inline it
            # as the opaque proposal payload.
            txn = transaction_from_dict(body["transaction"])
            body = {**body, "payload": {"transaction": canonical_json(txn.to_dict())}}
        event = fire(
            meta.process,
            _identity(request, body=body),
            body["activity"],
            payload=body.get("payload"),
        )
        return event.to_dict()

    @app.post("/meta/{meta_id}/conclude")
    def post_meta_conclude(meta_id: str) -> dict:
        meta = state.get_meta(meta_id)
        try:
            outcome = conclude_meta_process(meta, state.environment)
        finally:
            state.persist_process(meta.target)
        return {"id": meta.id, "outcome": outcome, "target": process_to_dict(meta.target)}

    # -- events ----------------------------------------------------------

    @app.get("/processes/{process_id}/events")
    async def get_events(
        process_id: str,
        request: Request,
        after: int = 0,
        wait: float = 0.0,
        stream: bool = False,
        max_events: int | None = None,
    ) -> Response:
        process = state.get_process(process_id)
        wants_sse = stream or "text/event-stream" in request.headers.get("accept", "")
        if wants_sse:

            async def generate():
                cursor = after
                sent = 0
                idle = 0.0
                while not await request.is_disconnected():
                    entries = _trace_after(process, cursor)
                    for doc in entries:
                        cursor = doc["seq"]
                        sent += 1
                        yield f"id: {doc['seq']}\ndata: {canonical_json(doc)}\n\n"
                        if max_events is not None and sent >= max_events:
                            return
                    if entries:
                        idle = 0.0
                    elif idle >= 15.0:
                        yield ": keep-alive\n\n"
                        idle = 0.0
                    await asyncio.sleep(POLL_INTERVAL_SECONDS)
                    idle += POLL_INTERVAL_SECONDS

            return StreamingResponse(generate(), media_type="text/event-stream")

        deadline = time.monotonic() + min(max(wait, 0.0), LONG_POLL_CAP_SECONDS)
        while True:
            entries = _trace_after(process, after)
            if entries or time.monotonic() >= deadline:
                break
            await asyncio.sleep(POLL_INTERVAL_SECONDS)
        next_cursor = entries[-1]["seq"] if entries else after
        return JSONResponse({"events": entries, "next": next_cursor})

    # -- environment ---------------------------------------------------------

    @app.get("/environment/resources")
    def list_resources() -> list[dict]:
        return [r.to_dict() for r in state.environment.resources()]

    @app.post("/environment/resources", status_code=201)
    def add_resource(body: dict) -> dict:
        resource = ImplementedResource(
            id=body["id"], kind=body["kind"], label=body.get("label", ""), locator=body.get("locator")
        )
        state.environment.add_resource(resource)
        state.persist_environment()
        return resource.to_dict()

    @app.get("/environment/relations")
    def list_relations() -> list[dict]:
        return [r.to_dict() for r in state.environment.relations()]

    @app.post("/environment/relations", status_code=201)
    def add_relation(body: dict) -> dict:
        added = state.environment.add_relation(body["source"], body["target"], body["label"])
        state.persist_environment()
        return {**body, "added": added}

    @app.get("/environment/substitutes")
    def get_substitutes(
        person: str,
        depth: int = 2,
        process: str = "",
        role: str = "",
    ) -> list[dict]:
        proc = state.get_process(process) if process else None
        hits = state.environment.find_substitutes(
            person,
            max_depth=depth,
            role=role or None,
            process=proc,
            verbose=True,
        )
        return [
            {"person": h.person, "distance": h.distance, "path": list(h.path), "labels": list(h.labels)}
            for h in hits
        ]

    # Static frontend, when a build exists next to the package or is
    # pointed at via state; purely additive.
    frontend_dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if frontend_dist.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=frontend_dist, html=True), name="ui")

    return app


def serve(
    addr: str = "127.0.0.1:8000",
    store_path: str | None = None,
    demo: bool = False,
    clock: Clock | None = None,
) -> None:
    """Run the service under uvicorn until interrupted."""
    import uvicorn

    state = ServiceState(
        clock=clock or SystemClock(),
        store=FileStore(store_path) if store_path else None,
    )
    if demo:
        seed_demo(state)
    host, _, port = addr.rpartition(":")
    uvicorn.run(create_app(state), host=host or "127.0.0.1", port=int(port))

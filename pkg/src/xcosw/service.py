"""HTTP simulation service.

Stateless by design: every request carries the whole diagram (XML text or
interchange JSON), the server compiles, simulates, and answers — nothing is
stored between calls.  Endpoints, all JSON under /api:

* ``POST /api/simulate`` — run a diagram, return diagnostics + result
* ``POST /api/validate`` — diagnostics only
* ``POST /api/convert``  — translate between XML and interchange JSON
* ``GET  /api/blocks``   — palette metadata for editors
* ``GET  /api/health``   — liveness probe

Replies: HTTP 400 for malformed request bodies, 422 with a diagnostics list
when the diagram cannot run, 408 when a run exceeds the wall-clock budget,
200 otherwise.  Error payloads carry ``{code, message}``; invalid diagrams
carry ``{status: "invalid", diagnostics: [...]}``.

Simulations execute on a bounded worker pool so concurrent requests cannot
oversubscribe the host.  An optional static directory (the browser editor
bundle) is served at ``/``.
"""

from __future__ import annotations

import asyncio
import functools
import logging
import os
import time
from contextlib import asynccontextmanager
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict, ValidationError

from .blocks import palette_json
from .compiler import Diagnostic, compile_diagram, validate
from .export import result_to_json
from .interchange import SchemaViolationError, from_interchange, to_interchange
from .model import Diagram, DiagramError, DuplicateIdError, OptionsError
from .solver import (
    NonFiniteError,
    SimulationTimeout,
    SolverError,
    StepUnderflowError,
    simulate,
)
from .xcosxml import (
    BadReferenceError,
    MissingRootCellsError,
    XcosXmlError,
    XmlSyntaxError,
    parse_xcos_xml,
    serialize_xcos_xml,
)

__all__ = ["create_app", "DEFAULT_BUDGET_S"]

DEFAULT_BUDGET_S = 30.0

logger = logging.getLogger("xcosw.service")


class OptionsPatch(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t0: float | None = None
    tf: float | None = None
    solver: str | None = None
    dt: float | None = None
    rtol: float | None = None
    atol: float | None = None
    max_step: float | None = None


class SimRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    diagram_xml: str | None = None
    diagram_json: dict | None = None
    options: OptionsPatch | None = None


class ConvertRequest(SimRequest):
    to: str = "json"


class _BadRequest(Exception):
    def __init__(self, message: str):
        self.message = message


class _InvalidDiagram(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics


def _parse_error_code(exc: Exception) -> str:
    if isinstance(exc, XmlSyntaxError):
        return "XML_SYNTAX"
    if isinstance(exc, MissingRootCellsError):
        return "MISSING_ROOT_CELLS"
    if isinstance(exc, DuplicateIdError):
        return "DUPLICATE_ID"
    if isinstance(exc, BadReferenceError):
        return "BAD_REFERENCE"
    if isinstance(exc, SchemaViolationError):
        return "SCHEMA_VIOLATION"
    return "BAD_DIAGRAM"


async def _read_request(request: Request, model):
    try:
        body = await request.json()
    except Exception as e:
        raise _BadRequest(f"request body is not valid JSON: {e}") from None
    try:
        parsed = model.model_validate(body)
    except ValidationError as e:
        raise _BadRequest(f"request does not match the {model.__name__} schema: "
                          + "; ".join(err["msg"] for err in e.errors())) from None
    if (parsed.diagram_xml is None) == (parsed.diagram_json is None):
        raise _BadRequest(
            "provide exactly one of 'diagram_xml' or 'diagram_json'"
        )
    return parsed


def _load_diagram(req: SimRequest) -> Diagram:
    try:
        if req.diagram_xml is not None:
            return parse_xcos_xml(req.diagram_xml)
        return from_interchange(req.diagram_json)
    except (XcosXmlError, SchemaViolationError, DiagramError) as e:
        raise _InvalidDiagram(
            [Diagnostic("error", _parse_error_code(e), (), str(e))]
        ) from None


def _merged_options(diagram: Diagram, patch: OptionsPatch | None):
    if patch is None:
        return diagram.settings
    opts = diagram.settings.override(**patch.model_dump())
    try:
        opts.check()
    except OptionsError as e:
        raise _InvalidDiagram(
            [Diagnostic("error", "BAD_OPTIONS", (), str(e))]
        ) from None
    return opts


def _error_json(status_code: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status_code,
        content={"status": "error", "code": code, "message": message},
    )


def _invalid_json(diagnostics) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={"status": "invalid", "diagnostics": [d.to_json() for d in diagnostics]},
    )


def create_app(
    budget_s: float = DEFAULT_BUDGET_S,
    jobs: int | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    """Build the application.

    Args:
        budget_s: wall-clock limit per simulation request.
        jobs: worker pool size (defaults to the CPU count).
        static_dir: directory served at ``/`` (the editor bundle), optional.
    """
    workers = jobs or os.cpu_count() or 2
    executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="xcosw-sim")

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="xcosw", lifespan=lifespan)
    app.state.executor = executor
    app.state.budget_s = budget_s

    @app.exception_handler(_BadRequest)
    async def _on_bad_request(request, exc: _BadRequest):
        return _error_json(400, "BAD_REQUEST", exc.message)

    @app.exception_handler(_InvalidDiagram)
    async def _on_invalid(request, exc: _InvalidDiagram):
        return _invalid_json(exc.diagnostics)

    @app.get("/api/health")
    async def health():
        return {"status": "ok"}

    @app.get("/api/blocks")
    async def blocks():
        return palette_json()

    @app.post("/api/validate")
    async def validate_endpoint(request: Request):
        req = await _read_request(request, SimRequest)
        try:
            diagram = _load_diagram(req)
            diagnostics = validate(diagram)
        except _InvalidDiagram as e:
            # validation answers 200 even for unparseable diagrams: the
            # diagnostics list *is* the answer
            diagnostics = e.diagnostics
        return {"status": "ok", "diagnostics": [d.to_json() for d in diagnostics]}

    @app.post("/api/simulate")
    async def simulate_endpoint(request: Request):
        req = await _read_request(request, SimRequest)
        diagram = _load_diagram(req)
        opts = _merged_options(diagram, req.options)
        diagnostics = validate(diagram)
        if any(d.severity == "error" for d in diagnostics):
            return _invalid_json(diagnostics)

        def run():
            system = compile_diagram(diagram)
            return simulate(system, opts, budget_s=budget_s)

        loop = asyncio.get_running_loop()
        started = time.perf_counter()
        try:
            result = await asyncio.wait_for(
                loop.run_in_executor(executor, run), timeout=budget_s * 1.5 + 1.0
            )
        except (SimulationTimeout, asyncio.TimeoutError) as e:
            logger.warning("simulation timed out: %s", e)
            return _error_json(408, "TIMEOUT",
                               f"simulation exceeded the {budget_s:g}s budget")
        except (NonFiniteError, StepUnderflowError, SolverError) as e:
            return JSONResponse(
                status_code=200,
                content={
                    "status": "error",
                    "code": type(e).__name__.removesuffix("Error").upper(),
                    "message": str(e),
                },
            )
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        return {
            "status": "ok",
            "diagnostics": [d.to_json() for d in diagnostics],
            "result": result_to_json(result),
            "timing_ms": round(elapsed_ms, 3),
        }

    @app.post("/api/convert")
    async def convert_endpoint(request: Request):
        req = await _read_request(request, ConvertRequest)
        if req.to not in ("xml", "json"):
            raise _BadRequest("'to' must be 'xml' or 'json'")
        diagram = _load_diagram(req)
        if req.to == "xml":
            return {"status": "ok", "diagram_xml": serialize_xcos_xml(diagram).decode("utf-8")}
        return {"status": "ok", "diagram_json": to_interchange(diagram)}

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="editor")
    else:
        @app.get("/")
        async def index():
            return {
                "service": "xcosw",
                "endpoints": ["/api/simulate", "/api/validate", "/api/convert",
                              "/api/blocks", "/api/health"],
            }

    return app

"""HTTP front end over the compiler: ``uvicorn revc.service:app``."""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__, pipeline
from .circuit import CircuitFormatError, loads
from .evaluator import SizeLimitExceeded

app = FastAPI(title="revc", version=__version__)


class Source(BaseModel):
    source: str = Field(..., description="program text")
    filename: str = "<request>"


class StatsModel(BaseModel):
    bits: int
    gates: int
    toffolis: int


class CompileRequest(Source):
    mode: Literal["default", "space"] = "default"
    cleanup: Literal["eager", "lazy"] = "lazy"


class CompileResponse(BaseModel):
    signature: str
    stats: StatsModel
    circuit: str


class RunRequest(Source):
    inputs: list[str] = Field(..., description="one bit string for all inputs, or one per parameter")


class RunResponse(BaseModel):
    outputs: str


class SimulateRequest(BaseModel):
    circuit: str
    inputs: str


class CheckRequest(Source):
    circuit: Optional[str] = None


class CheckResponse(BaseModel):
    ok: bool
    lines: list[str]
    modular: bool = False


def _load(req: Source) -> pipeline.Program:
    try:
        return pipeline.load_source(req.source, req.filename)
    except pipeline.UserError as e:
        raise HTTPException(status_code=422, detail=str(e)) from None


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/compile", response_model=CompileResponse)
def compile_endpoint(req: CompileRequest) -> CompileResponse:
    prog = _load(req)
    try:
        unit = pipeline.compile_(prog, req.mode, req.cleanup)
    except SizeLimitExceeded as e:
        raise HTTPException(status_code=413, detail=str(e)) from None
    except pipeline.UserError as e:
        raise HTTPException(status_code=422, detail=str(e)) from None
    return CompileResponse(signature=str(prog.signature), stats=StatsModel(**unit.stats.as_dict()),
                           circuit=pipeline.circuit_text(unit, req.filename))


@app.post("/run", response_model=RunResponse)
def run_endpoint(req: RunRequest) -> RunResponse:
    prog = _load(req)
    try:
        bits = pipeline.program_inputs(prog, req.inputs)
        return RunResponse(outputs=pipeline.format_bits(pipeline.run(prog, bits)))
    except pipeline.CheckFailure as e:
        raise HTTPException(status_code=409, detail=str(e)) from None
    except pipeline.UserError as e:
        raise HTTPException(status_code=422, detail=str(e)) from None


@app.post("/simulate", response_model=RunResponse)
def simulate_endpoint(req: SimulateRequest) -> RunResponse:
    try:
        cf = loads(req.circuit)
        bits = pipeline.parse_bits(req.inputs, len(cf.inputs))
        return RunResponse(outputs=pipeline.format_bits(pipeline.simulate(cf, bits)))
    except (CircuitFormatError, ValueError) as e:
        raise HTTPException(status_code=422, detail=str(e)) from None


@app.post("/check", response_model=CheckResponse)
def check_endpoint(req: CheckRequest) -> CheckResponse:
    prog = _load(req)
    try:
        circuit = loads(req.circuit) if req.circuit else None
        report = pipeline.check(prog, circuit)
    except (CircuitFormatError, *pipeline.UserError) as e:
        raise HTTPException(status_code=422, detail=str(e)) from None
    return CheckResponse(ok=report.ok and not report.notes, lines=report.lines(req.filename),
                         modular=report.modular)

"""HTTP service around the workbench handlers.

Requests carry the same problem documents the CLI reads from disk (rationals
as decimal-free strings, so payloads stay bit-exact); responses carry the
canonical report object plus, when asked, the DOT rendering.  The CLI is a
thin client over these endpoints and produces identical output in-process.
"""

from __future__ import annotations

from typing import List, Optional, Union

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import handlers
from .errors import (GitstrataError, ProblemFormatError, SemanticError,
                     UnsupportedBlowupError)

app = FastAPI(title="gitstrata",
              description="Exact stability and stratification computations "
                          "for linear torus actions and point configurations")


class ProblemRequest(BaseModel):
    problem: Union[dict, str] = Field(
        description="Problem document (torus fields or {'p1n': n}) or a "
                    "'p1n:N' specifier string")


class HmRequest(ProblemRequest):
    support: List[int]


class StrataRequest(ProblemRequest):
    dot: bool = False
    workers: int = 1


class RefineRequest(ProblemRequest):
    dot: bool = False
    depth_cap: int = 4096


class ClassifyRequest(BaseModel):
    n: int
    partition: Optional[str] = None
    points: Optional[str] = None


class EnumerateRequest(BaseModel):
    n: int


class ComponentsRequest(BaseModel):
    n: int
    label: str


class ReportResponse(BaseModel):
    report: dict
    dot: Optional[str] = None
    complete: Optional[bool] = None


def _guard(exc: GitstrataError) -> HTTPException:
    if isinstance(exc, ProblemFormatError):
        return HTTPException(status_code=400,
                             detail={"code": "PARSE", "message": str(exc)})
    if isinstance(exc, UnsupportedBlowupError):
        return HTTPException(status_code=422,
                             detail={"code": "UNSUPPORTED_BLOWUP", "message": str(exc)})
    return HTTPException(status_code=422,
                         detail={"code": "SEMANTIC", "message": str(exc)})


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok"}


@app.post("/hm", response_model=ReportResponse)
def hm(req: HmRequest) -> ReportResponse:
    try:
        loaded = handlers.load_problem_doc(req.problem)
        if loaded.kind != "torus":
            raise SemanticError("stability verdicts need a torus problem")
        assert loaded.torus is not None
        report = handlers.run_hm(loaded.torus, req.support)
    except GitstrataError as exc:
        raise _guard(exc) from exc
    return ReportResponse(report=report)


@app.post("/strata", response_model=ReportResponse)
def strata(req: StrataRequest) -> ReportResponse:
    try:
        loaded = handlers.load_problem_doc(req.problem)
        if loaded.kind != "torus":
            raise SemanticError("the instability stratification needs a torus problem")
        assert loaded.torus is not None
        report, dot = handlers.run_strata(loaded.torus, workers=req.workers)
    except GitstrataError as exc:
        raise _guard(exc) from exc
    return ReportResponse(report=report, dot=dot if req.dot else None)


@app.post("/refine", response_model=ReportResponse)
def refine_endpoint(req: RefineRequest) -> ReportResponse:
    try:
        loaded = handlers.load_problem_doc(req.problem)
        report, dot, complete = handlers.run_refine(loaded, depth_cap=req.depth_cap)
    except GitstrataError as exc:
        raise _guard(exc) from exc
    return ReportResponse(report=report, dot=dot if req.dot else None,
                          complete=complete)


@app.post("/p1n/classify", response_model=ReportResponse)
def p1n_classify(req: ClassifyRequest) -> ReportResponse:
    try:
        report = handlers.run_p1n_classify(req.n, partition=req.partition,
                                           points=req.points)
    except GitstrataError as exc:
        raise _guard(exc) from exc
    return ReportResponse(report=report)


@app.post("/p1n/enumerate", response_model=ReportResponse)
def p1n_enumerate(req: EnumerateRequest) -> ReportResponse:
    try:
        report = handlers.run_p1n_enumerate(req.n)
    except GitstrataError as exc:
        raise _guard(exc) from exc
    return ReportResponse(report=report)


@app.post("/p1n/components", response_model=ReportResponse)
def p1n_components(req: ComponentsRequest) -> ReportResponse:
    try:
        report = handlers.run_p1n_components(req.n, req.label)
    except GitstrataError as exc:
        raise _guard(exc) from exc
    return ReportResponse(report=report)

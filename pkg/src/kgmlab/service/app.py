"""HTTP facade over the experiment runners.

Run with: uvicorn kgmlab.service.app:app
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__, experiments
from ..errors import ConfigError, HypothesisRefusedError
from . import schemas

app = FastAPI(title="kgmlab", version=__version__)


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/solve", response_model=schemas.SolveResponse)
def solve(req: schemas.SolveRequest) -> schemas.SolveResponse:
    return experiments.run_solve(req)


@app.post("/sweep", response_model=schemas.SweepResponse)
def sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
    try:
        return experiments.run_sweep(req)
    except HypothesisRefusedError as exc:
        raise HTTPException(status_code=422, detail=f"refused: {exc}")
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.post("/phase-ratio", response_model=schemas.PhaseRatioResponse)
def phase_ratio(req: schemas.PhaseRatioRequest) -> schemas.PhaseRatioResponse:
    try:
        return experiments.run_phase_ratio(req)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.post("/aubin-scan", response_model=schemas.AubinScanResponse)
def aubin_scan(req: schemas.AubinScanRequest) -> schemas.AubinScanResponse:
    try:
        return experiments.run_aubin_scan(req)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.post("/pohozaev", response_model=schemas.PohozaevResponse)
def pohozaev(req: schemas.PohozaevRequest) -> schemas.PohozaevResponse:
    try:
        return experiments.run_pohozaev(req)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.post("/gauge-check", response_model=schemas.GaugeCheckResponse)
def gauge_check(req: schemas.GaugeCheckRequest) -> schemas.GaugeCheckResponse:
    try:
        return experiments.run_gauge_check(req)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc))

"""FastAPI service wrapping the library.

Endpoints mirror the CLI one to one: the registry listing, running a single
reproduction, running a configured experiment, and loading a persisted
report.  Artifact files land on the service-side filesystem under the
requested output directory (or the SPLITRATE_OUTPUT_ROOT env var).
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..experiments import output_root, run_experiment, run_reproduction
from ..problems import PROBLEM_BUILDERS
from ..registry import REPRODUCTIONS, registry_listing
from .models import (HealthResponse, RegistryResponse, ReportResponse,
                     ReproduceRequest, ReproduceResponse, RunRequest,
                     RunResponse)

app = FastAPI(title="splitrate", version=__version__,
              description="operator-splitting solvers with an executable "
                          "convergence-rate verification harness")


@app.get("/health", response_model=HealthResponse)
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/registry", response_model=RegistryResponse)
def registry() -> dict:
    return {"reproductions": registry_listing(),
            "problems": sorted(PROBLEM_BUILDERS)}


@app.post("/reproduce/{name}", response_model=ReproduceResponse)
def reproduce_endpoint(name: str, request: ReproduceRequest = None) -> dict:
    if name not in REPRODUCTIONS:
        raise HTTPException(
            status_code=404,
            detail={"error": f"unknown reproduction {name!r}",
                    "registry": sorted(REPRODUCTIONS)})
    request = request or ReproduceRequest()
    outdir = request.output_dir
    if outdir is None:
        outdir = str(output_root() / "reproductions" / name)
    report = run_reproduction(name, output_dir=outdir)
    return {
        "name": report["name"],
        "criterion": report["criterion"],
        "passed": report["passed"],
        "exit_code": report["exit_code"],
        "checks": report["checks"],
        "values": report["values"],
        "artifacts": report.get("artifacts", []),
    }


@app.post("/experiments", response_model=RunResponse)
def run_endpoint(request: RunRequest) -> dict:
    outdir = request.output_dir
    if outdir is None:
        outdir = str(output_root() / "experiments" / request.config.problem)
    try:
        report = run_experiment(request.config, output_dir=outdir)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return report


@app.get("/report", response_model=ReportResponse)
def report_endpoint(path: str) -> dict:
    p = Path(path)
    if p.is_dir():
        p = p / "report.json"
    if not p.exists():
        raise HTTPException(status_code=404, detail=f"no report at {p}")
    return {"path": str(p), "report": json.loads(p.read_text())}

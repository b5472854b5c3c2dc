"""Read-only what-if HTTP API backing the browser explorer.

The model (and optionally a cohort for report/density endpoints) is loaded
once at startup; every request is stateless and submitted records are
processed in memory only.
"""

from __future__ import annotations

from functools import lru_cache

from pathlib import Path

from fastapi import FastAPI, Query
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .analysis import change_frequency, kde_estimate
from .classifier import classify_unknown, score_counterfactual
from .engine import CfConfig, generate
from .errors import (
    AllClassesFailedError,
    CfexError,
    DegenerateSampleError,
    InvalidLockError,
    SchemaMismatchError,
)
from .model import Model
from .schema import Dataset, record_from_mapping


class WhatIfRequest(BaseModel):
    values: dict[str, float]
    locked: list[str] = Field(default_factory=list)
    k: int = 5
    targets: list[str] | None = None
    seed: int = 0


class ClassifyRequest(BaseModel):
    values: dict[str, float]
    k: int = 5
    seed: int = 0


def _error(status: int, code: str, message: str, detail=None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail},
    )


def create_app(
    model: Model,
    data: Dataset | None = None,
    default_seed: int = 0,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="what-if counterfactual service", version="1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    schema = model.schema
    immutable_names = {
        spec.name for spec in schema.features if spec.immutable
    }

    @app.exception_handler(CfexError)
    async def _cfex_error(_request, exc: CfexError):
        status = 400
        if isinstance(exc, (SchemaMismatchError, InvalidLockError)):
            status = 400
        elif isinstance(exc, AllClassesFailedError):
            status = 409
        elif isinstance(exc, DegenerateSampleError):
            status = 422
        return _error(status, type(exc).__name__.removesuffix("Error"), str(exc))

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request, exc: RequestValidationError):
        return _error(422, "ValidationError", "request does not match the endpoint schema",
                      detail=exc.errors())

    @app.exception_handler(ValueError)
    async def _value_error(_request, exc: ValueError):
        return _error(400, "InvalidParameter", str(exc))

    @app.get("/schema")
    def get_schema():
        return {
            "features": [
                {
                    "name": spec.name,
                    "immutable": spec.immutable,
                    "min": spec.min,
                    "max": spec.max,
                }
                for spec in schema.features
            ],
            "classes": list(schema.label_classes),
        }

    def _validate_locks(locked: list[str]) -> list[str]:
        unknown = [name for name in locked if name not in schema.feature_names]
        if unknown:
            raise SchemaMismatchError(f"unknown feature(s) in lock set: {', '.join(unknown)}")
        missing = immutable_names.difference(locked)
        if missing:
            raise InvalidLockError(
                "immutable features cannot be unlocked: " + ", ".join(sorted(missing))
            )
        return [name for name in locked if name not in immutable_names]

    @app.post("/whatif")
    def whatif(request: WhatIfRequest):
        record = record_from_mapping(schema, request.values)
        extra_locks = _validate_locks(request.locked)
        config = CfConfig(k=request.k, seed=request.seed)
        targets = request.targets or list(schema.label_classes)
        bad = [t for t in targets if t not in schema.label_classes]
        if bad:
            raise SchemaMismatchError(f"unknown target class(es): {', '.join(bad)}")

        per_class = {}
        for target in targets:
            cfset = generate(model, record, target, config, locked=extra_locks)
            members = cfset.converged_members()
            if not members:
                per_class[target] = {"error": "GenerationFailed"}
                continue
            entries = sorted(
                (score_counterfactual(model, record, m) for m in members),
                key=lambda e: (e.distance, len(e.changed)),
            )
            best = entries[0]
            per_class[target] = {
                "distance": best.distance,
                "changed": {
                    name: {"old": old, "new": new}
                    for name, (old, new) in best.counterfactual.delta.items()
                },
                "counterfactuals": [
                    {
                        "delta": {
                            name: {"old": old, "new": new}
                            for name, (old, new) in entry.counterfactual.delta.items()
                        },
                        "distance": entry.distance,
                    }
                    for entry in entries
                ],
            }
        succeeded = {
            t: v["distance"] for t, v in per_class.items() if "distance" in v
        }
        predicted = min(succeeded, key=succeeded.get) if succeeded else None
        return {
            "predicted": predicted,
            "per_class": per_class,
            "locked": sorted(immutable_names.union(request.locked)),
            "seed": request.seed,
        }

    @app.post("/classify")
    def classify(request: ClassifyRequest):
        record = record_from_mapping(schema, request.values)
        report = classify_unknown(
            model, record, CfConfig(k=request.k, seed=request.seed)
        )
        return report.to_json_dict()

    @lru_cache(maxsize=64)
    def _cached_changes(source: str, target: str, k: int, seed: int):
        assert data is not None
        config = CfConfig(k=k, seed=seed)
        cfsets = [generate(model, r, target, config) for r in data.of_class(source)]
        return change_frequency(cfsets, schema=schema).to_json_dict()

    @app.get("/reports/changes")
    def changes(
        source: str = Query(alias="from"),
        to: str = Query(),
        k: int = Query(default=5),
    ):
        if data is None:
            return _error(503, "NoCohort", "service started without --data")
        if source not in schema.label_classes or to not in schema.label_classes:
            return _error(404, "UnknownClass", f"unknown class in {source!r}->{to!r}")
        return _cached_changes(source, to, k, default_seed)

    @app.get("/kde")
    def kde(
        feature: str = Query(),
        label: str = Query(alias="class"),
    ):
        if data is None:
            return _error(503, "NoCohort", "service started without --data")
        if feature not in schema.feature_names:
            return _error(404, "UnknownFeature", f"unknown feature {feature!r}")
        if label not in schema.label_classes:
            return _error(404, "UnknownClass", f"unknown class {label!r}")
        j = schema.index_of(feature)
        samples = [float(r.values[j]) for r in data.of_class(label)]
        if len(samples) < 2:
            return _error(422, "DegenerateSample", f"class {label!r} has {len(samples)} sample(s)")
        curve = kde_estimate(samples)
        return {"feature": feature, "class": label, **curve.to_json_dict()}

    if ui_dir is not None:
        root = Path(ui_dir)
        if not (root / "index.html").exists():
            raise FileNotFoundError(f"{root} does not contain an index.html")
        # Mounted last: API routes above take precedence over static files.
        app.mount("/", StaticFiles(directory=root, html=True), name="ui")

    return app

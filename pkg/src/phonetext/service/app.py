"""HTTP front end over the operation handlers."""

from fastapi import FastAPI, HTTPException

from ..errors import ConfigError, DataError, DecodeError, OracleError, PhonetextError
from . import ops, schemas


def _http_error(exc: PhonetextError) -> HTTPException:
    if isinstance(exc, (DataError, ConfigError)):
        return HTTPException(status_code=422, detail=str(exc))
    if isinstance(exc, (DecodeError, OracleError)):
        return HTTPException(status_code=409, detail=str(exc))
    return HTTPException(status_code=500, detail=str(exc))


def create_app() -> FastAPI:
    app = FastAPI(title="phonetext", version="0.1.0")
    registry = ops.LmRegistry()

    def run(fn, *args):
        try:
            return fn(registry, *args)
        except PhonetextError as exc:
            raise _http_error(exc) from exc

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=app.version, loaded_models=registry.ids())

    @app.post("/lm/build", response_model=schemas.BuildLmResponse)
    def build_lm(req: schemas.BuildLmRequest):
        return run(ops.build_lm, req)

    @app.post("/lm/load", response_model=schemas.LmSummary)
    def load_lm(req: schemas.LoadLmRequest):
        return run(ops.load_lm, req)

    @app.get("/lm/{lm_id}", response_model=schemas.LmSummary)
    def get_lm(lm_id: str):
        try:
            pa = registry.get(lm_id)
        except DataError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return schemas.LmSummary(
            lm_id=lm_id,
            nodes=len(pa),
            words=len(pa.word_probs),
            word_total=pa.word_total,
            inventory=list(pa.inventory.symbols),
        )

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(req: schemas.SimulateRequest):
        return run(ops.simulate, req)

    @app.post("/decode", response_model=schemas.DecodeResultModel)
    def decode(req: schemas.DecodeRequest):
        return run(ops.decode, req)

    @app.post("/decode/batch", response_model=schemas.DecodeBatchResponse)
    def decode_batch(req: schemas.DecodeBatchRequest):
        return run(ops.decode_batch, req)

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(req: schemas.EvaluateRequest):
        return run(ops.evaluate, req)

    @app.post("/oracle-check", response_model=schemas.OracleCheckResponse)
    def oracle_check(req: schemas.OracleCheckRequest):
        return run(ops.oracle_check, req)

    return app

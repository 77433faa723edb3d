"""HTTP+JSON labeling service over LabelSession."""

from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel

from .session import LabelRecord, SessionConfig, SessionError, SessionStore, now_iso

_STATUS = {
    "not_found": 404,
    "unknown_item": 404,
    "no_batch": 409,
    "complete": 409,
    "duplicate_label": 409,
    "invalid_config": 400,
    "label_out_of_range": 400,
    "not_pending": 400,
    "corrupt_journal": 500,
}


class SessionCreateBody(BaseModel):
    manifest_path: str
    features_path: str
    taxonomy_path: str
    k: int = 190
    batch_size: int = 200
    iterations: int = 10
    classifier: str = "gbt"
    proba_weight: float = 10.0
    feature_mode: str = "image"
    slack: int = 1
    seed: int = 0
    standardize: bool = True


class LabelBody(BaseModel):
    item_id: str
    label_id: int
    annotator: str = "anonymous"
    at: Optional[str] = None


class SubmitBody(BaseModel):
    labels: list[LabelBody]


def create_app(store_root) -> FastAPI:
    app = FastAPI(title="screenclust labeling service")
    store = SessionStore(store_root)
    app.state.store = store

    @app.exception_handler(SessionError)
    async def _session_error(request: Request, exc: SessionError):
        return JSONResponse(
            status_code=_STATUS.get(exc.code, 400),
            content={"code": exc.code, "message": exc.message},
        )

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreateBody):
        session = store.create(SessionConfig(**body.model_dump()))
        return {"session_id": session.session_id, "iteration": session.engine.iteration}

    @app.get("/sessions/{session_id}/batch")
    def get_batch(session_id: str):
        return store.get(session_id).get_batch()

    @app.post("/sessions/{session_id}/labels")
    def submit_labels(session_id: str, body: SubmitBody):
        session = store.get(session_id)
        records = [LabelRecord(l.item_id, l.label_id, l.annotator, l.at or now_iso())
                   for l in body.labels]
        return session.submit_labels(records)

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str):
        return {"metrics": store.get(session_id).get_metrics()}

    @app.get("/sessions/{session_id}/items/{item_id}/image")
    def get_image(session_id: str, item_id: str):
        item = store.get(session_id).get_item(item_id)
        return FileResponse(item.image_path)

    @app.get("/sessions/{session_id}/items/{item_id}/text")
    def get_text(session_id: str, item_id: str):
        item = store.get(session_id).get_item(item_id)
        return {"item_id": item.id, "text": item.text}

    return app

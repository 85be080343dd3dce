"""HTTP service: inference, annotation persistence, model registry.

State lives in two places only: the manifest file (annotations, shared
with the CLI) and a models directory of npz artifacts. Models are
immutable once loaded; activation swaps a single registry mapping so a
request sees either the old pair or the new one, never a mix.
"""

import hashlib
import json
import os
import threading

from fastapi import FastAPI, Request, UploadFile
from fastapi.responses import JSONResponse, Response

from . import kernels
from .classifier.model import load_classifier
from .dataset import manifest as manifest_ops
from .dataset.imageio import decode_image
from .detector.model import load_detector
from .errors import DataError, EquimotionError, ModelError, NoRoiError
from .ethogram import (
    CueAnnotation,
    EmotionLabel,
    canonical_profile_table,
    classify_cues,
    cue_dimension_values,
)
from .pipeline import infer, result_to_json_bytes

MAX_UPLOAD_BYTES = 10 * 1024 * 1024


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": status, "message": message})


def _file_checksum(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return "sha256:" + digest.hexdigest()


def _artifact_kind(path: str) -> "str | None":
    try:
        import numpy as np
        with np.load(path) as z:
            if "__meta__" not in z.files:
                return None
            meta = json.loads(bytes(z["__meta__"]).decode())
        return meta.get("kind")
    except Exception:
        return None


class ModelRegistry:
    """Artifacts in a directory, addressed by version = file stem.

    The active pair is one immutable dict swapped under a lock; readers
    grab the reference once and never see a half-updated pair.
    """

    def __init__(self, models_dir: str):
        self.models_dir = models_dir
        self._lock = threading.Lock()
        self._active = {}  # kind -> {"entry": dict, "model": object}

    def scan(self) -> list:
        entries = []
        active = self._active
        if os.path.isdir(self.models_dir):
            for name in sorted(os.listdir(self.models_dir)):
                if not name.endswith(".npz"):
                    continue
                path = os.path.join(self.models_dir, name)
                kind = _artifact_kind(path)
                if kind not in ("detector", "classifier"):
                    continue
                version = name[:-4]
                loaded = kind in active and active[kind]["entry"]["version"] == version
                entries.append({
                    "kind": kind,
                    "version": version,
                    "path": path,
                    "loaded": loaded,
                    "checksum": _file_checksum(path),
                })
        return entries

    def activate(self, kind: str, version: str) -> dict:
        """Load an artifact and swap it in; raises on any load problem."""
        path = os.path.join(self.models_dir, version + ".npz")
        if not os.path.isfile(path):
            raise ModelError("no artifact for version %r" % version)
        actual_kind = _artifact_kind(path)
        if actual_kind != kind:
            raise ModelError("artifact %r holds a %s, not a %s"
                             % (version, actual_kind or "non-model file", kind))
        checksum = _file_checksum(path)
        model = load_detector(path) if kind == "detector" else load_classifier(path)
        if _file_checksum(path) != checksum:
            raise ModelError("artifact %r changed while loading" % version)
        entry = {"kind": kind, "version": version, "path": path,
                 "loaded": True, "checksum": checksum}
        with self._lock:
            swapped = dict(self._active)
            swapped[kind] = {"entry": entry, "model": model}
            self._active = swapped
        return entry

    def activate_available(self) -> None:
        """Best-effort startup activation: newest version per kind."""
        by_kind = {}
        for e in self.scan():
            by_kind[e["kind"]] = e  # sorted scan -> last wins
        for kind, entry in by_kind.items():
            try:
                self.activate(kind, entry["version"])
            except EquimotionError:
                pass

    def active_pair(self):
        """Snapshot of the jointly active models; read once per request."""
        return self._active

    def versions(self, active=None) -> dict:
        active = self._active if active is None else active
        return {kind: active[kind]["entry"]["version"] if kind in active else None
                for kind in ("detector", "classifier")}


def _annotation_to_wire(ann, index: int) -> dict:
    out = {
        "index": index,
        "image_id": ann.image_id,
        "box": ann.box.as_list(),
        "label": ann.label.label if ann.label is not None else None,
        "cues": ann.cues.as_dict() if ann.cues is not None else None,
        "override": ann.override,
    }
    return out


def create_app(manifest_path: str, models_dir: str, images_dir: str = None,
               activate_on_start: bool = True) -> FastAPI:
    """Build the service around one manifest file and one models dir."""
    app = FastAPI(title="equimotion", docs_url=None, redoc_url=None)
    registry = ModelRegistry(models_dir)
    write_lock = threading.Lock()
    if activate_on_start:
        registry.activate_available()

    def load_current_manifest():
        return manifest_ops.load_manifest(manifest_path)

    @app.get("/v1/health")
    def health():
        versions = registry.versions()
        ready = all(versions[k] for k in ("detector", "classifier"))
        return {
            "status": "ok" if ready else "degraded: no active models",
            "models": versions,
            "kernel_backend": kernels.BACKEND,
        }

    @app.get("/v1/models")
    def list_models():
        return {"models": registry.scan(), "active": registry.versions()}

    @app.post("/v1/models")
    async def activate_model(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body must be a JSON object")
        kind = body.get("kind")
        version = body.get("version")
        if kind not in ("detector", "classifier") or not isinstance(version, str):
            return _error(400, "need kind in {detector, classifier} and a version string")
        try:
            entry = registry.activate(kind, version)
        except EquimotionError as e:
            return _error(409, str(e))
        return {"activated": entry, "active": registry.versions()}

    @app.post("/v1/predict")
    async def predict_endpoint(image: UploadFile):
        pair = registry.active_pair()
        if "detector" not in pair or "classifier" not in pair:
            return _error(503, "no active models")
        data = await image.read()
        if len(data) > MAX_UPLOAD_BYTES:
            return _error(400, "upload exceeds %d bytes" % MAX_UPLOAD_BYTES)
        try:
            decoded = decode_image(data)
        except DataError as e:
            return _error(400, str(e))
        try:
            result = infer(pair["detector"]["model"], pair["classifier"]["model"], decoded)
        except NoRoiError as e:
            return _error(422, str(e))
        except ModelError as e:
            return _error(503, str(e))
        body = result_to_json_bytes(result, registry.versions(pair))
        return Response(content=body, media_type="application/json")

    @app.get("/v1/annotations")
    def list_annotations(image_id: str = None):
        manifest = load_current_manifest()
        out = []
        for i, ann in enumerate(manifest.annotations):
            if image_id is None or ann.image_id == image_id:
                out.append(_annotation_to_wire(ann, i))
        return {"annotations": out}

    @app.post("/v1/annotations")
    async def create_annotation(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body must be a JSON object")
        image_id = body.get("image_id")
        if not isinstance(image_id, str) or not image_id:
            return _error(400, "image_id required")
        try:
            box = manifest_ops.box_from_list(body.get("box", []))
        except DataError as e:
            return _error(400, str(e))
        label = None
        if body.get("label") is not None:
            try:
                label = EmotionLabel.from_name(body["label"])
            except ValueError as e:
                return _error(400, str(e))
        cues = None
        if body.get("cues") is not None:
            try:
                cues = CueAnnotation.from_dict(body["cues"])
            except (ValueError, TypeError) as e:
                return _error(400, str(e))
        replace_index = body.get("replace_index")

        with write_lock:
            try:
                manifest = load_current_manifest()
            except DataError as e:
                return _error(500, "manifest unreadable: %s" % e)
            try:
                record = manifest.record_by_id(image_id)
            except DataError:
                return _error(404, "unknown image id %r" % image_id)
            try:
                box = box.clamped(record.width, record.height)
            except DataError as e:
                return _error(400, str(e))

            warning = None
            override = False
            if label is not None and cues is not None:
                suggestion = classify_cues(cues)
                if suggestion.best != label:
                    override = True
                    warning = ("cue/label mismatch: cues suggest %s"
                               % suggestion.best.label)
            ann = manifest_ops.Annotation(image_id=image_id, box=box, label=label,
                                          cues=cues, override=override)
            if replace_index is None:
                manifest.annotations.append(ann)
                index = len(manifest.annotations) - 1
                status = 201
            else:
                if not isinstance(replace_index, int) or not (
                        0 <= replace_index < len(manifest.annotations)):
                    return _error(400, "replace_index out of range")
                if manifest.annotations[replace_index].image_id != image_id:
                    return _error(400, "replace_index belongs to a different image")
                manifest.annotations[replace_index] = ann
                index = replace_index
                status = 200
            try:
                manifest_ops.save_manifest(manifest, manifest_path)
            except DataError as e:
                return _error(400, str(e))
        return JSONResponse(status_code=status, content={
            "annotation": _annotation_to_wire(ann, index),
            "warning": warning,
        })

    @app.get("/v1/ethogram")
    def ethogram():
        table = canonical_profile_table()
        return {
            "order": [label.label for label in EmotionLabel],
            "dimensions": cue_dimension_values(),
            "profiles": {label.label: profile.as_dict()
                         for label, profile in table.items()},
        }

    app.state.registry = registry
    app.state.manifest_path = manifest_path
    app.state.images_dir = images_dir or os.path.dirname(os.path.abspath(manifest_path))
    return app

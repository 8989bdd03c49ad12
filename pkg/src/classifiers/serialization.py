"""
Versioned binary model container.

Layout (little-endian):
    magic   4 bytes  b"FDMB"
    version uint16
    hlen    uint32   length of the JSON header
    header  hlen bytes of UTF-8 JSON (parameters + array descriptors)
    payload raw array bytes, in descriptor order

Arrays are stored bit-for-bit, so a save/load round trip is exact.
"""

import hashlib
import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from .bdt import BdtModel, bdt_train
from .enn import EnnModel, enn_preprocess
from .knn import KnnModel
from .voting import VotingModel
from ..features.assembler import FeatureConfig
from ..features.wavelets import WaveletSpec
from ..utils.errors import ModelFormatError

logger = logging.getLogger(__name__)

MAGIC = b"FDMB"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<4sHI")

Model = Union[KnnModel, EnnModel, BdtModel]


def _model_parts(model: Model) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    if isinstance(model, KnnModel):
        return {"kind": "knn", "k": model.k}, {
            "train_matrix": model.train_matrix, "train_labels": model.train_labels,
        }
    if isinstance(model, EnnModel):
        return {"kind": "enn", "e": model.e, "class_counts": list(model.class_counts)}, {
            "train_matrix": model.train_matrix, "train_labels": model.train_labels,
            "neighbor_lists": model.neighbor_lists, "radius": model.radius,
        }
    if isinstance(model, BdtModel):
        return {"kind": "bdt", "dimension": model.dimension}, {
            "feature": model.feature, "threshold": model.threshold, "left": model.left,
            "right": model.right, "label": model.label, "counts": model.counts,
        }
    raise ModelFormatError(f"Cannot serialize object of type {type(model).__name__}")


def _build_model(params: Dict[str, Any], arrays: Dict[str, np.ndarray]) -> Model:
    kind = params.get("kind")
    if kind == "knn":
        return KnnModel(arrays["train_matrix"], arrays["train_labels"], int(params["k"]))
    if kind == "enn":
        return EnnModel(
            train_matrix=arrays["train_matrix"], train_labels=arrays["train_labels"],
            e=int(params["e"]), neighbor_lists=arrays["neighbor_lists"],
            radius=arrays["radius"], class_counts=tuple(params["class_counts"]),
        )
    if kind == "bdt":
        return BdtModel(
            feature=arrays["feature"], threshold=arrays["threshold"], left=arrays["left"],
            right=arrays["right"], label=arrays["label"], counts=arrays["counts"],
            dimension=int(params["dimension"]),
        )
    raise ModelFormatError(f"Unknown model kind '{kind}'")


def _pack(meta: Dict[str, Any], models: Dict[str, Model]) -> bytes:
    descriptors = []
    chunks = []
    offset = 0
    header = dict(meta)
    header["models"] = {}
    for slot, model in models.items():
        params, arrays = _model_parts(model)
        header["models"][slot] = params
        for name, array in arrays.items():
            array = np.ascontiguousarray(array)
            little = array.astype(array.dtype.newbyteorder("<"), copy=False)
            raw = little.tobytes()
            descriptors.append({
                "model": slot, "name": name, "dtype": little.dtype.str,
                "shape": list(array.shape), "offset": offset, "nbytes": len(raw),
            })
            chunks.append(raw)
            offset += len(raw)
    header["arrays"] = descriptors
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    return _PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header_bytes)) + header_bytes + b"".join(chunks)


def _unpack(blob: bytes) -> Tuple[Dict[str, Any], Dict[str, Model]]:
    if len(blob) < _PREAMBLE.size:
        raise ModelFormatError("model file is truncated")
    magic, version, header_len = _PREAMBLE.unpack_from(blob)
    if magic != MAGIC:
        raise ModelFormatError(f"not a model file (magic {magic!r})")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    start = _PREAMBLE.size
    try:
        header = json.loads(blob[start:start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"corrupt model header: {e}")
    payload = memoryview(blob)[start + header_len:]

    arrays: Dict[str, Dict[str, np.ndarray]] = {}
    for d in header.get("arrays", []):
        end = d["offset"] + d["nbytes"]
        if end > len(payload):
            raise ModelFormatError(f"array '{d['name']}' runs past end of file")
        array = np.frombuffer(payload[d["offset"]:end], dtype=np.dtype(d["dtype"]))
        arrays.setdefault(d["model"], {})[d["name"]] = array.reshape(d["shape"]).copy()

    models = {}
    for slot, params in header.get("models", {}).items():
        try:
            models[slot] = _build_model(params, arrays.get(slot, {}))
        except KeyError as e:
            raise ModelFormatError(f"model '{slot}' is missing array {e}")
    return header, models


def dumps_model(model: Model) -> bytes:
    return _pack({"kind": "model"}, {"model": model})


def loads_model(blob: bytes) -> Model:
    header, models = _unpack(blob)
    if header.get("kind") != "model" or "model" not in models:
        raise ModelFormatError("file does not hold a single model")
    return models["model"]


@dataclass(frozen=True, eq=False)
class ModelBundle:
    """Everything the gateway needs: feature config, record shape and the three models."""
    feature_config: FeatureConfig
    record_length: int
    fs: float
    voting: VotingModel
    model_id: str = ""

    def _meta(self) -> Dict[str, Any]:
        return {
            "kind": "bundle",
            "feature_config": self.feature_config.to_dict(),
            "record_length": int(self.record_length),
            "fs": float(self.fs),
        }

    def _models(self) -> Dict[str, Model]:
        return {"knn": self.voting.knn, "enn": self.voting.enn, "bdt": self.voting.bdt}

    def with_model_id(self) -> "ModelBundle":
        digest = hashlib.sha256(_pack(self._meta(), self._models())).hexdigest()[:16]
        return ModelBundle(self.feature_config, self.record_length, self.fs, self.voting, digest)

    def to_bytes(self) -> bytes:
        bundle = self if self.model_id else self.with_model_id()
        meta = bundle._meta()
        meta["model_id"] = bundle.model_id
        return _pack(meta, bundle._models())

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ModelBundle":
        header, models = _unpack(blob)
        if header.get("kind") != "bundle":
            raise ModelFormatError("file does not hold a model bundle")
        missing = {"knn", "enn", "bdt"} - set(models)
        if missing:
            raise ModelFormatError(f"bundle is missing models: {', '.join(sorted(missing))}")
        fc = header["feature_config"]
        wavelet = fc.get("wavelet")
        config = FeatureConfig.from_names(
            fc["enabled"], WaveletSpec(**wavelet) if wavelet else None
        )
        return cls(
            feature_config=config,
            record_length=int(header["record_length"]),
            fs=float(header["fs"]),
            voting=VotingModel(knn=models["knn"], enn=models["enn"], bdt=models["bdt"]),
            model_id=header.get("model_id", ""),
        )

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_bytes(self.to_bytes())
        logger.info(f"Saved model bundle to {path}")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ModelBundle":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Model file not found: {path}")
        bundle = cls.from_bytes(path.read_bytes())
        logger.info(f"Loaded model bundle {bundle.model_id} from {path}")
        return bundle


def train_bundle(matrix, labels, feature_config: FeatureConfig, record_length: int,
                 fs: float, k: int, e: int) -> ModelBundle:
    """Fit all three classifiers on a feature matrix and wrap them in a bundle."""
    voting = VotingModel(
        knn=KnnModel.fit(matrix, labels, k),
        enn=enn_preprocess(matrix, labels, e),
        bdt=bdt_train(matrix, labels),
    )
    return ModelBundle(feature_config, record_length, fs, voting).with_model_id()

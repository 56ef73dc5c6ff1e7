"""Common fitted-model container, JSON serialization and predict dispatch."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

SCHEMA_VERSION = 1
KINDS = ("MLR", "QR", "SVR", "ANN", "ENS")

_PREDICTORS: dict[str, Callable[["FittedModel", np.ndarray], np.ndarray]] = {}


def register_predictor(*kinds: str):
    def deco(fn):
        for k in kinds:
            _PREDICTORS[k] = fn
        return fn
    return deco


@dataclass(frozen=True)
class FittedModel:
    """Trained parameters for one regressor.

    ``params`` maps names to numpy arrays or scalars; arrays are made read-only
    so a fitted model can be shared across threads.
    """

    kind: str
    n_features: int
    params: dict
    diagnostics: dict = field(default_factory=dict)
    members: tuple["FittedModel", ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        for v in self.params.values():
            if isinstance(v, np.ndarray):
                v.setflags(write=False)

    def predict(self, X):
        return predict(self, X)

    def to_dict(self) -> dict:
        arrays = sorted(k for k, v in self.params.items() if isinstance(v, np.ndarray))
        params = {
            k: (v.tolist() if isinstance(v, np.ndarray) else _plain(v))
            for k, v in self.params.items()
        }
        return {
            "schema": SCHEMA_VERSION,
            "kind": self.kind,
            "n_features": self.n_features,
            "params": params,
            "arrays": arrays,
            "diagnostics": _plain(self.diagnostics),
            "members": [m.to_dict() for m in self.members],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FittedModel":
        if doc.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported model schema {doc.get('schema')!r}")
        arrays = set(doc.get("arrays", ()))
        params = {
            k: (np.asarray(v, dtype=float) if k in arrays else v)
            for k, v in doc["params"].items()
        }
        return cls(
            kind=doc["kind"],
            n_features=int(doc["n_features"]),
            params=params,
            diagnostics=dict(doc.get("diagnostics", {})),
            members=tuple(cls.from_dict(m) for m in doc.get("members", ())),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FittedModel":
        return cls.from_dict(json.loads(text))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def as_rows(model: FittedModel, X) -> tuple[np.ndarray, bool]:
    """Coerce a single row or a matrix of rows; check the feature count."""
    arr = np.asarray(X, dtype=float)
    single = arr.ndim <= 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[1] != model.n_features:
        raise ValueError(
            f"{model.kind} model expects {model.n_features} features, got shape {np.shape(X)}"
        )
    return arr, single


def predict(model: FittedModel, X):
    """Predict one row (returns float) or a matrix of rows (returns array)."""
    rows, single = as_rows(model, X)
    out = _PREDICTORS[model.kind](model, rows)
    return float(out[0]) if single else out

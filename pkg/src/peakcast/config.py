"""Experiment configuration (JSON) and regressor specifications."""
from __future__ import annotations

import json
from datetime import date
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .dataset import PREDICTORS, predictor_indices


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class InputPaths(_Strict):
    observed: Path
    energy: Path
    forecast: Optional[Path] = None


class SyntheticConfig(_Strict):
    """Generator for a self-contained dataset in the three CSV formats.

    Forecast value at horizon d = observed value - bias[var] + N(0, (noise_std[d-1] * variable_scale[var])^2),
    so ``bias`` is expressed in the reported Bias convention (observed minus
    forecast; negative means the forecasts overestimate). Sky cover and
    relative humidity forecasts are clipped to [0, 100].
    """

    days: int = 184
    start_date: date = date(2016, 5, 1)
    seed: Optional[int] = Field(default=None, ge=0)
    noise_std: list[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    variable_scale: dict[str, float] = Field(
        default_factory=lambda: {"S": 10.0, "D": 2.0, "R": 5.0, "T": 2.0}
    )
    bias: dict[str, float] = Field(default_factory=dict)
    coefficients: dict[str, float] = Field(
        default_factory=lambda: {"intercept": 80.0, "S": -0.3, "D": 0.8, "R": -0.5, "T": 0.4}
    )
    target_noise: float = Field(default=3.0, ge=0)

    @field_validator("days")
    @classmethod
    def _days(cls, v):
        if v <= 0:
            raise ValueError("days must be positive")
        return v

    @field_validator("noise_std")
    @classmethod
    def _noise(cls, v):
        if len(v) != 6 or any(s < 0 for s in v):
            raise ValueError("noise_std needs six nonnegative values, one per horizon")
        return v

    @field_validator("variable_scale", "bias")
    @classmethod
    def _vars(cls, v):
        bad = set(v) - set(PREDICTORS)
        if bad:
            raise ValueError(f"unknown variables {sorted(bad)}; use S, D, R, T")
        return v

    @field_validator("coefficients")
    @classmethod
    def _coef(cls, v):
        bad = set(v) - set(PREDICTORS) - {"intercept"}
        if bad:
            raise ValueError(f"unknown coefficient names {sorted(bad)}")
        return v


class MLRSpec(_Strict):
    kind: Literal["MLR"] = "MLR"
    name: Optional[str] = None


class QRSpec(_Strict):
    kind: Literal["QR"] = "QR"
    name: Optional[str] = None
    tau: float = Field(default=0.5, gt=0, lt=1)


class SVRSpec(_Strict):
    kind: Literal["SVR"] = "SVR"
    name: Optional[str] = None
    C: float = Field(default=1.0, gt=0)
    epsilon: float = Field(default=0.1, ge=0)
    kernel: Literal["linear", "rbf"] = "linear"
    gamma: Optional[float] = Field(default=None, gt=0)
    standardize: bool = True


class ANNSpec(_Strict):
    kind: Literal["ANN"] = "ANN"
    name: Optional[str] = None
    hidden_neurons: int = Field(default=10, ge=1)
    max_epochs: int = Field(default=100, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)


class ENSSpec(_Strict):
    kind: Literal["ENS"] = "ENS"
    name: Optional[str] = None
    members: list[str] = Field(default_factory=lambda: ["MLR", "QR", "SVR", "ANN"])
    weights: Union[Literal["equal", "optimized"], list[float]] = "equal"

    @model_validator(mode="after")
    def _check(self):
        if len(self.members) < 2:
            raise ValueError("an ensemble needs at least two members")
        if isinstance(self.weights, list):
            if len(self.weights) != len(self.members):
                raise ValueError("one weight per ensemble member")
            if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-10:
                raise ValueError("ensemble weights must be nonnegative and sum to 1")
        return self


RegressorSpec = Annotated[
    Union[MLRSpec, QRSpec, SVRSpec, ANNSpec, ENSSpec], Field(discriminator="kind")
]


def spec_name(spec) -> str:
    return spec.name or spec.kind


def _default_models():
    return [MLRSpec(), QRSpec(), SVRSpec(), ANNSpec(), ENSSpec()]


class BootstrapConfig(_Strict):
    B: int = Field(default=2500, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)


class ExperimentConfig(_Strict):
    inputs: Optional[InputPaths] = None
    synthetic: Optional[SyntheticConfig] = None
    seed: int = Field(default=0, ge=0, lt=2**64)
    predictors: str = "SDRT"
    models: list[RegressorSpec] = Field(default_factory=_default_models)
    bootstrap: BootstrapConfig = Field(default_factory=BootstrapConfig)
    bic_form: Literal["printed", "standard"] = "printed"
    holdout_fraction: float = Field(default=0.0, ge=0, lt=1)
    output_dir: Path = Path("out")
    workers: int = Field(default=1, ge=1)

    @field_validator("predictors")
    @classmethod
    def _predictors(cls, v):
        predictor_indices(v)
        return "".join(c for c in PREDICTORS if c in v.upper())

    @model_validator(mode="after")
    def _check(self):
        if self.inputs is None and self.synthetic is None:
            self.synthetic = SyntheticConfig()
        if not self.models:
            raise ValueError("model list is empty")
        names = [spec_name(m) for m in self.models]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate model names {names}; set 'name' to disambiguate")
        for m in self.models:
            if m.kind == "ENS":
                missing = [n for n in m.members if n not in names or n == spec_name(m)]
                if missing:
                    raise ValueError(f"ensemble members {missing} are not configured models")
        return self

    # seeds not given explicitly fall back to the master seed
    @property
    def synthetic_seed(self) -> int:
        s = self.synthetic.seed if self.synthetic else None
        return self.seed if s is None else s

    @property
    def bootstrap_seed(self) -> int:
        return self.seed if self.bootstrap.seed is None else self.bootstrap.seed

    def ann_seed(self, spec: ANNSpec) -> int:
        return self.seed if spec.seed is None else spec.seed

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Copy with every seed replaced by ``seed``."""
        doc = self.model_dump()
        doc["seed"] = seed
        if doc.get("synthetic"):
            doc["synthetic"]["seed"] = seed
        doc["bootstrap"]["seed"] = seed
        for m in doc["models"]:
            if m["kind"] == "ANN":
                m["seed"] = seed
        return ExperimentConfig.model_validate(doc)


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read a JSON config; relative paths resolve against the config file's directory."""
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    try:
        cfg = ExperimentConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    base = path.parent
    if cfg.inputs is not None:
        for field in ("observed", "energy", "forecast"):
            p = getattr(cfg.inputs, field)
            if p is not None and not p.is_absolute():
                setattr(cfg.inputs, field, base / p)
    if not cfg.output_dir.is_absolute():
        cfg.output_dir = base / cfg.output_dir
    return cfg

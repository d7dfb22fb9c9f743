"""
Configuration models for kronsolve runs using Pydantic V2.

Sections of a run manifest map one-to-one onto the models below. Fields left
empty (``None`` or an empty list) fall back to the benchmark's own defaults
when the run is resolved.
"""

import math
import os
import typing
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .exceptions import ManifestError

BenchmarkName = Literal["burgers", "elliptic", "eikonal", "allen_cahn", "poisson"]
DomainKind = Literal["box", "circle", "triangle"]
InitKind = Literal["zeros", "random"]
ParameterizationKind = Literal["nodal", "coefficients"]
OperatorMode = Literal["structured", "dense"]

ENV_PREFIX = "KRONSOLVE_"

_MODEL_CONFIG = {"validate_assignment": True, "extra": "forbid"}


def _is_list_field(annotation: Any) -> bool:
    origin = typing.get_origin(annotation)
    if origin in (list, List):
        return True
    if origin is typing.Union:
        return any(_is_list_field(arg) for arg in typing.get_args(annotation))
    return False


def _check_finite_nonnegative(name: str, v: Optional[float]) -> Optional[float]:
    if v is None:
        return v
    if not math.isfinite(v):
        raise ValueError(f"{name} must be finite")
    if v < 0:
        raise ValueError(f"{name} must be nonnegative")
    return v


class ConfigSection(BaseModel):
    """
    Base for manifest sections.

    Accepts the flat string values of the manifest file: an empty string
    means "unset" and list fields are comma-separated.
    """

    model_config = _MODEL_CONFIG

    @model_validator(mode="before")
    @classmethod
    def parse_flat_strings(cls, values: Any) -> Any:
        if not isinstance(values, Mapping):
            return values
        parsed: Dict[str, Any] = {}
        for key, value in values.items():
            info = cls.model_fields.get(key)
            if isinstance(value, str) and info is not None:
                text = value.strip()
                if _is_list_field(info.annotation):
                    value = [item.strip() for item in text.split(",") if item.strip()]
                elif text == "" and not info.is_required():
                    value = None if info.default is None else info.default
                else:
                    value = text
            parsed[key] = value
        return parsed


class BenchmarkSettings(ConfigSection):
    """Which PDE to solve and its physical parameters."""

    name: BenchmarkName = Field(default="elliptic", description="Benchmark problem")
    nu: Optional[float] = Field(
        default=None, description="Burgers viscosity (default 0.02)"
    )
    a: Optional[float] = Field(
        default=None, description="Allen-Cahn frequency parameter (default 15)"
    )
    eps: Optional[float] = Field(
        default=None, description="Eikonal regularization (default 0.1)"
    )
    gamma: float = Field(default=1.0, description="Allen-Cahn reaction strength")
    power: int = Field(default=3, description="Allen-Cahn reaction exponent")
    domain: DomainKind = Field(default="box", description="Domain shape")
    boundary_samples: int = Field(
        default=192, description="Boundary points sampled on irregular domains"
    )
    quad_nodes: int = Field(
        default=100, description="Gauss-Hermite nodes for the Burgers truth"
    )

    @field_validator("nu", "a", "eps")
    @classmethod
    def validate_positive_parameter(cls, v):
        if v is not None and (not math.isfinite(v) or v <= 0):
            raise ValueError("Benchmark parameters must be positive")
        return v

    @field_validator("boundary_samples")
    @classmethod
    def validate_boundary_samples(cls, v):
        if v < 3:
            raise ValueError("At least 3 boundary samples are required")
        return v

    @field_validator("quad_nodes")
    @classmethod
    def validate_quad_nodes(cls, v):
        if v < 32:
            raise ValueError("quad_nodes must be at least 32")
        return v


class GridSettings(ConfigSection):
    """Collocation grid shape; empty means the benchmark default."""

    shape: List[int] = Field(default_factory=list, description="Points per axis")

    @field_validator("shape")
    @classmethod
    def validate_shape(cls, v):
        if any(n < 2 for n in v):
            raise ValueError("Every axis needs at least 2 points")
        return v


class KernelSettings(ConfigSection):
    """Product SE kernel hyperparameters."""

    lengthscales: List[float] = Field(
        default_factory=list,
        description="Per-axis lengthscales; one value is broadcast to all axes",
    )
    nugget: Optional[float] = Field(
        default=None, description="Diagonal regularizer of each axis Gram (1e-8)"
    )

    @field_validator("lengthscales")
    @classmethod
    def validate_lengthscales(cls, v):
        for ls in v:
            if not math.isfinite(ls) or ls <= 0:
                raise ValueError("Lengthscales must be positive")
        return v

    @field_validator("nugget")
    @classmethod
    def validate_nugget(cls, v):
        return _check_finite_nonnegative("nugget", v)


class LossConfig(BaseModel):
    """Weights of the soft-regularized objective."""

    alpha: float = Field(default=1.0, description="Interior residual weight")
    beta: float = Field(default=1.0, description="Boundary residual weight")
    epsilon: float = Field(default=0.0, description="Residual relaxation level")

    model_config = _MODEL_CONFIG

    @field_validator("alpha", "beta", "epsilon")
    @classmethod
    def validate_weights(cls, v, info):
        return _check_finite_nonnegative(info.field_name, v)


class LossSettings(ConfigSection):
    """Loss weights as written in a manifest; unset weights use benchmark defaults."""

    alpha: Optional[float] = Field(default=None, description="Interior weight")
    beta: Optional[float] = Field(default=None, description="Boundary weight")
    epsilon: float = Field(default=0.0, description="Residual relaxation level")

    @field_validator("alpha", "beta", "epsilon")
    @classmethod
    def validate_weights(cls, v, info):
        return _check_finite_nonnegative(info.field_name, v)

    def resolve(self, alpha: float, beta: float) -> LossConfig:
        return LossConfig(
            alpha=self.alpha if self.alpha is not None else alpha,
            beta=self.beta if self.beta is not None else beta,
            epsilon=self.epsilon,
        )


class RunConfig(ConfigSection):
    """Optimizer and stopping settings."""

    max_iters: int = Field(default=1_000_000, description="Iteration cap")
    patience: int = Field(
        default=1000, description="Steps without relative improvement before stopping"
    )
    min_improvement: float = Field(
        default=1e-9, description="Relative decrease counted as an improvement"
    )
    log_every: int = Field(default=1000, description="Trace subsampling interval")
    seed: int = Field(default=0, description="Seed for random initialization")
    lr: float = Field(default=1e-3, description="ADAM learning rate")
    beta1: float = Field(default=0.9, description="ADAM first-moment decay")
    beta2: float = Field(default=0.999, description="ADAM second-moment decay")
    eps_stability: float = Field(default=1e-8, description="ADAM denominator guard")
    init: InitKind = Field(default="zeros", description="Initial nodal values")
    init_scale: float = Field(
        default=1e-2, description="Standard deviation of random initialization"
    )
    parameterization: ParameterizationKind = Field(
        default="nodal", description="Optimize nodal values or kernel coefficients"
    )
    divergence_threshold: float = Field(
        default=1e12,
        description="Growth over max(1, initial loss) at which the run has diverged",
    )

    @field_validator("max_iters", "patience", "log_every")
    @classmethod
    def validate_positive_count(cls, v):
        if v <= 0:
            raise ValueError("Iteration counts must be positive")
        return v

    @field_validator("lr", "init_scale", "divergence_threshold", "eps_stability")
    @classmethod
    def validate_positive_real(cls, v):
        if not math.isfinite(v) or v <= 0:
            raise ValueError("Value must be positive")
        return v

    @field_validator("min_improvement")
    @classmethod
    def validate_min_improvement(cls, v):
        return _check_finite_nonnegative("min_improvement", v)

    @field_validator("beta1", "beta2")
    @classmethod
    def validate_decay(cls, v):
        if not 0 <= v < 1:
            raise ValueError("ADAM decay rates must lie in [0, 1)")
        return v


class OutputSettings(ConfigSection):
    """Where results go and how runs are executed."""

    out_dir: str = Field(default="./runs/latest", description="Output directory")
    cache_dir: str = Field(
        default="./data/cache", description="Reference solution cache directory"
    )
    threads: int = Field(default=1, description="Worker threads for sweeps")
    sweep_cap: int = Field(default=256, description="Maximum sweep size")
    operator_mode: OperatorMode = Field(
        default="structured", description="Kronecker or naive dense operators"
    )

    @field_validator("threads", "sweep_cap")
    @classmethod
    def validate_positive(cls, v):
        if v <= 0:
            raise ValueError("Must be positive")
        return v


class RunManifest(BaseModel):
    """Complete description of one solve."""

    benchmark: BenchmarkSettings = Field(default_factory=BenchmarkSettings)
    grid: GridSettings = Field(default_factory=GridSettings)
    kernel: KernelSettings = Field(default_factory=KernelSettings)
    loss: LossSettings = Field(default_factory=LossSettings)
    optimizer: RunConfig = Field(default_factory=RunConfig)
    output: OutputSettings = Field(default_factory=OutputSettings)

    model_config = _MODEL_CONFIG


SECTION_NAMES = tuple(RunManifest.model_fields)


def validation_to_manifest_error(error: ValidationError) -> ManifestError:
    """Convert the first pydantic error into a ManifestError with a field path."""
    first = error.errors()[0]
    path = ".".join(str(p) for p in first.get("loc", ()))
    return ManifestError(first.get("msg", str(error)), field_path=path)


def build_manifest(data: Mapping[str, Any]) -> RunManifest:
    """Validate nested section data into a RunManifest."""
    try:
        return RunManifest.model_validate(dict(data))
    except ValidationError as e:
        raise validation_to_manifest_error(e) from e


def env_overrides(
    environ: Optional[Mapping[str, str]] = None,
) -> Dict[str, Dict[str, str]]:
    """
    Collect ``KRONSOLVE_<SECTION>__<FIELD>`` variables.

    Returns:
        Nested mapping section -> field -> raw string value
    """
    environ = os.environ if environ is None else environ
    overrides: Dict[str, Dict[str, str]] = {}
    for key, value in environ.items():
        if not key.startswith(ENV_PREFIX) or "__" not in key:
            continue
        section, _, name = key[len(ENV_PREFIX) :].lower().partition("__")
        if section not in SECTION_NAMES:
            raise ManifestError(f"unknown section in variable {key}", section)
        overrides.setdefault(section, {})[name] = value
    return overrides


def merge_sections(
    manifest: RunManifest, overrides: Mapping[str, Mapping[str, Any]]
) -> RunManifest:
    """Return a copy of ``manifest`` with section fields replaced."""
    data = manifest.model_dump()
    for section, fields in overrides.items():
        if section not in data:
            raise ManifestError("unknown section", section)
        data[section].update(fields)
    return build_manifest(data)


def get_run_manifest_config(
    base: Optional[RunManifest] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunManifest:
    """
    Apply environment overrides on top of a manifest (or the defaults).

    Environment Variables:
        KRONSOLVE_<SECTION>__<FIELD>: e.g. KRONSOLVE_LOSS__ALPHA=1e6,
            KRONSOLVE_KERNEL__LENGTHSCALES=0.1,0.1. Read after loading ``.env``.

    Returns:
        RunManifest with overrides applied
    """
    if environ is None:
        load_dotenv()
    base = base if base is not None else RunManifest()
    overrides = env_overrides(environ)
    if not overrides:
        return base
    return merge_sections(base, overrides)


def create_data_directory(path: str) -> Path:
    """Create an output or cache directory if needed."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


__all__ = [
    "BenchmarkName",
    "ConfigSection",
    "BenchmarkSettings",
    "GridSettings",
    "KernelSettings",
    "LossConfig",
    "LossSettings",
    "RunConfig",
    "OutputSettings",
    "RunManifest",
    "SECTION_NAMES",
    "build_manifest",
    "validation_to_manifest_error",
    "env_overrides",
    "merge_sections",
    "get_run_manifest_config",
    "create_data_directory",
]

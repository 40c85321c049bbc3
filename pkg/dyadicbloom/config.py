#!/usr/bin/env python3
# file: dyadicbloom/config.py
# Description: Runtime settings, experiment config schema, seed splitting and
# the worker pool used by experiment runs.
# License: MIT

"""Configuration for dyadicbloom runs.

Two layers:

* :class:`Settings` - process-wide knobs read from ``DYADICBLOOM_*``
  environment variables.
* :class:`ExperimentConfig` - one JSON experiment document, validated with
  ``jsonschema`` (Draft 7). Validation failures raise
  :class:`~dyadicbloom.exceptions.ConfigError` carrying the JSON pointer of the
  offending field.
"""

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import jsonschema

from .exceptions import ConfigError
from .lattice import MAX_DEPTH

logger = logging.getLogger(__name__)

__all__ = [
    "Settings",
    "get_settings",
    "EXPERIMENT_KINDS",
    "EXPERIMENT_SCHEMA",
    "ExperimentConfig",
    "validate_document",
    "load_config",
    "split_seed",
    "worker_pool",
    "run_indexed",
]

EXPERIMENT_KINDS = (
    "bmo-equivalence",
    "john-nirenberg",
    "h1-bmo",
    "full-paraproduct",
    "bloom",
    "vector-pairing",
    "maximal",
    "fefferman-stein",
    "omega-families",
)

RECIPE_NAMES = ("Constant", "Tensor", "PowerLike", "RandomBoundedRatio", "NonTensorMix")
OMEGA_STRATEGIES = ("AllRectangles", "RandomUnions", "LevelSets", "FullSpace")


@dataclass(frozen=True)
class Settings:
    """Environment driven runtime settings."""
    threads: int = 1
    tolerance: float = 1e-10
    multiplier: float = 2.0
    fixtures: str = "fixtures/"

    @classmethod
    def from_env(cls) -> "Settings":
        def _read(name, cast, default):
            raw = os.getenv(name)
            if raw is None or raw == "":
                return default
            try:
                return cast(raw)
            except ValueError:
                raise ConfigError(f"environment variable {name}={raw!r} is not a valid {cast.__name__}")

        threads = _read("DYADICBLOOM_THREADS", int, cls.threads)
        if threads < 1:
            raise ConfigError(f"DYADICBLOOM_THREADS must be >= 1, got {threads}")
        return cls(
            threads=threads,
            tolerance=_read("DYADICBLOOM_TOLERANCE", float, cls.tolerance),
            multiplier=_read("DYADICBLOOM_MULTIPLIER", float, cls.multiplier),
            fixtures=_read("DYADICBLOOM_FIXTURES", str, cls.fixtures),
        )


def get_settings() -> Settings:
    return Settings.from_env()


# ==================== Experiment schema ====================

EXPERIMENT_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "dyadicbloom experiment",
    "type": "object",
    "required": ["kind", "depths", "seed"],
    "additionalProperties": False,
    "definitions": {
        "recipe": {
            "type": "object",
            "required": ["recipe"],
            "properties": {
                "recipe": {"enum": list(RECIPE_NAMES)},
                "c": {"type": "number", "exclusiveMinimum": 0},
                "rho": {"type": "number", "minimum": 1, "maximum": 100},
                "seed": {"type": "integer", "minimum": 0},
                "exponents": {"type": "array", "items": {"type": "number"}},
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "factors": {"type": "array", "items": {"$ref": "#/definitions/recipe"}},
                "components": {"type": "array", "minItems": 1, "items": {"$ref": "#/definitions/recipe"}},
                "mixing": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
            },
        },
    },
    "properties": {
        "kind": {"enum": list(EXPERIMENT_KINDS)},
        "depths": {
            "type": "array",
            "minItems": 1,
            "maxItems": 3,
            "items": {"type": "integer", "minimum": 1, "maximum": MAX_DEPTH},
        },
        "seed": {"type": "integer", "minimum": 0},
        "samples": {"type": "integer", "minimum": 1},
        "weights": {"type": "array", "minItems": 1, "items": {"$ref": "#/definitions/recipe"}},
        "weights_per_recipe": {"type": "integer", "minimum": 1},
        "max_ap": {"type": "number", "minimum": 1},
        "exponents": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
        "omega": {
            "type": "object",
            "required": ["strategy"],
            "additionalProperties": False,
            "properties": {
                "strategy": {"enum": list(OMEGA_STRATEGIES)},
                "k": {"type": "integer", "minimum": 1},
                "count": {"type": "integer", "minimum": 1},
                "thresholds": {"type": "array", "items": {"type": "number"}},
            },
        },
        "support": {"type": "integer", "minimum": 1},
        "block_count": {"type": "integer", "minimum": 0},
        "complexity": {
            "type": "array",
            "minItems": 2,
            "maxItems": 2,
            "items": {"type": "integer", "minimum": 0},
        },
        "symmetries": {"type": "array", "items": {"type": "string"}},
        "functions": {"type": "integer", "minimum": 1},
        "s": {"type": "number", "exclusiveMinimum": 1},
    },
}


def _pointer(path) -> str:
    return "".join(f"/{part}" for part in path)


def validate_document(document: Any) -> None:
    """Validate ``document`` against :data:`EXPERIMENT_SCHEMA`.

    Raises:
        ConfigError: for the first error in document order, with its JSON pointer.
    """
    validator = jsonschema.Draft7Validator(EXPERIMENT_SCHEMA)
    errors = sorted(validator.iter_errors(document), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        first = errors[0]
        logger.debug("config rejected with %d schema error(s)", len(errors))
        raise ConfigError(first.message, _pointer(first.absolute_path))


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment document."""
    kind: str
    depths: Tuple[int, ...]
    seed: int
    samples: int = 50
    weights: Tuple[Dict[str, Any], ...] = ({"recipe": "Constant", "c": 1.0},)
    weights_per_recipe: int = 1
    max_ap: Optional[float] = None
    exponents: Tuple[float, ...] = (2.0,)
    omega: Dict[str, Any] = field(default_factory=lambda: {"strategy": "AllRectangles"})
    support: int = 4
    block_count: int = 3
    complexity: Tuple[int, int] = (1, 1)
    symmetries: Optional[Tuple[str, ...]] = None
    functions: int = 3
    s: float = 2.0

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "ExperimentConfig":
        validate_document(document)
        values = dict(document)
        for key in ("depths", "weights", "exponents", "complexity", "symmetries"):
            if key in values and values[key] is not None:
                values[key] = tuple(values[key])
        config = cls(**values)
        if config.kind == "bloom" and len(config.depths) != 3:
            raise ConfigError("bloom experiments need three depths", "/depths")
        if config.kind in ("full-paraproduct", "vector-pairing") and len(config.depths) != 2:
            raise ConfigError(f"{config.kind} experiments need two depths", "/depths")
        if config.kind == "full-paraproduct" and len(config.exponents) != 2:
            raise ConfigError("full-paraproduct needs exponents [p, q]", "/exponents")
        return config

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "kind": self.kind,
            "depths": list(self.depths),
            "seed": self.seed,
            "samples": self.samples,
            "weights": list(self.weights),
            "weights_per_recipe": self.weights_per_recipe,
            "exponents": list(self.exponents),
            "omega": dict(self.omega),
            "support": self.support,
            "block_count": self.block_count,
            "complexity": list(self.complexity),
            "functions": self.functions,
            "s": self.s,
        }
        if self.max_ap is not None:
            data["max_ap"] = self.max_ap
        if self.symmetries is not None:
            data["symmetries"] = list(self.symmetries)
        return data


def load_config(source: Union[str, Path, Dict[str, Any]]) -> ExperimentConfig:
    """Load and validate an experiment config from a path or a parsed dict."""
    if isinstance(source, dict):
        return ExperimentConfig.from_dict(source)
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}")
    return ExperimentConfig.from_dict(document)


# ==================== Seeds and workers ====================

def split_seed(master: int, index: int) -> int:
    """Derive the seed of sample ``index`` from the master seed.

    Uses the first 8 bytes of ``sha256(f"{master}:{index}")`` so sample seeds
    do not depend on scheduling order.
    """
    digest = hashlib.sha256(f"{master}:{index}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def worker_pool(threads: Optional[int] = None) -> ThreadPoolExecutor:
    """Thread pool sized by ``DYADICBLOOM_THREADS`` unless ``threads`` is given."""
    count = threads if threads is not None else get_settings().threads
    return ThreadPoolExecutor(max_workers=max(1, count), thread_name_prefix="dyadicbloom")


def run_indexed(function, count: int, threads: Optional[int] = None) -> List[Any]:
    """Evaluate ``function(i)`` for ``i < count`` and return results in index order."""
    with worker_pool(threads) as pool:
        return list(pool.map(function, range(count)))

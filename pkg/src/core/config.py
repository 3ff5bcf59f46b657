"""
Configuration
Runtime settings from the environment and JSON experiment configs validated against the pydantic schema
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Iterable, Optional, Tuple, Union

from dotenv import load_dotenv
from pydantic import ValidationError

from src.core.errors import ConfigError
from src.core.models import ExperimentSpec

load_dotenv()

logger = logging.getLogger(__name__)


class Settings:
    def __init__(self):
        self.log_level = os.getenv("TOMA_LOG_LEVEL", "INFO")
        self.log_dir = os.getenv("TOMA_LOG_DIR") or None
        self.output_dir = Path(os.getenv("TOMA_OUTPUT_DIR", "results"))
        self.threads = max(1, int(os.getenv("TOMA_THREADS", 1)))
        self.cache_size = max(0, int(os.getenv("TOMA_CACHE_SIZE", 4096)))


def _line_col(text: str, index: int) -> Tuple[int, int]:
    line = text.count("\n", 0, index) + 1
    column = index - (text.rfind("\n", 0, index) + 1) + 1
    return line, column


def _locate(text: str, loc: Iterable[Any]) -> Tuple[int, int]:
    """Best-effort position of a nested key path in the raw config text."""
    position = None
    start = 0
    for part in loc:
        if not isinstance(part, str):
            continue
        index = text.find(f'"{part}"', start)
        if index >= 0:
            position = index
            start = index + 1
    if position is None:
        return 1, 1
    return _line_col(text, position)


def parse_config(text: str) -> ExperimentSpec:
    """Parse and validate a JSON experiment config; empty text gives the default experiment."""
    if not text.strip():
        return ExperimentSpec()

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, e.lineno, e.colno) from e

    if not isinstance(data, dict):
        raise ConfigError("top level of the config must be an object")

    try:
        return ExperimentSpec.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = first.get("loc", ())
        line, column = _locate(text, loc)
        path = ".".join(str(p) for p in loc) or "<root>"
        raise ConfigError(f"{path}: {first.get('msg', 'invalid value')}", line, column) from e


def serialize_config(spec: ExperimentSpec) -> str:
    """Inverse of parse_config; infinite Rician factors are written as Infinity."""
    return json.dumps(spec.model_dump(), indent=2)


def load_config(path: Optional[Union[str, Path]]) -> ExperimentSpec:
    if path is None:
        logger.info("No config given, using the default experiment")
        return ExperimentSpec()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    spec = parse_config(text)
    logger.info(f"Loaded {spec.kind.value} experiment from {path}")
    return spec


def with_seed(spec: ExperimentSpec, seed: Optional[int]) -> ExperimentSpec:
    """Return spec with scenario.seed replaced (command-line override)."""
    if seed is None:
        return spec
    scenario = spec.scenario.model_copy(update={"seed": seed})
    return ExperimentSpec.model_validate({**spec.model_dump(), "scenario": scenario.model_dump()})

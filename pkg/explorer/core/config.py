from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, TypeVar, Union

from pydantic import BaseModel, ValidationError

from explorer.core.exceptions import ConfigError, InvalidParams
from explorer.schemas.run import RunConfig

ModelT = TypeVar("ModelT", bound=BaseModel)


class Settings(BaseModel):
    """Process-wide settings, adjusted by CLI flags."""

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_SERIALIZE: bool = False

    # Outputs
    DEFAULT_OUT_DIR: str = "runs"

    # Benchmarks
    PRECOMPUTE_TIMING_RUNS: int = 20


settings = Settings()


def ensure_valid(model: ModelT) -> ModelT:
    """Re-run validation on a parameter model (catches `model_construct` bypasses)."""
    try:
        return type(model).model_validate(model.model_dump())
    except ValidationError as exc:
        raise InvalidParams(str(exc)) from exc


FlatValue = Union[None, str, List[float], List[List[float]]]


def _decode(raw: str) -> FlatValue:
    if raw.lower() == "none":
        return None
    if ";" in raw:
        return [[float(x) for x in row.split(",")] for row in raw.split(";")]
    if "," in raw:
        return [float(x) for x in raw.split(",")]
    return raw


def _encode(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        if value and isinstance(value[0], (list, tuple)):
            return ";".join(",".join(repr(float(x)) for x in row) for row in value)
        return ",".join(repr(float(x)) for x in value)
    return str(value)


def parse_run_config(text: str) -> RunConfig:
    """Parse a flat `section.key=value` document; unknown keys are rejected."""
    sections: Dict[str, Dict[str, FlatValue]] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'section.key=value'", line=lineno)
        key, raw_value = (part.strip() for part in line.split("=", 1))
        section, _, field = key.partition(".")
        if section not in RunConfig.model_fields or not field:
            raise ConfigError("unknown section", line=lineno, key=key)
        model = RunConfig.model_fields[section].annotation
        if field not in model.model_fields:  # type: ignore[union-attr]
            raise ConfigError("unknown key", line=lineno, key=key)
        bucket = sections.setdefault(section, {})
        if field in bucket:
            raise ConfigError("duplicate key", line=lineno, key=key)
        try:
            bucket[field] = _decode(raw_value)
        except ValueError as exc:
            raise ConfigError(f"bad value '{raw_value}'", line=lineno, key=key) from exc

    try:
        return RunConfig.model_validate(sections)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def dump_run_config(config: RunConfig) -> str:
    """Serialize every key, defaults included, in section order."""
    lines = []
    for section in RunConfig.model_fields:
        block = getattr(config, section)
        for field in type(block).model_fields:
            lines.append(f"{section}.{field}={_encode(getattr(block, field))}")
    return "\n".join(lines) + "\n"


def load_run_config(path: Union[str, Path, None]) -> RunConfig:
    """Read a config file; `None` yields the defaults."""
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc.strerror}") from exc
    return parse_run_config(text)

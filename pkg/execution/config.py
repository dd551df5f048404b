import hashlib
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Union

import orjson
from pydantic import ValidationError

from assembly.errors import SimulationError

from .sim_models import SimConfig

logger = logging.getLogger(__name__)


def _config_error(e: ValidationError) -> SimulationError:
    first = e.errors()[0]
    where = ".".join(str(part) for part in first["loc"])
    return SimulationError("CONFIG_ERROR", f"{where}: {first['msg']}", errors=e.error_count())


def parse_config(data: Dict[str, Any]) -> SimConfig:
    """
    Validate a config mapping. ``[models.<skill>]`` tables may omit ``skill``;
    the table name supplies it.
    """
    data = dict(data)
    models = data.get("models")
    if isinstance(models, dict):
        data["models"] = {
            name: {"skill": name, **table} if isinstance(table, dict) else table
            for name, table in models.items()
        }
    try:
        return SimConfig.model_validate(data)
    except ValidationError as e:
        raise _config_error(e) from e


def loads_config(text: str) -> SimConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise SimulationError("CONFIG_ERROR", f"invalid TOML: {e}") from e
    return parse_config(data)


def load_config(path: Union[str, Path]) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise SimulationError("MISSING_FILE", f"no config at {path}", path=str(path)) from e
    except OSError as e:
        raise SimulationError("IO_ERROR", f"cannot read {path}: {e}", path=str(path)) from e
    try:
        config = loads_config(text)
    except SimulationError as e:
        raise SimulationError(e.code, f"{path.name}: {e.message}", path=str(path)) from e
    logger.debug("Loaded simulator config %s (%s)", path, config_hash(config)[:12])
    return config


def config_hash(config: SimConfig) -> str:
    """SHA-256 of the canonical config without its seed, shared by every trial of a run."""
    document = config.model_dump(mode="json", exclude={"seed"})
    return hashlib.sha256(orjson.dumps(document, option=orjson.OPT_SORT_KEYS)).hexdigest()

import os
import sys
from pathlib import Path
from typing import Dict, Iterable, Union

from loguru import logger
from dotenv import dotenv_values, find_dotenv, load_dotenv

from .errors import ConfigurationError


def _int_from_env(name: str, default: int, minimum: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.error(f"{name} must be an integer, got {raw!r}")
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        logger.error(f"{name} must be >= {minimum}, got {value}")
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return value


def get_settings():
    load_dotenv(find_dotenv(usecwd=True))

    # Base seed used when neither the CLI nor a config file sets one
    seed = _int_from_env("HYBRIDMD_SEED", 0, 0)

    # Upper bound on concurrent pipeline workers
    jobs = _int_from_env("HYBRIDMD_JOBS", 1, 1)

    log_level = os.getenv("HYBRIDMD_LOG_LEVEL", "INFO").upper()

    return {
        "seed": seed,
        "jobs": jobs,
        "log_level": log_level,
    }


def setup_logging(level: str = "INFO") -> None:
    """Route loguru output to a single stderr sink"""
    logger.remove()
    try:
        logger.add(sys.stderr, level=level.upper())
    except ValueError:
        logger.add(sys.stderr, level="INFO")
        logger.warning(f"Unknown log level '{level}', using INFO")


def load_config_file(path: Union[str, Path], allowed_keys: Iterable[str]) -> Dict[str, str]:
    """
    Read a flat key=value RunConfig file.

    Keys are the long CLI flag names with dashes replaced by underscores.
    Unknown keys and keys without a value are configuration errors.
    """
    path = Path(path)
    if not path.is_file():
        logger.error(f"Config file not found: {path}")
        raise ConfigurationError(f"config file not found: {path}")

    allowed = set(allowed_keys)
    values = dotenv_values(path)

    unknown = sorted(key for key in values if key not in allowed)
    if unknown:
        raise ConfigurationError(
            f"unknown keys in {path}: {', '.join(unknown)}; allowed: {', '.join(sorted(allowed))}"
        )

    result: Dict[str, str] = {}
    for key, value in values.items():
        if value is None:
            raise ConfigurationError(f"key '{key}' in {path} has no value")
        result[key] = value

    logger.debug(f"Loaded {len(result)} settings from {path}")
    return result

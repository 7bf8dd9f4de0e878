import os
import logging
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger('DiagCountConfig')

ORACLE_STRATEGIES = ("auto", "full", "closure")


@dataclass(frozen=True)
class Config:
    """Runtime knobs shared by the engine, the oracle and the CLI."""

    enumeration_budget: int = 2 ** 28
    workers: int = 1
    oracle_strategy: str = "auto"
    full_gl_limit: int = 200_000
    oracle_check_types: bool = False
    log_level: str = "WARNING"

    def __post_init__(self):
        if self.enumeration_budget < 1:
            raise ValueError(f"enumeration_budget must be positive, got {self.enumeration_budget}")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")
        if not isinstance(logging.getLevelName(self.log_level), int):
            raise ValueError(f"Unknown log level: {self.log_level}")
        if self.oracle_strategy not in ORACLE_STRATEGIES:
            raise ValueError(f"Unsupported oracle strategy: {self.oracle_strategy}")


def _read_yaml(path: str) -> Dict[str, Any]:
    """Load YAML configuration for DiagCount."""
    with open(path, 'r') as file:
        data = yaml.safe_load(file) or {}
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must contain a mapping")
    known = {f.name for f in fields(Config)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"Unknown config keys in {path}: {sorted(unknown)}")
    return data


def _from_env(environ) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if environ.get("DIAGCOUNT_THREADS"):
        overrides["workers"] = int(environ["DIAGCOUNT_THREADS"])
    if environ.get("DIAGCOUNT_BUDGET"):
        overrides["enumeration_budget"] = int(environ["DIAGCOUNT_BUDGET"])
    if environ.get("DIAGCOUNT_LOG_LEVEL"):
        overrides["log_level"] = environ["DIAGCOUNT_LOG_LEVEL"].upper()
    return overrides


def load_config(path: Optional[str] = None, environ=None, **overrides) -> Config:
    """
    Build a Config from defaults, an optional YAML file and the environment.
    :param path: YAML file; falls back to $DIAGCOUNT_CONFIG when omitted.
    :param environ: mapping used instead of os.environ (tests).
    :param overrides: explicit values, applied last (CLI flags).
    """
    environ = os.environ if environ is None else environ
    values: Dict[str, Any] = {}
    path = path or environ.get("DIAGCOUNT_CONFIG")
    if path:
        values.update(_read_yaml(path))
        logger.info(f"Loaded configuration from {path}")
    values.update(_from_env(environ))
    values.update({key: value for key, value in overrides.items() if value is not None})
    return replace(Config(), **values)

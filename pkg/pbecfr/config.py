import logging
import os
import sys
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from dotenv import load_dotenv

from .errors import ConfigError

# -----------------------------
# Config
# -----------------------------
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

DEFAULT_MAX_NODES = 10_000_000
DEFAULT_TOL = 1e-6
DEFAULT_BARGAIN_MAX_DRAWS = 1_000_000

# leaf-enumeration and chance-sum checks
PROB_TOL = 1e-12
ROW_TOL = 1e-9


@dataclass(frozen=True)
class Settings:
    log_level: str = "info"
    max_nodes: int = DEFAULT_MAX_NODES
    tol: float = DEFAULT_TOL
    bargain_max_draws: int = DEFAULT_BARGAIN_MAX_DRAWS


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(name, raw)
    if value <= 0:
        raise ConfigError(name, raw)
    return value


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(name, raw)
    if not value > 0:
        raise ConfigError(name, raw)
    return value


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    load_dotenv()
    level = (os.getenv("EFG_LOG") or "info").strip().lower()
    if level not in LOG_LEVELS:
        raise ConfigError("EFG_LOG", level)
    return Settings(
        log_level=level,
        max_nodes=_env_int("EFG_MAX_NODES", DEFAULT_MAX_NODES),
        tol=_env_float("EFG_TOL", DEFAULT_TOL),
        bargain_max_draws=_env_int("EFG_BARGAIN_MAX_DRAWS", DEFAULT_BARGAIN_MAX_DRAWS),
    )


def configure_logging(level: Optional[str] = None) -> None:
    name = level or get_settings().log_level
    logging.basicConfig(
        level=LOG_LEVELS[name],
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def rng(seed) -> np.random.Generator:
    """PCG64 generator; every seeded component in the package draws from one of these."""
    return np.random.Generator(np.random.PCG64(seed))
